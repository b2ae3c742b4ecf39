#include "msph/localize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace msph {

namespace {

double range_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

double rms(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum / static_cast<double>(v.size()));
}

std::string fmt9(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

ObservedCues make_observation(std::vector<double> freqs, std::vector<double> ild,
                              std::vector<double> itd) {
  if (freqs.empty() || ild.size() != freqs.size() || itd.size() != freqs.size()) {
    throw std::invalid_argument("observation: cue vectors must be non-empty and equally long");
  }
  ObservedCues obs;
  obs.ild_range = range_of(ild);
  obs.itd_range = range_of(itd);
  if (!(obs.ild_range > kMinIldRange) || !(obs.itd_range > kMinItdRange)) {
    std::ostringstream msg;
    msg << "observation: degenerate flat cues (ILD range " << obs.ild_range << " dB, ITD range "
        << obs.itd_range << " s)";
    throw DegenerateCueError(msg.str());
  }
  obs.freqs = std::move(freqs);
  obs.ild = std::move(ild);
  obs.itd = std::move(itd);
  return obs;
}

ObservedCues make_observation(const CueSpectrum& cues) {
  return make_observation(cues.freqs, cues.ild, cues.itd);
}

// ---------------------------------------------------------------------------
// Configuration

std::vector<Direction> OptimizerConfig::default_starts() {
  return {{kPi / 3.0, kPi / 4.0},
          {kPi / 3.0, 5.0 * kPi / 4.0},
          {2.0 * kPi / 3.0, 3.0 * kPi / 4.0},
          {2.0 * kPi / 3.0, 7.0 * kPi / 4.0}};
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("optimizer: learning_rate must be > 0");
  if (max_iters < 1) throw std::invalid_argument("optimizer: max_iters must be >= 1");
  if (patience < 1 || patience > max_iters) {
    throw std::invalid_argument("optimizer: patience must be in [1, max_iters]");
  }
  if (starts.empty()) throw std::invalid_argument("optimizer: at least one start is required");
}

LossWeights LossWeights::uniform(std::size_t bins) {
  return {std::vector<double>(bins, 1.0), std::vector<double>(bins, 1.0),
          std::vector<double>(bins, 1.0)};
}

void LossWeights::validate(std::size_t bins) const {
  if (freq.size() != bins || ild.size() != bins || itd.size() != bins) {
    throw std::invalid_argument("weights: length does not match the frequency grid");
  }
  bool any = false;
  for (std::size_t i = 0; i < bins; ++i) {
    if (freq[i] < 0.0 || ild[i] < 0.0 || itd[i] < 0.0) {
      throw std::invalid_argument("weights: negative weight");
    }
    any = any || (freq[i] > 0.0 && (ild[i] > 0.0 || itd[i] > 0.0));
  }
  if (!any) throw std::invalid_argument("weights: all weights are zero");
}

// ---------------------------------------------------------------------------
// Loss

LossAndGradient loss_and_gradient(double theta, double phi, const ObservedCues& obs,
                                  const CueModel& model, const LossWeights* weights) {
  const std::size_t n = model.bins();
  if (obs.ild.size() != n) throw std::invalid_argument("loss: observation grid mismatch");
  if (weights) weights->validate(n);
  const CueEvaluation e = model.evaluate(theta, phi, true);
  LossAndGradient out;
  for (std::size_t i = 0; i < n; ++i) {
    const double wf = weights ? weights->freq[i] : 1.0;
    const double wi = wf * (weights ? weights->ild[i] : 1.0);
    const double wt = wf * (weights ? weights->itd[i] : 1.0);
    const double ei = (e.ild[i] - obs.ild[i]) / obs.ild_range;
    const double et = (e.itd[i] - obs.itd[i]) / obs.itd_range;
    out.loss += wi * ei * ei + wt * et * et;
    out.d_theta += 2.0 * (wi * ei * e.dild_dtheta[i] / obs.ild_range +
                          wt * et * e.ditd_dtheta[i] / obs.itd_range);
    out.d_phi += 2.0 * (wi * ei * e.dild_dphi[i] / obs.ild_range +
                        wt * et * e.ditd_dphi[i] / obs.itd_range);
  }
  return out;
}

double weighted_loss(double theta, double phi, const ObservedCues& obs, const CueModel& model,
                     const LossWeights& weights) {
  const std::size_t n = model.bins();
  weights.validate(n);
  if (obs.ild.size() != n) throw std::invalid_argument("loss: observation grid mismatch");
  const CueEvaluation e = model.evaluate(theta, phi, false);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ei = (e.ild[i] - obs.ild[i]) / obs.ild_range;
    const double et = (e.itd[i] - obs.itd[i]) / obs.itd_range;
    loss += weights.freq[i] * (weights.ild[i] * ei * ei + weights.itd[i] * et * et);
  }
  return loss;
}

double normalized_loss(double theta, double phi, const ObservedCues& obs, const CueModel& model) {
  return weighted_loss(theta, phi, obs, model, LossWeights::uniform(model.bins()));
}

std::array<double, 2> loss_gradient(double theta, double phi, const ObservedCues& obs,
                                    const CueModel& model) {
  const auto g = loss_and_gradient(theta, phi, obs, model);
  return {g.d_theta, g.d_phi};
}

LossWeights variance_weights(const CueModel& model, const ObservedCues& obs,
                             const std::vector<double>& elevations, int azimuths) {
  const std::size_t n = model.bins();
  std::vector<double> sum_i(n, 0.0), sq_i(n, 0.0), sum_t(n, 0.0), sq_t(n, 0.0);
  int count = 0;
  for (double theta : elevations) {
    for (int a = 0; a < azimuths; ++a) {
      const CueEvaluation e = model.evaluate(theta, 2.0 * kPi * a / azimuths, false);
      for (std::size_t i = 0; i < n; ++i) {
        const double vi = e.ild[i] / obs.ild_range;
        const double vt = e.itd[i] / obs.itd_range;
        sum_i[i] += vi;
        sq_i[i] += vi * vi;
        sum_t[i] += vt;
        sq_t[i] += vt * vt;
      }
      ++count;
    }
  }
  LossWeights w{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double var_i = std::max(0.0, sq_i[i] / count - std::pow(sum_i[i] / count, 2));
    const double var_t = std::max(0.0, sq_t[i] / count - std::pow(sum_t[i] / count, 2));
    const double both = var_i + var_t;
    w.ild[i] = both > 0.0 ? var_i / both : 0.5;
    w.itd[i] = 1.0 - w.ild[i];
    w.freq[i] = both;
    total += both;
  }
  for (double& f : w.freq) f = total > 0.0 ? f * static_cast<double>(n) / total : 1.0;
  return w;
}

// ---------------------------------------------------------------------------
// Optimizer

Direction canonical_direction(double theta, double phi) {
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta < 0.0) {
    theta = -theta;
    phi += kPi;
  }
  if (theta > kPi) {
    theta = 2.0 * kPi - theta;
    phi += kPi;
  }
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi = 0.0;
  return {theta, phi};
}

namespace {

struct StartRun {
  std::vector<TrajectoryPoint> trajectory;
  TrajectoryPoint best;
  int iterations = 0;
  bool converged = false;
};

StartRun run_adam(const Direction& start, const ObservedCues& obs, const CueModel& model,
                  const OptimizerConfig& cfg, const LossWeights* weights) {
  StartRun run;
  Direction x = canonical_direction(start.theta, start.phi);
  LossAndGradient lg = loss_and_gradient(x.theta, x.phi, obs, model, weights);
  run.trajectory.push_back({x.theta, x.phi, lg.loss});
  run.best = run.trajectory.back();

  double m[2] = {0.0, 0.0}, v[2] = {0.0, 0.0};
  double b1t = 1.0, b2t = 1.0;
  int stale = 0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const double g[2] = {lg.d_theta, lg.d_phi};
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    double step[2];
    for (int k = 0; k < 2; ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double mhat = m[k] / (1.0 - b1t);
      const double vhat = v[k] / (1.0 - b2t);
      step[k] = cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    const double theta_raw = x.theta - step[0];
    // Crossing a pole reverses the sense of theta.
    if (theta_raw < 0.0 || theta_raw > kPi) m[0] = -m[0];
    x = canonical_direction(theta_raw, x.phi - step[1]);

    lg = loss_and_gradient(x.theta, x.phi, obs, model, weights);
    run.trajectory.push_back({x.theta, x.phi, lg.loss});
    run.iterations = it;
    if (lg.loss < run.best.loss) {
      run.best = run.trajectory.back();
      stale = 0;
    } else if (++stale >= cfg.patience) {
      run.converged = true;
      break;
    }
    if (std::hypot(lg.d_theta, lg.d_phi) < 1e-12) {
      run.converged = true;
      break;
    }
  }
  return run;
}

}  // namespace

LocalizationResult localize(const ObservedCues& obs, const CueModel& model,
                            const OptimizerConfig& cfg, const LossWeights* weights) {
  cfg.validate();
  LocalizationResult out;
  int best_index = -1;
  StartRun best;
  for (std::size_t i = 0; i < cfg.starts.size(); ++i) {
    StartRun run = run_adam(cfg.starts[i], obs, model, cfg, weights);
    out.start_losses.push_back(run.best.loss);
    if (best_index < 0 || run.best.loss < best.best.loss) {
      best_index = static_cast<int>(i);
      best = std::move(run);
    }
  }
  out.best_start = best_index;
  out.theta_hat = best.best.theta;
  out.phi_hat = best.best.phi;
  out.final_loss = best.best.loss;
  out.trajectory = std::move(best.trajectory);
  out.iterations = best.iterations;
  out.converged = best.converged;
  return out;
}

double angular_error(const Direction& est, const Direction& truth) {
  std::vector<cplx> ye, yt;
  spherical_harmonics_table(2, est.theta, est.phi, ye);
  spherical_harmonics_table(2, truth.theta, truth.phi, yt);
  double sum = 0.0;
  for (int s = -1; s <= 1; ++s) {
    sum += (ye[harmonic_index(1, s)] * std::conj(yt[harmonic_index(1, s)])).real();
  }
  const double c = std::clamp(4.0 * kPi / 3.0 * sum, -1.0, 1.0);
  return std::acos(c) * 180.0 / kPi;
}

// ---------------------------------------------------------------------------
// Noise

ObservedCues add_cue_noise_sigma(const CueSpectrum& cues, double sigma_ild, double sigma_itd,
                                 std::uint64_t seed) {
  if (!(sigma_ild >= 0.0) || !(sigma_itd >= 0.0)) {
    throw std::invalid_argument("noise: sigma must be >= 0");
  }
  std::vector<double> ild = cues.ild, itd = cues.itd;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& x : ild) x += sigma_ild * normal(rng);
  for (double& x : itd) x += sigma_itd * normal(rng);
  return make_observation(cues.freqs, std::move(ild), std::move(itd));
}

ObservedCues add_cue_noise(const CueSpectrum& cues, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db)) throw std::invalid_argument("noise: SNR is NaN");
  if (std::isinf(snr_db) && snr_db > 0.0) return make_observation(cues);
  const double scale = std::pow(10.0, snr_db / 20.0);
  return add_cue_noise_sigma(cues, rms(cues.ild) / scale, rms(cues.itd) / scale, seed);
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<Direction> SweepConfig::default_sweep_directions() {
  std::vector<Direction> out;
  for (double el : {60.0, 90.0, 120.0, 150.0}) {
    for (int az = 0; az < 360; az += 45) out.push_back({el * kPi / 180.0, az * kPi / 180.0});
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  std::uint64_t h = splitmix(master);
  for (std::uint64_t i : indices) h = splitmix(h ^ splitmix(i + 0x632be59bd9b4e019ull));
  return h;
}

std::string SweepTable::to_csv() const {
  std::string out = "snr_db,mean_err_deg,median_err_deg,frac_lt_5,frac_lt_10\n";
  for (const auto& r : rows) {
    out += fmt9(r.snr_db) + "," + fmt9(r.mean_err_deg) + "," + fmt9(r.median_err_deg) + "," +
           fmt9(r.frac_lt_5) + "," + fmt9(r.frac_lt_10) + "\n";
  }
  return out;
}

SweepTable sweep(const CueModel& model, const SweepConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  cfg.optimizer.validate();
  const std::size_t nd = cfg.directions.size();
  const std::size_t ns = cfg.snrs_db.size();
  const std::size_t nt = static_cast<std::size_t>(cfg.trials);

  std::vector<CueSpectrum> clean(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    clean[d] = model.spectrum(cfg.directions[d].theta, cfg.directions[d].phi);
  }

  const std::size_t tasks = ns * nd * nt;
  std::vector<double> errors(tasks, 0.0);
  std::vector<std::string> failures(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks; k = next++) {
      const std::size_t si = k / (nd * nt);
      const std::size_t di = (k / nt) % nd;
      const std::size_t ti = k % nt;
      try {
        const auto obs = add_cue_noise(clean[di], cfg.snrs_db[si], derive_seed(cfg.seed, {si, di, ti}));
        const auto res = localize(obs, model, cfg.optimizer);
        errors[k] = angular_error({res.theta_hat, res.phi_hat}, cfg.directions[di]);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(tasks)));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (!f.empty()) throw std::runtime_error("sweep task failed: " + f);
  }

  SweepTable table;
  for (std::size_t si = 0; si < ns; ++si) {
    std::vector<double> e(errors.begin() + si * nd * nt, errors.begin() + (si + 1) * nd * nt);
    SweepRow row;
    row.snr_db = cfg.snrs_db[si];
    row.mean_err_deg = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
    std::vector<double> sorted = e;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    row.median_err_deg = (n % 2) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    row.frac_lt_5 = static_cast<double>(std::count_if(e.begin(), e.end(), [](double x) { return x < 5.0; })) / n;
    row.frac_lt_10 = static_cast<double>(std::count_if(e.begin(), e.end(), [](double x) { return x < 10.0; })) / n;
    table.rows.push_back(row);
    table.errors.push_back(std::move(e));
  }
  return table;
}

}  // namespace msph
