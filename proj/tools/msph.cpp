// msph: command-line front end for the multi-sphere scattering model.
//
// Exit codes: 0 success, 1 invalid configuration or failed validation,
// 2 usage error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msph/beamform.hpp"
#include "msph/config.hpp"
#include "msph/cue_model.hpp"
#include "msph/field.hpp"
#include "msph/localize.hpp"
#include "msph/track.hpp"
#include "msph/validation.hpp"

namespace fs = std::filesystem;
using namespace msph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SharedOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

// Writes to a sibling temporary and renames, so a failed run never leaves a
// partial file. An empty path means stdout.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(std::random_device{}());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into '" + path + "'");
  }
}

ExperimentConfig load(const SharedOptions& opt) {
  ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : load_config(opt.config);
  if (opt.seed) cfg.scene.seed = *opt.seed;
  return cfg;
}

Direction pair_to_direction(const std::vector<double>& v, const char* flag, double unit) {
  if (v.size() != 2) throw UsageError(std::string(flag) + " expects two comma-separated values");
  return {v[0] * unit, v[1] * unit};
}

// ---------------------------------------------------------------------------

int cmd_cues(const SharedOptions& opt, const std::vector<double>& source_deg) {
  const ExperimentConfig cfg = load(opt);
  Direction src = cfg.cues.source;
  if (!source_deg.empty()) src = pair_to_direction(source_deg, "--source", kPi / 180.0);
  FactorCache cache;
  const CueSpectrum cues = cue_spectrum(cfg.scene, src.theta, src.phi, &cache);

  std::string out = "f_hz,ild_db,itd_s,h_left_re,h_left_im,h_right_re,h_right_im\n";
  for (std::size_t i = 0; i < cues.freqs.size(); ++i) {
    out += fmt(cues.freqs[i]) + "," + fmt(cues.ild[i]) + "," + fmt(cues.itd[i]) + "," +
           fmt(cues.h_left[i].real()) + "," + fmt(cues.h_left[i].imag()) + "," +
           fmt(cues.h_right[i].real()) + "," + fmt(cues.h_right[i].imag()) + "\n";
  }
  emit(opt.out, out);
  return kExitOk;
}

int cmd_localize(const SharedOptions& opt, const std::vector<double>& init,
                 std::optional<double> lr, std::optional<int> iters) {
  ExperimentConfig cfg = load(opt);
  LocalizeExperiment& ex = cfg.localize;
  if (!init.empty()) ex.init = pair_to_direction(init, "--init", 1.0);
  if (lr) ex.optimizer.learning_rate = *lr;
  if (iters) {
    ex.optimizer.max_iters = *iters;
    ex.optimizer.patience = std::min(ex.optimizer.patience, *iters);
  }
  if (ex.init) ex.optimizer.starts = {*ex.init};
  try {
    ex.optimizer.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  FactorCache cache;
  const CueModel model(cfg.scene, &cache);
  const ObservedCues obs =
      make_observation(cue_spectrum(cfg.scene, ex.truth.theta, ex.truth.phi, &cache));
  LocalizationResult res = localize(obs, model, ex.optimizer);
  res.angular_error = angular_error({res.theta_hat, res.phi_hat}, ex.truth);

  nlohmann::ordered_json doc;
  doc["truth"] = {{"theta", ex.truth.theta}, {"phi", ex.truth.phi}};
  doc["estimate"] = {{"theta", res.theta_hat}, {"phi", res.phi_hat}};
  doc["angular_error_deg"] = res.angular_error;
  doc["final_loss"] = res.final_loss;
  doc["iterations"] = res.iterations;
  doc["converged"] = res.converged;
  doc["best_start"] = res.best_start;
  doc["start_losses"] = res.start_losses;
  nlohmann::ordered_json traj = nlohmann::ordered_json::array();
  for (const auto& p : res.trajectory) {
    traj.push_back({{"theta", p.theta}, {"phi", p.phi}, {"loss", p.loss}});
  }
  doc["trajectory"] = std::move(traj);
  emit(opt.out, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_sweep(const SharedOptions& opt, const std::vector<std::string>& snr,
              std::optional<int> trials) {
  const ExperimentConfig cfg = load(opt);
  SweepConfig sc;
  sc.snrs_db = cfg.sweep.snrs_db;
  sc.trials = cfg.sweep.trials;
  sc.optimizer = cfg.sweep.optimizer;
  if (cfg.sweep.directions) sc.directions = *cfg.sweep.directions;
  sc.seed = cfg.scene.seed;
  sc.threads = opt.threads;
  if (!snr.empty()) {
    sc.snrs_db.clear();
    for (const auto& s : snr) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() || std::isnan(v)) throw UsageError("--snr: cannot parse '" + s + "'");
      sc.snrs_db.push_back(v);
    }
  }
  if (trials) {
    if (*trials < 1) throw UsageError("--trials must be >= 1");
    sc.trials = *trials;
  }
  FactorCache cache;
  const CueModel model(cfg.scene, &cache);
  emit(opt.out, sweep(model, sc).to_csv());
  return kExitOk;
}

int cmd_beamform(const SharedOptions& opt, const std::vector<double>& look,
                 std::optional<int> grid_n) {
  const ExperimentConfig cfg = load(opt);
  Direction dir = cfg.beamform.look;
  if (!look.empty()) dir = pair_to_direction(look, "--look", 1.0);
  const int n = grid_n.value_or(cfg.beamform.grid);
  if (n < 12) throw UsageError("--grid must be >= 12");
  const DirectionGrid grid = make_grid(n);
  if (!grid.warning.empty()) std::cerr << "warning: " << grid.warning << "\n";
  FactorCache cache;
  const CueModel model(cfg.scene, &cache);
  emit(opt.out, beamform_csv(beamform_band(model, grid, dir)));
  return kExitOk;
}

int cmd_track(const SharedOptions& opt, std::optional<int> steps, std::optional<double> sigma_ild,
              std::optional<double> sigma_itd_us) {
  const ExperimentConfig cfg = load(opt);
  TrackExperiment ex = cfg.track;
  if (steps) ex.steps = *steps;
  if (sigma_ild) ex.sigma_ild_db = *sigma_ild;
  if (sigma_itd_us) ex.sigma_itd_s = *sigma_itd_us * 1e-6;
  if (ex.steps < 1) throw UsageError("--steps must be >= 1");
  if (!(ex.sigma_ild_db > 0.0) || !(ex.sigma_itd_s > 0.0)) {
    throw UsageError("--sigma-ild and --sigma-itd must be > 0");
  }

  FactorCache cache;
  const CueModel model(cfg.scene, &cache);
  TrackerConfig tc;
  tc.truth = linear_trajectory(ex.start, ex.end, ex.steps);
  tc.sigma_ild = ex.sigma_ild_db;
  tc.sigma_itd = ex.sigma_itd_s;
  tc.sigma_acc = ex.sigma_acc;
  tc.dt = ex.dt;
  tc.init.x << ex.init.theta, ex.init.phi, 0.0, 0.0;
  tc.init.P = TrackerConfig::default_covariance();
  tc.seed = cfg.scene.seed;
  emit(opt.out, track_csv(run_tracker(model, tc)));
  return kExitOk;
}

int cmd_validate(const SharedOptions& opt) {
  const ExperimentConfig cfg = load(opt);
  std::vector<CheckResult> checks = residual_checks(cfg.scene);
  for (auto& c : gradient_checks(cfg.scene, 10, cfg.scene.seed)) checks.push_back(c);
  for (auto& c : addition_theorem_checks(10, 5, cfg.scene.seed)) checks.push_back(c);

  bool ok = true;
  std::string out = "suite,check,value,tolerance,status\n";
  for (const auto& c : checks) {
    const char* status = c.pass ? "pass" : (c.gating ? "FAIL" : "info");
    if (c.gating && !c.pass) ok = false;
    out += c.suite + "," + c.name + "," + fmt(c.value) + "," + fmt(c.tolerance) + "," + status +
           "\n";
  }
  emit(opt.out, out);
  if (!ok) std::cerr << "validation failed\n";
  return ok ? kExitOk : kExitInvalid;
}

void add_shared(CLI::App* cmd, SharedOptions& opt) {
  cmd->add_option("--config", opt.config, "Scene/experiment JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out, "Output file (default: stdout)");
  cmd->add_option("--seed", opt.seed, "Override the config seed");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-sphere acoustic scattering: cues, localization, beamforming, tracking"};
  app.require_subcommand(1);
  SharedOptions opt;

  auto* cues = app.add_subcommand("cues", "ILD/ITD spectrum for one source direction");
  add_shared(cues, opt);
  std::vector<double> source_deg;
  cues->add_option("--source", source_deg, "theta,phi in degrees")->delimiter(',')->expected(2);

  auto* loc = app.add_subcommand("localize", "Gradient-based localization from noiseless cues");
  add_shared(loc, opt);
  std::vector<double> init;
  std::optional<double> lr;
  std::optional<int> iters;
  loc->add_option("--init", init, "theta,phi in radians")->delimiter(',')->expected(2);
  loc->add_option("--lr", lr, "Adam learning rate");
  loc->add_option("--iters", iters, "Maximum iterations");

  auto* sw = app.add_subcommand("sweep", "Localization error statistics over directions and SNR");
  add_shared(sw, opt);
  std::vector<std::string> snr;
  std::optional<int> trials;
  sw->add_option("--snr", snr, "Comma-separated SNRs in dB (inf allowed)")->delimiter(',');
  sw->add_option("--trials", trials, "Noise realizations per direction and SNR");

  auto* bf = app.add_subcommand("beamform", "Matched-filter WNG, DF and DI across the band");
  add_shared(bf, opt);
  std::vector<double> look;
  std::optional<int> grid_n;
  bf->add_option("--look", look, "theta,phi in radians")->delimiter(',')->expected(2);
  bf->add_option("--grid", grid_n, "Direction grid size (icosphere: 12, 42, 162, 642, ...)");

  auto* tr = app.add_subcommand("track", "EKF tracking along a linear trajectory");
  add_shared(tr, opt);
  std::optional<int> steps;
  std::optional<double> sigma_ild, sigma_itd;
  tr->add_option("--steps", steps, "Number of time steps");
  tr->add_option("--sigma-ild", sigma_ild, "ILD noise standard deviation in dB");
  tr->add_option("--sigma-itd", sigma_itd, "ITD noise standard deviation in microseconds");

  auto* val = app.add_subcommand("validate", "Residual, convergence, gradient and translation checks");
  add_shared(val, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cues) return cmd_cues(opt, source_deg);
    if (*loc) return cmd_localize(opt, init, lr, iters);
    if (*sw) return cmd_sweep(opt, snr, trials);
    if (*bf) return cmd_beamform(opt, look, grid_n);
    if (*tr) return cmd_track(opt, steps, sigma_ild, sigma_itd);
    if (*val) return cmd_validate(opt);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitUsage;
}
