#include "msph/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "msph/cue_model.hpp"
#include "msph/field.hpp"
#include "msph/localize.hpp"
#include "msph/track.hpp"
#include "msph/translation.hpp"

namespace msph {

namespace {

// Generic oblique incidence so every order s is excited.
constexpr double kProbeTheta = 1.0;
constexpr double kProbePhi = 0.7;

double worst_residual(const SceneConfig& scene, double f_hz, int p) {
  const IncidentField inc =
      plane_wave_from_source(kProbeTheta, kProbePhi, scene.media.k_outer(f_hz), p);
  const ModalSolution sol = solve_scattering(scene.media, scene.geometry, f_hz, inc, p);
  return boundary_residuals(sol, inc).worst();
}

std::string label(const char* what, double f_hz) {
  std::ostringstream s;
  s << what << " f=" << f_hz << " Hz";
  return s.str();
}

double relative(double got, double want, double scale) {
  return std::abs(got - want) / std::max(std::abs(want), scale);
}

}  // namespace

ResidualStudy residual_study(const SceneConfig& scene, double f_hz, double tolerance, int p_max) {
  ResidualStudy out;
  out.f_hz = f_hz;
  out.p_rule = truncation_degree(scene.media, scene.geometry, f_hz);
  out.worst_at_rule = worst_residual(scene, f_hz, out.p_rule);
  out.worst_at_rule_plus4 = worst_residual(scene, f_hz, out.p_rule + 4);
  for (int p = out.p_rule; p <= p_max; p += 4) {
    const double w = p == out.p_rule       ? out.worst_at_rule
                     : p == out.p_rule + 4 ? out.worst_at_rule_plus4
                                           : worst_residual(scene, f_hz, p);
    if (w < tolerance) {
      out.p_converged = p;
      out.worst_at_converged = w;
      break;
    }
  }
  return out;
}

std::vector<CheckResult> residual_checks(const SceneConfig& scene,
                                         const std::vector<double>& freqs) {
  std::vector<CheckResult> out;
  for (double f : freqs) {
    const ResidualStudy r = residual_study(scene, f);
    out.push_back({"boundary residual", label("worst at rule p", f), r.worst_at_rule, 1e-3,
                   r.worst_at_rule < 1e-3, false});
    out.push_back({"boundary residual", label("worst at converged p", f),
                   r.p_converged > 0 ? r.worst_at_converged : r.worst_at_rule, 1e-3,
                   r.p_converged > 0});
    out.push_back({"truncation convergence", label("ratio residual(p+4)/residual(p)", f),
                   r.worst_at_rule_plus4 / r.worst_at_rule, 1.0,
                   r.worst_at_rule_plus4 < r.worst_at_rule});
  }
  return out;
}

std::vector<CheckResult> gradient_checks(const SceneConfig& scene, int states, std::uint64_t seed,
                                         double tolerance) {
  const CueModel model(scene);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> theta(0.3, kPi - 0.3);
  std::uniform_real_distribution<double> phi(0.0, 2.0 * kPi);
  const double h = 1e-6;

  double worst_loss = 0.0, worst_jac = 0.0;
  for (int i = 0; i < states; ++i) {
    const double t0 = theta(rng), p0 = phi(rng);
    const ObservedCues obs = make_observation(model.spectrum(t0, p0));
    const double t = theta(rng), p = phi(rng);
    const LossAndGradient g = loss_and_gradient(t, p, obs, model);
    const double fd_t = (normalized_loss(t + h, p, obs, model) -
                         normalized_loss(t - h, p, obs, model)) / (2.0 * h);
    const double fd_p = (normalized_loss(t, p + h, obs, model) -
                         normalized_loss(t, p - h, obs, model)) / (2.0 * h);
    const double scale = 1e-6 * std::max({std::abs(fd_t), std::abs(fd_p), 1.0});
    worst_loss = std::max({worst_loss, relative(g.d_theta, fd_t, scale),
                           relative(g.d_phi, fd_p, scale)});

    TrackState st;
    st.x << t, p, 0.0, 0.0;
    const Eigen::MatrixXd J = measurement_jacobian(st, model);
    for (int c = 0; c < 2; ++c) {
      TrackState a = st, b = st;
      a.x(c) += h;
      b.x(c) -= h;
      const Eigen::VectorXd fd = (measurement(a, model) - measurement(b, model)) / (2.0 * h);
      // Separate ILD and ITD blocks: their units differ by ~1e5.
      const Eigen::Index k = fd.size() / 2;
      for (Eigen::Index off : {Eigen::Index{0}, k}) {
        const double num = (J.col(c).segment(off, k) - fd.segment(off, k)).norm();
        worst_jac = std::max(worst_jac, num / std::max(fd.segment(off, k).norm(), 1e-300));
      }
    }
  }
  return {{"gradient", "loss gradient vs central differences", worst_loss, tolerance,
           worst_loss < tolerance},
          {"gradient", "EKF Jacobian vs central differences", worst_jac, tolerance,
           worst_jac < tolerance}};
}

std::vector<CheckResult> addition_theorem_checks(int cases, int points_per_case,
                                                 std::uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uk(5.0, 40.0), ut(0.05, 0.2), u01(0.0, 1.0);
  std::uniform_int_distribution<int> us(-3, 3);
  constexpr int kSourceDegrees = 6;
  constexpr int kHeadroom = 40;

  double worst_rr = 0.0, worst_sr = 0.0;
  for (int c = 0; c < cases; ++c) {
    const double k = uk(rng);
    const double t = (u01(rng) < 0.5 ? -1.0 : 1.0) * ut(rng);
    const int s = us(rng);
    const int m = std::abs(s);
    const int p_src = m + kSourceDegrees;
    const int p = p_src + kHeadroom + static_cast<int>(std::ceil(2.0 * k * std::abs(t)));
    const TranslationMatrix rr = coaxial_rr(s, k, t, p);
    const TranslationMatrix sr = coaxial_sr(s, k, t, p);
    const Vec3 shift(0.0, 0.0, t);

    for (int q = 0; q < points_per_case; ++q) {
      // Target point: |r'| < |t| / 2 keeps (S|R) well inside its disk.
      const double rad = (0.1 + 0.4 * u01(rng)) * std::abs(t);
      const double ct = 2.0 * u01(rng) - 1.0, ph = 2.0 * kPi * u01(rng);
      const double st = std::sqrt(1.0 - ct * ct);
      const Vec3 local(rad * st * std::cos(ph), rad * st * std::sin(ph), rad * ct);
      const Vec3 global = local + shift;

      const auto reg_global = regular_basis(p_src, k, global);
      const auto sing_global = singular_basis(p_src, k, global);
      const auto reg_local = regular_basis(p, k, local);
      double reg_scale = 0.0;
      for (int n = m; n < p_src; ++n) {
        reg_scale = std::max(reg_scale, std::abs(reg_global[harmonic_index(n, s)]));
      }
      for (int n = m; n < p_src; ++n) {
        cplx via_rr{}, via_sr{};
        for (int np = m; np < p; ++np) {
          via_rr += rr.entries(np - m, n - m) * reg_local[harmonic_index(np, s)];
          via_sr += sr.entries(np - m, n - m) * reg_local[harmonic_index(np, s)];
        }
        const cplx want_r = reg_global[harmonic_index(n, s)];
        const cplx want_s = sing_global[harmonic_index(n, s)];
        worst_rr = std::max(worst_rr, std::abs(via_rr - want_r) / reg_scale);
        worst_sr = std::max(worst_sr, std::abs(via_sr - want_s) / std::abs(want_s));
      }
    }
  }
  return {{"addition theorem", "(R|R) re-expansion", worst_rr, tolerance, worst_rr < tolerance},
          {"addition theorem", "(S|R) re-expansion", worst_sr, tolerance, worst_sr < tolerance}};
}

}  // namespace msph
