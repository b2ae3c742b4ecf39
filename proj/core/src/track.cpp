#include "msph/track.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace msph {

ProcessModel process_matrices(double dt, double sigma_theta_acc, double sigma_phi_acc) {
  if (!(dt > 0.0)) throw std::invalid_argument("process_matrices: dt must be > 0");
  if (sigma_theta_acc < 0.0 || sigma_phi_acc < 0.0) {
    throw std::invalid_argument("process_matrices: sigmas must be >= 0");
  }
  ProcessModel pm;
  pm.F(0, 2) = dt;
  pm.F(1, 3) = dt;
  const double q00 = std::pow(dt, 4) / 4.0, q02 = std::pow(dt, 3) / 2.0, q22 = dt * dt;
  const double vt = sigma_theta_acc * sigma_theta_acc, vp = sigma_phi_acc * sigma_phi_acc;
  pm.Q(0, 0) = q00 * vt;
  pm.Q(0, 2) = pm.Q(2, 0) = q02 * vt;
  pm.Q(2, 2) = q22 * vt;
  pm.Q(1, 1) = q00 * vp;
  pm.Q(1, 3) = pm.Q(3, 1) = q02 * vp;
  pm.Q(3, 3) = q22 * vp;
  return pm;
}

Eigen::MatrixXd MeasurementModel::R() const {
  const Eigen::Index k = static_cast<Eigen::Index>(freqs.size());
  Eigen::VectorXd d(2 * k);
  d.head(k).setConstant(sigma_ild * sigma_ild);
  d.tail(k).setConstant(sigma_itd * sigma_itd);
  return d.asDiagonal();
}

Eigen::VectorXd measurement(double theta, double phi, const CueModel& model) {
  const CueEvaluation e = model.evaluate(theta, phi, false);
  const Eigen::Index k = static_cast<Eigen::Index>(model.bins());
  Eigen::VectorXd z(2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    z(i) = e.ild[i];
    z(k + i) = e.itd[i];
  }
  return z;
}

Eigen::VectorXd measurement(const TrackState& state, const CueModel& model) {
  return measurement(state.x(0), state.x(1), model);
}

Eigen::MatrixXd measurement_jacobian(const TrackState& state, const CueModel& model) {
  const CueEvaluation e = model.evaluate(state.x(0), state.x(1), true);
  const Eigen::Index k = static_cast<Eigen::Index>(model.bins());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * k, 4);
  for (Eigen::Index i = 0; i < k; ++i) {
    H(i, 0) = e.dild_dtheta[i];
    H(i, 1) = e.dild_dphi[i];
    H(k + i, 0) = e.ditd_dtheta[i];
    H(k + i, 1) = e.ditd_dphi[i];
  }
  return H;
}

TrackState normalize_state(TrackState s) {
  double theta = std::fmod(s.x(0), 2.0 * kPi);
  double phi = s.x(1);
  if (theta < 0.0) {
    theta = -theta;
    phi += kPi;
    s.x(2) = -s.x(2);
  }
  if (theta > kPi) {
    theta = 2.0 * kPi - theta;
    phi += kPi;
    s.x(2) = -s.x(2);
  }
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi < 0.0) phi += 2.0 * kPi;
  s.x(0) = theta;
  s.x(1) = phi;
  return s;
}

EkfStep ekf_step(const TrackState& state, const Eigen::VectorXd& z, const ProcessModel& process,
                 const MeasurementModel& meas, const CueModel& model) {
  TrackState pred;
  pred.x = process.F * state.x;
  pred.P = process.F * state.P * process.F.transpose() + process.Q;
  pred = normalize_state(pred);

  const Eigen::MatrixXd H = measurement_jacobian(pred, model);
  const Eigen::VectorXd h = measurement(pred, model);
  const Eigen::MatrixXd R = meas.R();
  if (z.size() != h.size()) throw std::invalid_argument("ekf_step: measurement size mismatch");

  EkfStep out;
  out.diagnostics.innovation = z - h;
  out.diagnostics.S = H * pred.P * H.transpose() + R;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(out.diagnostics.S);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw std::runtime_error("ekf_step: innovation covariance is not invertible");
  }
  // K = P H^T S^{-1}
  out.diagnostics.K = ldlt.solve(H * pred.P).transpose();
  out.diagnostics.nis = out.diagnostics.innovation.dot(ldlt.solve(out.diagnostics.innovation));

  const Eigen::MatrixXd& K = out.diagnostics.K;
  TrackState post;
  post.x = pred.x + K * out.diagnostics.innovation;
  const Mat4 I_KH = Mat4::Identity() - K * H;
  post.P = I_KH * pred.P * I_KH.transpose() + K * R * K.transpose();
  post.P = 0.5 * (post.P + post.P.transpose());
  out.state = normalize_state(post);
  return out;
}

std::vector<Direction> linear_trajectory(const Direction& start, const Direction& end, int steps) {
  if (steps < 1) throw std::invalid_argument("trajectory: steps must be >= 1");
  std::vector<Direction> out(steps);
  for (int t = 0; t < steps; ++t) {
    const double a = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
    out[t] = {start.theta + a * (end.theta - start.theta), start.phi + a * (end.phi - start.phi)};
  }
  return out;
}

Mat4 TrackerConfig::default_covariance() {
  return Eigen::Vector4d(0.3 * 0.3, 0.3 * 0.3, 0.05 * 0.05, 0.05 * 0.05).asDiagonal();
}

std::vector<TrackRecord> run_tracker(const CueModel& model, const TrackerConfig& cfg) {
  if (cfg.truth.empty()) throw std::invalid_argument("run_tracker: empty trajectory");
  const ProcessModel process = process_matrices(cfg.dt, cfg.sigma_acc, cfg.sigma_acc);
  MeasurementModel meas{model.freqs(), cfg.sigma_ild, cfg.sigma_itd};
  const Eigen::Index k = static_cast<Eigen::Index>(model.bins());

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  TrackState state = normalize_state(cfg.init);
  std::vector<TrackRecord> out;
  out.reserve(cfg.truth.size());
  for (std::size_t t = 0; t < cfg.truth.size(); ++t) {
    const Direction& truth = cfg.truth[t];
    Eigen::VectorXd z = measurement(truth.theta, truth.phi, model);
    if (cfg.add_noise) {
      for (Eigen::Index i = 0; i < k; ++i) z(i) += cfg.sigma_ild * normal(rng);
      for (Eigen::Index i = 0; i < k; ++i) z(k + i) += cfg.sigma_itd * normal(rng);
    }

    const EkfStep step = ekf_step(state, z, process, meas, model);
    state = step.state;
    TrackRecord rec;
    rec.t = static_cast<int>(t);
    rec.truth = truth;
    rec.state = state;
    rec.err_deg = angular_error({state.x(0), state.x(1)}, truth);
    rec.p_trace = state.P.trace();
    rec.nis = step.diagnostics.nis;
    rec.min_eig = Eigen::SelfAdjointEigenSolver<Mat4>(state.P).eigenvalues().minCoeff();
    rec.asymmetry = (state.P - state.P.transpose()).cwiseAbs().maxCoeff();
    out.push_back(rec);
  }
  return out;
}

std::string track_csv(const std::vector<TrackRecord>& records) {
  std::string out = "t,theta_true,phi_true,theta_hat,phi_hat,err_deg,p_trace\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.t, r.truth.theta,
                  r.truth.phi, r.state.x(0), r.state.x(1), r.err_deg, r.p_trace);
    out += buf;
  }
  return out;
}

}  // namespace msph
