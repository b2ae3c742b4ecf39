#pragma once

// Extended Kalman filter over the cue measurement model with
// constant-velocity angular dynamics.

#include <cstdint>
#include <string>
#include <vector>

#include "msph/cue_model.hpp"
#include "msph/localize.hpp"

namespace msph {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct TrackState {
  Vec4 x = Vec4::Zero();  // theta, phi, theta rate, phi rate (per step)
  Mat4 P = Mat4::Identity();
};

struct ProcessModel {
  Mat4 F = Mat4::Identity();
  Mat4 Q = Mat4::Zero();
};

/// F = [I dt I; 0 I], Q from white angular acceleration with the given sigmas.
ProcessModel process_matrices(double dt, double sigma_theta_acc, double sigma_phi_acc);

struct MeasurementModel {
  std::vector<double> freqs;
  double sigma_ild = 0.5;    // dB
  double sigma_itd = 10e-6;  // s

  std::size_t dimension() const { return 2 * freqs.size(); }
  /// diag(sigma_ild^2 I_K, sigma_itd^2 I_K)
  Eigen::MatrixXd R() const;
};

/// Stacked [ILD(f_1..f_K), ITD(f_1..f_K)] at the state's angles.
Eigen::VectorXd measurement(const TrackState& state, const CueModel& model);
Eigen::VectorXd measurement(double theta, double phi, const CueModel& model);

/// 2K x 4; the velocity columns are zero.
Eigen::MatrixXd measurement_jacobian(const TrackState& state, const CueModel& model);

struct EkfDiagnostics {
  Eigen::VectorXd innovation;
  Eigen::MatrixXd S;
  Eigen::MatrixXd K;
  double nis = 0.0;
};

struct EkfStep {
  TrackState state;
  EkfDiagnostics diagnostics;
};

/// Predict with F, Q; update with z using the Joseph-form covariance.
EkfStep ekf_step(const TrackState& state, const Eigen::VectorXd& z, const ProcessModel& process,
                 const MeasurementModel& meas, const CueModel& model);

/// theta reflected into [0, pi] (rate negated, phi shifted by pi); phi wrapped to [0, 2 pi).
TrackState normalize_state(TrackState state);

/// Linear interpolation between two directions over `steps` samples.
std::vector<Direction> linear_trajectory(const Direction& start, const Direction& end, int steps);

struct TrackerConfig {
  std::vector<Direction> truth;
  double sigma_ild = 0.5;    // dB
  double sigma_itd = 10e-6;  // s
  double dt = 1.0;
  double sigma_acc = 0.03;
  bool add_noise = true;  // false keeps R but feeds noiseless measurements
  TrackState init;
  std::uint64_t seed = 1;

  static Mat4 default_covariance();
};

struct TrackRecord {
  int t = 0;
  Direction truth;
  TrackState state;
  double err_deg = 0.0;
  double p_trace = 0.0;
  double nis = 0.0;
  double min_eig = 0.0;
  double asymmetry = 0.0;  // max |P - P^T|
};

std::vector<TrackRecord> run_tracker(const CueModel& model, const TrackerConfig& cfg);

std::string track_csv(const std::vector<TrackRecord>& records);

}  // namespace msph
