#pragma once

// Source-direction estimation from binaural cues and the noise sweep harness.

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "msph/cue_model.hpp"

namespace msph {

/// Smallest accepted normalization ranges (dB and seconds).
inline constexpr double kMinIldRange = 1e-9;
inline constexpr double kMinItdRange = 1e-15;

struct ObservedCues {
  std::vector<double> freqs;
  std::vector<double> ild;  // dB
  std::vector<double> itd;  // s
  double ild_range = 1.0;
  double itd_range = 1.0;
};

/// Captures ranges (max - min over frequency) from the cues; rejects flat cues.
ObservedCues make_observation(std::vector<double> freqs, std::vector<double> ild,
                              std::vector<double> itd);
ObservedCues make_observation(const CueSpectrum& cues);

struct Direction {
  double theta = 0.0;
  double phi = 0.0;
};

struct OptimizerConfig {
  double learning_rate = 0.02;
  int max_iters = 100;
  int patience = 30;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<Direction> starts = default_starts();

  static std::vector<Direction> default_starts();
  void validate() const;
};

struct TrajectoryPoint {
  double theta = 0.0;
  double phi = 0.0;
  double loss = 0.0;
};

struct LocalizationResult {
  double theta_hat = 0.0;
  double phi_hat = 0.0;
  double final_loss = 0.0;
  double angular_error = std::numeric_limits<double>::quiet_NaN();  // deg, when truth known
  std::vector<TrajectoryPoint> trajectory;  // iterations + 1 entries
  int iterations = 0;
  bool converged = false;
  int best_start = 0;
  /// Best loss reached from each start.
  std::vector<double> start_losses;
};

/// Per-frequency weights w_f and per-cue weights lambda_ILD(f), lambda_ITD(f).
struct LossWeights {
  std::vector<double> freq;
  std::vector<double> ild;
  std::vector<double> itd;

  static LossWeights uniform(std::size_t bins);
  void validate(std::size_t bins) const;
};

/// sum_f [((ILD - ILD*)/r_ild)^2 + ((ITD - ITD*)/r_itd)^2]
double normalized_loss(double theta, double phi, const ObservedCues& obs, const CueModel& model);

double weighted_loss(double theta, double phi, const ObservedCues& obs, const CueModel& model,
                     const LossWeights& weights);

struct LossAndGradient {
  double loss = 0.0;
  double d_theta = 0.0;
  double d_phi = 0.0;
};

/// Loss and its exact gradient; weights optional (nullptr = normalized_loss).
LossAndGradient loss_and_gradient(double theta, double phi, const ObservedCues& obs,
                                  const CueModel& model, const LossWeights* weights = nullptr);

std::array<double, 2> loss_gradient(double theta, double phi, const ObservedCues& obs,
                                    const CueModel& model);

/// Variance-proportional weights from an azimuth scan at the given elevations:
/// lambda_ILD(f) = Var(ILD_f) / (Var(ILD_f) + Var(ITD_f)) on range-normalized cues,
/// lambda_ITD = 1 - lambda_ILD, and w_f proportional to the total variance (mean 1).
LossWeights variance_weights(const CueModel& model, const ObservedCues& obs,
                             const std::vector<double>& elevations = {kPi / 2.0},
                             int azimuths = 72);

/// Reflects theta into [0, pi] (shifting phi by pi) and wraps phi into [0, 2 pi).
Direction canonical_direction(double theta, double phi);

LocalizationResult localize(const ObservedCues& obs, const CueModel& model,
                            const OptimizerConfig& cfg, const LossWeights* weights = nullptr);

/// Angle between two directions in degrees, via the degree-1 addition theorem.
double angular_error(const Direction& est, const Direction& truth);

/// sigma = RMS(clean) / 10^(snr/20) per cue family; infinite SNR adds nothing.
ObservedCues add_cue_noise(const CueSpectrum& cues, double snr_db, std::uint64_t seed);
/// Absolute noise levels (dB and seconds).
ObservedCues add_cue_noise_sigma(const CueSpectrum& cues, double sigma_ild, double sigma_itd,
                                 std::uint64_t seed);

struct SweepConfig {
  std::vector<Direction> directions = default_sweep_directions();
  std::vector<double> snrs_db{20.0, 10.0, 0.0};
  int trials = 20;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  static std::vector<Direction> default_sweep_directions();
};

struct SweepRow {
  double snr_db = 0.0;
  double mean_err_deg = 0.0;
  double median_err_deg = 0.0;
  double frac_lt_5 = 0.0;
  double frac_lt_10 = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// errors[snr][direction * trials + trial]
  std::vector<std::vector<double>> errors;

  std::string to_csv() const;
};

SweepTable sweep(const CueModel& model, const SweepConfig& cfg);

/// Deterministic per-task seed derived from a master seed and indices.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices);

}  // namespace msph
