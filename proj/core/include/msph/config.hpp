#pragma once

// Strict JSON configuration for scenes and experiment setups.
//
// Every angle is in radians. Unknown keys are rejected at every level.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msph/localize.hpp"
#include "msph/scene.hpp"

namespace msph {

/// Parse, schema or validation failure. `problems` lists each issue.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct CuesExperiment {
  Direction source{kPi / 2.0, kPi / 4.0};
};

struct LocalizeExperiment {
  Direction truth{2.13, 1.10};
  std::optional<Direction> init;  // empty: the optimizer's default multi-start
  OptimizerConfig optimizer;
};

struct SweepExperiment {
  std::vector<double> snrs_db{20.0, 10.0, 0.0};
  int trials = 20;
  std::optional<std::vector<Direction>> directions;
  OptimizerConfig optimizer;
};

struct TrackExperiment {
  Direction start{110.0 * kPi / 180.0, 50.0 * kPi / 180.0};
  Direction end{140.0 * kPi / 180.0, 110.0 * kPi / 180.0};
  int steps = 60;
  double sigma_ild_db = 0.5;
  double sigma_itd_s = 10e-6;
  double sigma_acc = 0.03;
  double dt = 1.0;
  Direction init{2.2, 2.6};
};

struct BeamformExperiment {
  Direction look{2.1293, 1.0996};
  int grid = 162;
};

struct ExperimentConfig {
  SceneConfig scene;
  CuesExperiment cues;
  LocalizeExperiment localize;
  SweepExperiment sweep;
  TrackExperiment track;
  BeamformExperiment beamform;
};

/// Parses JSON text. `source` names the input in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

ExperimentConfig load_config(const std::filesystem::path& path);

/// Scene checks beyond geometry: frequency grid, truncation override.
std::vector<std::string> validate_scene(const SceneConfig& scene);

}  // namespace msph
