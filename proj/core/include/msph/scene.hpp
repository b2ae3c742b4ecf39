#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "msph/solver.hpp"

namespace msph {

/// Direction of a point on S1 as seen from its center.
struct SurfaceDirection {
  double theta = 0.0;
  double phi = 0.0;

  Vec3 unit() const;
};

struct SensorPair {
  SurfaceDirection left{kPi / 2.0, kPi};
  SurfaceDirection right{kPi / 2.0, 0.0};

  /// Symmetric pair on the horizontal plane at phi = 180 and 0 degrees.
  static SensorPair symmetric();
  /// Left sensor lifted by 0.12 rad and rotated to 175 degrees.
  static SensorPair asymmetric();
};

struct FrequencyGrid {
  double min_hz = 200.0;
  double max_hz = 2000.0;
  int count = 41;

  /// Linearly spaced bins including both ends.
  std::vector<double> values() const;
};

/// Normalization of the HRTF for plane-wave incidence.
enum class HrtfReference {
  /// Free-field incident value at the center of S1 (the monopole form psi_o / (Q G_k(r_s))).
  Center,
  /// Free-field incident value at the sensor point itself.
  SensorPoint,
};

struct SceneConfig {
  Media media;
  Geometry geometry;
  SensorPair sensors;
  FrequencyGrid freqs;
  std::optional<int> truncation_override;
  std::uint64_t seed = 1;
  HrtfReference reference = HrtfReference::Center;
};

}  // namespace msph
