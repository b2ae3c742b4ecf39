#pragma once

// Two-channel matched-filter beamforming and its spatial metrics.

#include <array>
#include <string>
#include <vector>

#include "msph/cue_model.hpp"
#include "msph/localize.hpp"

namespace msph {

using Vec2c = Eigen::Vector2cd;

class DegenerateSteeringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SteeringVector {
  double f = 0.0;
  Vec2c h = Vec2c::Zero();  // (H_L, H_R)
};

struct DirectionGrid {
  std::vector<Vec3> points;       // unit vectors
  std::vector<Direction> directions;
  std::vector<double> weights;    // sum to 4 pi
  std::string warning;            // set when the requested size was snapped

  std::size_t size() const { return points.size(); }
};

/// w = h0 / (h0^H h0)
Vec2c matched_weights(const SteeringVector& h0);

/// 10 log10(1 / (w^H w))
double wng(const Vec2c& w);

struct Directivity {
  double df = 0.0;
  double di_db = 0.0;
};

/// DF from precomputed steering vectors over the grid.
Directivity directivity(const Vec2c& w, const Vec2c& look, const std::vector<Vec2c>& grid_steering,
                        const DirectionGrid& grid);

/// DF for bin `bin` of the cue model.
Directivity directivity(const Vec2c& w, const CueModel& model, std::size_t bin,
                        const DirectionGrid& grid, const Direction& look);

/// Icosphere vertices (10 * 4^k + 2) with spherical Voronoi-area weights.
/// Sizes that are not a subdivision level snap to the nearest one.
DirectionGrid make_grid(int n);

struct BeamformRow {
  double f_hz = 0.0;
  double wng_db = 0.0;
  double df = 0.0;
  double di_db = 0.0;
  double distortionless = 0.0;  // |w^H h0|
};

std::vector<BeamformRow> beamform_band(const CueModel& model, const DirectionGrid& grid,
                                       const Direction& look);

std::string beamform_csv(const std::vector<BeamformRow>& rows);

}  // namespace msph
