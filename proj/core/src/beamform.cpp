#include "msph/beamform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace msph {

Vec2c matched_weights(const SteeringVector& h0) {
  const double norm2 = h0.h.squaredNorm();
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    throw DegenerateSteeringError("matched_weights: steering vector is zero or not finite");
  }
  return h0.h / norm2;
}

double wng(const Vec2c& w) { return 10.0 * std::log10(1.0 / w.squaredNorm()); }

Directivity directivity(const Vec2c& w, const Vec2c& look, const std::vector<Vec2c>& grid_steering,
                        const DirectionGrid& grid) {
  double mean = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    mean += grid.weights[j] * std::norm(w.dot(grid_steering[j]));
  }
  mean /= 4.0 * kPi;
  Directivity out;
  out.df = std::norm(w.dot(look)) / mean;
  out.di_db = 10.0 * std::log10(out.df);
  return out;
}

Directivity directivity(const Vec2c& w, const CueModel& model, std::size_t bin,
                        const DirectionGrid& grid, const Direction& look) {
  std::vector<Vec2c> steering(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto [hl, hr] = model.hrtf_pair(bin, grid.directions[j].theta, grid.directions[j].phi);
    steering[j] = Vec2c(hl, hr);
  }
  const auto [hl, hr] = model.hrtf_pair(bin, look.theta, look.phi);
  return directivity(w, Vec2c(hl, hr), steering, grid);
}

// ---------------------------------------------------------------------------
// Icosphere grid

namespace {

using Tri = std::array<int, 3>;

// Solid angle of the spherical triangle (a, b, c) (Van Oosterom and Strackee).
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = std::abs(a.dot(b.cross(c)));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

void icosahedron(std::vector<Vec3>& v, std::vector<Tri>& f) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
       {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
       {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
       {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
}

void subdivide(std::vector<Vec3>& v, std::vector<Tri>& f) {
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    v.push_back((v[a] + v[b]).normalized());
    const int idx = static_cast<int>(v.size()) - 1;
    midpoint.emplace(key, idx);
    return idx;
  };
  std::vector<Tri> next;
  next.reserve(f.size() * 4);
  for (const Tri& t : f) {
    const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    next.push_back({t[0], ab, ca});
    next.push_back({t[1], bc, ab});
    next.push_back({t[2], ca, bc});
    next.push_back({ab, bc, ca});
  }
  f.swap(next);
}

}  // namespace

DirectionGrid make_grid(int n) {
  if (n < 12) throw std::invalid_argument("make_grid: need at least 12 directions");
  int level = 0;
  long best = 12;
  for (int k = 1; k < 8; ++k) {
    const long count = 10L * (1L << (2 * k)) + 2;
    if (std::abs(count - n) < std::abs(best - n)) {
      best = count;
      level = k;
    }
  }
  DirectionGrid grid;
  if (best != n) {
    std::ostringstream msg;
    msg << "make_grid: " << n << " is not an icosphere size; using " << best;
    grid.warning = msg.str();
  }

  std::vector<Vec3> v;
  std::vector<Tri> f;
  icosahedron(v, f);
  for (int k = 0; k < level; ++k) subdivide(v, f);

  // Each triangle's area is split among its vertices along the perpendicular
  // bisectors through its circumcenter, which yields spherical Voronoi cells.
  std::vector<double> w(v.size(), 0.0);
  for (const Tri& t : f) {
    const Vec3 &a = v[t[0]], &b = v[t[1]], &c = v[t[2]];
    Vec3 cc = (b - a).cross(c - a).normalized();
    if (cc.dot(a + b + c) < 0.0) cc = -cc;
    for (int i = 0; i < 3; ++i) {
      const Vec3& p = v[t[i]];
      const Vec3 m1 = (p + v[t[(i + 1) % 3]]).normalized();
      const Vec3 m2 = (p + v[t[(i + 2) % 3]]).normalized();
      w[t[i]] += solid_angle(p, m1, cc) + solid_angle(p, cc, m2);
    }
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x *= 4.0 * kPi / total;

  grid.points = std::move(v);
  grid.weights = std::move(w);
  grid.directions.reserve(grid.points.size());
  for (const Vec3& p : grid.points) {
    grid.directions.push_back(
        {std::acos(std::clamp(p.z(), -1.0, 1.0)), std::atan2(p.y(), p.x())});
  }
  return grid;
}

std::vector<BeamformRow> beamform_band(const CueModel& model, const DirectionGrid& grid,
                                       const Direction& look) {
  std::vector<BeamformRow> rows;
  for (std::size_t b = 0; b < model.bins(); ++b) {
    const auto [hl, hr] = model.hrtf_pair(b, look.theta, look.phi);
    const SteeringVector h0{model.freqs()[b], Vec2c(hl, hr)};
    const Vec2c w = matched_weights(h0);
    const Directivity d = directivity(w, model, b, grid, look);
    rows.push_back({h0.f, wng(w), d.df, d.di_db, std::abs(w.dot(h0.h))});
  }
  return rows;
}

std::string beamform_csv(const std::vector<BeamformRow>& rows) {
  std::string out = "f_hz,wng_db,df,di_db\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n", r.f_hz, r.wng_db, r.df, r.di_db);
    out += buf;
  }
  return out;
}

}  // namespace msph
