#include "msph/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msph {

Vec3 SurfaceDirection::unit() const {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

SensorPair SensorPair::symmetric() { return SensorPair{}; }

SensorPair SensorPair::asymmetric() {
  SensorPair out;
  out.left = {kPi / 2.0 - 0.12, 175.0 * kPi / 180.0};
  return out;
}

std::vector<double> FrequencyGrid::values() const {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = (count == 1) ? min_hz : min_hz + (max_hz - min_hz) * i / (count - 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Basis functions

namespace {

constexpr double kSurfaceTolerance = 1e-12;

void to_spherical(const Vec3& r, double& radius, double& theta, double& phi) {
  radius = r.norm();
  theta = (radius > 0.0) ? std::acos(std::clamp(r.z() / radius, -1.0, 1.0)) : 0.0;
  phi = std::atan2(r.y(), r.x());
}

cplx dot(const std::vector<cplx>& coeffs, const std::vector<cplx>& basis) {
  cplx sum{};
  for (std::size_t i = 0; i < basis.size(); ++i) sum += coeffs[i] * basis[i];
  return sum;
}

}  // namespace

std::vector<cplx> regular_basis(int p, double k, const Vec3& r) {
  double radius, theta, phi;
  to_spherical(r, radius, theta, phi);
  std::vector<cplx> y;
  spherical_harmonics_table(p, theta, phi, y);
  std::vector<double> j, dj;
  spherical_bessel_j_table(p - 1, k * radius, j, dj);
  for (int l = 0; l < p; ++l)
    for (int s = -l; s <= l; ++s) y[harmonic_index(l, s)] *= j[l];
  return y;
}

std::vector<cplx> singular_basis(int p, double k, const Vec3& r) {
  double radius, theta, phi;
  to_spherical(r, radius, theta, phi);
  if (!(radius > 0.0)) throw DomainError("singular basis evaluated at its center");
  std::vector<cplx> y;
  spherical_harmonics_table(p, theta, phi, y);
  std::vector<cplx> h, dh;
  spherical_hankel_table(p - 1, k * radius, h, dh);
  for (int l = 0; l < p; ++l)
    for (int s = -l; s <= l; ++s) y[harmonic_index(l, s)] *= h[l];
  return y;
}

// ---------------------------------------------------------------------------
// Field evaluation

cplx scattered_exterior(const ModalSolution& sol, const Vec3& r) {
  return dot(sol.B.flat(), singular_basis(sol.p, sol.k_o, r));
}

cplx evaluate_exterior_unchecked(const ModalSolution& sol, const IncidentField& incident,
                                 const Vec3& r) {
  return incident.evaluate(r) + scattered_exterior(sol, r);
}

cplx evaluate_exterior(const ModalSolution& sol, const IncidentField& incident, const Vec3& r) {
  const double a1 = sol.geometry.a1;
  if (r.norm() < a1 * (1.0 - kSurfaceTolerance)) {
    std::ostringstream msg;
    msg << "evaluate_exterior: |r| = " << r.norm() << " is inside S1 (a1 = " << a1 << ")";
    throw SceneError(msg.str());
  }
  return evaluate_exterior_unchecked(sol, incident, r);
}

cplx evaluate_interior_unchecked(const ModalSolution& sol, const Vec3& r) {
  const int p = sol.p;
  const double k = sol.k_i;
  cplx sum = dot(sol.A.flat(), regular_basis(p, k, r));
  sum += dot(sol.C.flat(), singular_basis(p, k, r));
  sum += dot(sol.D.flat(), singular_basis(p, k, r - sol.geometry.center3()));
  return sum;
}

cplx evaluate_interior(const ModalSolution& sol, const Vec3& r) {
  const Geometry& g = sol.geometry;
  const double r1 = r.norm();
  const double r3 = (r - g.center3()).norm();
  std::ostringstream msg;
  if (r1 > g.a1 * (1.0 + kSurfaceTolerance)) {
    msg << "evaluate_interior: |r| = " << r1 << " is outside S1 (a1 = " << g.a1 << ")";
  } else if (r1 < g.a2 * (1.0 - kSurfaceTolerance)) {
    msg << "evaluate_interior: |r| = " << r1 << " is inside S2 (a2 = " << g.a2 << ")";
  } else if (r3 < g.a3 * (1.0 - kSurfaceTolerance)) {
    msg << "evaluate_interior: |r - O3| = " << r3 << " is inside S3 (a3 = " << g.a3 << ")";
  } else {
    return evaluate_interior_unchecked(sol, r);
  }
  throw SceneError(msg.str());
}

// ---------------------------------------------------------------------------
// Boundary residuals

std::vector<Vec3> fibonacci_sphere(int n) {
  std::vector<Vec3> out;
  out.reserve(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return out;
}

double BoundaryResiduals::worst() const {
  return std::max({s1_pressure, s1_velocity, s2_neumann, s3_neumann});
}

BoundaryResiduals boundary_residuals(const ModalSolution& sol, const IncidentField& incident,
                                     int points) {
  const Geometry& g = sol.geometry;
  const double d = sol.media.density_ratio();
  const auto dirs = fibonacci_sphere(points);

  auto interior = [&](const Vec3& r) { return evaluate_interior_unchecked(sol, r); };
  auto exterior = [&](const Vec3& r) { return evaluate_exterior_unchecked(sol, incident, r); };
  auto normal_derivative = [](auto&& fn, const Vec3& r, const Vec3& n, double h) {
    return (fn(r + h * n) - fn(r - h * n)) / (2.0 * h);
  };

  BoundaryResiduals out;
  {
    const double h = 1e-6 * g.a1;
    double max_p = 0.0, max_v = 0.0, scale = 0.0;
    for (const Vec3& n : dirs) {
      const Vec3 r = g.a1 * n;
      const cplx po = exterior(r);
      scale = std::max(scale, std::abs(po));
      max_p = std::max(max_p, std::abs(d * interior(r) - po));
      max_v = std::max(max_v, std::abs(normal_derivative(interior, r, n, h) -
                                       normal_derivative(exterior, r, n, h)));
    }
    out.s1_pressure = max_p / scale;
    out.s1_velocity = max_v / (sol.k_o * scale);
  }
  auto neumann = [&](const Vec3& center, double radius) {
    const double h = 1e-6 * radius;
    double max_dn = 0.0, scale = 0.0;
    for (const Vec3& n : dirs) {
      const Vec3 r = center + radius * n;
      scale = std::max(scale, std::abs(interior(r)));
      max_dn = std::max(max_dn, std::abs(normal_derivative(interior, r, n, h)));
    }
    return max_dn / (sol.k_i * scale);
  };
  out.s2_neumann = neumann(Vec3::Zero(), g.a2);
  out.s3_neumann = neumann(g.center3(), g.a3);
  return out;
}

// ---------------------------------------------------------------------------
// Cues

cplx hrtf(const ModalSolution& sol, const IncidentField& incident, const Vec3& sensor,
          HrtfReference reference) {
  const cplx total = evaluate_exterior(sol, incident, sensor);
  const cplx ref = (reference == HrtfReference::Center || std::holds_alternative<Monopole>(incident.kind))
                       ? incident.value_at_center()
                       : incident.evaluate(sensor);
  return total / ref;
}

double ild(cplx h_left, cplx h_right) {
  const double left = std::abs(h_left);
  if (!(left > 0.0)) throw DegenerateCueError("ild: left HRTF magnitude is zero");
  return 20.0 * std::log10(std::abs(h_right) / left);
}

std::vector<double> unwrap_phase(const std::vector<double>& wrapped) {
  std::vector<double> out(wrapped);
  double offset = 0.0;
  for (std::size_t i = 1; i < wrapped.size(); ++i) {
    const double step = wrapped[i] - wrapped[i - 1];
    double reduced = std::remainder(step, 2.0 * kPi);
    if (reduced == -kPi && step > 0.0) reduced = kPi;
    offset += reduced - step;
    out[i] = wrapped[i] + offset;
  }
  return out;
}

std::vector<double> unwrapped_phase(const std::vector<cplx>& values) {
  std::vector<double> wrapped(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) wrapped[i] = std::arg(values[i]);
  return unwrap_phase(wrapped);
}

std::vector<double> itd(const std::vector<double>& phase_left,
                        const std::vector<double>& phase_right,
                        const std::vector<double>& freqs) {
  if (phase_left.size() != freqs.size() || phase_right.size() != freqs.size()) {
    throw std::invalid_argument("itd: length mismatch");
  }
  std::vector<double> out(freqs.size());
  if (freqs.empty()) return out;
  // Each channel is unwrapped on its own, so the two can start on different
  // branches; pull the first-bin difference into (-pi, pi].
  const double d0 = phase_right[0] - phase_left[0];
  const double shift = std::remainder(d0, 2.0 * kPi) - d0;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!(freqs[i] > 0.0)) throw std::invalid_argument("itd: frequencies must be > 0");
    out[i] = (phase_right[i] - phase_left[i] + shift) / (2.0 * kPi * freqs[i]);
  }
  return out;
}

CueSpectrum make_cue_spectrum(std::vector<double> freqs, std::vector<cplx> h_left,
                              std::vector<cplx> h_right) {
  CueSpectrum out;
  out.ild.resize(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) out.ild[i] = ild(h_left[i], h_right[i]);
  out.itd = itd(unwrapped_phase(h_left), unwrapped_phase(h_right), freqs);
  out.freqs = std::move(freqs);
  out.h_left = std::move(h_left);
  out.h_right = std::move(h_right);
  return out;
}

CueSpectrum cue_spectrum(const SceneConfig& scene, double theta, double phi, FactorCache* cache) {
  const auto freqs = scene.freqs.values();
  std::vector<cplx> hl(freqs.size()), hr(freqs.size());
  std::string failures;
  const Vec3 ml = scene.geometry.a1 * scene.sensors.left.unit();
  const Vec3 mr = scene.geometry.a1 * scene.sensors.right.unit();
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    try {
      const double f = freqs[i];
      const int p = truncation_degree(scene.media, scene.geometry, f, scene.truncation_override);
      const auto incident = plane_wave_from_source(theta, phi, scene.media.k_outer(f), p);
      const auto sol = solve_scattering(scene.media, scene.geometry, f, incident, p, cache);
      hl[i] = hrtf(sol, incident, ml, scene.reference);
      hr[i] = hrtf(sol, incident, mr, scene.reference);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << " [f = " << freqs[i] << " Hz: " << e.what() << "]";
      failures += msg.str();
    }
  }
  if (!failures.empty()) throw SceneError("cue_spectrum failed:" + failures);
  return make_cue_spectrum(freqs, std::move(hl), std::move(hr));
}

}  // namespace msph
