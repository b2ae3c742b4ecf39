#include "msph/solver.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "msph/translation.hpp"

namespace msph {

// ---------------------------------------------------------------------------
// Geometry validation

std::vector<Violation> validate_geometry(const Geometry& g, const Media& m) {
  std::vector<Violation> out;
  auto fail = [&](std::string rule, double lhs, double rhs, const std::string& text) {
    std::ostringstream msg;
    msg.precision(6);
    msg << rule << ": " << text;
    out.push_back({std::move(rule), lhs, rhs, msg.str()});
  };
  auto positive = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream t;
      t << name << " = " << v << " must be > 0";
      fail(std::string("positive ") + name, v, 0.0, t.str());
    }
  };
  positive("rho_o", m.rho_o);
  positive("c_o", m.c_o);
  positive("rho_i", m.rho_i);
  positive("c_i", m.c_i);
  positive("a2", g.a2);
  positive("a3", g.a3);

  if (!(g.a1 > g.a2)) {
    std::ostringstream t;
    t << "a1 = " << g.a1 << " must exceed a2 = " << g.a2;
    fail("a1 > a2", g.a1, g.a2, t.str());
  }
  const double sep = std::abs(g.offset3_z);
  if (!(sep >= g.a2 + g.a3)) {
    std::ostringstream t;
    t << "|offset3_z| = " << sep << " < a2 + a3 = " << g.a2 + g.a3;
    fail("non-overlap", sep, g.a2 + g.a3, t.str());
  }
  if (!(sep + g.a3 <= g.a1)) {
    std::ostringstream t;
    t << "|offset3_z| + a3 = " << sep + g.a3 << " > a1 = " << g.a1;
    fail("containment", sep + g.a3, g.a1, t.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coefficient storage

Eigen::VectorXcd CoefficientSet::order_vector(int s) const {
  const int m = std::abs(s);
  Eigen::VectorXcd v(std::max(0, p_ - m));
  for (int l = m; l < p_; ++l) v(l - m) = (*this)(l, s);
  return v;
}

void CoefficientSet::set_order_vector(int s, const Eigen::VectorXcd& v) {
  const int m = std::abs(s);
  for (int l = m; l < p_; ++l) (*this)(l, s) = v(l - m);
}

// ---------------------------------------------------------------------------
// Incident fields

cplx IncidentField::evaluate(const Vec3& r) const {
  if (const auto* pw = std::get_if<PlaneWave>(&kind)) {
    const Vec3 dir(std::sin(pw->theta) * std::cos(pw->phi), std::sin(pw->theta) * std::sin(pw->phi),
                   std::cos(pw->theta));
    return std::polar(1.0, k_o * dir.dot(r));
  }
  const auto& mono = std::get<Monopole>(kind);
  const double dist = (r - mono.position).norm();
  return mono.strength * std::polar(1.0, k_o * dist) / (4.0 * kPi * dist);
}

cplx IncidentField::value_at_center() const { return evaluate(Vec3::Zero()); }

IncidentField plane_wave_coefficients(double theta, double phi, double k_o, int p) {
  if (p < 1) throw SceneError("plane_wave_coefficients: p must be >= 1");
  IncidentField out{PlaneWave{theta, phi}, k_o, CoefficientSet(p)};
  std::vector<cplx> y;
  spherical_harmonics_table(p, theta, phi, y);
  cplx il{1.0, 0.0};
  for (int l = 0; l < p; ++l) {
    for (int s = -l; s <= l; ++s) {
      out.coefficients(l, s) = 4.0 * kPi * il * std::conj(y[harmonic_index(l, s)]);
    }
    il *= cplx{0.0, 1.0};
  }
  return out;
}

IncidentField plane_wave_from_source(double theta, double phi, double k_o, int p) {
  double prop_phi = std::fmod(phi + kPi, 2.0 * kPi);
  if (prop_phi < 0.0) prop_phi += 2.0 * kPi;
  return plane_wave_coefficients(kPi - theta, prop_phi, k_o, p);
}

IncidentField monopole_coefficients(const Vec3& r_s, cplx strength, double k_o, int p,
                                    double outer_radius) {
  const double dist = r_s.norm();
  if (!(dist > outer_radius)) {
    std::ostringstream msg;
    msg << "monopole source at |r_s| = " << dist << " is not outside S1 (a1 = " << outer_radius
        << ")";
    throw SceneError(msg.str());
  }
  IncidentField out{Monopole{r_s, strength}, k_o, CoefficientSet(p)};
  const double theta = std::acos(std::clamp(r_s.z() / dist, -1.0, 1.0));
  const double phi = std::atan2(r_s.y(), r_s.x());
  std::vector<cplx> y, h, dh;
  spherical_harmonics_table(p, theta, phi, y);
  spherical_hankel_table(p - 1, k_o * dist, h, dh);
  const cplx prefactor = strength * cplx{0.0, k_o};
  for (int l = 0; l < p; ++l) {
    for (int s = -l; s <= l; ++s) {
      out.coefficients(l, s) = prefactor * h[l] * y[harmonic_index(l, -s)];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Truncation

int truncation_degree(const Media& media, const Geometry& geometry, double f_hz,
                      std::optional<int> override_p) {
  if (override_p) {
    if (*override_p < 4) throw SceneError("truncation override must be >= 4");
    return *override_p;
  }
  if (!(f_hz > 0.0)) throw SceneError("truncation_degree: frequency must be > 0");
  const double kia1 = media.k_inner(f_hz) * geometry.a1;
  return std::max(static_cast<int>(std::ceil(3.0 * kia1)), kMinTruncation);
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

struct SurfaceRadial {
  std::vector<double> j, dj;
  std::vector<cplx> h, dh;
};

SurfaceRadial radial_on(int lmax, double x, double f_hz, const char* where) {
  SurfaceRadial r;
  spherical_bessel_j_table(lmax, x, r.j, r.dj);
  spherical_hankel_table(lmax, x, r.h, r.dh);
  for (int l = 0; l <= lmax; ++l) {
    if (!std::isfinite(std::abs(r.h[l])) || !std::isfinite(std::abs(r.dh[l])) ||
        std::abs(r.dh[l]) == 0.0 || std::abs(r.h[l]) == 0.0) {
      std::ostringstream msg;
      msg << "Hankel function degree " << l << " at k a = " << x << " on " << where
          << " is not representable (f = " << f_hz << " Hz)";
      throw SceneError(msg.str());
    }
  }
  return r;
}

void check_scene(const Media& media, const Geometry& geometry, double f_hz, int p) {
  if (!(f_hz > 0.0)) throw SceneError("frequency must be > 0");
  if (p < 1) throw SceneError("truncation must be >= 1");
  const auto violations = validate_geometry(geometry, media);
  if (!violations.empty()) {
    std::string msg = "invalid scene:";
    for (const auto& v : violations) msg += " [" + v.message + "]";
    throw SceneError(msg);
  }
}

}  // namespace

BlockSystem assemble_operator(int s, const Media& media, const Geometry& geometry, double f_hz,
                              int p) {
  check_scene(media, geometry, f_hz, p);
  const int m = std::abs(s);
  if (m >= p) throw SceneError("assemble_system: |s| must be < p");
  const int n = p - m;
  const double ki = media.k_inner(f_hz);
  const double ko = media.k_outer(f_hz);
  const double d = media.density_ratio();

  const SurfaceRadial in1 = radial_on(p - 1, ki * geometry.a1, f_hz, "S1 (interior)");
  const SurfaceRadial out1 = radial_on(p - 1, ko * geometry.a1, f_hz, "S1 (exterior)");
  const SurfaceRadial in2 = radial_on(p - 1, ki * geometry.a2, f_hz, "S2");
  const SurfaceRadial in3 = radial_on(p - 1, ki * geometry.a3, f_hz, "S3");

  const double t = geometry.offset3_z;
  // D lives about O3; O1 sits at -t relative to O3. A and C move from O1 to O3 (+t).
  const Eigen::MatrixXcd d_to_o1_singular = coaxial_ss(s, ki, -t, p).entries;
  const Eigen::MatrixXcd d_to_o1_regular = coaxial_sr(s, ki, -t, p).entries;
  const Eigen::MatrixXcd a_to_o3 = coaxial_rr(s, ki, t, p).entries;
  const Eigen::MatrixXcd c_to_o3 = coaxial_sr(s, ki, t, p).entries;

  BlockSystem sys;
  sys.order_s = s;
  sys.block = n;
  sys.matrix = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  sys.rhs = Eigen::VectorXcd::Zero(4 * n);
  sys.pressure_source.resize(n);
  sys.velocity_source.resize(n);

  const auto I = Eigen::MatrixXcd::Identity(n, n);
  auto blk = [&](int row, int col) { return sys.matrix.block(row * n, col * n, n, n); };

  Eigen::VectorXcd lambda2(n), lambda3(n);
  for (int i = 0; i < n; ++i) {
    const int l = m + i;
    const cplx gamma_i1 = in1.j[l] / in1.h[l];
    const cplx lambda_i1 = in1.dj[l] / in1.dh[l];
    lambda2(i) = in2.dj[l] / in2.dh[l];
    lambda3(i) = in3.dj[l] / in3.dh[l];

    // S1 pressure: d (A j + C h + D' h)(k_i a1) - B h(k_o a1) = E j(k_o a1), over d h(k_i a1)
    blk(0, 0)(i, i) = gamma_i1;
    blk(0, 1)(i, i) = -out1.h[l] / (d * in1.h[l]);
    sys.pressure_source(i) = out1.j[l] / (d * in1.h[l]);

    // S1 velocity: k_i (A j' + C h' + D' h')(k_i a1) - k_o B h'(k_o a1) = k_o E j'(k_o a1), over k_i h'(k_i a1)
    blk(1, 0)(i, i) = lambda_i1;
    blk(1, 1)(i, i) = -(ko * out1.dh[l]) / (ki * in1.dh[l]);
    sys.velocity_source(i) = (ko * out1.dj[l]) / (ki * in1.dh[l]);

    // S2: A j'(k_i a2) + C h'(k_i a2) + D'' j'(k_i a2) = 0, over h'(k_i a2)
    blk(2, 0)(i, i) = lambda2(i);
  }
  blk(0, 2) = I;
  blk(0, 3) = d_to_o1_singular;
  blk(1, 2) = I;
  blk(1, 3) = d_to_o1_singular;
  blk(2, 2) = I;
  blk(2, 3) = lambda2.asDiagonal() * d_to_o1_regular;
  // S3: (A' + C') j'(k_i a3) + D h'(k_i a3) = 0, over h'(k_i a3)
  blk(3, 0) = lambda3.asDiagonal() * a_to_o3;
  blk(3, 2) = lambda3.asDiagonal() * c_to_o3;
  blk(3, 3) = I;
  return sys;
}

BlockSystem assemble_system(int s, const Media& media, const Geometry& geometry, double f_hz,
                            const IncidentField& incident, int p) {
  BlockSystem sys = assemble_operator(s, media, geometry, f_hz, p);
  if (incident.coefficients.truncation() < p) {
    throw SceneError("incident field truncated below p");
  }
  const Eigen::VectorXcd e = incident.coefficients.order_vector(s).head(sys.block);
  sys.rhs.segment(0, sys.block) = sys.pressure_source.cwiseProduct(e);
  sys.rhs.segment(sys.block, sys.block) = sys.velocity_source.cwiseProduct(e);
  return sys;
}

// ---------------------------------------------------------------------------
// Factor cache

namespace {

std::uint64_t fnv_mix(std::uint64_t h, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

std::shared_ptr<const OrderFactorization> factorize(int s, const Media& media,
                                                    const Geometry& geometry, double f_hz,
                                                    int p) {
  BlockSystem sys = assemble_operator(s, media, geometry, f_hz, p);
  auto out = std::make_shared<OrderFactorization>();
  out->order_s = s;
  out->block = sys.block;
  equilibrate(sys.matrix, out->row_scale, out->col_scale);
  out->lu.compute(out->row_scale.asDiagonal() * sys.matrix * out->col_scale.asDiagonal());
  out->rcond = out->lu.rcond();
  out->pressure_source = std::move(sys.pressure_source);
  out->velocity_source = std::move(sys.velocity_source);
  return out;
}

}  // namespace

void equilibrate(const Eigen::MatrixXcd& m, Eigen::VectorXd& row_scale,
                 Eigen::VectorXd& col_scale) {
  const Eigen::Index n = m.rows();
  row_scale = Eigen::VectorXd::Ones(n);
  col_scale = Eigen::VectorXd::Ones(m.cols());
  Eigen::MatrixXd mag = m.cwiseAbs();
  for (int sweep = 0; sweep < 20; ++sweep) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = mag.row(i).maxCoeff();
      if (r > 0.0) {
        const double f = 1.0 / std::sqrt(r);
        row_scale(i) *= f;
        mag.row(i) *= f;
        worst = std::max(worst, std::abs(1.0 - r));
      }
    }
    for (Eigen::Index j = 0; j < mag.cols(); ++j) {
      const double c = mag.col(j).maxCoeff();
      if (c > 0.0) {
        const double f = 1.0 / std::sqrt(c);
        col_scale(j) *= f;
        mag.col(j) *= f;
        worst = std::max(worst, std::abs(1.0 - c));
      }
    }
    if (worst < 1e-3) break;
  }
}

Eigen::VectorXcd OrderFactorization::solve(const Eigen::VectorXcd& b) const {
  const Eigen::VectorXcd scaled = row_scale.cwiseProduct(b);
  return col_scale.cwiseProduct(Eigen::VectorXcd(lu.solve(scaled)));
}

Eigen::VectorXcd OrderFactorization::solve_transposed(const Eigen::VectorXcd& c) const {
  // M^T = C^{-1} (R M C)^T R^{-1}
  const Eigen::VectorXcd scaled = col_scale.cwiseProduct(c);
  return row_scale.cwiseProduct(Eigen::VectorXcd(lu.transpose().solve(scaled)));
}

std::uint64_t hash_geometry(const Geometry& g) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : {g.a1, g.a2, g.a3, g.offset3_z}) h = fnv_mix(h, v);
  return h;
}

std::uint64_t hash_media(const Media& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : {m.rho_o, m.c_o, m.rho_i, m.c_i}) h = fnv_mix(h, v);
  return h;
}

std::shared_ptr<const OrderFactorization> FactorCache::get(int s, const Media& media,
                                                           const Geometry& geometry,
                                                           double f_hz, int p) {
  // The operator depends on |s| only.
  const Key key{f_hz, std::abs(s), p, hash_geometry(geometry), hash_media(media)};
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto fresh = factorize(std::abs(s), media, geometry, f_hz, p);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, std::move(fresh));
  return it->second;
}

std::size_t FactorCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void FactorCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

// ---------------------------------------------------------------------------
// Solve

ModalSolution solve_scattering(const Media& media, const Geometry& geometry, double f_hz,
                               const IncidentField& incident, int p, FactorCache* cache) {
  check_scene(media, geometry, f_hz, p);
  if (incident.coefficients.truncation() < p) throw SceneError("incident field truncated below p");

  ModalSolution sol;
  sol.frequency = f_hz;
  sol.p = p;
  sol.k_o = media.k_outer(f_hz);
  sol.k_i = media.k_inner(f_hz);
  sol.media = media;
  sol.geometry = geometry;
  sol.A = sol.B = sol.C = sol.D = CoefficientSet(p);

  for (int s = -(p - 1); s <= p - 1; ++s) {
    std::shared_ptr<const OrderFactorization> fac =
        cache ? cache->get(s, media, geometry, f_hz, p) : factorize(std::abs(s), media, geometry, f_hz, p);
    const int n = fac->block;
    const Eigen::VectorXcd e = incident.coefficients.order_vector(s).head(n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(4 * n);
    rhs.segment(0, n) = fac->pressure_source.cwiseProduct(e);
    rhs.segment(n, n) = fac->velocity_source.cwiseProduct(e);
    const Eigen::VectorXcd x = fac->solve(rhs);
    sol.A.set_order_vector(s, x.segment(0, n));
    sol.B.set_order_vector(s, x.segment(n, n));
    sol.C.set_order_vector(s, x.segment(2 * n, n));
    sol.D.set_order_vector(s, x.segment(3 * n, n));

    sol.min_rcond = std::min(sol.min_rcond, fac->rcond);
    if (fac->rcond < 1.0 / kConditionWarning && s >= 0) {
      std::ostringstream msg;
      msg << "order " << std::abs(s) << " at f = " << f_hz
          << " Hz is ill-conditioned (estimated condition " << 1.0 / fac->rcond << ")";
      sol.warnings.push_back(msg.str());
    }
  }
  return sol;
}

}  // namespace msph
