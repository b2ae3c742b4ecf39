#pragma once

// Reference implementations used only by tests. Each avoids the library code
// path it is compared against.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "msph/field.hpp"
#include "msph/solver.hpp"
#include "msph/translation.hpp"

namespace oracle {

using msph::cplx;
using msph::kPi;
using msph::Vec3;

/// j_l(x) by its power series, in long double.
inline long double bessel_j_series(int l, long double x) {
  long double dfact = 1.0L;  // (2l+1)!!
  for (int i = 3; i <= 2 * l + 1; i += 2) dfact *= i;
  long double term = std::pow(x, static_cast<long double>(l)) / dfact;
  long double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -(x * x / 2.0L) / (k * (2.0L * l + 2.0L * k + 1.0L));
    sum += term;
    if (std::abs(term) < 1e-30L * std::abs(sum)) break;
  }
  return sum;
}

/// P_l^m(x) from Rodrigues' formula (no Condon-Shortley phase).
inline long double legendre_rodrigues(int l, int m, long double x) {
  // Coefficients of (x^2 - 1)^l in ascending powers.
  std::vector<long double> c(2 * l + 1, 0.0L);
  long double binom = 1.0L;
  for (int k = 0; k <= l; ++k) {
    c[2 * k] = binom * (((l - k) % 2) ? -1.0L : 1.0L);
    binom = binom * (l - k) / (k + 1);
  }
  for (int d = 0; d < l + m; ++d) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i) c[i] = c[i + 1] * static_cast<long double>(i + 1);
    c.back() = 0.0L;
  }
  long double poly = 0.0L;
  for (auto it = c.rbegin(); it != c.rend(); ++it) poly = poly * x + *it;
  long double denom = 1.0L;
  for (int i = 1; i <= l; ++i) denom *= 2.0L * i;
  return std::pow(1.0L - x * x, m / 2.0L) * poly / denom;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        break;
      }
    }
    x[i] = z;
  }
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double ct = 2.0 * u(rng) - 1.0, ph = 2.0 * kPi * u(rng);
  const double st = std::sqrt(1.0 - ct * ct);
  return {st * std::cos(ph), st * std::sin(ph), ct};
}

inline std::vector<Vec3> random_shell_points(int n, double rmin, double rmax,
                                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(rmin, rmax);
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(u(rng) * random_unit(rng));
  return out;
}

/// Two rigid spheres (S2 at the origin, S3 on the z-axis) in a homogeneous
/// medium with wavenumber k: what the full model reduces to when the media
/// inside and outside S1 are identical.
struct TwoRigidSpheres {
  int p = 0;
  double k = 0.0;
  double offset = 0.0;
  msph::CoefficientSet C, D;  // singular about the origin and about S3's center

  TwoRigidSpheres(const msph::Geometry& g, double k_, const msph::IncidentField& inc, int p_)
      : p(p_), k(k_), offset(g.offset3_z), C(p_), D(p_) {
    std::vector<double> j2, dj2, j3, dj3;
    std::vector<cplx> h2, dh2, h3, dh3;
    msph::spherical_bessel_j_table(p - 1, k * g.a2, j2, dj2);
    msph::spherical_hankel_table(p - 1, k * g.a2, h2, dh2);
    msph::spherical_bessel_j_table(p - 1, k * g.a3, j3, dj3);
    msph::spherical_hankel_table(p - 1, k * g.a3, h3, dh3);
    for (int s = -(p - 1); s <= p - 1; ++s) {
      const int m = std::abs(s), n = p - m;
      const Eigen::MatrixXcd to_origin = msph::coaxial_sr(s, k, -offset, p).entries;
      const Eigen::MatrixXcd reg_to_3 = msph::coaxial_rr(s, k, offset, p).entries;
      const Eigen::MatrixXcd sing_to_3 = msph::coaxial_sr(s, k, offset, p).entries;
      const Eigen::VectorXcd E = inc.coefficients.order_vector(s);
      const Eigen::VectorXcd E3 = reg_to_3 * E;
      // Unknowns are modal surface values c_l = C_l h_l(k a2), d_l = D_l h_l(k a3);
      // Neumann rows are multiplied by j_l / j_l' so every block stays O(1).
      Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
      Eigen::VectorXcd b(2 * n);
      for (int i = 0; i < n; ++i) {
        const int l = m + i;
        M(i, i) = dh2[l] * j2[l] / (dj2[l] * h2[l]);
        M(n + i, n + i) = dh3[l] * j3[l] / (dj3[l] * h3[l]);
        for (int c = 0; c < n; ++c) {
          const int q = m + c;
          M(i, n + c) = j2[l] * to_origin(i, c) / h3[q];
          M(n + i, c) = j3[l] * sing_to_3(i, c) / h2[q];
        }
        b(i) = -j2[l] * E(i);
        b(n + i) = -j3[l] * E3(i);
      }
      const Eigen::VectorXcd x = M.partialPivLu().solve(b);
      Eigen::VectorXcd cv(n), dv(n);
      for (int i = 0; i < n; ++i) {
        cv(i) = x(i) / h2[m + i];
        dv(i) = x(n + i) / h3[m + i];
      }
      C.set_order_vector(s, cv);
      D.set_order_vector(s, dv);
    }
  }

  cplx total(const msph::IncidentField& inc, const Vec3& r) const {
    const auto s1 = msph::singular_basis(p, k, r);
    const auto s3 = msph::singular_basis(p, k, r - Vec3(0.0, 0.0, offset));
    cplx v = inc.evaluate(r);
    for (std::size_t i = 0; i < s1.size(); ++i) v += C.flat()[i] * s1[i] + D.flat()[i] * s3[i];
    return v;
  }
};

/// Penetrable sphere S1 with a concentric rigid core S2 (no S3): separable,
/// so each degree is a 3x3 system in (A_l, B_l, C_l) with unit incidence.
/// Returns the exterior scattering ratios B_l / E_l.
inline std::vector<cplx> shell_core_ratios(const msph::Media& m, const msph::Geometry& g,
                                           double f, int p) {
  const double ko = m.k_outer(f), ki = m.k_inner(f), d = m.density_ratio();
  std::vector<cplx> out(p);
  for (int l = 0; l < p; ++l) {
    const auto jo = msph::spherical_bessel_j(l, ko * g.a1);
    const auto ho = msph::spherical_hankel_h1(l, ko * g.a1);
    const auto ji = msph::spherical_bessel_j(l, ki * g.a1);
    const auto hi = msph::spherical_hankel_h1(l, ki * g.a1);
    const auto j2 = msph::spherical_bessel_j(l, ki * g.a2);
    const auto h2 = msph::spherical_hankel_h1(l, ki * g.a2);
    Eigen::Matrix3cd M;
    Eigen::Vector3cd b;
    M << j2.derivative, 0.0, h2.derivative,
         d * ji.value, -ho.value, d * hi.value,
         ki * ji.derivative, -ko * ho.derivative, ki * hi.derivative;
    b << 0.0, jo.value, ko * jo.derivative;
    out[l] = M.partialPivLu().solve(b)(1);
  }
  return out;
}

inline cplx shell_core_exterior(const std::vector<cplx>& ratios, const msph::IncidentField& inc,
                                const Vec3& r) {
  const int p = static_cast<int>(ratios.size());
  const auto sb = msph::singular_basis(p, inc.k_o, r);
  cplx v = inc.evaluate(r);
  for (int l = 0; l < p; ++l)
    for (int s = -l; s <= l; ++s) v += ratios[l] * inc.coefficients(l, s) * sb[msph::harmonic_index(l, s)];
  return v;
}

}  // namespace oracle
