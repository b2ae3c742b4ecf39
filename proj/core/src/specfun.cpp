#include "msph/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace msph {

namespace {

// Tables are used internally for translation seeds, which need roughly twice
// the truncation degree.
constexpr int kMaxTableDegree = 2 * kMaxDegree + 16;

constexpr double kSeriesThreshold = 1e-2;

void check_table_degree(int lmax) {
  if (lmax < 0 || lmax > kMaxTableDegree) {
    throw DomainError("radial table degree out of range: " + std::to_string(lmax));
  }
}

void check_degree(int l) {
  if (l < 0) throw DomainError("negative degree " + std::to_string(l));
  if (l > kMaxDegree) {
    throw DomainError("degree " + std::to_string(l) + " exceeds cap " +
                      std::to_string(kMaxDegree));
  }
}

// Ascending power series, used where the recurrences lose digits (x < 1e-2).
void bessel_j_series(int lmax, double x, std::vector<double>& j) {
  const double half_x2 = 0.5 * x * x;
  double prefactor = 1.0;  // x^l / (2l+1)!!
  for (int l = 0; l <= lmax; ++l) {
    if (l > 0) prefactor *= x / (2 * l + 1);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 30; ++k) {
      term *= -half_x2 / (k * (2.0 * l + 2.0 * k + 1.0));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    j[l] = prefactor * sum;
  }
}

// Miller's downward recurrence normalized against the closed forms of j0/j1.
void bessel_j_downward(int lmax, double x, std::vector<double>& j) {
  const int top = std::max(lmax, static_cast<int>(std::ceil(x))) + 40 +
                  static_cast<int>(2.0 * std::sqrt(x + 1.0));
  std::vector<double> f(top + 2, 0.0);
  f[top + 1] = 0.0;
  f[top] = 1e-300;
  for (int l = top; l >= 1; --l) {
    f[l - 1] = (2.0 * l + 1.0) / x * f[l] - f[l + 1];
    if (std::abs(f[l - 1]) > 1e200) {
      for (int k = l - 1; k <= top; ++k) f[k] *= 1e-200;
    }
  }
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const double scale = std::abs(j0) >= std::abs(j1) ? j0 / f[0] : j1 / f[1];
  for (int l = 0; l <= lmax; ++l) j[l] = f[l] * scale;
}

}  // namespace

void DegreeOrder::validate() const {
  if (l < 0) throw DomainError("negative degree " + std::to_string(l));
  if (std::abs(s) > l) {
    throw DomainError("order " + std::to_string(s) + " exceeds degree " + std::to_string(l));
  }
}

void spherical_bessel_j_table(int lmax, double x, std::vector<double>& j,
                              std::vector<double>& dj) {
  check_table_degree(lmax);
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError("spherical_bessel_j: argument must be finite and >= 0");
  }
  j.assign(lmax + 1, 0.0);
  dj.assign(lmax + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    if (lmax >= 1) dj[1] = 1.0 / 3.0;
    return;
  }
  std::vector<double> ext(lmax + 2);
  if (x < kSeriesThreshold) {
    bessel_j_series(lmax + 1, x, ext);
  } else {
    bessel_j_downward(lmax + 1, x, ext);
  }
  for (int l = 0; l <= lmax; ++l) {
    j[l] = ext[l];
    dj[l] = (l == 0) ? -ext[1] : l / x * ext[l] - ext[l + 1];
  }
}

void spherical_bessel_y_table(int lmax, double x, std::vector<double>& y,
                              std::vector<double>& dy) {
  check_table_degree(lmax);
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("spherical_bessel_y: argument must be finite and > 0");
  }
  y.assign(lmax + 2, 0.0);
  dy.assign(lmax + 1, 0.0);
  y[0] = -std::cos(x) / x;
  y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int l = 1; l <= lmax; ++l) {
    y[l + 1] = (2.0 * l + 1.0) / x * y[l] - y[l - 1];
  }
  for (int l = 0; l <= lmax; ++l) {
    dy[l] = (l == 0) ? -y[1] : y[l - 1] - (l + 1.0) / x * y[l];
  }
  y.resize(lmax + 1);
}

void spherical_hankel_table(int lmax, double x, std::vector<cplx>& h,
                            std::vector<cplx>& dh) {
  if (!(x > 0.0)) throw DomainError("spherical_hankel_h1: argument must be > 0");
  std::vector<double> j, dj, y, dy;
  spherical_bessel_j_table(lmax, x, j, dj);
  spherical_bessel_y_table(lmax, x, y, dy);
  h.resize(lmax + 1);
  dh.resize(lmax + 1);
  for (int l = 0; l <= lmax; ++l) {
    h[l] = {j[l], y[l]};
    dh[l] = {dj[l], dy[l]};
  }
}

RadialPair spherical_bessel_j(int l, double x) {
  check_degree(l);
  if (x < 0.0) throw DomainError("spherical_bessel_j: negative argument");
  std::vector<double> j, dj;
  spherical_bessel_j_table(l, x, j, dj);
  return {j[l], dj[l]};
}

RadialPair spherical_hankel_h1(int l, double x) {
  check_degree(l);
  if (!(x > 0.0)) throw DomainError("spherical_hankel_h1: argument must be > 0");
  std::vector<cplx> h, dh;
  spherical_hankel_table(l, x, h, dh);
  return {h[l], dh[l]};
}

double legendre_p(int l, int m, double x) {
  if (m < 0 || m > l) throw DomainError("legendre_p: need 0 <= m <= l");
  if (!(std::abs(x) <= 1.0)) throw DomainError("legendre_p: |x| > 1");
  const double sine = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
  double pmm = 1.0;
  for (int k = 1; k <= m; ++k) pmm *= (2.0 * k - 1.0) * sine;
  if (l == m) return pmm;
  double pm1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pm1;
  double pl = 0.0;
  for (int n = m + 2; n <= l; ++n) {
    pl = (x * (2.0 * n - 1.0) * pm1 - (n + m - 1.0) * pmm) / (n - m);
    pmm = pm1;
    pm1 = pl;
  }
  return pl;
}

void spherical_harmonics_table(int p, double theta, double phi, std::vector<cplx>& y,
                               std::vector<cplx>* dy_dtheta) {
  if (p < 1 || p > kMaxDegree + 1) throw DomainError("spherical_harmonics_table: bad p");
  const int n = harmonic_count(p);
  const double x = std::cos(theta);
  const double sine = std::sin(theta);

  // Normalized Legendre values Pbar[l][m] = N_l^m P_l^m(x), m >= 0.
  std::vector<double> pbar(static_cast<std::size_t>(p) * (p + 1), 0.0);
  auto at = [&](int l, int m) -> double& { return pbar[static_cast<std::size_t>(l) * (p + 1) + m]; };

  double diag = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 0; m < p; ++m) {
    if (m > 0) diag *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sine;
    at(m, m) = diag;
    if (m + 1 < p) at(m + 1, m) = std::sqrt(2.0 * m + 3.0) * x * diag;
    for (int l = m + 2; l < p; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      at(l, m) = a * (x * at(l - 1, m) - b * at(l - 2, m));
    }
  }

  y.assign(n, cplx{});
  if (dy_dtheta) dy_dtheta->assign(n, cplx{});
  for (int m = 0; m < p; ++m) {
    const cplx e_pos = std::polar(1.0, m * phi);
    const cplx e_neg = std::conj(e_pos);
    for (int l = m; l < p; ++l) {
      const double v = at(l, m);
      y[harmonic_index(l, m)] = v * e_pos;
      if (m > 0) y[harmonic_index(l, -m)] = v * e_neg;
      if (dy_dtheta) {
        double dv;
        if (m == 0) {
          dv = (l >= 1) ? -std::sqrt(static_cast<double>(l) * (l + 1)) * at(l, 1) : 0.0;
        } else {
          const double lower = std::sqrt(static_cast<double>(l + m) * (l - m + 1)) * at(l, m - 1);
          const double upper = (m + 1 <= l) ? std::sqrt(static_cast<double>(l + m + 1) * (l - m)) * at(l, m + 1) : 0.0;
          dv = 0.5 * (lower - upper);
        }
        (*dy_dtheta)[harmonic_index(l, m)] = dv * e_pos;
        if (m > 0) (*dy_dtheta)[harmonic_index(l, -m)] = dv * e_neg;
      }
    }
  }
}

cplx spherical_harmonic(const DegreeOrder& lo, double theta, double phi) {
  lo.validate();
  if (lo.l > kMaxDegree) throw DomainError("spherical_harmonic: degree exceeds cap");
  if (theta < 0.0 || theta > kPi) throw DomainError("spherical_harmonic: theta outside [0, pi]");
  std::vector<cplx> y;
  spherical_harmonics_table(lo.l + 1, theta, phi, y);
  return y[harmonic_index(lo.l, lo.s)];
}

}  // namespace msph
