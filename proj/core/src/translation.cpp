#include "msph/translation.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace msph {

namespace {

// cos(theta) Ybar_n^m = a(n) Ybar_{n+1}^m + a(n-1) Ybar_{n-1}^m
double a_coef(int n, int m) {
  if (n < m) return 0.0;
  return std::sqrt(static_cast<double>(n + 1 - m) * (n + 1 + m) /
                   (static_cast<double>(2 * n + 1) * (2 * n + 3)));
}

// sin(theta) e^{i phi} Ybar_n^m = c_up(n,m) Ybar_{n+1}^{m+1} - c_down(n,m) Ybar_{n-1}^{m+1}, m >= 0
double c_up(int n, int m) {
  return std::sqrt(static_cast<double>(n + m + 1) * (n + m + 2) /
                   (static_cast<double>(2 * n + 1) * (2 * n + 3)));
}

double c_down(int n, int m) {
  if (n - m < 2) return 0.0;
  return std::sqrt(static_cast<double>(n - m) * (n - m - 1) /
                   (static_cast<double>(2 * n - 1) * (2 * n + 1)));
}

inline double parity(int n) { return (n & 1) ? -1.0 : 1.0; }

// Builds the coaxial matrix of order m = |s| on degrees [m, size) for a
// translation of +kt along z. `singular` selects h_n seeds instead of j_n.
Eigen::MatrixXcd build_coaxial(int m, double kt, int size, bool singular) {
  const int nmax = 2 * (size - 1) + 2;

  std::vector<cplx> radial(nmax + 1);
  if (singular) {
    std::vector<cplx> h, dh;
    spherical_hankel_table(nmax, kt, h, dh);
    for (int n = 0; n <= nmax; ++n) radial[n] = h[n];
  } else {
    std::vector<double> j, dj;
    spherical_bessel_j_table(nmax, kt, j, dj);
    for (int n = 0; n <= nmax; ++n) radial[n] = j[n];
  }

  // Column n = 0 of order 0: (F|G)_{n',0}^0 = (-1)^{n'} sqrt(2n'+1) f_{n'}(kt).
  std::vector<cplx> column(nmax + 1);
  for (int n = 0; n <= nmax; ++n) {
    column[n] = parity(n) * std::sqrt(2.0 * n + 1.0) * radial[n];
  }

  // Climb sectorial columns (n = mm) from order mm to mm+1, losing one row per step.
  int top = nmax;
  for (int mm = 0; mm < m; ++mm) {
    std::vector<cplx> next(nmax + 1, cplx{});
    const double denom = c_up(mm, mm);
    for (int np = mm + 1; np < top; ++np) {
      const cplx below = (np - 1 >= mm) ? column[np - 1] : cplx{};
      next[np] = (c_up(np - 1, mm) * below + c_down(np + 1, mm) * column[np + 1]) / denom;
    }
    column.swap(next);
    --top;
  }

  // Lower triangle (n' >= n) by the degree recurrence, one row lost per column.
  const int rows = top + 1;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(rows, size);
  for (int np = m; np <= top; ++np) full(np, m) = column[np];
  int col_top = top;
  for (int n = m; n + 1 < size; ++n) {
    const double an = a_coef(n, m);
    const double an1 = a_coef(n - 1, m);
    for (int np = n + 1; np < col_top; ++np) {
      const cplx prev = (n - 1 >= m) ? full(np, n - 1) : cplx{};
      full(np, n + 1) =
          (an1 * prev - a_coef(np, m) * full(np + 1, n) + a_coef(np - 1, m) * full(np - 1, n)) / an;
    }
    --col_top;
  }

  const int dim = size - m;
  Eigen::MatrixXcd out(dim, dim);
  for (int np = m; np < size; ++np) {
    for (int n = m; n < size; ++n) {
      out(np - m, n - m) = (np >= n) ? full(np, n) : parity(n + np) * full(n, np);
    }
  }
  return out;
}

TranslationMatrix make_translation(TranslationKind kind, int s, double k, double t_z, int p) {
  const int m = std::abs(s);
  if (p < m + 1) {
    throw DomainError("translation: truncation p=" + std::to_string(p) +
                      " too small for order " + std::to_string(s));
  }
  if (p + kTranslationPadding > kMaxDegree + 1) throw DomainError("translation: p exceeds degree cap");
  if (!(k > 0.0) || !std::isfinite(t_z)) throw DomainError("translation: need k > 0 and finite t_z");

  TranslationMatrix out;
  out.order_s = s;
  out.kind = kind;
  out.kt = k * std::abs(t_z);
  out.direction_sign = (t_z < 0.0) ? -1 : 1;

  const int dim = p - m;
  if (t_z == 0.0) {
    if (kind == TranslationKind::SingularToRegular) {
      throw DomainError("coaxial_sr: zero translation is singular");
    }
    out.entries = Eigen::MatrixXcd::Identity(dim, dim);
    return out;
  }

  const bool singular = (kind == TranslationKind::SingularToRegular);
  Eigen::MatrixXcd padded = build_coaxial(m, out.kt, p + kTranslationPadding, singular);
  out.entries = padded.topLeftCorner(dim, dim);
  if (t_z < 0.0) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) out.entries(i, j) *= parity(i + j);
  }
  return out;
}

}  // namespace

cplx TranslationMatrix::coefficient(int target, int source) const {
  const int m = std::abs(order_s);
  return entries(target - m, source - m);
}

TranslationMatrix coaxial_rr(int s, double k, double t_z, int p) {
  return make_translation(TranslationKind::RegularToRegular, s, k, t_z, p);
}

TranslationMatrix coaxial_sr(int s, double k, double t_z, int p) {
  return make_translation(TranslationKind::SingularToRegular, s, k, t_z, p);
}

TranslationMatrix coaxial_ss(int s, double k, double t_z, int p) {
  return make_translation(TranslationKind::SingularToSingular, s, k, t_z, p);
}

}  // namespace msph
