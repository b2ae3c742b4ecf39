#pragma once

// Spherical Bessel/Hankel functions, associated Legendre functions and
// spherical harmonics used by every multipole expansion in the library.
//
// Harmonics follow
//   Y_l^s(theta, phi) = sqrt((2l+1)/4pi) sqrt((l-|s|)!/(l+|s|)!) P_l^{|s|}(cos theta) e^{i s phi}
// with P_l^m carrying no Condon-Shortley factor, so conj(Y_l^s) == Y_l^{-s}.

#include <complex>
#include <stdexcept>
#include <vector>

namespace msph {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr int kMaxDegree = 200;

/// Raised for arguments outside a special function's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct DegreeOrder {
  int l = 0;
  int s = 0;

  /// Throws DomainError unless l >= 0 and |s| <= l.
  void validate() const;
};

/// Value and derivative (w.r.t. the dimensionless argument) of a radial function.
struct RadialPair {
  cplx value;
  cplx derivative;
};

RadialPair spherical_bessel_j(int l, double x);
RadialPair spherical_hankel_h1(int l, double x);

/// j_l(x), j_l'(x) for l = 0..lmax in one pass. x >= 0.
void spherical_bessel_j_table(int lmax, double x, std::vector<double>& j,
                              std::vector<double>& dj);

/// y_l(x), y_l'(x) for l = 0..lmax (upward recurrence). x > 0.
void spherical_bessel_y_table(int lmax, double x, std::vector<double>& y,
                              std::vector<double>& dy);

/// h_l = j_l + i y_l and derivatives for l = 0..lmax. x > 0.
void spherical_hankel_table(int lmax, double x, std::vector<cplx>& h,
                            std::vector<cplx>& dh);

/// Unnormalized associated Legendre P_l^m(x), no Condon-Shortley phase.
double legendre_p(int l, int m, double x);

cplx spherical_harmonic(const DegreeOrder& lo, double theta, double phi);

/// Flat index for (l, s) with |s| <= l: l*l + l + s.
constexpr int harmonic_index(int l, int s) { return l * l + l + s; }
constexpr int harmonic_count(int p) { return p * p; }

/// All Y_l^s for l < p, stored at harmonic_index(l, s). Optionally fills
/// dY/dtheta (dY/dphi is i*s*Y and not stored).
void spherical_harmonics_table(int p, double theta, double phi,
                               std::vector<cplx>& y,
                               std::vector<cplx>* dy_dtheta = nullptr);

}  // namespace msph
