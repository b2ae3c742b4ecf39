#pragma once

// Coaxial re-expansion of multipole series between centers on the z-axis.
//
// For a basis function F_n^s about the origin (F = R for regular, S for
// singular) and a new center at t_z * z, with r' = r - t_z * z,
//
//   F_n^s(r) = sum_{n'} T_{n' n}^s  G_{n'}^s(r'),
//
// where (F|G) is (R|R), (S|R) (valid for |r'| < |t_z|) or (S|S) (valid for
// |r'| > |t_z|). Matrices are stored with row = target degree n' and
// column = source degree n, both offset by |s|, so translated coefficients
// are entries * source_coefficients.

#include <Eigen/Dense>

#include "msph/specfun.hpp"

namespace msph {

enum class TranslationKind { RegularToRegular, SingularToRegular, SingularToSingular };

struct TranslationMatrix {
  int order_s = 0;
  TranslationKind kind = TranslationKind::RegularToRegular;
  double kt = 0.0;         // k * |t_z|
  int direction_sign = 1;  // sign of t_z
  Eigen::MatrixXcd entries;

  int size() const { return static_cast<int>(entries.rows()); }
  /// Coefficient mapping source degree `source` to target degree `target`.
  cplx coefficient(int target, int source) const;
};

/// Rows and columns beyond p that are built and then cropped away.
inline constexpr int kTranslationPadding = 4;

TranslationMatrix coaxial_rr(int s, double k, double t_z, int p);
TranslationMatrix coaxial_sr(int s, double k, double t_z, int p);
/// (S|S) coefficients coincide with (R|R); kind is tagged for clarity.
TranslationMatrix coaxial_ss(int s, double k, double t_z, int p);

}  // namespace msph
