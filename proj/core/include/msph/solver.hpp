#pragma once

// Scattering from a penetrable sphere S1 (radius a1, center O1 = origin)
// enclosing a concentric rigid sphere S2 (radius a2) and a rigid sphere S3
// (radius a3) centered at offset3_z * z.
//
// Fields (velocity-potential convention, e^{-i omega t}):
//   exterior  psi_o   = psi_in + sum B_l^s S_l^s(k_o r1)
//   interior  psi_int = sum A_l^s R_l^s(k_i r1) + sum C_l^s S_l^s(k_i r1)
//                       + sum D_l^s S_l^s(k_i r3)
// with boundary conditions
//   S1: d psi_int = psi_o,  d(psi_int)/dn = d(psi_o)/dn,  d = rho_i / rho_o
//   S2, S3: d(psi_int)/dn = 0.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "msph/specfun.hpp"

namespace msph {

using Vec3 = Eigen::Vector3d;

struct Media {
  double rho_o = 1000.0;  // kg/m^3
  double c_o = 1500.0;    // m/s
  double rho_i = 920.0;
  double c_i = 1420.0;

  double k_outer(double f_hz) const { return 2.0 * kPi * f_hz / c_o; }
  double k_inner(double f_hz) const { return 2.0 * kPi * f_hz / c_i; }
  double density_ratio() const { return rho_i / rho_o; }
};

struct Geometry {
  double a1 = 0.2;
  double a2 = 0.05;
  double a3 = 0.05;
  double offset3_z = 0.12;

  Vec3 center3() const { return {0.0, 0.0, offset3_z}; }
};

/// One violated geometry or media inequality, with both sides evaluated.
struct Violation {
  std::string rule;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string message;
};

std::vector<Violation> validate_geometry(const Geometry& geometry, const Media& media);

/// Raised when a scene or solve request is invalid.
class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficients c_l^s for l < p, stored at harmonic_index(l, s).
class CoefficientSet {
 public:
  CoefficientSet() = default;
  explicit CoefficientSet(int p) : p_(p), data_(harmonic_count(p), cplx{}) {}

  int truncation() const { return p_; }
  cplx& operator()(int l, int s) { return data_[harmonic_index(l, s)]; }
  cplx operator()(int l, int s) const { return data_[harmonic_index(l, s)]; }
  const std::vector<cplx>& flat() const { return data_; }
  std::vector<cplx>& flat() { return data_; }

  /// Degrees |s|..p-1 of order s as a vector.
  Eigen::VectorXcd order_vector(int s) const;
  void set_order_vector(int s, const Eigen::VectorXcd& v);

 private:
  int p_ = 0;
  std::vector<cplx> data_;
};

struct PlaneWave {
  /// Propagation direction of e^{i k.r}; the source lies along -k.
  double theta = 0.0;
  double phi = 0.0;
};

struct Monopole {
  Vec3 position{0.0, 0.0, 1.0};
  cplx strength{1.0, 0.0};
};

struct IncidentField {
  std::variant<PlaneWave, Monopole> kind;
  double k_o = 0.0;
  CoefficientSet coefficients;  // E_l^s

  /// Directly evaluated incident field.
  cplx evaluate(const Vec3& r) const;
  /// Free-field value at the scatterer center O1.
  cplx value_at_center() const;
};

/// E_l^s = 4 pi i^l conj(Y_l^s(theta, phi)) for e^{i k.r}, k along (theta, phi).
IncidentField plane_wave_coefficients(double theta, double phi, double k_o, int p);

/// Plane wave arriving from a source in direction (theta, phi).
IncidentField plane_wave_from_source(double theta, double phi, double k_o, int p);

/// E_l^s = Q i k_o h_l(k_o |r_s|) Y_l^{-s}(r_s). Rejects |r_s| <= outer_radius.
IncidentField monopole_coefficients(const Vec3& r_s, cplx strength, double k_o, int p,
                                    double outer_radius);

/// p = max(ceil(3 k_i a1), 8) unless an override (>= 4) is given.
int truncation_degree(const Media& media, const Geometry& geometry, double f_hz,
                      std::optional<int> override_p = std::nullopt);

inline constexpr int kMinTruncation = 8;
inline constexpr double kConditionWarning = 1e12;

/// Per-order linear system in unknowns [A; B; C; D] (each p-|s| long).
/// Row blocks: S1 pressure, S1 velocity, S2 Neumann, S3 Neumann.
struct BlockSystem {
  int order_s = 0;
  int block = 0;  // p - |s|
  Eigen::MatrixXcd matrix;
  Eigen::VectorXcd rhs;
  /// rhs = [pressure_source .* E; velocity_source .* E; 0; 0]
  Eigen::VectorXcd pressure_source;
  Eigen::VectorXcd velocity_source;
};

BlockSystem assemble_system(int s, const Media& media, const Geometry& geometry, double f_hz,
                            const IncidentField& incident, int p);

/// Matrix-only assembly (no incident field), shared by the factor cache.
BlockSystem assemble_operator(int s, const Media& media, const Geometry& geometry, double f_hz,
                              int p);

/// LU factors of one order's block system after row/column equilibration:
/// the factored matrix is diag(row_scale) * M * diag(col_scale).
struct OrderFactorization {
  int order_s = 0;
  int block = 0;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  Eigen::VectorXd row_scale;
  Eigen::VectorXd col_scale;
  Eigen::VectorXcd pressure_source;
  Eigen::VectorXcd velocity_source;
  double rcond = 0.0;  // of the equilibrated matrix

  /// x with M x = b.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
  /// y with M^T y = c.
  Eigen::VectorXcd solve_transposed(const Eigen::VectorXcd& c) const;
};

/// Ruiz equilibration: scales with every row and column of diag(r) M diag(c)
/// having max-magnitude close to 1.
void equilibrate(const Eigen::MatrixXcd& m, Eigen::VectorXd& row_scale,
                 Eigen::VectorXd& col_scale);

/// Thread-safe cache of per-order LU factors keyed by (f, s, p, geometry, media).
class FactorCache {
 public:
  std::shared_ptr<const OrderFactorization> get(int s, const Media& media,
                                                const Geometry& geometry, double f_hz, int p);
  std::size_t size() const;
  void clear();

 private:
  using Key = std::tuple<double, int, int, std::uint64_t, std::uint64_t>;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const OrderFactorization>> entries_;
};

std::uint64_t hash_geometry(const Geometry& g);
std::uint64_t hash_media(const Media& m);

struct ModalSolution {
  double frequency = 0.0;
  int p = 0;
  double k_o = 0.0;
  double k_i = 0.0;
  Media media;
  Geometry geometry;
  CoefficientSet A, B, C, D;
  std::vector<std::string> warnings;
  double min_rcond = 1.0;
};

ModalSolution solve_scattering(const Media& media, const Geometry& geometry, double f_hz,
                               const IncidentField& incident, int p,
                               FactorCache* cache = nullptr);

}  // namespace msph
