#pragma once

// Field evaluation in both regions and the binaural cues derived from it.

#include <string>
#include <vector>

#include "msph/scene.hpp"
#include "msph/solver.hpp"

namespace msph {

/// Raised when a cue is undefined (e.g. a sensor sees zero pressure).
class DegenerateCueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// j_l(k|r|) Y_l^s(r) for l < p, flat harmonic layout.
std::vector<cplx> regular_basis(int p, double k, const Vec3& r);
/// h_l(k|r|) Y_l^s(r) for l < p. Requires r != 0.
std::vector<cplx> singular_basis(int p, double k, const Vec3& r);

/// Scattered exterior field sum B S about O1.
cplx scattered_exterior(const ModalSolution& sol, const Vec3& r);

/// psi_in + scattered; rejects points inside S1.
cplx evaluate_exterior(const ModalSolution& sol, const IncidentField& incident, const Vec3& r);

/// A R + C S about O1 plus D S about O3; rejects points outside the interior region.
cplx evaluate_interior(const ModalSolution& sol, const Vec3& r);

/// Same series without the region checks (used on and across boundaries).
cplx evaluate_exterior_unchecked(const ModalSolution& sol, const IncidentField& incident,
                                 const Vec3& r);
cplx evaluate_interior_unchecked(const ModalSolution& sol, const Vec3& r);

/// Maximum relative boundary-condition violation on each surface.
struct BoundaryResiduals {
  double s1_pressure = 0.0;  // |d psi_int - psi_o| / max|psi_o|
  double s1_velocity = 0.0;  // |dn psi_int - dn psi_o| / (k_o max|psi_o|)
  double s2_neumann = 0.0;   // |dn psi_int| / (k_i max|psi_int|)
  double s3_neumann = 0.0;

  double worst() const;
};

/// Samples `points` quasi-uniform points per surface; normal derivatives by
/// central differences.
BoundaryResiduals boundary_residuals(const ModalSolution& sol, const IncidentField& incident,
                                     int points = 200);

/// n nearly uniform unit vectors (Fibonacci lattice).
std::vector<Vec3> fibonacci_sphere(int n);

cplx hrtf(const ModalSolution& sol, const IncidentField& incident, const Vec3& sensor,
          HrtfReference reference = HrtfReference::Center);

/// 20 log10(|H_R| / |H_L|).
double ild(cplx h_left, cplx h_right);

/// One-dimensional phase unwrapping along the sequence.
std::vector<double> unwrap_phase(const std::vector<double>& wrapped);
std::vector<double> unwrapped_phase(const std::vector<cplx>& values);

/// (phase_R - phase_L) / (2 pi f) per bin; phases already unwrapped. The difference
/// is moved by a whole number of turns so that it lies in (-pi, pi] at the first bin.
std::vector<double> itd(const std::vector<double>& phase_left,
                        const std::vector<double>& phase_right,
                        const std::vector<double>& freqs);

struct CueSpectrum {
  std::vector<double> freqs;
  std::vector<cplx> h_left;
  std::vector<cplx> h_right;
  std::vector<double> ild;  // dB
  std::vector<double> itd;  // s
};

/// Builds ILD and ITD from per-frequency HRTF pairs.
CueSpectrum make_cue_spectrum(std::vector<double> freqs, std::vector<cplx> h_left,
                              std::vector<cplx> h_right);

/// Full solve at every frequency for a plane wave from direction (theta, phi).
CueSpectrum cue_spectrum(const SceneConfig& scene, double theta, double phi,
                         FactorCache* cache = nullptr);

}  // namespace msph
