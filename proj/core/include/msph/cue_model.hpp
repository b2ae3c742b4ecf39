#pragma once

// Fast binaural cue evaluation for plane-wave sources.
//
// For a fixed scene the scattered pressure at a sensor is linear in the
// incident coefficients, psi_scat(M) = sum g_l^s E_l^s, so each frequency bin
// stores one receiver vector g per sensor (one transposed solve per order).
// Changing the source direction then costs one harmonic table.

#include <vector>

#include "msph/field.hpp"
#include "msph/scene.hpp"

namespace msph {

struct CueEvaluation {
  std::vector<cplx> h_left;
  std::vector<cplx> h_right;
  std::vector<double> ild;  // dB
  std::vector<double> itd;  // s
  // Filled only when derivatives are requested.
  std::vector<double> dild_dtheta, dild_dphi;
  std::vector<double> ditd_dtheta, ditd_dphi;
};

class CueModel {
 public:
  explicit CueModel(const SceneConfig& scene, FactorCache* cache = nullptr);

  const SceneConfig& scene() const { return scene_; }
  const std::vector<double>& freqs() const { return freqs_; }
  std::size_t bins() const { return freqs_.size(); }
  int truncation(std::size_t bin) const { return bins_[bin].p; }

  /// Cues for a source in direction (theta, phi).
  CueEvaluation evaluate(double theta, double phi, bool with_derivatives = false) const;

  /// (H_L, H_R) at one bin.
  std::pair<cplx, cplx> hrtf_pair(std::size_t bin, double theta, double phi) const;

  /// Cues of a full-solve spectrum in the same layout (no derivatives).
  CueSpectrum spectrum(double theta, double phi) const;

 private:
  struct Bin {
    double f = 0.0;
    double k_o = 0.0;
    int p = 0;
    std::vector<cplx> g_left, g_right;
  };

  struct Pressure {
    cplx value, d_theta, d_phi;
  };

  Pressure sensor_pressure(const Bin& bin, const std::vector<cplx>& g, const Vec3& sensor,
                           const Vec3& src, const Vec3& dsrc_dtheta, const Vec3& dsrc_dphi,
                           const std::vector<cplx>& y, const std::vector<cplx>& dy,
                           bool with_derivatives) const;

  SceneConfig scene_;
  std::vector<double> freqs_;
  std::vector<Bin> bins_;
  int p_max_ = 0;
  Vec3 left_, right_;
};

}  // namespace msph
