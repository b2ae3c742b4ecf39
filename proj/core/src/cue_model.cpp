#include "msph/cue_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msph {

namespace {

std::vector<cplx> receiver_vector(int p, double k_o, const Media& media, const Geometry& geometry,
                                  double f, const Vec3& sensor, FactorCache& cache) {
  const double a1 = geometry.a1;
  const Vec3 dir = sensor.normalized();
  std::vector<cplx> y;
  spherical_harmonics_table(p, std::acos(std::clamp(dir.z(), -1.0, 1.0)),
                            std::atan2(dir.y(), dir.x()), y);
  std::vector<cplx> h, dh;
  spherical_hankel_table(p - 1, k_o * a1, h, dh);

  std::vector<cplx> g(harmonic_count(p), cplx{});
  for (int s = -(p - 1); s <= p - 1; ++s) {
    const auto fac = cache.get(s, media, geometry, f, p);
    const int m = std::abs(s);
    const int n = fac->block;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(4 * n);
    for (int l = m; l < p; ++l) rhs(n + l - m) = h[l] * y[harmonic_index(l, s)];
    const Eigen::VectorXcd adj = fac->solve_transposed(rhs);
    for (int l = m; l < p; ++l) {
      const int i = l - m;
      g[harmonic_index(l, s)] = fac->pressure_source(i) * adj(i) + fac->velocity_source(i) * adj(n + i);
    }
  }
  return g;
}

}  // namespace

CueModel::CueModel(const SceneConfig& scene, FactorCache* cache)
    : scene_(scene), freqs_(scene.freqs.values()) {
  FactorCache local;
  FactorCache& use = cache ? *cache : local;
  left_ = scene.geometry.a1 * scene.sensors.left.unit();
  right_ = scene.geometry.a1 * scene.sensors.right.unit();
  bins_.reserve(freqs_.size());
  for (double f : freqs_) {
    Bin bin;
    bin.f = f;
    bin.k_o = scene.media.k_outer(f);
    bin.p = truncation_degree(scene.media, scene.geometry, f, scene.truncation_override);
    try {
      bin.g_left = receiver_vector(bin.p, bin.k_o, scene.media, scene.geometry, f, left_, use);
      bin.g_right = receiver_vector(bin.p, bin.k_o, scene.media, scene.geometry, f, right_, use);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "cue model at f = " << f << " Hz: " << e.what();
      throw SceneError(msg.str());
    }
    p_max_ = std::max(p_max_, bin.p);
    bins_.push_back(std::move(bin));
  }
}

CueModel::Pressure CueModel::sensor_pressure(const Bin& bin, const std::vector<cplx>& g,
                                             const Vec3& sensor, const Vec3& src,
                                             const Vec3& dsrc_dtheta, const Vec3& dsrc_dphi,
                                             const std::vector<cplx>& y,
                                             const std::vector<cplx>& dy,
                                             bool with_derivatives) const {
  // Incident coefficients of a wave from direction src: 4 pi (-i)^l conj(Y_l^s(src)).
  Pressure out{};
  cplx il{1.0, 0.0};
  for (int l = 0; l < bin.p; ++l) {
    const cplx c = 4.0 * kPi * il;
    for (int s = -l; s <= l; ++s) {
      const int idx = harmonic_index(l, s);
      const cplx gy = g[idx] * c;
      out.value += gy * std::conj(y[idx]);
      if (with_derivatives) {
        out.d_theta += gy * std::conj(dy[idx]);
        out.d_phi += gy * cplx{0.0, -static_cast<double>(s)} * std::conj(y[idx]);
      }
    }
    il *= cplx{0.0, -1.0};
  }

  // Free incident field e^{-i k src.M}.
  const cplx free = std::polar(1.0, -bin.k_o * src.dot(sensor));
  const cplx dfree_dtheta = free * cplx{0.0, -bin.k_o * dsrc_dtheta.dot(sensor)};
  const cplx dfree_dphi = free * cplx{0.0, -bin.k_o * dsrc_dphi.dot(sensor)};

  if (scene_.reference == HrtfReference::Center) {
    out.value += free;
    out.d_theta += dfree_dtheta;
    out.d_phi += dfree_dphi;
    return out;
  }
  // H = 1 + scattered / free
  const cplx scat = out.value;
  out.value = 1.0 + scat / free;
  if (with_derivatives) {
    out.d_theta = (out.d_theta * free - scat * dfree_dtheta) / (free * free);
    out.d_phi = (out.d_phi * free - scat * dfree_dphi) / (free * free);
  }
  return out;
}

CueEvaluation CueModel::evaluate(double theta, double phi, bool with_derivatives) const {
  std::vector<cplx> y, dy;
  spherical_harmonics_table(p_max_, theta, phi, y, with_derivatives ? &dy : nullptr);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const Vec3 src(st * cp, st * sp, ct);
  const Vec3 dsrc_dtheta(ct * cp, ct * sp, -st);
  const Vec3 dsrc_dphi(-st * sp, st * cp, 0.0);

  const std::size_t nb = bins_.size();
  CueEvaluation out;
  out.h_left.resize(nb);
  out.h_right.resize(nb);
  out.ild.resize(nb);
  if (with_derivatives) {
    out.dild_dtheta.resize(nb);
    out.dild_dphi.resize(nb);
    out.ditd_dtheta.resize(nb);
    out.ditd_dphi.resize(nb);
  }
  const double db = 20.0 / std::log(10.0);
  for (std::size_t i = 0; i < nb; ++i) {
    const Bin& bin = bins_[i];
    const Pressure pl = sensor_pressure(bin, bin.g_left, left_, src, dsrc_dtheta, dsrc_dphi, y, dy,
                                        with_derivatives);
    const Pressure pr = sensor_pressure(bin, bin.g_right, right_, src, dsrc_dtheta, dsrc_dphi, y,
                                        dy, with_derivatives);
    out.h_left[i] = pl.value;
    out.h_right[i] = pr.value;
    out.ild[i] = ild(pl.value, pr.value);
    if (with_derivatives) {
      // d ln H = H'/H: real part gives d ln|H|, imaginary part d arg H.
      const cplx lt_l = pl.d_theta / pl.value, lp_l = pl.d_phi / pl.value;
      const cplx lt_r = pr.d_theta / pr.value, lp_r = pr.d_phi / pr.value;
      out.dild_dtheta[i] = db * (lt_r.real() - lt_l.real());
      out.dild_dphi[i] = db * (lp_r.real() - lp_l.real());
      const double w = 2.0 * kPi * bin.f;
      out.ditd_dtheta[i] = (lt_r.imag() - lt_l.imag()) / w;
      out.ditd_dphi[i] = (lp_r.imag() - lp_l.imag()) / w;
    }
  }
  out.itd = itd(unwrapped_phase(out.h_left), unwrapped_phase(out.h_right), freqs_);
  return out;
}

std::pair<cplx, cplx> CueModel::hrtf_pair(std::size_t bin, double theta, double phi) const {
  const Bin& b = bins_.at(bin);
  std::vector<cplx> y;
  spherical_harmonics_table(b.p, theta, phi, y);
  const double st = std::sin(theta);
  const Vec3 src(st * std::cos(phi), st * std::sin(phi), std::cos(theta));
  const Vec3 zero = Vec3::Zero();
  const Pressure pl = sensor_pressure(b, b.g_left, left_, src, zero, zero, y, y, false);
  const Pressure pr = sensor_pressure(b, b.g_right, right_, src, zero, zero, y, y, false);
  return {pl.value, pr.value};
}

CueSpectrum CueModel::spectrum(double theta, double phi) const {
  CueEvaluation e = evaluate(theta, phi, false);
  CueSpectrum out;
  out.freqs = freqs_;
  out.h_left = std::move(e.h_left);
  out.h_right = std::move(e.h_right);
  out.ild = std::move(e.ild);
  out.itd = std::move(e.itd);
  return out;
}

}  // namespace msph
