#include <doctest.h>

#include <cmath>
#include <random>

#include "msph/field.hpp"
#include "msph/translation.hpp"
#include "oracles.hpp"

using namespace msph;

namespace {

// Regular expansion of e^{ikz}: 4 pi i^l Y_l^0(0) for s = 0.
Eigen::VectorXcd z_plane_wave(int p) {
  Eigen::VectorXcd e(p);
  for (int l = 0; l < p; ++l) {
    e(l) = 4.0 * kPi * std::pow(cplx(0.0, 1.0), l) * std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));
  }
  return e;
}

// Field of one source basis function about the origin vs its re-expansion about t z.
double field_match(const TranslationMatrix& T, bool singular_source, int s, int n, double k,
                   double t, const Vec3& local) {
  const int p = T.size() + std::abs(s);
  const Vec3 global = local + Vec3(0.0, 0.0, t);
  const auto src = singular_source ? singular_basis(n + 1, k, global) : regular_basis(n + 1, k, global);
  const auto reg = regular_basis(p, k, local);
  cplx sum{};
  for (int np = std::abs(s); np < p; ++np) sum += T.coefficient(np, n) * reg[harmonic_index(np, s)];
  const cplx want = src[harmonic_index(n, s)];
  return std::abs(sum - want) / std::abs(want);
}

}  // namespace

TEST_SUITE("translation") {

TEST_CASE("zero translation is the identity") {
  const auto T = coaxial_rr(0, 3.0, 0.0, 6);
  CHECK((T.entries - Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-14);
  const auto T2 = coaxial_rr(2, 3.0, 0.0, 9);
  CHECK(T2.size() == 7);
  CHECK((T2.entries - Eigen::MatrixXcd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("plane-wave shift multiplies coefficients by e^{ikt}") {
  const double k = 1.0, t = 0.5;
  const cplx phase = std::exp(cplx(0.0, k * t));
  {
    // Source truncation at p = 10 is felt from degree 3 on.
    const auto T = coaxial_rr(0, k, t, 10);
    const Eigen::VectorXcd e = z_plane_wave(10);
    const Eigen::VectorXcd shifted = T.entries * e;
    for (int l = 0; l < 3; ++l) CHECK(std::abs(shifted(l) - phase * e(l)) < 1e-8);
  }
  const int p = 24;
  const auto T = coaxial_rr(0, k, t, p);
  const Eigen::VectorXcd e = z_plane_wave(p);
  const Eigen::VectorXcd shifted = T.entries * e;
  for (int l = 0; l < 10; ++l) CHECK(std::abs(shifted(l) - phase * e(l)) < 1e-8 * std::abs(e(l)));
}

TEST_CASE("forward then backward translation is the identity on the interior block") {
  const int p = 12, s = 1;
  const auto fwd = coaxial_rr(s, 2.0, 0.3, p);
  const auto back = coaxial_rr(s, 2.0, -0.3, p);
  const int n = p - s - 3;
  const Eigen::MatrixXcd prod = (back.entries * fwd.entries).topLeftCorner(n, n);
  CHECK((prod - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("singular-to-regular reproduces h0 about a shifted center") {
  const double k = 1.0, t = 2.0;
  const auto T = coaxial_sr(0, k, t, 16);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Vec3 local = 0.5 * oracle::random_unit(rng);
    CHECK(field_match(T, true, 0, 0, k, t, local) < 1e-6);
  }
  // Degree-0 entry is the l = 0 projection of h0(k |r' + t z|): h0(k t) j0(0) * const.
  const cplx h0 = spherical_hankel_h1(0, k * t).value;
  CHECK(std::abs(T.coefficient(0, 0) - h0) < 1e-8 * std::abs(h0));
}

TEST_CASE("singular-to-regular reproduces S_2^2") {
  const double k = 1.0, t = 2.0;
  const auto T = coaxial_sr(2, k, t, 18);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const Vec3 local = 0.6 * oracle::random_unit(rng);
    CHECK(field_match(T, true, 2, 2, k, t, local) < 1e-6);
  }
}

TEST_CASE("addition theorem over random cases") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uk(1.0, 30.0), ut(0.1, 1.0), u01(0.0, 1.0);
  std::uniform_int_distribution<int> us(-3, 3);
  double worst_rr = 0.0, worst_sr = 0.0;
  for (int c = 0; c < 10; ++c) {
    const double k = uk(rng);
    const double t = (u01(rng) < 0.5 ? -1.0 : 1.0) * ut(rng);
    const int s = us(rng), m = std::abs(s);
    // Source degree m..m+3; extra headroom for the regular side of the sum.
    const int p = static_cast<int>(std::ceil(3.0 * k * std::abs(t))) + 6 + m + 40;
    const auto rr = coaxial_rr(s, k, t, p);
    const auto sr = coaxial_sr(s, k, t, p);
    for (int q = 0; q < 5; ++q) {
      const Vec3 local = (0.6 * u01(rng) * std::abs(t)) * oracle::random_unit(rng);
      for (int n = m; n < m + 4; ++n) {
        worst_sr = std::max(worst_sr, field_match(sr, true, s, n, k, t, local));
        // RR error relative to the largest source value at this point.
        const Vec3 global = local + Vec3(0.0, 0.0, t);
        const auto src = regular_basis(m + 4, k, global);
        double scale = 0.0;
        for (int nn = m; nn < m + 4; ++nn) scale = std::max(scale, std::abs(src[harmonic_index(nn, s)]));
        worst_rr = std::max(worst_rr, field_match(rr, false, s, n, k, t, local) *
                                          std::abs(src[harmonic_index(n, s)]) / scale);
      }
    }
  }
  CHECK(worst_rr < 1e-5);
  CHECK(worst_sr < 1e-5);
}

TEST_CASE("entries do not depend on the build size") {
  const auto a = coaxial_sr(1, 7.0, 0.15, 10);
  const auto b = coaxial_sr(1, 7.0, 0.15, 20);
  CHECK((a.entries - b.entries.topLeftCorner(9, 9)).cwiseAbs().maxCoeff() <
        1e-10 * a.entries.cwiseAbs().maxCoeff());
}

TEST_CASE("singular-to-singular equals regular-to-regular coefficients") {
  const auto rr = coaxial_rr(-2, 4.0, -0.2, 10);
  const auto ss = coaxial_ss(-2, 4.0, -0.2, 10);
  CHECK(ss.kind == TranslationKind::SingularToSingular);
  CHECK((rr.entries - ss.entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(coaxial_sr(0, 1.0, 0.0, 6), DomainError);
  CHECK_THROWS_AS(coaxial_rr(0, 0.0, 0.1, 6), DomainError);
  CHECK_THROWS_AS(coaxial_rr(3, 1.0, 0.1, 3), DomainError);
}

}  // TEST_SUITE
