#include <doctest.h>

#include <cmath>
#include <random>

#include "msph/specfun.hpp"
#include "oracles.hpp"

using namespace msph;

TEST_SUITE("specfun") {

TEST_CASE("j_l closed forms and small argument") {
  CHECK(spherical_bessel_j(0, 1.0).value.real() == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(std::abs(spherical_bessel_j(1, 1e-12).value) < 1e-12);
  CHECK(spherical_bessel_j(0, 0.0).value.real() == 1.0);
  CHECK(spherical_bessel_j(3, 0.0).value.real() == 0.0);
  CHECK_THROWS_AS(spherical_bessel_j(0, -1.0), DomainError);
  CHECK_THROWS_AS(spherical_bessel_j(kMaxDegree + 1, 1.0), DomainError);
}

TEST_CASE("j_l matches the power series") {
  for (int l : {0, 1, 5, 10, 20}) {
    for (double x : {1e-3, 0.05, 0.7, 2.0, 6.0}) {
      const long double want = oracle::bessel_j_series(l, x);
      const double got = spherical_bessel_j(l, x).value.real();
      CAPTURE(l);
      CAPTURE(x);
      CHECK(std::abs(got - static_cast<double>(want)) <= 1e-12 * std::abs(static_cast<double>(want)));
    }
  }
}

TEST_CASE("h_l closed forms") {
  const cplx h = spherical_hankel_h1(0, 1.0).value;
  CHECK(h.real() == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(h.imag() == doctest::Approx(-std::cos(1.0)).epsilon(1e-15));
  const cplx hp = spherical_hankel_h1(0, kPi).value;
  CHECK(std::abs(hp.real()) < 1e-15);
  CHECK(std::abs(hp.imag()) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
  CHECK_THROWS_AS(spherical_hankel_h1(0, 0.0), DomainError);
}

TEST_CASE("Wronskian j y' - j' y = 1/x^2") {
  const int lmax = 60;
  double worst = 0.0;
  for (double x : {0.05, 0.1, 0.5, 1.5, 3.0, 10.0, 25.0, 50.0}) {
    std::vector<double> j, dj, y, dy;
    spherical_bessel_j_table(lmax, x, j, dj);
    spherical_bessel_y_table(lmax, x, y, dy);
    for (int l = 0; l <= lmax; ++l) {
      const double w = j[l] * dy[l] - dj[l] * y[l];
      if (!std::isfinite(w)) continue;  // y_l overflows for l >> x
      worst = std::max(worst, std::abs(w * x * x - 1.0));
    }
  }
  CHECK(worst < 1e-9);
  const auto j3 = spherical_bessel_j(3, 1.5);
  const auto h3 = spherical_hankel_h1(3, 1.5);
  const double w = j3.value.real() * h3.derivative.imag() - j3.derivative.real() * h3.value.imag();
  CHECK(std::abs(w * 1.5 * 1.5 - 1.0) < 1e-10);
}

TEST_CASE("radial derivatives agree with central differences") {
  const double h = 1e-5;
  for (int l : {0, 1, 4, 9}) {
    for (double x : {0.3, 1.7, 8.0}) {
      const cplx fd_j = (spherical_bessel_j(l, x + h).value - spherical_bessel_j(l, x - h).value) / (2 * h);
      const cplx fd_h =
          (spherical_hankel_h1(l, x + h).value - spherical_hankel_h1(l, x - h).value) / (2 * h);
      CHECK(std::abs(fd_j - spherical_bessel_j(l, x).derivative) <= 1e-7 * std::max(1.0, std::abs(fd_j)));
      CHECK(std::abs(fd_h - spherical_hankel_h1(l, x).derivative) <= 1e-7 * std::abs(fd_h));
    }
  }
}

TEST_CASE("associated Legendre against Rodrigues") {
  CHECK(legendre_p(1, 0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(legendre_p(2, 0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (int l = 0; l <= 10; ++l) {
    for (int m = 0; m <= l; ++m) {
      for (double x : {-0.9, -0.3, 0.0, 0.3, 0.77}) {
        const double want = static_cast<double>(oracle::legendre_rodrigues(l, m, x));
        CAPTURE(l);
        CAPTURE(m);
        CHECK(std::abs(legendre_p(l, m, x) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
      }
    }
  }
  CHECK_THROWS_AS(legendre_p(2, 3, 0.1), DomainError);
  CHECK_THROWS_AS(legendre_p(2, 1, 1.5), DomainError);
}

TEST_CASE("spherical harmonic values") {
  CHECK(std::abs(spherical_harmonic({0, 0}, 0.4, 2.0) - 1.0 / std::sqrt(4 * kPi)) < 1e-15);
  CHECK(spherical_harmonic({1, 0}, 0.0, 0.0).real() == doctest::Approx(std::sqrt(3 / (4 * kPi))));
  CHECK(std::abs(spherical_harmonic({1, 1}, kPi / 2, 0.0)) ==
        doctest::Approx(std::sqrt(3 / (8 * kPi))).epsilon(1e-14));
  CHECK_THROWS_AS(spherical_harmonic({1, 2}, 0.1, 0.1), DomainError);
}

TEST_CASE("conjugation has no (-1)^s factor") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.0, kPi), up(0.0, 2 * kPi);
  for (int i = 0; i < 20; ++i) {
    const double t = ut(rng), p = up(rng);
    for (int l = 0; l <= 6; ++l)
      for (int s = -l; s <= l; ++s)
        CHECK(std::abs(std::conj(spherical_harmonic({l, s}, t, p)) - spherical_harmonic({l, -s}, t, p)) < 1e-14);
  }
}

TEST_CASE("harmonics are orthonormal under Gauss-Legendre x uniform quadrature") {
  const int L = 10, nt = 24, np = 48;
  std::vector<double> xs, ws;
  oracle::gauss_legendre(nt, xs, ws);
  const int n = harmonic_count(L + 1);
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n, n);
  std::vector<cplx> y;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < np; ++j) {
      spherical_harmonics_table(L + 1, std::acos(xs[i]), 2 * kPi * j / np, y);
      const Eigen::Map<Eigen::VectorXcd> v(y.data(), n);
      gram += (ws[i] * 2 * kPi / np) * v * v.adjoint();
    }
  }
  CHECK((gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("harmonic table agrees with pointwise evaluation and its theta derivative") {
  std::vector<cplx> y, dy;
  const double t = 1.1, p = 0.4, h = 1e-6;
  spherical_harmonics_table(8, t, p, y, &dy);
  std::vector<cplx> yp, ym;
  spherical_harmonics_table(8, t + h, p, yp);
  spherical_harmonics_table(8, t - h, p, ym);
  for (int l = 0; l < 8; ++l) {
    for (int s = -l; s <= l; ++s) {
      const int i = harmonic_index(l, s);
      CHECK(std::abs(y[i] - spherical_harmonic({l, s}, t, p)) < 1e-14);
      CHECK(std::abs(dy[i] - (yp[i] - ym[i]) / (2 * h)) < 1e-7);
    }
  }
}

}  // TEST_SUITE
