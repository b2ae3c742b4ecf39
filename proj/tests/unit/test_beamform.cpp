#include <doctest.h>

#include <cmath>
#include <random>

#include "msph/beamform.hpp"
#include "msph/specfun.hpp"

using namespace msph;

TEST_SUITE("beamform") {

TEST_CASE("matched weights") {
  const Vec2c a = matched_weights({1000.0, Vec2c(1.0, 1.0)});
  CHECK(std::abs(a(0) - 0.5) < 1e-15);
  CHECK(std::abs(a(1) - 0.5) < 1e-15);
  const Vec2c b = matched_weights({1000.0, Vec2c(2.0, 0.0)});
  CHECK(std::abs(b(0) - 0.5) < 1e-15);
  CHECK(std::abs(b(1)) == 0.0);
  CHECK_THROWS_AS(matched_weights({1000.0, Vec2c::Zero()}), DegenerateSteeringError);
  CHECK(wng(a) == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-14));
}

TEST_CASE("distortionless response and the WNG identity") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i) {
    const Vec2c h(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
    const Vec2c w = matched_weights({500.0, h});
    CHECK(std::abs(std::abs(w.dot(h)) - 1.0) < 1e-14);
    CHECK(std::abs(wng(w) - 10.0 * std::log10(h.squaredNorm())) < 1e-12);
  }
}

TEST_CASE("identical steering everywhere gives unit directivity") {
  const auto grid = make_grid(162);
  const Vec2c h(cplx(0.3, -0.2), cplx(1.1, 0.4));
  const std::vector<Vec2c> steering(grid.size(), h);
  const Vec2c w = matched_weights({1000.0, h});
  const auto d = directivity(w, h, steering, grid);
  CHECK(d.df == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(d.di_db) < 1e-11);
  // Scaling all steering vectors leaves the directivity unchanged.
  std::vector<Vec2c> scaled(steering);
  for (auto& s : scaled) s *= cplx(3.0, -1.0);
  CHECK(directivity(w, h * cplx(3.0, -1.0), scaled, grid).df == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("icosphere grids") {
  for (int n : {12, 42, 162, 642}) {
    const auto grid = make_grid(n);
    REQUIRE(grid.size() == static_cast<std::size_t>(n));
    CHECK(grid.warning.empty());
    double sum = 0.0;
    for (double w : grid.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 4.0 * kPi) < 1e-10);
    cplx y10{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(grid.points[i].norm() == doctest::Approx(1.0).epsilon(1e-14));
      y10 += grid.weights[i] * spherical_harmonic({1, 0}, grid.directions[i].theta, grid.directions[i].phi);
    }
    CHECK(std::abs(y10) < 1e-12);
  }
  const auto snapped = make_grid(160);
  CHECK(snapped.size() == 162);
  CHECK(!snapped.warning.empty());
  CHECK_THROWS_AS(make_grid(5), std::invalid_argument);
}

TEST_CASE("band metrics") {
  SceneConfig scene;
  scene.freqs = {1500.0, 3500.0, 5};
  const CueModel model(scene);
  const auto rows = beamform_band(model, make_grid(162), {2.1293, 1.0996});
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(std::abs(r.distortionless - 1.0) < 1e-14);
    CHECK(r.di_db == doctest::Approx(10.0 * std::log10(r.df)).epsilon(1e-12));
    CHECK(std::isfinite(r.wng_db));
  }
  const std::string csv = beamform_csv(rows);
  CHECK(csv.rfind("f_hz,wng_db,df,di_db\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

}  // TEST_SUITE
