#include <doctest.h>

#include <cmath>

#include "msph/track.hpp"

using namespace msph;

namespace {

SceneConfig small_scene(const SensorPair& sensors = SensorPair::asymmetric()) {
  SceneConfig s;
  s.sensors = sensors;
  s.freqs = {200.0, 2000.0, 9};
  return s;
}

const CueModel& shared_model() {
  static const CueModel model(small_scene());
  return model;
}

TrackState at(double theta, double phi) {
  TrackState s;
  s.x << theta, phi, 0.0, 0.0;
  s.P = TrackerConfig::default_covariance();
  return s;
}

}  // namespace

TEST_SUITE("track") {

TEST_CASE("process matrices") {
  const auto pm = process_matrices(1.0, 0.03, 0.03);
  CHECK(pm.Q(0, 0) == doctest::Approx(2.25e-4).epsilon(1e-12));
  CHECK(pm.Q(0, 2) == doctest::Approx(4.5e-4).epsilon(1e-12));
  CHECK(pm.Q(2, 2) == doctest::Approx(9e-4).epsilon(1e-12));
  CHECK(pm.Q(1, 1) == doctest::Approx(2.25e-4).epsilon(1e-12));
  CHECK(pm.Q(0, 1) == 0.0);
  CHECK((pm.Q - pm.Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(process_matrices(1.0, 0.0, 0.0).Q.isZero(0.0));
  Vec4 x;
  x << 1.0, 2.0, 0.1, -0.2;
  const Vec4 y = pm.F * x;
  CHECK((y - Vec4(1.1, 1.8, 0.1, -0.2)).norm() < 1e-15);
  CHECK_THROWS_AS(process_matrices(0.0, 0.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(process_matrices(1.0, -0.1, 0.1), std::invalid_argument);
}

TEST_CASE("measurement model") {
  const CueModel& model = shared_model();
  MeasurementModel mm{model.freqs()};
  CHECK(mm.dimension() == 2 * model.bins());
  const Eigen::MatrixXd R = mm.R();
  CHECK(R(0, 0) == doctest::Approx(0.25));
  CHECK(R(mm.dimension() - 1, mm.dimension() - 1) == doctest::Approx(1e-10));
  CHECK(R(0, 1) == 0.0);

  TrackState s = at(1.3, 2.0);
  const Eigen::VectorXd z = measurement(s, model);
  const auto cues = model.evaluate(1.3, 2.0);
  const std::size_t k = model.bins();
  for (std::size_t i = 0; i < k; ++i) {
    CHECK(z(i) == cues.ild[i]);
    CHECK(z(k + i) == cues.itd[i]);
  }
  s.x(2) = 0.4;
  s.x(3) = -0.7;
  CHECK(measurement(s, model) == z);
  CHECK(measurement(1.3, 2.0, model) == z);
}

TEST_CASE("measurement Jacobian") {
  const CueModel& model = shared_model();
  const double h = 1e-6;
  for (const auto& [t, p] : {std::pair{0.7, 0.3}, std::pair{1.9, 3.3}, std::pair{2.4, 5.5}}) {
    const TrackState s = at(t, p);
    const Eigen::MatrixXd J = measurement_jacobian(s, model);
    CHECK(J.rows() == static_cast<Eigen::Index>(2 * model.bins()));
    CHECK(J.cols() == 4);
    CHECK(J.col(2).isZero(0.0));
    CHECK(J.col(3).isZero(0.0));
    const Eigen::Index k = model.bins();
    for (int c = 0; c < 2; ++c) {
      TrackState a = s, b = s;
      a.x(c) += h;
      b.x(c) -= h;
      const Eigen::VectorXd fd = (measurement(a, model) - measurement(b, model)) / (2.0 * h);
      for (Eigen::Index off : {Eigen::Index{0}, k}) {
        CHECK((J.col(c).segment(off, k) - fd.segment(off, k)).norm() <= 1e-4 * fd.segment(off, k).norm());
      }
    }
  }
}

TEST_CASE("median-plane ILD is flat in theta") {
  const CueModel model(small_scene(SensorPair::symmetric()));
  const Eigen::MatrixXd J = measurement_jacobian(at(1.0, kPi / 2.0), model);
  const Eigen::Index k = model.bins();
  CHECK(J.col(0).head(k).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(J.col(1).head(k).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("state normalization") {
  TrackState s;
  s.x << -0.2, 7.0, 0.1, 0.3;
  const TrackState n = normalize_state(s);
  CHECK(n.x(0) == doctest::Approx(0.2));
  CHECK(n.x(1) == doctest::Approx(7.0 + kPi - 2.0 * kPi));
  CHECK(n.x(2) == doctest::Approx(-0.1));
  CHECK(n.x(3) == doctest::Approx(0.3));
}

TEST_CASE("an uninformative measurement leaves the prior unchanged") {
  const CueModel& model = shared_model();
  MeasurementModel mm{model.freqs()};
  mm.sigma_ild *= 1e6;
  mm.sigma_itd *= 1e6;
  const auto pm = process_matrices(1.0, 0.03, 0.03);
  const TrackState s = at(1.5, 1.0);
  const auto step = ekf_step(s, measurement(1.6, 1.2, model), pm, mm, model);
  CHECK(step.diagnostics.K.norm() < 1e-6);
  const Vec4 predicted = pm.F * s.x;
  CHECK((step.state.x - predicted).norm() < 1e-6);
  CHECK((step.state.P - (pm.F * s.P * pm.F.transpose() + pm.Q)).norm() < 1e-8);
}

TEST_CASE("trajectory interpolation") {
  const auto traj = linear_trajectory({1.0, 2.0}, {2.0, 0.0}, 5);
  REQUIRE(traj.size() == 5);
  CHECK(traj.front().theta == 1.0);
  CHECK(traj.back().phi == doctest::Approx(0.0));
  CHECK(traj[2].theta == doctest::Approx(1.5));
  CHECK_THROWS_AS(linear_trajectory({1.0, 2.0}, {2.0, 0.0}, 0), std::invalid_argument);
}

TEST_CASE("static source, noiseless, started at the truth") {
  const CueModel& model = shared_model();
  TrackerConfig cfg;
  cfg.truth.assign(30, {1.9, 1.1});
  cfg.add_noise = false;
  cfg.init = at(1.9, 1.1);
  const auto rec = run_tracker(model, cfg);
  REQUIRE(rec.size() == 30);
  for (const auto& r : rec) CHECK(r.err_deg < 0.05);
}

TEST_CASE("covariance stays symmetric positive semidefinite and runs are reproducible") {
  const CueModel& model = shared_model();
  TrackerConfig cfg;
  cfg.truth = linear_trajectory({110.0 * kPi / 180.0, 50.0 * kPi / 180.0},
                                {140.0 * kPi / 180.0, 110.0 * kPi / 180.0}, 60);
  cfg.init = at(2.2, 2.6);
  cfg.seed = 5;
  const auto a = run_tracker(model, cfg);
  REQUIRE(a.size() == 60);
  for (const auto& r : a) {
    CHECK(r.asymmetry <= 1e-12 * r.p_trace);
    CHECK(r.min_eig >= -1e-12 * r.p_trace);
    CHECK(std::isfinite(r.nis));
  }
  const auto b = run_tracker(model, cfg);
  CHECK(track_csv(a) == track_csv(b));
  cfg.seed = 6;
  CHECK(track_csv(run_tracker(model, cfg)) != track_csv(a));
  CHECK(track_csv(a).rfind("t,theta_true,phi_true,theta_hat,phi_hat,err_deg,p_trace\n", 0) == 0);
}

TEST_CASE("innovations are consistent near the truth") {
  const CueModel& model = shared_model();
  TrackerConfig cfg;
  cfg.truth.assign(200, {1.9, 1.1});
  cfg.init = at(1.9, 1.1);
  cfg.sigma_acc = 1e-3;
  cfg.seed = 3;
  const auto rec = run_tracker(model, cfg);
  double mean = 0.0;
  for (const auto& r : rec) mean += r.nis;
  mean /= static_cast<double>(rec.size()) * 2.0 * model.bins();
  CHECK(mean > 0.8);
  CHECK(mean < 1.2);
}

}  // TEST_SUITE
