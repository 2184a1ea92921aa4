#include "asgd/losses.hpp"

#include <cmath>

#include "doctest.h"
#include "testutil.hpp"

using namespace asgd;
using testutil::rel_err;

namespace {

const double kLog2 = 0.6931471805599453;

LossModel make(LossFamily f, double bound = 1.0, int d = 1, int k = 0) {
  return LossModel(f, bound, d, k);
}

Observation obs1(double x, double y) {
  Observation o;
  o.features = VectorXd::Constant(1, x);
  o.label = y;
  return o;
}

}  // namespace

TEST_CASE("logistic value at theta = 0 is log 2") {
  const LossModel m = make(LossFamily::Logistic, 2.0, 3);
  CounterRng rng(11, 0);
  for (int i = 0; i < 20; ++i) {
    const Observation o =
        testutil::random_observation(rng, LossFamily::Logistic, 3, 2.0);
    CHECK(m.value(o, VectorXd::Zero(3)) == doctest::Approx(kLog2).epsilon(1e-14));
  }
}

TEST_CASE("log-cosh value vanishes at zero residual") {
  const LossModel m = make(LossFamily::LogCosh, 1.0, 2);
  Observation o;
  o.features = VectorXd::Zero(2);
  o.features << 0.6, -0.8;
  VectorXd theta(2);
  theta << 1.0, 0.5;
  o.label = o.features.dot(theta);  // residual y - <x,theta> = 0
  CHECK(std::abs(m.value(o, theta)) <= 1e-15);
}

TEST_CASE("logistic value matches extended-precision softplus at margin 50") {
  const LossModel m = make(LossFamily::Logistic, 1.0, 1);
  const Observation o = obs1(1.0, 1.0);
  const VectorXd theta = VectorXd::Constant(1, 50.0);  // y<x,theta> = 50
  const long double oracle = log1pl(expl(-50.0L));
  CHECK(rel_err(m.value(o, theta), static_cast<double>(oracle)) <= 1e-12);
}

TEST_CASE("value stays finite at extreme margins") {
  const LossModel m = make(LossFamily::Logistic, 1.0, 1);
  const Observation o = obs1(1.0, -1.0);
  for (double t : {-700.0, -100.0, 100.0, 700.0}) {
    const double v = m.value(o, VectorXd::Constant(1, t));
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("logistic gradient at theta = 0 is -(y/2) x") {
  const LossModel m = make(LossFamily::Logistic, 2.0, 4);
  CounterRng rng(12, 0);
  for (int i = 0; i < 10; ++i) {
    const Observation o =
        testutil::random_observation(rng, LossFamily::Logistic, 4, 2.0);
    const VectorXd g = m.gradient(o, VectorXd::Zero(4));
    CHECK(rel_err(g, VectorXd(-0.5 * o.label * o.features)) <= 1e-14);
  }
}

TEST_CASE("log-cosh gradient at theta = 0, y = 0 vanishes") {
  const LossModel m = make(LossFamily::LogCosh, 1.0, 3);
  Observation o;
  o.features = VectorXd::Constant(3, 0.5);
  o.label = 0.0;
  CHECK(m.gradient(o, VectorXd::Zero(3)).norm() == 0.0);
}

TEST_CASE("gradients match central finite differences of the value") {
  for (LossFamily f : {LossFamily::Logistic, LossFamily::SqrtBinary,
                       LossFamily::LogCosh, LossFamily::Multinomial}) {
    const int d = 5;
    const LossModel m = make(f, 2.0, d, f == LossFamily::Multinomial ? 3 : 0);
    CounterRng rng(13 + static_cast<int>(f), 0);
    for (int i = 0; i < 100; ++i) {
      const Observation o = testutil::random_observation(rng, f, d, 2.0);
      const VectorXd theta = testutil::random_vector(rng, m.param_dim(), 0.4);
      const VectorXd g = m.gradient(o, theta);
      const VectorXd fd = testutil::fd_gradient(m, o, theta, 1e-6);
      CHECK(rel_err(g, fd) <= 1e-6);
    }
  }
}

TEST_CASE("logistic hvp at theta = 0 along x is (|x|^2/4) x") {
  const LossModel m = make(LossFamily::Logistic, 2.0, 3);
  CounterRng rng(14, 0);
  const Observation o =
      testutil::random_observation(rng, LossFamily::Logistic, 3, 2.0);
  const VectorXd hv = m.hessian_vp(o, VectorXd::Zero(3), o.features);
  CHECK(rel_err(hv, VectorXd(0.25 * o.features.squaredNorm() * o.features)) <=
        1e-14);
}

TEST_CASE("hvp of the zero direction is zero for every family") {
  for (LossFamily f : {LossFamily::Logistic, LossFamily::SqrtBinary,
                       LossFamily::LogCosh, LossFamily::Multinomial}) {
    const int d = 4;
    const LossModel m = make(f, 1.5, d, f == LossFamily::Multinomial ? 3 : 0);
    CounterRng rng(15, 0);
    const Observation o = testutil::random_observation(rng, f, d, 1.5);
    const VectorXd theta = testutil::random_vector(rng, m.param_dim(), 0.3);
    CHECK(m.hessian_vp(o, theta, VectorXd::Zero(m.param_dim())).norm() == 0.0);
  }
}

TEST_CASE("hvp matches finite differences of the gradient") {
  for (LossFamily f : {LossFamily::Logistic, LossFamily::SqrtBinary,
                       LossFamily::LogCosh, LossFamily::Multinomial}) {
    const int d = 5;
    const LossModel m = make(f, 2.0, d, f == LossFamily::Multinomial ? 3 : 0);
    CounterRng rng(16 + static_cast<int>(f), 0);
    for (int i = 0; i < 100; ++i) {
      const Observation o = testutil::random_observation(rng, f, d, 2.0);
      const VectorXd theta = testutil::random_vector(rng, m.param_dim(), 0.4);
      const VectorXd v = testutil::random_vector(rng, m.param_dim(), 1.0);
      const VectorXd hv = m.hessian_vp(o, theta, v);
      const VectorXd fd = testutil::fd_hvp(m, o, theta, v, 1e-5);
      CHECK(rel_err(hv, fd) <= 1e-5);
    }
  }
}

TEST_CASE("hvp is a PSD action for every family") {
  for (LossFamily f : {LossFamily::Logistic, LossFamily::SqrtBinary,
                       LossFamily::LogCosh, LossFamily::Multinomial}) {
    const int d = 4;
    const LossModel m = make(f, 1.0, d, f == LossFamily::Multinomial ? 3 : 0);
    CounterRng rng(17 + static_cast<int>(f), 0);
    for (int i = 0; i < 200; ++i) {
      const Observation o = testutil::random_observation(rng, f, d, 1.0);
      const VectorXd theta = testutil::random_vector(rng, m.param_dim(), 1.0);
      const VectorXd v = testutil::random_vector(rng, m.param_dim(), 1.0);
      CHECK(v.dot(m.hessian_vp(o, theta, v)) >= -1e-14);
    }
  }
}

TEST_CASE("per-sample gradient norm never exceeds the model radius") {
  for (LossFamily f : {LossFamily::Logistic, LossFamily::SqrtBinary,
                       LossFamily::LogCosh, LossFamily::Multinomial}) {
    const int d = 6;
    const double bound = 1.7;
    const LossModel m = make(f, bound, d, f == LossFamily::Multinomial ? 4 : 0);
    CounterRng rng(18 + static_cast<int>(f), 0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Observation o = testutil::random_observation(rng, f, d, bound, 4);
      const VectorXd theta = testutil::random_vector(rng, m.param_dim(),
                                                     5.0 * rng.next_double());
      worst = std::max(worst, m.gradient(o, theta).norm());
    }
    CHECK(worst <= m.radius() * (1.0 + 1e-12));
  }
}

TEST_CASE("logistic radius equals the certified feature bound") {
  CHECK(make(LossFamily::Logistic, 3.0, 2).radius() == 3.0);
  CHECK(make(LossFamily::LogCosh, 3.0, 2).radius() == 6.0);
  CHECK(make(LossFamily::SqrtBinary, 3.0, 2).radius() == 6.0);
}

TEST_CASE("observation validation") {
  const LossModel m = make(LossFamily::Logistic, 1.0, 2);
  Observation o;
  o.features = VectorXd::Constant(2, 0.9);  // norm ~1.27 > 1
  o.label = 1.0;
  CHECK_THROWS_AS(m.validate_observation(o), ValidationError);
  o.features = VectorXd::Constant(2, 0.5);
  o.label = 0.5;  // not in {-1, +1}
  CHECK_THROWS_AS(m.validate_observation(o), ValidationError);
  o.label = -1.0;
  CHECK_NOTHROW(m.validate_observation(o));

  const LossModel mm = make(LossFamily::Multinomial, 1.0, 2, 3);
  o.label = 3.0;  // class index out of range
  CHECK_THROWS_AS(mm.validate_observation(o), ValidationError);
  o.label = 2.0;
  CHECK_NOTHROW(mm.validate_observation(o));
}

TEST_CASE("structured errors on bad inputs") {
  const LossModel m = make(LossFamily::Logistic, 1.0, 3);
  const Observation o = obs1(1.0, 1.0);  // dimension 1 vs model 3
  CHECK_THROWS_AS(m.value(o, VectorXd::Zero(3)), DimensionError);

  Observation o3;
  o3.features = VectorXd::Constant(3, 0.5);
  o3.label = 1.0;
  CHECK_THROWS_AS(m.value(o3, VectorXd::Zero(2)), DimensionError);
  VectorXd bad = VectorXd::Zero(3);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(m.value(o3, bad), NumericError);
  CHECK_THROWS_AS(m.gradient(o3, bad), NumericError);
}

TEST_CASE("multinomial value at zero is log K and matches the block embedding") {
  const int d = 3, k = 4;
  const LossModel m = make(LossFamily::Multinomial, 1.0, d, k);
  CounterRng rng(19, 0);
  const Observation o =
      testutil::random_observation(rng, LossFamily::Multinomial, d, 1.0, k);
  CHECK(m.value(o, VectorXd::Zero(m.param_dim())) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));

  // Gradient at 0: uniform probabilities minus the one-hot class block.
  const VectorXd g = m.gradient(o, VectorXd::Zero(m.param_dim()));
  for (int c = 0; c < k; ++c) {
    const double w = 0.25 - (c == static_cast<int>(o.label) ? 1.0 : 0.0);
    CHECK(rel_err(VectorXd(g.segment(c * d, d)), VectorXd(w * o.features)) <=
          1e-14);
  }
}

TEST_CASE("segment check: logistic single observation on [0, 1]") {
  const LossModel m = make(LossFamily::Logistic, 1.0, 1);
  Dataset data;
  data.dimension = 1;
  data.feature_bound = 1.0;
  data.records.push_back(obs1(1.0, 1.0));

  const VectorXd t1 = VectorXd::Zero(1);
  const VectorXd t2 = VectorXd::Constant(1, 1.0);
  const SegmentCheckResult res = check_self_concordance(m, data, t1, t2, 11);
  CHECK(res.max_ratio <= 1.0 + 1e-3);
  CHECK(res.num_probes == 11);
  CHECK(res.used_probes > 0);

  // Analytic oracle: the ratio along this segment is |1 - 2 sigmoid(t)|.
  double analytic = 0.0;
  for (int j = 0; j < 11; ++j) {
    const double t = j / 10.0;
    analytic = std::max(analytic, std::abs(1.0 - 2.0 * detail::sigmoid(-t)));
  }
  CHECK(std::abs(res.max_ratio - analytic) <= 1e-3);
}

TEST_CASE("segment check: every family stays below ratio 1") {
  CounterRng rng(20, 0);
  for (LossFamily f : {LossFamily::Logistic, LossFamily::SqrtBinary,
                       LossFamily::LogCosh, LossFamily::Multinomial}) {
    const int d = 4;
    const LossModel m = make(f, 1.0, d, f == LossFamily::Multinomial ? 3 : 0);
    Dataset data = testutil::random_dataset(rng, f, d, 1.0, 24);
    for (int trial = 0; trial < 25; ++trial) {
      const VectorXd t1 = testutil::random_vector(rng, m.param_dim(), 0.5);
      VectorXd dir = testutil::random_vector(rng, m.param_dim(), 1.0);
      dir *= (0.5 + 9.5 * rng.next_double()) / (m.radius() * dir.norm());
      const SegmentCheckResult res =
          check_self_concordance(m, data, t1, t1 + dir, 15);
      CHECK(res.max_ratio <= 1.0 + 1e-3);
    }
  }
}

TEST_CASE("segment check: quadratic negative control has ratio ~ 0") {
  // phi(t) = 2t^2 - 3t + 1 stands in for a pure quadratic loss section.
  const auto quad = [](long double t) { return 2.0L * t * t - 3.0L * t + 1.0L; };
  const SegmentCheckResult res = segment_ratio_check(quad, 1.0, 3.0, 11, -1.0);
  CHECK(res.used_probes == 11);
  CHECK(res.max_ratio <= 1e-3);
}

TEST_CASE("segment check: saturated segment degenerates") {
  const LossModel m = make(LossFamily::Logistic, 1.0, 1);
  Dataset data;
  data.dimension = 1;
  data.feature_bound = 1.0;
  data.records.push_back(obs1(1.0, 1.0));
  const VectorXd t1 = VectorXd::Constant(1, 40.0);
  const VectorXd t2 = VectorXd::Constant(1, 50.0);
  CHECK_THROWS_AS(check_self_concordance(m, data, t1, t2, 9),
                  DegenerateSegmentError);
}

TEST_CASE("segment check argument validation") {
  const LossModel m = make(LossFamily::Logistic, 1.0, 1);
  Dataset data;
  data.dimension = 1;
  data.feature_bound = 1.0;
  data.records.push_back(obs1(1.0, 1.0));
  const VectorXd t1 = VectorXd::Zero(1);
  CHECK_THROWS_AS(check_self_concordance(m, data, t1, t1, 11),
                  ValidationError);
  CHECK_THROWS_AS(
      check_self_concordance(m, data, t1, VectorXd::Constant(1, 1.0), 2),
      ValidationError);
}
