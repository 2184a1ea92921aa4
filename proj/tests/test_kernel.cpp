#include "asgd/kernel.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "asgd/io.hpp"
#include "asgd/sgd.hpp"
#include "testutil.hpp"

using namespace asgd;

namespace {

// Dual run over an explicit observation sequence.
KernelSgd drive(const LossModel& model, const KernelFunction& kernel,
                const std::vector<Observation>& stream, double gamma) {
  KernelSgd engine(model, kernel);
  for (const Observation& obs : stream) engine.step(obs, gamma);
  return engine;
}

}  // namespace

TEST_CASE("first logistic step carries weight gamma*y/2") {
  const LossModel model(LossFamily::Logistic, 1.0, 2);
  Observation o;
  o.features = VectorXd::Constant(2, 0.5);
  o.label = 1.0;
  KernelSgd engine(model, {});
  engine.step(o, 0.1);
  // u = 0 on the first step, so alpha_1 = -gamma phi'(0) = gamma y sigmoid(0).
  CHECK(engine.state().weights[0][0] == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("Gaussian kernel sees u = alpha_1 on a repeated observation") {
  const LossModel model(LossFamily::Logistic, 1.0, 2);
  Observation o;
  o.features = VectorXd::Constant(2, 0.5);
  o.label = 1.0;
  KernelFunction kernel{KernelFunction::Kind::Gaussian, 1.0};
  KernelSgd engine(model, kernel);
  engine.step(o, 0.1);
  engine.step(o, 0.1);
  const double a1 = engine.state().weights[0][0];
  // K(x, x) = 1, so the second step saw u = a1 and its weight is
  // gamma * y * sigmoid(-y * a1).
  const double expect = 0.1 * detail::sigmoid(-a1);
  CHECK(engine.state().weights[1][0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("earlier weights are bit-identical after later steps") {
  const LossModel model(LossFamily::LogCosh, 1.0, 3);
  CounterRng rng(31, 0);
  KernelSgd engine(model, {KernelFunction::Kind::Gaussian, 0.7});
  std::vector<VectorXd> snapshots;
  for (int n = 0; n < 40; ++n) {
    const Observation o =
        testutil::random_observation(rng, LossFamily::LogCosh, 3, 1.0);
    engine.step(o, 0.05);
    snapshots.push_back(engine.state().weights.back());
    for (int i = 0; i <= n; ++i) {
      REQUIRE(engine.state().weights[i].size() == snapshots[i].size());
      CHECK((engine.state().weights[i] - snapshots[i]).cwiseAbs().maxCoeff() ==
            0.0);
    }
  }
}

TEST_CASE("linear-kernel dual run reproduces the primal trajectory") {
  for (LossFamily f : {LossFamily::Logistic, LossFamily::SqrtBinary,
                       LossFamily::LogCosh, LossFamily::Multinomial}) {
    const int d = 3;
    const LossModel model(f, 1.0, d, f == LossFamily::Multinomial ? 3 : 0);
    CounterRng rng(32 + static_cast<int>(f), 0);
    const long n = 200;

    std::vector<Observation> stream;
    for (long i = 0; i < n; ++i)
      stream.push_back(testutil::random_observation(rng, f, d, 1.0));
    const double gamma =
        1.0 / (2.0 * model.radius() * model.radius() * std::sqrt(double(n)));

    const KernelSgd engine = drive(model, {}, stream, gamma);

    // Primal oracle over the same sequence.
    VectorXd theta = VectorXd::Zero(model.param_dim());
    for (const Observation& obs : stream)
      theta -= gamma * model.gradient(obs, theta);

    CHECK((engine.reconstruct_primal() - theta).cwiseAbs().maxCoeff() <= 1e-10);

    // Predictions agree on fresh probe points.
    for (int probe = 0; probe < 5; ++probe) {
      const VectorXd x = testutil::random_features(rng, d, 1.0);
      if (f == LossFamily::Multinomial) {
        const VectorXd scores = engine.predict_scores(x);
        for (int c = 0; c < 3; ++c)
          CHECK(std::abs(scores[c] - theta.segment(c * d, d).dot(x)) <= 1e-10);
      } else {
        CHECK(std::abs(engine.predict(x) - theta.dot(x)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("predictions of an empty state are zero") {
  const LossModel model(LossFamily::Logistic, 1.0, 2);
  KernelSgd engine(model, {});
  CHECK(engine.predict(VectorXd::Constant(2, 0.3)) == 0.0);
}

TEST_CASE("single support point with weight 2 predicts 2 at itself") {
  const LossModel model(LossFamily::Logistic, 1.0, 2);
  DualState state;
  state.weights.push_back(VectorXd::Constant(1, 2.0));
  state.support.push_back(VectorXd::Constant(2, 0.4));
  state.support_indices.push_back(-1);

  const KernelFunction kernel{KernelFunction::Kind::Gaussian, 1.0};
  double out = 0.0;
  for (size_t i = 0; i < state.support.size(); ++i)
    out += state.weights[i][0] * kernel(state.support[i], state.support[0]);
  CHECK(out == 2.0);  // K(x, x) = 1
}

TEST_CASE("kernel evaluation count stays within the quadratic budget") {
  const LossModel model(LossFamily::Logistic, 1.0, 2);
  CounterRng rng(33, 0);
  KernelSgd engine(model, {KernelFunction::Kind::Gaussian, 1.0});
  const long n = 64;
  for (long i = 0; i < n; ++i)
    engine.step(
        testutil::random_observation(rng, LossFamily::Logistic, 2, 1.0), 0.05);
  CHECK(engine.kernel_evaluations() <= n * (n - 1) / 2 + n);
}

TEST_CASE("both kernels are PSD on finite samples") {
  CounterRng rng(34, 0);
  for (const KernelFunction kernel :
       {KernelFunction{KernelFunction::Kind::Linear, 0.0},
        KernelFunction{KernelFunction::Kind::Gaussian, 0.8}}) {
    const int m = 24;
    std::vector<VectorXd> xs;
    for (int i = 0; i < m; ++i) xs.push_back(testutil::random_features(rng, 4, 1.0));
    MatrixXd gram(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) gram(i, j) = kernel(xs[i], xs[j]);
    CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * gram.trace());
  }
}

TEST_CASE("dual state JSON round-trip (embedded features)") {
  const LossModel model(LossFamily::SqrtBinary, 1.0, 3);
  CounterRng rng(35, 0);
  KernelSgd engine(model, {});
  for (int i = 0; i < 10; ++i)
    engine.step(
        testutil::random_observation(rng, LossFamily::SqrtBinary, 3, 1.0),
        0.1);

  const json j = dual_state_to_json(engine.state(), {}, "");
  const DualState back = dual_state_from_json(j);
  REQUIRE(back.weights.size() == engine.state().weights.size());
  for (size_t i = 0; i < back.weights.size(); ++i) {
    CHECK((back.weights[i] - engine.state().weights[i]).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((back.support[i] - engine.state().support[i]).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("dual state JSON references a file-backed dataset by indices") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "asgd_kernel_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "toy.libsvm").string();

  CounterRng rng(36, 0);
  Dataset data =
      testutil::random_dataset(rng, LossFamily::Logistic, 2, 1.0, 8);
  write_libsvm(data, path);
  Dataset loaded = read_libsvm(path);

  const LossModel model(LossFamily::Logistic, 1.0, 2);
  KernelSgd engine(model, {});
  for (long i = 0; i < loaded.size(); ++i)
    engine.step(loaded.records[i], 0.1, i);

  const json j = dual_state_to_json(engine.state(), {}, path);
  REQUIRE(j.at("support").contains("indices"));
  const DualState back = dual_state_from_json(j);
  for (size_t i = 0; i < back.support.size(); ++i)
    CHECK((back.support[i] - engine.state().support[i]).cwiseAbs().maxCoeff() ==
          0.0);
  fs::remove_all(dir);
}
