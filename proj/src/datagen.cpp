#include "asgd/datagen.hpp"

#include <cmath>

#include "asgd/error.hpp"
#include "asgd/losses.hpp"
#include "asgd/rng.hpp"

namespace asgd {

const char* datagen_kind_name(DataGenSpec::Kind kind) {
  switch (kind) {
    case DataGenSpec::Kind::WellSpecifiedLogistic: return "well_specified_logistic";
    case DataGenSpec::Kind::MisspecifiedLogistic: return "misspecified_logistic";
    case DataGenSpec::Kind::RobustRegression: return "robust_regression";
    case DataGenSpec::Kind::TwoPointToy: return "two_point_toy";
  }
  return "?";
}

DataGenSpec::Kind datagen_kind_from_name(const std::string& name) {
  if (name == "well_specified_logistic")
    return DataGenSpec::Kind::WellSpecifiedLogistic;
  if (name == "misspecified_logistic")
    return DataGenSpec::Kind::MisspecifiedLogistic;
  if (name == "robust_regression") return DataGenSpec::Kind::RobustRegression;
  if (name == "two_point_toy") return DataGenSpec::Kind::TwoPointToy;
  throw ValidationError("unknown generator kind: " + name);
}

namespace {

double laplace_deviate(CounterRng& rng, double scale) {
  const double u = rng.next_double() - 0.5;
  return -scale * (u < 0.0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(u));
}

}  // namespace

Dataset generate_dataset(const DataGenSpec& spec) {
  if (spec.dimension < 1) throw ValidationError("dimension must be >= 1");
  if (!(spec.radius > 0.0)) throw ValidationError("radius must be > 0");

  Dataset data;
  data.dimension = spec.dimension;
  data.feature_bound = spec.radius;

  if (spec.kind == DataGenSpec::Kind::TwoPointToy) {
    VectorXd e1 = VectorXd::Zero(spec.dimension);
    e1[0] = spec.radius;
    data.records.push_back({e1, +1.0});
    data.records.push_back({e1, -1.0});
    return data;
  }

  if (spec.dataset_size < 1) throw ValidationError("dataset_size must be >= 1");
  if (!(spec.correlation_decay > 0.0) || spec.correlation_decay > 1.0)
    throw ValidationError("correlation_decay must lie in (0, 1]");

  const int d = spec.dimension;
  VectorXd theta_true = spec.theta_true;
  if (theta_true.size() == 0) theta_true = VectorXd::Zero(d);
  if (theta_true.size() != d)
    throw DimensionError("theta_true does not match the dimension");

  // Covariance profile, floored and scaled so E||x||^2 hits its target.
  VectorXd lambda(d);
  for (int k = 0; k < d; ++k)
    lambda[k] = std::max(std::pow(spec.correlation_decay, k),
                         spec.eigenvalue_floor);
  lambda *= spec.mean_sq_norm_fraction * spec.radius * spec.radius /
            lambda.sum();
  const VectorXd sigma = lambda.cwiseSqrt();

  CounterRng rng(spec.seed, /*stream=*/1);
  long attempts = 0;
  data.records.reserve(spec.dataset_size);
  for (long i = 0; i < spec.dataset_size; ++i) {
    VectorXd x(d);
    for (;;) {
      ++attempts;
      for (int k = 0; k < d; ++k) x[k] = sigma[k] * rng.next_gaussian();
      if (spec.unit_norm_features) {
        const double nrm = x.norm();
        if (nrm == 0.0) continue;
        x *= spec.radius / nrm;
        break;
      }
      const double nrm = x.norm();
      if (nrm <= spec.radius) break;
      if (spec.norm_mode == DataGenSpec::NormMode::Rescale) {
        x *= spec.radius / nrm;
        break;
      }
      if (attempts >= 100 * spec.dataset_size &&
          i < (attempts + 99) / 100) {
        throw ValidationError(
            "rejection sampling failure rate above 99%; the norm bound is "
            "infeasible for this covariance profile");
      }
    }

    double label = 0.0;
    const double margin = theta_true.dot(x);
    switch (spec.kind) {
      case DataGenSpec::Kind::WellSpecifiedLogistic:
        label = rng.next_double() < detail::sigmoid(margin) ? 1.0 : -1.0;
        break;
      case DataGenSpec::Kind::MisspecifiedLogistic:
        // Constant flip odds on each side of the separator: the log-odds
        // jump at the boundary, so no linear model is exact.
        label = rng.next_double() < (margin >= 0.0 ? 0.9 : 0.1) ? 1.0 : -1.0;
        break;
      case DataGenSpec::Kind::RobustRegression:
        label = margin + laplace_deviate(rng, spec.noise_scale);
        break;
      case DataGenSpec::Kind::TwoPointToy:
        break;
    }
    data.records.push_back({std::move(x), label});
  }
  return data;
}

}  // namespace asgd
