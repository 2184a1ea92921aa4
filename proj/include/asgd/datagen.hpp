#pragma once

#include <cstdint>
#include <string>

#include "asgd/types.hpp"

namespace asgd {

// Synthetic problem generator. Feature vectors are drawn as Gaussians
// shaped by the covariance profile lambda_k proportional to decay^k
// (floored at eigenvalue_floor * lambda_0 so the weakest directions stay
// numerically identifiable), then forced under the norm bound R either by
// rescaling or by rejection.
struct DataGenSpec {
  enum class Kind {
    WellSpecifiedLogistic,   // P(y=1|x) = sigmoid(<theta_true, x>)
    MisspecifiedLogistic,    // constant-odds label noise around a separator
    RobustRegression,        // y = <theta_true, x> + Laplace noise
    TwoPointToy              // {(e_1, +1), (e_1, -1)}
  };
  enum class NormMode { Rescale, Reject };

  Kind kind = Kind::WellSpecifiedLogistic;
  int dimension = 1;
  double radius = 1.0;
  VectorXd theta_true;  // empty means zero
  double correlation_decay = 1.0;
  long dataset_size = 0;
  uint64_t seed = 0;

  double eigenvalue_floor = 1e-8;
  bool unit_norm_features = false;   // project every x onto the sphere ||x||=R
  double mean_sq_norm_fraction = 0.5;  // E||x||^2 target, as a fraction of R^2
  NormMode norm_mode = NormMode::Rescale;
  double noise_scale = 0.5;          // robust regression only
};

const char* datagen_kind_name(DataGenSpec::Kind kind);
DataGenSpec::Kind datagen_kind_from_name(const std::string& name);

Dataset generate_dataset(const DataGenSpec& spec);

}  // namespace asgd
