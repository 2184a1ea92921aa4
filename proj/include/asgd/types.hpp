#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace asgd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// One labeled data point. For binary classification the label is exactly
// -1 or +1; for robust regression it is an arbitrary real; for multinomial
// it is a class index stored as a real.
struct Observation {
  VectorXd features;
  double label = 0.0;
};

// A finite sample with a certified feature-norm bound: every record
// satisfies ||features|| <= feature_bound.
struct Dataset {
  std::vector<Observation> records;
  int dimension = 0;
  double feature_bound = 0.0;
  int num_classes = 0;       // > 0 only for multinomial data
  std::string source_path;   // set when file-backed

  long size() const { return static_cast<long>(records.size()); }
};

}  // namespace asgd
