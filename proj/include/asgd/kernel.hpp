#pragma once

#include <cstdint>
#include <vector>

#include "asgd/losses.hpp"
#include "asgd/types.hpp"

namespace asgd {

struct KernelFunction {
  enum class Kind { Linear, Gaussian };

  Kind kind = Kind::Linear;
  double bandwidth = 1.0;  // Gaussian only

  double operator()(const VectorXd& a, const VectorXd& b) const;
};

// Dual representation of the iterate: theta_n = sum_i alpha_i x_i (for the
// margin losses), or sum_{i,c} alpha_{i,c} Phi(x_i, c) for multinomial.
// Once appended, a weight never changes.
struct DualState {
  std::vector<VectorXd> weights;   // one entry per consumed observation;
                                   // size 1, or num_classes for multinomial
  std::vector<VectorXd> support;   // the observations seen so far
  std::vector<long> support_indices;  // dataset row ids when file-backed

  long steps() const { return static_cast<long>(weights.size()); }
};

// Runs the recursion on dual weights. Requires theta_0 = 0 (otherwise the
// iterate is not a combination of observations).
class KernelSgd {
 public:
  KernelSgd(const LossModel& model, KernelFunction kernel,
            long max_cached_rows = 1 << 14);

  // Consumes one observation: computes u = sum_{i<n} alpha_i K(x_i, x_n)
  // and appends alpha_n = -gamma * phi'_n(u). Prior weights are untouched.
  void step(const Observation& obs, double gamma, long dataset_index = -1);

  double predict(const VectorXd& x) const;            // margin losses
  VectorXd predict_scores(const VectorXd& x) const;   // per-class, multinomial

  const DualState& state() const { return state_; }
  long long kernel_evaluations() const { return eval_count_; }

  // Reconstructs the primal iterate under the linear kernel.
  VectorXd reconstruct_primal() const;

 private:
  const LossModel* model_;
  KernelFunction kernel_;
  DualState state_;
  mutable long long eval_count_ = 0;
  long max_cached_rows_;
  std::vector<std::vector<double>> gram_rows_;  // row n: K(x_i, x_n), i < n

  double eval_kernel(const VectorXd& a, const VectorXd& b) const;
};

}  // namespace asgd
