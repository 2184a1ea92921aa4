#pragma once

#include <cstdint>
#include <vector>

#include "asgd/losses.hpp"
#include "asgd/types.hpp"

namespace asgd {

struct OptimumCertificate;  // oracle.hpp

// Step-size schedules, all scaled by 1/(2 R^2):
//   ConstantHorizon:  gamma_n = 1/(2 R^2 sqrt(N)) for n in 1..N
//   Decaying:         gamma_n = 1/(2 R^2 sqrt(n))
//   Doubling:         gamma_n = 1/(2 R^2 sqrt(2^{p+1})) for n in (2^p, 2^{p+1}]
// The doubling block constant is ambiguous up to one dyadic level; the
// lower variant 1/(2 R^2 sqrt(2^p)) is available behind a flag.
struct StepSchedule {
  enum class Kind { ConstantHorizon, Decaying, Doubling };

  Kind kind = Kind::ConstantHorizon;
  long horizon = 0;  // required for ConstantHorizon
  double radius = 1.0;
  bool doubling_lower_variant = false;

  double step_size(long n) const;
};

enum class SampleMode {
  IidFromDataset,  // i.i.d. index draws with replacement (seeded)
  Sequential       // one pass in file order; exhausts after data.size()
};

struct RunConfig {
  StepSchedule schedule;
  VectorXd theta0;
  uint64_t seed = 0;
  long horizon = 0;
  long record_stride = 0;  // 0 = record only the final state
  SampleMode sample_mode = SampleMode::IidFromDataset;

  // Opt-in per-step trace of the martingale increment M_n and the
  // potential A_n. Costs one full-dataset gradient per step and requires
  // a certificate and a constant step size.
  bool trace_martingale = false;
  const OptimumCertificate* certificate = nullptr;
};

struct Trajectory {
  std::vector<long> steps;         // recorded step indices
  std::vector<VectorXd> iterates;  // theta_n at recorded steps
  std::vector<VectorXd> averages;  // avg of theta_0..theta_{n-1} (theta_0 at n=0)
  VectorXd final_theta;
  VectorXd final_average;

  // Per-step trace (length horizon), present when trace_martingale is on.
  std::vector<double> trace_m;          // M_n
  std::vector<double> trace_a;          // A_n = A_{n-1} + gamma^2 R^2 + M_n
  std::vector<double> trace_fgap_prev;  // f(theta_{n-1}) - f*
  std::vector<double> trace_dist_sq;    // ||theta_n - theta*||^2, n = 0..horizon
};

// theta - gamma * grad. No projection; iterates are unconstrained.
VectorXd sgd_step(const VectorXd& theta, const VectorXd& grad, double gamma);

// Running mean update: returns avg of the first n iterates given the mean
// of the first n-1 and theta_{n-1}.
VectorXd update_average(const VectorXd& avg, const VectorXd& theta_prev,
                        long n);

Trajectory run(const LossModel& model, const Dataset& data,
               const RunConfig& config);

}  // namespace asgd
