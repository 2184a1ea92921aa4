#pragma once

#include "asgd/losses.hpp"
#include "asgd/types.hpp"

namespace asgd {

// Ground truth for one (model, dataset) pair: the empirical minimizer, the
// minimal value, and the lowest Hessian eigenvalue there.
struct OptimumCertificate {
  VectorXd theta_star;
  double f_star = 0.0;
  double grad_norm_at_star = 0.0;
  double mu = 0.0;  // lowest eigenvalue of f''(theta_star), >= 0
  double hessian_condition_estimate = 0.0;
  bool converged = false;
  double tolerance = 0.0;
};

struct SolveOptions {
  double grad_tolerance = -1.0;  // default 1e-10 * radius
  int max_iterations = 300;
  double divergence_cap = -1.0;  // default 1e6 / radius; crossing it means
                                 // the empirical minimum is not attained
  double armijo_c = 1e-4;
  int dense_eig_threshold = 512;
};

// Empirical risk and its derivatives, averaged over the dataset with a
// fixed-order pairwise reduction (deterministic, ~1e-16 summation error).
double full_value(const LossModel& model, const Dataset& data,
                  const VectorXd& theta);
VectorXd full_gradient(const LossModel& model, const Dataset& data,
                       const VectorXd& theta);
VectorXd full_hessian_vp(const LossModel& model, const Dataset& data,
                         const VectorXd& theta, const VectorXd& v);
MatrixXd full_hessian(const LossModel& model, const Dataset& data,
                      const VectorXd& theta);

// Damped Newton (Armijo backtracking) on the empirical risk. Throws
// MinimumNotAttainedError when the iterate norm crosses the divergence
// cap, which on separable classification data diagnoses that the infimum
// sits at infinity.
OptimumCertificate solve_batch(const LossModel& model, const Dataset& data,
                               const VectorXd& theta_init,
                               const SolveOptions& opts = {});

struct EigOptions {
  int dense_threshold = 512;  // dense symmetric solver up to this dimension
  long max_iterations = 500000;
  double rel_tolerance = 1e-10;
};

// lambda_min of the empirical risk Hessian at theta: dense symmetric
// eigendecomposition when the dimension allows, otherwise power iteration
// on the spectrally shifted operator using Hessian-vector products only.
double lowest_hessian_eigenvalue(const LossModel& model, const Dataset& data,
                                 const VectorXd& theta,
                                 const EigOptions& opts = {});

}  // namespace asgd
