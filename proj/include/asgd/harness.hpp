#pragma once

#include <cstdint>
#include <vector>

#include "asgd/bounds.hpp"
#include "asgd/oracle.hpp"
#include "asgd/sgd.hpp"
#include "asgd/stats.hpp"

namespace asgd {

enum class Statistic {
  FGap,           // f(avg_N) - f*
  IterateDistSq,  // ||theta_N - theta*||^2
  AverageDistSq,  // ||avg_N - theta*||^2
  GradNormSq,     // ||f'(avg_N)||^2
  Composite       // 2 gamma N [f(avg_N) - f*] + ||theta_N - theta*||^2
};

const char* statistic_name(Statistic s);
Statistic statistic_from_name(const std::string& name);

// Terminal statistics of m independent replicates of one run configuration,
// all measured against a shared optimum certificate.
struct ReplicateSet {
  long horizon = 0;
  double gamma = 0.0;    // step size at the final step
  double dist0_sq = 0.0; // ||theta_0 - theta*||^2
  int m = 0;
  std::vector<uint64_t> seeds;  // pairwise distinct replicate streams
  std::vector<double> f_gap;
  std::vector<double> iterate_dist_sq;
  std::vector<double> average_dist_sq;
  std::vector<double> grad_norm_sq;
  std::vector<double> composite;
};

// Runs m replicates of `base` with split seed streams (replicate r draws
// from stream r of base.seed). Deterministic for any thread count.
ReplicateSet run_replicates(const LossModel& model, const Dataset& data,
                            const RunConfig& base, int m,
                            const OptimumCertificate& cert, int threads = 1);

const std::vector<double>& statistic_values(const ReplicateSet& set,
                                            Statistic stat);

MomentEstimate empirical_moment(const ReplicateSet& set, Statistic stat, int p,
                                int resamples = 1000,
                                uint64_t seed = 0xb00157ULL);

TailEstimate empirical_tail(const ReplicateSet& set, Statistic stat,
                            double threshold);

struct SweepOptions {
  std::vector<long> horizons;
  int replicates = 1000;
  uint64_t seed = 0;
  VectorXd theta0;  // empty = zero
  std::vector<int> p_grid = {1, 2, 3};
  std::vector<double> t_grid = {0.5, 1.0, 2.0, 3.0};
  int threads = 1;
};

// Evaluates every analytic bound against its Monte-Carlo estimate over the
// horizon/p/t grid; one report row per comparison. Adaptive-rate rows are
// only meaningful when mu sqrt(N)/R >= 500; below that they fall back to
// the non-strongly-convex bounds.
std::vector<bounds::BoundReport> bound_sweep(const LossModel& model,
                                             const Dataset& data,
                                             const OptimumCertificate& cert,
                                             const SweepOptions& opts);

}  // namespace asgd
