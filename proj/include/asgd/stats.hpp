#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace asgd {

struct MomentEstimate {
  double value = 0.0;   // sample mean of x^p
  double ci_low = 0.0;  // 95% bootstrap percentile interval
  double ci_high = 0.0;
  long n = 0;
  int p = 1;
};

struct TailEstimate {
  double fraction = 0.0;
  double ci_low = 0.0;  // 95% Clopper-Pearson interval
  double ci_high = 0.0;
  long hits = 0;
  long n = 0;
};

MomentEstimate bootstrap_moment(std::span<const double> xs, int p,
                                int resamples = 1000,
                                uint64_t seed = 0xb00157ULL);

// Exact binomial (Clopper-Pearson) two-sided interval at `confidence`.
std::pair<double, double> clopper_pearson(long hits, long n,
                                          double confidence = 0.95);

// Fraction of values >= threshold (ties count), with its CP interval.
TailEstimate tail_fraction(std::span<const double> xs, double threshold);

struct RateFit {
  std::vector<double> horizons;
  std::vector<double> estimates;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Least squares of log(estimate) on log(horizon). Horizons must be
// strictly increasing with at least 4 points; estimates must be positive.
RateFit fit_rate(const std::vector<double>& horizons,
                 const std::vector<double>& estimates);

// Regularized incomplete beta I_x(a, b) and its inverse in x.
double incomplete_beta(double a, double b, double x);
double incomplete_beta_inv(double a, double b, double prob);

}  // namespace asgd
