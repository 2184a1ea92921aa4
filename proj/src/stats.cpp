#include "asgd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "asgd/error.hpp"
#include "asgd/rng.hpp"

namespace asgd {

double incomplete_beta(double a, double b, double x) {
  return boost::math::ibeta(a, b, x);
}

double incomplete_beta_inv(double a, double b, double prob) {
  return boost::math::ibeta_inv(a, b, prob);
}

std::pair<double, double> clopper_pearson(long hits, long n,
                                          double confidence) {
  if (n < 1) throw ValidationError("binomial interval needs n >= 1");
  if (hits < 0 || hits > n) throw ValidationError("hits must lie in [0, n]");
  const double alpha = 1.0 - confidence;
  const double lo =
      hits == 0 ? 0.0
                : incomplete_beta_inv(static_cast<double>(hits),
                                      static_cast<double>(n - hits + 1),
                                      alpha / 2.0);
  const double hi =
      hits == n ? 1.0
                : incomplete_beta_inv(static_cast<double>(hits + 1),
                                      static_cast<double>(n - hits),
                                      1.0 - alpha / 2.0);
  return {lo, hi};
}

MomentEstimate bootstrap_moment(std::span<const double> xs, int p,
                                int resamples, uint64_t seed) {
  if (xs.empty()) throw ValidationError("moment of an empty sample");
  if (p < 1) throw ValidationError("moment order must be >= 1");

  const long n = static_cast<long>(xs.size());
  std::vector<double> powed(n);
  for (long i = 0; i < n; ++i) powed[i] = std::pow(xs[i], p);

  double mean = 0.0;
  for (double v : powed) mean += v;
  mean /= n;

  MomentEstimate est;
  est.value = mean;
  est.n = n;
  est.p = p;

  CounterRng rng(seed, /*stream=*/2);
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double acc = 0.0;
    for (long i = 0; i < n; ++i)
      acc += powed[rng.next_below(static_cast<uint64_t>(n))];
    means[r] = acc / n;
  }
  std::sort(means.begin(), means.end());
  const auto pick = [&](double q) {
    const long idx = std::clamp<long>(
        static_cast<long>(std::floor(q * resamples)), 0, resamples - 1);
    return means[idx];
  };
  est.ci_low = pick(0.025);
  est.ci_high = pick(0.975);
  return est;
}

TailEstimate tail_fraction(std::span<const double> xs, double threshold) {
  if (xs.empty()) throw ValidationError("tail of an empty sample");
  TailEstimate est;
  est.n = static_cast<long>(xs.size());
  for (double v : xs)
    if (v >= threshold) ++est.hits;
  est.fraction = static_cast<double>(est.hits) / est.n;
  std::tie(est.ci_low, est.ci_high) = clopper_pearson(est.hits, est.n);
  return est;
}

RateFit fit_rate(const std::vector<double>& horizons,
                 const std::vector<double>& estimates) {
  if (horizons.size() != estimates.size())
    throw ValidationError("horizons and estimates differ in length");
  const size_t n = horizons.size();
  if (n < 4) throw ValidationError("rate fit needs at least 4 horizons");
  for (size_t i = 0; i + 1 < n; ++i)
    if (!(horizons[i] < horizons[i + 1]))
      throw ValidationError("horizons must be strictly increasing");

  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(horizons[i] > 0.0))
      throw ValidationError("horizons must be positive");
    if (!(estimates[i] > 0.0)) {
      std::ostringstream os;
      os << "estimate at horizon " << horizons[i] << " is " << estimates[i]
         << "; cannot take log";
      throw ValidationError(os.str());
    }
    lx[i] = std::log(horizons[i]);
    ly[i] = std::log(estimates[i]);
  }

  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }

  RateFit fit;
  fit.horizons = horizons;
  fit.estimates = estimates;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;

  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += r * r;
  }
  fit.slope_stderr = std::sqrt(ssr / (n - 2) / sxx);
  return fit;
}

}  // namespace asgd
