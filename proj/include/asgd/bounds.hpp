#pragma once

#include <optional>
#include <string>
#include <utility>

namespace asgd {
namespace bounds {

// Shared inputs of the bound evaluators. square_const and triangle_const
// are the two grouped constants that recur in the adaptive analysis:
//   square   = 2 gamma R^2 sqrt(n)
//   triangle = (3/(gamma sqrt(n))) ||theta_0-theta*||^2
//            + (3/(gamma R sqrt(n))) ||theta_0-theta*||
struct BoundContext {
  double gamma = 0.0;
  long n = 0;
  double radius = 0.0;
  double dist0_sq = 0.0;
  double mu = 0.0;
  int p = 1;

  double square_const = 0.0;
  double triangle_const = 0.0;

  static BoundContext make(double gamma, long n, double radius,
                           double dist0_sq, double mu = 0.0, int p = 1);
  bool has_horizon_step() const;  // gamma == 1/(2 R^2 sqrt(n))
};

// One bound/estimate comparison row.
struct BoundReport {
  std::string bound_name;
  double analytic_value = 0.0;
  double empirical_value = 0.0;
  bool violated = false;  // empirical_value > analytic_value
  double margin = 0.0;    // analytic - empirical

  static BoundReport make(const std::string& name, double analytic,
                          double empirical);
};

// Expected excess risk of the averaged iterate:
//   dist0_sq/(2 gamma n) + gamma R^2 / 2.
double prop1_bound(const BoundContext& ctx);

// p-th moment of 2 gamma n [f(avg)-f*] + ||theta_n-theta*||^2:
//   (3 dist0_sq + 20 n p gamma^2 R^2)^p.
double prop2_moment_bound(const BoundContext& ctx);

// Small-p refinements of the same moment: p=1: a + n b;
// p=2: (a + 9 n b)^2; p=3: (a + 20 n b)^3, with a=dist0_sq, b=gamma^2 R^2.
double appendixF_bound(const BoundContext& ctx, int p);

// Thresholds such that, with probability >= 1 - 2 e^{-t},
//   f(avg_n) - f*          <  30 gamma R^2 t + 3 dist0_sq/(gamma n)
//   ||theta_n - theta*||^2 <  60 n gamma^2 R^2 t + 6 dist0_sq.
std::pair<double, double> prop3_tail_threshold(const BoundContext& ctx,
                                               double t);

// (E ||f'(avg_n)||^{2p})^{1/2p} upper bound.
double prop4_gradient_moment_bound(const BoundContext& ctx);

// Transfer from gradient norm to distance/value near a positive-curvature
// optimum; applicable only when grad_norm * R / mu <= 3/4. Returns
// (bound on ||theta-theta*||^2, bound on f(theta)-f*), or nullopt.
std::optional<std::pair<double, double>> prop5_selfconcordance_transfer(
    double grad_norm, double mu, double radius);

// Unconditional variant: f(theta)-f* <= (1 + R ||theta-theta*||) ||f'||^2/mu.
double prop5_unconditional_value_bound(double grad_norm, double dist,
                                       double mu, double radius);

// Adaptive bounds at the horizon step size, with alpha = R * dist0:
//   E f(avg_N)-f*          <= (R^2/(N mu))   (5 alpha + 15)^4
//   E ||avg_N - theta*||^2 <= (R^2/(N mu^2)) (6 alpha + 21)^4
std::pair<double, double> prop6_adaptive_bounds(const BoundContext& ctx);

// The adaptive bounds above hold on their own only when
// mu sqrt(N) / R >= 500; below that they are covered by prop1.
bool prop6_validity(const BoundContext& ctx);

// Moments-to-tails: E X^p <= (A + B p)^p for p <= n gives
// P(X >= 3 B t + 2 A) <= 2 e^{-t} for t <= n/2.
std::pair<double, double> lemma1_tail_from_moments(double a, double b, double t,
                                                   long n);

// E X^p <= (A sqrt(p) + B p + C)^{2p} for p <= n gives
// P(X >= (2A sqrt(t) + 2B t + 2C)^2) <= 4 e^{-t} for t <= n.
std::pair<double, double> lemma2_tail_from_moments(double a, double b, double c,
                                                   double t, long n);

// Tail threshold for ||f'(avg_n)|| (probability bound 4 e^{-t}):
//   (2R/sqrt(n)) [10 sqrt(t) + 40 R^2 gamma t sqrt(n) + triangle].
double gradient_tail_threshold(const BoundContext& ctx, double t);

// Horizon-step corollaries, coded directly from their own displays (used
// as independent cross-checks of the prop evaluators under substitution).
double corollary2_fgap_bound(long n, double radius, double dist0_sq);
double corollary2_iterate_bound(double radius, double dist0_sq);
double corollary3_fgap_moment_bound(long n, double radius, double dist0_sq,
                                    int p);
double corollary3_iterate_moment_bound(double radius, double dist0_sq, int p);
std::pair<double, double> corollary4_tail_thresholds(long n, double radius,
                                                     double dist0_sq, double t);
double corollary6_gradient_bound(long n, double radius, double dist0_sq, int p);

}  // namespace bounds
}  // namespace asgd
