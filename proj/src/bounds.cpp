#include "asgd/bounds.hpp"

#include <cmath>
#include <sstream>

#include "asgd/error.hpp"

namespace asgd {
namespace bounds {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw ValidationError(msg);
}

double pow_int(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace

BoundContext BoundContext::make(double gamma, long n, double radius,
                                double dist0_sq, double mu, int p) {
  require(gamma > 0.0 && std::isfinite(gamma), "gamma must be positive");
  require(n >= 1, "n must be >= 1");
  require(radius > 0.0 && std::isfinite(radius), "radius must be positive");
  require(dist0_sq >= 0.0 && std::isfinite(dist0_sq),
          "dist0_sq must be nonnegative");
  require(mu >= 0.0 && std::isfinite(mu), "mu must be nonnegative");
  require(p >= 1, "moment order p must be >= 1");

  BoundContext ctx;
  ctx.gamma = gamma;
  ctx.n = n;
  ctx.radius = radius;
  ctx.dist0_sq = dist0_sq;
  ctx.mu = mu;
  ctx.p = p;
  const double sqn = std::sqrt(static_cast<double>(n));
  ctx.square_const = 2.0 * gamma * radius * radius * sqn;
  ctx.triangle_const = 3.0 / (gamma * sqn) * dist0_sq +
                       3.0 / (gamma * radius * sqn) * std::sqrt(dist0_sq);
  return ctx;
}

bool BoundContext::has_horizon_step() const {
  const double ref =
      1.0 / (2.0 * radius * radius * std::sqrt(static_cast<double>(n)));
  return std::abs(gamma - ref) <= 1e-9 * ref;
}

BoundReport BoundReport::make(const std::string& name, double analytic,
                              double empirical) {
  BoundReport r;
  r.bound_name = name;
  r.analytic_value = analytic;
  r.empirical_value = empirical;
  r.violated = empirical > analytic;
  r.margin = analytic - empirical;
  return r;
}

double prop1_bound(const BoundContext& ctx) {
  return ctx.dist0_sq / (2.0 * ctx.gamma * ctx.n) +
         0.5 * ctx.gamma * ctx.radius * ctx.radius;
}

double prop2_moment_bound(const BoundContext& ctx) {
  const double b = ctx.gamma * ctx.gamma * ctx.radius * ctx.radius;
  return pow_int(3.0 * ctx.dist0_sq + 20.0 * ctx.n * ctx.p * b, ctx.p);
}

double appendixF_bound(const BoundContext& ctx, int p) {
  const double a = ctx.dist0_sq;
  const double nb = ctx.n * ctx.gamma * ctx.gamma * ctx.radius * ctx.radius;
  switch (p) {
    case 1: return a + nb;
    case 2: return pow_int(a + 9.0 * nb, 2);
    case 3: return pow_int(a + 20.0 * nb, 3);
    default:
      throw ValidationError(
          "refined constants exist only for p in {1,2,3}; use "
          "prop2_moment_bound for general p");
  }
}

std::pair<double, double> prop3_tail_threshold(const BoundContext& ctx,
                                               double t) {
  require(t >= 0.0, "tail parameter t must be >= 0");
  const double r2 = ctx.radius * ctx.radius;
  const double first =
      30.0 * ctx.gamma * r2 * t + 3.0 * ctx.dist0_sq / (ctx.gamma * ctx.n);
  const double second =
      60.0 * ctx.n * ctx.gamma * ctx.gamma * r2 * t + 6.0 * ctx.dist0_sq;
  return {first, second};
}

double prop4_gradient_moment_bound(const BoundContext& ctx) {
  const double sqn = std::sqrt(static_cast<double>(ctx.n));
  const double r = ctx.radius;
  const double p = ctx.p;
  const double bracket = 8.0 * std::sqrt(p) + 4.0 * p / sqn +
                         40.0 * r * r * ctx.gamma * p * sqn +
                         3.0 / (ctx.gamma * sqn) * ctx.dist0_sq +
                         3.0 / (ctx.gamma * r * sqn) * std::sqrt(ctx.dist0_sq);
  return r / sqn * bracket;
}

std::optional<std::pair<double, double>> prop5_selfconcordance_transfer(
    double grad_norm, double mu, double radius) {
  require(grad_norm >= 0.0, "gradient norm must be >= 0");
  require(radius > 0.0, "radius must be positive");
  if (!(mu > 0.0))
    throw ValidationError("prop5 transfer needs mu > 0");
  if (grad_norm * radius / mu > 0.75) return std::nullopt;
  const double g2 = grad_norm * grad_norm;
  return std::make_pair(4.0 * g2 / (mu * mu), 2.0 * g2 / mu);
}

double prop5_unconditional_value_bound(double grad_norm, double dist,
                                       double mu, double radius) {
  if (!(mu > 0.0))
    throw ValidationError("unconditional transfer needs mu > 0");
  return (1.0 + radius * dist) * grad_norm * grad_norm / mu;
}

std::pair<double, double> prop6_adaptive_bounds(const BoundContext& ctx) {
  if (!(ctx.mu > 0.0))
    throw ValidationError("adaptive bounds need mu > 0");
  if (!ctx.has_horizon_step())
    throw ValidationError(
        "adaptive bounds are stated for gamma = 1/(2 R^2 sqrt(N)) at n = N");
  const double alpha = ctx.radius * std::sqrt(ctx.dist0_sq);
  const double r2 = ctx.radius * ctx.radius;
  const double first =
      r2 / (ctx.n * ctx.mu) * pow_int(5.0 * alpha + 15.0, 4);
  const double second =
      r2 / (ctx.n * ctx.mu * ctx.mu) * pow_int(6.0 * alpha + 21.0, 4);
  return {first, second};
}

bool prop6_validity(const BoundContext& ctx) {
  return ctx.mu * std::sqrt(static_cast<double>(ctx.n)) / ctx.radius >= 500.0;
}

std::pair<double, double> lemma1_tail_from_moments(double a, double b, double t,
                                                   long n) {
  require(a > 0.0 && b > 0.0, "lemma constants must be positive");
  require(t >= 0.0, "t must be >= 0");
  if (t > 0.5 * n) {
    std::ostringstream os;
    os << "t = " << t << " outside validity range t <= n/2 = " << 0.5 * n;
    throw RangeError(os.str());
  }
  return {3.0 * b * t + 2.0 * a, 2.0 * std::exp(-t)};
}

std::pair<double, double> lemma2_tail_from_moments(double a, double b, double c,
                                                   double t, long n) {
  require(a >= 0.0 && b >= 0.0 && c >= 0.0, "lemma constants must be >= 0");
  require(t >= 0.0, "t must be >= 0");
  if (t > static_cast<double>(n)) {
    std::ostringstream os;
    os << "t = " << t << " outside validity range t <= n = " << n;
    throw RangeError(os.str());
  }
  const double root = 2.0 * a * std::sqrt(t) + 2.0 * b * t + 2.0 * c;
  return {root * root, 4.0 * std::exp(-t)};
}

double gradient_tail_threshold(const BoundContext& ctx, double t) {
  require(t >= 0.0, "t must be >= 0");
  const double sqn = std::sqrt(static_cast<double>(ctx.n));
  const double r = ctx.radius;
  const double bracket = 10.0 * std::sqrt(t) +
                         40.0 * r * r * ctx.gamma * t * sqn +
                         ctx.triangle_const;
  return 2.0 * r / sqn * bracket;
}

double corollary2_fgap_bound(long n, double radius, double dist0_sq) {
  const double sqn = std::sqrt(static_cast<double>(n));
  return radius * radius / sqn * dist0_sq + 1.0 / (4.0 * sqn);
}

double corollary2_iterate_bound(double radius, double dist0_sq) {
  return dist0_sq + 1.0 / (4.0 * radius * radius);
}

double corollary3_fgap_moment_bound(long n, double radius, double dist0_sq,
                                    int p) {
  require(p >= 1, "p must be >= 1");
  const double inner = 3.0 * radius * radius * dist0_sq + 5.0 * p;
  return pow_int(inner / std::sqrt(static_cast<double>(n)), p);
}

double corollary3_iterate_moment_bound(double radius, double dist0_sq, int p) {
  require(p >= 1, "p must be >= 1");
  const double inner = 3.0 * radius * radius * dist0_sq + 5.0 * p;
  return pow_int(inner / (radius * radius), p);
}

std::pair<double, double> corollary4_tail_thresholds(long n, double radius,
                                                     double dist0_sq,
                                                     double t) {
  const double sqn = std::sqrt(static_cast<double>(n));
  const double first =
      15.0 * t / sqn + 6.0 * radius * radius * dist0_sq / sqn;
  const double second = 15.0 * t / (radius * radius) + 6.0 * dist0_sq;
  return {first, second};
}

double corollary6_gradient_bound(long n, double radius, double dist0_sq,
                                 int p) {
  require(p >= 1, "p must be >= 1");
  const double sqn = std::sqrt(static_cast<double>(n));
  const double bracket = 8.0 * std::sqrt(static_cast<double>(p)) +
                         4.0 * p / sqn + 20.0 * p +
                         6.0 * radius * radius * dist0_sq +
                         6.0 * radius * std::sqrt(dist0_sq);
  return radius / sqn * bracket;
}

}  // namespace bounds
}  // namespace asgd
