#include "asgd/losses.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace asgd {

namespace detail {

double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log_cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094;
}

// sech^2(t), computed from e^{-|t|} to stay finite for large |t|.
double sech_sq(double t) {
  const double e = std::exp(-std::abs(t));
  const double c = (1.0 + e * e) / (2.0 * e);  // cosh via stable split
  return 1.0 / (c * c);
}

long double softplus_ld(long double t) {
  return std::max(t, 0.0L) + log1pl(expl(-fabsl(t)));
}

long double log_cosh_ld(long double t) {
  const long double a = fabsl(t);
  return a + log1pl(expl(-2.0L * a)) - 0.693147180559945309417232121458L;
}

}  // namespace detail

const char* loss_family_name(LossFamily family) {
  switch (family) {
    case LossFamily::Logistic: return "logistic";
    case LossFamily::SqrtBinary: return "sqrt_binary";
    case LossFamily::LogCosh: return "log_cosh";
    case LossFamily::Multinomial: return "multinomial";
  }
  return "?";
}

LossFamily loss_family_from_name(const std::string& name) {
  if (name == "logistic") return LossFamily::Logistic;
  if (name == "sqrt_binary") return LossFamily::SqrtBinary;
  if (name == "log_cosh") return LossFamily::LogCosh;
  if (name == "multinomial") return LossFamily::Multinomial;
  throw ValidationError("unknown loss family: " + name);
}

namespace {

double radius_factor(LossFamily family) {
  // Logistic: |phi'| <= 1 and |phi'''| <= phi''.
  // SqrtBinary: |phi'| < 2, |phi'''| <= 1.5 phi''.
  // LogCosh: |phi'| <= 1, |phi'''| <= 2 phi''.
  // Multinomial: gradient norm <= sqrt(2) ||x||, third cumulant <= 2 Var.
  return family == LossFamily::Logistic ? 1.0 : 2.0;
}

bool is_binary_label(double y) { return y == 1.0 || y == -1.0; }

}  // namespace

LossModel::LossModel(LossFamily family, double feature_bound, int dimension,
                     int num_classes)
    : family_(family),
      feature_bound_(feature_bound),
      radius_(radius_factor(family) * feature_bound),
      dimension_(dimension),
      num_classes_(num_classes) {
  if (!(feature_bound > 0.0) || !std::isfinite(feature_bound))
    throw ValidationError("feature_bound must be a positive real");
  if (dimension < 1) throw ValidationError("dimension must be >= 1");
  if (family == LossFamily::Multinomial) {
    if (num_classes < 2)
      throw ValidationError("multinomial model needs num_classes >= 2");
  } else if (num_classes != 0) {
    throw ValidationError("num_classes is only meaningful for multinomial");
  }
}

int LossModel::param_dim() const {
  return family_ == LossFamily::Multinomial ? num_classes_ * dimension_
                                            : dimension_;
}

void LossModel::check_theta(const VectorXd& theta) const {
  if (theta.size() != param_dim()) {
    std::ostringstream os;
    os << "theta has dimension " << theta.size() << ", model expects "
       << param_dim();
    throw DimensionError(os.str());
  }
  if (!theta.allFinite()) throw NumericError("theta has a non-finite entry");
}

void LossModel::check_obs(const Observation& obs) const {
  if (obs.features.size() != dimension_) {
    std::ostringstream os;
    os << "observation has dimension " << obs.features.size()
       << ", model expects " << dimension_;
    throw DimensionError(os.str());
  }
  switch (family_) {
    case LossFamily::Logistic:
    case LossFamily::SqrtBinary:
      if (!is_binary_label(obs.label))
        throw ValidationError("binary label must be exactly -1 or +1");
      break;
    case LossFamily::Multinomial: {
      const double y = obs.label;
      if (y != std::floor(y) || y < 0.0 || y >= num_classes_)
        throw ValidationError("multinomial label must be a class index");
      break;
    }
    case LossFamily::LogCosh:
      if (!std::isfinite(obs.label))
        throw NumericError("label must be finite");
      break;
  }
}

void LossModel::validate_observation(const Observation& obs) const {
  check_obs(obs);
  const double norm = obs.features.norm();
  if (norm > feature_bound_ * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "feature norm " << norm << " exceeds certified bound "
       << feature_bound_;
    throw ValidationError(os.str());
  }
}

double LossModel::link_value(double label, double u) const {
  switch (family_) {
    case LossFamily::Logistic: return detail::softplus(-label * u);
    case LossFamily::SqrtBinary: return -label * u + std::sqrt(1.0 + u * u);
    case LossFamily::LogCosh: return detail::log_cosh(label - u);
    case LossFamily::Multinomial: break;
  }
  throw ValidationError("multinomial loss has no scalar link");
}

double LossModel::link_derivative(double label, double u) const {
  switch (family_) {
    case LossFamily::Logistic: return -label * detail::sigmoid(-label * u);
    case LossFamily::SqrtBinary:
      return -label + u / std::sqrt(1.0 + u * u);
    case LossFamily::LogCosh: return -std::tanh(label - u);
    case LossFamily::Multinomial: break;
  }
  throw ValidationError("multinomial loss has no scalar link");
}

double LossModel::link_second_derivative(double label, double u) const {
  switch (family_) {
    case LossFamily::Logistic: {
      const double s = detail::sigmoid(label * u);
      return s * (1.0 - s);
    }
    case LossFamily::SqrtBinary: {
      const double s = std::sqrt(1.0 + u * u);
      return 1.0 / (s * s * s);
    }
    case LossFamily::LogCosh: return detail::sech_sq(label - u);
    case LossFamily::Multinomial: break;
  }
  throw ValidationError("multinomial loss has no scalar link");
}

double LossModel::link_third_derivative(double label, double u) const {
  switch (family_) {
    case LossFamily::Logistic: {
      const double s = detail::sigmoid(-label * u);
      return -label * s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case LossFamily::SqrtBinary: {
      const double s = std::sqrt(1.0 + u * u);
      return -3.0 * u / (s * s * s * s * s);
    }
    case LossFamily::LogCosh: {
      const double r = label - u;
      return 2.0 * detail::sech_sq(r) * std::tanh(r);
    }
    case LossFamily::Multinomial: break;
  }
  throw ValidationError("multinomial loss has no scalar link");
}

namespace {

// Stable per-class probabilities p_c = softmax(u)_c and logsumexp(u).
void softmax_stable(const VectorXd& u, VectorXd* p, double* lse) {
  const double m = u.maxCoeff();
  *p = (u.array() - m).exp();
  const double z = p->sum();
  *lse = m + std::log(z);
  *p /= z;
}

}  // namespace

double LossModel::value(const Observation& obs, const VectorXd& theta) const {
  check_obs(obs);
  check_theta(theta);
  if (family_ != LossFamily::Multinomial) {
    return link_value(obs.label, obs.features.dot(theta));
  }
  const int k = num_classes_;
  const int d = dimension_;
  VectorXd u(k);
  for (int c = 0; c < k; ++c) u[c] = obs.features.dot(theta.segment(c * d, d));
  VectorXd p;
  double lse;
  softmax_stable(u, &p, &lse);
  return lse - u[static_cast<int>(obs.label)];
}

VectorXd LossModel::gradient(const Observation& obs,
                             const VectorXd& theta) const {
  check_obs(obs);
  check_theta(theta);
  if (family_ != LossFamily::Multinomial) {
    return link_derivative(obs.label, obs.features.dot(theta)) * obs.features;
  }
  const int k = num_classes_;
  const int d = dimension_;
  VectorXd u(k);
  for (int c = 0; c < k; ++c) u[c] = obs.features.dot(theta.segment(c * d, d));
  VectorXd p;
  double lse;
  softmax_stable(u, &p, &lse);
  VectorXd g = VectorXd::Zero(k * d);
  for (int c = 0; c < k; ++c) {
    const double w = p[c] - (c == static_cast<int>(obs.label) ? 1.0 : 0.0);
    g.segment(c * d, d) = w * obs.features;
  }
  return g;
}

VectorXd LossModel::hessian_vp(const Observation& obs, const VectorXd& theta,
                               const VectorXd& v) const {
  check_obs(obs);
  check_theta(theta);
  if (v.size() != param_dim())
    throw DimensionError("direction v does not match parameter dimension");
  if (!v.allFinite()) throw NumericError("direction v has a non-finite entry");
  if (family_ != LossFamily::Multinomial) {
    const double u = obs.features.dot(theta);
    return link_second_derivative(obs.label, u) * obs.features.dot(v) *
           obs.features;
  }
  const int k = num_classes_;
  const int d = dimension_;
  VectorXd u(k), s(k);
  for (int c = 0; c < k; ++c) {
    u[c] = obs.features.dot(theta.segment(c * d, d));
    s[c] = obs.features.dot(v.segment(c * d, d));
  }
  VectorXd p;
  double lse;
  softmax_stable(u, &p, &lse);
  // Hessian of logsumexp in the margins is diag(p) - p p^T.
  const double ps = p.dot(s);
  VectorXd out = VectorXd::Zero(k * d);
  for (int c = 0; c < k; ++c)
    out.segment(c * d, d) = p[c] * (s[c] - ps) * obs.features;
  return out;
}

SegmentCheckResult segment_ratio_check(
    const std::function<long double(long double)>& phi, double radius,
    double segment_norm, int probes, double guard_floor) {
  if (probes < 3) throw ValidationError("segment check needs probes >= 3");
  if (!(segment_norm > 0.0))
    throw ValidationError("segment endpoints must differ");

  const long double h2 = 1e-5L;   // second derivative
  const long double h3 = 1e-4L;   // third derivative
  const double scale = radius * segment_norm;

  struct Probe {
    long double d2, d3;
  };
  std::vector<Probe> vals(probes);
  long double max_abs_phi = 0.0L;
  for (int j = 0; j < probes; ++j) {
    const long double t =
        probes == 1 ? 0.5L
                    : static_cast<long double>(j) / (probes - 1);
    const long double f0 = phi(t);
    const long double fl = phi(t - h2), fr = phi(t + h2);
    const long double g1 = phi(t - 2 * h3), g2 = phi(t - h3);
    const long double g3 = phi(t + h3), g4 = phi(t + 2 * h3);
    vals[j].d2 = (fr - 2.0L * f0 + fl) / (h2 * h2);
    vals[j].d3 = (g4 - 2.0L * g3 + 2.0L * g2 - g1) / (2.0L * h3 * h3 * h3);
    for (long double f : {f0, fl, fr, g1, g2, g3, g4})
      max_abs_phi = std::max(max_abs_phi, fabsl(f));
  }

  // Roundoff floor of the third-derivative stencil: six phi evaluations,
  // each good to ~LDBL_EPSILON * max|phi|, divided by 2 h^3. Probes whose
  // curvature cannot support a ratio resolved to ~5e-4 are uninformative.
  const long double noise3 =
      8.0L * LDBL_EPSILON * std::max(max_abs_phi, 1.0L) / (2.0L * h3 * h3 * h3);
  double guard = guard_floor;
  if (guard < 0.0) {
    guard = std::max(1e-10 * radius * radius,
                     static_cast<double>(noise3) * 2000.0 / scale);
  }

  SegmentCheckResult result;
  result.num_probes = probes;
  result.guard_floor = guard;
  for (const Probe& p : vals) {
    if (!(p.d2 >= guard)) continue;
    const double ratio =
        static_cast<double>(fabsl(p.d3) / (scale * p.d2));
    result.max_ratio = std::max(result.max_ratio, ratio);
    ++result.used_probes;
  }
  if (result.used_probes == 0)
    throw DegenerateSegmentError(
        "degenerate segment: every probe fell below the curvature guard");
  return result;
}

SegmentCheckResult check_self_concordance(const LossModel& model,
                                          const Dataset& data,
                                          const VectorXd& theta1,
                                          const VectorXd& theta2, int probes,
                                          double guard_floor) {
  if (data.records.empty())
    throw ValidationError("self-concordance check needs a nonempty sample");
  const VectorXd delta = theta2 - theta1;
  const double delta_norm = delta.norm();
  if (!(delta_norm > 0.0))
    throw ValidationError("segment endpoints must differ");

  const long n = data.size();
  const int d = model.dimension();
  const bool multi = model.family() == LossFamily::Multinomial;
  const int k = multi ? model.num_classes() : 1;

  // Margins at theta1 and along delta are fixed across the stencil, so
  // their rounding cancels out of the finite differences.
  std::vector<double> base(n * k), dir(n * k), labels(n);
  for (long i = 0; i < n; ++i) {
    const Observation& obs = data.records[i];
    labels[i] = obs.label;
    for (int c = 0; c < k; ++c) {
      const auto seg1 = multi ? theta1.segment(c * d, d) : theta1.head(d);
      const auto segd = multi ? delta.segment(c * d, d) : delta.head(d);
      base[i * k + c] = obs.features.dot(seg1);
      dir[i * k + c] = obs.features.dot(segd);
    }
  }

  const LossFamily family = model.family();
  auto phi = [&](long double t) -> long double {
    long double acc = 0.0L;
    for (long i = 0; i < n; ++i) {
      if (!multi) {
        const long double u = base[i] + t * static_cast<long double>(dir[i]);
        const long double y = labels[i];
        switch (family) {
          case LossFamily::Logistic:
            acc += detail::softplus_ld(-y * u);
            break;
          case LossFamily::SqrtBinary:
            acc += -y * u + sqrtl(1.0L + u * u);
            break;
          case LossFamily::LogCosh:
            acc += detail::log_cosh_ld(y - u);
            break;
          default: break;
        }
      } else {
        long double m = -HUGE_VALL;
        long double u[64];
        for (int c = 0; c < k; ++c) {
          u[c] = base[i * k + c] + t * static_cast<long double>(dir[i * k + c]);
          m = std::max(m, u[c]);
        }
        long double z = 0.0L;
        for (int c = 0; c < k; ++c) z += expl(u[c] - m);
        acc += m + logl(z) - u[static_cast<int>(labels[i])];
      }
    }
    return acc / n;
  };

  if (multi && k > 64)
    throw ValidationError("segment check supports at most 64 classes");
  return segment_ratio_check(phi, model.radius(), delta_norm, probes,
                             guard_floor);
}

}  // namespace asgd
