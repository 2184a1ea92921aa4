#include "asgd/kernel.hpp"

#include <cmath>

namespace asgd {

double KernelFunction::operator()(const VectorXd& a, const VectorXd& b) const {
  switch (kind) {
    case Kind::Linear: return a.dot(b);
    case Kind::Gaussian: {
      const double d2 = (a - b).squaredNorm();
      return std::exp(-d2 / (2.0 * bandwidth * bandwidth));
    }
  }
  return 0.0;
}

KernelSgd::KernelSgd(const LossModel& model, KernelFunction kernel,
                     long max_cached_rows)
    : model_(&model), kernel_(kernel), max_cached_rows_(max_cached_rows) {
  if (kernel.kind == KernelFunction::Kind::Gaussian && !(kernel.bandwidth > 0.0))
    throw ValidationError("Gaussian kernel bandwidth must be > 0");
}

double KernelSgd::eval_kernel(const VectorXd& a, const VectorXd& b) const {
  ++eval_count_;
  return kernel_(a, b);
}

void KernelSgd::step(const Observation& obs, double gamma, long dataset_index) {
  if (!(gamma > 0.0)) throw NumericError("step size must be positive");
  if (obs.features.size() != model_->dimension())
    throw DimensionError("observation does not match the model dimension");

  const long n = state_.steps();
  const bool multi = model_->family() == LossFamily::Multinomial;
  const int k = multi ? model_->num_classes() : 1;

  // One fresh Gram row per step; the scalar products with earlier support
  // points are shared across classes.
  std::vector<double> row(n);
  for (long i = 0; i < n; ++i)
    row[i] = eval_kernel(state_.support[i], obs.features);

  VectorXd alpha(k);
  if (!multi) {
    double u = 0.0;
    for (long i = 0; i < n; ++i) u += state_.weights[i][0] * row[i];
    alpha[0] = -gamma * model_->link_derivative(obs.label, u);
  } else {
    VectorXd u = VectorXd::Zero(k);
    for (long i = 0; i < n; ++i) u += state_.weights[i] * row[i];
    const double m = u.maxCoeff();
    VectorXd p = (u.array() - m).exp();
    p /= p.sum();
    const int y = static_cast<int>(obs.label);
    for (int c = 0; c < k; ++c)
      alpha[c] = -gamma * (p[c] - (c == y ? 1.0 : 0.0));
  }

  if (static_cast<long>(gram_rows_.size()) < max_cached_rows_)
    gram_rows_.push_back(std::move(row));
  state_.weights.push_back(std::move(alpha));
  state_.support.push_back(obs.features);
  state_.support_indices.push_back(dataset_index);
}

double KernelSgd::predict(const VectorXd& x) const {
  double out = 0.0;
  for (long i = 0; i < state_.steps(); ++i)
    out += state_.weights[i][0] * eval_kernel(state_.support[i], x);
  return out;
}

VectorXd KernelSgd::predict_scores(const VectorXd& x) const {
  const int k = model_->family() == LossFamily::Multinomial
                    ? model_->num_classes()
                    : 1;
  VectorXd out = VectorXd::Zero(k);
  for (long i = 0; i < state_.steps(); ++i)
    out += state_.weights[i] * eval_kernel(state_.support[i], x);
  return out;
}

VectorXd KernelSgd::reconstruct_primal() const {
  if (kernel_.kind != KernelFunction::Kind::Linear)
    throw ValidationError("primal reconstruction needs the linear kernel");
  const int d = model_->dimension();
  const int k = model_->family() == LossFamily::Multinomial
                    ? model_->num_classes()
                    : 1;
  VectorXd theta = VectorXd::Zero(static_cast<long>(k) * d);
  for (long i = 0; i < state_.steps(); ++i)
    for (int c = 0; c < k; ++c)
      theta.segment(c * d, d) += state_.weights[i][c] * state_.support[i];
  return theta;
}

}  // namespace asgd
