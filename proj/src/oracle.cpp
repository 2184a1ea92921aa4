#include "asgd/oracle.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "asgd/rng.hpp"

namespace asgd {

namespace {

// Fixed-order pairwise reduction over [lo, hi); deterministic regardless
// of any external parallelism and far more accurate than a running sum.
template <typename Leaf, typename Acc>
Acc pairwise(long lo, long hi, const Leaf& leaf) {
  if (hi - lo <= 8) {
    Acc acc = leaf(lo);
    for (long i = lo + 1; i < hi; ++i) acc += leaf(i);
    return acc;
  }
  const long mid = lo + (hi - lo) / 2;
  return pairwise<Leaf, Acc>(lo, mid, leaf) + pairwise<Leaf, Acc>(mid, hi, leaf);
}

void require_nonempty(const Dataset& data) {
  if (data.records.empty()) throw ValidationError("dataset is empty");
}

}  // namespace

double full_value(const LossModel& model, const Dataset& data,
                  const VectorXd& theta) {
  require_nonempty(data);
  auto leaf = [&](long i) { return model.value(data.records[i], theta); };
  return pairwise<decltype(leaf), double>(0, data.size(), leaf) / data.size();
}

VectorXd full_gradient(const LossModel& model, const Dataset& data,
                       const VectorXd& theta) {
  require_nonempty(data);
  auto leaf = [&](long i) { return model.gradient(data.records[i], theta); };
  VectorXd g = pairwise<decltype(leaf), VectorXd>(0, data.size(), leaf);
  return g / data.size();
}

VectorXd full_hessian_vp(const LossModel& model, const Dataset& data,
                         const VectorXd& theta, const VectorXd& v) {
  require_nonempty(data);
  auto leaf = [&](long i) {
    return model.hessian_vp(data.records[i], theta, v);
  };
  VectorXd h = pairwise<decltype(leaf), VectorXd>(0, data.size(), leaf);
  return h / data.size();
}

MatrixXd full_hessian(const LossModel& model, const Dataset& data,
                      const VectorXd& theta) {
  require_nonempty(data);
  const int pd = model.param_dim();
  const int d = model.dimension();
  MatrixXd h = MatrixXd::Zero(pd, pd);
  if (model.family() != LossFamily::Multinomial) {
    for (const Observation& obs : data.records) {
      const double w =
          model.link_second_derivative(obs.label, obs.features.dot(theta));
      h.selfadjointView<Eigen::Lower>().rankUpdate(obs.features, w);
    }
  } else {
    const int k = model.num_classes();
    VectorXd u(k);
    for (const Observation& obs : data.records) {
      for (int c = 0; c < k; ++c)
        u[c] = obs.features.dot(theta.segment(c * d, d));
      const double m = u.maxCoeff();
      VectorXd p = (u.array() - m).exp();
      p /= p.sum();
      const MatrixXd xxt = obs.features * obs.features.transpose();
      for (int c = 0; c < k; ++c)
        for (int cc = 0; cc < k; ++cc) {
          const double w = (c == cc ? p[c] : 0.0) - p[c] * p[cc];
          if (w != 0.0) h.block(c * d, cc * d, d, d) += w * xxt;
        }
    }
  }
  h.triangularView<Eigen::Upper>() = h.transpose();
  return h / data.size();
}

namespace {

// A point that strictly separates every training margin certifies that the
// classification risk has no attained minimum: the loss keeps decreasing
// along the ray through theta. Regression losses are coercive and exempt.
bool strictly_separates(const LossModel& model, const Dataset& data,
                        const VectorXd& theta) {
  const int d = model.dimension();
  switch (model.family()) {
    case LossFamily::Logistic:
    case LossFamily::SqrtBinary: {
      for (const Observation& obs : data.records)
        if (obs.label * obs.features.dot(theta) <= 0.0) return false;
      return true;
    }
    case LossFamily::Multinomial: {
      const int k = model.num_classes();
      for (const Observation& obs : data.records) {
        const int y = static_cast<int>(obs.label);
        const double own = obs.features.dot(theta.segment(y * d, d));
        for (int c = 0; c < k; ++c) {
          if (c == y) continue;
          if (own - obs.features.dot(theta.segment(c * d, d)) <= 0.0)
            return false;
        }
      }
      return true;
    }
    case LossFamily::LogCosh: return false;
  }
  return false;
}

// Newton direction; falls back to an eigenvalue-clamped pseudo-solve when
// the factorization is unusable or the direction is not a descent one.
VectorXd newton_direction(const MatrixXd& h, const VectorXd& g) {
  Eigen::LDLT<MatrixXd> ldlt(h);
  if (ldlt.info() == Eigen::Success) {
    VectorXd s = ldlt.solve(-g);
    if (s.allFinite() && g.dot(s) < 0.0) return s;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h);
  const VectorXd& ev = eig.eigenvalues();
  const double floor = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) * 1e-14;
  VectorXd inv = ev.unaryExpr(
      [&](double v) { return 1.0 / std::max(v, floor); });
  return -(eig.eigenvectors() * inv.asDiagonal() *
           eig.eigenvectors().transpose() * g);
}

}  // namespace

OptimumCertificate solve_batch(const LossModel& model, const Dataset& data,
                               const VectorXd& theta_init,
                               const SolveOptions& opts) {
  require_nonempty(data);
  if (theta_init.size() != model.param_dim())
    throw DimensionError("theta_init does not match the parameter dimension");

  const double R = model.radius();
  const double tol =
      opts.grad_tolerance > 0.0 ? opts.grad_tolerance : 1e-10 * R;
  const double cap =
      opts.divergence_cap > 0.0 ? opts.divergence_cap : 1e6 / R;

  VectorXd theta = theta_init;
  double f = full_value(model, data, theta);
  bool converged = false;
  double grad_norm = 0.0;

  for (int it = 0; it < opts.max_iterations; ++it) {
    const VectorXd g = full_gradient(model, data, theta);
    grad_norm = g.norm();
    if (grad_norm <= tol) {
      if (strictly_separates(model, data, theta)) {
        std::ostringstream os;
        os << "minimum not attained: the stopping point (norm " << theta.norm()
           << ") strictly separates the data, so the infimum sits at infinity";
        throw MinimumNotAttainedError(os.str());
      }
      converged = true;
      break;
    }
    const MatrixXd h = full_hessian(model, data, theta);
    const VectorXd s = newton_direction(h, g);
    const double slope = g.dot(s);

    double t = 1.0;
    double f_new = full_value(model, data, theta + s);
    int backtracks = 0;
    while (f_new > f + opts.armijo_c * t * slope && backtracks < 80) {
      t *= 0.5;
      f_new = full_value(model, data, theta + t * s);
      ++backtracks;
    }
    theta += t * s;
    f = f_new;

    if (theta.norm() > cap) {
      std::ostringstream os;
      os << "minimum not attained: iterate norm " << theta.norm()
         << " exceeded cap " << cap << " after " << it + 1
         << " Newton steps (separable data?)";
      throw MinimumNotAttainedError(os.str());
    }
  }

  OptimumCertificate cert;
  cert.theta_star = theta;
  cert.f_star = full_value(model, data, theta);
  cert.grad_norm_at_star = full_gradient(model, data, theta).norm();
  cert.converged = converged;
  cert.tolerance = tol;

  if (model.param_dim() <= opts.dense_eig_threshold) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(full_hessian(model, data, theta));
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    cert.mu = std::max(lo, 0.0);
    cert.hessian_condition_estimate =
        lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  } else {
    EigOptions eopts;
    eopts.dense_threshold = 0;
    cert.mu = std::max(lowest_hessian_eigenvalue(model, data, theta, eopts), 0.0);
    cert.hessian_condition_estimate = 0.0;
  }
  return cert;
}

namespace {

struct PowerResult {
  double lambda = 0.0;
  double residual = 0.0;
  VectorXd v;
};

// Dominant eigenpair of (shift * I - H) when shift > 0, of H when shift = 0,
// iterated until the eigenpair residual falls below rel_target * |lambda|.
PowerResult power_iteration(const LossModel& model, const Dataset& data,
                            const VectorXd& theta, double shift,
                            long max_iters, double rel_target) {
  const int pd = model.param_dim();
  CounterRng rng(0x5eedULL, 7);
  PowerResult out;
  out.v.resize(pd);
  for (int i = 0; i < pd; ++i) out.v[i] = rng.next_gaussian();
  out.v.normalize();

  for (long it = 0; it < max_iters; ++it) {
    VectorXd w = full_hessian_vp(model, data, theta, out.v);
    if (shift != 0.0) w = shift * out.v - w;
    out.lambda = out.v.dot(w);
    out.residual = (w - out.lambda * out.v).norm();
    if (out.residual <= rel_target * std::abs(out.lambda) && it > 2)
      return out;
    const double wn = w.norm();
    if (wn == 0.0) {
      out.lambda = 0.0;
      out.residual = 0.0;
      return out;
    }
    out.v = w / wn;
  }
  return out;
}

}  // namespace

double lowest_hessian_eigenvalue(const LossModel& model, const Dataset& data,
                                 const VectorXd& theta,
                                 const EigOptions& opts) {
  require_nonempty(data);
  if (model.param_dim() <= opts.dense_threshold) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(full_hessian(model, data, theta));
    return eig.eigenvalues().minCoeff();
  }

  // Shift past the top of the spectrum, then the dominant eigenpair of
  // (c I - H) exposes lambda_min = c - nu. The Rayleigh quotient is
  // second-order accurate in the residual, so a modest residual target
  // already pins lambda_min far below it.
  const PowerResult top = power_iteration(model, data, theta, 0.0,
                                          opts.max_iterations, 1e-5);
  const double lmax = std::max(top.lambda, 0.0);
  const double scale = std::max(lmax, 1e-300);
  const double c = lmax * (1.0 + 1e-6) + 1e-12;
  const PowerResult low = power_iteration(model, data, theta, c,
                                          opts.max_iterations, 3e-8);
  const double lmin = c - low.lambda;

  const VectorXd hv = full_hessian_vp(model, data, theta, low.v);
  const double residual = (hv - lmin * low.v).norm();
  if (residual > 1e-6 * scale) {
    std::ostringstream os;
    os << "inverse spectral iteration did not converge (residual " << residual
       << ")";
    throw EigenSolveError(os.str(), residual);
  }
  return lmin;
}

}  // namespace asgd
