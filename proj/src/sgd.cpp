#include "asgd/sgd.hpp"

#include <cmath>
#include <sstream>

#include "asgd/oracle.hpp"
#include "asgd/rng.hpp"

namespace asgd {

double StepSchedule::step_size(long n) const {
  if (n < 1) throw RangeError("step index must be >= 1");
  if (!(radius > 0.0)) throw ValidationError("schedule radius must be > 0");
  const double base = 2.0 * radius * radius;
  switch (kind) {
    case Kind::ConstantHorizon: {
      if (horizon < 1)
        throw ValidationError("ConstantHorizon schedule needs a horizon");
      if (n > horizon) {
        std::ostringstream os;
        os << "step " << n << " past the fixed horizon " << horizon;
        throw RangeError(os.str());
      }
      return 1.0 / (base * std::sqrt(static_cast<double>(horizon)));
    }
    case Kind::Decaying:
      return 1.0 / (base * std::sqrt(static_cast<double>(n)));
    case Kind::Doubling: {
      // Block p covers n in (2^p, 2^{p+1}]; n = 1 sits in the first block.
      int p = 0;
      while ((1L << (p + 1)) < n) ++p;
      const long block = (n == 1) ? 1L : (1L << (p + 1));
      const long denom = doubling_lower_variant ? block / 2 : block;
      return 1.0 / (base * std::sqrt(static_cast<double>(std::max(denom, 1L))));
    }
  }
  throw ValidationError("unknown schedule kind");
}

VectorXd sgd_step(const VectorXd& theta, const VectorXd& grad, double gamma) {
  if (theta.size() != grad.size())
    throw DimensionError("theta and gradient dimensions differ");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw NumericError("step size must be a positive finite real");
  if (!theta.allFinite() || !grad.allFinite())
    throw NumericError("non-finite input to sgd_step");
  return theta - gamma * grad;
}

VectorXd update_average(const VectorXd& avg, const VectorXd& theta_prev,
                        long n) {
  if (n < 1) throw ValidationError("update_average needs n >= 1");
  if (avg.size() != theta_prev.size())
    throw DimensionError("average and iterate dimensions differ");
  if (n == 1) return theta_prev;
  return avg + (theta_prev - avg) / static_cast<double>(n);
}

Trajectory run(const LossModel& model, const Dataset& data,
               const RunConfig& config) {
  const long N = config.horizon;
  if (N < 1) throw ValidationError("run horizon must be >= 1");
  if (config.theta0.size() != model.param_dim())
    throw DimensionError("theta0 does not match the model parameter dimension");
  if (config.record_stride < 0)
    throw ValidationError("record_stride must be >= 0");
  if (config.trace_martingale) {
    if (config.certificate == nullptr)
      throw ValidationError("martingale trace needs an optimum certificate");
    if (config.schedule.kind != StepSchedule::Kind::ConstantHorizon)
      throw ValidationError("martingale trace requires a constant step size");
  }
  if (config.sample_mode == SampleMode::Sequential && data.size() < N) {
    std::ostringstream os;
    os << "observation stream exhausted at step " << data.size() + 1 << " of "
       << N;
    throw StreamExhaustedError(os.str(), data.size() + 1);
  }
  if (data.records.empty())
    throw StreamExhaustedError("observation stream is empty", 1);

  CounterRng rng(config.seed, /*stream=*/0);
  const long stride = config.record_stride;
  const double R = model.radius();

  Trajectory traj;
  VectorXd theta = config.theta0;
  VectorXd avg = config.theta0;  // value of the mean after the first update

  const OptimumCertificate* cert = config.certificate;
  const bool trace = config.trace_martingale;
  if (trace) {
    traj.trace_m.reserve(N);
    traj.trace_a.reserve(N);
    traj.trace_fgap_prev.reserve(N);
    traj.trace_dist_sq.reserve(N + 1);
    traj.trace_dist_sq.push_back((theta - cert->theta_star).squaredNorm());
  }
  double a_n = trace ? (theta - cert->theta_star).squaredNorm() : 0.0;

  auto record = [&](long n) {
    traj.steps.push_back(n);
    traj.iterates.push_back(theta);
    traj.averages.push_back(avg);
  };
  if (stride > 0) record(0);

  for (long n = 1; n <= N; ++n) {
    const long idx =
        config.sample_mode == SampleMode::IidFromDataset
            ? static_cast<long>(rng.next_below(data.records.size()))
            : n - 1;
    const Observation& obs = data.records[idx];
    const double gamma = config.schedule.step_size(n);

    avg = update_average(avg, theta, n);
    const VectorXd g = model.gradient(obs, theta);

    if (trace) {
      const VectorXd full_g = full_gradient(model, data, theta);
      const VectorXd diff = theta - cert->theta_star;
      const double m_n = -2.0 * gamma * diff.dot(g - full_g);
      a_n += gamma * gamma * R * R + m_n;
      traj.trace_m.push_back(m_n);
      traj.trace_a.push_back(a_n);
      traj.trace_fgap_prev.push_back(full_value(model, data, theta) -
                                     cert->f_star);
    }

    theta = sgd_step(theta, g, gamma);

    if (trace)
      traj.trace_dist_sq.push_back((theta - cert->theta_star).squaredNorm());
    if (stride > 0 && (n % stride == 0 || n == N)) record(n);
  }
  if (stride == 0) record(N);

  traj.final_theta = theta;
  traj.final_average = avg;
  return traj;
}

}  // namespace asgd
