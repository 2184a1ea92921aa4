#include "asgd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "asgd/rng.hpp"

namespace asgd {

const char* statistic_name(Statistic s) {
  switch (s) {
    case Statistic::FGap: return "f_gap";
    case Statistic::IterateDistSq: return "iterate_dist_sq";
    case Statistic::AverageDistSq: return "average_dist_sq";
    case Statistic::GradNormSq: return "grad_norm_sq";
    case Statistic::Composite: return "composite";
  }
  return "?";
}

Statistic statistic_from_name(const std::string& name) {
  if (name == "f_gap") return Statistic::FGap;
  if (name == "iterate_dist_sq") return Statistic::IterateDistSq;
  if (name == "average_dist_sq") return Statistic::AverageDistSq;
  if (name == "grad_norm_sq") return Statistic::GradNormSq;
  if (name == "composite") return Statistic::Composite;
  throw ValidationError("unknown statistic: " + name);
}

namespace {

double nonneg(double v, const char* what) {
  if (v < -1e-9) {
    std::ostringstream os;
    os << what << " came out " << v
       << "; the certificate does not match this problem";
    throw ValidationError(os.str());
  }
  return std::max(v, 0.0);
}

}  // namespace

ReplicateSet run_replicates(const LossModel& model, const Dataset& data,
                            const RunConfig& base, int m,
                            const OptimumCertificate& cert, int threads) {
  if (m < 1) throw ValidationError("need at least one replicate");
  ReplicateSet set;
  set.horizon = base.horizon;
  set.gamma = base.schedule.step_size(base.horizon);
  set.dist0_sq = (base.theta0 - cert.theta_star).squaredNorm();
  set.m = m;
  set.seeds.resize(m);
  set.f_gap.resize(m);
  set.iterate_dist_sq.resize(m);
  set.average_dist_sq.resize(m);
  set.grad_norm_sq.resize(m);
  set.composite.resize(m);
  for (int r = 0; r < m; ++r)
    set.seeds[r] = CounterRng::derive_key(base.seed, static_cast<uint64_t>(r));

  auto work = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      RunConfig cfg = base;
      cfg.seed = set.seeds[r];
      cfg.record_stride = 0;
      cfg.trace_martingale = false;
      const Trajectory traj = run(model, data, cfg);

      const double fgap =
          full_value(model, data, traj.final_average) - cert.f_star;
      set.f_gap[r] = nonneg(fgap, "f-gap");
      set.iterate_dist_sq[r] =
          (traj.final_theta - cert.theta_star).squaredNorm();
      set.average_dist_sq[r] =
          (traj.final_average - cert.theta_star).squaredNorm();
      set.grad_norm_sq[r] =
          full_gradient(model, data, traj.final_average).squaredNorm();
      set.composite[r] = 2.0 * set.gamma * set.horizon * set.f_gap[r] +
                         set.iterate_dist_sq[r];
    }
  };

  threads = std::max(1, std::min<int>(threads, m));
  if (threads == 1) {
    work(0, m);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (m + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(m, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return set;
}

const std::vector<double>& statistic_values(const ReplicateSet& set,
                                            Statistic stat) {
  switch (stat) {
    case Statistic::FGap: return set.f_gap;
    case Statistic::IterateDistSq: return set.iterate_dist_sq;
    case Statistic::AverageDistSq: return set.average_dist_sq;
    case Statistic::GradNormSq: return set.grad_norm_sq;
    case Statistic::Composite: return set.composite;
  }
  throw ValidationError("unknown statistic");
}

MomentEstimate empirical_moment(const ReplicateSet& set, Statistic stat, int p,
                                int resamples, uint64_t seed) {
  return bootstrap_moment(statistic_values(set, stat), p, resamples, seed);
}

TailEstimate empirical_tail(const ReplicateSet& set, Statistic stat,
                            double threshold) {
  if (threshold < 0.0) throw ValidationError("tail threshold must be >= 0");
  return tail_fraction(statistic_values(set, stat), threshold);
}

std::vector<bounds::BoundReport> bound_sweep(const LossModel& model,
                                             const Dataset& data,
                                             const OptimumCertificate& cert,
                                             const SweepOptions& opts) {
  using bounds::BoundContext;
  using bounds::BoundReport;

  if (opts.horizons.empty()) throw ValidationError("sweep needs horizons");
  std::vector<BoundReport> rows;

  for (long N : opts.horizons) {
    RunConfig base;
    base.schedule = {StepSchedule::Kind::ConstantHorizon, N, model.radius()};
    base.theta0 = opts.theta0.size() > 0
                      ? opts.theta0
                      : VectorXd::Zero(model.param_dim()).eval();
    base.seed = CounterRng::derive_key(opts.seed, static_cast<uint64_t>(N));
    base.horizon = N;
    const ReplicateSet set = run_replicates(model, data, base, opts.replicates,
                                            cert, opts.threads);

    const auto tag = [N](const std::string& s) {
      std::ostringstream os;
      os << s << "@N=" << N;
      return os.str();
    };
    const BoundContext ctx =
        BoundContext::make(set.gamma, N, model.radius(), set.dist0_sq, cert.mu);

    rows.push_back(BoundReport::make(
        tag("prop1_fgap"), bounds::prop1_bound(ctx),
        empirical_moment(set, Statistic::FGap, 1).value));

    for (int p : opts.p_grid) {
      const BoundContext pctx = BoundContext::make(
          set.gamma, N, model.radius(), set.dist0_sq, cert.mu, p);
      const double emp = empirical_moment(set, Statistic::Composite, p).value;
      std::ostringstream base_name;
      base_name << "_p" << p;
      rows.push_back(BoundReport::make(tag("prop2" + base_name.str()),
                                       bounds::prop2_moment_bound(pctx), emp));
      if (p <= 3)
        rows.push_back(BoundReport::make(tag("appendixF" + base_name.str()),
                                         bounds::appendixF_bound(pctx, p), emp));
    }

    for (double t : opts.t_grid) {
      const auto [thr_gap, thr_dist] = bounds::prop3_tail_threshold(ctx, t);
      const double prob = 2.0 * std::exp(-t);
      std::ostringstream ts;
      ts << "_t" << t;
      rows.push_back(
          BoundReport::make(tag("prop3_fgap" + ts.str()), prob,
                            empirical_tail(set, Statistic::FGap, thr_gap).fraction));
      rows.push_back(BoundReport::make(
          tag("prop3_dist" + ts.str()), prob,
          empirical_tail(set, Statistic::IterateDistSq, thr_dist).fraction));
    }

    const double mean_fgap = empirical_moment(set, Statistic::FGap, 1).value;
    const double mean_avg_dist =
        empirical_moment(set, Statistic::AverageDistSq, 1).value;
    if (cert.mu > 0.0 && bounds::prop6_validity(ctx)) {
      const auto [b_gap, b_dist] = bounds::prop6_adaptive_bounds(ctx);
      rows.push_back(BoundReport::make(tag("prop6_fgap"), b_gap, mean_fgap));
      rows.push_back(
          BoundReport::make(tag("prop6_avgdist"), b_dist, mean_avg_dist));
    } else {
      rows.push_back(BoundReport::make(tag("prop6_fgap_fallback_prop1"),
                                       bounds::prop1_bound(ctx), mean_fgap));
      rows.push_back(BoundReport::make(
          tag("prop6_avgdist_fallback_corollary2"),
          bounds::corollary2_iterate_bound(model.radius(), set.dist0_sq),
          mean_avg_dist));
    }
  }
  return rows;
}

}  // namespace asgd
