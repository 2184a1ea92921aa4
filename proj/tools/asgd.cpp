// Command-line front end: wires JSON experiment configs to the data
// generator, the batch oracle, the SGD engines, the bound evaluators and
// the Monte-Carlo harness, and writes CSV/JSON artifacts.
//
// Exit codes: 0 success, 1 runtime failure, 2 config/validation error,
// 3 bound violation under --strict.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "asgd/datagen.hpp"
#include "asgd/harness.hpp"
#include "asgd/io.hpp"
#include "asgd/rng.hpp"

namespace fs = std::filesystem;
using asgd::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool strict = false;
};

const json& require_field(const json& j, const std::string& key) {
  if (!j.contains(key))
    throw asgd::ValidationError("missing required field '" + key + "'");
  return j.at(key);
}

double require_number(const json& j, const std::string& key) {
  const json& v = require_field(j, key);
  if (!v.is_number())
    throw asgd::ValidationError("field '" + key + "' must be a number");
  return v.get<double>();
}

long require_integer(const json& j, const std::string& key) {
  const json& v = require_field(j, key);
  if (!v.is_number_integer())
    throw asgd::ValidationError("field '" + key + "' must be an integer");
  return v.get<long>();
}

std::string require_string(const json& j, const std::string& key) {
  const json& v = require_field(j, key);
  if (!v.is_string())
    throw asgd::ValidationError("field '" + key + "' must be a string");
  return v.get<std::string>();
}

// Dotted-path override: "schedule.kind=decaying" or "replicates=500".
void apply_override(json& cfg, const std::string& expr) {
  const auto eq = expr.find('=');
  if (eq == std::string::npos)
    throw asgd::ValidationError("override must look like key=value: " + expr);
  const std::string path = expr.substr(0, eq);
  const std::string raw = expr.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // bare strings are allowed unquoted
  }

  json* node = &cfg;
  size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty())
      throw asgd::ValidationError("bad override path: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

json load_config(const CommonOpts& opts) {
  json cfg;
  if (!opts.config_path.empty()) {
    cfg = asgd::read_json_file(opts.config_path);
    if (!cfg.is_object())
      throw asgd::ValidationError("config root must be a JSON object");
  } else {
    cfg = json::object();
  }
  for (const std::string& o : opts.overrides) apply_override(cfg, o);
  if (opts.seed_given) cfg["seed"] = opts.seed;
  return cfg;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
  fs::create_directories(opts.out_dir);
  return (fs::path(opts.out_dir) / name).string();
}

asgd::Dataset load_dataset(const json& cfg) {
  return asgd::read_libsvm(require_string(cfg, "dataset"));
}

asgd::LossModel make_model(const json& cfg, const asgd::Dataset& data) {
  const asgd::LossFamily family =
      asgd::loss_family_from_name(require_string(cfg, "family"));
  int num_classes = 0;
  if (family == asgd::LossFamily::Multinomial) {
    num_classes = data.num_classes > 0
                      ? data.num_classes
                      : static_cast<int>(require_integer(cfg, "num_classes"));
  }
  if (!(data.feature_bound > 0.0))
    throw asgd::ValidationError("dataset sidecar has no positive radius");
  return asgd::LossModel(family, data.feature_bound, data.dimension,
                         num_classes);
}

asgd::StepSchedule make_schedule(const json& cfg, const asgd::LossModel& model,
                                 long default_horizon) {
  asgd::StepSchedule sched;
  sched.radius = model.radius();
  sched.horizon = default_horizon;
  if (cfg.contains("schedule")) {
    const json& s = cfg.at("schedule");
    const std::string kind = require_string(s, "kind");
    if (kind == "constant_horizon")
      sched.kind = asgd::StepSchedule::Kind::ConstantHorizon;
    else if (kind == "decaying")
      sched.kind = asgd::StepSchedule::Kind::Decaying;
    else if (kind == "doubling")
      sched.kind = asgd::StepSchedule::Kind::Doubling;
    else
      throw asgd::ValidationError("unknown schedule kind '" + kind + "'");
    if (s.contains("horizon")) sched.horizon = s.at("horizon").get<long>();
    sched.doubling_lower_variant = s.value("doubling_lower_variant", false);
  }
  return sched;
}

asgd::VectorXd parse_theta(const json& cfg, const std::string& key, int dim) {
  if (!cfg.contains(key)) return asgd::VectorXd::Zero(dim);
  const json& v = cfg.at(key);
  if (v.is_number())
    return asgd::VectorXd::Constant(dim, v.get<double>());
  asgd::VectorXd theta = asgd::vector_from_json(v);
  if (theta.size() != dim)
    throw asgd::ValidationError("field '" + key + "' has the wrong dimension");
  return theta;
}

asgd::OptimumCertificate load_certificate(const json& cfg) {
  return asgd::certificate_from_json(
      asgd::read_json_file(require_string(cfg, "certificate")));
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const CommonOpts& opts) {
  const json cfg = load_config(opts);
  asgd::DataGenSpec spec;
  spec.kind = asgd::datagen_kind_from_name(require_string(cfg, "kind"));
  if (spec.kind != asgd::DataGenSpec::Kind::TwoPointToy) {
    spec.dimension = static_cast<int>(require_integer(cfg, "dimension"));
    spec.radius = require_number(cfg, "radius");
    spec.dataset_size = require_integer(cfg, "dataset_size");
  } else {
    spec.dimension = static_cast<int>(cfg.value("dimension", 1));
    spec.radius = cfg.value("radius", 1.0);
  }
  spec.seed = cfg.value("seed", 0ULL);
  spec.correlation_decay = cfg.value("correlation_decay", 1.0);
  spec.eigenvalue_floor = cfg.value("eigenvalue_floor", 1e-8);
  spec.unit_norm_features = cfg.value("unit_norm_features", false);
  spec.mean_sq_norm_fraction = cfg.value("mean_sq_norm_fraction", 0.5);
  spec.noise_scale = cfg.value("noise_scale", 0.5);
  if (cfg.value("norm_mode", "rescale") == std::string("reject"))
    spec.norm_mode = asgd::DataGenSpec::NormMode::Reject;

  if (cfg.contains("theta_true")) {
    spec.theta_true = asgd::vector_from_json(cfg.at("theta_true"));
  } else if (cfg.contains("theta_true_norm")) {
    spec.theta_true = asgd::VectorXd::Constant(
        spec.dimension, cfg.at("theta_true_norm").get<double>() /
                            std::sqrt(static_cast<double>(spec.dimension)));
  }

  const asgd::Dataset data = asgd::generate_dataset(spec);
  const std::string path = out_path(opts, cfg.value("name", "dataset") +
                                              std::string(".libsvm"));
  asgd::write_libsvm(data, path, cfg);
  std::cout << "wrote " << path << " (" << data.size() << " records, d="
            << data.dimension << ", R=" << data.feature_bound << ")\n";
  return 0;
}

// ------------------------------------------------------------------- solve

int cmd_solve(const CommonOpts& opts) {
  const json cfg = load_config(opts);
  const asgd::Dataset data = load_dataset(cfg);
  const asgd::LossModel model = make_model(cfg, data);

  const uint64_t dhash = asgd::dataset_content_hash(data);
  const std::string cache_name = "cert_" + asgd::hash_hex(dhash) + "_" +
                                 asgd::loss_family_name(model.family()) +
                                 ".json";
  const std::string path = out_path(opts, cache_name);

  asgd::OptimumCertificate cert;
  if (fs::exists(path) && !cfg.value("force", false)) {
    cert = asgd::certificate_from_json(asgd::read_json_file(path));
    std::cout << "reusing cached certificate " << path << "\n";
  } else {
    asgd::SolveOptions sopts;
    if (cfg.contains("grad_tolerance"))
      sopts.grad_tolerance = cfg.at("grad_tolerance").get<double>();
    if (cfg.contains("divergence_cap"))
      sopts.divergence_cap = cfg.at("divergence_cap").get<double>();
    if (cfg.contains("max_iterations"))
      sopts.max_iterations = cfg.at("max_iterations").get<int>();
    const asgd::VectorXd theta_init =
        parse_theta(cfg, "theta_init", model.param_dim());
    cert = asgd::solve_batch(model, data, theta_init, sopts);
    json j = asgd::with_config(asgd::certificate_to_json(cert), cfg);
    j["dataset_hash"] = asgd::hash_hex(dhash);
    asgd::write_json_file(path, j);
    std::cout << "wrote " << path << "\n";
  }
  std::cout << "f_star=" << cert.f_star << " mu=" << cert.mu
            << " grad_norm=" << cert.grad_norm_at_star
            << " converged=" << (cert.converged ? "yes" : "no") << "\n";
  return 0;
}

// --------------------------------------------------------------------- run

asgd::RunConfig build_run_config(const json& cfg, const asgd::LossModel& model,
                                 const asgd::OptimumCertificate* cert) {
  asgd::RunConfig rc;
  rc.horizon = require_integer(cfg, "horizon");
  rc.schedule = make_schedule(cfg, model, rc.horizon);
  rc.theta0 = parse_theta(cfg, "theta0", model.param_dim());
  rc.seed = cfg.value("seed", 0ULL);
  rc.record_stride = cfg.value("record_stride", 0L);
  if (cfg.value("sample_mode", "iid") == std::string("sequential"))
    rc.sample_mode = asgd::SampleMode::Sequential;
  rc.trace_martingale = cfg.value("trace_martingale", false);
  rc.certificate = cert;
  return rc;
}

int cmd_run(const CommonOpts& opts) {
  const json cfg = load_config(opts);
  const asgd::Dataset data = load_dataset(cfg);
  const asgd::LossModel model = make_model(cfg, data);

  asgd::OptimumCertificate cert;
  const bool have_cert = cfg.contains("certificate");
  if (have_cert) cert = load_certificate(cfg);

  const asgd::RunConfig rc =
      build_run_config(cfg, model, have_cert ? &cert : nullptr);
  const asgd::Trajectory traj = asgd::run(model, data, rc);

  const std::string csv = out_path(opts, "trajectory.csv");
  asgd::write_trajectory_csv(traj, csv, cfg, &model, &data,
                             have_cert ? &cert : nullptr);
  asgd::write_trajectory_json(traj, out_path(opts, "trajectory.json"), cfg);
  std::cout << "wrote " << csv << "\n";
  std::cout << "final_theta_norm=" << traj.final_theta.norm()
            << " final_average_norm=" << traj.final_average.norm() << "\n";
  return 0;
}

// --------------------------------------------------------------- replicate

int cmd_replicate(const CommonOpts& opts) {
  const json cfg = load_config(opts);
  const asgd::Dataset data = load_dataset(cfg);
  const asgd::LossModel model = make_model(cfg, data);
  const asgd::OptimumCertificate cert = load_certificate(cfg);
  const int m = static_cast<int>(require_integer(cfg, "replicates"));

  const asgd::RunConfig base = build_run_config(cfg, model, nullptr);
  const asgd::ReplicateSet set =
      asgd::run_replicates(model, data, base, m, cert, opts.threads);

  std::ostringstream os;
  os << "# config=" << cfg.dump() << "\n# config_hash="
     << asgd::hash_hex(asgd::fnv1a64(cfg.dump())) << '\n';
  os << "replicate,seed,f_gap,iterate_dist_sq,average_dist_sq,grad_norm_sq,"
        "composite\n";
  for (int r = 0; r < m; ++r)
    os << r << ',' << set.seeds[r] << ',' << asgd::format_double(set.f_gap[r])
       << ',' << asgd::format_double(set.iterate_dist_sq[r]) << ','
       << asgd::format_double(set.average_dist_sq[r]) << ','
       << asgd::format_double(set.grad_norm_sq[r]) << ','
       << asgd::format_double(set.composite[r]) << '\n';
  const std::string csv = out_path(opts, "replicates.csv");
  asgd::write_text_file(csv, os.str());

  json summary;
  for (asgd::Statistic s :
       {asgd::Statistic::FGap, asgd::Statistic::IterateDistSq,
        asgd::Statistic::AverageDistSq, asgd::Statistic::GradNormSq,
        asgd::Statistic::Composite}) {
    const asgd::MomentEstimate est = asgd::empirical_moment(set, s, 1);
    summary[asgd::statistic_name(s)] = {{"mean", est.value},
                                        {"ci_low", est.ci_low},
                                        {"ci_high", est.ci_high}};
  }
  summary["horizon"] = set.horizon;
  summary["gamma"] = set.gamma;
  summary["dist0_sq"] = set.dist0_sq;
  summary["replicates"] = m;
  asgd::write_json_file(out_path(opts, "replicates_summary.json"),
                        asgd::with_config(std::move(summary), cfg));
  std::cout << "wrote " << csv << "\n";
  return 0;
}

// ------------------------------------------------------------------- sweep

int cmd_sweep(const CommonOpts& opts) {
  const json cfg = load_config(opts);
  const asgd::Dataset data = load_dataset(cfg);
  const asgd::LossModel model = make_model(cfg, data);
  const asgd::OptimumCertificate cert = load_certificate(cfg);

  asgd::SweepOptions sopts;
  for (const json& h : require_field(cfg, "horizons"))
    sopts.horizons.push_back(h.get<long>());
  sopts.replicates = static_cast<int>(require_integer(cfg, "replicates"));
  sopts.seed = cfg.value("seed", 0ULL);
  sopts.theta0 = parse_theta(cfg, "theta0", model.param_dim());
  if (cfg.contains("p_grid")) {
    sopts.p_grid.clear();
    for (const json& p : cfg.at("p_grid")) sopts.p_grid.push_back(p.get<int>());
  }
  if (cfg.contains("t_grid")) {
    sopts.t_grid.clear();
    for (const json& t : cfg.at("t_grid"))
      sopts.t_grid.push_back(t.get<double>());
  }
  sopts.threads = opts.threads;

  const std::vector<asgd::bounds::BoundReport> rows =
      asgd::bound_sweep(model, data, cert, sopts);

  const std::string csv = out_path(opts, "bound_reports.csv");
  asgd::write_bound_reports_csv(rows, csv, cfg);
  asgd::write_json_file(
      out_path(opts, "bound_reports.json"),
      asgd::with_config(json{{"reports", asgd::bound_reports_to_json(rows)}},
                        cfg));

  long violated = 0;
  for (const auto& r : rows) violated += r.violated ? 1 : 0;
  std::cout << "wrote " << csv << " (" << rows.size() << " rows, " << violated
            << " violated)\n";
  if (violated > 0 && opts.strict) return 3;
  return 0;
}

// ------------------------------------------------------------------- rates

int cmd_rates(const CommonOpts& opts) {
  const json cfg = load_config(opts);
  const asgd::Dataset data = load_dataset(cfg);
  const asgd::LossModel model = make_model(cfg, data);
  const asgd::OptimumCertificate cert = load_certificate(cfg);
  const asgd::Statistic stat =
      asgd::statistic_from_name(cfg.value("statistic", "f_gap"));
  const int m = static_cast<int>(require_integer(cfg, "replicates"));

  std::vector<double> horizons, estimates;
  for (const json& h : require_field(cfg, "horizons")) {
    const long N = h.get<long>();
    asgd::RunConfig base;
    base.schedule = {asgd::StepSchedule::Kind::ConstantHorizon, N,
                     model.radius()};
    base.theta0 = parse_theta(cfg, "theta0", model.param_dim());
    base.seed = asgd::CounterRng::derive_key(cfg.value("seed", 0ULL),
                                             static_cast<uint64_t>(N));
    base.horizon = N;
    const asgd::ReplicateSet set =
        asgd::run_replicates(model, data, base, m, cert, opts.threads);
    horizons.push_back(static_cast<double>(N));
    estimates.push_back(asgd::empirical_moment(set, stat, 1).value);
  }

  const asgd::RateFit fit = asgd::fit_rate(horizons, estimates);
  const std::string csv = out_path(opts, "rates.csv");
  asgd::write_rate_fit_csv(fit, csv, cfg);
  asgd::write_json_file(
      out_path(opts, "rates.json"),
      asgd::with_config(json{{"statistic", asgd::statistic_name(stat)},
                             {"horizons", fit.horizons},
                             {"estimates", fit.estimates},
                             {"slope", fit.slope},
                             {"intercept", fit.intercept},
                             {"slope_stderr", fit.slope_stderr}},
                        cfg));
  std::cout << "wrote " << csv << "\n";
  std::cout << "slope=" << fit.slope << " stderr=" << fit.slope_stderr << "\n";
  return 0;
}

// --------------------------------------------------- check-selfconcordance

int cmd_check_selfconcordance(const CommonOpts& opts) {
  const json cfg = load_config(opts);
  const asgd::Dataset data = load_dataset(cfg);
  const asgd::LossModel model = make_model(cfg, data);

  const int segments = static_cast<int>(cfg.value("segments", 100));
  const int probes = static_cast<int>(cfg.value("probes", 21));
  const double max_scale = cfg.value("max_segment_scale", 10.0);
  const double guard = cfg.value("guard_floor", -1.0);
  asgd::CounterRng rng(cfg.value("seed", 0ULL), 3);

  std::ostringstream os;
  os << "# config=" << cfg.dump() << "\n# config_hash="
     << asgd::hash_hex(asgd::fnv1a64(cfg.dump())) << '\n';
  os << "segment,max_ratio,used_probes,guard_floor\n";
  double worst = 0.0;
  const int pd = model.param_dim();
  for (int s = 0; s < segments; ++s) {
    asgd::VectorXd theta1(pd), dir(pd);
    for (int i = 0; i < pd; ++i) {
      theta1[i] = rng.next_gaussian() / (2.0 * model.radius());
      dir[i] = rng.next_gaussian();
    }
    dir.normalize();
    const double len =
        (0.5 + (max_scale - 0.5) * rng.next_double()) / model.radius();
    const asgd::SegmentCheckResult res = asgd::check_self_concordance(
        model, data, theta1, theta1 + len * dir, probes, guard);
    worst = std::max(worst, res.max_ratio);
    os << s << ',' << asgd::format_double(res.max_ratio) << ','
       << res.used_probes << ',' << asgd::format_double(res.guard_floor)
       << '\n';
  }
  const std::string csv = out_path(opts, "selfconcordance.csv");
  asgd::write_text_file(csv, os.str());
  std::cout << "wrote " << csv << "\n";
  std::cout << "worst max_ratio=" << worst << " over " << segments
            << " segments\n";
  return 0;
}

// -------------------------------------------------------------- kernel-run

int cmd_kernel_run(const CommonOpts& opts) {
  const json cfg = load_config(opts);
  const asgd::Dataset data = load_dataset(cfg);
  const asgd::LossModel model = make_model(cfg, data);
  const long N = require_integer(cfg, "horizon");

  if (cfg.contains("theta0")) {
    const asgd::VectorXd theta0 =
        parse_theta(cfg, "theta0", model.param_dim());
    if (theta0.norm() != 0.0)
      throw asgd::ValidationError(
          "the dual recursion requires theta0 = 0; a nonzero start is not "
          "a combination of observations");
  }

  asgd::KernelFunction kernel;
  if (cfg.contains("kernel")) {
    const json& k = cfg.at("kernel");
    const std::string kind = require_string(k, "kind");
    if (kind == "linear")
      kernel.kind = asgd::KernelFunction::Kind::Linear;
    else if (kind == "gaussian") {
      kernel.kind = asgd::KernelFunction::Kind::Gaussian;
      kernel.bandwidth = require_number(k, "bandwidth");
    } else {
      throw asgd::ValidationError("unknown kernel kind '" + kind + "'");
    }
  }

  const asgd::StepSchedule sched = make_schedule(cfg, model, N);
  asgd::KernelSgd engine(model, kernel);
  asgd::CounterRng rng(cfg.value("seed", 0ULL), 0);  // same stream as run()
  for (long n = 1; n <= N; ++n) {
    const long idx = static_cast<long>(rng.next_below(data.records.size()));
    engine.step(data.records[idx], sched.step_size(n), idx);
  }

  json j = asgd::dual_state_to_json(engine.state(), kernel, data.source_path);
  j["kernel_evaluations"] = engine.kernel_evaluations();
  asgd::write_json_file(out_path(opts, "dual_state.json"),
                        asgd::with_config(std::move(j), cfg));

  std::cout << "wrote " << out_path(opts, "dual_state.json") << " ("
            << engine.state().steps() << " steps, "
            << engine.kernel_evaluations() << " kernel evaluations)\n";

  if (cfg.value("compare_primal", false)) {
    if (kernel.kind != asgd::KernelFunction::Kind::Linear)
      throw asgd::ValidationError("compare_primal needs the linear kernel");
    asgd::RunConfig rc;
    rc.schedule = sched;
    rc.theta0 = asgd::VectorXd::Zero(model.param_dim());
    rc.seed = cfg.value("seed", 0ULL);
    rc.horizon = N;
    const asgd::Trajectory traj = asgd::run(model, data, rc);
    const asgd::VectorXd dual_theta = engine.reconstruct_primal();
    const double dev = (dual_theta - traj.final_theta).cwiseAbs().maxCoeff();
    std::cout << "primal/dual max deviation=" << dev << "\n";
    asgd::write_json_file(
        out_path(opts, "primal_dual_comparison.json"),
        asgd::with_config(json{{"max_abs_deviation", dev}}, cfg));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"averaged SGD laboratory: engines, oracle, bounds, harness"};
  app.require_subcommand(1);

  CommonOpts opts;
  app.add_option("--config", opts.config_path, "JSON config file");
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--set", opts.overrides,
                 "config override key=value (dotted paths)");
  app.add_option("--seed", opts.seed, "override the config seed")
      ->each([&](const std::string&) { opts.seed_given = true; });
  app.add_option("--threads", opts.threads, "worker threads for replicates");
  app.add_flag("--strict", opts.strict,
               "exit 3 when any bound report is violated");

  int (*handler)(const CommonOpts&) = nullptr;
  app.add_subcommand("gen-data", "generate a synthetic dataset")
      ->callback([&] { handler = cmd_gen_data; });
  app.add_subcommand("solve", "batch optimum certificate (damped Newton)")
      ->callback([&] { handler = cmd_solve; });
  app.add_subcommand("run", "one averaged-SGD trajectory")
      ->callback([&] { handler = cmd_run; });
  app.add_subcommand("replicate", "Monte-Carlo replicate statistics")
      ->callback([&] { handler = cmd_replicate; });
  app.add_subcommand("sweep", "bound reports over a horizon grid")
      ->callback([&] { handler = cmd_sweep; });
  app.add_subcommand("rates", "log-log rate fit of a statistic")
      ->callback([&] { handler = cmd_rates; });
  app.add_subcommand("check-selfconcordance",
                     "segment checks of the curvature-ratio property")
      ->callback([&] { handler = cmd_check_selfconcordance; });
  app.add_subcommand("kernel-run", "dual-weight recursion with a kernel")
      ->callback([&] { handler = cmd_kernel_run; });

  try {
    app.parse(argc, argv);
    return handler(opts);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const asgd::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
