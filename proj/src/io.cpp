#include "asgd/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace asgd {

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_to_json(const VectorXd& v) {
  json arr = json::array();
  for (long i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("expected a JSON array of reals");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << contents;
  if (!out) throw ValidationError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
  return json::parse(read_text_file(path));
}

json with_config(json artifact, const json& resolved_config) {
  artifact["config"] = resolved_config;
  artifact["config_hash"] = hash_hex(fnv1a64(resolved_config.dump()));
  return artifact;
}

void write_libsvm(const Dataset& data, const std::string& path,
                  const json& generator_spec) {
  std::ostringstream os;
  for (const Observation& obs : data.records) {
    os << format_double(obs.label);
    for (long k = 0; k < obs.features.size(); ++k)
      if (obs.features[k] != 0.0)
        os << ' ' << (k + 1) << ':' << format_double(obs.features[k]);
    os << '\n';
  }
  write_text_file(path, os.str());

  json sidecar = {{"radius", data.feature_bound},
                  {"dimension", data.dimension},
                  {"size", data.size()},
                  {"generator", generator_spec}};
  if (data.num_classes > 0) sidecar["num_classes"] = data.num_classes;
  write_json_file(path + ".json", sidecar);
}

Dataset read_libsvm(const std::string& path) {
  Dataset data;
  data.source_path = path;

  const json sidecar = read_json_file(path + ".json");
  if (!sidecar.contains("radius") || !sidecar.contains("dimension"))
    throw ValidationError("dataset sidecar must declare radius and dimension");
  data.feature_bound = sidecar.at("radius").get<double>();
  data.dimension = sidecar.at("dimension").get<int>();
  if (sidecar.contains("num_classes"))
    data.num_classes = sidecar.at("num_classes").get<int>();

  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open: " + path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Observation obs;
    obs.features = VectorXd::Zero(data.dimension);
    if (!(ls >> obs.label)) {
      std::ostringstream os;
      os << path << ":" << lineno << ": missing label";
      throw ValidationError(os.str());
    }
    std::string tok;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        std::ostringstream os;
        os << path << ":" << lineno << ": bad feature token '" << tok << "'";
        throw ValidationError(os.str());
      }
      const long idx = std::stol(tok.substr(0, colon));
      const double val = std::stod(tok.substr(colon + 1));
      if (idx < 1 || idx > data.dimension) {
        std::ostringstream os;
        os << path << ":" << lineno << ": feature index " << idx
           << " outside 1.." << data.dimension;
        throw ValidationError(os.str());
      }
      obs.features[idx - 1] = val;
    }
    data.records.push_back(std::move(obs));
  }
  if (sidecar.contains("size") &&
      sidecar.at("size").get<long>() != data.size())
    throw ValidationError("dataset size disagrees with its sidecar");
  return data;
}

uint64_t dataset_content_hash(const Dataset& data) {
  std::ostringstream os;
  os << data.dimension << '|' << format_double(data.feature_bound) << '|'
     << data.num_classes << '|';
  for (const Observation& obs : data.records) {
    os << format_double(obs.label);
    for (long k = 0; k < obs.features.size(); ++k)
      os << ',' << format_double(obs.features[k]);
    os << ';';
  }
  return fnv1a64(os.str());
}

json certificate_to_json(const OptimumCertificate& cert) {
  return {{"theta_star", vector_to_json(cert.theta_star)},
          {"f_star", cert.f_star},
          {"grad_norm_at_star", cert.grad_norm_at_star},
          {"mu", cert.mu},
          {"hessian_condition_estimate", cert.hessian_condition_estimate},
          {"converged", cert.converged},
          {"tolerance", cert.tolerance}};
}

OptimumCertificate certificate_from_json(const json& j) {
  OptimumCertificate cert;
  cert.theta_star = vector_from_json(j.at("theta_star"));
  cert.f_star = j.at("f_star").get<double>();
  cert.grad_norm_at_star = j.at("grad_norm_at_star").get<double>();
  cert.mu = j.at("mu").get<double>();
  cert.hessian_condition_estimate =
      j.value("hessian_condition_estimate", 0.0);
  cert.converged = j.at("converged").get<bool>();
  cert.tolerance = j.value("tolerance", 0.0);
  return cert;
}

json dual_state_to_json(const DualState& state, const KernelFunction& kernel,
                        const std::string& dataset_path) {
  json j;
  j["kernel"] = {{"kind", kernel.kind == KernelFunction::Kind::Linear
                              ? "linear"
                              : "gaussian"}};
  if (kernel.kind == KernelFunction::Kind::Gaussian)
    j["kernel"]["bandwidth"] = kernel.bandwidth;

  json weights = json::array();
  for (const VectorXd& w : state.weights) weights.push_back(vector_to_json(w));
  j["weights"] = weights;

  // File-backed support is stored as row indices into the dataset file;
  // otherwise the features are embedded.
  bool file_backed = !dataset_path.empty();
  for (long idx : state.support_indices)
    if (idx < 0) file_backed = false;
  if (file_backed) {
    j["support"] = {{"dataset_path", dataset_path},
                    {"indices", state.support_indices}};
  } else {
    json feats = json::array();
    for (const VectorXd& x : state.support) feats.push_back(vector_to_json(x));
    j["support"] = {{"features", feats}};
  }
  return j;
}

DualState dual_state_from_json(const json& j) {
  DualState state;
  for (const json& w : j.at("weights"))
    state.weights.push_back(vector_from_json(w));
  const json& sup = j.at("support");
  if (sup.contains("indices")) {
    const Dataset data = read_libsvm(sup.at("dataset_path").get<std::string>());
    for (const json& idx : sup.at("indices")) {
      const long i = idx.get<long>();
      if (i < 0 || i >= data.size())
        throw ValidationError("support index outside the dataset");
      state.support.push_back(data.records[i].features);
      state.support_indices.push_back(i);
    }
  } else {
    for (const json& x : sup.at("features")) {
      state.support.push_back(vector_from_json(x));
      state.support_indices.push_back(-1);
    }
  }
  if (state.support.size() != state.weights.size())
    throw ValidationError("dual state weight/support count mismatch");
  return state;
}

namespace {

void write_config_comment(std::ostringstream& os, const json& cfg) {
  const std::string dumped = cfg.dump();
  os << "# config=" << dumped << '\n';
  os << "# config_hash=" << hash_hex(fnv1a64(dumped)) << '\n';
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const json& resolved_config, const LossModel* model,
                          const Dataset* data, const OptimumCertificate* cert,
                          int component_limit) {
  std::ostringstream os;
  write_config_comment(os, resolved_config);

  const long d = traj.final_theta.size();
  const bool components = d <= component_limit;
  os << "step";
  if (components) {
    for (long k = 0; k < d; ++k) os << ",theta_" << k;
    for (long k = 0; k < d; ++k) os << ",avg_" << k;
  } else {
    os << ",theta_norm,avg_norm";
  }
  const bool scored = model != nullptr && data != nullptr && cert != nullptr;
  if (scored) os << ",f_gap,grad_norm";
  os << '\n';

  for (size_t i = 0; i < traj.steps.size(); ++i) {
    os << traj.steps[i];
    const VectorXd& th = traj.iterates[i];
    const VectorXd& av = traj.averages[i];
    if (components) {
      for (long k = 0; k < d; ++k) os << ',' << format_double(th[k]);
      for (long k = 0; k < d; ++k) os << ',' << format_double(av[k]);
    } else {
      os << ',' << format_double(th.norm()) << ',' << format_double(av.norm());
    }
    if (scored) {
      os << ',' << format_double(full_value(*model, *data, av) - cert->f_star);
      os << ',' << format_double(full_gradient(*model, *data, av).norm());
    }
    os << '\n';
  }
  write_text_file(path, os.str());
}

void write_trajectory_json(const Trajectory& traj, const std::string& path,
                           const json& resolved_config) {
  json j;
  j["steps"] = traj.steps;
  json its = json::array(), avs = json::array();
  for (const VectorXd& v : traj.iterates) its.push_back(vector_to_json(v));
  for (const VectorXd& v : traj.averages) avs.push_back(vector_to_json(v));
  j["iterates"] = its;
  j["averages"] = avs;
  j["final_theta"] = vector_to_json(traj.final_theta);
  j["final_average"] = vector_to_json(traj.final_average);
  if (!traj.trace_m.empty()) {
    j["trace"] = {{"m", traj.trace_m},
                  {"a", traj.trace_a},
                  {"fgap_prev", traj.trace_fgap_prev},
                  {"dist_sq", traj.trace_dist_sq}};
  }
  write_json_file(path, with_config(std::move(j), resolved_config));
}

void write_bound_reports_csv(const std::vector<bounds::BoundReport>& rows,
                             const std::string& path,
                             const json& resolved_config) {
  std::ostringstream os;
  write_config_comment(os, resolved_config);
  os << "bound_name,analytic_value,empirical_value,violated,margin\n";
  for (const auto& r : rows) {
    os << r.bound_name << ',' << format_double(r.analytic_value) << ','
       << format_double(r.empirical_value) << ',' << (r.violated ? 1 : 0)
       << ',' << format_double(r.margin) << '\n';
  }
  write_text_file(path, os.str());
}

json bound_reports_to_json(const std::vector<bounds::BoundReport>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"bound_name", r.bound_name},
                   {"analytic_value", r.analytic_value},
                   {"empirical_value", r.empirical_value},
                   {"violated", r.violated},
                   {"margin", r.margin}});
  return arr;
}

void write_rate_fit_csv(const RateFit& fit, const std::string& path,
                        const json& resolved_config) {
  std::ostringstream os;
  write_config_comment(os, resolved_config);
  os << "horizon,estimate\n";
  for (size_t i = 0; i < fit.horizons.size(); ++i)
    os << format_double(fit.horizons[i]) << ','
       << format_double(fit.estimates[i]) << '\n';
  os << "# slope=" << format_double(fit.slope)
     << " intercept=" << format_double(fit.intercept)
     << " slope_stderr=" << format_double(fit.slope_stderr) << '\n';
  write_text_file(path, os.str());
}

}  // namespace asgd
