#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "asgd/bounds.hpp"
#include "asgd/datagen.hpp"
#include "asgd/kernel.hpp"
#include "asgd/oracle.hpp"
#include "asgd/sgd.hpp"
#include "asgd/stats.hpp"
#include "asgd/types.hpp"

namespace asgd {

using nlohmann::json;

// FNV-1a over the bytes of a string; used as the content hash embedded in
// artifacts and as the dataset cache key.
uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(uint64_t h);

std::string format_double(double v);  // shortest round-trip decimal

json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const json& j);

// Dataset file format: one record per line, "label index:value ...", with
// 1-based feature indices and zeros omitted, plus a JSON sidecar named
// <path>.json carrying {radius, dimension, size, generator}.
void write_libsvm(const Dataset& data, const std::string& path,
                  const json& generator_spec = json::object());
Dataset read_libsvm(const std::string& path);

uint64_t dataset_content_hash(const Dataset& data);

json certificate_to_json(const OptimumCertificate& cert);
OptimumCertificate certificate_from_json(const json& j);

json dual_state_to_json(const DualState& state, const KernelFunction& kernel,
                        const std::string& dataset_path);
DualState dual_state_from_json(const json& j);

// Trajectory CSV: step, then iterate/average components for small
// dimensions (norms otherwise), then f-gap and gradient norm columns when
// a certificate is available. Leading comment lines carry the resolved
// config and its hash so every artifact names the run that produced it.
void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const json& resolved_config,
                          const LossModel* model = nullptr,
                          const Dataset* data = nullptr,
                          const OptimumCertificate* cert = nullptr,
                          int component_limit = 8);
void write_trajectory_json(const Trajectory& traj, const std::string& path,
                           const json& resolved_config);

void write_bound_reports_csv(const std::vector<bounds::BoundReport>& rows,
                             const std::string& path,
                             const json& resolved_config);
json bound_reports_to_json(const std::vector<bounds::BoundReport>& rows);

void write_rate_fit_csv(const RateFit& fit, const std::string& path,
                        const json& resolved_config);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

// Attaches {"config": cfg, "config_hash": ...} to an artifact object.
json with_config(json artifact, const json& resolved_config);

}  // namespace asgd
