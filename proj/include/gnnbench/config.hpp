#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnnbench/csv.hpp"
#include "gnnbench/models.hpp"

namespace gnnbench {

/// One experiment: a dataset, a model list, and the training protocol.
/// Defaults follow the benchmarked configuration (300 epochs, 10 seeds,
/// Adam 0.01 with weight decay 1e-4, dropout 0.2, 80/20 split).
struct ExperimentConfig {
  std::string name;
  std::string edge_csv;
  std::string node_csv;
  std::vector<std::string> models;
  int epochs = 300;
  int replicates = 10;
  std::uint64_t base_seed = 0;
  double train_fraction = 0.8;
  int hidden_dim = 16;
  double dropout = 0.2;
  double lr = 0.01;
  double weight_decay = 1e-4;
  double gcn2_alpha = 0.1;
  double gcn2_beta = 1.0;
  std::string output_dir;  // defaults to name

  void validate() const {
    if (name.empty()) throw std::invalid_argument("config: 'name' must be non-empty");
    if (edge_csv.empty() || node_csv.empty())
      throw std::invalid_argument("config: 'edge_csv' and 'node_csv' are required");
    if (models.empty()) throw std::invalid_argument("config: 'models' must be non-empty");
    std::set<std::string> seen;
    for (const std::string& m : models) {
      if (!arch_from_name(m)) {
        std::string valid;
        for (const std::string& n : all_arch_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw std::invalid_argument("config: 'models': unknown architecture '" + m +
                                    "' (valid: " + valid + ")");
      }
      if (!seen.insert(m).second)
        throw std::invalid_argument("config: 'models': duplicate entry '" + m + "'");
    }
    if (epochs < 1) throw std::invalid_argument("config: 'epochs' must be >= 1");
    if (replicates < 1) throw std::invalid_argument("config: 'replicates' must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw std::invalid_argument("config: 'train_fraction' must be in (0,1)");
    if (hidden_dim < 1) throw std::invalid_argument("config: 'hidden_dim' must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0))
      throw std::invalid_argument("config: 'dropout' must be in [0,1)");
    if (!(lr > 0.0)) throw std::invalid_argument("config: 'lr' must be positive");
    if (weight_decay < 0.0) throw std::invalid_argument("config: 'weight_decay' must be >= 0");
  }

  ModelSpec model_spec(const std::string& model_name, int in_dim) const {
    const auto arch = arch_from_name(model_name);
    if (!arch) throw std::invalid_argument("config: unknown architecture '" + model_name + "'");
    ModelSpec spec = make_model_spec(*arch, in_dim);
    spec.hidden_dim = hidden_dim;
    spec.dropout = dropout;
    spec.alpha = gcn2_alpha;
    spec.beta = gcn2_beta;
    return spec;
  }
};

namespace detail {
template <typename T>
T config_get(const nlohmann::json& j, const std::string& key, const char* type_name) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("config: '" + key + "': expected " + type_name);
  }
}
}  // namespace detail

inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  static const std::set<std::string> known = {
      "name",      "edge_csv",   "node_csv",       "models",     "epochs",
      "replicates", "base_seed", "train_fraction", "hidden_dim", "dropout",
      "lr",        "weight_decay", "gcn2_alpha",   "gcn2_beta",  "output_dir"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

  ExperimentConfig cfg;
  cfg.name = detail::config_get<std::string>(j, "name", "string");
  cfg.edge_csv = detail::config_get<std::string>(j, "edge_csv", "string");
  cfg.node_csv = detail::config_get<std::string>(j, "node_csv", "string");
  cfg.models = detail::config_get<std::vector<std::string>>(j, "models", "array of strings");
  if (j.contains("epochs")) cfg.epochs = detail::config_get<int>(j, "epochs", "integer");
  if (j.contains("replicates"))
    cfg.replicates = detail::config_get<int>(j, "replicates", "integer");
  if (j.contains("base_seed"))
    cfg.base_seed = detail::config_get<std::uint64_t>(j, "base_seed", "unsigned integer");
  if (j.contains("train_fraction"))
    cfg.train_fraction = detail::config_get<double>(j, "train_fraction", "number");
  if (j.contains("hidden_dim"))
    cfg.hidden_dim = detail::config_get<int>(j, "hidden_dim", "integer");
  if (j.contains("dropout")) cfg.dropout = detail::config_get<double>(j, "dropout", "number");
  if (j.contains("lr")) cfg.lr = detail::config_get<double>(j, "lr", "number");
  if (j.contains("weight_decay"))
    cfg.weight_decay = detail::config_get<double>(j, "weight_decay", "number");
  if (j.contains("gcn2_alpha"))
    cfg.gcn2_alpha = detail::config_get<double>(j, "gcn2_alpha", "number");
  if (j.contains("gcn2_beta"))
    cfg.gcn2_beta = detail::config_get<double>(j, "gcn2_beta", "number");
  cfg.output_dir = j.contains("output_dir")
                       ? detail::config_get<std::string>(j, "output_dir", "string")
                       : cfg.name;
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config: " + path + ": " + e.what());
  }
  return parse_config_json(j);
}

/// Every field spelled out, so the echo re-parses to an equal config.
inline std::string resolved_config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["edge_csv"] = cfg.edge_csv;
  j["node_csv"] = cfg.node_csv;
  j["models"] = cfg.models;
  j["epochs"] = cfg.epochs;
  j["replicates"] = cfg.replicates;
  j["base_seed"] = cfg.base_seed;
  j["train_fraction"] = cfg.train_fraction;
  j["hidden_dim"] = cfg.hidden_dim;
  j["dropout"] = cfg.dropout;
  j["lr"] = cfg.lr;
  j["weight_decay"] = cfg.weight_decay;
  j["gcn2_alpha"] = cfg.gcn2_alpha;
  j["gcn2_beta"] = cfg.gcn2_beta;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.name == b.name && a.edge_csv == b.edge_csv && a.node_csv == b.node_csv &&
         a.models == b.models && a.epochs == b.epochs && a.replicates == b.replicates &&
         a.base_seed == b.base_seed && a.train_fraction == b.train_fraction &&
         a.hidden_dim == b.hidden_dim && a.dropout == b.dropout && a.lr == b.lr &&
         a.weight_decay == b.weight_decay && a.gcn2_alpha == b.gcn2_alpha &&
         a.gcn2_beta == b.gcn2_beta && a.output_dir == b.output_dir;
}

}  // namespace gnnbench
