#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ltl/encoders/leaf.hpp"
#include "ltl/error.hpp"

namespace ltl {

enum class ModelKind { kLstm, kSpinn, kSpinnNc, kSpinnPiNt, kRlSpinn, kStGumbel, kRandomTrees, kBalancedTrees };

inline constexpr std::array<const char*, 8> kModelNames = {
    "lstm", "spinn", "spinn-nc", "spinn-pi-nt", "rl-spinn", "st-gumbel", "random-trees", "balanced-trees"};

inline const char* model_name(ModelKind k) { return kModelNames[static_cast<std::size_t>(k)]; }

inline ModelKind parse_model(const std::string& s) {
  for (std::size_t i = 0; i < kModelNames.size(); ++i) {
    if (s == kModelNames[i]) return static_cast<ModelKind>(i);
  }
  throw Error(ErrorKind::kInvalidConfig, "unknown model '" + s + "'");
}

inline bool has_tracker(ModelKind k) {
  return k == ModelKind::kSpinn || k == ModelKind::kSpinnNc || k == ModelKind::kRlSpinn;
}
inline bool uses_gold_transitions(ModelKind k) {
  return k == ModelKind::kSpinn || k == ModelKind::kSpinnNc || k == ModelKind::kSpinnPiNt;
}
inline bool produces_parses(ModelKind k) { return k != ModelKind::kLstm; }

struct ExperimentConfig {
  ModelKind model = ModelKind::kStGumbel;
  LeafKind leaf = LeafKind::kLinear;
  LeafProj leaf_proj = LeafProj::kNone;
  long dim = 32;
  long tracker_dim = 16;
  long pair_dim = 64;
  double lr = 2e-3;
  double l2 = 1e-6;
  double dropout = 0.1;
  double rl_weight = 1.0;  // REINFORCE weight; placeholder default
  double ema_decay = 0.9;
  double transition_weight = 1.0;
  long batch_size = 32;
  long eval_interval = 500;
  long patience = 3;
  long max_steps = 5000;
  std::uint64_t seed = 1;
  std::string train_path;
  std::string dev_path;
  std::string embeddings_path;

  void validate() const {
    auto positive = [](const char* name, double v) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::kInvalidConfig, std::string(name) + " must be positive");
      }
    };
    positive("dim", static_cast<double>(dim));
    positive("pair_dim", static_cast<double>(pair_dim));
    positive("lr", lr);
    positive("batch_size", static_cast<double>(batch_size));
    positive("eval_interval", static_cast<double>(eval_interval));
    positive("max_steps", static_cast<double>(max_steps));
    if (has_tracker(model)) positive("tracker_dim", static_cast<double>(tracker_dim));
    if (!(l2 >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "l2 must be non-negative");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorKind::kInvalidConfig, "dropout must lie in [0, 1)");
    if (patience < 0) throw Error(ErrorKind::kInvalidConfig, "patience must be non-negative");
    if (model == ModelKind::kRlSpinn) {
      if (!(rl_weight >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "rl_weight must be non-negative");
      if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw Error(ErrorKind::kInvalidConfig, "ema_decay must lie in [0, 1)");
    }
    if (uses_gold_transitions(model) && model != ModelKind::kSpinnPiNt && !(transition_weight >= 0.0)) {
      throw Error(ErrorKind::kInvalidConfig, "transition_weight must be non-negative");
    }
    if (leaf == LeafKind::kBiGru && dim % 2 != 0) {
      throw Error(ErrorKind::kOddDim, "bidirectional GRU needs an even dim, got " + std::to_string(dim));
    }
  }
};

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = model_name(c.model);
  j["leaf"] = c.leaf == LeafKind::kBiGru ? "bigru" : "linear";
  j["leaf_proj"] = c.leaf_proj == LeafProj::kLinear ? "linear" : "none";
  j["dim"] = c.dim;
  if (has_tracker(c.model)) j["tracker_dim"] = c.tracker_dim;
  j["pair_dim"] = c.pair_dim;
  j["lr"] = c.lr;
  j["l2"] = c.l2;
  j["dropout"] = c.dropout;
  if (c.model == ModelKind::kRlSpinn) {
    j["rl_weight"] = c.rl_weight;
    j["ema_decay"] = c.ema_decay;
  }
  if (c.model == ModelKind::kSpinn || c.model == ModelKind::kSpinnNc) j["transition_weight"] = c.transition_weight;
  j["batch_size"] = c.batch_size;
  j["eval_interval"] = c.eval_interval;
  j["patience"] = c.patience;
  j["max_steps"] = c.max_steps;
  j["seed"] = c.seed;
  j["train_path"] = c.train_path;
  j["dev_path"] = c.dev_path;
  j["embeddings_path"] = c.embeddings_path;
  return j;
}

// Unknown keys are rejected, as are model-specific keys on other models.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw Error(ErrorKind::kInvalidConfig, "config must be a JSON object");
  try {
    if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& key = it.key();
      const auto& v = it.value();
      if (key == "model") {
        continue;
      } else if (key == "leaf") {
        const auto s = v.get<std::string>();
        if (s != "bigru" && s != "linear") throw Error(ErrorKind::kInvalidConfig, "leaf must be bigru or linear");
        c.leaf = s == "bigru" ? LeafKind::kBiGru : LeafKind::kLinear;
      } else if (key == "leaf_proj") {
        const auto s = v.get<std::string>();
        if (s != "none" && s != "linear") throw Error(ErrorKind::kInvalidConfig, "leaf_proj must be none or linear");
        c.leaf_proj = s == "linear" ? LeafProj::kLinear : LeafProj::kNone;
      } else if (key == "dim") {
        c.dim = v.get<long>();
      } else if (key == "tracker_dim") {
        if (!has_tracker(c.model)) throw Error(ErrorKind::kInvalidConfig, "tracker_dim only applies to tracked SPINN models");
        c.tracker_dim = v.get<long>();
      } else if (key == "pair_dim") {
        c.pair_dim = v.get<long>();
      } else if (key == "lr") {
        c.lr = v.get<double>();
      } else if (key == "l2") {
        c.l2 = v.get<double>();
      } else if (key == "dropout") {
        c.dropout = v.get<double>();
      } else if (key == "rl_weight" || key == "ema_decay") {
        if (c.model != ModelKind::kRlSpinn) throw Error(ErrorKind::kInvalidConfig, key + " only applies to rl-spinn");
        (key == "rl_weight" ? c.rl_weight : c.ema_decay) = v.get<double>();
      } else if (key == "transition_weight") {
        if (c.model != ModelKind::kSpinn && c.model != ModelKind::kSpinnNc) {
          throw Error(ErrorKind::kInvalidConfig, "transition_weight only applies to spinn and spinn-nc");
        }
        c.transition_weight = v.get<double>();
      } else if (key == "batch_size") {
        c.batch_size = v.get<long>();
      } else if (key == "eval_interval") {
        c.eval_interval = v.get<long>();
      } else if (key == "patience") {
        c.patience = v.get<long>();
      } else if (key == "max_steps") {
        c.max_steps = v.get<long>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "train_path") {
        c.train_path = v.get<std::string>();
      } else if (key == "dev_path") {
        c.dev_path = v.get<std::string>();
      } else if (key == "embeddings_path") {
        c.embeddings_path = v.get<std::string>();
      } else {
        throw Error(ErrorKind::kInvalidConfig, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

}  // namespace ltl
