#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltl/encoders/embeddings.hpp"
#include "ltl/error.hpp"
#include "ltl/gradcore/adam.hpp"
#include "ltl/gradcore/checkpoint.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"
#include "ltl/parsemetrics/parse_set.hpp"
#include "ltl/trainer/config.hpp"
#include "ltl/trainer/corpus.hpp"
#include "ltl/trainer/model.hpp"
#include "ltl/trainer/reinforce.hpp"

namespace ltl {

inline std::string sentence_key(const std::string& pair_id, int which) {
  return pair_id + ":" + std::to_string(which);
}

template <class T>
struct PairForward {
  SentenceEncoding<T> s1;
  SentenceEncoding<T> s2;
  Expr<T> logits;
};

template <class T>
PairForward<T> forward_pair(Graph<T>& g, const PairModel<T>& model, const Example& ex, const EmbeddingTable& table,
                            Phase phase, RngStream& rngs) {
  PairForward<T> f;
  f.s1 = model.encode(g, ex.s1, table, phase, rngs, sentence_key(ex.id, 1));
  f.s2 = model.encode(g, ex.s2, table, phase, rngs, sentence_key(ex.id, 2));
  f.logits = model.classify(g, f.s1.vec, f.s2.vec, phase, rngs);
  return f;
}

inline int predicted_label(const Eigen::MatrixXd& logits) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (logits(i, 0) > logits(best, 0)) best = i;
  }
  return best;
}

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  ParseSet parses;
};

// Eval-mode accuracy and parses. Deterministic and read-only on the model.
template <class T>
EvalResult evaluate(const PairModel<T>& model, const Corpus& dev, const EmbeddingTable& table) {
  EvalResult r;
  RngStream unused(0);
  const bool parses = produces_parses(model.config().model);
  r.parses.set_provenance(model_name(model.config().model) + std::string(" seed ") +
                          std::to_string(model.config().seed));
  for (const auto& ex : dev.examples) {
    Graph<T> g(false);
    auto f = forward_pair(g, model, ex, table, Phase::kEval, unused);
    if (predicted_label(f.logits.value().template cast<double>()) == static_cast<int>(ex.label)) ++r.correct;
    ++r.total;
    if (parses) {
      r.parses.add(sentence_key(ex.id, 1), *f.s1.tree, ex.s1.tokens);
      r.parses.add(sentence_key(ex.id, 2), *f.s2.tree, ex.s2.tokens);
    }
  }
  r.accuracy = r.total == 0 ? 0.0 : 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

// Loss of one training example; gradients accumulate into the store.
struct ExampleStats {
  double loss = 0.0;
  double reward = 0.0;
  bool correct = false;
};

template <class T>
ExampleStats train_example(PairModel<T>& model, const Example& ex, const EmbeddingTable& table, RngStream& rngs,
                           double baseline) {
  const auto& cfg = model.config();
  Graph<T> g;
  auto f = forward_pair(g, model, ex, table, Phase::kTrain, rngs);
  auto loss = cross_entropy(f.logits, static_cast<Eigen::Index>(ex.label));
  ExampleStats st;
  st.reward = -static_cast<double>(loss.scalar());
  st.correct = predicted_label(f.logits.value().template cast<double>()) == static_cast<int>(ex.label);
  std::vector<Expr<T>> log_probs = f.s1.log_probs;
  log_probs.insert(log_probs.end(), f.s2.log_probs.begin(), f.s2.log_probs.end());
  if ((cfg.model == ModelKind::kSpinn || cfg.model == ModelKind::kSpinnNc) && cfg.transition_weight != 0.0) {
    loss = sub(loss, scale(add(log_probs), cfg.transition_weight));
  } else if (cfg.model == ModelKind::kRlSpinn) {
    loss = add(loss, policy_loss(g, log_probs, st.reward - baseline, cfg.rl_weight));
  }
  st.loss = static_cast<double>(loss.scalar());
  if (!std::isfinite(st.loss)) throw Error(ErrorKind::kNaNGuard, "non-finite loss on example '" + ex.id + "'");
  g.backward(loss);
  return st;
}

struct TrainOptions {
  std::string out_dir;  // checkpoint.json and dev_parses.txt go here when set
  std::ostream* log = nullptr;
};

struct RunResult {
  ExperimentConfig config;
  double best_dev_accuracy = 0.0;
  long best_step = 0;
  long steps = 0;
  int evaluations = 0;
  double majority_rate = 0.0;
  double baseline = 0.0;
  std::vector<std::pair<long, double>> history;
  std::string checkpoint_path;
  ParseSet dev_parses;
  nlohmann::json checkpoint;  // best snapshot
};

inline nlohmann::ordered_json to_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["config"] = to_json(r.config);
  j["best_dev_accuracy"] = r.best_dev_accuracy;
  j["best_step"] = r.best_step;
  j["steps"] = r.steps;
  j["evaluations"] = r.evaluations;
  j["majority_rate"] = r.majority_rate;
  if (r.config.model == ModelKind::kRlSpinn) j["baseline"] = r.baseline;
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const auto& [step, acc] : r.history) hist.push_back({step, acc});
  j["history"] = std::move(hist);
  j["checkpoint"] = r.checkpoint_path;
  return j;
}

// Training order for one epoch: shuffled, then sorted by length inside
// windows of a few batches so that a batch holds similar lengths, then the
// batches themselves are shuffled.
inline std::vector<std::vector<std::size_t>> bucketed_batches(const Corpus& corpus, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  auto length = [&](std::size_t i) {
    return std::max(corpus.examples[i].s1.size(), corpus.examples[i].s2.size());
  };
  const std::size_t window = batch_size * 16;
  for (std::size_t start = 0; start < order.size(); start += window) {
    const auto end = std::min(order.size(), start + window);
    std::stable_sort(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(end),
                     [&](std::size_t a, std::size_t b) { return length(a) < length(b); });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    batches.emplace_back(order.begin() + static_cast<long>(start),
                         order.begin() + static_cast<long>(std::min(order.size(), start + batch_size)));
  }
  for (std::size_t i = batches.size(); i > 1; --i) std::swap(batches[i - 1], batches[rng.below(i)]);
  return batches;
}

template <class T>
nlohmann::json model_checkpoint(const PairModel<T>& model, const RngStream& rngs, const nlohmann::json& run) {
  nlohmann::json extra;
  extra["config"] = to_json(model.config());
  extra["emb_dim"] = model.emb_dim();
  extra["run"] = run;
  return checkpoint_to_json(model.store(), &rngs, extra);
}

inline ExperimentConfig checkpoint_config(const nlohmann::json& ckpt) {
  return config_from_json(ckpt.at("extra").at("config"));
}

// Rebuilds a model from a checkpoint written by model_checkpoint.
template <class T>
PairModel<T> load_model(const nlohmann::json& ckpt) {
  PairModel<T> model(checkpoint_config(ckpt), ckpt.at("extra").at("emb_dim").get<Eigen::Index>());
  checkpoint_from_json(ckpt, model.store());
  return model;
}

// Adam on per-example graphs, gradients averaged over each batch; dev
// evaluation every eval_interval steps with early stopping on dev accuracy.
template <class T>
RunResult train(const ExperimentConfig& cfg, const Corpus& train_set, const Corpus& dev, const EmbeddingTable& table,
                const TrainOptions& opts = {}) {
  cfg.validate();
  if (train_set.size() == 0) throw Error(ErrorKind::kData, "empty training corpus");
  if (dev.size() == 0) throw Error(ErrorKind::kData, "empty dev corpus");
  PairModel<T> model(cfg, table.dim());
  RngStream rngs(cfg.seed);
  EmaBaseline baseline(cfg.ema_decay);
  AdamConfig adam;
  adam.lr = cfg.lr;
  adam.l2 = cfg.l2;

  RunResult result;
  result.config = cfg;
  result.majority_rate = dev.majority_rate();
  long since_best = 0;
  bool improved_once = false;
  bool stop = false;
  long step = 0;
  double window_loss = 0.0;
  std::size_t window_n = 0;

  auto run_eval = [&]() {
    auto ev = evaluate(model, dev, table);
    ++result.evaluations;
    result.history.emplace_back(step, ev.accuracy);
    if (opts.log != nullptr) {
      *opts.log << model_name(cfg.model) << " step " << step << " train_loss "
                << (window_n ? window_loss / static_cast<double>(window_n) : 0.0) << " dev_acc " << ev.accuracy
                << '\n';
    }
    window_loss = 0.0;
    window_n = 0;
    if (!improved_once || ev.accuracy > result.best_dev_accuracy) {
      improved_once = true;
      since_best = 0;
      result.best_dev_accuracy = ev.accuracy;
      result.best_step = step;
      result.dev_parses = std::move(ev.parses);
      result.baseline = baseline.value();
      result.checkpoint = model_checkpoint(model, rngs,
                                           {{"best_step", step}, {"dev_accuracy", ev.accuracy},
                                            {"baseline", baseline.value()}});
    } else {
      ++since_best;
    }
    if (since_best >= cfg.patience) stop = true;
  };

  while (!stop && step < cfg.max_steps) {
    for (const auto& batch : bucketed_batches(train_set, static_cast<std::size_t>(cfg.batch_size), rngs.stream("data"))) {
      double reward_sum = 0.0;
      for (std::size_t idx : batch) {
        const auto st = train_example(model, train_set.examples[idx], table, rngs, baseline.value());
        reward_sum += st.reward;
        window_loss += st.loss;
        ++window_n;
      }
      const T inv = static_cast<T>(1.0 / static_cast<double>(batch.size()));
      for (std::size_t k = 0; k < model.store().size(); ++k) model.store()[k].grad *= inv;
      adam_step(model.store(), adam);
      if (cfg.model == ModelKind::kRlSpinn) baseline.update(reward_sum / static_cast<double>(batch.size()));
      ++step;
      if (step % cfg.eval_interval == 0) run_eval();
      if (stop || step >= cfg.max_steps) break;
    }
  }
  if (result.evaluations == 0 || result.history.back().first != step) {
    if (!stop) run_eval();
  }
  result.steps = step;

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    result.checkpoint_path = (std::filesystem::path(opts.out_dir) / "checkpoint.json").string();
    write_json_file(result.checkpoint_path, result.checkpoint);
    if (!result.dev_parses.empty()) {
      result.dev_parses.save((std::filesystem::path(opts.out_dir) / "dev_parses.txt").string());
    }
  }
  return result;
}

}  // namespace ltl
