#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ltl/encoders/embeddings.hpp"
#include "ltl/encoders/leaf.hpp"
#include "ltl/encoders/lstm.hpp"
#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/rng.hpp"
#include "ltl/latentparsers/gumbel.hpp"
#include "ltl/latentparsers/spinn.hpp"
#include "ltl/trainer/classifier.hpp"
#include "ltl/trainer/config.hpp"
#include "ltl/trainer/corpus.hpp"
#include "ltl/treekit/generators.hpp"

namespace ltl {

enum class Phase { kTrain, kEval };

template <class T>
struct SentenceEncoding {
  Expr<T> vec;
  std::optional<BinaryTree> tree;
  std::vector<Expr<T>> log_probs;  // chosen transitions, when a policy chose them
  std::vector<std::array<double, 2>> transition_probs;
  std::vector<Eigen::VectorXd> distributions;
};

// Seed of the tree drawn for a sentence by the random-trees model at
// evaluation time, so that evaluation is deterministic per sentence.
inline std::uint64_t eval_tree_seed(std::uint64_t seed, const std::string& key) {
  return derive_seed(seed, "eval-tree:" + key);
}

// Sentence encoder of the configured kind plus the pair classifier, over one
// parameter store.
template <class T>
class PairModel {
 public:
  PairModel(const ExperimentConfig& cfg, Eigen::Index emb_dim) : cfg_(cfg), emb_dim_(emb_dim) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, "init"));
    const Eigen::Index d = cfg.dim;
    if (cfg.model == ModelKind::kLstm) {
      lstm_ = LstmEncoder<T>(store_, "lstm", emb_dim, d, rng);
    } else {
      leaf_ = LeafEncoder<T>(store_, "leaf", {cfg.leaf, cfg.leaf_proj, d, emb_dim}, rng);
      switch (cfg.model) {
        case ModelKind::kSpinn:
        case ModelKind::kRlSpinn:
          spinn_ = Spinn<T>(store_, "spinn", SpinnVariant::kFull, d, cfg.tracker_dim, rng);
          break;
        case ModelKind::kSpinnNc:
          spinn_ = Spinn<T>(store_, "spinn", SpinnVariant::kNoConnection, d, cfg.tracker_dim, rng);
          break;
        case ModelKind::kStGumbel:
          gumbel_ = StGumbel<T>(store_, "gumbel", d, rng);
          break;
        default:
          spinn_ = Spinn<T>(store_, "spinn", SpinnVariant::kNoTracking, d, 0, rng);
          break;
      }
    }
    classifier_ = PairClassifier<T>(store_, "pair", 4 * d, cfg.pair_dim, rng);
  }

  PairModel(const PairModel&) = delete;
  PairModel& operator=(const PairModel&) = delete;
  PairModel(PairModel&&) noexcept = default;

  const ExperimentConfig& config() const { return cfg_; }
  Eigen::Index emb_dim() const { return emb_dim_; }
  ParameterStore<T>& store() { return store_; }
  const ParameterStore<T>& store() const { return store_; }
  const Spinn<T>& spinn() const { return spinn_; }
  const StGumbel<T>& gumbel() const { return gumbel_; }

  // `key` identifies the sentence (for per-sentence deterministic trees).
  SentenceEncoding<T> encode(Graph<T>& g, const Sentence& s, const EmbeddingTable& table, Phase phase,
                             RngStream& rngs, const std::string& key) const {
    SentenceEncoding<T> out;
    const bool train = phase == Phase::kTrain;
    if (cfg_.model == ModelKind::kLstm) {
      out.vec = lstm_.encode(g, s.tokens, table);
      return out;
    }
    const auto leaves = leaf_.encode(g, s.tokens, table);
    const std::size_t n = s.tokens.size();
    auto run_spinn = [&](TransitionMode mode, const TransitionSequence* ops, Rng* rng) {
      auto r = spinn_.encode(g, leaves, mode, ops, rng);
      out.vec = r.sentence;
      out.tree = std::move(r.tree);
      out.log_probs = std::move(r.log_probs);
      out.transition_probs = std::move(r.probs);
    };
    auto gold = [&]() {
      if (!s.parse) throw Error(ErrorKind::kTransitionsRequired, "sentence '" + key + "' has no binary parse");
      return tree_to_transitions(*s.parse);
    };
    switch (cfg_.model) {
      case ModelKind::kSpinn:
      case ModelKind::kSpinnNc:
        if (train) {
          const auto ops = gold();
          run_spinn(TransitionMode::kGiven, &ops, nullptr);
        } else {
          run_spinn(TransitionMode::kPredict, nullptr, nullptr);
        }
        break;
      case ModelKind::kRlSpinn:
        run_spinn(train ? TransitionMode::kSample : TransitionMode::kPredict, nullptr,
                  train ? &rngs.stream("policy") : nullptr);
        break;
      case ModelKind::kSpinnPiNt: {
        const auto ops = gold();
        run_spinn(TransitionMode::kGiven, &ops, nullptr);
        break;
      }
      case ModelKind::kRandomTrees: {
        Rng eval_rng(eval_tree_seed(cfg_.seed, key));
        const auto ops = tree_to_transitions(gen_random_transitions(n, train ? rngs.stream("trees") : eval_rng));
        run_spinn(TransitionMode::kGiven, &ops, nullptr);
        out.log_probs.clear();
        break;
      }
      case ModelKind::kBalancedTrees: {
        const auto ops = tree_to_transitions(gen_balanced(n));
        run_spinn(TransitionMode::kGiven, &ops, nullptr);
        break;
      }
      case ModelKind::kStGumbel: {
        auto r = gumbel_.encode(g, leaves, train, train ? &rngs.stream("gumbel") : nullptr);
        out.vec = r.sentence;
        out.tree = std::move(r.tree);
        out.distributions = std::move(r.distributions);
        break;
      }
      case ModelKind::kLstm:
        break;
    }
    return out;
  }

  Expr<T> classify(Graph<T>& g, Expr<T> u, Expr<T> v, Phase phase, RngStream& rngs) const {
    return classifier_.logits(g, pair_features(u, v), cfg_.dropout,
                              phase == Phase::kTrain ? &rngs.stream("dropout") : nullptr);
  }

 private:
  ExperimentConfig cfg_;
  Eigen::Index emb_dim_;
  ParameterStore<T> store_;
  LstmEncoder<T> lstm_;
  LeafEncoder<T> leaf_;
  Spinn<T> spinn_;
  StGumbel<T> gumbel_;
  PairClassifier<T> classifier_;
};

}  // namespace ltl
