#pragma once

#include <string>
#include <vector>

#include "ltl/encoders/cells.hpp"
#include "ltl/encoders/embeddings.hpp"
#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"

namespace ltl {

enum class LeafKind { kBiGru, kLinear };

// kLinear projects embeddings to the model width before the GRU; kNone feeds
// them to the GRU as they are.
enum class LeafProj { kNone, kLinear };

struct LeafEncoderConfig {
  LeafKind kind = LeafKind::kLinear;
  LeafProj proj = LeafProj::kNone;
  Eigen::Index dim = 32;
  Eigen::Index emb_dim = 32;
};

// Per-token context encoder: either a plain linear map or a bidirectional GRU
// with two dim/2 halves concatenated per token.
template <class T>
class LeafEncoder {
 public:
  LeafEncoder() = default;
  LeafEncoder(ParameterStore<T>& store, const std::string& name, const LeafEncoderConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.kind == LeafKind::kLinear) {
      proj_ = &store.add(name + ".W", cfg.dim, cfg.emb_dim, Init::kGlorot, rng);
      return;
    }
    if (cfg.dim % 2 != 0) {
      throw Error(ErrorKind::kOddDim, "bidirectional GRU needs an even width, got " + std::to_string(cfg.dim));
    }
    Eigen::Index in = cfg.emb_dim;
    if (cfg.proj == LeafProj::kLinear) {
      proj_ = &store.add(name + ".proj", cfg.dim, cfg.emb_dim, Init::kGlorot, rng);
      in = cfg.dim;
    }
    fwd_ = GruCell<T>(store, name + ".fwd", in, cfg.dim / 2, rng);
    bwd_ = GruCell<T>(store, name + ".bwd", in, cfg.dim / 2, rng);
  }

  const LeafEncoderConfig& config() const { return cfg_; }

  // One dim x 1 expression per input column.
  std::vector<Expr<T>> encode(Graph<T>& g, const std::vector<Expr<T>>& embedded) const {
    if (embedded.empty()) throw Error(ErrorKind::kEmptyTree, "cannot encode an empty sentence");
    std::vector<Expr<T>> xs = embedded;
    if (proj_ != nullptr) {
      const auto w = g.param(*proj_);
      for (auto& x : xs) x = matmul(w, x);
    }
    if (cfg_.kind == LeafKind::kLinear) return xs;

    const std::size_t n = xs.size();
    std::vector<Expr<T>> forward(n), backward(n);
    auto h = fwd_.zero_state(g);
    for (std::size_t t = 0; t < n; ++t) forward[t] = h = fwd_.step(g, xs[t], h);
    h = bwd_.zero_state(g);
    for (std::size_t t = n; t-- > 0;) backward[t] = h = bwd_.step(g, xs[t], h);
    std::vector<Expr<T>> out;
    out.reserve(n);
    for (std::size_t t = 0; t < n; ++t) out.push_back(concat_rows<T>({forward[t], backward[t]}));
    return out;
  }

  std::vector<Expr<T>> encode(Graph<T>& g, const std::vector<std::string>& tokens,
                              const EmbeddingTable& table) const {
    return encode(g, table.embed(g, tokens));
  }

 private:
  LeafEncoderConfig cfg_;
  Parameter<T>* proj_ = nullptr;
  GruCell<T> fwd_;
  GruCell<T> bwd_;
};

}  // namespace ltl
