#pragma once

#include <string>
#include <vector>

#include "ltl/encoders/cells.hpp"
#include "ltl/encoders/embeddings.hpp"
#include "ltl/error.hpp"

namespace ltl {

// Sequential baseline: a unidirectional LSTM whose final hidden state is the
// sentence vector.
template <class T>
class LstmEncoder {
 public:
  LstmEncoder() = default;
  LstmEncoder(ParameterStore<T>& store, const std::string& name, Eigen::Index input, Eigen::Index dim, Rng& rng)
      : cell_(store, name, input, dim, rng) {}

  Eigen::Index dim() const { return cell_.hidden(); }

  Expr<T> encode(Graph<T>& g, const std::vector<Expr<T>>& inputs) const {
    if (inputs.empty()) throw Error(ErrorKind::kEmptyTree, "cannot encode an empty sentence");
    auto state = cell_.zero_state(g);
    for (const auto& x : inputs) state = cell_.step(g, x, state);
    return state.h;
  }

  Expr<T> encode(Graph<T>& g, const std::vector<std::string>& tokens, const EmbeddingTable& table) const {
    return encode(g, table.embed(g, tokens));
  }

 private:
  LstmCell<T> cell_;
};

}  // namespace ltl
