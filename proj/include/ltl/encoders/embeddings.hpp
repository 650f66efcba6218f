#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"

namespace ltl {

// Frozen word vectors. Rows enter graphs as constants, never as parameters,
// so no gradient can reach them. Unknown tokens map to the zero vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(Eigen::Index dim) : dim_(dim) {}

  void add(const std::string& token, const Eigen::VectorXd& vec) {
    if (vec.size() != dim_) {
      throw Error(ErrorKind::kDimDrift, "vector for '" + token + "' has " + std::to_string(vec.size()) +
                                            " values, table has " + std::to_string(dim_));
    }
    if (!index_.emplace(token, static_cast<Eigen::Index>(tokens_.size())).second) {
      throw Error(ErrorKind::kDuplicateToken, "token '" + token + "' appears twice");
    }
    tokens_.push_back(token);
    rows_.push_back(vec);
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool frozen() const { return true; }

  Eigen::VectorXd vector(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return Eigen::VectorXd::Zero(dim_);
    return rows_[static_cast<std::size_t>(it->second)];
  }

  // Embedded tokens as columns of a dim x N constant.
  template <class T>
  Matrix<T> matrix(const std::vector<std::string>& tokens) const {
    Matrix<T> out(dim_, static_cast<Eigen::Index>(tokens.size()));
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      out.col(static_cast<Eigen::Index>(k)) = vector(tokens[k]).cast<T>();
    }
    return out;
  }

  template <class T>
  std::vector<Expr<T>> embed(Graph<T>& g, const std::vector<std::string>& tokens) const {
    std::vector<Expr<T>> out;
    out.reserve(tokens.size());
    for (const auto& tok : tokens) out.push_back(g.input(vector(tok).cast<T>()));
    return out;
  }

  void write(std::ostream& out) const {
    out.precision(17);
    for (std::size_t k = 0; k < tokens_.size(); ++k) {
      out << tokens_[k];
      for (Eigen::Index i = 0; i < dim_; ++i) out << ' ' << rows_[k](i);
      out << '\n';
    }
  }

 private:
  Eigen::Index dim_ = 0;
  std::unordered_map<std::string, Eigen::Index> index_;
  std::vector<std::string> tokens_;
  std::vector<Eigen::VectorXd> rows_;
};

// "token v1 ... vD" per line. The width is fixed by the first line. When
// `vocab` is given, other tokens are skipped (but still checked).
inline EmbeddingTable read_embeddings(std::istream& in, const std::string& source,
                                      const std::unordered_set<std::string>* vocab = nullptr) {
  EmbeddingTable table;
  std::unordered_set<std::string> seen;
  std::string line;
  long dim = -1;
  for (long lineno = 1; std::getline(in, line); ++lineno) {
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    std::string cell;
    while (fields >> cell) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::kData, source + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (dim < 0) {
      if (values.empty()) throw Error(ErrorKind::kDimDrift, source + ":1: no vector values");
      dim = static_cast<long>(values.size());
      table = EmbeddingTable(dim);
    }
    if (static_cast<long>(values.size()) != dim) {
      throw Error(ErrorKind::kDimDrift, source + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                                            " values, found " + std::to_string(values.size()));
    }
    if (!seen.insert(token).second) {
      throw Error(ErrorKind::kDuplicateToken, source + ":" + std::to_string(lineno) + ": token '" + token +
                                                  "' already defined");
    }
    if (vocab != nullptr && vocab->count(token) == 0) continue;
    table.add(token, Eigen::Map<const Eigen::VectorXd>(values.data(), dim));
  }
  if (dim < 0) throw Error(ErrorKind::kData, source + ": no embeddings");
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path,
                                      const std::unordered_set<std::string>* vocab = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return read_embeddings(in, path, vocab);
}

}  // namespace ltl
