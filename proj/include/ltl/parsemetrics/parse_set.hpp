#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/treekit/binary_tree.hpp"
#include "ltl/treekit/bracketed.hpp"
#include "ltl/treekit/labeled_tree.hpp"

namespace ltl {

struct ParsedSentence {
  std::string id;
  BinaryTree tree;
  std::vector<std::string> tokens;
};

// One tree per sentence id, in file order, plus where the trees came from.
class ParseSet {
 public:
  ParseSet() = default;
  explicit ParseSet(std::string provenance) : provenance_(std::move(provenance)) {}

  void add(std::string id, BinaryTree tree, std::vector<std::string> tokens = {}) {
    if (index_.count(id) != 0) throw Error(ErrorKind::kData, "duplicate sentence id '" + id + "'");
    if (!tokens.empty() && tokens.size() != tree.num_leaves()) {
      throw Error(ErrorKind::kLengthMismatch, "sentence '" + id + "': tokens do not match tree");
    }
    index_.emplace(id, entries_.size());
    entries_.push_back({std::move(id), std::move(tree), std::move(tokens)});
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const ParsedSentence& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  const ParsedSentence* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  // "id<TAB>bracketed-tree" per line; tokens are rendered when known.
  std::string to_text() const {
    std::string out;
    for (const auto& e : entries_) {
      out += e.id;
      out += '\t';
      out += e.tokens.empty() ? e.tree.render() : e.tree.render(&e.tokens);
      out += '\n';
    }
    return out;
  }

  static ParseSet from_text(std::istream& in, const std::string& provenance = "") {
    ParseSet ps(provenance);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error(ErrorKind::kData, provenance + ":" + std::to_string(line_no) +
                                          ": expected 'id<TAB>tree'");
      }
      try {
        ParsedBinary parsed = parse_bracketed(std::string_view(line).substr(tab + 1));
        ps.add(line.substr(0, tab), std::move(parsed.tree), std::move(parsed.tokens));
      } catch (const Error& e) {
        throw Error(e.kind(), provenance + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return ps;
  }

  static ParseSet load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
    return from_text(in, path);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
    out << to_text();
  }

 private:
  std::string provenance_;
  std::vector<ParsedSentence> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Labeled reference: per sentence id, the binarized tree plus the span of
// every original labeled node.
struct LabeledReference {
  std::map<std::string, BinarizedTree> sentences;

  static LabeledReference from_text(std::istream& in, const std::string& provenance = "") {
    LabeledReference ref;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error(ErrorKind::kData, provenance + ":" + std::to_string(line_no) +
                                          ": expected 'id<TAB>tree'");
      }
      try {
        auto tree = collapse_unary(parse_labeled(std::string_view(line).substr(tab + 1)));
        if (!ref.sentences.emplace(line.substr(0, tab), binarize(tree)).second) {
          throw Error(ErrorKind::kData, "duplicate sentence id '" + line.substr(0, tab) + "'");
        }
      } catch (const Error& e) {
        throw Error(e.kind(), provenance + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return ref;
  }

  static LabeledReference load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
    return from_text(in, path);
  }

  ParseSet unlabeled(const std::string& provenance = "") const {
    ParseSet ps(provenance);
    for (const auto& [id, b] : sentences) ps.add(id, b.tree, b.tokens);
    return ps;
  }
};

}  // namespace ltl
