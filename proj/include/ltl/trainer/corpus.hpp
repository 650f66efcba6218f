#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltl/error.hpp"
#include "ltl/gradcore/rng.hpp"
#include "ltl/treekit/bracketed.hpp"
#include "ltl/treekit/transitions.hpp"

namespace ltl {

enum class Label { kEntailment = 0, kNeutral = 1, kContradiction = 2 };

inline constexpr std::array<const char*, 3> kLabelNames = {"entailment", "neutral", "contradiction"};

inline const char* label_name(Label l) { return kLabelNames[static_cast<std::size_t>(l)]; }

inline std::optional<Label> parse_label(const std::string& s) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (s == kLabelNames[i]) return static_cast<Label>(i);
  }
  return std::nullopt;
}

struct Sentence {
  std::vector<std::string> tokens;
  std::optional<BinaryTree> parse;

  std::size_t size() const { return tokens.size(); }
};

struct Example {
  std::string id;
  Sentence s1;
  Sentence s2;
  Label label = Label::kNeutral;
};

// Sentence pairs backed by JSONL, one object per line with the fields
// pairID, sentence1, sentence2, gold_label and optionally
// sentence{1,2}_binary_parse.
class Corpus {
 public:
  std::vector<Example> examples;
  std::string source;

  std::size_t size() const { return examples.size(); }

  static Corpus read_jsonl(std::istream& in, const std::string& source) {
    Corpus c;
    c.source = source;
    std::unordered_set<std::string> ids;
    std::string line;
    for (long lineno = 1; std::getline(in, line); ++lineno) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = source + ":" + std::to_string(lineno);
      try {
        const auto j = nlohmann::json::parse(line);
        Example ex;
        ex.id = j.at("pairID").get<std::string>();
        ex.s1 = read_sentence(j, "sentence1", where);
        ex.s2 = read_sentence(j, "sentence2", where);
        const auto label = parse_label(j.at("gold_label").get<std::string>());
        if (!label) throw Error(ErrorKind::kData, where + ": unknown gold_label " + j.at("gold_label").dump());
        ex.label = *label;
        if (!ids.insert(ex.id).second) throw Error(ErrorKind::kData, where + ": duplicate pairID '" + ex.id + "'");
        c.examples.push_back(std::move(ex));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kData, where + ": " + e.what());
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kData) throw;
        throw Error(ErrorKind::kData, where + ": " + e.what());
      }
    }
    return c;
  }

  static Corpus load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
    return read_jsonl(in, path);
  }

  void write_jsonl(std::ostream& out) const {
    for (const auto& ex : examples) {
      nlohmann::ordered_json j;
      j["pairID"] = ex.id;
      j["sentence1"] = join(ex.s1.tokens);
      j["sentence2"] = join(ex.s2.tokens);
      if (ex.s1.parse) j["sentence1_binary_parse"] = render_bracketed(*ex.s1.parse, ex.s1.tokens);
      if (ex.s2.parse) j["sentence2_binary_parse"] = render_bracketed(*ex.s2.parse, ex.s2.tokens);
      j["gold_label"] = label_name(ex.label);
      out << j.dump() << '\n';
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
    write_jsonl(out);
  }

  std::unordered_set<std::string> vocabulary() const {
    std::unordered_set<std::string> v;
    for (const auto& ex : examples) {
      v.insert(ex.s1.tokens.begin(), ex.s1.tokens.end());
      v.insert(ex.s2.tokens.begin(), ex.s2.tokens.end());
    }
    return v;
  }

  std::array<std::size_t, 3> label_counts() const {
    std::array<std::size_t, 3> n{};
    for (const auto& ex : examples) ++n[static_cast<std::size_t>(ex.label)];
    return n;
  }

  // Accuracy of always predicting the most frequent label, in percent.
  double majority_rate() const {
    if (examples.empty()) return 0.0;
    const auto n = label_counts();
    return 100.0 * static_cast<double>(std::max({n[0], n[1], n[2]})) / static_cast<double>(examples.size());
  }

  // Stable content hash, for provenance.
  std::uint64_t fingerprint() const {
    std::ostringstream out;
    write_jsonl(out);
    return fnv1a(out.str());
  }

 private:
  static std::string join(const std::vector<std::string>& tokens) {
    std::string s;
    for (const auto& t : tokens) s += (s.empty() ? "" : " ") + t;
    return s;
  }

  static Sentence read_sentence(const nlohmann::json& j, const std::string& field, const std::string& where) {
    Sentence s;
    s.tokens = split_tokens(j.at(field).get<std::string>());
    if (s.tokens.empty()) throw Error(ErrorKind::kData, where + ": empty " + field);
    const std::string parse_field = field + "_binary_parse";
    if (j.contains(parse_field) && !j.at(parse_field).is_null()) {
      auto parsed = parse_bracketed(j.at(parse_field).get<std::string>());
      if (parsed.tokens != s.tokens) {
        throw Error(ErrorKind::kData, where + ": " + parse_field + " does not cover the tokens of " + field);
      }
      s.parse = std::move(parsed.tree);
    }
    return s;
  }
};

}  // namespace ltl
