#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/parsemetrics/parse_set.hpp"
#include "ltl/treekit/binary_tree.hpp"

namespace ltl {

// Per-sentence values plus their aggregate. `mean`, `stddev` (population) and
// `max` are always recomputable from `values`.
struct MetricReport {
  std::string metric;
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t skipped = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double max = 0.0;
  // Metric-specific extra aggregates (micro F1, alternative denominators, ...).
  std::map<std::string, double> extra;

  std::size_t count() const { return values.size(); }
  bool present() const { return !values.empty(); }

  void push(std::string id, double value) {
    ids.push_back(std::move(id));
    values.push_back(value);
  }

  void aggregate() {
    if (values.empty()) {
      mean = stddev = max = 0.0;
      return;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    stddev = std::sqrt(ss / static_cast<double>(values.size()));
    max = *std::max_element(values.begin(), values.end());
  }
};

namespace detail {

inline std::size_t span_overlap(const std::vector<Span>& a, const std::vector<Span>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++n;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

inline double f1_from_counts(double overlap, double n_pred, double n_gold) {
  if (n_pred == 0.0 && n_gold == 0.0) return 100.0;
  if (overlap == 0.0) return 0.0;
  const double p = overlap / n_pred;
  const double r = overlap / n_gold;
  return 200.0 * p * r / (p + r);
}

inline void check_same_length(const BinaryTree& a, const BinaryTree& b) {
  if (a.num_leaves() != b.num_leaves()) {
    throw Error(ErrorKind::kLengthMismatch, std::to_string(a.num_leaves()) + " vs " +
                                                std::to_string(b.num_leaves()) + " leaves");
  }
}

inline void check_aligned(const ParseSet& a, const ParseSet& b) {
  std::vector<std::string> offending;
  for (const auto& e : a) {
    if (b.find(e.id) == nullptr) offending.push_back(e.id);
  }
  for (const auto& e : b) {
    if (a.find(e.id) == nullptr) offending.push_back(e.id);
  }
  if (!offending.empty()) {
    std::string msg = std::to_string(offending.size()) + " unaligned id(s):";
    for (std::size_t i = 0; i < offending.size() && i < 20; ++i) msg += " " + offending[i];
    if (offending.size() > 20) msg += " ...";
    throw Error(ErrorKind::kIdMismatch, msg);
  }
}

}  // namespace detail

// Unlabeled bracketing F1 over internal-node spans (root included), in percent.
inline double unlabeled_f1(const BinaryTree& pred, const BinaryTree& gold) {
  detail::check_same_length(pred, gold);
  const auto p = pred.constituents();
  const auto g = gold.constituents();
  return detail::f1_from_counts(static_cast<double>(detail::span_overlap(p, g)),
                                static_cast<double>(p.size()), static_cast<double>(g.size()));
}

// Macro-averaged F1 of `a` against `b`; the pooled-span variant is stored in
// extra["micro"]. One-word sentences are skipped.
inline MetricReport corpus_f1(const ParseSet& a, const ParseSet& b) {
  detail::check_aligned(a, b);
  MetricReport report;
  report.metric = "f1";
  double overlap = 0.0;
  double n_a = 0.0;
  double n_b = 0.0;
  for (const auto& e : a) {
    const auto& other = b.find(e.id)->tree;
    detail::check_same_length(e.tree, other);
    if (e.tree.num_leaves() < 2) {
      ++report.skipped;
      continue;
    }
    const auto sa = e.tree.constituents();
    const auto sb = other.constituents();
    const auto o = static_cast<double>(detail::span_overlap(sa, sb));
    overlap += o;
    n_a += static_cast<double>(sa.size());
    n_b += static_cast<double>(sb.size());
    report.push(e.id, detail::f1_from_counts(o, static_cast<double>(sa.size()),
                                             static_cast<double>(sb.size())));
  }
  report.aggregate();
  report.extra["micro"] = report.values.empty() ? 0.0 : detail::f1_from_counts(overlap, n_a, n_b);
  return report;
}

// Mean macro F1 over all unordered pairs of runs.
inline double self_f1(const std::vector<ParseSet>& runs) {
  if (runs.size() < 2) {
    throw Error(ErrorKind::kNeedTwoRuns, "self F1 needs at least two runs, got " +
                                             std::to_string(runs.size()));
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      sum += corpus_f1(runs[i], runs[j]).mean;
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

namespace detail {

// Unique multi-word (span, label) pairs of a reference sentence.
inline std::set<LabeledSpan> gold_labeled_spans(const BinarizedTree& gold) {
  std::set<LabeledSpan> out;
  for (const auto& ls : gold.labels) {
    if (ls.span.length() >= 2) out.insert(ls);
  }
  return out;
}

inline void check_covers(const ParseSet& pred, const LabeledReference& gold) {
  std::vector<std::string> missing;
  for (const auto& [id, unused] : gold.sentences) {
    if (pred.find(id) == nullptr) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " reference id(s) missing from prediction:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    throw Error(ErrorKind::kIdMismatch, msg);
  }
}

}  // namespace detail

// Percentage of gold constituents with `label` that the predicted trees
// also bracket.
inline double label_recall(const ParseSet& pred, const LabeledReference& gold, const std::string& label) {
  detail::check_covers(pred, gold);
  std::size_t total = 0;
  std::size_t matched = 0;
  for (const auto& [id, ref] : gold.sentences) {
    const auto& tree = pred.find(id)->tree;
    detail::check_same_length(tree, ref.tree);
    for (const auto& ls : detail::gold_labeled_spans(ref)) {
      if (ls.label != label) continue;
      ++total;
      if (tree.has_constituent(ls.span)) ++matched;
    }
  }
  if (total == 0) throw Error(ErrorKind::kUnknownLabel, "no reference constituents labeled '" + label + "'");
  return 100.0 * static_cast<double>(matched) / static_cast<double>(total);
}

// Recall for every label present in the reference, keyed by label.
inline std::map<std::string, double> label_recall_table(const ParseSet& pred, const LabeledReference& gold) {
  detail::check_covers(pred, gold);
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& [id, ref] : gold.sentences) {
    const auto& tree = pred.find(id)->tree;
    detail::check_same_length(tree, ref.tree);
    for (const auto& ls : detail::gold_labeled_spans(ref)) {
      auto& c = counts[ls.label];
      ++c.second;
      if (tree.has_constituent(ls.span)) ++c.first;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [label, c] : counts) {
    out[label] = 100.0 * static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

// Mean root-to-leaf path length over the words of one tree.
inline double avg_depth(const BinaryTree& t) {
  const auto depths = t.leaf_depths();
  double sum = 0.0;
  for (int d : depths) sum += d;
  return depths.empty() ? 0.0 : sum / static_cast<double>(depths.size());
}

inline MetricReport corpus_macro_depth(const ParseSet& ps) {
  MetricReport report;
  report.metric = "depth";
  for (const auto& e : ps) report.push(e.id, avg_depth(e.tree));
  report.aggregate();
  return report;
}

// Per-sentence values are 1 when the first two words form a constituent;
// extra["last_two"] holds the corresponding rate for the final two words.
inline MetricReport edge_stats(const ParseSet& ps) {
  MetricReport report;
  report.metric = "first_two";
  std::size_t last_hits = 0;
  for (const auto& e : ps) {
    const int n = static_cast<int>(e.tree.num_leaves());
    if (n < 2) {
      ++report.skipped;
      continue;
    }
    report.push(e.id, e.tree.has_constituent(Span{0, 2}) ? 100.0 : 0.0);
    if (e.tree.has_constituent(Span{n - 2, n})) ++last_hits;
  }
  report.aggregate();
  report.extra["first_two"] = report.mean;
  report.extra["last_two"] =
      report.values.empty() ? 0.0 : 100.0 * static_cast<double>(last_hits) / static_cast<double>(report.count());
  return report;
}

inline const std::set<std::string>& default_negation_lexicon() {
  static const std::set<std::string> lexicon = {"not", "n't", "no", "none"};
  return lexicon;
}

// Over sentences with a negation word that has a right neighbour: 100 when
// some such word is bracketed together with that neighbour, else 0.
// extra["all_sentences"] reports the same count over every sentence.
inline MetricReport negation_stats(const ParseSet& ps,
                                   const std::set<std::string>& lexicon = default_negation_lexicon()) {
  MetricReport report;
  report.metric = "negation";
  std::size_t hits = 0;
  for (const auto& e : ps) {
    if (e.tokens.empty()) {
      throw Error(ErrorKind::kData, "negation_stats needs tokens for sentence '" + e.id + "'");
    }
    const int n = static_cast<int>(e.tokens.size());
    bool eligible = false;
    bool paired = false;
    for (int i = 0; i + 1 < n; ++i) {
      if (lexicon.count(e.tokens[static_cast<std::size_t>(i)]) == 0) continue;
      eligible = true;
      if (e.tree.has_constituent(Span{i, i + 2})) paired = true;
    }
    if (!eligible) {
      ++report.skipped;
      continue;
    }
    if (paired) ++hits;
    report.push(e.id, paired ? 100.0 : 0.0);
  }
  report.aggregate();
  if (!ps.empty()) {
    report.extra["all_sentences"] = 100.0 * static_cast<double>(hits) / static_cast<double>(ps.size());
  }
  return report;
}

}  // namespace ltl
