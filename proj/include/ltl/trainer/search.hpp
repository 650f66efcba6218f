#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltl/gradcore/rng.hpp"
#include "ltl/parsemetrics/metrics.hpp"
#include "ltl/trainer/config.hpp"
#include "ltl/trainer/train.hpp"

namespace ltl {

struct SearchRanges {
  double lr_min = 1e-4, lr_max = 1e-2;
  double l2_min = 1e-8, l2_max = 1e-4;
  double dropout_min = 0.0, dropout_max = 0.3;
  // The REINFORCE weight range is a placeholder; nothing pins it down.
  double rl_weight_min = 0.1, rl_weight_max = 10.0;
  std::vector<int> tracker_dims = {8, 16, 32};
};

// Config for run `index` of a search: independent seed and sampled values.
inline ExperimentConfig sample_config(const ExperimentConfig& base, const SearchRanges& ranges, std::uint64_t seed,
                                      int index) {
  Rng rng(derive_seed(seed, "search:" + std::to_string(index)));
  ExperimentConfig c = base;
  c.lr = rng.log_uniform(ranges.lr_min, ranges.lr_max);
  c.l2 = rng.log_uniform(ranges.l2_min, ranges.l2_max);
  c.dropout = rng.uniform(ranges.dropout_min, ranges.dropout_max);
  const double lambda = rng.log_uniform(ranges.rl_weight_min, ranges.rl_weight_max);
  const int trk = ranges.tracker_dims[rng.below(ranges.tracker_dims.size())];
  if (c.model == ModelKind::kRlSpinn) c.rl_weight = lambda;
  if (has_tracker(c.model)) c.tracker_dim = trk;
  c.seed = derive_seed(seed, "run:" + std::to_string(index));
  return c;
}

struct SearchSummary {
  int runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample deviation over runs
  bool stddev_undefined = false;
  double max = 0.0;
  std::optional<double> self_f1;
};

// Order of runs does not matter: sorted before summing.
inline SearchSummary summarize(const std::vector<RunResult>& runs) {
  SearchSummary s;
  s.runs = static_cast<int>(runs.size());
  if (runs.empty()) return s;
  std::vector<double> acc;
  for (const auto& r : runs) acc.push_back(r.best_dev_accuracy);
  std::sort(acc.begin(), acc.end());
  double sum = 0.0;
  for (double a : acc) sum += a;
  s.mean = sum / static_cast<double>(acc.size());
  s.max = acc.back();
  if (acc.size() < 2) {
    s.stddev_undefined = true;
  } else {
    double ss = 0.0;
    for (double a : acc) ss += (a - s.mean) * (a - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(acc.size() - 1));
  }
  if (runs.size() >= 2 && produces_parses(runs.front().config.model)) {
    // pairwise values sorted too, so the sum does not depend on run order
    std::vector<double> pair_f1;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (std::size_t j = i + 1; j < runs.size(); ++j) {
        pair_f1.push_back(corpus_f1(runs[i].dev_parses, runs[j].dev_parses).mean);
      }
    }
    std::sort(pair_f1.begin(), pair_f1.end());
    double total = 0.0;
    for (double f : pair_f1) total += f;
    s.self_f1 = total / static_cast<double>(pair_f1.size());
  }
  return s;
}

inline nlohmann::ordered_json to_json(const SearchSummary& s) {
  nlohmann::ordered_json j;
  j["runs"] = s.runs;
  j["mean"] = s.mean;
  j["stddev"] = s.stddev;
  if (s.stddev_undefined) j["stddev_undefined"] = true;
  j["max"] = s.max;
  if (s.self_f1) j["self_f1"] = *s.self_f1;
  return j;
}

inline unsigned worker_threads() {
  if (const char* env = std::getenv("LTL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct SearchResult {
  std::vector<RunResult> runs;
  SearchSummary summary;
};

// k independent runs, at most worker_threads() at a time. out_dir, when set,
// gets one subdirectory per run.
template <class T>
SearchResult hyper_search(const ExperimentConfig& base, const SearchRanges& ranges, int k, const Corpus& train_set,
                          const Corpus& dev, const EmbeddingTable& table, const TrainOptions& opts = {}) {
  if (k < 1) throw Error(ErrorKind::kInvalidConfig, "search needs k >= 1");
  SearchResult out;
  out.runs.resize(static_cast<std::size_t>(k));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
  auto run_one = [&](int i) {
    try {
      TrainOptions o;
      if (!opts.out_dir.empty()) o.out_dir = opts.out_dir + "/run" + std::to_string(i);
      out.runs[static_cast<std::size_t>(i)] =
          train<T>(sample_config(base, ranges, base.seed, i), train_set, dev, table, o);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  const int width = static_cast<int>(std::min<unsigned>(worker_threads(), static_cast<unsigned>(k)));
  if (width <= 1) {
    for (int i = 0; i < k; ++i) run_one(i);
  } else {
    for (int start = 0; start < k; start += width) {
      std::vector<std::thread> pool;
      for (int i = start; i < std::min(k, start + width); ++i) pool.emplace_back(run_one, i);
      for (auto& t : pool) t.join();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  out.summary = summarize(out.runs);
  return out;
}

}  // namespace ltl
