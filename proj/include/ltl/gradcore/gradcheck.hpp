#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/rng.hpp"

namespace ltl {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coords_checked = 0;
  // Split by gradient size: coordinates with max(|a|, |b|) >= resolution are
  // compared relatively, the rest absolutely (their finite difference is
  // dominated by roundoff of order |loss| * 1e-16 / eps).
  double max_rel_error_resolved = 0.0;
  double max_abs_error_unresolved = 0.0;
  std::size_t unresolved = 0;
};

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t min_coords = 64;  // every coordinate when the store is smaller
  std::uint64_t seed = 0;
  std::vector<std::string> only;  // restrict to these parameters when nonempty
  double resolution = 1e-6;
};

// Central finite differences against the backward pass. `loss` must build a
// deterministic scalar from the store's current values on the graph it gets.
// Relative error uses the denominator max(|a|, |b|, 1e-8).
inline GradCheckResult grad_check(const std::function<Expr<double>(Graph<double>&)>& loss,
                                  ParameterStore<double>& store, const GradCheckOptions& opts = {}) {
  store.zero_grad();
  {
    Graph<double> g;
    g.backward(loss(g));
  }
  struct Coord {
    std::size_t param;
    Eigen::Index index;
  };
  std::vector<Coord> coords;
  for (std::size_t k = 0; k < store.size(); ++k) {
    const auto& p = store[k];
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), p.name) == opts.only.end()) continue;
    for (Eigen::Index i = 0; i < p.value.size(); ++i) coords.push_back({k, i});
  }
  if (coords.size() > opts.min_coords) {
    Rng rng(derive_seed(opts.seed, "gradcheck"));
    for (std::size_t i = 0; i < opts.min_coords; ++i) {
      std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
    }
    coords.resize(opts.min_coords);
  }

  auto evaluate = [&]() {
    Graph<double> g;
    return loss(g).scalar();
  };

  GradCheckResult result;
  for (const auto& c : coords) {
    auto& p = store[c.param];
    double* theta = p.value.data() + c.index;
    const double saved = *theta;
    *theta = saved + opts.eps;
    const double up = evaluate();
    *theta = saved - opts.eps;
    const double down = evaluate();
    *theta = saved;
    const double numeric = (up - down) / (2.0 * opts.eps);
    const double analytic = p.grad.data()[c.index];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    ++result.coords_checked;
    if (std::max(std::abs(analytic), std::abs(numeric)) >= opts.resolution) {
      result.max_rel_error_resolved = std::max(result.max_rel_error_resolved, rel);
    } else {
      ++result.unresolved;
      result.max_abs_error_unresolved = std::max(result.max_abs_error_unresolved, std::abs(analytic - numeric));
    }
    if (rel > result.max_rel_error || result.worst_index < 0) {
      result.max_rel_error = std::max(rel, result.max_rel_error);
      if (rel >= result.max_rel_error) {
        result.worst_param = p.name;
        result.worst_index = c.index;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  store.zero_grad();
  return result;
}

}  // namespace ltl
