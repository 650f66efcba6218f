#pragma once

#include <functional>
#include <string>

#include "ltl/gradcore.hpp"

namespace testing_support {

using Mat = ltl::Matrix<double>;

inline Mat random_matrix(ltl::Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

// Contracts an output against a fixed random weight so that gradients are
// O(1) and distinct per coordinate.
inline ltl::Expr<double> probe(ltl::Graph<double>& g, ltl::Expr<double> out, std::uint64_t seed) {
  ltl::Rng rng(seed);
  return ltl::sum(ltl::cmul(out, g.input(random_matrix(rng, out.rows(), out.cols()))));
}

inline double grad_error(ltl::ParameterStore<double>& store,
                         const std::function<ltl::Expr<double>(ltl::Graph<double>&)>& f, std::size_t coords = 200) {
  ltl::GradCheckOptions opts;
  opts.min_coords = coords;
  return ltl::grad_check(f, store, opts).max_rel_error;
}

inline void zero_all(ltl::ParameterStore<double>& store) {
  for (std::size_t k = 0; k < store.size(); ++k) store[k].value.setZero();
}

inline void randomize_all(ltl::ParameterStore<double>& store, ltl::Rng& rng, double scale = 0.5) {
  for (std::size_t k = 0; k < store.size(); ++k) {
    auto& p = store[k];
    p.value = random_matrix(rng, p.value.rows(), p.value.cols(), -scale, scale);
  }
}

}  // namespace testing_support
