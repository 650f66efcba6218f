#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltl/encoders.hpp"
#include "ltl/gradcore.hpp"
#include "ltl/latentparsers.hpp"
#include "ltl/trainer/classifier.hpp"
#include "ltl/trainer/model.hpp"
#include "ltl/trainer/synthetic.hpp"
#include "ltl/trainer/train.hpp"

namespace ltl {

// A path passes when resolvable coordinates agree to `rel_tol` and the
// remaining ones to `abs_tol`.
struct GradPathResult;
inline bool gradient_ok(const GradPathResult& r, double rel_tol = 1e-4, double abs_tol = 1e-9);

struct GradPathResult {
  std::string path;
  double max_rel_error = 0.0;
  std::size_t coords = 0;
  std::string worst_param;
  double analytic = 0.0;  // at the worst coordinate
  double numeric = 0.0;
  double max_rel_error_resolved = 0.0;
  double max_abs_error_unresolved = 0.0;
  std::size_t unresolved = 0;
};

inline nlohmann::ordered_json to_json(const GradPathResult& r) {
  nlohmann::ordered_json j;
  j["path"] = r.path;
  j["max_rel_error"] = r.max_rel_error;
  j["coords"] = r.coords;
  j["worst_param"] = r.worst_param;
  j["analytic"] = r.analytic;
  j["numeric"] = r.numeric;
  j["max_rel_error_resolved"] = r.max_rel_error_resolved;
  j["unresolved"] = r.unresolved;
  j["max_abs_error_unresolved"] = r.max_abs_error_unresolved;
  return j;
}

inline bool gradient_ok(const GradPathResult& r, double rel_tol, double abs_tol) {
  return r.max_rel_error_resolved < rel_tol && r.max_abs_error_unresolved < abs_tol;
}

namespace detail {

inline Matrix<double> uniform_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale) {
  Matrix<double> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

// sum(out * W) for a fixed random W: every output coordinate matters.
inline Expr<double> contract(Graph<double>& g, Expr<double> out, Rng& rng) {
  return sum(cmul(out, g.input(uniform_matrix(rng, out.rows(), out.cols(), 1.0))));
}

inline void jitter(ParameterStore<double>& store, Rng& rng, double scale) {
  for (std::size_t k = 0; k < store.size(); ++k) {
    store[k].value += uniform_matrix(rng, store[k].value.rows(), store[k].value.cols(), scale);
  }
}

inline GradPathResult check_path(const std::string& path, ParameterStore<double>& store,
                                 const std::function<Expr<double>(Graph<double>&)>& loss, double eps,
                                 std::size_t coords, std::uint64_t seed) {
  GradCheckOptions opts;
  opts.eps = eps;
  opts.min_coords = coords;
  opts.seed = seed;
  const auto r = grad_check(loss, store, opts);
  return {path,      r.max_rel_error,          r.coords_checked,           r.worst_param,
          r.analytic, r.numeric, r.max_rel_error_resolved, r.max_abs_error_unresolved, r.unresolved};
}

}  // namespace detail

// Finite-difference checks in double precision over every differentiable
// path: leaf encoders, LSTM baseline, TreeLSTM, SPINN models end to end with
// given transitions, ST-Gumbel with frozen selections, the pair classifier.
inline std::vector<GradPathResult> run_gradient_suite(std::uint64_t seed, double eps = 1e-5,
                                                      std::size_t coords = 300) {
  std::vector<GradPathResult> out;
  Rng rng(derive_seed(seed, "gradient-suite"));
  const auto table = synthetic_embeddings(5, derive_seed(seed, "suite-embeddings"));
  const std::vector<std::string> tokens = {"3", "~", "4", "1", "~", "9", "0"};
  const std::size_t n = tokens.size();

  const std::vector<std::pair<std::string, LeafEncoderConfig>> leaves = {
      {"leaf/linear", {LeafKind::kLinear, LeafProj::kNone, 6, 5}},
      {"leaf/bigru", {LeafKind::kBiGru, LeafProj::kNone, 6, 5}},
      {"leaf/bigru+proj", {LeafKind::kBiGru, LeafProj::kLinear, 6, 5}}};
  for (const auto& [name, cfg] : leaves) {
    ParameterStore<double> store;
    LeafEncoder<double> enc(store, "leaf", cfg, rng);
    detail::jitter(store, rng, 0.3);
    const auto probe_seed = rng.below(1u << 30);
    out.push_back(detail::check_path(name, store, [&](Graph<double>& g) {
      Rng w(probe_seed);
      return detail::contract(g, concat_cols(enc.encode(g, tokens, table)), w);
    }, eps, coords, seed));
  }

  {
    ParameterStore<double> store;
    LstmEncoder<double> enc(store, "lstm", 5, 6, rng);
    detail::jitter(store, rng, 0.3);
    const auto probe_seed = rng.below(1u << 30);
    out.push_back(detail::check_path("lstm", store, [&](Graph<double>& g) {
      Rng w(probe_seed);
      return detail::contract(g, enc.encode(g, tokens, table), w);
    }, eps, coords, seed));
  }

  for (Eigen::Index trk : {Eigen::Index{0}, Eigen::Index{4}}) {
    ParameterStore<double> store;
    TreeLstm<double> cell(store, "cell", 5, trk, rng);
    detail::jitter(store, rng, 0.3);
    auto& hl = store.add("hl", 5, 1, Init::kGlorot, rng);
    auto& cl = store.add("cl", 5, 1, Init::kGlorot, rng);
    auto& hr = store.add("hr", 5, 1, Init::kGlorot, rng);
    auto& cr = store.add("cr", 5, 1, Init::kGlorot, rng);
    auto& tr = store.add("tracker", std::max<Eigen::Index>(trk, 1), 1, Init::kGlorot, rng);
    const auto probe_seed = rng.below(1u << 30);
    out.push_back(detail::check_path(trk > 0 ? "treelstm/tracked" : "treelstm", store, [&](Graph<double>& g) {
      Rng w(probe_seed);
      const Phrase<double> l{g.param(hl), g.param(cl)}, r{g.param(hr), g.param(cr)};
      const auto p = trk > 0 ? cell.compose(g, l, r, g.param(tr)) : cell.compose(g, l, r);
      return add(detail::contract(g, p.h, w), detail::contract(g, p.c, w));
    }, eps, coords, seed));
  }

  // Whole pair models in training mode with dropout off: task loss plus any
  // transition loss, gradients from the classifier down to the leaf encoder.
  {
    const auto data = gen_synthetic(3, 4, 7, derive_seed(seed, "suite-data"));
    for (auto kind : {ModelKind::kLstm, ModelKind::kSpinn, ModelKind::kSpinnNc, ModelKind::kSpinnPiNt,
                      ModelKind::kBalancedTrees}) {
      ExperimentConfig cfg;
      cfg.model = kind;
      cfg.leaf = LeafKind::kBiGru;
      cfg.dim = 6;
      cfg.tracker_dim = 4;
      cfg.pair_dim = 8;
      cfg.dropout = 0.0;
      cfg.seed = seed;
      PairModel<double> model(cfg, table.dim());
      detail::jitter(model.store(), rng, 0.2);
      out.push_back(detail::check_path(std::string("model/") + model_name(kind), model.store(), [&](Graph<double>& g) {
        RngStream rngs(seed);
        Expr<double> total = g.scalar(0.0);
        for (const auto& ex : data.examples) {
          auto f = forward_pair(g, model, ex, table, Phase::kTrain, rngs);
          total = add(total, cross_entropy(f.logits, static_cast<Eigen::Index>(ex.label)));
          for (const auto* lp : {&f.s1.log_probs, &f.s2.log_probs}) {
            if (!lp->empty()) total = sub(total, add(*lp));
          }
        }
        return total;
      }, eps, coords, seed));
    }
  }

  {
    ParameterStore<double> store;
    StGumbel<double> model(store, "gumbel", 5, rng);
    detail::jitter(store, rng, 0.3);
    std::vector<Parameter<double>*> leaf_params;
    for (std::size_t i = 0; i < n; ++i) {
      leaf_params.push_back(&store.add("leaf" + std::to_string(i), 5, 1, Init::kGlorot, rng));
    }
    GumbelControl frozen;
    frozen.straight_through = false;
    for (std::size_t m = n; m >= 2; --m) {
      frozen.selections.push_back(static_cast<int>(rng.below(m - 1)));
      frozen.noise.emplace_back();
      for (std::size_t i = 0; i + 1 < m; ++i) frozen.noise.back().push_back(rng.gumbel());
    }
    const auto probe_seed = rng.below(1u << 30);
    out.push_back(detail::check_path("st-gumbel/frozen", store, [&](Graph<double>& g) {
      Rng w(probe_seed);
      std::vector<Expr<double>> leaves;
      for (auto* p : leaf_params) leaves.push_back(g.param(*p));
      return detail::contract(g, model.encode(g, leaves, true, nullptr, &frozen).sentence, w);
    }, eps, coords, seed));
  }

  {
    ParameterStore<double> store;
    auto& u = store.add("u", 6, 1, Init::kGlorot, rng);
    auto& v = store.add("v", 6, 1, Init::kGlorot, rng);
    PairClassifier<double> cls(store, "pair", 24, 10, rng);
    detail::jitter(store, rng, 0.3);
    out.push_back(detail::check_path("pair-classifier", store, [&](Graph<double>& g) {
      return cross_entropy(cls.logits(g, pair_features(g.param(u), g.param(v)), 0.0, nullptr), 1);
    }, eps, coords, seed));
  }
  return out;
}

}  // namespace ltl
