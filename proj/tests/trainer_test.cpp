#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ltl/trainer.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ltl;
using testing_support::Mat;

namespace {

Mat col(std::initializer_list<double> v) {
  Mat m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

ExperimentConfig small_config(ModelKind model) {
  ExperimentConfig c;
  c.model = model;
  c.dim = 8;
  c.tracker_dim = 8;
  c.pair_dim = 16;
  c.batch_size = 8;
  c.eval_interval = 10;
  c.max_steps = 20;
  c.seed = 7;
  return c;
}

struct SmallData {
  Corpus train = gen_synthetic(200, 3, 6, 11, "t");
  Corpus dev = gen_synthetic(40, 3, 6, 12, "d");
  EmbeddingTable table = synthetic_embeddings(6, 13);
};

const SmallData& small_data() {
  static const SmallData d;
  return d;
}

}  // namespace

TEST(PairFeatures, Example) {
  Graph<double> g;
  const auto f = pair_features(g.input(col({1, 2})), g.input(col({3, 4})));
  EXPECT_EQ(f.value(), col({1, 2, 3, 4, -2, -2, 3, 8}));
}

TEST(PairFeatures, EqualInputsZeroDifference) {
  Graph<double> g;
  const auto u = g.input(col({0.5, -1, 2}));
  const auto f = pair_features(u, u);
  EXPECT_TRUE(f.value().block(6, 0, 3, 1).isZero(0.0));
}

TEST(PairFeatures, ShapeMismatch) {
  Graph<double> g;
  try {
    pair_features(g.input(col({1, 2})), g.input(col({1, 2, 3})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShapeMismatch);
  }
}

TEST(PairClassifier, ZeroWeightsGiveLn3) {
  ParameterStore<double> store;
  Rng rng(1);
  PairClassifier<double> cls(store, "pair", 8, 5, rng);
  testing_support::zero_all(store);
  Graph<double> g;
  const auto loss = cross_entropy(cls.logits(g, g.input(col({1, 2, 3, 4, -2, -2, 3, 8})), 0.0, nullptr), 1);
  EXPECT_NEAR(loss.scalar(), std::log(3.0), 1e-15);
}

TEST(PairClassifier, ZeroDropoutTrainEqualsEval) {
  ParameterStore<double> store;
  Rng rng(2);
  PairClassifier<double> cls(store, "pair", 4, 6, rng);
  Graph<double> g;
  const auto x = g.input(col({0.3, -0.2, 1.1, 0.7}));
  Rng drop(3);
  EXPECT_EQ(cls.logits(g, x, 0.0, &drop).value(), cls.logits(g, x, 0.0, nullptr).value());
}

TEST(PairClassifier, ArgmaxShiftInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd logits = testing_support::random_matrix(rng, 3, 1, -3, 3);
    const double c = rng.uniform(-100, 100);
    EXPECT_EQ(predicted_label(logits), predicted_label((logits.array() + c).matrix()));
  }
}

TEST(PairClassifier, GradCheckThroughFeatures) {
  ParameterStore<double> store;
  Rng rng(5);
  auto& u = store.add("u", 6, 1, Init::kGlorot, rng);
  auto& v = store.add("v", 6, 1, Init::kGlorot, rng);
  testing_support::randomize_all(store, rng, 1.0);
  PairClassifier<double> cls(store, "pair", 24, 10, rng);
  testing_support::randomize_all(store, rng, 0.5);
  const double err = testing_support::grad_error(store, [&](Graph<double>& g) {
    return cross_entropy(cls.logits(g, pair_features(g.param(u), g.param(v)), 0.0, nullptr), 2);
  }, 400);
  EXPECT_LT(err, 1e-4);
}

TEST(Reinforce, EmaArithmetic) {
  EmaBaseline b(0.9);
  EXPECT_EQ(b.value(), 0.0);
  b.update(1.0);
  EXPECT_NEAR(b.value(), 0.1, 1e-15);
}

TEST(Reinforce, CenteredAdvantageGivesZeroGradient) {
  ParameterStore<double> store;
  Rng rng(6);
  Spinn<double> spinn(store, "spinn", SpinnVariant::kFull, 4, 4, rng);
  Graph<double> g;
  std::vector<Expr<double>> leaves;
  for (int i = 0; i < 3; ++i) leaves.push_back(g.input(testing_support::random_matrix(rng, 4, 1)));
  Rng sample(7);
  const auto r = spinn.encode(g, leaves, TransitionMode::kSample, nullptr, &sample);
  const double reward = 0.37;
  EmaBaseline b(0.9, reward);
  g.backward(policy_loss(g, r.log_probs, reward - b.value(), 1.0));
  for (std::size_t k = 0; k < store.size(); ++k) EXPECT_TRUE(store[k].grad.isZero(0.0)) << store[k].name;
}

TEST(Reinforce, BanditConverges) {
  int converged = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto out = oracles::bandit(seed);
    if (out.updates > 0) ++converged;
  }
  EXPECT_GE(converged, 4);
}

TEST(Reinforce, ZeroWeightLeavesTransitionClassifierUntouched) {
  const auto& d = small_data();
  auto cfg = small_config(ModelKind::kRlSpinn);
  cfg.rl_weight = 0.0;
  PairModel<double> model(cfg, d.table.dim());
  RngStream rngs(cfg.seed);
  for (int i = 0; i < 5; ++i) train_example(model, d.train.examples[static_cast<std::size_t>(i)], d.table, rngs, 0.0);
  EXPECT_TRUE(model.store().get("spinn.cls.W").grad.isZero(0.0));
  EXPECT_TRUE(model.store().get("spinn.cls.b").grad.isZero(0.0));
  EXPECT_FALSE(model.store().get("pair.W1").grad.isZero(0.0));

  cfg.rl_weight = 1.0;
  PairModel<double> weighted(cfg, d.table.dim());
  RngStream rngs2(cfg.seed);
  for (int i = 0; i < 5; ++i) {
    train_example(weighted, d.train.examples[static_cast<std::size_t>(i)], d.table, rngs2, 0.0);
  }
  EXPECT_FALSE(weighted.store().get("spinn.cls.W").grad.isZero(0.0));
}

TEST(Synthetic, RuleExamples) {
  EXPECT_EQ(synthetic::value_of({"3", "4"}), 7);
  EXPECT_EQ(synthetic::value_of({"~", "5"}), -5);
  EXPECT_EQ(synthetic::label_for(7, 3), Label::kEntailment);
  EXPECT_EQ(synthetic::label_for(-5, 0), Label::kContradiction);
  EXPECT_EQ(synthetic::label_for(2, 2), Label::kNeutral);
}

TEST(Synthetic, CorpusIsConsistentAndBalanced) {
  const auto c = gen_synthetic(50000, 4, 12, 99);
  const auto counts = c.label_counts();
  for (auto n : counts) EXPECT_NEAR(static_cast<double>(n) / 50000.0, 1.0 / 3.0, 0.02);
  for (const auto& ex : c.examples) {
    ASSERT_GE(ex.s1.size(), 4u);
    ASSERT_LE(ex.s1.size(), 12u);
    ASSERT_GE(ex.s2.size(), 4u);
    ASSERT_LE(ex.s2.size(), 12u);
    ASSERT_EQ(ex.label, synthetic::label_for(synthetic::value_of(ex.s1.tokens), synthetic::value_of(ex.s2.tokens)));
    ASSERT_TRUE(ex.s1.parse && ex.s1.parse->num_leaves() == ex.s1.size());
  }
}

TEST(Synthetic, DeterministicUnderSeed) {
  std::ostringstream a, b, c;
  gen_synthetic(300, 2, 16, 5).write_jsonl(a);
  gen_synthetic(300, 2, 16, 5).write_jsonl(b);
  gen_synthetic(300, 2, 16, 6).write_jsonl(c);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Synthetic, LengthRangeChecked) {
  EXPECT_THROW(gen_synthetic(10, 1, 5, 1), Error);
  EXPECT_THROW(gen_synthetic(10, 4, 17, 1), Error);
  EXPECT_THROW(gen_synthetic(10, 6, 5, 1), Error);
}

TEST(Corpus, JsonlRoundTrip) {
  const auto c = gen_synthetic(50, 2, 8, 3);
  std::ostringstream out;
  c.write_jsonl(out);
  std::istringstream in(out.str());
  const auto back = Corpus::read_jsonl(in, "mem");
  std::ostringstream again;
  back.write_jsonl(again);
  EXPECT_EQ(out.str(), again.str());
  EXPECT_EQ(c.fingerprint(), back.fingerprint());
}

TEST(Corpus, ErrorsCarryLineNumbers) {
  std::istringstream in(
      "{\"pairID\":\"a\",\"sentence1\":\"1 2\",\"sentence2\":\"3\",\"gold_label\":\"neutral\"}\n"
      "{\"pairID\":\"b\",\"sentence1\":\"1 2\",\"sentence2\":\"3\",\"gold_label\":\"maybe\"}\n");
  try {
    Corpus::read_jsonl(in, "f.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("f.jsonl:2"), std::string::npos) << e.what();
  }
}

TEST(Corpus, ParseMustCoverTokens) {
  std::istringstream in(
      "{\"pairID\":\"a\",\"sentence1\":\"1 2 3\",\"sentence2\":\"3\",\"sentence1_binary_parse\":\"( 1 2 )\","
      "\"gold_label\":\"neutral\"}\n");
  EXPECT_THROW(Corpus::read_jsonl(in, "f"), Error);
}

TEST(Config, JsonRoundTrip) {
  auto c = small_config(ModelKind::kRlSpinn);
  c.rl_weight = 2.5;
  const auto back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(Config, ModelSpecificKeysValidated) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"model":"spinn","rl_weight":1.0})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"model":"lstm","tracker_dim":8})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"model":"lstm","bogus":1})")), Error);
  EXPECT_NO_THROW(config_from_json(nlohmann::json::parse(R"({"model":"rl-spinn","rl_weight":0.5})")));
  auto c = small_config(ModelKind::kLstm);
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = small_config(ModelKind::kSpinn);
  c.leaf = LeafKind::kBiGru;
  c.dim = 7;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Train, PatienceZeroEvaluatesOnce) {
  const auto& d = small_data();
  auto cfg = small_config(ModelKind::kLstm);
  cfg.patience = 0;
  cfg.max_steps = 100;
  const auto r = train<double>(cfg, d.train, d.dev, d.table);
  EXPECT_EQ(r.evaluations, 1);
  EXPECT_EQ(r.steps, cfg.eval_interval);
  EXPECT_EQ(r.best_step, cfg.eval_interval);
}

TEST(Train, SameSeedSameBytes) {
  const auto& d = small_data();
  for (auto model : {ModelKind::kRlSpinn, ModelKind::kStGumbel, ModelKind::kRandomTrees}) {
    const auto cfg = small_config(model);
    const auto a = train<float>(cfg, d.train, d.dev, d.table);
    const auto b = train<float>(cfg, d.train, d.dev, d.table);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    EXPECT_EQ(a.checkpoint.dump(), b.checkpoint.dump());
    EXPECT_EQ(a.dev_parses.to_text(), b.dev_parses.to_text());
  }
}

TEST(Train, BestNeverWorseThanEarlierEvaluations) {
  const auto& d = small_data();
  auto cfg = small_config(ModelKind::kSpinn);
  cfg.eval_interval = 5;
  cfg.max_steps = 40;
  cfg.patience = 100;
  const auto r = train<float>(cfg, d.train, d.dev, d.table);
  ASSERT_EQ(r.evaluations, 8);
  double best = 0.0;
  for (const auto& [step, acc] : r.history) best = std::max(best, acc);
  EXPECT_EQ(r.best_dev_accuracy, best);
}

TEST(Train, CheckpointReproducesDevAccuracyAndParses) {
  const auto& d = small_data();
  for (auto model : {ModelKind::kSpinn, ModelKind::kStGumbel, ModelKind::kRandomTrees}) {
    const auto r = train<float>(small_config(model), d.train, d.dev, d.table);
    const auto reloaded = load_model<float>(nlohmann::json::parse(r.checkpoint.dump()));
    const auto ev = evaluate(reloaded, d.dev, d.table);
    EXPECT_EQ(ev.accuracy, r.best_dev_accuracy) << model_name(model);
    EXPECT_EQ(ev.parses.to_text(), r.dev_parses.to_text()) << model_name(model);
  }
}

TEST(Train, StepTouchesOnlyReachableParameters) {
  const auto& d = small_data();
  auto cfg = small_config(ModelKind::kSpinnPiNt);
  PairModel<double> model(cfg, d.table.dim());
  const auto before = checkpoint_to_json(model.store()).dump();
  const auto table_before = [&] {
    std::ostringstream s;
    d.table.write(s);
    return s.str();
  }();
  RngStream rngs(1);
  train_example(model, d.train.examples[0], d.table, rngs, 0.0);
  // the pads and classifier of an untracked SPINN are never on the tape
  for (std::size_t k = 0; k < model.store().size(); ++k) {
    const auto& p = model.store()[k];
    if (p.name.rfind("spinn.tracker", 0) == 0 || p.name.rfind("spinn.cls", 0) == 0 || p.name == "spinn.pads") {
      EXPECT_TRUE(p.grad.isZero(0.0)) << p.name;
    }
  }
  std::ostringstream after;
  d.table.write(after);
  EXPECT_EQ(after.str(), table_before);
  EXPECT_EQ(checkpoint_to_json(model.store()).dump(), before);
}

TEST(Train, LstmBeatsMajority) {
  const auto tr = gen_synthetic(4000, 4, 8, 21, "t");
  const auto dev = gen_synthetic(600, 4, 8, 22, "d");
  const auto table = synthetic_embeddings(32, 23);
  ExperimentConfig cfg;
  cfg.model = ModelKind::kLstm;
  cfg.eval_interval = 100;
  cfg.max_steps = 300;
  const auto r = train<float>(cfg, tr, dev, table);
  EXPECT_GE(r.best_dev_accuracy, r.majority_rate + 20.0);
}

TEST(Search, SingleRunFlagsDeviation) {
  const auto& d = small_data();
  const auto s = hyper_search<float>(small_config(ModelKind::kLstm), {}, 1, d.train, d.dev, d.table);
  EXPECT_TRUE(s.summary.stddev_undefined);
  EXPECT_EQ(s.summary.stddev, 0.0);
  EXPECT_FALSE(s.summary.self_f1.has_value());
}

TEST(Search, BalancedSelfF1IsHundred) {
  const auto& d = small_data();
  const auto s = hyper_search<float>(small_config(ModelKind::kBalancedTrees), {}, 5, d.train, d.dev, d.table);
  ASSERT_TRUE(s.summary.self_f1.has_value());
  EXPECT_EQ(*s.summary.self_f1, 100.0);
  // runs differ in sampled settings and seeds
  EXPECT_NE(s.runs[0].config.lr, s.runs[1].config.lr);
  EXPECT_NE(s.runs[0].config.seed, s.runs[1].config.seed);
}

TEST(Search, SummaryPermutationInvariant) {
  const auto& d = small_data();
  auto s = hyper_search<float>(small_config(ModelKind::kStGumbel), {}, 4, d.train, d.dev, d.table);
  const auto ref = to_json(s.summary).dump();
  std::vector<int> idx = {0, 1, 2, 3};
  while (std::next_permutation(idx.begin(), idx.end())) {
    std::vector<RunResult> perm;
    for (int i : idx) perm.push_back(s.runs[static_cast<std::size_t>(i)]);
    EXPECT_EQ(to_json(summarize(perm)).dump(), ref);
  }
}

TEST(Search, SampledRangesRespected) {
  SearchRanges ranges;
  const auto base = small_config(ModelKind::kRlSpinn);
  for (int i = 0; i < 200; ++i) {
    const auto c = sample_config(base, ranges, 3, i);
    EXPECT_GE(c.lr, ranges.lr_min);
    EXPECT_LE(c.lr, ranges.lr_max);
    EXPECT_GE(c.l2, ranges.l2_min);
    EXPECT_LE(c.l2, ranges.l2_max);
    EXPECT_GE(c.dropout, ranges.dropout_min);
    EXPECT_LE(c.dropout, ranges.dropout_max);
    EXPECT_GE(c.rl_weight, ranges.rl_weight_min);
    EXPECT_LE(c.rl_weight, ranges.rl_weight_max);
    EXPECT_NE(std::find(ranges.tracker_dims.begin(), ranges.tracker_dims.end(), c.tracker_dim),
              ranges.tracker_dims.end());
  }
}
