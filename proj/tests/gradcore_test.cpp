#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "ltl/gradcore.hpp"
#include "support.hpp"

namespace {

using ltl::Expr;
using ltl::Graph;
using ltl::Matrix;
using ltl::ParameterStore;
using Mat = Matrix<double>;

Mat random_matrix(ltl::Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

ltl::Parameter<double>& add_random(ParameterStore<double>& store, const std::string& name, Eigen::Index r,
                                   Eigen::Index c, ltl::Rng& rng, double lo = -1.0, double hi = 1.0) {
  auto& p = store.add(name, r, c, ltl::Init::kZero, rng);
  p.value = random_matrix(rng, r, c, lo, hi);
  return p;
}

// Contracts an op output against a fixed random weight so that gradients are
// O(1) and distinct per coordinate.
Expr<double> probe(Graph<double>& g, Expr<double> out, std::uint64_t seed) {
  ltl::Rng rng(seed);
  return ltl::sum(ltl::cmul(out, g.input(random_matrix(rng, out.rows(), out.cols()))));
}

struct OpCase {
  std::string name;
  std::function<Expr<double>(Graph<double>&, ParameterStore<double>&)> build;
};

double check(ParameterStore<double>& store, const std::function<Expr<double>(Graph<double>&)>& f) {
  ltl::GradCheckOptions opts;
  opts.min_coords = 200;
  return ltl::grad_check(f, store, opts).max_rel_error;
}

}  // namespace

TEST(OpsTest, SoftmaxValues) {
  Graph<double> g;
  Mat x(3, 1);
  x << 2, 1, 0;
  const auto y = ltl::softmax(g.input(x)).value();
  const double z = std::exp(2.0) + std::exp(1.0) + 1.0;
  EXPECT_NEAR(y(0, 0), std::exp(2.0) / z, 1e-15);
  EXPECT_NEAR(y(1, 0), std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(y(2, 0), 1.0 / z, 1e-15);
  EXPECT_NEAR(y(0, 0), 0.6652, 5e-5);
  EXPECT_NEAR(y(1, 0), 0.2447, 5e-5);
  EXPECT_NEAR(y(2, 0), 0.0900, 5e-5);
}

TEST(OpsTest, ReluSubgradientAtZeroIsZero) {
  ltl::Rng rng(1);
  ParameterStore<double> store;
  auto& p = store.add("x", 3, 1, ltl::Init::kZero, rng);
  p.value << -1, 0, 2;
  Graph<double> g;
  g.backward(ltl::sum(ltl::relu(g.param(p))));
  EXPECT_EQ(p.grad(0, 0), 0.0);
  EXPECT_EQ(p.grad(1, 0), 0.0);
  EXPECT_EQ(p.grad(2, 0), 1.0);
}

TEST(OpsTest, Dropout) {
  ltl::Rng rng(2);
  Graph<double> g;
  const auto x = g.input(Mat::Ones(100, 100));
  const auto same = ltl::dropout(x, 0.0, rng);
  EXPECT_EQ(same.id, x.id);
  try {
    ltl::dropout(x, 1.0, rng);
    FAIL();
  } catch (const ltl::Error& e) {
    EXPECT_EQ(e.kind(), ltl::ErrorKind::kInvalidConfig);
  }
  const auto d = ltl::dropout(x, 0.25, rng).value();
  EXPECT_NEAR(d.mean(), 1.0, 0.02);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    EXPECT_TRUE(d.data()[i] == 0.0 || std::abs(d.data()[i] - 1.0 / 0.75) < 1e-12);
  }
}

TEST(OpsTest, ShapeMismatchNamesBothShapes) {
  Graph<double> g;
  try {
    ltl::matmul(g.input(Mat::Zero(3, 4)), g.input(Mat::Zero(5, 1)));
    FAIL();
  } catch (const ltl::Error& e) {
    EXPECT_EQ(e.kind(), ltl::ErrorKind::kShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("3x4"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("5x1"), std::string::npos);
  }
  EXPECT_THROW(ltl::add(g.input(Mat::Zero(2, 1)), g.input(Mat::Zero(3, 1))), ltl::Error);
}

TEST(OpsTest, MaskedLogSoftmaxGivesExactZeroProbability) {
  Graph<double> g;
  Mat x(2, 1);
  x << 3.0, -1.0;
  const auto y = ltl::log_softmax(g.input(x), {true, false}).value();
  EXPECT_EQ(y(0, 0), 0.0);
  EXPECT_EQ(std::exp(y(1, 0)), 0.0);
}

TEST(BackwardTest, MatmulGradientIsOuterProduct) {
  ltl::Rng rng(3);
  ParameterStore<double> store;
  auto& w = add_random(store, "W", 4, 3, rng);
  const Mat x = random_matrix(rng, 3, 1);
  Graph<double> g;
  g.backward(ltl::sum(ltl::matmul(g.param(w), g.input(x))));
  const Mat expected = Mat::Ones(4, 1) * x.transpose();
  EXPECT_LT((w.grad - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(check(store, [&](Graph<double>& h) { return ltl::sum(ltl::matmul(h.param(w), h.input(x))); }), 1e-9);
}

TEST(BackwardTest, UnreachableParameterHasZeroGradient) {
  ltl::Rng rng(4);
  ParameterStore<double> store;
  auto& used = add_random(store, "used", 2, 1, rng);
  auto& unused = add_random(store, "unused", 2, 1, rng);
  Graph<double> g;
  g.param(unused);
  g.backward(ltl::sum(ltl::tanh(g.param(used))));
  EXPECT_EQ(unused.grad.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(used.grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BackwardTest, SingleUseAndScalarContracts) {
  ltl::Rng rng(5);
  ParameterStore<double> store;
  auto& p = add_random(store, "p", 2, 2, rng);
  Graph<double> g;
  const auto loss = ltl::sum(g.param(p));
  g.backward(loss);
  try {
    g.backward(loss);
    FAIL();
  } catch (const ltl::Error& e) {
    EXPECT_EQ(e.kind(), ltl::ErrorKind::kGraphConsumed);
  }
  Graph<double> h;
  try {
    h.backward(h.param(p));
    FAIL();
  } catch (const ltl::Error& e) {
    EXPECT_EQ(e.kind(), ltl::ErrorKind::kNonScalarLoss);
  }
}

TEST(BackwardTest, LinearityOverRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ltl::Rng rng(seed);
    ParameterStore<double> store;
    auto& a = add_random(store, "a", 5, 5, rng);
    auto& b = add_random(store, "b", 5, 1, rng);
    auto loss1 = [&](Graph<double>& g) {
      return ltl::sum(ltl::tanh(ltl::matmul(g.param(a), g.param(b))));
    };
    auto loss2 = [&](Graph<double>& g) {
      return ltl::dot(ltl::sigmoid(g.param(b)), ltl::slice_cols(g.param(a), static_cast<Eigen::Index>(seed % 5), 1));
    };
    store.zero_grad();
    {
      Graph<double> g;
      g.backward(loss1(g));
    }
    {
      Graph<double> g;
      g.backward(loss2(g));
    }
    const Mat ga = a.grad;
    const Mat gb = b.grad;
    store.zero_grad();
    Graph<double> g;
    g.backward(ltl::add(loss1(g), loss2(g)));
    EXPECT_LT((a.grad - ga).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((b.grad - gb).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GradCheckTest, QuadraticIsExact) {
  // Central differences are exact on a quadratic; keep |f| small so that only
  // roundoff remains.
  ltl::Rng rng(6);
  ParameterStore<double> store;
  auto& p = add_random(store, "p", 3, 3, rng, 0.5, 1.0);
  const double err = check(store, [&](Graph<double>& g) {
    const auto x = g.param(p);
    return ltl::sum(ltl::cmul(x, x));
  });
  EXPECT_LT(err, 1e-9);
}

TEST(GradCheckTest, EveryOpOnRandomizedShapes) {
  ltl::Rng shapes(7);
  for (int round = 0; round < 3; ++round) {
    const auto r = static_cast<Eigen::Index>(1 + shapes.below(round == 2 ? 64 : 12));
    const auto c = static_cast<Eigen::Index>(1 + shapes.below(round == 2 ? 64 : 12));
    const auto k = static_cast<Eigen::Index>(1 + shapes.below(12));
    ltl::Rng rng(100 + static_cast<std::uint64_t>(round));
    ParameterStore<double> store;
    auto& a = add_random(store, "a", r, c, rng);
    auto& b = add_random(store, "b", r, c, rng);
    auto& w = add_random(store, "w", k, r, rng);
    auto& bias = add_random(store, "bias", k, 1, rng);
    auto& col = add_random(store, "col", r, 1, rng);
    auto& pos = add_random(store, "pos", r, c, rng, 0.5, 2.0);
    auto& s = add_random(store, "s", 1, 1, rng, 0.5, 2.0);
    auto& weights = add_random(store, "weights", c, 1, rng);

    const std::vector<OpCase> cases = {
        {"matmul", [&](auto& g, auto&) { return ltl::matmul(g.param(w), g.param(a)); }},
        {"affine", [&](auto& g, auto&) { return ltl::affine(g.param(w), g.param(a), g.param(bias)); }},
        {"add", [&](auto& g, auto&) { return ltl::add(g.param(a), g.param(b)); }},
        {"sub", [&](auto& g, auto&) { return ltl::sub(g.param(a), g.param(b)); }},
        {"cmul", [&](auto& g, auto&) { return ltl::cmul(g.param(a), g.param(b)); }},
        {"affine_scalar", [&](auto& g, auto&) { return ltl::affine_scalar(g.param(a), -1.5, 0.25); }},
        {"mul_scalar", [&](auto& g, auto&) { return ltl::mul_scalar(g.param(a), g.param(s)); }},
        {"div_scalar", [&](auto& g, auto&) { return ltl::div_scalar(g.param(a), g.param(s)); }},
        {"concat_rows", [&](auto& g, auto&) { return ltl::concat_rows<double>({g.param(a), g.param(b)}); }},
        {"concat_cols", [&](auto& g, auto&) { return ltl::concat_cols<double>({g.param(a), g.param(col), g.param(b)}); }},
        {"slice_rows", [&](auto& g, auto&) { return ltl::slice_rows(g.param(a), r / 2, r - r / 2); }},
        {"slice_cols", [&](auto& g, auto&) { return ltl::slice_cols(g.param(a), c / 2, c - c / 2); }},
        {"transpose", [&](auto& g, auto&) { return ltl::transpose(g.param(a)); }},
        {"tanh", [&](auto& g, auto&) { return ltl::tanh(g.param(a)); }},
        {"sigmoid", [&](auto& g, auto&) { return ltl::sigmoid(g.param(a)); }},
        {"relu", [&](auto& g, auto&) { return ltl::relu(g.param(a)); }},
        {"exp", [&](auto& g, auto&) { return ltl::exp(g.param(a)); }},
        {"log", [&](auto& g, auto&) { return ltl::log(g.param(pos)); }},
        {"softplus", [&](auto& g, auto&) { return ltl::softplus(g.param(a)); }},
        {"softmax", [&](auto& g, auto&) { return ltl::softmax(g.param(a)); }},
        {"log_softmax", [&](auto& g, auto&) { return ltl::log_softmax(g.param(col)); }},
        {"sum", [&](auto& g, auto&) { return ltl::sum(g.param(a)); }},
        {"mean", [&](auto& g, auto&) { return ltl::mean(g.param(a)); }},
        {"dot", [&](auto& g, auto&) { return ltl::dot(g.param(a), g.param(b)); }},
        {"mul_cols", [&](auto& g, auto&) { return ltl::mul_cols(g.param(a), g.param(weights)); }},
        {"cumsum", [&](auto& g, auto&) { return ltl::cumsum(g.param(col)); }},
        {"cross_entropy", [&](auto& g, auto&) { return ltl::cross_entropy(g.param(col), r - 1); }},
        {"lookup", [&](auto& g, auto&) { return ltl::lookup(g, a, c - 1); }},
        {"dropout", [&](auto& g, auto&) {
           ltl::Rng fixed(9);
           return ltl::dropout(g.param(a), 0.3, fixed);
         }},
    };
    for (const auto& oc : cases) {
      const double err = check(store, [&](Graph<double>& g) { return probe(g, oc.build(g, store), 77); });
      EXPECT_LT(err, 1e-4) << oc.name << " at " << r << "x" << c;
    }
  }
}

TEST(GradCheckTest, StopGradientBlocksFlow) {
  ltl::Rng rng(8);
  ParameterStore<double> store;
  auto& p = add_random(store, "p", 3, 1, rng);
  Graph<double> g;
  g.backward(ltl::sum(ltl::cmul(ltl::stop_gradient(g.param(p)), g.input(Mat::Ones(3, 1)))));
  EXPECT_EQ(p.grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GradCheckTest, CustomGradientRuleIsUsed) {
  ltl::Rng rng(9);
  ParameterStore<double> store;
  auto& p = add_random(store, "p", 3, 1, rng);
  Graph<double> g;
  const auto x = g.param(p);
  // Forward rounds to a step function; backward passes the gradient straight through.
  const Mat rounded = x.value().array().round();
  const auto y = ltl::custom_gradient<double>(rounded, {x}, [](const Mat& gout) { return std::vector<Mat>{gout * 2.0}; });
  EXPECT_EQ(y.value(), rounded);
  g.backward(ltl::sum(y));
  EXPECT_EQ(p.grad, Mat::Constant(3, 1, 2.0));
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ltl::Rng rng(10);
  ParameterStore<double> store;
  auto& p = add_random(store, "p", 4, 3, rng);
  const Mat before = p.value;
  p.grad.setOnes();
  ltl::adam_step(store, {.lr = 0.01});
  EXPECT_LT(((before - p.value).array() - 0.01).abs().maxCoeff(), 1e-8);
  EXPECT_EQ(store.step(), 1);
  EXPECT_EQ(p.grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(AdamTest, ZeroGradientLeavesParametersAndDecayShrinks) {
  ltl::Rng rng(11);
  ParameterStore<double> store;
  auto& p = add_random(store, "p", 4, 3, rng);
  auto& frozen = add_random(store, "q", 2, 2, rng);
  frozen.decay = false;
  const Mat before = p.value;
  const Mat frozen_before = frozen.value;
  ltl::adam_step(store, {.lr = 0.01});
  EXPECT_EQ(p.value, before);
  ltl::adam_step(store, {.lr = 0.01, .l2 = 0.1});
  EXPECT_LT(p.value.cwiseAbs().sum(), before.cwiseAbs().sum());
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    EXPECT_LE(std::abs(p.value.data()[i]), std::abs(before.data()[i]));
  }
  EXPECT_EQ(frozen.value, frozen_before);
}

TEST(AdamTest, NaNGuardNamesParameter) {
  ltl::Rng rng(12);
  ParameterStore<double> store;
  auto& p = add_random(store, "tracker/W", 2, 2, rng);
  p.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    ltl::adam_step(store, {});
    FAIL();
  } catch (const ltl::Error& e) {
    EXPECT_EQ(e.kind(), ltl::ErrorKind::kNaNGuard);
    EXPECT_NE(std::string(e.what()).find("tracker/W"), std::string::npos);
  }
}

TEST(CheckpointTest, RoundTripIsBitwise) {
  ltl::RngStream streams(13);
  ParameterStore<double> store;
  store.add("a", 5, 7, ltl::Init::kGlorot, streams.stream("init"));
  store.add("b", 3, 1, ltl::Init::kConstant, streams.stream("init"), 1.0);
  store[0].grad.setConstant(0.3);
  ltl::adam_step(store, {.lr = 0.1});
  streams.stream("dropout").next();
  const auto text = ltl::checkpoint_to_json(store, &streams).dump();

  ltl::RngStream other(13);
  ParameterStore<double> loaded;
  loaded.add("a", 5, 7, ltl::Init::kZero, other.stream("init"));
  loaded.add("b", 3, 1, ltl::Init::kZero, other.stream("init"));
  ltl::checkpoint_from_json(nlohmann::json::parse(text), loaded, &other);
  for (std::size_t k = 0; k < store.size(); ++k) {
    EXPECT_EQ(std::memcmp(store[k].value.data(), loaded[k].value.data(), store[k].size() * sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(store[k].m.data(), loaded[k].m.data(), store[k].size() * sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(store[k].v.data(), loaded[k].v.data(), store[k].size() * sizeof(double)), 0);
  }
  EXPECT_EQ(loaded.step(), 1);
  EXPECT_EQ(streams.stream("dropout").next(), other.stream("dropout").next());
  EXPECT_EQ(ltl::checkpoint_to_json(loaded, &other).dump(), ltl::checkpoint_to_json(store, &streams).dump());
}

TEST(CheckpointTest, ShapeMismatchRejected) {
  ltl::Rng rng(14);
  ParameterStore<double> a;
  a.add("w", 2, 2, ltl::Init::kGlorot, rng);
  ParameterStore<double> b;
  b.add("w", 3, 2, ltl::Init::kZero, rng);
  EXPECT_THROW(ltl::checkpoint_from_json(ltl::checkpoint_to_json(a), b), ltl::Error);
}

TEST(RngTest, SeedsAndSubstreams) {
  ltl::RngStream a(42);
  ltl::RngStream b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.stream("gumbel").next(), b.stream("gumbel").next());
  // Drawing from one substream does not perturb another.
  ltl::RngStream c(42);
  ltl::RngStream d(42);
  for (int i = 0; i < 5; ++i) c.stream("dropout").next();
  EXPECT_EQ(c.stream("policy").next(), d.stream("policy").next());
  EXPECT_NE(ltl::RngStream(1).stream("x").next(), ltl::RngStream(2).stream("x").next());
}

TEST(RngTest, IdenticalSeedGivesIdenticalInitBytes) {
  auto init = [](std::uint64_t seed) {
    ltl::RngStream streams(seed);
    ParameterStore<float> store;
    store.add("w", 16, 9, ltl::Init::kGlorot, streams.stream("init"));
    return ltl::checkpoint_to_json(store).dump();
  };
  EXPECT_EQ(init(5), init(5));
  EXPECT_NE(init(5), init(6));
}

TEST(PrecisionTest, FloatAndDoubleShareOneCodePath) {
  ltl::Rng rng(15);
  const Mat w = random_matrix(rng, 6, 4);
  const Mat x = random_matrix(rng, 4, 1);
  Graph<double> gd;
  const double vd = ltl::sum(ltl::tanh(ltl::matmul(gd.input(w), gd.input(x)))).scalar();
  Graph<float> gf;
  const float vf = ltl::sum(ltl::tanh(ltl::matmul(gf.input(w.cast<float>()), gf.input(x.cast<float>())))).scalar();
  EXPECT_NEAR(vd, static_cast<double>(vf), 1e-5);
}

TEST(GraphTest, InferenceGraphMatchesAndKeepsNoGradients) {
  ltl::Rng rng(41);
  ltl::ParameterStore<double> store;
  auto& w = store.add("w", 3, 4, ltl::Init::kGlorot, rng);
  const testing_support::Mat x = testing_support::random_matrix(rng, 4, 2);
  ltl::Graph<double> train;
  ltl::Graph<double> infer(false);
  const auto a = ltl::sum(ltl::tanh(ltl::matmul(train.param(w), train.input(x))));
  const auto b = ltl::sum(ltl::tanh(ltl::matmul(infer.param(w), infer.input(x))));
  EXPECT_EQ(a.value(), b.value());
  EXPECT_FALSE(infer.needs_grad(b.id));
  infer.backward(b);
  EXPECT_TRUE(w.grad.isZero(0.0));
}
