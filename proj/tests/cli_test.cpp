#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ltl/gradcore/checkpoint.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("ltl_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string(LTL_CLI) + " " + args + " >" + path("stdout.txt") + " 2>" + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string pair_line(const std::string& id, const std::string& s1, const std::string& s2) {
  return "{\"pairID\":\"" + id + "\",\"sentence1\":\"" + s1 + "\",\"sentence2\":\"" + s2 +
         "\",\"gold_label\":\"neutral\"}\n";
}

nlohmann::json report(const std::string& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST(Cli, BalancedAndLeftTrees) {
  write(path("c.jsonl"), pair_line("a", "t0 t1 t2 t3", "t0 t1 t2"));
  ASSERT_EQ(run("trees --strategy balanced --lengths-from " + path("c.jsonl") + " --out " + path("bal.txt")), 0);
  EXPECT_EQ(slurp(path("bal.txt")), "a:1\t( ( t0 t1 ) ( t2 t3 ) )\na:2\t( t0 ( t1 t2 ) )\n");
  ASSERT_EQ(run("trees --strategy left --lengths-from " + path("c.jsonl") + " --out " + path("left.txt")), 0);
  EXPECT_EQ(slurp(path("left.txt")), "a:1\t( ( ( t0 t1 ) t2 ) t3 )\na:2\t( ( t0 t1 ) t2 )\n");
}

TEST(Cli, RandomTreesRepeatUnderSeed) {
  ASSERT_EQ(run("gen-data --size 200 --seed 5 --out " + path("g.jsonl")), 0);
  for (const std::string s : {"random-transitions", "random-merge"}) {
    const std::string base = "trees --strategy " + s + " --lengths-from " + path("g.jsonl") + " --seed 9 --out ";
    ASSERT_EQ(run(base + path("r1.txt")), 0);
    ASSERT_EQ(run(base + path("r2.txt")), 0);
    EXPECT_EQ(slurp(path("r1.txt")), slurp(path("r2.txt")));
    ASSERT_EQ(run("trees --strategy " + s + " --lengths-from " + path("g.jsonl") + " --seed 10 --out " + path("r3.txt")),
              0);
    EXPECT_NE(slurp(path("r1.txt")), slurp(path("r3.txt")));
  }
}

TEST(Cli, MalformedCorpusLineReported) {
  write(path("bad.jsonl"), pair_line("a", "1 2", "3") + "{not json\n");
  EXPECT_EQ(run("trees --strategy left --lengths-from " + path("bad.jsonl") + " --out " + path("x.txt")), 3);
  EXPECT_NE(slurp(path("stderr.txt")).find("bad.jsonl:2"), std::string::npos) << slurp(path("stderr.txt"));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("trees --strategy sideways --lengths-from x --out y"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("trees --strategy left"), 2);
}

TEST(Cli, AnalyzeF1AndSelfF1) {
  write(path("c3.jsonl"), pair_line("a", "x y z", "u v w") + pair_line("b", "p q r", "s t o"));
  const std::string c = " --lengths-from " + path("c3.jsonl") + " --out ";
  ASSERT_EQ(run("trees --strategy left" + c + path("l3.txt")), 0);
  ASSERT_EQ(run("trees --strategy right" + c + path("r3.txt")), 0);
  ASSERT_EQ(run("analyze --pred " + path("l3.txt") + " --ref " + path("l3.txt") + " --out " + path("a1.json")), 0);
  EXPECT_EQ(report(path("a1.json"))["predictions"][0]["f1"]["mean"], 100.0);
  ASSERT_EQ(run("analyze --pred " + path("l3.txt") + " --ref " + path("r3.txt") + " --out " + path("a2.json")), 0);
  EXPECT_EQ(report(path("a2.json"))["predictions"][0]["f1"]["mean"], 50.0);

  ASSERT_EQ(run("gen-data --size 100 --seed 2 --out " + path("g2.jsonl")), 0);
  std::string preds;
  for (int i = 0; i < 5; ++i) {
    const auto p = path("bal" + std::to_string(i) + ".txt");
    ASSERT_EQ(run("trees --strategy balanced --lengths-from " + path("g2.jsonl") + " --out " + p), 0);
    preds += " " + p;
  }
  ASSERT_EQ(run("analyze --pred" + preds + " --ref " + path("bal0.txt") + " --out " + path("a3.json")), 0);
  const auto r = report(path("a3.json"));
  EXPECT_EQ(r["self_f1"], 100.0);
  EXPECT_EQ(r["predictions"][0]["edges"]["extra"]["last_two"], 100.0);
  EXPECT_TRUE(r["provenance"].contains("command_line"));
  EXPECT_TRUE(r["provenance"].contains("corpus_hash"));
  EXPECT_TRUE(r["provenance"].contains("version"));
  EXPECT_TRUE(r["provenance"].contains("seed"));
}

TEST(Cli, AnalyzeIdMismatch) {
  write(path("p1.txt"), "a\t( x y )\n");
  write(path("p2.txt"), "b\t( x y )\n");
  EXPECT_EQ(run("analyze --pred " + path("p1.txt") + " --ref " + path("p2.txt")), 3);
  EXPECT_NE(slurp(path("stderr.txt")).find("IdMismatch"), std::string::npos);
}

TEST(Cli, BinarizeLabeledTrees) {
  write(path("lab.txt"), "s1\t(S (NP (DT the) (NN cat)) (VP (VBD sat) (RB down) (RB here)))\n");
  ASSERT_EQ(run("binarize --in " + path("lab.txt") + " --out " + path("bin.txt")), 0);
  EXPECT_EQ(slurp(path("bin.txt")), "s1\t( ( the cat ) ( sat ( down here ) ) )\n");
}

TEST(Cli, TrainParseAndCollapse) {
  ASSERT_EQ(run("gen-data --size 300 --min-len 3 --max-len 8 --seed 1 --out " + path("tr.jsonl") +
                " --embeddings-out " + path("emb.txt") + " --dim 8"),
            0);
  ASSERT_EQ(run("gen-data --size 60 --min-len 3 --max-len 8 --seed 2 --id-prefix d --out " + path("dev.jsonl")), 0);
  write(path("cfg.json"), R"({"model":"rl-spinn","dim":8,"tracker_dim":8,"pair_dim":16,"batch_size":8})");
  const std::string common = " --config " + path("cfg.json") + " --train " + path("tr.jsonl") + " --dev " +
                             path("dev.jsonl") + " --embeddings " + path("emb.txt") +
                             " --max-steps 20 --eval-interval 10 --seed 4 --out ";
  ASSERT_EQ(run("train" + common + path("run_a")), 0) << slurp(path("stderr.txt"));
  ASSERT_EQ(run("train" + common + path("run_b")), 0);
  EXPECT_EQ(slurp(path("run_a/checkpoint.json")), slurp(path("run_b/checkpoint.json")));
  EXPECT_EQ(slurp(path("run_a/dev_parses.txt")), slurp(path("run_b/dev_parses.txt")));

  const std::string parse = "parse --checkpoint " + path("run_a/checkpoint.json") + " --corpus " + path("dev.jsonl");
  ASSERT_EQ(run(parse + " --emit-distributions --out " + path("p1.txt")), 0);
  ASSERT_EQ(run(parse + " --emit-distributions --out " + path("p2.txt")), 0);
  EXPECT_EQ(slurp(path("p1.txt")), slurp(path("p2.txt")));
  EXPECT_EQ(slurp(path("p1.txt")), slurp(path("run_a/dev_parses.txt")));
  const auto dist = report(path("p1.txt.distributions.json"));
  EXPECT_EQ(dist["sentences"].size(), 120u);
  EXPECT_FALSE(dist["sentences"][0]["transition_probs"].empty());

  // saturate the REDUCE logit
  auto ckpt = ltl::read_json_file(path("run_a/checkpoint.json"));
  for (auto& p : ckpt["params"]) {
    if (p["name"] == "spinn.cls.b") p["value"][1] = 10.0;
  }
  ltl::write_json_file(path("collapsed.json"), ckpt);
  ASSERT_EQ(run("parse --checkpoint " + path("collapsed.json") + " --corpus " + path("dev.jsonl") + " --out " +
                path("collapsed.txt")),
            0);
  ASSERT_EQ(run("trees --strategy left --lengths-from " + path("dev.jsonl") + " --out " + path("leftref.txt")), 0);
  ASSERT_EQ(run("analyze --pred " + path("collapsed.txt") + " --ref " + path("leftref.txt") + " --out " +
                path("collapse.json")),
            0);
  EXPECT_EQ(report(path("collapse.json"))["predictions"][0]["f1"]["mean"], 100.0);

  write(path("lstm.json"), R"({"model":"lstm","dim":8,"pair_dim":16,"batch_size":8})");
  ASSERT_EQ(run("train --config " + path("lstm.json") + " --train " + path("tr.jsonl") + " --dev " + path("dev.jsonl") +
                " --embeddings " + path("emb.txt") + " --max-steps 5 --out " + path("run_lstm")),
            0);
  EXPECT_EQ(run("parse --checkpoint " + path("run_lstm/checkpoint.json") + " --corpus " + path("dev.jsonl") +
                " --out " + path("lstm.txt")),
            3);
  EXPECT_NE(slurp(path("stderr.txt")).find("VariantMismatch"), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  ASSERT_EQ(run("gradcheck --coords 100 --out " + path("grad.json")), 0);
  EXPECT_TRUE(report(path("grad.json"))["passed"].get<bool>());
}
