// ltl: data tools, training, parsing and analysis from one entry point.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltl/encoders.hpp"
#include "ltl/error.hpp"
#include "ltl/gradcore.hpp"
#include "ltl/parsemetrics.hpp"
#include "ltl/parsemetrics/report.hpp"
#include "ltl/trainer.hpp"
#include "ltl/treekit.hpp"
#include "ltl/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ltl;

namespace {

std::string g_command_line;

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::uint64_t file_hash(const std::string& path) { return fnv1a(read_file(path)); }

void write_text(const std::string& path, const std::string& text) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << text;
}

json provenance(std::uint64_t seed, const std::string& corpus_hash) {
  json p;
  p["command_line"] = g_command_line;
  p["seed"] = seed;
  p["corpus_hash"] = corpus_hash;
  p["version"] = kVersion;
  return p;
}

void write_report(const std::string& path, const json& report, const std::string& format) {
  const std::string text = format == "csv" ? to_csv(nlohmann::json(report)) : report.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

// --- gen-data

struct GenDataArgs {
  std::size_t size = 1000;
  std::size_t min_len = 4;
  std::size_t max_len = 12;
  std::string id_prefix = "p";
  std::string embeddings_out;
  long dim = 32;
};

void cmd_gen_data(const GenDataArgs& a, std::uint64_t seed, const std::string& out) {
  const auto corpus = gen_synthetic(a.size, a.min_len, a.max_len, seed, a.id_prefix);
  std::ostringstream s;
  corpus.write_jsonl(s);
  write_text(out, s.str());
  if (!a.embeddings_out.empty()) {
    std::ostringstream e;
    synthetic_embeddings(a.dim, derive_seed(seed, "embeddings")).write(e);
    write_text(a.embeddings_out, e.str());
  }
}

// --- trees

BinaryTree strategy_tree(const std::string& strategy, std::size_t n, Rng& rng) {
  if (strategy == "left") return gen_left(n);
  if (strategy == "right") return gen_right(n);
  if (strategy == "balanced") return gen_balanced(n);
  if (strategy == "random-transitions") return gen_random_transitions(n, rng);
  return gen_random_merge(n, rng);
}

void cmd_trees(const std::string& strategy, const std::string& corpus_path, std::uint64_t seed, const std::string& out) {
  const auto corpus = Corpus::load(corpus_path);
  Rng rng(derive_seed(seed, "trees:" + strategy));
  ParseSet ps;
  for (const auto& ex : corpus.examples) {
    ps.add(sentence_key(ex.id, 1), strategy_tree(strategy, ex.s1.size(), rng), ex.s1.tokens);
    ps.add(sentence_key(ex.id, 2), strategy_tree(strategy, ex.s2.size(), rng), ex.s2.tokens);
  }
  write_text(out, ps.to_text());
}

// --- binarize

void cmd_binarize(const std::string& in_path, const std::string& out) {
  std::istringstream in(read_file(in_path));
  ParseSet ps;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::kData, in_path + ":" + std::to_string(line_no) + ": expected 'id<TAB>tree'");
    }
    try {
      const auto b = binarize(collapse_unary(parse_labeled(std::string_view(line).substr(tab + 1))));
      ps.add(line.substr(0, tab), b.tree, b.tokens);
    } catch (const Error& e) {
      throw Error(e.kind(), in_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  write_text(out, ps.to_text());
}

// --- train / search

struct TrainArgs {
  std::string config;
  std::string model;
  std::string train;
  std::string dev;
  std::string embeddings;
  long max_steps = 0;
  long eval_interval = 0;
  int k = 5;
};

struct LoadedData {
  ExperimentConfig cfg;
  Corpus train;
  Corpus dev;
  EmbeddingTable table;
  std::string corpus_hash;
};

LoadedData load_training(const TrainArgs& a, const CLI::Option* seed_opt, std::uint64_t seed) {
  LoadedData d;
  if (!a.config.empty()) d.cfg = config_from_json(nlohmann::json::parse(read_file(a.config)));
  if (!a.model.empty()) d.cfg.model = parse_model(a.model);
  if (!a.train.empty()) d.cfg.train_path = a.train;
  if (!a.dev.empty()) d.cfg.dev_path = a.dev;
  if (!a.embeddings.empty()) d.cfg.embeddings_path = a.embeddings;
  if (a.max_steps > 0) d.cfg.max_steps = a.max_steps;
  if (a.eval_interval > 0) d.cfg.eval_interval = a.eval_interval;
  if (seed_opt->count() > 0) d.cfg.seed = seed;
  d.cfg.validate();
  if (d.cfg.train_path.empty() || d.cfg.dev_path.empty() || d.cfg.embeddings_path.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "train, dev and embeddings paths are required");
  }
  d.train = Corpus::load(d.cfg.train_path);
  d.dev = Corpus::load(d.cfg.dev_path);
  auto vocab = d.train.vocabulary();
  for (const auto& t : d.dev.vocabulary()) vocab.insert(t);
  d.table = load_embeddings(d.cfg.embeddings_path, &vocab);
  d.corpus_hash = hex(d.train.fingerprint()) + ":" + hex(d.dev.fingerprint());
  return d;
}

void cmd_train(const TrainArgs& a, const CLI::Option* seed_opt, std::uint64_t seed, const std::string& out) {
  const auto d = load_training(a, seed_opt, seed);
  TrainOptions opts;
  opts.out_dir = out;
  opts.log = &std::cerr;
  const auto r = train<float>(d.cfg, d.train, d.dev, d.table, opts);
  json report;
  report["provenance"] = provenance(d.cfg.seed, d.corpus_hash);
  report["result"] = to_json(r);
  write_report((fs::path(out) / "result.json").string(), report, "json");
  write_report((fs::path(out) / "result.csv").string(), report, "csv");
  std::cout << model_name(d.cfg.model) << " best dev accuracy " << r.best_dev_accuracy << " at step " << r.best_step
            << " (majority " << r.majority_rate << ")\n";
}

void cmd_search(const TrainArgs& a, const CLI::Option* seed_opt, std::uint64_t seed, const std::string& out) {
  const auto d = load_training(a, seed_opt, seed);
  TrainOptions opts;
  opts.out_dir = out;
  const auto s = hyper_search<float>(d.cfg, SearchRanges{}, a.k, d.train, d.dev, d.table, opts);
  json report;
  report["provenance"] = provenance(d.cfg.seed, d.corpus_hash);
  report["model"] = model_name(d.cfg.model);
  report["summary"] = to_json(s.summary);
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back(to_json(r));
  report["runs"] = std::move(runs);
  write_report((fs::path(out) / "summary.json").string(), report, "json");
  write_report((fs::path(out) / "summary.csv").string(), report, "csv");
  std::cout << model_name(d.cfg.model) << " dev accuracy mean " << s.summary.mean << " sd " << s.summary.stddev
            << " max " << s.summary.max;
  if (s.summary.self_f1) std::cout << " self F1 " << *s.summary.self_f1;
  std::cout << '\n';
}

// --- parse

template <class T>
void parse_with(const nlohmann::json& ckpt, const std::string& corpus_path, const std::string& embeddings,
                std::uint64_t seed, const std::string& out, const std::string& dist_out) {
  const auto model = load_model<T>(ckpt);
  const auto& cfg = model.config();
  if (!produces_parses(cfg.model)) {
    throw Error(ErrorKind::kVariantMismatch, std::string("a ") + model_name(cfg.model) + " checkpoint has no parser");
  }
  const auto corpus = Corpus::load(corpus_path);
  const auto vocab = corpus.vocabulary();
  const auto table = load_embeddings(embeddings.empty() ? cfg.embeddings_path : embeddings, &vocab);
  ParseSet ps;
  json sentences = json::array();
  RngStream unused(0);
  for (const auto& ex : corpus.examples) {
    for (int which : {1, 2}) {
      const auto& s = which == 1 ? ex.s1 : ex.s2;
      const auto key = sentence_key(ex.id, which);
      Graph<T> g(false);
      const auto enc = model.encode(g, s, table, Phase::kEval, unused, key);
      ps.add(key, *enc.tree, s.tokens);
      if (dist_out.empty()) continue;
      json entry;
      entry["id"] = key;
      if (cfg.model == ModelKind::kStGumbel) {
        json layers = json::array();
        for (const auto& layer : enc.distributions) layers.push_back(layer);
        entry["layers"] = std::move(layers);
      } else {
        json steps = json::array();
        for (const auto& p : enc.transition_probs) steps.push_back({p[0], p[1]});
        entry["transition_probs"] = std::move(steps);
      }
      sentences.push_back(std::move(entry));
    }
  }
  write_text(out, ps.to_text());
  if (!dist_out.empty()) {
    json report;
    report["provenance"] = provenance(seed, hex(corpus.fingerprint()));
    report["model"] = model_name(cfg.model);
    report["sentences"] = std::move(sentences);
    write_text(dist_out, report.dump() + "\n");
  }
}

void cmd_parse(const std::string& ckpt_path, const std::string& corpus_path, const std::string& embeddings,
               bool emit, std::string dist_out, std::uint64_t seed, const std::string& out) {
  const auto ckpt = read_json_file(ckpt_path);
  if (emit && dist_out.empty()) dist_out = out + ".distributions.json";
  if (!emit) dist_out.clear();
  if (ckpt.value("scalar", "float") == "double") {
    parse_with<double>(ckpt, corpus_path, embeddings, seed, out, dist_out);
  } else {
    parse_with<float>(ckpt, corpus_path, embeddings, seed, out, dist_out);
  }
}

// --- analyze

json report_json(const MetricReport& r) { return json(nlohmann::json(to_json(r))); }

void cmd_analyze(const std::vector<std::string>& preds, const std::string& ref_path, const std::string& labeled_ref,
                 const std::string& format, std::uint64_t seed, const std::string& out) {
  const auto ref = ParseSet::load(ref_path);
  std::optional<LabeledReference> labeled;
  if (!labeled_ref.empty()) labeled = LabeledReference::load(labeled_ref);
  std::string hashes = hex(file_hash(ref_path));
  json report;
  json per_file = json::array();
  std::vector<ParseSet> sets;
  for (const auto& path : preds) {
    hashes += ":" + hex(file_hash(path));
    sets.push_back(ParseSet::load(path));
    const auto& ps = sets.back();
    json entry;
    entry["file"] = path;
    entry["f1"] = report_json(corpus_f1(ps, ref));
    entry["depth"] = report_json(corpus_macro_depth(ps));
    entry["edges"] = report_json(edge_stats(ps));
    entry["negation"] = report_json(negation_stats(ps));
    if (labeled) entry["label_recall"] = label_recall_table(ps, *labeled);
    per_file.push_back(std::move(entry));
  }
  report["provenance"] = provenance(seed, hashes);
  report["reference"] = {{"file", ref_path},
                         {"depth", report_json(corpus_macro_depth(ref))},
                         {"edges", report_json(edge_stats(ref))}};
  report["predictions"] = std::move(per_file);
  if (sets.size() >= 2) report["self_f1"] = self_f1(sets);
  write_report(out, report, format);
}

// --- gradcheck

int cmd_gradcheck(double eps, std::size_t coords, double tolerance, std::uint64_t seed, const std::string& out) {
  json report;
  report["provenance"] = provenance(seed, "");
  report["eps"] = eps;
  report["tolerance"] = tolerance;
  json paths = json::array();
  bool ok = true;
  for (const auto& r : run_gradient_suite(seed, eps, coords)) {
    ok = ok && gradient_ok(r, tolerance);
    paths.push_back(to_json(r));
    std::cout << r.path << " " << r.max_rel_error << '\n';
  }
  report["paths"] = std::move(paths);
  report["passed"] = ok;
  write_report(out, report, "json");
  if (!ok) {
    std::cerr << "error: gradient check above tolerance\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  g_command_line = "ltl";
  for (int i = 1; i < argc; ++i) g_command_line += std::string(" ") + argv[i];

  CLI::App app{"latent tree learning lab"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string out;
  auto common = [&](CLI::App* sub, bool out_required) {
    auto* s = sub->add_option("--seed", seed, "random seed");
    auto* o = sub->add_option("--out", out, "output path");
    if (out_required) o->required();
    return s;
  };

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "write a synthetic corpus");
  common(gen_cmd, true);
  gen_cmd->add_option("--size", gen.size, "number of pairs");
  gen_cmd->add_option("--min-len", gen.min_len, "shortest sentence");
  gen_cmd->add_option("--max-len", gen.max_len, "longest sentence");
  gen_cmd->add_option("--id-prefix", gen.id_prefix, "pair id prefix");
  gen_cmd->add_option("--embeddings-out", gen.embeddings_out, "also write random embeddings here");
  gen_cmd->add_option("--dim", gen.dim, "embedding width");

  std::string strategy, lengths_from;
  auto* trees_cmd = app.add_subcommand("trees", "baseline trees for every sentence of a corpus");
  common(trees_cmd, true);
  trees_cmd->add_option("--strategy", strategy)
      ->required()
      ->check(CLI::IsMember({"left", "right", "balanced", "random-transitions", "random-merge"}));
  trees_cmd->add_option("--lengths-from", lengths_from, "corpus JSONL")->required();

  std::string bin_in;
  auto* bin_cmd = app.add_subcommand("binarize", "labeled trees to binary parse file");
  common(bin_cmd, true);
  bin_cmd->add_option("--in", bin_in, "id<TAB>labeled tree per line")->required();

  TrainArgs targs;
  auto add_train_options = [&](CLI::App* sub) {
    sub->add_option("--config", targs.config, "JSON config");
    sub->add_option("--model", targs.model, "model name")->check(CLI::IsMember(std::vector<std::string>(
                                                                   kModelNames.begin(), kModelNames.end())));
    sub->add_option("--train", targs.train, "training corpus");
    sub->add_option("--dev", targs.dev, "dev corpus");
    sub->add_option("--embeddings", targs.embeddings, "embedding file");
    sub->add_option("--max-steps", targs.max_steps);
    sub->add_option("--eval-interval", targs.eval_interval);
  };
  auto* train_cmd = app.add_subcommand("train", "train one model");
  auto* train_seed = common(train_cmd, true);
  add_train_options(train_cmd);
  auto* search_cmd = app.add_subcommand("search", "k runs with sampled hyperparameters");
  auto* search_seed = common(search_cmd, true);
  add_train_options(search_cmd);
  search_cmd->add_option("--k", targs.k, "number of runs")->check(CLI::PositiveNumber);

  std::string ckpt, corpus_path, embeddings, dist_out;
  bool emit = false;
  auto* parse_cmd = app.add_subcommand("parse", "eval-mode parses from a checkpoint");
  common(parse_cmd, true);
  parse_cmd->add_option("--checkpoint", ckpt)->required();
  parse_cmd->add_option("--corpus", corpus_path)->required();
  parse_cmd->add_option("--embeddings", embeddings, "override the checkpoint's embedding path");
  parse_cmd->add_flag("--emit-distributions", emit, "also write per-step distributions as JSON");
  parse_cmd->add_option("--distributions-out", dist_out, "default: <out>.distributions.json");

  std::vector<std::string> preds;
  std::string ref, labeled_ref, format = "json";
  auto* analyze_cmd = app.add_subcommand("analyze", "parse metrics report");
  common(analyze_cmd, false);
  analyze_cmd->add_option("--pred", preds, "parse files")->required();
  analyze_cmd->add_option("--ref", ref, "reference parse file")->required();
  analyze_cmd->add_option("--labeled-ref", labeled_ref, "labeled reference trees");
  analyze_cmd->add_option("--report", format)->check(CLI::IsMember({"json", "csv"}));

  double eps = 1e-5, tolerance = 1e-4;
  std::size_t coords = 600;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every differentiable path");
  common(grad_cmd, false);
  grad_cmd->add_option("--eps", eps);
  grad_cmd->add_option("--coords", coords, "coordinates sampled per path");
  grad_cmd->add_option("--tolerance", tolerance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) cmd_gen_data(gen, seed, out);
    if (*trees_cmd) cmd_trees(strategy, lengths_from, seed, out);
    if (*bin_cmd) cmd_binarize(bin_in, out);
    if (*train_cmd) cmd_train(targs, train_seed, seed, out);
    if (*search_cmd) cmd_search(targs, search_seed, seed, out);
    if (*parse_cmd) cmd_parse(ckpt, corpus_path, embeddings, emit, dist_out, seed, out);
    if (*analyze_cmd) cmd_analyze(preds, ref, labeled_ref, format, seed, out);
    if (*grad_cmd) return cmd_gradcheck(eps, coords, tolerance, seed, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
