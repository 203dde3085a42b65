#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sgcl/config.hpp"
#include "sgcl/encoder.hpp"
#include "sgcl/eval.hpp"
#include "sgcl/global_graph.hpp"
#include "sgcl/ingest.hpp"
#include "sgcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace sgcl;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SGCL_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

void parse_fraction(const std::string& text, BuildOptions& opts) {
  std::size_t slash = text.find('/');
  if (slash == std::string::npos) {
    opts.fraction_num = std::stoi(text);
    opts.fraction_den = 1;
  } else {
    opts.fraction_num = std::stoi(text.substr(0, slash));
    opts.fraction_den = std::stoi(text.substr(slash + 1));
  }
  if (opts.fraction_num < 1 || opts.fraction_den < 1 || opts.fraction_num > opts.fraction_den)
    throw CLI::ValidationError("--fraction must be a rational in (0, 1], e.g. 1, 1/4, 1/64");
}

RunConfig resolve_config(const std::string& config_path,
                         const std::vector<std::string>& overrides, std::uint64_t seed,
                         bool seed_given) {
  RunConfig cfg;
  cfg.train.seed = default_seed();
  if (!config_path.empty()) apply_kv(cfg, parse_kv_file(config_path));
  std::map<std::string, std::string> kv;
  for (const std::string& item : overrides) {
    std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set expects key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  apply_kv(cfg, kv);
  if (seed_given) cfg.train.seed = seed;
  return cfg;
}

struct LoadedCorpus {
  Corpus corpus;
  GlobalGraph graph;
};

LoadedCorpus load_corpus_and_graph(const std::string& dir, bool directed) {
  LoadedCorpus out;
  out.corpus = load_corpus(dir);
  std::string graph_path = dir + "/graph.sgcl";
  if (!directed && fs::exists(graph_path)) {
    out.graph = GlobalGraph::load(graph_path);
  } else {
    // the directed variant is not cached; rebuild from the train sessions
    out.graph = GlobalGraph::build(out.corpus.train, out.corpus.vocab.real_items(), directed);
  }
  return out;
}

std::vector<Session> test_examples(const Corpus& corpus, int max_len) {
  std::vector<Session> out;
  for (Session& s : expand_subsequences(corpus.test))
    out.push_back(truncate_recent(std::move(s), max_len));
  return out;
}

std::string metrics_line(const Metrics& m) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  // reported x100, matching the usual presentation of P@K / MRR@K
  os << "P@" << m.k << "=" << 100.0 * m.p_at_k << ",MRR@" << m.k << "=" << 100.0 * m.mrr_at_k;
  return os.str();
}

struct TrainOutcome {
  Metrics test_metrics;
  FitResult fit_result;
};

TrainOutcome run_training(const RunConfig& cfg, const LoadedCorpus& lc,
                          const std::string& run_dir, std::uint64_t corpus_hash,
                          bool quiet = false) {
  SynonymSampler sampler(lc.graph, cfg.k_damping);
  if (!run_dir.empty()) write_manifest(cfg, run_dir, corpus_hash);

  FitOptions opts;
  if (!run_dir.empty()) opts.checkpoint_dir = run_dir + "/checkpoints";
  if (!quiet) opts.progress = &std::cerr;
  TrainOutcome out;
  out.fit_result =
      fit(lc.corpus, cfg.encoder, cfg.loss, cfg.augment, cfg.train, sampler, opts, cfg.ln_affine);

  if (!run_dir.empty()) {
    std::ofstream log(run_dir + "/log.csv", std::ios::trunc);
    log << format_log_csv(out.fit_result.log);
  }

  std::vector<Session> tests = test_examples(lc.corpus, cfg.encoder.max_len);
  if (!tests.empty())
    out.test_metrics = evaluate(out.fit_result.params, cfg.encoder, tests, 20);
  return out;
}

int cmd_preprocess(const std::string& format_name, const std::string& fraction,
                   const std::string& in_path, const std::string& out_dir, int min_session_len,
                   int min_item_count, int window_override) {
  LogFormat format = parse_format(format_name);
  BuildOptions opts;
  opts.min_session_len = min_session_len;
  opts.min_item_count = min_item_count;
  opts.test_window_days = window_override > 0
                              ? window_override
                              : (format == LogFormat::yoochoose ? 1 : 7);
  parse_fraction(fraction, opts);

  ReadResult read = read_events_file(in_path, format);
  if (cached_corpus_matches(out_dir, read.content_hash, opts)) {
    std::cout << "corpus cache up to date in " << out_dir << "\n";
    return 0;
  }
  Corpus corpus = build_corpus(read.events, opts);
  save_corpus(corpus, out_dir, read.content_hash, opts);
  GlobalGraph graph = GlobalGraph::build(corpus.train, corpus.vocab.real_items());
  graph.save(out_dir + "/graph.sgcl");
  CorpusStats stats = corpus_stats(corpus);
  write_stats_files(stats, out_dir);
  std::cout << format_stats(stats);
  return 0;
}

int cmd_stats(const std::string& corpus_dir, bool graph_csv) {
  LoadedCorpus lc = load_corpus_and_graph(corpus_dir, false);
  if (graph_csv) {
    std::cout << "degree,count\n";
    for (const auto& [degree, count] : lc.graph.degree_stats())
      std::cout << degree << "," << count << "\n";
    return 0;
  }
  std::cout << format_stats(corpus_stats(lc.corpus));
  return 0;
}

int cmd_train(const std::string& corpus_dir, const std::string& run_dir,
              const std::string& config_path, const std::vector<std::string>& overrides,
              std::uint64_t seed, bool seed_given) {
  RunConfig cfg = resolve_config(config_path, overrides, seed, seed_given);
  LoadedCorpus lc = load_corpus_and_graph(corpus_dir, cfg.graph_directed);
  std::uint64_t hash = fnv1a(corpus_dir.data(), corpus_dir.size());
  TrainOutcome out = run_training(cfg, lc, run_dir, hash);
  std::string line = metrics_line(out.test_metrics);
  std::cout << line << "\n";
  if (!run_dir.empty()) {
    std::ofstream f(run_dir + "/final_metrics.txt", std::ios::trunc);
    f << line << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& corpus_dir, int k) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Corpus corpus = load_corpus(corpus_dir);
  std::vector<Session> tests = test_examples(corpus, ckpt.config.max_len);
  if (tests.empty()) throw std::runtime_error("corpus has no test examples");
  Metrics m = evaluate(ckpt.params, ckpt.config, tests, k);
  std::cout << metrics_line(m) << "\n";

  fs::path log_path = fs::path(checkpoint_path).parent_path() / "eval_log.csv";
  bool fresh = !fs::exists(log_path);
  std::ofstream log(log_path, std::ios::app);
  if (fresh) log << "k,p_at_k,mrr_at_k,n_examples\n";
  log.precision(17);
  log << k << "," << m.p_at_k << "," << m.mrr_at_k << "," << m.n_examples << "\n";
  return 0;
}

int cmd_augment_demo(const std::string& op_name, Real gamma, std::uint64_t seed,
                     const std::string& session_text, const std::string& corpus_dir) {
  auto method = method_from_name(op_name);
  if (!method) throw CLI::ValidationError("unknown --op '" + op_name + "'");

  Session s;
  std::istringstream in(session_text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    int item = std::stoi(tok);
    if (item < 1) throw CLI::ValidationError("session items must be positive internal ids");
    s.items.push_back(item);
  }
  if (s.items.empty()) throw CLI::ValidationError("--session must list at least one item");

  GlobalGraph graph;
  if (!corpus_dir.empty()) {
    LoadedCorpus lc = load_corpus_and_graph(corpus_dir, false);
    graph = std::move(lc.graph);
  } else {
    // no corpus given: treat the session itself as the whole history
    ItemIndex max_item = *std::max_element(s.items.begin(), s.items.end());
    graph = GlobalGraph::build({s}, max_item);
  }
  SynonymSampler sampler(graph, 0.75);

  AugmentConfig cfg;
  cfg.gamma_crop = cfg.gamma_mask = cfg.gamma_reorder = cfg.gamma_change = cfg.gamma_inject =
      gamma;
  Rng rng = Rng::from_key({seed, 0x44454D4FULL});

  auto print_session = [](const char* label, const Session& sess) {
    std::cout << label;
    for (std::size_t i = 0; i < sess.items.size(); ++i)
      std::cout << (i ? "," : "") << sess.items[i];
    std::cout << "\n";
  };
  print_session("original:  ", s);

  std::vector<SynonymRecord> records;
  Session out;
  switch (*method) {
    case AugmentMethod::crop: out = crop(s, gamma, rng); break;
    case AugmentMethod::mask: out = mask(s, gamma, rng); break;
    case AugmentMethod::reorder: out = reorder(s, gamma, rng); break;
    case AugmentMethod::change: out = change(s, gamma, sampler, rng, cfg, nullptr, &records); break;
    case AugmentMethod::inject: out = inject(s, gamma, sampler, rng, cfg, nullptr, &records); break;
  }
  print_session("augmented: ", out);
  for (const auto& rec : records) {
    if (rec.position < 0) {
      std::cout << "  synonym " << rec.synonym << " of " << rec.original
                << " (truncated away)\n";
      continue;
    }
    std::cout << "  pos " << rec.position << ": " << rec.original << " -> " << rec.synonym
              << " (1-hop neighbor";
    for (const auto& nb : graph.neighbors(rec.original))
      if (nb.item == rec.synonym) std::cout << ", transition count " << nb.count;
    std::cout << ")\n";
  }
  return 0;
}

int cmd_sweep(const std::string& param, const std::string& values_text,
              const std::string& corpus_dir, const std::string& out_dir,
              const std::string& config_path, const std::vector<std::string>& overrides,
              std::uint64_t seed, bool seed_given) {
  std::vector<std::string> values;
  std::istringstream in(values_text);
  std::string tok;
  while (std::getline(in, tok, ',')) values.push_back(tok);
  if (values.empty()) throw CLI::ValidationError("--values must list at least one value");

  RunConfig base = resolve_config(config_path, overrides, seed, seed_given);

  std::ostringstream csv;
  csv.setf(std::ios::fixed);
  csv.precision(4);
  csv << "param_value,p_at_20,mrr_at_20\n";
  for (const std::string& value : values) {
    RunConfig cfg = base;
    if (param == "lambda") {
      cfg.loss.lambda = std::stod(value);
    } else if (param == "gamma") {
      apply_kv(cfg, {{"gamma", value}});
    } else if (param == "M") {
      cfg.augment.methods_per_batch = std::stoi(value);
    } else if (param == "global_context") {
      apply_kv(cfg, {{"global_context", value}});
    } else {
      throw CLI::ValidationError("--param must be lambda, gamma, M or global_context");
    }
    LoadedCorpus lc = load_corpus_and_graph(corpus_dir, cfg.graph_directed);
    std::string run_dir = out_dir.empty() ? "" : out_dir + "/" + param + "_" + value;
    std::uint64_t hash = fnv1a(corpus_dir.data(), corpus_dir.size());
    TrainOutcome out = run_training(cfg, lc, run_dir, hash, /*quiet=*/true);
    csv << value << "," << 100.0 * out.test_metrics.p_at_k << ","
        << 100.0 * out.test_metrics.mrr_at_k << "\n";
    std::cerr << param << "=" << value << " done\n";
  }
  std::cout << csv.str();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir + "/sweep.csv", std::ios::trunc);
    f << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"session-based recommendation with graph-contrastive learning"};
  app.require_subcommand(1);

  // preprocess
  std::string format_name, fraction = "1", in_path, out_dir;
  int min_session_len = 2, min_item_count = 5, window_days = 0;
  auto* pre = app.add_subcommand("preprocess", "parse a click log into a corpus cache");
  pre->add_option("--format", format_name, "yoochoose or diginetica")->required();
  pre->add_option("--fraction", fraction, "most recent train fraction, e.g. 1, 1/4, 1/64");
  pre->add_option("--in", in_path, "input log file (optionally .gz)")->required();
  pre->add_option("--out", out_dir, "output corpus directory")->required();
  pre->add_option("--min-session-len", min_session_len);
  pre->add_option("--min-item-count", min_item_count);
  pre->add_option("--test-window-days", window_days,
                  "override the split window (default: 1 for yoochoose, 7 for diginetica)");

  // stats
  std::string stats_corpus;
  bool graph_csv = false;
  auto* st = app.add_subcommand("stats", "print corpus statistics");
  st->add_option("--corpus", stats_corpus, "corpus directory")->required();
  st->add_flag("--graph", graph_csv, "emit the degree,count histogram CSV instead");

  // train
  std::string train_corpus, train_out, config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  auto* tr = app.add_subcommand("train", "train a model on a preprocessed corpus");
  tr->add_option("--corpus", train_corpus, "corpus directory")->required();
  tr->add_option("--out", train_out, "run directory for manifest/log/checkpoints");
  tr->add_option("--config", config_path, "key = value config file");
  tr->add_option("--set", overrides, "override a config key, e.g. --set lambda=0.5");
  auto* train_seed_opt = tr->add_option("--seed", seed, "RNG seed (default: $SGCL_SEED or 0)");

  // eval
  std::string eval_ckpt, eval_corpus;
  int k = 20;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  ev->add_option("--checkpoint", eval_ckpt)->required();
  ev->add_option("--corpus", eval_corpus)->required();
  ev->add_option("--k", k, "ranking cutoff");

  // augment-demo
  std::string op_name, session_text, demo_corpus;
  Real gamma = 0.5;
  std::uint64_t demo_seed = 7;
  auto* ad = app.add_subcommand("augment-demo", "apply one augmentation and show provenance");
  ad->add_option("--op", op_name, "crop|mask|reorder|change|inject")->required();
  ad->add_option("--gamma", gamma);
  ad->add_option("--seed", demo_seed);
  ad->add_option("--session", session_text, "comma-separated internal item ids")->required();
  ad->add_option("--corpus", demo_corpus, "corpus dir for the global graph (optional)");

  // sweep
  std::string sweep_param, sweep_values, sweep_corpus, sweep_out;
  std::string sweep_config;
  std::vector<std::string> sweep_overrides;
  std::uint64_t sweep_seed = 0;
  auto* sw = app.add_subcommand("sweep", "grid over one parameter, emit metrics CSV");
  sw->add_option("--param", sweep_param, "lambda|gamma|M|global_context")->required();
  sw->add_option("--values", sweep_values, "comma-separated grid values")->required();
  sw->add_option("--corpus", sweep_corpus)->required();
  sw->add_option("--out", sweep_out, "directory for per-point runs and sweep.csv");
  sw->add_option("--config", sweep_config, "key = value config file");
  sw->add_option("--set", sweep_overrides, "override a config key");
  auto* sweep_seed_opt = sw->add_option("--seed", sweep_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed())
      return cmd_preprocess(format_name, fraction, in_path, out_dir, min_session_len,
                            min_item_count, window_days);
    if (st->parsed()) return cmd_stats(stats_corpus, graph_csv);
    if (tr->parsed())
      return cmd_train(train_corpus, train_out, config_path, overrides, seed,
                       train_seed_opt->count() > 0);
    if (ev->parsed()) return cmd_eval(eval_ckpt, eval_corpus, k);
    if (ad->parsed())
      return cmd_augment_demo(op_name, gamma, demo_seed, session_text, demo_corpus);
    if (sw->parsed())
      return cmd_sweep(sweep_param, sweep_values, sweep_corpus, sweep_out, sweep_config,
                       sweep_overrides, sweep_seed, sweep_seed_opt->count() > 0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
