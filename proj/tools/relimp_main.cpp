// relimp: corpus building, embedding training, implication-rule scoring and
// evaluation as reproducible command-line runs.
//
// Every subcommand writes its artifacts plus a settings.txt echo of the
// effective configuration into --out. Option precedence: command line, then
// --config file (key=value lines), then RELIMP_* environment variables.
// Single-worker runs with a fixed seed are byte-reproducible.
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <system_error>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relimp/corpus.hpp"
#include "relimp/eval.hpp"
#include "relimp/linkpred.hpp"
#include "relimp/probscore.hpp"
#include "relimp/setscore.hpp"
#include "relimp/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace relimp;

namespace {

std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Int>
std::string fmt_int(Int v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Removes this run's outputs unless commit() was reached, so failures never
// leave partial artifacts behind.
class ArtifactGuard {
 public:
  ~ArtifactGuard() {
    if (committed_) return;
    for (const fs::path& p : paths_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
  void track(const fs::path& p) { paths_.push_back(p); }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> paths_;
  bool committed_ = false;
};

std::ifstream open_input(const fs::path& p, bool binary) {
  std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

std::ofstream open_output(const fs::path& p, ArtifactGuard& guard,
                          bool binary) {
  guard.track(p);
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot open " + p.string() + " for writing");
  return out;
}

void finish_output(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw DataError("failed writing " + p.string());
}

// Effective-configuration echo, one key=value per line in insertion order.
class Settings {
 public:
  void add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
  }
  void write(const fs::path& dir, ArtifactGuard& guard) const {
    fs::path p = dir / "settings.txt";
    std::ofstream out = open_output(p, guard, false);
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
    finish_output(out, p);
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

const char* const kSubcommands[] = {"ingest", "augment", "train",
                                    "score",  "eval",    "mrr"};

// Flat key=value config support. The file's keys are turned into --key=value
// tokens injected right after the subcommand name; every option takes its
// last occurrence, so explicit flags stay on top, and options filled from the
// config no longer fall through to their RELIMP_* environment variables.
// Precedence: command line > config file > environment.
std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty())
    if (const char* env = std::getenv("RELIMP_CONFIG")) path = env;
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::vector<std::string> injected;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ParseError("expected key=value in config file", lineno);
    std::string key = line.substr(0, eq);
    if (key == "config") continue;
    injected.push_back("--" + key + "=" + line.substr(eq + 1));
  }

  for (std::size_t i = 0; i < args.size(); ++i) {
    for (const char* name : kSubcommands) {
      if (args[i] == name) {
        args.insert(args.begin() + i + 1, injected.begin(), injected.end());
        return args;
      }
    }
  }
  return args;  // no subcommand; parse will report the usage error
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "matrixfact") return ModelKind::MatrixFact;
  if (name == "transe") return ModelKind::TransE;
  if (name == "distmult") return ModelKind::DistMult;
  if (name == "complex") return ModelKind::Complex;
  throw DataError("unknown model kind: " + name);
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "bce") return LossKind::BinaryCrossEntropy;
  if (name == "margin") return LossKind::PairwiseMargin;
  if (name == "absolute") return LossKind::PairwiseAbsolute;
  throw DataError("unknown loss: " + name);
}

Corpus load_corpus(const fs::path& p) {
  std::ifstream in = open_input(p, true);
  return Corpus::load(in);
}

EmbeddingState load_checkpoint(const fs::path& p) {
  std::ifstream in = open_input(p, true);
  return EmbeddingState::load(in);
}

// ---- ingest ---------------------------------------------------------------

struct IngestOpts {
  std::string input;
  std::string out = ".";
};

void run_ingest(const IngestOpts& o) {
  std::ifstream in = open_input(o.input, false);
  Corpus corpus = Corpus::ingest(in);

  fs::path dir = prepare_out(o.out);
  ArtifactGuard guard;
  Settings settings;
  settings.add("subcommand", "ingest");
  settings.add("input", o.input);
  settings.add("out", o.out);
  settings.write(dir, guard);

  fs::path snap = dir / "corpus.bin";
  std::ofstream out = open_output(snap, guard, true);
  corpus.save(out);
  finish_output(out, snap);
  guard.commit();

  std::cout << "ingest: " << corpus.total() << " observations, "
            << corpus.num_relations() << " relations, "
            << corpus.num_arguments() << " arguments -> " << snap.string()
            << '\n';
}

// ---- augment --------------------------------------------------------------

struct AugmentOpts {
  std::string corpus;
  std::string out = ".";
};

void run_augment(const AugmentOpts& o) {
  Corpus base = load_corpus(o.corpus);
  Corpus augmented = augment_reversed(base);

  fs::path dir = prepare_out(o.out);
  ArtifactGuard guard;
  Settings settings;
  settings.add("subcommand", "augment");
  settings.add("corpus", o.corpus);
  settings.add("out", o.out);
  settings.write(dir, guard);

  fs::path snap = dir / "corpus.bin";
  std::ofstream out = open_output(snap, guard, true);
  augmented.save(out);
  finish_output(out, snap);
  guard.commit();

  std::cout << "augment: " << augmented.total() << " observations, "
            << augmented.num_relations() << " relations -> " << snap.string()
            << '\n';
}

// ---- train ----------------------------------------------------------------

struct TrainOpts {
  std::string corpus;
  std::string out = ".";
  std::string model = "distmult";
  std::uint32_t k = 0;  // 0 = the model kind's default dimension
  std::string loss = "bce";
  double margin = 1.0;
  std::uint32_t negatives = 2;
  std::uint32_t batch = 128;
  double lr = 0.05;
  std::uint32_t epochs = 100;
  double convergence = 1e-5;
  std::uint64_t seed = 0;
  std::uint32_t workers = 1;
  int transe_norm = 2;
};

void run_train(const TrainOpts& o) {
  Corpus corpus = load_corpus(o.corpus);
  ModelKind kind = parse_model_kind(o.model);
  std::uint32_t k = o.k ? o.k : default_dimension(kind);

  TrainConfig cfg;
  cfg.loss = parse_loss_kind(o.loss);
  cfg.margin = o.margin;
  cfg.negatives_per_positive = o.negatives;
  cfg.batch_size = o.batch;
  cfg.learning_rate = o.lr;
  cfg.epochs = o.epochs;
  cfg.convergence_threshold = o.convergence;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.transe_norm = o.transe_norm;

  fs::path dir = prepare_out(o.out);
  ArtifactGuard guard;
  Settings settings;
  settings.add("subcommand", "train");
  settings.add("corpus", o.corpus);
  settings.add("out", o.out);
  settings.add("model", o.model);
  settings.add("k", fmt_int(k));
  settings.add("loss", o.loss);
  settings.add("margin", fmt(o.margin));
  settings.add("negatives", fmt_int(o.negatives));
  settings.add("batch", fmt_int(o.batch));
  settings.add("lr", fmt(o.lr));
  settings.add("epochs", fmt_int(o.epochs));
  settings.add("convergence", fmt(o.convergence));
  settings.add("seed", fmt_int(o.seed));
  settings.add("workers", fmt_int(o.workers));
  settings.add("transe_norm", fmt_int(o.transe_norm));
  settings.write(dir, guard);

  // Wall time goes to stderr only; loss.csv stays byte-reproducible.
  fs::path loss_path = dir / "loss.csv";
  std::ofstream loss_csv = open_output(loss_path, guard, false);
  loss_csv << "epoch,mean_loss,max_delta\n";
  std::uint32_t ran = 0;
  double final_loss = 0;
  auto on_epoch = [&](const EpochStats& s) {
    loss_csv << s.epoch << ',' << fmt(s.mean_loss) << ',' << fmt(s.max_delta)
             << '\n';
    std::cerr << "epoch " << s.epoch << '/' << o.epochs << " mean_loss "
              << fmt(s.mean_loss) << " wall_ms " << fmt(s.wall_ms) << '\n';
    ran = s.epoch;
    final_loss = s.mean_loss;
  };
  EmbeddingState state = train(corpus, kind, k, cfg, on_epoch);
  finish_output(loss_csv, loss_path);

  fs::path ckpt = dir / "checkpoint.bin";
  std::ofstream out = open_output(ckpt, guard, true);
  state.save(out);
  finish_output(out, ckpt);
  guard.commit();

  std::cout << "train: " << o.model << " k=" << k << ", " << ran
            << " epochs, final mean_loss " << fmt(final_loss) << " -> "
            << ckpt.string() << '\n';
}

// ---- score ----------------------------------------------------------------

struct ScoreOpts {
  std::string corpus;
  std::string rules;
  std::string checkpoint;
  std::string out = ".";
  std::vector<std::string> models = {"dirt", "cover", "binc", "probe"};
  std::string weights = "unit";
  std::string rep = "tuple";
};

void run_score(const ScoreOpts& o) {
  Corpus corpus = load_corpus(o.corpus);
  std::ifstream rules_in = open_input(o.rules, false);
  std::vector<RuleRow> rows = parse_rules_tsv(rules_in);

  bool need_set = false, need_state = false;
  for (const std::string& m : o.models) {
    if (m == "dirt" || m == "cover" || m == "binc") need_set = true;
    if (m == "probl" || m == "probel" || m == "cosine") need_state = true;
  }
  if (need_state && o.checkpoint.empty())
    throw DataError("models probl/probel/cosine need --checkpoint");
  std::optional<EmbeddingState> state;
  if (!o.checkpoint.empty()) state = load_checkpoint(o.checkpoint);

  WeightScheme scheme =
      o.weights == "pmi" ? WeightScheme::Pmi : WeightScheme::Unit;
  FeatureRep rep = o.rep == "slot"    ? FeatureRep::SlotIndependent
                   : o.rep == "unary" ? FeatureRep::Unary
                                      : FeatureRep::ArgumentTuple;
  std::optional<SetScorer> set;
  if (need_set) set.emplace(corpus, scheme, rep);

  fs::path dir = prepare_out(o.out);
  ArtifactGuard guard;
  Settings settings;
  settings.add("subcommand", "score");
  settings.add("corpus", o.corpus);
  settings.add("rules", o.rules);
  if (!o.checkpoint.empty()) settings.add("checkpoint", o.checkpoint);
  settings.add("out", o.out);
  std::string joined;
  for (const std::string& m : o.models)
    joined += (joined.empty() ? "" : ",") + m;
  settings.add("models", joined);
  settings.add("weights", o.weights);
  settings.add("rep", o.rep);
  settings.write(dir, guard);

  auto score_one = [&](const std::string& m, const ImplicationRule& rule) {
    if (m == "dirt") return set->dirt(rule);
    if (m == "cover") return set->cover(rule);
    if (m == "binc") return set->binc(rule);
    if (m == "probe") return prob_e(corpus, rule);
    if (m == "probl") return prob_l(corpus, *state, rule);
    if (m == "probel") return prob_el(corpus, *state, rule);
    return cosine_similarity(*state, rule.antecedent,
                             effective_consequent(corpus, rule));
  };

  fs::path scored = dir / "scored.tsv";
  std::ofstream out = open_output(scored, guard, false);
  out << "antecedent\tconsequent\treversed";
  for (const std::string& m : o.models) out << '\t' << m;
  out << '\n';

  std::uint64_t oov = 0;
  for (const RuleRow& row : rows) {
    auto p = corpus.relations().find(row.antecedent);
    auto q = corpus.relations().find(row.consequent);
    out << row.antecedent << '\t' << row.consequent << '\t'
        << (row.reversed ? '1' : '0');
    if (!p || !q) {
      // Rules over relations the corpus never saw score 0 everywhere.
      ++oov;
      for (std::size_t i = 0; i < o.models.size(); ++i) out << "\t0";
    } else {
      ImplicationRule rule{*p, *q, row.reversed};
      for (const std::string& m : o.models) out << '\t' << fmt(score_one(m, rule));
    }
    out << '\n';
  }
  finish_output(out, scored);
  guard.commit();

  std::cout << "score: " << rows.size() << " rules x " << o.models.size()
            << " models, oov " << oov;
  if (set) std::cout << ", clamped slot scores " << set->diagnostics().clamped_slots;
  std::cout << " -> " << scored.string() << '\n';
}

// ---- eval -----------------------------------------------------------------

struct EvalOpts {
  std::string scores;
  std::string labels;
  std::string out = ".";
  std::string model;  // score column; default: first one in the file
  bool directional = false;
};

using ScoreKey = std::tuple<std::string, std::string, bool>;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    f.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return f;
}

std::map<ScoreKey, double> read_scores(const fs::path& p,
                                       const std::string& wanted,
                                       std::string* used_column) {
  std::ifstream in = open_input(p, false);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty scores file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_tabs(line);
  if (header.size() < 4 || header[0] != "antecedent" ||
      header[1] != "consequent" || header[2] != "reversed")
    throw DataError(
        "scores file needs header antecedent, consequent, reversed plus at "
        "least one score column");
  std::size_t col = 3;
  if (!wanted.empty()) {
    auto it = std::find(header.begin() + 3, header.end(), wanted);
    if (it == header.end())
      throw DataError("scores file has no column " + wanted);
    col = std::size_t(it - header.begin());
  }
  *used_column = header[col];

  std::map<ScoreKey, double> scores;
  std::uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != header.size())
      throw ParseError("row width does not match the header", lineno);
    bool reversed;
    if (f[2] == "0")
      reversed = false;
    else if (f[2] == "1")
      reversed = true;
    else
      throw ParseError("reversed flag must be 0 or 1", lineno);
    double v = 0;
    const char* b = f[col].data();
    const char* e = b + f[col].size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
      throw ParseError("bad score value", lineno);
    scores[{f[0], f[1], reversed}] = v;
  }
  return scores;
}

void run_eval(const EvalOpts& o) {
  std::string column;
  std::map<ScoreKey, double> scores = read_scores(o.scores, o.model, &column);
  std::ifstream labels_in = open_input(o.labels, false);
  std::vector<LabelledRule> rows = parse_labelled_tsv(labels_in, o.directional);

  fs::path dir = prepare_out(o.out);
  ArtifactGuard guard;
  Settings settings;
  settings.add("subcommand", "eval");
  settings.add("scores", o.scores);
  settings.add("labels", o.labels);
  settings.add("out", o.out);
  settings.add("model", column);
  settings.add("directional", o.directional ? "1" : "0");
  settings.write(dir, guard);

  std::uint64_t oov = 0;
  auto lookup = [&](const std::string& p, const std::string& q,
                    bool reversed) {
    auto it = scores.find({p, q, reversed});
    if (it == scores.end()) {
      ++oov;
      return 0.0;
    }
    return it->second;
  };

  json report;
  report["model"] = column;
  report["rows"] = rows.size();
  fs::path report_path = dir / "report.json";

  if (o.directional) {
    RuleScorer scorer = [&](const LabelledRule& row, bool forward) {
      const std::string& p =
          forward ? row.antecedent_relation : row.consequent_relation;
      const std::string& q =
          forward ? row.consequent_relation : row.antecedent_relation;
      return lookup(p, q, row.reversed);
    };
    double acc = directional_accuracy(scorer, rows);
    report["directional_accuracy"] = acc;
    report["oov_rules"] = oov;
    std::ofstream out = open_output(report_path, guard, false);
    out << report.dump(2) << '\n';
    finish_output(out, report_path);
    guard.commit();
    std::cout << "eval: directional_accuracy " << fmt(acc) << " over "
              << rows.size() << " rows, oov " << oov << " -> "
              << report_path.string() << '\n';
    return;
  }

  std::vector<ScoredLabel> data;
  std::uint64_t positives = 0;
  for (const LabelledRule& row : rows) {
    double s = lookup(row.antecedent_relation, row.consequent_relation,
                      row.reversed);
    data.push_back({s, row.positive});
    positives += row.positive ? 1 : 0;
  }
  double auc_value = auc(data);
  std::vector<PrPoint> pr = pr_curve(data);

  report["auc"] = auc_value;
  report["positives"] = positives;
  report["negatives"] = rows.size() - positives;
  report["oov_rules"] = oov;
  std::ofstream out = open_output(report_path, guard, false);
  out << report.dump(2) << '\n';
  finish_output(out, report_path);

  fs::path pr_path = dir / "pr_curve.csv";
  std::ofstream pr_out = open_output(pr_path, guard, false);
  pr_out << "recall,precision\n";
  for (const PrPoint& pt : pr)
    pr_out << fmt(pt.recall) << ',' << fmt(pt.precision) << '\n';
  finish_output(pr_out, pr_path);
  guard.commit();

  std::cout << "eval: auc " << fmt(auc_value) << " over " << rows.size()
            << " rows, oov " << oov << " -> " << report_path.string() << ", "
            << pr_path.string() << '\n';
}

// ---- mrr ------------------------------------------------------------------

struct MrrOpts {
  std::string corpus;
  std::string checkpoint;
  std::string test;  // optional; default ranks every distinct observation
  std::string out = ".";
};

std::vector<Triple> read_test_triples(const fs::path& p, const Corpus& corpus) {
  std::ifstream in = open_input(p, false);
  std::vector<Triple> test;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 3)
      throw ParseError("expected 3 tab-separated fields", lineno);
    for (const std::string& field : f)
      if (field.empty()) throw ParseError("empty field in triple", lineno);
    auto r = corpus.relations().find(f[0]);
    if (!r) throw DataError("unknown relation in test triple: " + f[0]);
    auto s = corpus.arguments().find(f[1]);
    if (!s) throw DataError("unknown argument in test triple: " + f[1]);
    auto obj = corpus.arguments().find(f[2]);
    if (!obj) throw DataError("unknown argument in test triple: " + f[2]);
    test.push_back({*r, *s, *obj});
  }
  return test;
}

void run_mrr(const MrrOpts& o) {
  Corpus corpus = load_corpus(o.corpus);
  EmbeddingState state = load_checkpoint(o.checkpoint);
  std::vector<Triple> test;
  if (o.test.empty()) {
    for (const Observation& ob : corpus.observations())
      test.push_back({ob.relation, ob.tuple.subject, ob.tuple.object});
  } else {
    test = read_test_triples(o.test, corpus);
  }

  double filtered = mean_reciprocal_rank(state, test, corpus, true);
  double unfiltered = mean_reciprocal_rank(state, test, corpus, false);

  fs::path dir = prepare_out(o.out);
  ArtifactGuard guard;
  Settings settings;
  settings.add("subcommand", "mrr");
  settings.add("corpus", o.corpus);
  settings.add("checkpoint", o.checkpoint);
  if (!o.test.empty()) settings.add("test", o.test);
  settings.add("out", o.out);
  settings.write(dir, guard);

  json report;
  report["filtered"] = filtered;
  report["unfiltered"] = unfiltered;
  report["test_triples"] = test.size();
  fs::path report_path = dir / "mrr.json";
  std::ofstream out = open_output(report_path, guard, false);
  out << report.dump(2) << '\n';
  finish_output(out, report_path);
  guard.commit();

  std::cout << "mrr: filtered " << fmt(filtered) << " unfiltered "
            << fmt(unfiltered) << " over " << test.size() << " triples -> "
            << report_path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relational implication scoring over triple corpora"};
  app.name("relimp");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  const char* config_help =
      "key=value config file; precedence: flags > config > RELIMP_* env";

  IngestOpts ingest_opts;
  auto* ingest = app.add_subcommand(
      "ingest", "build a corpus snapshot from a triple TSV");
  ingest->add_option("--config", config_path, config_help);
  ingest->add_option("input", ingest_opts.input,
                     "triple TSV, one relation<TAB>subject<TAB>object per line")
      ->required();
  ingest->add_option("--out", ingest_opts.out, "output directory")
      ->envname("RELIMP_OUT");

  AugmentOpts augment_opts;
  auto* augment = app.add_subcommand(
      "augment", "add argument-reversed relations to a corpus snapshot");
  augment->add_option("--config", config_path, config_help);
  augment->add_option("--corpus", augment_opts.corpus, "corpus snapshot")
      ->required();
  augment->add_option("--out", augment_opts.out, "output directory")
      ->envname("RELIMP_OUT");

  TrainOpts train_opts;
  auto* train = app.add_subcommand(
      "train", "train link-prediction embeddings with SGD");
  train->add_option("--config", config_path, config_help);
  train->add_option("--corpus", train_opts.corpus, "corpus snapshot")
      ->required();
  train->add_option("--out", train_opts.out, "output directory")
      ->envname("RELIMP_OUT");
  train->add_option("--model", train_opts.model, "embedding model kind")
      ->check(CLI::IsMember({"matrixfact", "transe", "distmult", "complex"}))
      ->envname("RELIMP_MODEL");
  train->add_option("--k", train_opts.k,
                    "embedding dimension; 0 picks the model default")
      ->envname("RELIMP_K");
  train->add_option("--loss", train_opts.loss, "training loss")
      ->check(CLI::IsMember({"bce", "margin", "absolute"}))
      ->envname("RELIMP_LOSS");
  train->add_option("--margin", train_opts.margin, "pairwise margin width")
      ->envname("RELIMP_MARGIN");
  train->add_option("--negatives", train_opts.negatives,
                    "negative samples per positive")
      ->envname("RELIMP_NEGATIVES");
  train->add_option("--batch", train_opts.batch, "batch size in positives")
      ->envname("RELIMP_BATCH");
  train->add_option("--lr", train_opts.lr, "SGD learning rate")
      ->envname("RELIMP_LR");
  train->add_option("--epochs", train_opts.epochs, "maximum epochs")
      ->envname("RELIMP_EPOCHS");
  train->add_option("--convergence", train_opts.convergence,
                    "early stop when max |parameter change| falls below this")
      ->envname("RELIMP_CONVERGENCE");
  train->add_option("--seed", train_opts.seed, "run seed")
      ->envname("RELIMP_SEED");
  train->add_option("--workers", train_opts.workers,
                    "batch-producer threads; >1 is faster but not "
                    "bit-reproducible")
      ->envname("RELIMP_WORKERS");
  train->add_option("--transe-norm", train_opts.transe_norm,
                    "TransE distance norm")
      ->check(CLI::IsMember({1, 2}))
      ->envname("RELIMP_TRANSE_NORM");

  ScoreOpts score_opts;
  auto* score = app.add_subcommand(
      "score", "score implication rules against a corpus");
  score->add_option("--config", config_path, config_help);
  score->add_option("--corpus", score_opts.corpus, "corpus snapshot")
      ->required();
  score->add_option("--rules", score_opts.rules,
                    "rule TSV: antecedent<TAB>consequent[<TAB>reversed 0/1]")
      ->required();
  score->add_option("--checkpoint", score_opts.checkpoint,
                    "embedding checkpoint (needed by probl/probel/cosine)")
      ->envname("RELIMP_CHECKPOINT");
  score->add_option("--out", score_opts.out, "output directory")
      ->envname("RELIMP_OUT");
  score
      ->add_option("--models", score_opts.models,
                   "comma-separated score columns to emit")
      ->delimiter(',')
      ->check(CLI::IsMember({"dirt", "cover", "binc", "probe", "probel",
                             "probl", "cosine"}))
      ->envname("RELIMP_MODELS");
  score->add_option("--weights", score_opts.weights, "set-measure weights")
      ->check(CLI::IsMember({"unit", "pmi"}))
      ->envname("RELIMP_WEIGHTS");
  score->add_option("--rep", score_opts.rep, "set-measure feature slots")
      ->check(CLI::IsMember({"tuple", "slot", "unary"}))
      ->envname("RELIMP_REP");

  EvalOpts eval_opts;
  auto* eval = app.add_subcommand(
      "eval", "evaluate scored rules against labels");
  eval->add_option("--config", config_path, config_help);
  eval->add_option("--scores", eval_opts.scores, "scored.tsv from `score`")
      ->required();
  eval->add_option("--labels", eval_opts.labels,
                   "labelled rule TSV (7 columns)")
      ->required();
  eval->add_option("--out", eval_opts.out, "output directory")
      ->envname("RELIMP_OUT");
  eval->add_option("--model", eval_opts.model,
                   "score column to evaluate; default: first column")
      ->envname("RELIMP_EVAL_MODEL");
  eval->add_flag("--directional", eval_opts.directional,
                 "labels carry forward/backward directions instead of 0/1");

  MrrOpts mrr_opts;
  auto* mrr = app.add_subcommand(
      "mrr", "mean reciprocal rank of test triples under a checkpoint");
  mrr->add_option("--config", config_path, config_help);
  mrr->add_option("--corpus", mrr_opts.corpus, "corpus snapshot")->required();
  mrr->add_option("--checkpoint", mrr_opts.checkpoint, "embedding checkpoint")
      ->required();
  mrr->add_option("--test", mrr_opts.test,
                  "triple TSV to rank; default: every distinct observation")
      ->envname("RELIMP_TEST");
  mrr->add_option("--out", mrr_opts.out, "output directory")
      ->envname("RELIMP_OUT");

  std::vector<std::string> args;
  try {
    args = merge_config_args(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return 2;
  }
  std::vector<const char*> cargv;
  cargv.push_back(argv[0]);
  for (const std::string& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(int(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: usage: " << e.what() << '\n';
    return 1;
  }

  try {
    if (ingest->parsed()) run_ingest(ingest_opts);
    if (augment->parsed()) run_augment(augment_opts);
    if (train->parsed()) run_train(train_opts);
    if (score->parsed()) run_score(score_opts);
    if (eval->parsed()) run_eval(eval_opts);
    if (mrr->parsed()) run_mrr(mrr_opts);
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
