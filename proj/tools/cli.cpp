#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "paragram/composition.hpp"
#include "paragram/config.hpp"
#include "paragram/embeddings.hpp"
#include "paragram/error.hpp"
#include "paragram/evaluation.hpp"
#include "paragram/pipeline.hpp"
#include "paragram/text.hpp"
#include "paragram/training.hpp"

namespace paragram::cli {
namespace fs = std::filesystem;

namespace {

using Schema = std::vector<OptionSpec>;

OptionSpec opt(std::string key, OptionType type, std::optional<std::string> def, std::string help,
               std::vector<std::string> choices = {}) {
  return OptionSpec{std::move(key), type, std::move(def), std::move(choices), false, std::move(help)};
}

OptionSpec req(std::string key, OptionType type, std::string help) {
  return OptionSpec{std::move(key), type, std::nullopt, {}, true, std::move(help)};
}

void append(Schema& dst, const Schema& src) { dst.insert(dst.end(), src.begin(), src.end()); }

Schema threads_option() {
  return {opt("threads", OptionType::kInteger, std::nullopt,
              "worker threads (fallback: PARAGRAM_THREADS, then 1)")};
}

Schema hyper_options(const Hyperparameters& d, bool phrases) {
  Schema s = {
      opt("epochs", OptionType::kInteger, std::to_string(d.epochs), "passes over the training pairs"),
      opt("delta", OptionType::kReal, format_real(d.delta), "margin"),
      opt("lambda-words", OptionType::kReal, format_real(d.lambda_words),
          "pull of the word vectors towards their initial values"),
      opt("lr-words", OptionType::kReal, format_real(d.lr_words), "AdaGrad rate for word vectors"),
      opt("batch-size", OptionType::kInteger, std::to_string(d.batch_size), "pairs per mini-batch"),
      opt("similarity", OptionType::kString, "dot", "training similarity", {"dot", "cosine"}),
      opt("sampler", OptionType::kString, "max", "negative sampling", {"max", "rand", "mix", "least"}),
      opt("neg-pool", OptionType::kString, "both", "phrases eligible as negatives", {"first", "both"}),
      req("seed", OptionType::kInteger, "random seed"),
      opt("constraints", OptionType::kFlag, phrases ? "false" : "true",
          "exclude known paraphrases (and their lemmas) from negatives"),
      opt("lemmas", OptionType::kPath, std::nullopt, "TSV word TAB lemma for the constraints"),
  };
  if (phrases) {
    s.push_back(opt("lambda-comp", OptionType::kReal, format_real(d.lambda_comp), "L2 weight on W and b"));
    s.push_back(opt("lr-comp", OptionType::kReal, format_real(d.lr_comp), "AdaGrad rate for W and b"));
  }
  return s;
}

struct Command {
  std::string name;
  std::string summary;
  std::function<Schema()> schema;
  std::function<void(const RunConfig&, std::ostream&)> run;
};

// ---- argument handling ----

RunConfig parse_flags(std::span<const std::string> args, Schema schema) {
  RunConfig cfg(std::move(schema));
  // A --config file applies first so that flags override it.
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      std::ifstream in(args[i + 1]);
      if (!in) throw UsageError("cannot open config " + args[i + 1]);
      cfg.merge(in, args[i + 1]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      const std::string path = args[i].substr(9);
      std::ifstream in(path);
      if (!in) throw UsageError("cannot open config " + path);
      cfg.merge(in, path);
    }
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) throw UsageError("unexpected argument '" + a + "'");
    std::string key = a.substr(2);
    std::optional<std::string> value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    }
    if (key == "config") {
      if (!value) ++i;
      continue;
    }
    if (!cfg.knows(key)) throw UsageError("unknown option --" + normalize_key(key));
    if (!value) {
      const bool next_is_value = i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0;
      if (cfg.spec(key).type == OptionType::kFlag && !next_is_value) {
        value = "true";
      } else if (!next_is_value) {
        throw UsageError("option --" + normalize_key(key) + " needs a value");
      } else {
        value = args[++i];
      }
    }
    cfg.set(key, *value);
  }
  cfg.require_all();
  return cfg;
}

unsigned resolve_threads(const RunConfig& cfg) {
  long long n = 1;
  if (cfg.explicitly_set("threads")) {
    n = cfg.get_integer("threads");
  } else if (const char* env = std::getenv("PARAGRAM_THREADS"); env && *env) {
    auto parsed = try_parse_integer(env);
    if (!parsed) throw UsageError(std::string("PARAGRAM_THREADS is not an integer: '") + env + "'");
    n = *parsed;
  }
  if (n < 1) throw UsageError("threads must be at least 1");
  return static_cast<unsigned>(n);
}

std::size_t get_count(const RunConfig& cfg, std::string_view key, long long min = 0) {
  const long long v = cfg.get_integer(key);
  if (v < min) {
    throw UsageError("option --" + std::string(key) + " must be at least " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const RunConfig& cfg) {
  const long long v = cfg.get_integer("seed");
  if (v < 0) throw UsageError("seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

Hyperparameters hyper_from(const RunConfig& cfg, Hyperparameters hp, bool phrases) {
  hp.epochs = static_cast<int>(get_count(cfg, "epochs"));
  hp.delta = cfg.get_real("delta");
  hp.lambda_words = cfg.get_real("lambda-words");
  hp.lr_words = cfg.get_real("lr-words");
  hp.batch_size = get_count(cfg, "batch-size", 1);
  hp.similarity = parse_similarity(cfg.get("similarity"));
  hp.sampler = parse_sampler(cfg.get("sampler"));
  hp.pool = parse_negative_pool(cfg.get("neg-pool"));
  hp.seed = get_seed(cfg);
  if (phrases) {
    hp.lambda_comp = cfg.get_real("lambda-comp");
    hp.lr_comp = cfg.get_real("lr-comp");
  }
  hp.validate();
  return hp;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  out.flush();
  if (!out) throw DataError("cannot write " + path.string());
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create directory " + dir.string());
  return dir;
}

void write_resolved(const fs::path& dir, std::string_view command, const RunConfig& cfg) {
  write_text(dir / "resolved.cfg", "# paragram " + std::string(command) + "\n" + cfg.resolved_text());
}

std::string read_all(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ConstraintIndex make_constraints(const RunConfig& cfg, std::span<const TrainingPair> pairs) {
  LemmaMap lemmas;
  if (auto path = cfg.find("lemmas")) lemmas = load_lemma_map_file(*path);
  return build_constraints(pairs, lemmas);
}

// ---- train-words / train-phrases ----

Schema train_words_schema() {
  Schema s = {
      req("pairs", OptionType::kPath, "TSV of word pairs"),
      req("init", OptionType::kPath, "initial embeddings"),
      req("out", OptionType::kPath, "output directory"),
      opt("case-collapse", OptionType::kFlag, "false", "lowercase the initial vocabulary and the pairs"),
      opt("vocab-cap", OptionType::kInteger, "0", "keep only the most frequent k words (0: keep all)"),
      opt("frequency-order", OptionType::kPath, std::nullopt, "tokens by descending frequency"),
  };
  append(s, hyper_options(word_defaults(), false));
  append(s, threads_option());
  return s;
}

Schema train_phrases_schema() {
  Schema s = {
      req("pairs", OptionType::kPath, "TSV of phrase pairs (plain or bracketed trees)"),
      req("init", OptionType::kPath, "initial embeddings"),
      opt("init-params", OptionType::kPath, std::nullopt, "initial composition parameters"),
      req("out", OptionType::kPath, "output directory"),
  };
  append(s, hyper_options(phrase_defaults(), true));
  append(s, threads_option());
  return s;
}

EmbeddingSet load_initial(const RunConfig& cfg, bool allow_collapse) {
  EmbeddingSet init;
  if (allow_collapse && cfg.get_flag("case-collapse")) {
    auto in = open_input(cfg.get("init"));
    init = case_collapse(in);
  } else {
    init = load_embeddings_file(cfg.get("init"));
  }
  if (allow_collapse) {
    const std::size_t cap = get_count(cfg, "vocab-cap");
    if (cap > 0) {
      auto order_path = cfg.find("frequency-order");
      if (!order_path) throw UsageError("--vocab-cap needs --frequency-order");
      const Vocabulary order = load_vocabulary_file(*order_path);
      init = cap_vocabulary(init, order.words(), cap);
    }
  }
  if (init.size() == 0) throw DataError("initial embeddings are empty");
  return init;
}

std::vector<TrainingPair> load_pairs(const RunConfig& cfg, TrainMode mode, bool lowercase) {
  std::string text = read_all(cfg.get("pairs"));
  if (lowercase) text = to_lower_ascii(text);
  std::istringstream in(text);
  auto pairs = read_training_pairs(in, mode);
  if (pairs.empty()) throw DataError("no training pairs in " + cfg.get("pairs"));
  return pairs;
}

void run_training(const RunConfig& cfg, std::ostream& out, TrainMode mode) {
  const bool phrases = mode == TrainMode::kPhrases;
  const unsigned threads = resolve_threads(cfg);
  const Hyperparameters hp = hyper_from(cfg, phrases ? phrase_defaults() : word_defaults(), phrases);
  const EmbeddingSet init = load_initial(cfg, !phrases);
  const auto pairs = load_pairs(cfg, mode, !phrases && cfg.get_flag("case-collapse"));

  TrainOptions options;
  options.mode = mode;
  options.threads = threads;
  ConstraintIndex constraints;
  if (cfg.get_flag("constraints")) {
    constraints = make_constraints(cfg, pairs);
    options.constraints = &constraints;
  }
  if (phrases) {
    if (auto p = cfg.find("init-params")) options.init_params = load_params_file(*p);
  }
  std::ostringstream log;
  options.on_epoch = [&](int epoch, double loss) {
    log << "epoch=" << epoch << " loss=" << format_real(loss) << '\n';
  };

  const fs::path dir = prepare_dir(cfg.get("out"));
  const TrainResult result = train(pairs, init, hp, options);
  save_embeddings_file(result.words, dir / "embeddings.txt");
  if (result.composition) save_params_file(*result.composition, dir / "composition.txt");
  write_text(dir / "training.log", log.str());
  write_resolved(dir, phrases ? "train-phrases" : "train-words", cfg);
  out << "pairs=" << pairs.size() << " words=" << result.words.size() << " dim=" << result.words.dim()
      << " epochs=" << hp.epochs;
  if (!result.epoch_losses.empty()) out << " final_loss=" << format_real(result.epoch_losses.back());
  out << '\n';
}

// ---- filter ----

Schema filter_schema() {
  Schema s = {
      req("in", OptionType::kPath, "candidate pairs (record TSV)"),
      req("out", OptionType::kPath, "output record TSV"),
      opt("max-overlap", OptionType::kReal, "0.5", "drop pairs whose word overlap reaches this value"),
      opt("vocab", OptionType::kPath, std::nullopt, "vocabulary every token must belong to"),
      opt("drop-near-identical", OptionType::kFlag, "false",
          "drop pairs within edit distance 1 as whole strings"),
      opt("bigrams", OptionType::kString, std::nullopt, "extract bigram pairs instead (JN|NN|VN)",
          {"jn", "nn", "vn"}),
      opt("sample", OptionType::kFlag, "false", "bin by effective size and sample per bin"),
      opt("per-bin", OptionType::kInteger, "500", "pairs drawn per size bin"),
      opt("seed", OptionType::kInteger, std::nullopt, "random seed (required with --sample)"),
  };
  return s;
}

void run_filter(const RunConfig& cfg, std::ostream& out) {
  const auto records = read_records_file(cfg.get("in"));
  FilterConfig fc;
  fc.max_overlap = cfg.get_real("max-overlap");
  if (auto v = cfg.find("vocab")) fc.vocab = load_vocabulary_file(*v);
  fc.drop_near_identical = cfg.get_flag("drop-near-identical");
  fc.per_bin = get_count(cfg, "per-bin", 1);
  fc.validate();
  const bool sample = cfg.get_flag("sample");
  if (sample && !cfg.has("seed")) throw UsageError("--sample needs --seed");

  std::vector<PhrasePairRecord> kept;
  std::ostringstream report;
  report << "input\t" << records.size() << '\n';
  if (auto kind = cfg.find("bigrams")) {
    kept = extract_bigram_pairs(records, parse_bigram_kind(*kind), fc.vocab ? &*fc.vocab : nullptr);
    report << "bigrams\t" << kept.size() << '\n';
  } else {
    auto result = filter_pairs(records, fc);
    const auto& c = result.counts;
    report << "vocabulary\t" << c.vocabulary << "\ndigits\t" << c.digits << "\nbrackets\t" << c.brackets
           << "\nduplicates\t" << c.duplicates << "\noverlap\t" << c.overlap << "\nnear_identical\t"
           << c.near_identical << "\ndropped\t" << c.dropped() << '\n';
    kept = std::move(result.kept);
  }
  if (sample) {
    kept = bin_and_sample(kept, fc, get_seed(cfg));
    report << "sampled\t" << kept.size() << '\n';
  }
  report << "kept\t" << kept.size() << '\n';

  const fs::path path = cfg.get("out");
  if (path.has_parent_path()) prepare_dir(path.parent_path());
  write_records_file(kept, path);
  write_resolved(path.has_parent_path() ? path.parent_path() : fs::path("."), "filter", cfg);
  out << report.str();
}

// ---- score / evaluate ----

Schema model_options(const std::string& prefix) {
  return {
      opt(prefix + "model", OptionType::kString, prefix.empty() ? std::optional<std::string>("additive") : std::nullopt,
          "additive | rnn | overlap_strict | overlap_lemma",
          {"additive", "rnn", "overlap_strict", "overlap-strict", "overlap_lemma", "overlap-lemma"}),
      opt(prefix + "embeddings", OptionType::kPath, std::nullopt, "word embeddings"),
      opt(prefix + "params", OptionType::kPath, std::nullopt, "composition parameters (rnn)"),
      opt(prefix + "lemmas", OptionType::kPath, std::nullopt, "TSV word TAB lemma (overlap_lemma)"),
  };
}

struct LoadedModel {
  ScoringModel model = ScoringModel::kAdditive;
  std::optional<EmbeddingSet> embeddings;
  std::optional<CompositionParams> params;
  std::optional<LemmaMap> lemmas;

  ScoringArtifacts artifacts() const {
    return {embeddings ? &*embeddings : nullptr, params ? &*params : nullptr, lemmas ? &*lemmas : nullptr};
  }
};

LoadedModel load_model(const RunConfig& cfg, const std::string& prefix) {
  LoadedModel m;
  m.model = parse_scoring_model(cfg.get(prefix + "model"));
  const bool vectors = m.model == ScoringModel::kAdditive || m.model == ScoringModel::kRnn;
  if (vectors) {
    auto path = cfg.find(prefix + "embeddings");
    if (!path) throw UsageError("model " + std::string(to_string(m.model)) + " needs --" + prefix + "embeddings");
    m.embeddings = load_embeddings_file(*path);
  }
  if (m.model == ScoringModel::kRnn) {
    auto path = cfg.find(prefix + "params");
    if (!path) throw UsageError("model rnn needs --" + prefix + "params");
    m.params = load_params_file(*path);
  }
  if (m.model == ScoringModel::kOverlapLemma) {
    auto path = cfg.find(prefix + "lemmas");
    if (!path) throw UsageError("model overlap_lemma needs --" + prefix + "lemmas");
    m.lemmas = load_lemma_map_file(*path);
  }
  check_artifacts(m.model, m.artifacts());
  return m;
}

Schema score_schema() {
  Schema s = {req("in", OptionType::kPath, "TSV text1 TAB text2 [TAB gold]")};
  append(s, model_options(""));
  append(s, threads_option());
  return s;
}

void run_score(const RunConfig& cfg, std::ostream& out) {
  const unsigned threads = resolve_threads(cfg);
  const LoadedModel m = load_model(cfg, "");
  ScoredDataset ds;
  auto in = open_input(cfg.get("in"));
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2) {
      throw DataError(cfg.get("in") + " line " + std::to_string(line_no) + ": expected text1 TAB text2");
    }
    ds.items.push_back({fields[0], fields[1], 0.0});
  }
  for (double p : predict(ds, m.model, m.artifacts(), threads)) out << format_real(p) << '\n';
}

Schema evaluate_schema() {
  Schema s = {req("dataset", OptionType::kPath, "TSV text1 TAB text2 TAB gold")};
  append(s, model_options(""));
  append(s, model_options("compare-"));
  append(s, threads_option());
  return s;
}

void run_evaluate(const RunConfig& cfg, std::ostream& out) {
  const unsigned threads = resolve_threads(cfg);
  const ScoredDataset ds = load_scored_dataset_file(cfg.get("dataset"));
  const LoadedModel a = load_model(cfg, "");
  const auto report = score_dataset(ds, a.model, a.artifacts(), threads);
  out << "rho=" << format_real(report.rho) << " n=" << report.n << '\n';
  if (cfg.has("compare-model")) {
    const LoadedModel b = load_model(cfg, "compare-");
    const auto other = score_dataset(ds, b.model, b.artifacts(), threads);
    const double r12 = spearman_rho(report.predictions, other.predictions);
    const auto test = steiger_test(report.rho, other.rho, r12, static_cast<long long>(report.n));
    out << "rho_compare=" << format_real(other.rho) << " r12=" << format_real(r12)
        << " t=" << format_real(test.t) << " p=" << format_real(test.p_one_tailed) << '\n';
  }
}

// ---- analyze ----

Schema analyze_schema() {
  return {
      req("dataset", OptionType::kPath, "TSV text1 TAB text2 TAB gold"),
      req("pred-a", OptionType::kPath, "cosines of system a, one per line"),
      req("pred-b", OptionType::kPath, "cosines of system b, one per line"),
      opt("binning", OptionType::kString, "gold", "gold | length | overlap", {"gold", "length", "overlap"}),
      opt("word-pairs", OptionType::kPath, std::nullopt, "TSV word1 TAB word2 (overlap binning)"),
      opt("mapping", OptionType::kString, "affine", "cosine to [1,5]: affine (2c+3) or minmax",
          {"affine", "minmax"}),
      opt("out", OptionType::kPath, std::nullopt, "TSV table (default: standard output)"),
      opt("gnuplot", OptionType::kPath, std::nullopt, "gnuplot data file"),
  };
}

std::vector<double> read_predictions(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> out;
  std::string line;
  while (read_line(in, line)) {
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_real(split_whitespace(line).front(), path));
  }
  return out;
}

void run_analyze(const RunConfig& cfg, std::ostream& out) {
  const ScoredDataset ds = load_scored_dataset_file(cfg.get("dataset"));
  auto a = read_predictions(cfg.get("pred-a"));
  auto b = read_predictions(cfg.get("pred-b"));
  if (a.size() != ds.items.size() || b.size() != ds.items.size()) {
    throw DataError("prediction counts (" + std::to_string(a.size()) + ", " + std::to_string(b.size()) +
                    ") do not match the dataset (" + std::to_string(ds.items.size()) + ")");
  }
  if (to_lower_ascii(cfg.get("mapping")) == "minmax") {
    a = rescale_min_max(a);
    b = rescale_min_max(b);
  } else {
    for (auto& v : a) v = map_to_rating_scale(v);
    for (auto& v : b) v = map_to_rating_scale(v);
  }
  std::vector<double> gold;
  for (const auto& item : ds.items) gold.push_back(item.gold);

  const ErrorBinning binning = parse_error_binning(cfg.get("binning"));
  ErrorTable table;
  if (binning == ErrorBinning::kGold) {
    table = error_by_gold(gold, a, b);
  } else {
    WordPairResource resource;
    if (binning == ErrorBinning::kOverlapRatio) {
      auto path = cfg.find("word-pairs");
      if (!path) throw UsageError("overlap binning needs --word-pairs");
      resource = load_word_pairs_file(*path);
    }
    std::vector<double> feature;
    for (const auto& item : ds.items) {
      const auto p1 = phrase_tokens(item.text1);
      const auto p2 = phrase_tokens(item.text2);
      feature.push_back(binning == ErrorBinning::kLengthRatio ? length_ratio(p1, p2)
                                                              : overlap_ratio(p1, p2, resource));
    }
    table = error_change_by_feature(gold, a, b, feature, binning);
  }

  if (auto path = cfg.find("out")) {
    auto f = open_output(*path);
    write_error_table(table, f);
  } else {
    write_error_table(table, out);
  }
  if (auto path = cfg.find("gnuplot")) {
    auto f = open_output(*path);
    write_error_table_gnuplot(table, f);
  }
}

// ---- grid-search ----

Schema grid_schema() {
  Schema s = {
      opt("mode", OptionType::kString, "words", "words | phrases", {"words", "phrases"}),
      req("pairs", OptionType::kPath, "training pairs"),
      req("init", OptionType::kPath, "initial embeddings"),
      opt("init-params", OptionType::kPath, std::nullopt, "initial composition parameters"),
      req("dev", OptionType::kPath, "development dataset scored by Spearman rho"),
      opt("dev-related", OptionType::kPath, std::nullopt,
          "relatedness dataset; the score becomes 2*rho(dev) - rho(related)"),
      opt("grid", OptionType::kString, std::nullopt, "word | phrase | phrase-tuned (default by mode)",
          {"word", "phrase", "phrase-tuned"}),
      req("out", OptionType::kPath, "output directory"),
  };
  // Epoch defaults depend on --mode, so they are resolved at run time.
  Schema hyper = hyper_options(phrase_defaults(), true);
  for (auto& o : hyper) {
    if (o.key == "epochs") o.default_value.reset();
    if (o.key == "constraints") o.default_value.reset();
  }
  append(s, hyper);
  append(s, threads_option());
  return s;
}

void run_grid(const RunConfig& cfg, std::ostream& out) {
  const TrainMode mode = parse_train_mode(cfg.get("mode"));
  const bool phrases = mode == TrainMode::kPhrases;
  const unsigned threads = resolve_threads(cfg);

  Hyperparameters base = phrases ? phrase_defaults() : word_defaults();
  RunConfig filled = cfg;
  if (!filled.has("epochs")) filled.set("epochs", std::to_string(base.epochs));
  if (!filled.has("constraints")) filled.set("constraints", phrases ? "false" : "true");
  base = hyper_from(filled, base, true);

  GridSpace space;
  const std::string grid = to_lower_ascii(filled.find("grid").value_or(phrases ? "phrase" : "word"));
  if (grid == "word") {
    space = word_grid();
  } else if (grid == "phrase") {
    space = phrase_grid();
  } else {
    space = phrase_grid_tuned_init();
  }

  const EmbeddingSet init = load_embeddings_file(filled.get("init"));
  const auto pairs = load_pairs(filled, mode, false);
  const ScoredDataset dev = load_scored_dataset_file(filled.get("dev"));
  std::optional<ScoredDataset> related;
  if (auto p = filled.find("dev-related")) related = load_scored_dataset_file(*p);

  TrainOptions options;
  options.mode = mode;
  options.threads = threads;
  ConstraintIndex constraints;
  if (filled.get_flag("constraints")) {
    constraints = make_constraints(filled, pairs);
    options.constraints = &constraints;
  }
  if (phrases) {
    if (auto p = filled.find("init-params")) options.init_params = load_params_file(*p);
  }

  const ScoringModel model = phrases ? ScoringModel::kRnn : ScoringModel::kAdditive;
  auto evaluate = [&](const Hyperparameters& hp) {
    const TrainResult r = train(pairs, init, hp, options);
    ScoringArtifacts art{&r.words, r.composition ? &*r.composition : nullptr, nullptr};
    const double rho = score_dataset(dev, model, art, threads).rho;
    if (!related) return rho;
    return tuning_criterion(rho, score_dataset(*related, model, art, threads).rho);
  };
  const GridResult result = grid_search(space, base, evaluate);

  const fs::path dir = prepare_dir(filled.get("out"));
  std::ostringstream table;
  table << "lambda_words\tlambda_comp\tbatch_size\tdelta\tsampler\tscore\n";
  for (const auto& p : result.table) {
    table << format_real(p.hp.lambda_words) << '\t' << format_real(p.hp.lambda_comp) << '\t'
          << p.hp.batch_size << '\t' << format_real(p.hp.delta) << '\t' << to_string(p.hp.sampler) << '\t'
          << format_real(p.score) << '\n';
  }
  write_text(dir / "grid.tsv", table.str());

  RunConfig best = filled;
  best.set("lambda-words", format_real(result.best.lambda_words));
  best.set("lambda-comp", format_real(result.best.lambda_comp));
  best.set("batch-size", std::to_string(result.best.batch_size));
  best.set("delta", format_real(result.best.delta));
  best.set("sampler", std::string(to_string(result.best.sampler)));
  write_text(dir / "best.cfg", "# best grid point, score " + format_real(result.best_score) + "\n" +
                                   best.resolved_text());
  write_resolved(dir, "grid-search", filled);
  out << "points=" << result.table.size() << " best_score=" << format_real(result.best_score)
      << " lambda_words=" << format_real(result.best.lambda_words)
      << " lambda_comp=" << format_real(result.best.lambda_comp)
      << " batch_size=" << result.best.batch_size << '\n';
}

// ---- dispatch ----

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"train-words", "fine-tune word vectors on paraphrase word pairs", train_words_schema,
       [](const RunConfig& c, std::ostream& o) { run_training(c, o, TrainMode::kWords); }},
      {"train-phrases", "train the recursive composition model on phrase pairs", train_phrases_schema,
       [](const RunConfig& c, std::ostream& o) { run_training(c, o, TrainMode::kPhrases); }},
      {"filter", "filter, deduplicate and sample candidate phrase pairs", filter_schema, run_filter},
      {"score", "print one similarity per input pair", score_schema, run_score},
      {"evaluate", "Spearman correlation against gold ratings", evaluate_schema, run_evaluate},
      {"analyze", "binned error analysis of two systems", analyze_schema, run_analyze},
      {"grid-search", "train over a hyperparameter grid and keep the best point", grid_schema, run_grid},
  };
  return table;
}

void print_usage(std::ostream& os) {
  os << "usage: paragram <command> [--config FILE] [--key value ...]\n\ncommands:\n";
  for (const auto& c : commands()) os << "  " << c.name << std::string(16 - c.name.size(), ' ') << c.summary << '\n';
}

void print_command_help(const Command& c, std::ostream& os) {
  os << "usage: paragram " << c.name << " [--config FILE] [options]\n" << c.summary << "\n\noptions:\n";
  for (const auto& s : c.schema()) {
    os << "  --" << s.key;
    if (s.required) os << " (required)";
    if (s.default_value) os << " [" << *s.default_value << "]";
    os << "\n      " << s.help << '\n';
  }
}

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    print_usage(err);
    return kExitUsage;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    print_usage(out);
    return kExitOk;
  }
  const Command* command = nullptr;
  for (const auto& c : commands()) {
    if (c.name == args[0]) command = &c;
  }
  if (!command) {
    err << "paragram: unknown command '" << args[0] << "'\n";
    print_usage(err);
    return kExitUsage;
  }
  const auto rest = args.subspan(1);
  for (const auto& a : rest) {
    if (a == "--help" || a == "-h") {
      print_command_help(*command, out);
      return kExitOk;
    }
  }
  try {
    const RunConfig cfg = parse_flags(rest, command->schema());
    command->run(cfg, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "paragram " << command->name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "paragram " << command->name << ": " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "paragram " << command->name << ": " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace paragram::cli
