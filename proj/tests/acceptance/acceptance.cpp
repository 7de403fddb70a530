// Acceptance gate. Prints one PASS/FAIL/SKIP line per criterion.
//
//   paragram_acceptance                 run every criterion
//   paragram_acceptance --criterion X   run one; exit 77 when it is skipped

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "paragram/evaluation.hpp"
#include "paragram/pipeline.hpp"
#include "paragram/text.hpp"
#include "paragram/training.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace paragram;
using paragram::testing::TempDir;

namespace {

// Pinned tolerances and budgets.
constexpr double kBaselineStrict = 0.26, kBaselineStrictTol = 0.02;
constexpr double kBaselineLemma = 0.20, kBaselineLemmaTol = 0.03;
constexpr double kBaselineSeconds = 5.0;
constexpr int kGradientInstancesPerMode = 30;  // x 4 modes = 120
constexpr double kGradientStep = 1e-5, kGradientTol = 1e-4, kGradientSeconds = 30.0;
constexpr int kSamplingBatches = 1000;
constexpr double kSamplingSeconds = 10.0;
constexpr double kWordSeparation = 0.95, kWordSeconds = 60.0;
constexpr double kPhraseRho = 0.8, kPhraseSeconds = 300.0;
constexpr double kSpearmanTol = 1e-10, kSteigerTol = 1e-6;
constexpr int kLevenshteinPairs = 10000;

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

Verdict pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Verdict verdict(bool ok, std::string d) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(d)}; }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---- criteria ----

Verdict baseline() {
  const char* dataset = std::getenv("PARAGRAM_ANNOTATED_PPDB");
  const char* lemmas = std::getenv("PARAGRAM_LEMMAS");
  if (!dataset || !lemmas || !fs::exists(dataset) || !fs::exists(lemmas)) {
    return {Outcome::kSkip,
            "needs PARAGRAM_ANNOTATED_PPDB (test TSV text1 TAB text2 TAB gold) and PARAGRAM_LEMMAS"};
  }
  Stopwatch clock;
  const ScoredDataset ds = load_scored_dataset_file(dataset);
  const LemmaMap lemma_map = load_lemma_map_file(lemmas);
  const double strict = score_dataset(ds, ScoringModel::kOverlapStrict, {}).rho;
  ScoringArtifacts art;
  art.lemmas = &lemma_map;
  const double lemma = score_dataset(ds, ScoringModel::kOverlapLemma, art).rho;
  const double t = clock.seconds();
  const bool ok = std::abs(strict - kBaselineStrict) <= kBaselineStrictTol &&
                  std::abs(lemma - kBaselineLemma) <= kBaselineLemmaTol && t < kBaselineSeconds;
  return verdict(ok, "strict rho=" + fmt(strict) + " lemma rho=" + fmt(lemma) + " n=" +
                         std::to_string(ds.items.size()) + " in " + fmt(t) + "s");
}

Verdict gradient_oracle() {
  Stopwatch clock;
  Rng rng(2024);
  double worst = 0.0;
  int instances = 0, rejected = 0;
  for (TrainMode mode : {TrainMode::kWords, TrainMode::kPhrases}) {
    for (Similarity sim : {Similarity::kDot, Similarity::kCosine}) {
      for (int accepted = 0; accepted < kGradientInstancesPerMode;) {
        const auto check = testing::check_random_gradients(rng, mode, sim, kGradientStep);
        if (!check.accepted) {
          ++rejected;
          continue;
        }
        ++accepted;
        ++instances;
        worst = std::max(worst, check.max_error());
      }
    }
  }
  const double t = clock.seconds();
  return verdict(worst <= kGradientTol && t < kGradientSeconds && instances >= 100,
                 std::to_string(instances) + " instances (" + std::to_string(rejected) +
                     " near-kink draws redrawn), max relative error " + fmt(worst) + " in " + fmt(t) + "s");
}

Verdict sampling_oracle() {
  Stopwatch clock;
  Rng rng(99);
  std::size_t slots = 0, mismatches = 0, violations = 0;
  for (int b = 0; b < kSamplingBatches; ++b) {
    const std::size_t n_pairs = 2 + uniform_index(rng, 11);
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(uniform_index(rng, 4));
    // A small vocabulary makes repeated surfaces and exclusions common.
    const std::size_t vocab = 4 + uniform_index(rng, 12);
    MiniBatch batch;
    while (batch.pairs.size() < n_pairs) {
      auto w = [&] { return "w" + std::to_string(uniform_index(rng, vocab)); };
      TrainingPair p{ParseTree::leaf(w()), ParseTree::leaf(w())};
      if (p.first.surface() != p.second.surface()) batch.pairs.push_back(std::move(p));
    }
    std::vector<Vector> vectors;
    for (std::size_t i = 0; i < 2 * n_pairs; ++i) {
      Vector v(dim);
      // Coarse values produce exact similarity ties now and then.
      for (Eigen::Index c = 0; c < dim; ++c) v(c) = static_cast<double>(uniform_index(rng, 5)) - 2.0;
      vectors.push_back(v);
    }
    ConstraintIndex constraints;
    const bool constrained = coin_flip(rng);
    if (constrained) {
      for (int k = 0; k < 6; ++k) {
        constraints.forbid("w" + std::to_string(uniform_index(rng, vocab)), "w" + std::to_string(uniform_index(rng, vocab)));
      }
    }
    Hyperparameters hp;
    hp.similarity = coin_flip(rng) ? Similarity::kDot : Similarity::kCosine;
    hp.pool = coin_flip(rng) ? NegativePool::kBoth : NegativePool::kFirst;
    hp.delta = 0.5 + uniform_unit(rng);
    const ConstraintIndex* ci = constrained ? &constraints : nullptr;

    for (Sampler sampler : {Sampler::kMax, Sampler::kLeast}) {
      hp.sampler = sampler;
      const auto negs = select_negatives(batch, vectors, hp, ci, rng, true);
      const auto pick = sampler == Sampler::kMax ? testing::Pick::kMax : testing::Pick::kLeast;
      for (std::size_t i = 0; i < n_pairs; ++i) {
        for (int side = 0; side < 2; ++side) {
          ++slots;
          const auto& got = side == 0 ? negs[i].first : negs[i].second;
          const auto want = testing::reference_negative(batch, vectors, i, side, hp, ci, pick);
          const std::optional<std::size_t> got_slot = got ? std::optional(got->slot()) : std::nullopt;
          if (got_slot != want) ++mismatches;
          if (got) {
            const auto& pr = batch.pairs[i];
            const std::string anchor = (side == 0 ? pr.first : pr.second).surface();
            const std::string partner = (side == 0 ? pr.second : pr.first).surface();
            const auto& np = batch.pairs[got->pair];
            const std::string text = (got->side == 0 ? np.first : np.second).surface();
            if (got->pair == i || text == partner || (ci && ci->forbids(anchor, text))) ++violations;
          }
        }
      }
    }
  }
  const double t = clock.seconds();
  return verdict(mismatches == 0 && violations == 0 && t < kSamplingSeconds,
                 std::to_string(kSamplingBatches) + " batches, " + std::to_string(slots) + " slots (MAX and LEAST), " +
                     std::to_string(mismatches) + " mismatches, " + std::to_string(violations) +
                     " constraint violations in " + fmt(t) + "s");
}

Verdict synthetic_words() {
  Stopwatch clock;
  Rng rng(11);
  const auto data = testing::make_clusters(5, 10, 10, 0.6, rng);
  const auto pairs = testing::to_training_pairs(data, data.train_pairs);
  Hyperparameters hp = word_defaults();
  hp.epochs = 20;
  hp.delta = 1.0;
  hp.lambda_words = 0.0;
  hp.seed = 5;
  const auto constraints = build_constraints(pairs, {});
  TrainOptions options;
  options.constraints = &constraints;
  const auto result = train(pairs, data.init, hp, options);
  const double before = testing::cluster_separation(data, data.init);
  const double after = testing::cluster_separation(data, result.words);
  const double t = clock.seconds();
  return verdict(after >= kWordSeparation && t < kWordSeconds,
                 "held-out within > cross in " + fmt(100 * after) + "% of 20 cluster pairs (" + fmt(100 * before) +
                     "% before training) in " + fmt(t) + "s");
}

Verdict synthetic_phrases() {
  Stopwatch clock;
  Rng rng(23);
  const auto task = testing::make_phrase_task(rng);

  Hyperparameters word_hp = word_defaults();
  word_hp.seed = 3;
  const auto word_constraints = build_constraints(task.word_pairs, {});
  TrainOptions word_options;
  word_options.constraints = &word_constraints;
  const EmbeddingSet words = train(task.word_pairs, task.words, word_hp, word_options).words;

  Hyperparameters hp = phrase_defaults();
  hp.seed = 4;
  TrainOptions options;
  options.mode = TrainMode::kPhrases;
  const CompositionParams init_params = CompositionParams::averaging(words.dim());
  const double loss_before = mean_data_loss(task.train_pairs, words, &init_params, hp, TrainMode::kPhrases);
  const auto result = train(task.train_pairs, words, hp, options);
  const double loss_after =
      mean_data_loss(task.train_pairs, result.words, &*result.composition, hp, TrainMode::kPhrases);

  std::vector<double> predicted, gold;
  for (const auto& item : task.heldout) {
    predicted.push_back(cosine_similarity(compose_rnn(item.a, *result.composition, result.words),
                                          compose_rnn(item.b, *result.composition, result.words)));
    gold.push_back(item.gold);
  }
  const double rho = spearman_rho(predicted, gold);
  const double t = clock.seconds();
  return verdict(rho >= kPhraseRho && loss_after < loss_before && t < kPhraseSeconds,
                 "held-out rho=" + fmt(rho) + " on " + std::to_string(gold.size()) + " items, training loss " +
                     fmt(loss_before) + " -> " + fmt(loss_after) + " in " + fmt(t) + "s");
}

Verdict regularization_pull() {
  Rng rng(31);
  const auto data = testing::make_clusters(5, 10, 10, 0.6, rng);
  const auto pairs = testing::to_training_pairs(data, data.train_pairs);
  std::vector<double> distances;
  std::string detail;
  for (double lambda : {0.0, 1.0, 10.0, 100.0}) {
    Hyperparameters hp = word_defaults();
    hp.seed = 8;
    hp.lambda_words = lambda;
    const auto result = train(pairs, data.init, hp);
    distances.push_back((result.words.matrix() - data.init.matrix()).norm());
    detail += (detail.empty() ? "" : ", ") + std::string("lambda=") + fmt(lambda) + ": " + fmt(distances.back());
  }
  bool ok = true;
  for (std::size_t k = 1; k < distances.size(); ++k) ok = ok && distances[k] <= distances[k - 1];
  return verdict(ok, "|W_w - init| " + detail);
}

Verdict statistics_oracles() {
  Rng rng(7);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 3 + uniform_index(rng, 48);
    std::vector<double> x(n), y(n);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(uniform_index(rng, 6));
        y[i] = static_cast<double>(uniform_index(rng, 6));
      }
      const bool x_const = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
      const bool y_const = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
      if (!x_const && !y_const) break;
    }
    worst = std::max(worst, std::abs(spearman_rho(x, y) - testing::reference_spearman(x, y)));
  }

  const auto sym = steiger_test(0.45, 0.45, 0.3, 60);
  const bool sym_ok = sym.t == 0.0 && sym.p_one_tailed == 0.5;

  struct Ref {
    double r13, r23, r12;
    long long n;
    double t, p;
  };
  // Williams' t with scipy.stats.t.sf as the independent tail reference.
  const Ref refs[] = {
      {0.6, 0.4, 0.3, 50, 1.4576541043530884, 0.07579286792575103},
      {-0.422, -0.698, 0.515, 334, 6.992211765258404, 7.506251658702054e-12},
      {0.036, 0.785, 0.26, 112, -10.300338210022812, 1.0},
      {0.015, 0.319, 0.508, 82, -2.918176932151175, 0.9977080807197909},
      {-0.385, 0.525, -0.141, 317, -13.45506655822974, 1.0},
      {-0.278, 0.694, -0.399, 359, -14.293067857140617, 1.0},
      {0.348, -0.802, -0.321, 293, 18.738611820904946, 3.458058152404466e-52},
      {0.762, -0.635, -0.502, 121, 14.94741869362854, 2.6966814376425066e-29},
      {-0.059, 0.883, 0.083, 344, -24.802549930277657, 1.0},
      {0.003, -0.015, -0.77, 28, 0.0478387073126443, 0.4811124568946116},
      {-0.121, 0.056, -0.244, 273, -1.8572077888044594, 0.9678147856419004},
      {0.5, 0.245, 0.344, 129, 2.8555802594409503, 0.0025127947609512482},
      {0.676, 0.313, -0.028, 103, 3.3737133986990937, 0.0005281386367764588},
      {0.359, 0.293, -0.306, 211, 0.6498421623729723, 0.2582556059000828},
      {-0.215, 0.407, 0.1, 202, -7.445014890376384, 0.999999999998566},
      {-0.507, 0.004, -0.319, 287, -5.944661173163231, 0.9999999959463804},
      {-0.109, 0.496, -0.133, 176, -5.987426424152553, 0.9999999940004516},
      {-0.873, 0.081, 0.05, 313, -22.65746178975471, 1.0},
      {0.111, -0.494, -0.459, 41, 2.4295448450262116, 0.00997678843652745},
      {0.261, -0.161, 0.354, 325, 7.1886842085883735, 2.2966968210749754e-12},
  };
  double steiger_worst = 0.0;
  for (const auto& r : refs) {
    const auto got = steiger_test(r.r13, r.r23, r.r12, r.n);
    steiger_worst = std::max({steiger_worst, std::abs(got.t - r.t), std::abs(got.p_one_tailed - r.p)});
  }
  const double md = mean_deviation(std::vector<double>{1.0, 2.0, 3.0});
  const bool ok = worst <= kSpearmanTol && sym_ok && steiger_worst <= kSteigerTol && md == 2.0 / 3.0;
  return verdict(ok, "spearman max diff " + fmt(worst) + " over 1000 tied lists; steiger symmetric " +
                         (sym_ok ? "t=0 p=0.5" : "WRONG") + ", max diff " + fmt(steiger_worst) +
                         " over 20 references; mean_deviation([1,2,3]) " + (md == 2.0 / 3.0 ? "= 2/3" : "!= 2/3"));
}

Verdict pipeline_oracles() {
  const Tokens dad1 = split_whitespace("my dad had"), dad2 = split_whitespace("my father had");
  const Tokens bal1 = split_whitespace("ballistic missiles"), bal2 = split_whitespace("of ballistic missiles");
  const double s1 = word_overlap_score(dad1, dad2);
  const double s2 = word_overlap_score(bal1, bal2);
  std::vector<PhrasePairRecord> records = {{dad1, dad2, {}, {}, {}, {}}, {bal1, bal2, {}, {}, {}, {}}};
  FilterConfig cfg;
  cfg.max_overlap = 0.5;
  const auto filtered = filter_pairs(records, cfg);
  const std::size_t eff = effective_size(split_whitespace("at no cost to"), split_whitespace("without charge to"));

  Rng rng(17);
  auto random_string = [&] {
    std::string s(uniform_index(rng, 9), 'a');
    for (auto& c : s) c = static_cast<char>('a' + uniform_index(rng, 4));
    return s;
  };
  std::size_t dp_mismatch = 0, axiom_failures = 0;
  for (int k = 0; k < kLevenshteinPairs; ++k) {
    const std::string a = random_string(), b = random_string(), c = random_string();
    const std::size_t ab = levenshtein(a, b);
    if (ab != testing::reference_levenshtein(a, b)) ++dp_mismatch;
    if (levenshtein(a, a) != 0 || ab != levenshtein(b, a) || (ab == 0) != (a == b) ||
        levenshtein(a, c) > ab + levenshtein(b, c)) {
      ++axiom_failures;
    }
  }
  const bool ok = s1 == 1.0 && s2 == 1.0 && filtered.kept.empty() && filtered.counts.overlap == 2 && eff == 4 &&
                  dp_mismatch == 0 && axiom_failures == 0;
  return verdict(ok, "overlap(dad)=" + fmt(s1) + " overlap(ballistic)=" + fmt(s2) + " dropped at overlap " +
                         std::to_string(filtered.counts.overlap) + "/2, effective_size=" + std::to_string(eff) +
                         ", levenshtein " + std::to_string(kLevenshteinPairs) + " pairs: " +
                         std::to_string(dp_mismatch) + " DP mismatches, " + std::to_string(axiom_failures) +
                         " axiom failures");
}

int run_tool(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = PARAGRAM_TOOL_PATH;
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " > '" + log.string() + "' 2>&1";
  return std::system(cmd.c_str());
}

Verdict determinism() {
  TempDir dir;
  Rng rng(41);
  const auto data = testing::make_clusters(4, 8, 6, 0.7, rng);
  save_embeddings_file(data.init, dir / "init.txt");
  std::string pairs;
  for (auto [a, b] : data.train_pairs) pairs += data.words[a] + "\t" + data.words[b] + "\n";
  testing::write_file(dir / "pairs.tsv", pairs);
  std::string phrase_pairs;
  for (std::size_t k = 0; k + 1 < data.train_pairs.size(); k += 2) {
    const auto [a, b] = data.train_pairs[k];
    const auto [c, d] = data.train_pairs[k + 1];
    phrase_pairs += "( " + data.words[a] + " " + data.words[c] + " )\t" + data.words[b] + " " + data.words[d] + "\n";
  }
  testing::write_file(dir / "phrases.tsv", phrase_pairs);
  std::string records;
  for (std::size_t i = 0; i < 60; ++i) {
    // Alphabetic tokens; the digit filter would drop the cluster words.
    const auto w = [&](std::size_t k) {
      const std::size_t id = (i * 7 + k * 3) % 40;
      return std::string("tok") + static_cast<char>('a' + id / 26) + static_cast<char>('a' + id % 26);
    };
    std::string second = w(3);
    for (std::size_t k = 0; k < 2 + i % 3; ++k) second += " " + w(4 + k);
    records += w(0) + " " + w(1) + "\t" + second + "\n";
  }
  testing::write_file(dir / "records.tsv", records);

  struct Run {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> outputs;  // relative to the run directory
  };
  const std::string d = dir.path().string();
  const std::vector<Run> runs = {
      {"train-words",
       {"train-words", "--pairs", d + "/pairs.tsv", "--init", d + "/init.txt", "--epochs", "5", "--batch-size", "16",
        "--sampler", "mix", "--seed", "7", "--threads", "1"},
       {"embeddings.txt", "training.log"}},
      {"train-phrases",
       {"train-phrases", "--pairs", d + "/phrases.tsv", "--init", d + "/init.txt", "--epochs", "3", "--batch-size",
        "8", "--sampler", "rand", "--seed", "7", "--threads", "1"},
       {"embeddings.txt", "composition.txt", "training.log"}},
      {"filter",
       {"filter", "--in", d + "/records.tsv", "--max-overlap", "1", "--sample", "--per-bin", "3", "--seed", "7"},
       {"kept.tsv"}},
  };
  std::vector<std::string> failures;
  for (const auto& run : runs) {
    std::vector<std::string> contents[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / (run.name + "-" + std::to_string(rep));
      auto args = run.args;
      args.push_back("--out");
      args.push_back(run.name == "filter" ? (out / "kept.tsv").string() : out.string());
      if (run_tool(args, dir / (run.name + ".log")) != 0) {
        failures.push_back(run.name + " exited non-zero: " + testing::read_file(dir / (run.name + ".log")));
        break;
      }
      for (const auto& f : run.outputs) contents[rep].push_back(testing::read_file(out / f));
    }
    if (contents[0] != contents[1]) failures.push_back(run.name + " outputs differ");
  }
  if (!failures.empty()) {
    std::string msg;
    for (const auto& f : failures) msg += (msg.empty() ? "" : "; ") + f;
    return fail(msg);
  }
  return pass("train-words, train-phrases and filter --sample byte-identical across reruns (seed 7, --threads 1)");
}

struct Criterion {
  std::string name;
  std::function<Verdict()> run;
};

const std::vector<Criterion> kCriteria = {
    {"baseline", baseline},
    {"gradient_oracle", gradient_oracle},
    {"sampling_oracle", sampling_oracle},
    {"synthetic_words", synthetic_words},
    {"synthetic_phrases", synthetic_phrases},
    {"regularization_pull", regularization_pull},
    {"statistics_oracles", statistics_oracles},
    {"pipeline_oracles", pipeline_oracles},
    {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = argv[++i];
    } else if (a == "--list") {
      for (const auto& c : kCriteria) std::cout << c.name << '\n';
      return 0;
    } else {
      std::cerr << "usage: paragram_acceptance [--list] [--criterion NAME]\n";
      return 2;
    }
  }
  int failed = 0, skipped = 0, ran = 0;
  for (const auto& c : kCriteria) {
    if (!only.empty() && c.name != only) continue;
    ++ran;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kFail ? "FAIL" : "SKIP";
    std::cout << tag << ' ' << c.name << ": " << v.detail << std::endl;
    failed += v.outcome == Outcome::kFail;
    skipped += v.outcome == Outcome::kSkip;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  if (failed) return 1;
  if (!only.empty() && skipped) return 77;
  return 0;
}
