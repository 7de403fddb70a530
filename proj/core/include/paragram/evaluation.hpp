#ifndef PARAGRAM_EVALUATION_HPP_
#define PARAGRAM_EVALUATION_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "paragram/composition.hpp"
#include "paragram/embeddings.hpp"
#include "paragram/pipeline.hpp"
#include "paragram/training.hpp"

namespace paragram {

// ---- statistics ----

// u.v / (|u||v|), or 0 when either norm is below 1e-12. Throws DataError on
// a dimension mismatch.
double cosine_similarity(const Vector& u, const Vector& v);

// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Throws DataError on a length mismatch, fewer than two items or a constant
// list.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of the average ranks. Needs at least three items.
double spearman_rho(std::span<const double> x, std::span<const double> y);

struct SteigerResult {
  double t = 0.0;
  double p_one_tailed = 0.5;
};

// Williams' t for r13 vs r23, two correlations sharing variable 3, with r12
// the correlation between the two predictors. One-tailed p from Student's t
// with n - 3 degrees of freedom.
SteigerResult steiger_test(double r13, double r23, double r12, long long n);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_upper_tail(double t, double df);

// 2 * ws_s - ws_r.
double tuning_criterion(double rho_ws_s, double rho_ws_r);

// ---- datasets and scoring ----

enum class DatasetKind { kWord, kBigram, kPhrase };

std::string_view to_string(DatasetKind kind);

struct ScoredItem {
  std::string text1;  // plain tokens or bracketed tree
  std::string text2;
  double gold = 0.0;
};

struct ScoredDataset {
  std::vector<ScoredItem> items;
  DatasetKind kind = DatasetKind::kPhrase;
};

// TSV `text1 TAB text2 TAB gold`. The kind is inferred from the longest
// phrase: one token is a word set, two a bigram set, else phrases.
ScoredDataset load_scored_dataset(std::istream& in);
ScoredDataset load_scored_dataset_file(const std::filesystem::path& path);

// Leaf tokens of a field that is either plain text or a bracketed tree.
Tokens phrase_tokens(std::string_view text);

enum class ScoringModel { kAdditive, kRnn, kOverlapStrict, kOverlapLemma };

ScoringModel parse_scoring_model(std::string_view name);
std::string_view to_string(ScoringModel model);

struct ScoringArtifacts {
  const EmbeddingSet* embeddings = nullptr;
  const CompositionParams* params = nullptr;
  const LemmaMap* lemmas = nullptr;
};

// Throws UsageError when the model's artifacts are missing.
void check_artifacts(ScoringModel model, const ScoringArtifacts& artifacts);

// Share of the smaller phrase's tokens (p1 on equal lengths) that occur
// verbatim in the other phrase.
double strict_overlap(std::span<const std::string> p1, std::span<const std::string> p2);
// strict_overlap after mapping both sides through `lemmas` (identity for
// unlisted words).
double lemma_overlap(std::span<const std::string> p1, std::span<const std::string> p2,
                     const LemmaMap& lemmas);

double predict_item(const ScoredItem& item, ScoringModel model, const ScoringArtifacts& artifacts);

std::vector<double> predict(const ScoredDataset& ds, ScoringModel model,
                            const ScoringArtifacts& artifacts, unsigned threads = 1);

struct CorrelationReport {
  double rho = 0.0;
  std::size_t n = 0;
  std::vector<double> predictions;
};

CorrelationReport score_dataset(const ScoredDataset& ds, ScoringModel model,
                                const ScoringArtifacts& artifacts, unsigned threads = 1);

// ---- error analysis ----

// 2 * cos + 3. Throws DataError outside [-1, 1] (with 1e-9 slack, clamped).
double map_to_rating_scale(double cos);

// Per-dataset min/max rescaling onto [lo, hi]. Throws DataError on a
// constant list.
std::vector<double> rescale_min_max(std::span<const double> values, double lo = 1.0, double hi = 5.0);

// min(|p1|, |p2|) / max(|p1|, |p2|).
double length_ratio(std::span<const std::string> p1, std::span<const std::string> p2);

// Symmetric set of lexically paired words.
class WordPairResource {
 public:
  void add(std::string_view a, std::string_view b);
  bool paired(std::string_view a, std::string_view b) const;
  std::size_t size() const noexcept { return pairs_.size(); }

 private:
  std::unordered_set<std::string> pairs_;
};

// TSV `word1 TAB word2`.
WordPairResource load_word_pairs(std::istream& in);
WordPairResource load_word_pairs_file(const std::filesystem::path& path);

// Size of a maximum one-to-one matching between equivalent tokens (exact
// match or paired in `resource`) over the smaller phrase's length.
double overlap_ratio(std::span<const std::string> p1, std::span<const std::string> p2,
                     const WordPairResource& resource);

enum class ErrorBinning { kGold, kLengthRatio, kOverlapRatio };

ErrorBinning parse_error_binning(std::string_view name);  // gold | length | overlap
std::string_view to_string(ErrorBinning binning);

struct ErrorRow {
  std::string bin;
  std::string subset;  // "all" for gold bins; positive | negative | both otherwise
  std::size_t count = 0;
  std::optional<double> error_a;
  std::optional<double> error_b;
  // 100 * (error_b - error_a) / error_a; absent for an empty bin or zero error_a.
  std::optional<double> percent_change;
};

struct ErrorTable {
  ErrorBinning binning = ErrorBinning::kGold;
  std::vector<ErrorRow> rows;
};

// Mean absolute error per gold bin [1,2), [2,3), [3,4), [4,5].
ErrorTable error_by_gold(std::span<const double> gold, std::span<const double> pred_a,
                         std::span<const double> pred_b);

// Percent change in mean absolute error from system a to system b per
// feature bin, for positive (gold > 4), negative (gold < 2) and both
// subsets. Length bins: [0,0.6], (0.6,0.8], (0.8,1]; overlap bins: thirds.
ErrorTable error_change_by_feature(std::span<const double> gold, std::span<const double> pred_a,
                                   std::span<const double> pred_b, std::span<const double> feature,
                                   ErrorBinning binning);

void write_error_table(const ErrorTable& table, std::ostream& out);
// Whitespace-separated columns with '#' header and '?' for absent values.
void write_error_table_gnuplot(const ErrorTable& table, std::ostream& out);

}  // namespace paragram

#endif  // PARAGRAM_EVALUATION_HPP_
