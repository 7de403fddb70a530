#ifndef PARAGRAM_TESTS_SUPPORT_HPP_
#define PARAGRAM_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paragram/composition.hpp"
#include "paragram/embeddings.hpp"
#include "paragram/random.hpp"
#include "paragram/training.hpp"

namespace paragram::testing {

// Directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

// what() of the E thrown by `f`, or "<no throw>".
template <class E, class F>
std::string error_text(F&& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  }
  return "<no throw>";
}

EmbeddingSet make_set(const std::vector<std::string>& words, const std::vector<std::vector<double>>& rows);
EmbeddingSet random_set(const std::vector<std::string>& words, Eigen::Index dim, double scale, Rng& rng);

// ---- reference implementations ----

// Average ranks by counting smaller and equal values; O(n^2).
std::vector<double> reference_ranks(std::span<const double> values);
// Rank-then-Pearson in long double.
double reference_spearman(std::span<const double> x, std::span<const double> y);
// Full-table edit distance over bytes.
std::size_t reference_levenshtein(const std::string& a, const std::string& b);

enum class Pick { kMax, kLeast };

// Exhaustive negative choice for slot (pair, side) of `batch`.
std::optional<std::size_t> reference_negative(const MiniBatch& batch, std::span<const Vector> vectors,
                                              std::size_t pair, int side, const Hyperparameters& hp,
                                              const ConstraintIndex* constraints, Pick pick);

// ---- finite-difference gradient check ----

struct GradientCheck {
  bool accepted = false;  // false when a hinge sits too close to its kink
  double error_words = 0.0;
  double error_W = 0.0;
  double error_b = 0.0;
  double max_error() const;
};

// Builds a random instance (n <= 5, batch <= 8) and compares analytic
// gradients with central differences of step `step`.
GradientCheck check_random_gradients(Rng& rng, TrainMode mode, Similarity sim, double step = 1e-5);

// ---- synthetic data ----

struct ClusterData {
  std::vector<std::string> words;                 // cluster-major
  std::vector<std::size_t> cluster;                // per word
  std::vector<std::pair<std::size_t, std::size_t>> train_pairs;
  std::vector<std::pair<std::size_t, std::size_t>> heldout_pairs;
  EmbeddingSet init;
};

// `clusters` x `per_cluster` words with random vectors; a share
// `train_fraction` of each cluster's word pairs is used for training.
ClusterData make_clusters(std::size_t clusters, std::size_t per_cluster, Eigen::Index dim,
                          double train_fraction, Rng& rng, const std::string& prefix = "w");

std::vector<TrainingPair> to_training_pairs(const ClusterData& data,
                                            std::span<const std::pair<std::size_t, std::size_t>> pairs);

// Share of ordered cluster pairs (A, B) in which the mean held-out cosine
// within A exceeds the mean cosine between words of A and B.
double cluster_separation(const ClusterData& data, const EmbeddingSet& trained);

// Template grammar over adjective and noun synonym clusters.
struct PhraseTask {
  ClusterData adjectives;
  ClusterData nouns;
  EmbeddingSet words;  // adjectives and nouns together
  std::vector<TrainingPair> word_pairs;
  std::vector<TrainingPair> train_pairs;  // paraphrastic ( adj noun ) pairs
  struct Item {
    ParseTree a;
    ParseTree b;
    double gold;  // 5: both slots synonymous, 3: one slot, 1: neither
  };
  std::vector<Item> heldout;
};

PhraseTask make_phrase_task(Rng& rng);

}  // namespace paragram::testing

#endif  // PARAGRAM_TESTS_SUPPORT_HPP_
