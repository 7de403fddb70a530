#ifndef PARAGRAM_TRAINING_HPP_
#define PARAGRAM_TRAINING_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "paragram/composition.hpp"
#include "paragram/embeddings.hpp"
#include "paragram/random.hpp"

namespace paragram {

enum class Similarity { kDot, kCosine };
// MAX: most similar batch phrase. RAND: uniform. MIX: MAX or RAND with
// probability 1/2 per slot. LEAST: least similar phrase that still violates
// the margin, else MAX.
enum class Sampler { kMax, kRand, kMix, kLeast };
// Which sides of the other batch pairs are negative candidates.
enum class NegativePool { kFirst, kBoth };
enum class TrainMode { kWords, kPhrases };

std::string_view to_string(Similarity s);
std::string_view to_string(Sampler s);
std::string_view to_string(NegativePool p);
std::string_view to_string(TrainMode m);
// Case-insensitive; throw UsageError on unknown names.
Similarity parse_similarity(std::string_view name);
Sampler parse_sampler(std::string_view name);
NegativePool parse_negative_pool(std::string_view name);
TrainMode parse_train_mode(std::string_view name);

struct Hyperparameters {
  double delta = 1.0;          // margin
  double lambda_words = 0.0;   // pull of W_w towards its initial value
  double lambda_comp = 0.0;    // L2 on W and b
  double lr_words = 0.5;
  double lr_comp = 0.05;
  std::size_t batch_size = 100;
  int epochs = 20;
  Similarity similarity = Similarity::kDot;
  Sampler sampler = Sampler::kMax;
  NegativePool pool = NegativePool::kBoth;
  std::uint64_t seed = 1;
  double adagrad_eps = 1e-8;

  // Throws UsageError when a value is out of range.
  void validate() const;
};

// Defaults for lexical training (20 epochs) and phrase training (5 epochs).
Hyperparameters word_defaults();
Hyperparameters phrase_defaults();

// A paraphrase pair. Word pairs are two single-leaf trees.
struct TrainingPair {
  ParseTree first;
  ParseTree second;
};

TrainingPair make_pair(std::string_view first, std::string_view second);

// TSV `phrase1 TAB phrase2`; each field a token sequence or a parenthesized
// tree. In word mode each field must be one token. Rejects identical sides.
std::vector<TrainingPair> read_training_pairs(std::istream& in, TrainMode mode);
std::vector<TrainingPair> read_training_pairs_file(const std::filesystem::path& path, TrainMode mode);

// A phrase inside a batch: pair index and side (0 = first, 1 = second).
struct PhraseRef {
  std::size_t pair = 0;
  int side = 0;

  std::size_t slot() const noexcept { return 2 * pair + static_cast<std::size_t>(side); }
  friend bool operator==(const PhraseRef&, const PhraseRef&) = default;
};

// Negatives for one pair: `first` contrasts with x1, `second` with x2. An
// empty slot contributes no hinge term.
struct Negatives {
  std::optional<PhraseRef> first;
  std::optional<PhraseRef> second;
};

struct MiniBatch {
  std::vector<TrainingPair> pairs;
  std::vector<Negatives> negatives;  // empty until selected, else one per pair
};

// Words that may not serve as negatives for a given word: its training
// partners and their lemmas.
class ConstraintIndex {
 public:
  void forbid(const std::string& word, const std::string& other);
  bool forbids(const std::string& word, const std::string& candidate) const;
  const std::unordered_set<std::string>* forbidden(const std::string& word) const;
  std::size_t size() const noexcept { return forbidden_.size(); }
  bool empty() const noexcept { return forbidden_.empty(); }

 private:
  std::unordered_map<std::string, std::unordered_set<std::string>> forbidden_;
};

using LemmaMap = std::unordered_map<std::string, std::string>;

// TSV `word TAB lemma`.
LemmaMap load_lemma_map(std::istream& in);
LemmaMap load_lemma_map_file(const std::filesystem::path& path);

// forbidden(w) = partners of w in `pairs` plus the partners' lemmas (the
// lemma map falls back to the identity). Pairs are keyed by surface text.
ConstraintIndex build_constraints(std::span<const TrainingPair> pairs, const LemmaMap& lemmas);

double similarity(const Vector& u, const Vector& v, Similarity kind);

// Picks negatives from precomputed phrase vectors (`vectors[2*i + side]`).
// Candidates come from the other pairs of the batch, skip any phrase whose
// surface equals x1 or x2, and skip constraint-forbidden phrases. Argmax and
// argmin ties go to the lowest slot. Throws DataError when a slot has no
// candidate unless `allow_missing`, which leaves the slot empty instead.
std::vector<Negatives> select_negatives(const MiniBatch& batch, std::span<const Vector> vectors,
                                        const Hyperparameters& hp,
                                        const ConstraintIndex* constraints, Rng& rng,
                                        bool allow_missing = false);

using PhraseEncoder = std::function<Vector(const ParseTree&)>;

// Encodes every batch phrase with `encode` and fills batch.negatives.
MiniBatch select_negatives(MiniBatch batch, const PhraseEncoder& encode, const Hyperparameters& hp,
                           const ConstraintIndex* constraints, Rng& rng);

struct LossBreakdown {
  double data = 0.0;            // mean hinge loss over the batch
  double regularization = 0.0;
  double total() const noexcept { return data + regularization; }
};

// Gradient for W_w. `values` has the shape of the embedding matrix; `rows`
// lists, in ascending order, the rows that may be non-zero.
struct EmbeddingGradient {
  EmbeddingMatrix values;
  std::vector<std::size_t> rows;
};

struct PhraseGradients {
  Eigen::MatrixXd W;
  Vector b;
  EmbeddingGradient words;
};

// Objective with RNN composition: mean over pairs of
//   max(0, d - s(x1,x2) + s(x1,t1)) + max(0, d - s(x1,x2) + s(x2,t2))
// plus lambda_comp (|W|^2 + |b|^2) + lambda_words |W_w - W_w_initial|^2.
// `initial` must have the same vocabulary and shape as `words`.
LossBreakdown phrase_loss_breakdown(const MiniBatch& batch, const CompositionParams& params,
                                    const EmbeddingSet& words, const EmbeddingSet& initial,
                                    const Hyperparameters& hp);
double phrase_loss(const MiniBatch& batch, const CompositionParams& params, const EmbeddingSet& words,
                   const EmbeddingSet& initial, const Hyperparameters& hp);
PhraseGradients phrase_gradients(const MiniBatch& batch, const CompositionParams& params,
                                 const EmbeddingSet& words, const EmbeddingSet& initial,
                                 const Hyperparameters& hp);

// Lexical objective: phrases are single words, no composition terms.
LossBreakdown word_loss_breakdown(const MiniBatch& batch, const EmbeddingSet& words,
                                  const EmbeddingSet& initial, const Hyperparameters& hp);
double word_loss(const MiniBatch& batch, const EmbeddingSet& words, const EmbeddingSet& initial,
                 const Hyperparameters& hp);
EmbeddingGradient word_gradients(const MiniBatch& batch, const EmbeddingSet& words,
                                 const EmbeddingSet& initial, const Hyperparameters& hp);

// Per-tensor AdaGrad accumulator; sized lazily on first use.
struct AdaGradState {
  std::vector<double> accum;
  double eps = 1e-8;
};

// accum += g^2; theta -= lr * g / (sqrt(accum) + eps), elementwise.
void adagrad_update(std::span<double> theta, std::span<const double> grad, AdaGradState& state,
                    double lr);

struct TrainOptions {
  TrainMode mode = TrainMode::kWords;
  // Phrase mode only; defaults to CompositionParams::averaging.
  std::optional<CompositionParams> init_params;
  const ConstraintIndex* constraints = nullptr;
  // Workers for the forward pass; results do not depend on it.
  unsigned threads = 1;
  std::function<void(int epoch, double mean_data_loss)> on_epoch;
};

struct TrainResult {
  EmbeddingSet words;
  std::optional<CompositionParams> composition;  // phrase mode
  std::vector<double> epoch_losses;              // mean batch data loss per epoch
};

// Shuffles the pairs each epoch with the seeded generator, cuts them into
// mini-batches (a trailing batch of one pair joins the previous batch),
// selects negatives with the current parameters, and applies AdaGrad.
// `init` gains an `<unk>` row when some training token is missing from it.
TrainResult train(std::span<const TrainingPair> pairs, const EmbeddingSet& init,
                  const Hyperparameters& hp, const TrainOptions& options = {});

// Mean hinge loss over `pairs` cut in order into batches of hp.batch_size,
// with MAX negatives. `params` is required in phrase mode.
double mean_data_loss(std::span<const TrainingPair> pairs, const EmbeddingSet& words,
                      const CompositionParams* params, const Hyperparameters& hp, TrainMode mode,
                      const ConstraintIndex* constraints = nullptr);

// Candidate values per hyperparameter; an empty list keeps the base value.
struct GridSpace {
  std::vector<double> lambda_words;
  std::vector<double> lambda_comp;
  std::vector<std::size_t> batch_sizes;
  std::vector<double> deltas;
  std::vector<Sampler> samplers;

  bool empty() const noexcept;
};

// lambda_words in {1e-2, ..., 1e-7, 0}; batch sizes {100, 250, 500, 1000}.
GridSpace word_grid();
// lambda_words as above, lambda_comp in {1e-1, 1e-2, 1e-3, 0}, batch sizes
// {100, 250, 500, 1000, 2000}.
GridSpace phrase_grid();
// phrase_grid with lambda_words shifted up to {10, 1, 1e-1, 1e-3, ..., 1e-6}
// for already tuned initial vectors.
GridSpace phrase_grid_tuned_init();

// Cartesian product in the order lambda_words, lambda_comp, batch size,
// delta, sampler (last varies fastest).
std::vector<Hyperparameters> enumerate_grid(const GridSpace& space, const Hyperparameters& base);

struct GridPoint {
  Hyperparameters hp;
  double score = 0.0;
};

struct GridResult {
  Hyperparameters best;
  double best_score = 0.0;
  std::vector<GridPoint> table;
};

// Runs `train_and_score` on every grid point and returns the argmax (ties go
// to the earliest point) with the full table. Throws DataError on an empty
// space.
GridResult grid_search(const GridSpace& space, const Hyperparameters& base,
                       const std::function<double(const Hyperparameters&)>& train_and_score);

}  // namespace paragram

#endif  // PARAGRAM_TRAINING_HPP_
