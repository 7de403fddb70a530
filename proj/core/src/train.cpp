#include <cmath>
#include <istream>
#include <numeric>

#include "objective_internal.hpp"
#include "paragram/error.hpp"
#include "paragram/text.hpp"
#include "paragram/training.hpp"

namespace paragram {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view name, const std::pair<std::string_view, E> (&table)[N],
             std::string_view what) {
  const std::string lowered = to_lower_ascii(name);
  for (const auto& [key, value] : table) {
    if (lowered == key) return value;
  }
  std::string choices;
  for (const auto& [key, value] : table) choices += (choices.empty() ? "" : "|") + std::string(key);
  throw UsageError("unknown " + std::string(what) + " '" + std::string(name) + "' (expected " +
                   choices + ")");
}

constexpr std::pair<std::string_view, Similarity> kSimilarityNames[] = {
    {"dot", Similarity::kDot}, {"cosine", Similarity::kCosine}};
constexpr std::pair<std::string_view, Sampler> kSamplerNames[] = {
    {"max", Sampler::kMax}, {"rand", Sampler::kRand}, {"mix", Sampler::kMix}, {"least", Sampler::kLeast}};
constexpr std::pair<std::string_view, NegativePool> kPoolNames[] = {
    {"first", NegativePool::kFirst}, {"both", NegativePool::kBoth}};
constexpr std::pair<std::string_view, TrainMode> kModeNames[] = {
    {"words", TrainMode::kWords}, {"phrases", TrainMode::kPhrases}};

template <typename E, std::size_t N>
std::string_view enum_name(E value, const std::pair<std::string_view, E> (&table)[N]) {
  for (const auto& [key, v] : table) {
    if (v == value) return key;
  }
  return "?";
}

}  // namespace

std::string_view to_string(Similarity s) { return enum_name(s, kSimilarityNames); }
std::string_view to_string(Sampler s) { return enum_name(s, kSamplerNames); }
std::string_view to_string(NegativePool p) { return enum_name(p, kPoolNames); }
std::string_view to_string(TrainMode m) { return enum_name(m, kModeNames); }

Similarity parse_similarity(std::string_view name) {
  return parse_enum(name, kSimilarityNames, "similarity");
}
Sampler parse_sampler(std::string_view name) { return parse_enum(name, kSamplerNames, "sampler"); }
NegativePool parse_negative_pool(std::string_view name) {
  return parse_enum(name, kPoolNames, "negative pool");
}
TrainMode parse_train_mode(std::string_view name) { return parse_enum(name, kModeNames, "mode"); }

void Hyperparameters::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
  };
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  require(std::isfinite(lambda_words) && lambda_words >= 0.0, "lambda-words must be non-negative");
  require(std::isfinite(lambda_comp) && lambda_comp >= 0.0, "lambda-comp must be non-negative");
  require(std::isfinite(lr_words) && lr_words > 0.0, "lr-words must be positive");
  require(std::isfinite(lr_comp) && lr_comp > 0.0, "lr-comp must be positive");
  require(batch_size > 0, "batch-size must be positive");
  require(epochs >= 0, "epochs must be non-negative");
  require(adagrad_eps > 0.0, "AdaGrad epsilon must be positive");
}

Hyperparameters word_defaults() { return Hyperparameters{}; }

Hyperparameters phrase_defaults() {
  Hyperparameters hp;
  hp.epochs = 5;
  return hp;
}

TrainingPair make_pair(std::string_view first, std::string_view second) {
  return TrainingPair{parse_phrase(first), parse_phrase(second)};
}

std::vector<TrainingPair> read_training_pairs(std::istream& in, TrainMode mode) {
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "pairs line " + std::to_string(line_no);
    auto fields = split_tabs(line);
    if (fields.size() < 2) throw DataError(where + ": expected `phrase1 TAB phrase2`");
    TrainingPair p;
    try {
      p = paragram::make_pair(fields[0], fields[1]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (mode == TrainMode::kWords && (!p.first.is_leaf() || !p.second.is_leaf())) {
      throw DataError(where + ": word pairs must be single tokens");
    }
    if (p.first.surface() == p.second.surface()) {
      throw DataError(where + ": both sides are identical");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<TrainingPair> read_training_pairs_file(const std::filesystem::path& path,
                                                   TrainMode mode) {
  auto in = open_input(path);
  return read_training_pairs(in, mode);
}

namespace {

// Batch boundaries over n items; a trailing batch of one joins its
// predecessor so that every batch can supply negatives.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t size) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t begin = 0; begin < n; begin += size) out.emplace_back(begin, std::min(n, begin + size));
  if (out.size() > 1 && out.back().second - out.back().first == 1) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

bool needs_unknown_row(std::span<const TrainingPair> pairs, const EmbeddingSet& set) {
  if (set.vocab().unk_index()) return false;
  for (const auto& p : pairs) {
    for (const ParseTree* t : {&p.first, &p.second}) {
      for (const auto& node : t->nodes()) {
        if (node.is_leaf() && !set.index_of(node.token)) return true;
      }
    }
  }
  return false;
}

void adagrad_rows(EmbeddingMatrix& theta, const EmbeddingGradient& grad, AdaGradState& state,
                  double lr) {
  const auto dim = static_cast<std::size_t>(theta.cols());
  if (state.accum.empty()) state.accum.assign(static_cast<std::size_t>(theta.size()), 0.0);
  // Row-major storage: row r occupies [r*dim, (r+1)*dim).
  for (auto r : grad.rows) {
    double* t = theta.data() + r * dim;
    const double* g = grad.values.data() + r * dim;
    double* acc = state.accum.data() + r * dim;
    for (std::size_t c = 0; c < dim; ++c) {
      if (g[c] == 0.0) continue;
      acc[c] += g[c] * g[c];
      t[c] -= lr * g[c] / (std::sqrt(acc[c]) + state.eps);
    }
  }
}

}  // namespace

TrainResult train(std::span<const TrainingPair> pairs, const EmbeddingSet& init,
                  const Hyperparameters& hp, const TrainOptions& options) {
  hp.validate();
  if (pairs.empty()) throw DataError("empty training set");
  const bool phrases = options.mode == TrainMode::kPhrases;

  std::optional<CompositionParams> params;
  if (phrases) {
    params = options.init_params ? *options.init_params : CompositionParams::averaging(init.dim());
    params->validate();
    if (params->dim() != init.dim()) {
      throw DataError("composition dimension " + std::to_string(params->dim()) +
                      " does not match embedding dimension " + std::to_string(init.dim()));
    }
  }
  if (hp.epochs == 0) return TrainResult{init, params, {}};
  if (pairs.size() < 2) throw DataError("at least two training pairs are needed to select negatives");
  if (!phrases) {
    for (const auto& p : pairs) {
      if (!p.first.is_leaf() || !p.second.is_leaf()) {
        throw DataError("word training needs single-token pairs, got '" + p.first.surface() + "'");
      }
    }
  }

  EmbeddingSet words = needs_unknown_row(pairs, init) ? init.with_unknown_row() : init;
  const EmbeddingSet initial = words;
  CompositionParams* params_ptr = params ? &*params : nullptr;

  AdaGradState words_state{{}, hp.adagrad_eps};
  AdaGradState w_state{{}, hp.adagrad_eps};
  AdaGradState b_state{{}, hp.adagrad_eps};

  detail::RowAccumulator rows;
  rows.reset(words.size(), words.dim());
  Eigen::MatrixXd w_grad;
  Vector b_grad;
  if (params) {
    w_grad = Eigen::MatrixXd::Zero(params->W.rows(), params->W.cols());
    b_grad = Vector::Zero(params->b.size());
  }
  detail::GradientSink sink{params ? &w_grad : nullptr, params ? &b_grad : nullptr, &rows};

  Rng rng(hp.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (auto [begin, end] : batch_ranges(order.size(), hp.batch_size)) {
      MiniBatch batch;
      batch.pairs.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) batch.pairs.push_back(pairs[order[k]]);

      auto acts = detail::forward_batch(batch, params_ptr, words, options.threads);
      const auto roots = acts.roots();
      batch.negatives = select_negatives(batch, roots, hp, options.constraints, rng, true);

      if (params) {
        w_grad.setZero();
        b_grad.setZero();
      }
      loss_sum += detail::data_term(batch, acts, params_ptr, words, hp, &sink);
      detail::add_regularizer_gradients(params_ptr, words, initial, hp, sink);
      rows.finalize();

      adagrad_rows(words.mutable_matrix(), rows.gradient(), words_state, hp.lr_words);
      if (params) {
        adagrad_update(std::span<double>(params->W.data(), static_cast<std::size_t>(params->W.size())),
                       std::span<const double>(w_grad.data(), static_cast<std::size_t>(w_grad.size())),
                       w_state, hp.lr_comp);
        adagrad_update(std::span<double>(params->b.data(), static_cast<std::size_t>(params->b.size())),
                       std::span<const double>(b_grad.data(), static_cast<std::size_t>(b_grad.size())),
                       b_state, hp.lr_comp);
      }
      rows.clear();
      ++batches;
    }
    const double mean = loss_sum / static_cast<double>(batches);
    result.epoch_losses.push_back(mean);
    if (options.on_epoch) options.on_epoch(epoch + 1, mean);
  }

  result.words = EmbeddingSet(words.vocab(), words.matrix());
  result.composition = std::move(params);
  return result;
}

double mean_data_loss(std::span<const TrainingPair> pairs, const EmbeddingSet& words,
                      const CompositionParams* params, const Hyperparameters& hp, TrainMode mode,
                      const ConstraintIndex* constraints) {
  if (pairs.size() < 2) throw DataError("at least two pairs are needed to select negatives");
  if (mode == TrainMode::kPhrases && !params) throw DataError("phrase loss needs composition parameters");
  Hyperparameters max_hp = hp;
  max_hp.sampler = Sampler::kMax;
  const CompositionParams* p = mode == TrainMode::kPhrases ? params : nullptr;
  Rng rng(hp.seed);
  double total = 0.0;
  for (auto [begin, end] : batch_ranges(pairs.size(), hp.batch_size)) {
    MiniBatch batch;
    batch.pairs.assign(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                       pairs.begin() + static_cast<std::ptrdiff_t>(end));
    auto acts = detail::forward_batch(batch, p, words);
    const auto roots = acts.roots();
    batch.negatives = select_negatives(batch, roots, max_hp, constraints, rng, true);
    total += detail::data_term(batch, acts, p, words, max_hp, nullptr) * static_cast<double>(end - begin);
  }
  return total / static_cast<double>(pairs.size());
}

}  // namespace paragram
