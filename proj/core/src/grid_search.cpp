#include "paragram/error.hpp"
#include "paragram/training.hpp"

namespace paragram {

namespace {

const std::vector<double> kWordLambdas = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 0.0};

template <typename T>
std::vector<T> or_base(const std::vector<T>& values, T base) {
  return values.empty() ? std::vector<T>{base} : values;
}

}  // namespace

bool GridSpace::empty() const noexcept {
  return lambda_words.empty() && lambda_comp.empty() && batch_sizes.empty() && deltas.empty() &&
         samplers.empty();
}

GridSpace word_grid() {
  GridSpace g;
  g.lambda_words = kWordLambdas;
  g.batch_sizes = {100, 250, 500, 1000};
  return g;
}

GridSpace phrase_grid() {
  GridSpace g;
  g.lambda_words = kWordLambdas;
  g.lambda_comp = {1e-1, 1e-2, 1e-3, 0.0};
  g.batch_sizes = {100, 250, 500, 1000, 2000};
  return g;
}

GridSpace phrase_grid_tuned_init() {
  GridSpace g = phrase_grid();
  g.lambda_words = {10.0, 1.0, 1e-1, 1e-3, 1e-4, 1e-5, 1e-6};
  return g;
}

std::vector<Hyperparameters> enumerate_grid(const GridSpace& space, const Hyperparameters& base) {
  std::vector<Hyperparameters> out;
  for (double lw : or_base(space.lambda_words, base.lambda_words)) {
    for (double lc : or_base(space.lambda_comp, base.lambda_comp)) {
      for (std::size_t bs : or_base(space.batch_sizes, base.batch_size)) {
        for (double d : or_base(space.deltas, base.delta)) {
          for (Sampler s : or_base(space.samplers, base.sampler)) {
            Hyperparameters hp = base;
            hp.lambda_words = lw;
            hp.lambda_comp = lc;
            hp.batch_size = bs;
            hp.delta = d;
            hp.sampler = s;
            out.push_back(hp);
          }
        }
      }
    }
  }
  return out;
}

GridResult grid_search(const GridSpace& space, const Hyperparameters& base,
                       const std::function<double(const Hyperparameters&)>& train_and_score) {
  if (space.empty()) throw DataError("empty hyperparameter grid");
  GridResult result;
  bool first = true;
  for (const auto& hp : enumerate_grid(space, base)) {
    hp.validate();
    const double score = train_and_score(hp);
    result.table.push_back({hp, score});
    if (first || score > result.best_score) {
      result.best = hp;
      result.best_score = score;
      first = false;
    }
  }
  return result;
}

}  // namespace paragram
