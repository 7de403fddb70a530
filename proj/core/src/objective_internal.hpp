#ifndef PARAGRAM_SRC_OBJECTIVE_INTERNAL_HPP_
#define PARAGRAM_SRC_OBJECTIVE_INTERNAL_HPP_

#include <vector>

#include "paragram/training.hpp"

namespace paragram::detail {

// Node activations of every phrase in a batch, indexed by slot 2*i + side.
struct BatchActivations {
  std::vector<std::vector<Vector>> nodes;

  const Vector& root(std::size_t slot) const { return nodes[slot].back(); }
  std::vector<Vector> roots() const;
};

// `params` is null in word mode, where every phrase must be a single leaf.
BatchActivations forward_batch(const MiniBatch& batch, const CompositionParams* params,
                               const EmbeddingSet& words, unsigned threads = 1);

// Sparse-row accumulator for the W_w gradient.
class RowAccumulator {
 public:
  void reset(std::size_t rows, Eigen::Index dim);
  void add(std::size_t row, const Vector& g);
  void add_all(const EmbeddingMatrix& g);
  // Sorts the touched-row list.
  void finalize();
  // Zeroes touched rows only, keeping the buffers.
  void clear();

  EmbeddingGradient& gradient() noexcept { return grad_; }
  const EmbeddingGradient& gradient() const noexcept { return grad_; }

 private:
  EmbeddingGradient grad_;
  std::vector<char> touched_;
};

struct GradientSink {
  Eigen::MatrixXd* W = nullptr;  // phrase mode only
  Vector* b = nullptr;
  RowAccumulator* words = nullptr;
};

// Mean hinge loss of a batch with selected negatives. When `sink` is set,
// also accumulates the data-term gradients (backprop through the trees).
double data_term(const MiniBatch& batch, const BatchActivations& acts,
                 const CompositionParams* params, const EmbeddingSet& words,
                 const Hyperparameters& hp, GradientSink* sink);

// Adds the exact regularizer gradients to `sink`.
void add_regularizer_gradients(const CompositionParams* params, const EmbeddingSet& words,
                               const EmbeddingSet& initial, const Hyperparameters& hp,
                               GradientSink& sink);

}  // namespace paragram::detail

#endif  // PARAGRAM_SRC_OBJECTIVE_INTERNAL_HPP_
