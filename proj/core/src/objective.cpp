#include <algorithm>

#include "objective_internal.hpp"
#include "paragram/error.hpp"
#include "paragram/parallel.hpp"
#include "paragram/training.hpp"

namespace paragram {
namespace detail {

std::vector<Vector> BatchActivations::roots() const {
  std::vector<Vector> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n.back());
  return out;
}

BatchActivations forward_batch(const MiniBatch& batch, const CompositionParams* params,
                               const EmbeddingSet& words, unsigned threads) {
  BatchActivations acts;
  acts.nodes.resize(2 * batch.pairs.size());
  parallel_for(acts.nodes.size(), threads, [&](std::size_t slot) {
    const auto& pair = batch.pairs[slot / 2];
    const ParseTree& tree = slot % 2 == 0 ? pair.first : pair.second;
    if (params) {
      acts.nodes[slot] = forward_rnn(tree, *params, words);
    } else {
      if (!tree.is_leaf()) {
        throw DataError("word objective needs single-token phrases, got '" + tree.surface() + "'");
      }
      acts.nodes[slot] = {words.lookup(tree.nodes().front().token)};
    }
  });
  return acts;
}

void RowAccumulator::reset(std::size_t rows, Eigen::Index dim) {
  grad_.values = EmbeddingMatrix::Zero(static_cast<Eigen::Index>(rows), dim);
  grad_.rows.clear();
  touched_.assign(rows, 0);
}

void RowAccumulator::add(std::size_t row, const Vector& g) {
  if (!touched_[row]) {
    touched_[row] = 1;
    grad_.rows.push_back(row);
  }
  grad_.values.row(static_cast<Eigen::Index>(row)) += g.transpose();
}

void RowAccumulator::add_all(const EmbeddingMatrix& g) {
  grad_.values += g;
  for (std::size_t r = 0; r < touched_.size(); ++r) {
    if (!touched_[r]) {
      touched_[r] = 1;
      grad_.rows.push_back(r);
    }
  }
}

void RowAccumulator::finalize() { std::sort(grad_.rows.begin(), grad_.rows.end()); }

void RowAccumulator::clear() {
  for (auto r : grad_.rows) {
    grad_.values.row(static_cast<Eigen::Index>(r)).setZero();
    touched_[r] = 0;
  }
  grad_.rows.clear();
}

namespace {

// Adds scale * ds(u,v)/du to du and scale * ds(u,v)/dv to dv.
void add_similarity_gradient(const Vector& u, const Vector& v, Similarity kind, double scale,
                             Vector& du, Vector& dv) {
  if (kind == Similarity::kDot) {
    du.noalias() += scale * v;
    dv.noalias() += scale * u;
    return;
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < 1e-12 || nv < 1e-12) return;
  const double s = u.dot(v) / (nu * nv);
  du.noalias() += scale * (v / (nu * nv) - s * u / (nu * nu));
  dv.noalias() += scale * (u / (nu * nv) - s * v / (nv * nv));
}

void backprop_tree(const ParseTree& tree, const std::vector<Vector>& g, const Vector& root_grad,
                   const CompositionParams* params, const EmbeddingSet& words, GradientSink& sink) {
  const auto& nodes = tree.nodes();
  std::vector<Vector> dg(nodes.size());
  dg.back() = root_grad;
  for (std::size_t k = nodes.size(); k-- > 0;) {
    if (dg[k].size() == 0) continue;
    const auto& node = nodes[k];
    if (node.is_leaf()) {
      if (sink.words) {
        if (auto row = words.resolve(node.token)) sink.words->add(*row, dg[k]);
      }
      continue;
    }
    const Eigen::Index n = params->b.size();
    const Vector dz = (dg[k].array() * (1.0 - g[k].array().square())).matrix();
    if (sink.W) {
      sink.W->leftCols(n).noalias() += dz * g[node.left].transpose();
      sink.W->rightCols(n).noalias() += dz * g[node.right].transpose();
    }
    if (sink.b) *sink.b += dz;
    auto accumulate = [&](std::int32_t child, const Vector& d) {
      if (dg[child].size() == 0) {
        dg[child] = d;
      } else {
        dg[child] += d;
      }
    };
    accumulate(node.left, params->W.leftCols(n).transpose() * dz);
    accumulate(node.right, params->W.rightCols(n).transpose() * dz);
  }
}

}  // namespace

double data_term(const MiniBatch& batch, const BatchActivations& acts,
                 const CompositionParams* params, const EmbeddingSet& words,
                 const Hyperparameters& hp, GradientSink* sink) {
  const std::size_t n_pairs = batch.pairs.size();
  if (n_pairs == 0) return 0.0;
  if (batch.negatives.size() != n_pairs) throw DataError("negatives have not been selected");
  const double inv = 1.0 / static_cast<double>(n_pairs);
  const Eigen::Index dim = words.dim();

  std::vector<Vector> root_grads;
  if (sink) root_grads.assign(2 * n_pairs, Vector::Zero(dim));
  std::vector<char> active(sink ? 2 * n_pairs : 0, 0);

  double loss = 0.0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const std::size_t s1 = 2 * i;
    const std::size_t s2 = 2 * i + 1;
    const double base = similarity(acts.root(s1), acts.root(s2), hp.similarity);
    for (int side = 0; side < 2; ++side) {
      const auto& neg = side == 0 ? batch.negatives[i].first : batch.negatives[i].second;
      if (!neg) continue;
      const std::size_t anchor = side == 0 ? s1 : s2;
      const std::size_t t = neg->slot();
      const double hinge = hp.delta - base + similarity(acts.root(anchor), acts.root(t), hp.similarity);
      if (hinge <= 0.0) continue;
      loss += hinge;
      if (!sink) continue;
      add_similarity_gradient(acts.root(s1), acts.root(s2), hp.similarity, -inv, root_grads[s1],
                              root_grads[s2]);
      add_similarity_gradient(acts.root(anchor), acts.root(t), hp.similarity, inv,
                              root_grads[anchor], root_grads[t]);
      active[s1] = active[s2] = active[t] = 1;
    }
  }

  if (sink) {
    for (std::size_t slot = 0; slot < 2 * n_pairs; ++slot) {
      if (!active[slot]) continue;
      const auto& pair = batch.pairs[slot / 2];
      backprop_tree(slot % 2 == 0 ? pair.first : pair.second, acts.nodes[slot], root_grads[slot],
                    params, words, *sink);
    }
  }
  return loss * inv;
}

void add_regularizer_gradients(const CompositionParams* params, const EmbeddingSet& words,
                               const EmbeddingSet& initial, const Hyperparameters& hp,
                               GradientSink& sink) {
  if (params && hp.lambda_comp > 0.0) {
    if (sink.W) *sink.W += 2.0 * hp.lambda_comp * params->W;
    if (sink.b) *sink.b += 2.0 * hp.lambda_comp * params->b;
  }
  if (hp.lambda_words > 0.0 && sink.words) {
    sink.words->add_all(2.0 * hp.lambda_words * (words.matrix() - initial.matrix()));
  }
}

}  // namespace detail

namespace {

void check_shapes(const EmbeddingSet& words, const EmbeddingSet& initial) {
  if (words.size() != initial.size() || words.dim() != initial.dim()) {
    throw DataError("initial embeddings do not match the current embeddings' shape");
  }
}

void check_params(const CompositionParams& params, const EmbeddingSet& words) {
  params.validate();
  if (params.dim() != words.dim()) {
    throw DataError("composition dimension " + std::to_string(params.dim()) +
                    " does not match embedding dimension " + std::to_string(words.dim()));
  }
}

double word_regularizer(const EmbeddingSet& words, const EmbeddingSet& initial, double lambda) {
  if (lambda <= 0.0) return 0.0;
  return lambda * (initial.matrix() - words.matrix()).squaredNorm();
}

}  // namespace

LossBreakdown phrase_loss_breakdown(const MiniBatch& batch, const CompositionParams& params,
                                    const EmbeddingSet& words, const EmbeddingSet& initial,
                                    const Hyperparameters& hp) {
  check_shapes(words, initial);
  check_params(params, words);
  auto acts = detail::forward_batch(batch, &params, words);
  LossBreakdown out;
  out.data = detail::data_term(batch, acts, &params, words, hp, nullptr);
  out.regularization = hp.lambda_comp * (params.W.squaredNorm() + params.b.squaredNorm()) +
                       word_regularizer(words, initial, hp.lambda_words);
  return out;
}

double phrase_loss(const MiniBatch& batch, const CompositionParams& params, const EmbeddingSet& words,
                   const EmbeddingSet& initial, const Hyperparameters& hp) {
  return phrase_loss_breakdown(batch, params, words, initial, hp).total();
}

PhraseGradients phrase_gradients(const MiniBatch& batch, const CompositionParams& params,
                                 const EmbeddingSet& words, const EmbeddingSet& initial,
                                 const Hyperparameters& hp) {
  check_shapes(words, initial);
  check_params(params, words);
  PhraseGradients out;
  out.W = Eigen::MatrixXd::Zero(params.W.rows(), params.W.cols());
  out.b = Vector::Zero(params.b.size());
  detail::RowAccumulator rows;
  rows.reset(words.size(), words.dim());
  detail::GradientSink sink{&out.W, &out.b, &rows};
  auto acts = detail::forward_batch(batch, &params, words);
  detail::data_term(batch, acts, &params, words, hp, &sink);
  detail::add_regularizer_gradients(&params, words, initial, hp, sink);
  rows.finalize();
  out.words = std::move(rows.gradient());
  return out;
}

LossBreakdown word_loss_breakdown(const MiniBatch& batch, const EmbeddingSet& words,
                                  const EmbeddingSet& initial, const Hyperparameters& hp) {
  check_shapes(words, initial);
  auto acts = detail::forward_batch(batch, nullptr, words);
  LossBreakdown out;
  out.data = detail::data_term(batch, acts, nullptr, words, hp, nullptr);
  out.regularization = word_regularizer(words, initial, hp.lambda_words);
  return out;
}

double word_loss(const MiniBatch& batch, const EmbeddingSet& words, const EmbeddingSet& initial,
                 const Hyperparameters& hp) {
  return word_loss_breakdown(batch, words, initial, hp).total();
}

EmbeddingGradient word_gradients(const MiniBatch& batch, const EmbeddingSet& words,
                                 const EmbeddingSet& initial, const Hyperparameters& hp) {
  check_shapes(words, initial);
  detail::RowAccumulator rows;
  rows.reset(words.size(), words.dim());
  detail::GradientSink sink{nullptr, nullptr, &rows};
  auto acts = detail::forward_batch(batch, nullptr, words);
  detail::data_term(batch, acts, nullptr, words, hp, &sink);
  detail::add_regularizer_gradients(nullptr, words, initial, hp, sink);
  rows.finalize();
  return std::move(rows.gradient());
}

}  // namespace paragram
