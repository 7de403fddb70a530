#include "paragram/error.hpp"
#include "paragram/training.hpp"

namespace paragram {

double similarity(const Vector& u, const Vector& v, Similarity kind) {
  if (kind == Similarity::kDot) return u.dot(v);
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < 1e-12 || nv < 1e-12) return 0.0;
  return u.dot(v) / (nu * nv);
}

namespace {

std::size_t argmax_slot(const std::vector<std::size_t>& candidates, const std::vector<double>& sims) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    if (sims[k] > sims[best]) best = k;
  }
  return candidates[best];
}

}  // namespace

std::vector<Negatives> select_negatives(const MiniBatch& batch, std::span<const Vector> vectors,
                                        const Hyperparameters& hp,
                                        const ConstraintIndex* constraints, Rng& rng,
                                        bool allow_missing) {
  const std::size_t n_pairs = batch.pairs.size();
  if (vectors.size() != 2 * n_pairs) {
    throw DataError("expected " + std::to_string(2 * n_pairs) + " phrase vectors, got " +
                    std::to_string(vectors.size()));
  }
  std::vector<std::string> surface(2 * n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    surface[2 * i] = batch.pairs[i].first.surface();
    surface[2 * i + 1] = batch.pairs[i].second.surface();
  }
  const int sides = hp.pool == NegativePool::kBoth ? 2 : 1;

  std::vector<Negatives> out(n_pairs);
  std::vector<std::size_t> candidates;
  std::vector<double> sims;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const double pair_sim = similarity(vectors[2 * i], vectors[2 * i + 1], hp.similarity);
    for (int side = 0; side < 2; ++side) {
      const std::size_t anchor = 2 * i + static_cast<std::size_t>(side);
      const std::size_t partner = 2 * i + static_cast<std::size_t>(1 - side);
      candidates.clear();
      sims.clear();
      for (std::size_t j = 0; j < n_pairs; ++j) {
        if (j == i) continue;
        for (int s = 0; s < sides; ++s) {
          const std::size_t c = 2 * j + static_cast<std::size_t>(s);
          if (surface[c] == surface[anchor] || surface[c] == surface[partner]) continue;
          if (constraints && constraints->forbids(surface[anchor], surface[c])) continue;
          candidates.push_back(c);
          sims.push_back(similarity(vectors[anchor], vectors[c], hp.similarity));
        }
      }
      std::optional<PhraseRef>& slot = side == 0 ? out[i].first : out[i].second;
      if (candidates.empty()) {
        if (allow_missing) continue;
        throw DataError("no negative candidate for pair " + std::to_string(i) + " of the batch");
      }

      Sampler sampler = hp.sampler;
      if (sampler == Sampler::kMix) sampler = coin_flip(rng) ? Sampler::kMax : Sampler::kRand;

      std::size_t chosen = 0;
      switch (sampler) {
        case Sampler::kMax:
        case Sampler::kMix:
          chosen = argmax_slot(candidates, sims);
          break;
        case Sampler::kRand:
          chosen = candidates[uniform_index(rng, candidates.size())];
          break;
        case Sampler::kLeast: {
          const double threshold = pair_sim - hp.delta;
          std::optional<std::size_t> best;
          for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (sims[k] > threshold && (!best || sims[k] < sims[*best])) best = k;
          }
          chosen = best ? candidates[*best] : argmax_slot(candidates, sims);
          break;
        }
      }
      slot = PhraseRef{chosen / 2, static_cast<int>(chosen % 2)};
    }
  }
  return out;
}

MiniBatch select_negatives(MiniBatch batch, const PhraseEncoder& encode, const Hyperparameters& hp,
                           const ConstraintIndex* constraints, Rng& rng) {
  if (batch.pairs.size() < 2) throw DataError("negative selection needs at least two pairs");
  std::vector<Vector> vectors;
  vectors.reserve(2 * batch.pairs.size());
  for (const auto& p : batch.pairs) {
    vectors.push_back(encode(p.first));
    vectors.push_back(encode(p.second));
  }
  batch.negatives = select_negatives(batch, vectors, hp, constraints, rng);
  return batch;
}

}  // namespace paragram
