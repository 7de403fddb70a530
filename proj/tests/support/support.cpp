#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace paragram::testing {
namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  const auto base = fs::temp_directory_path();
  for (;;) {
    auto candidate = base / ("paragram-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

EmbeddingSet make_set(const std::vector<std::string>& words, const std::vector<std::vector<double>>& rows) {
  const Eigen::Index dim = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  EmbeddingMatrix m(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return EmbeddingSet(Vocabulary(words), std::move(m));
}

EmbeddingSet random_set(const std::vector<std::string>& words, Eigen::Index dim, double scale, Rng& rng) {
  EmbeddingMatrix m(static_cast<Eigen::Index>(words.size()), dim);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = scale * standard_normal(rng);
  }
  return EmbeddingSet(Vocabulary(words), std::move(m));
}

std::vector<double> reference_ranks(std::span<const double> values) {
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t less = 0;
    std::size_t equal = 0;
    for (double v : values) {
      if (v < values[i]) ++less;
      if (v == values[i]) ++equal;
    }
    ranks[i] = static_cast<double>(less) + 0.5 * static_cast<double>(equal + 1);
  }
  return ranks;
}

double reference_spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = reference_ranks(x);
  const auto ry = reference_ranks(y);
  const long double n = static_cast<long double>(rx.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

std::size_t reference_levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  return d[a.size()][b.size()];
}

std::optional<std::size_t> reference_negative(const MiniBatch& batch, std::span<const Vector> vectors,
                                              std::size_t pair, int side, const Hyperparameters& hp,
                                              const ConstraintIndex* constraints, Pick pick) {
  const std::size_t anchor = 2 * pair + static_cast<std::size_t>(side);
  const std::size_t partner = 2 * pair + static_cast<std::size_t>(1 - side);
  auto surface = [&](std::size_t slot) {
    const auto& p = batch.pairs[slot / 2];
    return (slot % 2 == 0 ? p.first : p.second).surface();
  };
  const std::string anchor_text = surface(anchor);
  const std::string partner_text = surface(partner);

  struct Candidate {
    double sim;
    std::size_t slot;
  };
  std::vector<Candidate> all;
  for (std::size_t slot = 0; slot < vectors.size(); ++slot) {
    if (slot / 2 == pair) continue;
    if (hp.pool == NegativePool::kFirst && slot % 2 == 1) continue;
    const std::string text = surface(slot);
    if (text == anchor_text || text == partner_text) continue;
    if (constraints && constraints->forbids(anchor_text, text)) continue;
    all.push_back({similarity(vectors[anchor], vectors[slot], hp.similarity), slot});
  }
  if (all.empty()) return std::nullopt;
  auto by_max = [](const Candidate& a, const Candidate& b) {
    return a.sim < b.sim || (a.sim == b.sim && a.slot > b.slot);
  };
  const auto best = std::max_element(all.begin(), all.end(), by_max)->slot;
  if (pick == Pick::kMax) return best;

  const double threshold = similarity(vectors[2 * pair], vectors[2 * pair + 1], hp.similarity) - hp.delta;
  std::vector<Candidate> violating;
  for (const auto& c : all) {
    if (c.sim > threshold) violating.push_back(c);
  }
  if (violating.empty()) return best;
  auto by_min = [](const Candidate& a, const Candidate& b) {
    return a.sim < b.sim || (a.sim == b.sim && a.slot < b.slot);
  };
  return std::min_element(violating.begin(), violating.end(), by_min)->slot;
}

double GradientCheck::max_error() const { return std::max({error_words, error_W, error_b}); }

namespace {

ParseTree random_tree(const std::vector<std::string>& vocab, std::size_t leaves, Rng& rng) {
  if (leaves == 1) return ParseTree::leaf(vocab[uniform_index(rng, vocab.size())]);
  const std::size_t split = 1 + uniform_index(rng, leaves - 1);
  return ParseTree::join(random_tree(vocab, split, rng), random_tree(vocab, leaves - split, rng));
}

// Central differences carry ~1e-11 of rounding noise per coordinate, so the
// denominator is floored well above that.
double relative_error(const double* a, const double* f, std::size_t n) {
  double diff = 0.0, na = 0.0, nf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff += (a[i] - f[i]) * (a[i] - f[i]);
    na += a[i] * a[i];
    nf += f[i] * f[i];
  }
  const double scale = std::max({std::sqrt(na), std::sqrt(nf), 1e-6});
  return std::sqrt(diff) / scale;
}

}  // namespace

GradientCheck check_random_gradients(Rng& rng, TrainMode mode, Similarity sim, double step) {
  const bool phrases = mode == TrainMode::kPhrases;
  const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform_index(rng, 4));
  const std::size_t vocab_size = 4 + uniform_index(rng, 7);
  const std::size_t n_pairs = 2 + uniform_index(rng, 7);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < vocab_size; ++i) names.push_back("w" + std::to_string(i));

  const EmbeddingSet words = random_set(names, n, 0.6, rng);
  EmbeddingMatrix init_m = words.matrix();
  for (Eigen::Index i = 0; i < init_m.size(); ++i) init_m.data()[i] += 0.3 * standard_normal(rng);
  const EmbeddingSet initial(words.vocab(), init_m);

  Hyperparameters hp;
  hp.similarity = sim;
  hp.delta = 0.5 + uniform_unit(rng);
  hp.lambda_words = coin_flip(rng) ? 0.0 : 0.3 * uniform_unit(rng);
  hp.lambda_comp = phrases && coin_flip(rng) ? 0.3 * uniform_unit(rng) : 0.0;

  CompositionParams params = CompositionParams::zeros(n);
  for (Eigen::Index i = 0; i < params.W.size(); ++i) params.W.data()[i] = 0.4 * standard_normal(rng);
  for (Eigen::Index i = 0; i < n; ++i) params.b(i) = 0.2 * standard_normal(rng);

  MiniBatch batch;
  while (batch.pairs.size() < n_pairs) {
    TrainingPair p{random_tree(names, phrases ? 1 + uniform_index(rng, 3) : 1, rng),
                   random_tree(names, phrases ? 1 + uniform_index(rng, 3) : 1, rng)};
    if (p.first.surface() != p.second.surface()) batch.pairs.push_back(std::move(p));
  }

  auto encode = [&](const EmbeddingSet& set, const CompositionParams& par) {
    std::vector<Vector> v;
    for (const auto& p : batch.pairs) {
      v.push_back(phrases ? compose_rnn(p.first, par, set) : set.lookup(p.first.surface()));
      v.push_back(phrases ? compose_rnn(p.second, par, set) : set.lookup(p.second.surface()));
    }
    return v;
  };
  const auto vectors = encode(words, params);
  Hyperparameters pick = hp;
  pick.sampler = coin_flip(rng) ? Sampler::kMax : Sampler::kRand;
  batch.negatives = select_negatives(batch, vectors, pick, nullptr, rng, true);

  GradientCheck out;
  // Reject instances near a non-differentiable point.
  for (const auto& v : vectors) {
    if (sim == Similarity::kCosine && v.norm() < 1e-3) return out;
  }
  for (std::size_t i = 0; i < batch.pairs.size(); ++i) {
    const double base = similarity(vectors[2 * i], vectors[2 * i + 1], sim);
    for (int side = 0; side < 2; ++side) {
      const auto& neg = side == 0 ? batch.negatives[i].first : batch.negatives[i].second;
      if (!neg) continue;
      const double arg = hp.delta - base + similarity(vectors[2 * i + side], vectors[neg->slot()], sim);
      if (std::abs(arg) < 1e-3) return out;
    }
  }
  out.accepted = true;

  auto loss = [&](const EmbeddingMatrix& m, const CompositionParams& par) {
    const EmbeddingSet set(words.vocab(), m);
    return phrases ? phrase_loss(batch, par, set, initial, hp) : word_loss(batch, set, initial, hp);
  };

  EmbeddingMatrix analytic_words;
  Eigen::MatrixXd analytic_W;
  Vector analytic_b;
  if (phrases) {
    auto g = phrase_gradients(batch, params, words, initial, hp);
    analytic_words = g.words.values;
    analytic_W = g.W;
    analytic_b = g.b;
  } else {
    analytic_words = word_gradients(batch, words, initial, hp).values;
  }

  EmbeddingMatrix m = words.matrix();
  EmbeddingMatrix fd_words(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double keep = m.data()[i];
    m.data()[i] = keep + step;
    const double up = loss(m, params);
    m.data()[i] = keep - step;
    const double down = loss(m, params);
    m.data()[i] = keep;
    fd_words.data()[i] = (up - down) / (2.0 * step);
  }
  out.error_words = relative_error(analytic_words.data(), fd_words.data(), static_cast<std::size_t>(m.size()));

  if (phrases) {
    CompositionParams p = params;
    Eigen::MatrixXd fd_W(p.W.rows(), p.W.cols());
    for (Eigen::Index i = 0; i < p.W.size(); ++i) {
      const double keep = p.W.data()[i];
      p.W.data()[i] = keep + step;
      const double up = loss(m, p);
      p.W.data()[i] = keep - step;
      const double down = loss(m, p);
      p.W.data()[i] = keep;
      fd_W.data()[i] = (up - down) / (2.0 * step);
    }
    Vector fd_b(p.b.size());
    for (Eigen::Index i = 0; i < p.b.size(); ++i) {
      const double keep = p.b(i);
      p.b(i) = keep + step;
      const double up = loss(m, p);
      p.b(i) = keep - step;
      const double down = loss(m, p);
      p.b(i) = keep;
      fd_b(i) = (up - down) / (2.0 * step);
    }
    out.error_W = relative_error(analytic_W.data(), fd_W.data(), static_cast<std::size_t>(fd_W.size()));
    out.error_b = relative_error(analytic_b.data(), fd_b.data(), static_cast<std::size_t>(fd_b.size()));
  }
  return out;
}

ClusterData make_clusters(std::size_t clusters, std::size_t per_cluster, Eigen::Index dim,
                          double train_fraction, Rng& rng, const std::string& prefix) {
  ClusterData data;
  for (std::size_t c = 0; c < clusters; ++c) {
    for (std::size_t k = 0; k < per_cluster; ++k) {
      data.words.push_back(prefix + std::to_string(c) + "_" + std::to_string(k));
      data.cluster.push_back(c);
    }
  }
  data.init = random_set(data.words, dim, 0.3, rng);
  for (std::size_t c = 0; c < clusters; ++c) {
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t i = 0; i < per_cluster; ++i) {
      for (std::size_t j = i + 1; j < per_cluster; ++j) all.emplace_back(c * per_cluster + i, c * per_cluster + j);
    }
    shuffle(std::span(all), rng);
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(all.size())));
    data.train_pairs.insert(data.train_pairs.end(), all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    data.heldout_pairs.insert(data.heldout_pairs.end(), all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());
  }
  return data;
}

std::vector<TrainingPair> to_training_pairs(const ClusterData& data,
                                            std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<TrainingPair> out;
  for (auto [a, b] : pairs) out.push_back({ParseTree::leaf(data.words[a]), ParseTree::leaf(data.words[b])});
  return out;
}

double cluster_separation(const ClusterData& data, const EmbeddingSet& trained) {
  const std::size_t clusters = data.cluster.empty() ? 0 : data.cluster.back() + 1;
  auto cos = [&](std::size_t a, std::size_t b) {
    const Vector u = trained.lookup(data.words[a]);
    const Vector v = trained.lookup(data.words[b]);
    return similarity(u, v, Similarity::kCosine);
  };
  std::vector<double> within(clusters, 0.0);
  std::vector<std::size_t> within_n(clusters, 0);
  for (auto [a, b] : data.heldout_pairs) {
    within[data.cluster[a]] += cos(a, b);
    ++within_n[data.cluster[a]];
  }
  std::size_t wins = 0, total = 0;
  for (std::size_t A = 0; A < clusters; ++A) {
    const double w = within[A] / static_cast<double>(std::max<std::size_t>(1, within_n[A]));
    for (std::size_t B = 0; B < clusters; ++B) {
      if (A == B) continue;
      double cross = 0.0;
      std::size_t cross_n = 0;
      for (std::size_t a = 0; a < data.words.size(); ++a) {
        if (data.cluster[a] != A) continue;
        for (std::size_t b = 0; b < data.words.size(); ++b) {
          if (data.cluster[b] != B) continue;
          cross += cos(a, b);
          ++cross_n;
        }
      }
      ++total;
      if (within_n[A] > 0 && w > cross / static_cast<double>(cross_n)) ++wins;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(total);
}

PhraseTask make_phrase_task(Rng& rng) {
  constexpr std::size_t kClusters = 4;
  constexpr std::size_t kPerCluster = 6;
  constexpr Eigen::Index kDim = 10;
  PhraseTask task;
  task.adjectives = make_clusters(kClusters, kPerCluster, kDim, 0.6, rng, "adj");
  task.nouns = make_clusters(kClusters, kPerCluster, kDim, 0.6, rng, "noun");

  std::vector<std::string> names = task.adjectives.words;
  names.insert(names.end(), task.nouns.words.begin(), task.nouns.words.end());
  EmbeddingMatrix m(static_cast<Eigen::Index>(names.size()), kDim);
  m.topRows(task.adjectives.init.matrix().rows()) = task.adjectives.init.matrix();
  m.bottomRows(task.nouns.init.matrix().rows()) = task.nouns.init.matrix();
  task.words = EmbeddingSet(Vocabulary(names), std::move(m));

  task.word_pairs = to_training_pairs(task.adjectives, task.adjectives.train_pairs);
  auto noun_pairs = to_training_pairs(task.nouns, task.nouns.train_pairs);
  task.word_pairs.insert(task.word_pairs.end(), noun_pairs.begin(), noun_pairs.end());

  auto word_in = [&](const ClusterData& d, std::size_t cluster) {
    return d.words[cluster * kPerCluster + uniform_index(rng, kPerCluster)];
  };
  auto phrase = [](const std::string& adj, const std::string& noun) {
    return ParseTree::join(ParseTree::leaf(adj), ParseTree::leaf(noun));
  };
  auto other_cluster = [&](std::size_t c) { return (c + 1 + uniform_index(rng, kClusters - 1)) % kClusters; };

  std::vector<std::string> seen;
  while (task.train_pairs.size() < 300) {
    const std::size_t ca = uniform_index(rng, kClusters);
    const std::size_t cn = uniform_index(rng, kClusters);
    ParseTree a = phrase(word_in(task.adjectives, ca), word_in(task.nouns, cn));
    ParseTree b = phrase(word_in(task.adjectives, ca), word_in(task.nouns, cn));
    if (a.surface() == b.surface()) continue;
    seen.push_back(a.surface() + "|" + b.surface());
    seen.push_back(b.surface() + "|" + a.surface());
    task.train_pairs.push_back({std::move(a), std::move(b)});
  }

  const double golds[] = {5.0, 3.0, 1.0};
  while (task.heldout.size() < 300) {
    const double gold = golds[task.heldout.size() % 3];
    const std::size_t ca = uniform_index(rng, kClusters);
    const std::size_t cn = uniform_index(rng, kClusters);
    std::size_t ca2 = ca, cn2 = cn;
    if (gold == 3.0) {
      if (coin_flip(rng)) {
        ca2 = other_cluster(ca);
      } else {
        cn2 = other_cluster(cn);
      }
    } else if (gold == 1.0) {
      ca2 = other_cluster(ca);
      cn2 = other_cluster(cn);
    }
    ParseTree a = phrase(word_in(task.adjectives, ca), word_in(task.nouns, cn));
    ParseTree b = phrase(word_in(task.adjectives, ca2), word_in(task.nouns, cn2));
    const std::string key = a.surface() + "|" + b.surface();
    if (a.surface() == b.surface() || std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    task.heldout.push_back({std::move(a), std::move(b), gold});
  }
  return task;
}

}  // namespace paragram::testing
