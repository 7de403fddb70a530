#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "paragram/composition.hpp"
#include "paragram/embeddings.hpp"
#include "paragram/evaluation.hpp"
#include "paragram/pipeline.hpp"
#include "paragram/random.hpp"
#include "paragram/training.hpp"

namespace {

using namespace paragram;

std::vector<std::string> vocabulary(std::size_t n) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  return words;
}

EmbeddingSet random_embeddings(std::size_t n, Eigen::Index dim, Rng& rng) {
  EmbeddingMatrix m(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.5 * standard_normal(rng);
  return EmbeddingSet(Vocabulary(vocabulary(n)), std::move(m));
}

std::string random_phrase(std::size_t len, std::size_t vocab, Rng& rng) {
  std::string s;
  for (std::size_t k = 0; k < len; ++k) {
    if (k) s += ' ';
    s += "w" + std::to_string(uniform_index(rng, vocab));
  }
  return s;
}

MiniBatch random_batch(std::size_t size, std::size_t len, std::size_t vocab, Rng& rng) {
  MiniBatch batch;
  while (batch.pairs.size() < size) {
    const std::string a = random_phrase(len, vocab, rng);
    const std::string b = random_phrase(len, vocab, rng);
    if (a != b) batch.pairs.push_back(paragram::make_pair(a, b));
  }
  return batch;
}

void BM_ComposeRnn(benchmark::State& state) {
  const auto dim = static_cast<Eigen::Index>(state.range(0));
  const auto len = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  const EmbeddingSet words = random_embeddings(100, dim, rng);
  const CompositionParams params = CompositionParams::averaging(dim);
  const ParseTree tree = parse_phrase(random_phrase(len, 100, rng));
  for (auto _ : state) benchmark::DoNotOptimize(compose_rnn(tree, params, words));
}
BENCHMARK(BM_ComposeRnn)->Args({25, 2})->Args({25, 5})->Args({300, 2})->Args({300, 5});

void BM_SelectNegativesMax(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const EmbeddingSet words = random_embeddings(1000, 25, rng);
  const MiniBatch batch = random_batch(size, 1, 1000, rng);
  std::vector<Vector> vectors;
  for (const auto& p : batch.pairs) {
    vectors.push_back(words.lookup(p.first.surface()));
    vectors.push_back(words.lookup(p.second.surface()));
  }
  Hyperparameters hp = word_defaults();
  for (auto _ : state) benchmark::DoNotOptimize(select_negatives(batch, vectors, hp, nullptr, rng, true));
}
BENCHMARK(BM_SelectNegativesMax)->Arg(25)->Arg(100)->Arg(250);

void BM_WordGradients(benchmark::State& state) {
  Rng rng(3);
  const EmbeddingSet words = random_embeddings(1000, 25, rng);
  MiniBatch batch = random_batch(static_cast<std::size_t>(state.range(0)), 1, 1000, rng);
  Hyperparameters hp = word_defaults();
  hp.lambda_words = 1e-4;
  auto encode = [&](const ParseTree& t) { return words.lookup(t.surface()); };
  batch = select_negatives(std::move(batch), encode, hp, nullptr, rng);
  for (auto _ : state) benchmark::DoNotOptimize(word_gradients(batch, words, words, hp));
}
BENCHMARK(BM_WordGradients)->Arg(50)->Arg(100);

void BM_PhraseGradients(benchmark::State& state) {
  Rng rng(4);
  const EmbeddingSet words = random_embeddings(500, 25, rng);
  const CompositionParams params = CompositionParams::averaging(25);
  MiniBatch batch = random_batch(static_cast<std::size_t>(state.range(0)), 3, 500, rng);
  Hyperparameters hp = phrase_defaults();
  hp.lambda_comp = 1e-3;
  auto encode = [&](const ParseTree& t) { return compose_rnn(t, params, words); };
  batch = select_negatives(std::move(batch), encode, hp, nullptr, rng);
  for (auto _ : state) benchmark::DoNotOptimize(phrase_gradients(batch, params, words, words, hp));
}
BENCHMARK(BM_PhraseGradients)->Arg(25)->Arg(100);

void BM_Levenshtein(benchmark::State& state) {
  Rng rng(5);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 256; ++i) {
    std::string a, b;
    for (int k = 0; k < state.range(0); ++k) {
      a += static_cast<char>('a' + uniform_index(rng, 26));
      b += static_cast<char>('a' + uniform_index(rng, 26));
    }
    pairs.emplace_back(std::move(a), std::move(b));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(levenshtein(a, b));
  }
}
BENCHMARK(BM_Levenshtein)->Arg(8)->Arg(32);

void BM_Spearman(benchmark::State& state) {
  Rng rng(6);
  std::vector<double> x, y;
  for (int i = 0; i < state.range(0); ++i) {
    x.push_back(static_cast<double>(uniform_index(rng, 50)));
    y.push_back(standard_normal(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(spearman_rho(x, y));
}
BENCHMARK(BM_Spearman)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
