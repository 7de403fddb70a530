#include <algorithm>
#include <cmath>
#include <istream>

#include "paragram/error.hpp"
#include "paragram/evaluation.hpp"
#include "paragram/parallel.hpp"
#include "paragram/text.hpp"

namespace paragram {

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kWord:
      return "word";
    case DatasetKind::kBigram:
      return "bigram";
    case DatasetKind::kPhrase:
      return "phrase";
  }
  return "?";
}

Tokens phrase_tokens(std::string_view text) {
  const auto start = text.find_first_not_of(" \t");
  if (start != std::string_view::npos && text[start] == '(') return parse_tree_text(text).leaves();
  return split_whitespace(text);
}

ScoredDataset load_scored_dataset(std::istream& in) {
  ScoredDataset ds;
  std::size_t longest = 0;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "dataset line " + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw DataError(where + ": expected `text1 TAB text2 TAB gold`, got " +
                      std::to_string(fields.size()) + " fields");
    }
    ScoredItem item{fields[0], fields[1], 0.0};
    try {
      item.gold = parse_real(fields[2], "gold");
      const auto a = phrase_tokens(item.text1);
      const auto b = phrase_tokens(item.text2);
      if (a.empty() || b.empty()) throw DataError("empty phrase");
      longest = std::max({longest, a.size(), b.size()});
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    ds.items.push_back(std::move(item));
  }
  if (ds.items.empty()) throw DataError("dataset is empty");
  ds.kind = longest == 1 ? DatasetKind::kWord : longest == 2 ? DatasetKind::kBigram : DatasetKind::kPhrase;
  return ds;
}

ScoredDataset load_scored_dataset_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return load_scored_dataset(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

ScoringModel parse_scoring_model(std::string_view name) {
  const std::string n = to_lower_ascii(name);
  if (n == "additive") return ScoringModel::kAdditive;
  if (n == "rnn") return ScoringModel::kRnn;
  if (n == "overlap_strict" || n == "overlap-strict") return ScoringModel::kOverlapStrict;
  if (n == "overlap_lemma" || n == "overlap-lemma") return ScoringModel::kOverlapLemma;
  throw UsageError("unknown model '" + std::string(name) +
                   "' (expected additive|rnn|overlap_strict|overlap_lemma)");
}

std::string_view to_string(ScoringModel model) {
  switch (model) {
    case ScoringModel::kAdditive:
      return "additive";
    case ScoringModel::kRnn:
      return "rnn";
    case ScoringModel::kOverlapStrict:
      return "overlap_strict";
    case ScoringModel::kOverlapLemma:
      return "overlap_lemma";
  }
  return "?";
}

void check_artifacts(ScoringModel model, const ScoringArtifacts& artifacts) {
  switch (model) {
    case ScoringModel::kAdditive:
      if (!artifacts.embeddings) throw UsageError("model additive needs embeddings");
      break;
    case ScoringModel::kRnn:
      if (!artifacts.embeddings || !artifacts.params) {
        throw UsageError("model rnn needs embeddings and composition parameters");
      }
      if (artifacts.params->dim() != artifacts.embeddings->dim()) {
        throw DataError("composition dimension does not match the embeddings");
      }
      break;
    case ScoringModel::kOverlapStrict:
      break;
    case ScoringModel::kOverlapLemma:
      if (!artifacts.lemmas) throw UsageError("model overlap_lemma needs a lemma map");
      break;
  }
}

double strict_overlap(std::span<const std::string> p1, std::span<const std::string> p2) {
  if (p1.empty() || p2.empty()) throw DataError("overlap of an empty phrase");
  const bool first_small = p1.size() <= p2.size();
  const auto small = first_small ? p1 : p2;
  const auto large = first_small ? p2 : p1;
  std::size_t hits = 0;
  for (const auto& t : small) {
    if (std::find(large.begin(), large.end(), t) != large.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(small.size());
}

double lemma_overlap(std::span<const std::string> p1, std::span<const std::string> p2,
                     const LemmaMap& lemmas) {
  auto lemmatize = [&](std::span<const std::string> p) {
    Tokens out;
    out.reserve(p.size());
    for (const auto& t : p) {
      const auto it = lemmas.find(t);
      out.push_back(it == lemmas.end() ? t : it->second);
    }
    return out;
  };
  return strict_overlap(lemmatize(p1), lemmatize(p2));
}

double predict_item(const ScoredItem& item, ScoringModel model, const ScoringArtifacts& artifacts) {
  switch (model) {
    case ScoringModel::kAdditive:
      return cosine_similarity(compose_additive(phrase_tokens(item.text1), *artifacts.embeddings),
                               compose_additive(phrase_tokens(item.text2), *artifacts.embeddings));
    case ScoringModel::kRnn:
      return cosine_similarity(compose_rnn(parse_phrase(item.text1), *artifacts.params, *artifacts.embeddings),
                               compose_rnn(parse_phrase(item.text2), *artifacts.params, *artifacts.embeddings));
    case ScoringModel::kOverlapStrict:
      return strict_overlap(phrase_tokens(item.text1), phrase_tokens(item.text2));
    case ScoringModel::kOverlapLemma:
      return lemma_overlap(phrase_tokens(item.text1), phrase_tokens(item.text2), *artifacts.lemmas);
  }
  return 0.0;
}

std::vector<double> predict(const ScoredDataset& ds, ScoringModel model,
                            const ScoringArtifacts& artifacts, unsigned threads) {
  check_artifacts(model, artifacts);
  std::vector<double> out(ds.items.size());
  parallel_for(out.size(), threads,
               [&](std::size_t i) { out[i] = predict_item(ds.items[i], model, artifacts); });
  return out;
}

CorrelationReport score_dataset(const ScoredDataset& ds, ScoringModel model,
                                const ScoringArtifacts& artifacts, unsigned threads) {
  CorrelationReport report;
  report.predictions = predict(ds, model, artifacts, threads);
  std::vector<double> gold;
  gold.reserve(ds.items.size());
  for (const auto& item : ds.items) gold.push_back(item.gold);
  report.rho = spearman_rho(report.predictions, gold);
  report.n = ds.items.size();
  return report;
}

}  // namespace paragram
