#include "paragram/embeddings.hpp"

#include <istream>
#include <ostream>
#include <unordered_set>

#include "paragram/error.hpp"
#include "paragram/text.hpp"

namespace paragram {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw DataError("duplicate token '" + words_[i] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary load_vocabulary(std::istream& in) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  std::string line;
  while (read_line(in, line)) {
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (seen.insert(fields[0]).second) words.push_back(std::move(fields[0]));
  }
  return Vocabulary(std::move(words));
}

Vocabulary load_vocabulary_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_vocabulary(in);
}

namespace {

Vector mean_of_rows(const EmbeddingMatrix& m) {
  if (m.rows() == 0) return Vector::Zero(m.cols());
  return m.colwise().mean().transpose();
}

struct RawRow {
  std::string token;
  std::vector<double> values;
};

struct RawEmbeddings {
  std::vector<RawRow> rows;
  Eigen::Index dim = -1;
};

RawEmbeddings read_raw(std::istream& in) {
  RawEmbeddings raw;
  std::optional<long long> declared_count;
  std::string line;
  std::size_t line_no = 0;
  bool saw_content = false;
  while (read_line(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!saw_content && fields.size() == 2) {
      auto count = try_parse_integer(fields[0]);
      auto dim = try_parse_integer(fields[1]);
      if (count && dim && *count >= 0 && *dim > 0) {
        declared_count = *count;
        raw.dim = static_cast<Eigen::Index>(*dim);
        saw_content = true;
        continue;
      }
    }
    saw_content = true;
    if (fields.size() < 2) throw DataError(where + ": dimension mismatch (no values)");
    const auto dim = static_cast<Eigen::Index>(fields.size() - 1);
    if (raw.dim >= 0 && dim != raw.dim) {
      throw DataError(where + ": dimension mismatch (expected " + std::to_string(raw.dim) +
                      ", got " + std::to_string(dim) + ")");
    }
    raw.dim = dim;
    RawRow row;
    row.token = std::move(fields[0]);
    row.values.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) row.values.push_back(parse_real(fields[i], where));
    raw.rows.push_back(std::move(row));
  }
  if (!saw_content) throw DataError("empty input");
  if (declared_count && static_cast<std::size_t>(*declared_count) != raw.rows.size()) {
    throw DataError("header declares " + std::to_string(*declared_count) + " rows, found " +
                    std::to_string(raw.rows.size()));
  }
  return raw;
}

EmbeddingSet build(std::vector<std::string> words, const std::vector<const RawRow*>& rows,
                   Eigen::Index dim) {
  EmbeddingMatrix m(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r]->values[c];
  }
  return EmbeddingSet(Vocabulary(std::move(words)), std::move(m));
}

}  // namespace

EmbeddingSet::EmbeddingSet(Vocabulary vocab, EmbeddingMatrix matrix)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != vocab_.size()) {
    throw DataError("embedding matrix has " + std::to_string(matrix_.rows()) + " rows for " +
                    std::to_string(vocab_.size()) + " tokens");
  }
  if (!matrix_.allFinite()) throw DataError("embedding matrix has non-finite entries");
  fallback_ = mean_of_rows(matrix_);
}

EmbeddingSet EmbeddingSet::empty(Eigen::Index dim) {
  return EmbeddingSet(Vocabulary(), EmbeddingMatrix(0, dim));
}

std::optional<std::size_t> EmbeddingSet::index_of(std::string_view token) const {
  return vocab_.find(token);
}

std::optional<std::size_t> EmbeddingSet::resolve(std::string_view token) const {
  if (auto i = vocab_.find(token)) return i;
  return vocab_.unk_index();
}

Vector EmbeddingSet::lookup(std::string_view token) const {
  if (auto i = resolve(token)) return matrix_.row(static_cast<Eigen::Index>(*i)).transpose();
  return fallback_;
}

EmbeddingSet EmbeddingSet::with_unknown_row() const {
  if (vocab_.unk_index()) return *this;
  std::vector<std::string> words = vocab_.words();
  words.emplace_back(kUnknownToken);
  EmbeddingMatrix m(matrix_.rows() + 1, matrix_.cols());
  m.topRows(matrix_.rows()) = matrix_;
  m.row(matrix_.rows()) = fallback_.transpose();
  return EmbeddingSet(Vocabulary(std::move(words)), std::move(m));
}

EmbeddingSet load_embeddings(std::istream& in) {
  RawEmbeddings raw = read_raw(in);
  std::vector<std::string> words;
  std::vector<const RawRow*> rows;
  words.reserve(raw.rows.size());
  for (const auto& r : raw.rows) {
    words.push_back(r.token);
    rows.push_back(&r);
  }
  return build(std::move(words), rows, raw.dim);
}

EmbeddingSet load_embeddings_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_embeddings(in);
}

void save_embeddings(const EmbeddingSet& set, std::ostream& out) {
  out << set.size() << ' ' << set.dim() << '\n';
  const auto& m = set.matrix();
  for (std::size_t r = 0; r < set.size(); ++r) {
    out << set.vocab().word(r);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << ' ' << format_real(m(static_cast<Eigen::Index>(r), c));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed");
}

void save_embeddings_file(const EmbeddingSet& set, const std::filesystem::path& path) {
  auto out = open_output(path);
  save_embeddings(set, out);
}

EmbeddingSet cap_vocabulary(const EmbeddingSet& set, std::span<const std::string> frequency_order,
                            std::size_t k) {
  if (k == 0) throw DataError("vocabulary cap must be positive");
  const auto unk = set.vocab().unk_index();
  std::vector<bool> ranked(set.size(), false);
  std::vector<std::size_t> kept;
  for (const auto& token : frequency_order) {
    auto i = set.index_of(token);
    if (!i || ranked[*i] || (unk && *i == *unk)) continue;
    ranked[*i] = true;
    if (kept.size() < k) kept.push_back(*i);
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!ranked[i] && !(unk && i == *unk)) {
      throw DataError("token '" + set.vocab().word(i) + "' missing from the frequency order");
    }
  }

  const auto& m = set.matrix();
  std::vector<bool> retained(set.size(), false);
  for (auto i : kept) retained[i] = true;
  Vector dropped_sum = Vector::Zero(set.dim());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (retained[i] || (unk && i == *unk)) continue;
    dropped_sum += m.row(static_cast<Eigen::Index>(i)).transpose();
    ++dropped;
  }

  EmbeddingMatrix out(static_cast<Eigen::Index>(kept.size() + 1), set.dim());
  std::vector<std::string> words;
  words.reserve(kept.size() + 1);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(kept[r]));
    words.push_back(set.vocab().word(kept[r]));
  }
  if (dropped > 0) {
    out.row(out.rows() - 1) = (dropped_sum / static_cast<double>(dropped)).transpose();
  } else {
    out.row(out.rows() - 1) = mean_of_rows(out.topRows(out.rows() - 1)).transpose();
  }
  words.emplace_back(kUnknownToken);
  return EmbeddingSet(Vocabulary(std::move(words)), std::move(out));
}

EmbeddingSet case_collapse(std::istream& in) {
  RawEmbeddings raw = read_raw(in);
  std::vector<std::string> words;
  std::vector<const RawRow*> rows;
  std::unordered_set<std::string> seen;
  for (const auto& r : raw.rows) {
    std::string lowered = to_lower_ascii(r.token);
    if (!seen.insert(lowered).second) continue;
    words.push_back(std::move(lowered));
    rows.push_back(&r);
  }
  return build(std::move(words), rows, raw.dim);
}

}  // namespace paragram
