#ifndef PARAGRAM_EMBEDDINGS_HPP_
#define PARAGRAM_EMBEDDINGS_HPP_

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace paragram {

using Vector = Eigen::VectorXd;
// One word per row so that a word vector is a contiguous block.
using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Token that names the unknown-word row in embedding files.
inline constexpr std::string_view kUnknownToken = "<unk>";

// Ordered list of unique tokens with a reverse index.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws DataError on a repeated token.
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  std::optional<std::size_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  // Position of kUnknownToken, when the vocabulary has one.
  std::optional<std::size_t> unk_index() const { return find(kUnknownToken); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reads one token per line (first whitespace-separated field); blank lines
// and repeated tokens are skipped.
Vocabulary load_vocabulary(std::istream& in);
Vocabulary load_vocabulary_file(const std::filesystem::path& path);

// Vocabulary plus a |V| x n matrix of word vectors.
//
// Out-of-vocabulary lookups return the `<unk>` row when the vocabulary has
// one, otherwise the mean of all rows (fixed at construction). The set is
// immutable apart from mutable_matrix(), which only the trainer uses and
// only on sets that carry an `<unk>` row.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  // Validates shape and finiteness; throws DataError.
  EmbeddingSet(Vocabulary vocab, EmbeddingMatrix matrix);

  static EmbeddingSet empty(Eigen::Index dim);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  const EmbeddingMatrix& matrix() const noexcept { return matrix_; }
  EmbeddingMatrix& mutable_matrix() noexcept { return matrix_; }
  Eigen::Index dim() const noexcept { return matrix_.cols(); }
  std::size_t size() const noexcept { return vocab_.size(); }

  std::optional<std::size_t> index_of(std::string_view token) const;
  // Row index used for `token`: its own row or the `<unk>` row.
  std::optional<std::size_t> resolve(std::string_view token) const;

  Vector lookup(std::string_view token) const;
  const Vector& fallback() const noexcept { return fallback_; }

  // Same set with a `<unk>` row appended (mean of all rows) if it lacks one.
  EmbeddingSet with_unknown_row() const;

 private:
  Vocabulary vocab_;
  EmbeddingMatrix matrix_;
  Vector fallback_;
};

// Text format: optional header `count dim`, then `token v1 ... vn` per line.
EmbeddingSet load_embeddings(std::istream& in);
EmbeddingSet load_embeddings_file(const std::filesystem::path& path);

// Writes the header and one line per word with round-trip exact decimals.
void save_embeddings(const EmbeddingSet& set, std::ostream& out);
void save_embeddings_file(const EmbeddingSet& set, const std::filesystem::path& path);

// Keeps the k most frequent tokens (by `frequency_order`) and appends an
// `<unk>` row holding the mean of every dropped row, or of the retained
// rows when nothing was dropped. An existing `<unk>` row is rebuilt.
EmbeddingSet cap_vocabulary(const EmbeddingSet& set, std::span<const std::string> frequency_order,
                            std::size_t k);

// Loads cased embeddings, lowercases tokens and keeps the first vector seen
// for each lowercased type.
EmbeddingSet case_collapse(std::istream& in);

}  // namespace paragram

#endif  // PARAGRAM_EMBEDDINGS_HPP_
