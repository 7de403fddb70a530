#ifndef PARAGRAM_PIPELINE_HPP_
#define PARAGRAM_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "paragram/embeddings.hpp"

namespace paragram {

using Tokens = std::vector<std::string>;
using Alignment = std::vector<std::pair<std::size_t, std::size_t>>;

// One candidate phrase pair. Tags hold coarse POS classes (J, N, V, ...);
// only the first character of each tag is consulted.
struct PhrasePairRecord {
  Tokens phrase1;
  Tokens phrase2;
  std::optional<double> score;
  std::optional<Tokens> tags1;
  std::optional<Tokens> tags2;
  std::optional<Alignment> alignment;

  // Throws DataError when tags do not cover the tokens or an alignment index
  // is out of range.
  void validate() const;
};

// TSV: phrase1, phrase2 [, score] [, tags1, tags2, alignment]. The score
// field may be empty when tags follow. Alignments are `i-j` pairs.
std::vector<PhrasePairRecord> read_records(std::istream& in);
std::vector<PhrasePairRecord> read_records_file(const std::filesystem::path& path);
void write_records(std::span<const PhrasePairRecord> records, std::ostream& out);
void write_records_file(std::span<const PhrasePairRecord> records, const std::filesystem::path& path);

// Unit-cost edit distance over UTF-8 code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Share of the shorter phrase's tokens (p1 on equal lengths) within edit
// distance 1 of any token in the other phrase, after ASCII lowercasing.
double word_overlap_score(std::span<const std::string> p1, std::span<const std::string> p2);

// Larger of the two counts of tokens longer than one character.
std::size_t effective_size(std::span<const std::string> p1, std::span<const std::string> p2);

// Drops records whose unordered phrase pair was already seen.
std::vector<PhrasePairRecord> dedup_pairs(std::span<const PhrasePairRecord> records);

// Effective-size class [min, max]; no max means unbounded.
struct SizeBin {
  std::size_t min = 0;
  std::optional<std::size_t> max;

  bool contains(std::size_t size) const noexcept;
  std::string label() const;
};

std::vector<SizeBin> default_size_bins();  // {3}, {4}, {>=5}

struct FilterConfig {
  double max_overlap = 0.5;
  std::optional<Vocabulary> vocab;  // no vocabulary stage when unset
  bool drop_near_identical = false;
  std::vector<SizeBin> size_bins = default_size_bins();
  std::size_t per_bin = 500;

  // Throws UsageError on an out-of-range overlap, per_bin == 0 or
  // overlapping bins.
  void validate() const;
};

struct FilterCounts {
  std::size_t input = 0;
  std::size_t vocabulary = 0;
  std::size_t digits = 0;
  std::size_t brackets = 0;
  std::size_t duplicates = 0;
  std::size_t overlap = 0;
  std::size_t near_identical = 0;

  std::size_t dropped() const noexcept;
};

struct FilterResult {
  std::vector<PhrasePairRecord> kept;
  FilterCounts counts;
};

bool is_bracket_token(std::string_view token);

FilterResult filter_pairs(std::span<const PhrasePairRecord> records, const FilterConfig& cfg);

// Draws cfg.per_bin records per size bin with every phrase unique across the
// output. Records keep their input order within a bin. Throws DataError on
// an underfull bin.
std::vector<PhrasePairRecord> bin_and_sample(std::span<const PhrasePairRecord> records,
                                             const FilterConfig& cfg, std::uint64_t seed);

// Uniform sample of `per_chunk` records from each consecutive chunk.
std::vector<PhrasePairRecord> chunked_sample(std::span<const PhrasePairRecord> records,
                                             std::size_t chunk_size, std::size_t per_chunk,
                                             std::uint64_t seed);

enum class BigramKind { kAdjNoun, kNounNoun, kVerbNoun };

BigramKind parse_bigram_kind(std::string_view name);  // JN | NN | VN
std::string_view to_string(BigramKind kind);

// Bigram pairs from tagged, aligned records. Drops pairs with OOV tokens
// (when `vocab` is given), bracket tokens, repeats, and whole-phrase edit
// distance <= 1. Throws DataError on a record without tags or alignment.
std::vector<PhrasePairRecord> extract_bigram_pairs(std::span<const PhrasePairRecord> records,
                                                   BigramKind kind,
                                                   const Vocabulary* vocab = nullptr);

// Mean absolute deviation from the mean.
double mean_deviation(std::span<const double> values);

}  // namespace paragram

#endif  // PARAGRAM_PIPELINE_HPP_
