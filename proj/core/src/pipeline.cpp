#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "paragram/error.hpp"
#include "paragram/pipeline.hpp"
#include "paragram/random.hpp"
#include "paragram/text.hpp"

namespace paragram {

void PhrasePairRecord::validate() const {
  if (phrase1.empty() || phrase2.empty()) throw DataError("record has an empty phrase");
  if (tags1.has_value() != tags2.has_value()) throw DataError("record has tags on one side only");
  if (tags1 && (tags1->size() != phrase1.size() || tags2->size() != phrase2.size())) {
    throw DataError("tags do not cover every token");
  }
  if (alignment) {
    for (auto [i, j] : *alignment) {
      if (i >= phrase1.size() || j >= phrase2.size()) {
        throw DataError("alignment " + std::to_string(i) + "-" + std::to_string(j) + " out of range");
      }
    }
  }
}

namespace {

Alignment parse_alignment(std::string_view field) {
  Alignment out;
  for (const auto& link : split_whitespace(field)) {
    const auto dash = link.find('-');
    if (dash == std::string::npos) throw DataError("alignment link '" + link + "' is not i-j");
    const auto i = parse_integer(std::string_view(link).substr(0, dash), "alignment");
    const auto j = parse_integer(std::string_view(link).substr(dash + 1), "alignment");
    if (i < 0 || j < 0) throw DataError("negative alignment index in '" + link + "'");
    out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return out;
}

std::string phrase_key(const Tokens& tokens) { return join(tokens); }

}  // namespace

std::vector<PhrasePairRecord> read_records(std::istream& in) {
  std::vector<PhrasePairRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "records line " + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() != 2 && fields.size() != 3 && fields.size() != 5 && fields.size() != 6) {
      throw DataError(where + ": expected 2, 3, 5 or 6 fields, got " + std::to_string(fields.size()));
    }
    try {
      PhrasePairRecord r;
      r.phrase1 = split_whitespace(fields[0]);
      r.phrase2 = split_whitespace(fields[1]);
      const bool has_score = fields.size() == 3 || fields.size() == 6;
      if (has_score && fields[2].find_first_not_of(" \t") != std::string::npos) {
        r.score = parse_real(fields[2], "score");
      }
      if (fields.size() >= 5) {
        const std::size_t t = has_score ? 3 : 2;
        r.tags1 = split_whitespace(fields[t]);
        r.tags2 = split_whitespace(fields[t + 1]);
        r.alignment = parse_alignment(fields[t + 2]);
      }
      r.validate();
      out.push_back(std::move(r));
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<PhrasePairRecord> read_records_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_records(in);
}

void write_records(std::span<const PhrasePairRecord> records, std::ostream& out) {
  for (const auto& r : records) {
    out << join(r.phrase1) << '\t' << join(r.phrase2);
    const bool tagged = r.tags1 && r.tags2 && r.alignment;
    if (r.score || tagged) out << '\t' << (r.score ? format_real(*r.score) : "");
    if (tagged) {
      out << '\t' << join(*r.tags1) << '\t' << join(*r.tags2) << '\t';
      for (std::size_t k = 0; k < r.alignment->size(); ++k) {
        if (k) out << ' ';
        out << (*r.alignment)[k].first << '-' << (*r.alignment)[k].second;
      }
    }
    out << '\n';
  }
}

void write_records_file(std::span<const PhrasePairRecord> records, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_records(records, out);
  out.flush();
  if (!out) throw DataError("cannot write " + path.string());
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::u32string s = decode_utf8(a);
  const std::u32string t = decode_utf8(b);
  if (s.empty()) return t.size();
  if (t.empty()) return s.size();
  std::vector<std::size_t> prev(t.size() + 1);
  std::vector<std::size_t> cur(t.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= s.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[t.size()];
}

double word_overlap_score(std::span<const std::string> p1, std::span<const std::string> p2) {
  if (p1.empty() || p2.empty()) throw DataError("word overlap of an empty phrase");
  const bool first_small = p1.size() <= p2.size();
  const auto small = first_small ? p1 : p2;
  const auto large = first_small ? p2 : p1;
  std::vector<std::u32string> large_chars;
  large_chars.reserve(large.size());
  for (const auto& u : large) large_chars.push_back(decode_utf8(to_lower_ascii(u)));
  std::size_t matched = 0;
  for (const auto& t : small) {
    const std::string lowered = to_lower_ascii(t);
    const std::size_t len = decode_utf8(lowered).size();
    for (std::size_t k = 0; k < large.size(); ++k) {
      const std::size_t other = large_chars[k].size();
      if ((len > other ? len - other : other - len) > 1) continue;
      if (levenshtein(lowered, to_lower_ascii(large[k])) <= 1) {
        ++matched;
        break;
      }
    }
  }
  return static_cast<double>(matched) / static_cast<double>(small.size());
}

std::size_t effective_size(std::span<const std::string> p1, std::span<const std::string> p2) {
  auto count = [](std::span<const std::string> p) {
    return static_cast<std::size_t>(
        std::count_if(p.begin(), p.end(), [](const std::string& t) { return decode_utf8(t).size() > 1; }));
  };
  return std::max(count(p1), count(p2));
}

std::vector<PhrasePairRecord> dedup_pairs(std::span<const PhrasePairRecord> records) {
  std::unordered_set<std::string> seen;
  std::vector<PhrasePairRecord> out;
  for (const auto& r : records) {
    std::string a = phrase_key(r.phrase1);
    std::string b = phrase_key(r.phrase2);
    if (b < a) std::swap(a, b);
    if (seen.insert(a + '\t' + b).second) out.push_back(r);
  }
  return out;
}

bool SizeBin::contains(std::size_t size) const noexcept {
  return size >= min && (!max || size <= *max);
}

std::string SizeBin::label() const {
  if (!max) return ">=" + std::to_string(min);
  if (*max == min) return std::to_string(min);
  return std::to_string(min) + "-" + std::to_string(*max);
}

std::vector<SizeBin> default_size_bins() { return {{3, 3}, {4, 4}, {5, std::nullopt}}; }

void FilterConfig::validate() const {
  if (!(max_overlap >= 0.0 && max_overlap <= 1.0)) throw UsageError("max-overlap must lie in [0, 1]");
  if (per_bin == 0) throw UsageError("per-bin must be positive");
  for (std::size_t a = 0; a < size_bins.size(); ++a) {
    const auto& x = size_bins[a];
    if (x.max && *x.max < x.min) throw UsageError("size bin " + x.label() + " is empty");
    for (std::size_t b = a + 1; b < size_bins.size(); ++b) {
      const auto& y = size_bins[b];
      const bool disjoint = (x.max && *x.max < y.min) || (y.max && *y.max < x.min);
      if (!disjoint) throw UsageError("size bins " + x.label() + " and " + y.label() + " overlap");
    }
  }
}

std::size_t FilterCounts::dropped() const noexcept {
  return vocabulary + digits + brackets + duplicates + overlap + near_identical;
}

bool is_bracket_token(std::string_view token) {
  const std::string t = to_lower_ascii(token);
  return t == "(" || t == ")" || t == "[" || t == "]" || t == "-lrb-" || t == "-rrb-";
}

namespace {

template <typename Pred>
bool any_token(const PhrasePairRecord& r, Pred pred) {
  return std::any_of(r.phrase1.begin(), r.phrase1.end(), pred) ||
         std::any_of(r.phrase2.begin(), r.phrase2.end(), pred);
}

bool has_digit(const std::string& t) {
  return std::any_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool near_identical(const PhrasePairRecord& r) {
  return levenshtein(phrase_key(r.phrase1), phrase_key(r.phrase2)) <= 1;
}

}  // namespace

FilterResult filter_pairs(std::span<const PhrasePairRecord> records, const FilterConfig& cfg) {
  cfg.validate();
  FilterResult result;
  result.counts.input = records.size();

  std::vector<PhrasePairRecord> stage;
  for (const auto& r : records) {
    if (cfg.vocab && any_token(r, [&](const std::string& t) { return !cfg.vocab->contains(t); })) {
      ++result.counts.vocabulary;
    } else if (any_token(r, has_digit)) {
      ++result.counts.digits;
    } else if (any_token(r, [](const std::string& t) { return is_bracket_token(t); })) {
      ++result.counts.brackets;
    } else {
      stage.push_back(r);
    }
  }
  auto unique = dedup_pairs(stage);
  result.counts.duplicates = stage.size() - unique.size();
  for (auto& r : unique) {
    if (word_overlap_score(r.phrase1, r.phrase2) >= cfg.max_overlap) {
      ++result.counts.overlap;
    } else if (cfg.drop_near_identical && near_identical(r)) {
      ++result.counts.near_identical;
    } else {
      result.kept.push_back(std::move(r));
    }
  }
  return result;
}

std::vector<PhrasePairRecord> bin_and_sample(std::span<const PhrasePairRecord> records,
                                             const FilterConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<std::vector<std::size_t>> members(cfg.size_bins.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t size = effective_size(records[i].phrase1, records[i].phrase2);
    for (std::size_t b = 0; b < cfg.size_bins.size(); ++b) {
      if (cfg.size_bins[b].contains(size)) {
        members[b].push_back(i);
        break;
      }
    }
  }

  Rng rng(seed);
  std::unordered_set<std::string> used;
  std::vector<PhrasePairRecord> out;
  for (std::size_t b = 0; b < members.size(); ++b) {
    auto& pool = members[b];
    if (pool.size() < cfg.per_bin) {
      throw DataError("underfull bin " + cfg.size_bins[b].label() + ": " + std::to_string(pool.size()) +
                      " records for " + std::to_string(cfg.per_bin) + " requested");
    }
    shuffle(std::span<std::size_t>(pool), rng);
    std::vector<std::size_t> chosen;
    for (std::size_t i : pool) {
      if (chosen.size() == cfg.per_bin) break;
      const std::string a = phrase_key(records[i].phrase1);
      const std::string b2 = phrase_key(records[i].phrase2);
      if (a == b2 || used.contains(a) || used.contains(b2)) continue;
      used.insert(a);
      used.insert(b2);
      chosen.push_back(i);
    }
    if (chosen.size() < cfg.per_bin) {
      throw DataError("underfull bin " + cfg.size_bins[b].label() + ": only " +
                      std::to_string(chosen.size()) + " records with unique phrases for " +
                      std::to_string(cfg.per_bin) + " requested");
    }
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i : chosen) out.push_back(records[i]);
  }
  return out;
}

std::vector<PhrasePairRecord> chunked_sample(std::span<const PhrasePairRecord> records,
                                             std::size_t chunk_size, std::size_t per_chunk,
                                             std::uint64_t seed) {
  if (chunk_size == 0) throw UsageError("chunk size must be positive");
  Rng rng(seed);
  std::vector<PhrasePairRecord> out;
  for (std::size_t begin = 0; begin < records.size(); begin += chunk_size) {
    const std::size_t end = std::min(records.size(), begin + chunk_size);
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    shuffle(std::span<std::size_t>(idx), rng);
    idx.resize(std::min(per_chunk, idx.size()));
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) out.push_back(records[i]);
  }
  return out;
}

double mean_deviation(std::span<const double> values) {
  if (values.empty()) throw DataError("mean deviation of an empty list");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double total = 0.0;
  for (double v : values) total += std::abs(v - mean);
  return total / n;
}

}  // namespace paragram
