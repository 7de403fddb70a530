#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>

#include "paragram/error.hpp"
#include "paragram/evaluation.hpp"
#include "paragram/text.hpp"

namespace paragram {

double map_to_rating_scale(double cos) {
  constexpr double kSlack = 1e-9;
  if (!(cos >= -1.0 - kSlack && cos <= 1.0 + kSlack)) {
    throw DataError("cosine " + format_real(cos) + " outside [-1, 1]");
  }
  return 2.0 * std::clamp(cos, -1.0, 1.0) + 3.0;
}

std::vector<double> rescale_min_max(std::span<const double> values, double lo, double hi) {
  if (values.empty()) throw DataError("rescaling an empty list");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mn == *mx) throw DataError("cannot rescale a constant list");
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(lo + (hi - lo) * (v - *mn) / (*mx - *mn));
  return out;
}

double length_ratio(std::span<const std::string> p1, std::span<const std::string> p2) {
  if (p1.empty() || p2.empty()) throw DataError("length ratio of an empty phrase");
  const double a = static_cast<double>(p1.size());
  const double b = static_cast<double>(p2.size());
  return std::min(a, b) / std::max(a, b);
}

namespace {

std::string pair_key(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::string key(a);
  key += '\t';
  key += b;
  return key;
}

}  // namespace

void WordPairResource::add(std::string_view a, std::string_view b) { pairs_.insert(pair_key(a, b)); }

bool WordPairResource::paired(std::string_view a, std::string_view b) const {
  return pairs_.contains(pair_key(a, b));
}

WordPairResource load_word_pairs(std::istream& in) {
  WordPairResource out;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      throw DataError("word pairs line " + std::to_string(line_no) + ": expected `word1 TAB word2`");
    }
    out.add(fields[0], fields[1]);
  }
  return out;
}

WordPairResource load_word_pairs_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_word_pairs(in);
}

double overlap_ratio(std::span<const std::string> p1, std::span<const std::string> p2,
                     const WordPairResource& resource) {
  if (p1.empty() || p2.empty()) throw DataError("overlap ratio of an empty phrase");
  const auto small = p1.size() <= p2.size() ? p1 : p2;
  const auto large = p1.size() <= p2.size() ? p2 : p1;
  auto equivalent = [&](const std::string& a, const std::string& b) {
    return a == b || resource.paired(a, b);
  };
  // Augmenting-path bipartite matching; phrases are short.
  std::vector<std::ptrdiff_t> owner(large.size(), -1);
  std::function<bool(std::size_t, std::vector<char>&)> augment = [&](std::size_t i,
                                                                    std::vector<char>& seen) {
    for (std::size_t j = 0; j < large.size(); ++j) {
      if (seen[j] || !equivalent(small[i], large[j])) continue;
      seen[j] = 1;
      if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]), seen)) {
        owner[j] = static_cast<std::ptrdiff_t>(i);
        return true;
      }
    }
    return false;
  };
  std::size_t matched = 0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    std::vector<char> seen(large.size(), 0);
    if (augment(i, seen)) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(small.size());
}

ErrorBinning parse_error_binning(std::string_view name) {
  const std::string n = to_lower_ascii(name);
  if (n == "gold") return ErrorBinning::kGold;
  if (n == "length" || n == "length_ratio") return ErrorBinning::kLengthRatio;
  if (n == "overlap" || n == "overlap_ratio") return ErrorBinning::kOverlapRatio;
  throw UsageError("unknown binning '" + std::string(name) + "' (expected gold|length|overlap)");
}

std::string_view to_string(ErrorBinning binning) {
  switch (binning) {
    case ErrorBinning::kGold:
      return "gold";
    case ErrorBinning::kLengthRatio:
      return "length";
    case ErrorBinning::kOverlapRatio:
      return "overlap";
  }
  return "?";
}

namespace {

void check_lengths(std::size_t n, std::initializer_list<std::size_t> others) {
  for (auto m : others) {
    if (m != n) throw DataError("error analysis inputs have different lengths");
  }
}

struct Accumulator {
  std::size_t count = 0;
  double sum_a = 0.0;
  double sum_b = 0.0;

  void add(double gold, double a, double b) {
    ++count;
    sum_a += std::abs(a - gold);
    sum_b += std::abs(b - gold);
  }

  ErrorRow row(std::string bin, std::string subset) const {
    ErrorRow r{std::move(bin), std::move(subset), count, std::nullopt, std::nullopt, std::nullopt};
    if (count == 0) return r;
    r.error_a = sum_a / static_cast<double>(count);
    r.error_b = sum_b / static_cast<double>(count);
    if (*r.error_a != 0.0) r.percent_change = 100.0 * (*r.error_b - *r.error_a) / *r.error_a;
    return r;
  }
};

struct RatioBin {
  std::string label;
  double lo;  // exclusive unless first
  double hi;  // inclusive
};

std::vector<RatioBin> ratio_bins(ErrorBinning binning) {
  if (binning == ErrorBinning::kLengthRatio) {
    return {{"[0,0.6]", 0.0, 0.6}, {"(0.6,0.8]", 0.6, 0.8}, {"(0.8,1]", 0.8, 1.0}};
  }
  return {{"[0,1/3]", 0.0, 1.0 / 3.0}, {"(1/3,2/3]", 1.0 / 3.0, 2.0 / 3.0}, {"(2/3,1]", 2.0 / 3.0, 1.0}};
}

}  // namespace

ErrorTable error_by_gold(std::span<const double> gold, std::span<const double> pred_a,
                         std::span<const double> pred_b) {
  check_lengths(gold.size(), {pred_a.size(), pred_b.size()});
  std::vector<Accumulator> acc(4);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const double g = gold[i];
    if (!(g >= 1.0 && g <= 5.0)) continue;
    const auto bin = std::min<std::size_t>(3, static_cast<std::size_t>(std::floor(g - 1.0)));
    acc[bin].add(g, pred_a[i], pred_b[i]);
  }
  ErrorTable table;
  table.binning = ErrorBinning::kGold;
  const char* labels[] = {"[1,2)", "[2,3)", "[3,4)", "[4,5]"};
  for (std::size_t b = 0; b < 4; ++b) table.rows.push_back(acc[b].row(labels[b], "all"));
  return table;
}

ErrorTable error_change_by_feature(std::span<const double> gold, std::span<const double> pred_a,
                                   std::span<const double> pred_b, std::span<const double> feature,
                                   ErrorBinning binning) {
  if (binning == ErrorBinning::kGold) throw UsageError("feature binning needs length or overlap");
  check_lengths(gold.size(), {pred_a.size(), pred_b.size(), feature.size()});
  const auto bins = ratio_bins(binning);
  ErrorTable table;
  table.binning = binning;
  const std::pair<const char*, std::function<bool(double)>> subsets[] = {
      {"positive", [](double g) { return g > 4.0; }},
      {"negative", [](double g) { return g < 2.0; }},
      {"both", [](double g) { return g > 4.0 || g < 2.0; }},
  };
  for (const auto& [name, keep] : subsets) {
    std::vector<Accumulator> acc(bins.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!keep(gold[i])) continue;
      const double f = feature[i];
      for (std::size_t b = 0; b < bins.size(); ++b) {
        const bool above = b == 0 ? f >= bins[b].lo : f > bins[b].lo;
        if (above && f <= bins[b].hi) {
          acc[b].add(gold[i], pred_a[i], pred_b[i]);
          break;
        }
      }
    }
    for (std::size_t b = 0; b < bins.size(); ++b) table.rows.push_back(acc[b].row(bins[b].label, name));
  }
  return table;
}

namespace {

std::string cell(const std::optional<double>& v, const char* absent) {
  return v ? format_real(*v) : std::string(absent);
}

}  // namespace

void write_error_table(const ErrorTable& table, std::ostream& out) {
  out << "bin\tsubset\tcount\terror_a\terror_b\tpercent_change\n";
  for (const auto& r : table.rows) {
    out << r.bin << '\t' << r.subset << '\t' << r.count << '\t' << cell(r.error_a, "") << '\t'
        << cell(r.error_b, "") << '\t' << cell(r.percent_change, "") << '\n';
  }
}

void write_error_table_gnuplot(const ErrorTable& table, std::ostream& out) {
  out << "# binning=" << to_string(table.binning) << "\n# index bin subset count error_a error_b percent_change\n";
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& r = table.rows[k];
    out << k << ' ' << '"' << r.bin << '"' << ' ' << r.subset << ' ' << r.count << ' '
        << cell(r.error_a, "?") << ' ' << cell(r.error_b, "?") << ' ' << cell(r.percent_change, "?") << '\n';
  }
}

}  // namespace paragram
