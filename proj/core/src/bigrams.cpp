#include <algorithm>
#include <cctype>

#include "paragram/error.hpp"
#include "paragram/pipeline.hpp"
#include "paragram/text.hpp"

namespace paragram {

BigramKind parse_bigram_kind(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "JN") return BigramKind::kAdjNoun;
  if (upper == "NN") return BigramKind::kNounNoun;
  if (upper == "VN") return BigramKind::kVerbNoun;
  throw UsageError("unknown bigram kind '" + std::string(name) + "' (expected JN|NN|VN)");
}

std::string_view to_string(BigramKind kind) {
  switch (kind) {
    case BigramKind::kAdjNoun:
      return "JN";
    case BigramKind::kNounNoun:
      return "NN";
    case BigramKind::kVerbNoun:
      return "VN";
  }
  return "?";
}

namespace {

char tag_class(const std::string& tag) {
  return tag.empty() ? '\0' : static_cast<char>(std::toupper(static_cast<unsigned char>(tag[0])));
}

std::optional<std::size_t> next_noun(const Tokens& tags, std::size_t after) {
  for (std::size_t k = after + 1; k < tags.size(); ++k) {
    if (tag_class(tags[k]) == 'N') return k;
  }
  return std::nullopt;
}

PhrasePairRecord bigram(const PhrasePairRecord& r, std::size_t i1, std::size_t i2, std::size_t j1,
                        std::size_t j2) {
  PhrasePairRecord out;
  out.phrase1 = {r.phrase1[i1], r.phrase1[i2]};
  out.phrase2 = {r.phrase2[j1], r.phrase2[j2]};
  out.score = r.score;
  return out;
}

}  // namespace

std::vector<PhrasePairRecord> extract_bigram_pairs(std::span<const PhrasePairRecord> records,
                                                   BigramKind kind, const Vocabulary* vocab) {
  std::vector<PhrasePairRecord> raw;
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& r = records[n];
    if (!r.tags1 || !r.tags2 || !r.alignment) {
      throw DataError("record " + std::to_string(n + 1) + " has no tags or alignment");
    }
    r.validate();
    const Tokens& t1 = *r.tags1;
    const Tokens& t2 = *r.tags2;
    const Alignment& links = *r.alignment;
    auto aligned = [&](std::size_t i, std::size_t j) {
      return std::find(links.begin(), links.end(), std::make_pair(i, j)) != links.end();
    };

    for (auto [i, j] : links) {
      if (kind == BigramKind::kVerbNoun) {
        if (tag_class(t1[i]) != 'V' || tag_class(t2[j]) != 'V') continue;
        const auto n1 = next_noun(t1, i);
        const auto n2 = next_noun(t2, j);
        if (n1 && n2) raw.push_back(bigram(r, i, *n1, j, *n2));
        continue;
      }
      const char head = kind == BigramKind::kAdjNoun ? 'J' : 'N';
      if (i + 1 >= t1.size() || j + 1 >= t2.size()) continue;
      if (tag_class(t1[i]) != head || tag_class(t2[j]) != head) continue;
      if (tag_class(t1[i + 1]) != 'N' || tag_class(t2[j + 1]) != 'N') continue;
      if (!aligned(i + 1, j + 1)) continue;
      raw.push_back(bigram(r, i, i + 1, j, j + 1));
    }
  }

  std::vector<PhrasePairRecord> clean;
  for (auto& b : raw) {
    const auto bad = [&](const std::string& t) {
      return is_bracket_token(t) || (vocab && !vocab->contains(t));
    };
    if (std::any_of(b.phrase1.begin(), b.phrase1.end(), bad) ||
        std::any_of(b.phrase2.begin(), b.phrase2.end(), bad)) {
      continue;
    }
    if (levenshtein(join(b.phrase1), join(b.phrase2)) <= 1) continue;
    clean.push_back(std::move(b));
  }
  return dedup_pairs(clean);
}

}  // namespace paragram
