#include <istream>

#include "paragram/error.hpp"
#include "paragram/text.hpp"
#include "paragram/training.hpp"

namespace paragram {

void ConstraintIndex::forbid(const std::string& word, const std::string& other) {
  forbidden_[word].insert(other);
}

bool ConstraintIndex::forbids(const std::string& word, const std::string& candidate) const {
  auto it = forbidden_.find(word);
  return it != forbidden_.end() && it->second.count(candidate) > 0;
}

const std::unordered_set<std::string>* ConstraintIndex::forbidden(const std::string& word) const {
  auto it = forbidden_.find(word);
  return it == forbidden_.end() ? nullptr : &it->second;
}

LemmaMap load_lemma_map(std::istream& in) {
  LemmaMap lemmas;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw DataError("lemma map line " + std::to_string(line_no) + ": expected `word TAB lemma`");
    }
    lemmas.emplace(std::move(fields[0]), std::move(fields[1]));
  }
  return lemmas;
}

LemmaMap load_lemma_map_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_lemma_map(in);
}

ConstraintIndex build_constraints(std::span<const TrainingPair> pairs, const LemmaMap& lemmas) {
  auto lemma_of = [&](const std::string& w) -> const std::string& {
    auto it = lemmas.find(w);
    return it == lemmas.end() ? w : it->second;
  };
  ConstraintIndex index;
  for (const auto& p : pairs) {
    const std::string a = p.first.surface();
    const std::string b = p.second.surface();
    index.forbid(a, b);
    index.forbid(a, lemma_of(b));
    index.forbid(b, a);
    index.forbid(b, lemma_of(a));
  }
  return index;
}

}  // namespace paragram
