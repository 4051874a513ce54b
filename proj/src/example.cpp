#include "cloze/example.hpp"

#include <algorithm>
#include <set>

#include "cloze/error.hpp"

namespace cloze {

void validate_example(const ClozeExample& ex) {
  if (ex.passage.empty()) fail(Err::EmptyPassage, "passage is empty");
  if (ex.question.empty()) fail(Err::EmptyQuestion, "question is empty");
  int placeholders = 0;
  for (const auto& tok : ex.question) {
    if (is_placeholder(tok)) ++placeholders;
  }
  if (placeholders == 0) {
    fail(Err::MissingPlaceholder, "question has no @placeholder token");
  }
  if (placeholders > 1) {
    fail(Err::DuplicatePlaceholder, "question has multiple @placeholder tokens");
  }
  auto cands = candidates(ex);  // throws EmptyCandidateSet
  if (!std::binary_search(cands.begin(), cands.end(), ex.answer)) {
    fail(Err::AnswerNotInPassage,
         "answer " + marker(ex.answer) + " does not occur in the passage");
  }
}

std::vector<EntityId> candidates(const ClozeExample& ex) {
  std::set<EntityId> seen;
  for (const auto& tok : ex.passage) {
    if (auto id = parse_marker(tok)) seen.insert(*id);
  }
  if (seen.empty()) {
    fail(Err::EmptyCandidateSet, "passage contains no entity markers");
  }
  return {seen.begin(), seen.end()};
}

std::map<EntityId, EntityId> relabel_mapping(const ClozeExample& ex) {
  std::map<EntityId, EntityId> rename;
  int next = 1;
  auto scan = [&](const std::vector<std::string>& tokens) {
    for (const auto& tok : tokens) {
      if (auto id = parse_marker(tok)) {
        if (rename.emplace(*id, EntityId{next}).second) ++next;
      }
    }
  };
  scan(ex.passage);
  scan(ex.question);
  return rename;
}

ClozeExample relabel_entities(const ClozeExample& ex) {
  std::map<EntityId, EntityId> rename = relabel_mapping(ex);

  auto apply = [&](std::vector<std::string> tokens) {
    for (auto& tok : tokens) {
      if (auto id = parse_marker(tok)) tok = marker(rename.at(*id));
    }
    return tokens;
  };

  ClozeExample out = ex;
  out.passage = apply(ex.passage);
  out.question = apply(ex.question);
  if (auto it = rename.find(ex.answer); it != rename.end()) {
    out.answer = it->second;
  }
  out.entity_strings.clear();
  for (const auto& [id, surface] : ex.entity_strings) {
    if (auto it = rename.find(id); it != rename.end()) {
      out.entity_strings[it->second] = surface;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> sentence_spans(const ClozeExample& ex) {
  if (ex.sentence_spans_override) return *ex.sentence_spans_override;
  std::vector<std::pair<int, int>> spans;
  int start = 0;
  int n = static_cast<int>(ex.passage.size());
  for (int i = 0; i < n; ++i) {
    if (is_sentence_boundary(ex.passage[i])) {
      spans.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  if (start < n) spans.emplace_back(start, n);
  return spans;
}

int placeholder_position(const ClozeExample& ex) {
  for (size_t i = 0; i < ex.question.size(); ++i) {
    if (is_placeholder(ex.question[i])) return static_cast<int>(i);
  }
  fail(Err::MissingPlaceholder, "question has no @placeholder token");
}

}  // namespace cloze
