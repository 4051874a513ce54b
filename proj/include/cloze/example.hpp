#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cloze/entity.hpp"

namespace cloze {

// One (passage, question, answer) cloze item. Tokens are the already
// whitespace-tokenized, lowercased forms: plain words, "@entity{n}" markers,
// or sentence punctuation.
struct ClozeExample {
  std::string id;         // file stem or synthetic tag; parse() sets source_id
  std::string source_id;  // first block of the question file
  std::vector<std::string> passage;
  std::vector<std::string> question;  // contains exactly one "@placeholder"
  EntityId answer;
  std::map<EntityId, std::string> entity_strings;
  // Sidecar sentence boundaries (token offsets, end exclusive). When absent,
  // sentence_spans() falls back to the punctuation rule.
  std::optional<std::vector<std::pair<int, int>>> sentence_spans_override;

  bool operator==(const ClozeExample&) const = default;
};

// Throws on invariant violations: MissingPlaceholder, DuplicatePlaceholder,
// EmptyPassage, EmptyQuestion, AnswerNotInPassage, EmptyCandidateSet.
void validate_example(const ClozeExample& ex);

// Distinct entity markers occurring in the passage, ascending by index.
// Throws EmptyCandidateSet when the passage holds no markers.
std::vector<EntityId> candidates(const ClozeExample& ex);

// Renames markers so the k-th distinct marker, scanning passage then
// question, becomes @entity{k} (k from 1). Answer and surface strings follow;
// surface strings for markers absent from both sequences are dropped.
ClozeExample relabel_entities(const ClozeExample& ex);

// The bijection relabel_entities applies to the markers present.
std::map<EntityId, EntityId> relabel_mapping(const ClozeExample& ex);

// Sentence spans as [start, end) token offsets. Uses the sidecar override
// when present; otherwise each '.', '!' or '?' token closes a sentence and
// trailing unterminated tokens form a final span.
std::vector<std::pair<int, int>> sentence_spans(const ClozeExample& ex);

int placeholder_position(const ClozeExample& ex);

}  // namespace cloze
