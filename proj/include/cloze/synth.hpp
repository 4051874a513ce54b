#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cloze/example.hpp"

namespace cloze {

enum class SynthMode { ExactMatch, Paraphrase, PartialClue };

const char* synth_mode_name(SynthMode mode);  // "exact-match" | ...
std::optional<SynthMode> synth_mode_from_name(std::string_view name);

struct SynthSpec {
  int n_examples = 1000;
  int vocab_size = 120;
  std::pair<int, int> n_entities_range{3, 6};
  std::pair<int, int> passage_sentences_range{4, 7};
  SynthMode mode = SynthMode::ExactMatch;
  // Word -> synonym rewriting for paraphrase mode; empty means the built-in
  // table pairing each context word with a dedicated synonym token.
  std::map<std::string, std::string> paraphrase_table;
  uint64_t seed = 0;
};

// Deterministic in the seed. Every example validates, the answer occurs in a
// fact sentence inside a context window the question points at, and decoy
// sentences reuse the window words in orders that never two-sided-match.
std::vector<ClozeExample> generate_synthetic(const SynthSpec& spec);

}  // namespace cloze
