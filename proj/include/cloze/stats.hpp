#pragma once

#include <span>
#include <string>

#include "cloze/example.hpp"

namespace cloze {

struct CorpusStats {
  long example_count = 0;
  double avg_passage_tokens = 0;
  double avg_passage_sentences = 0;
  double avg_question_tokens = 0;
  double avg_entities = 0;  // distinct markers over passage + question
};

CorpusStats corpus_stats(std::span<const ClozeExample> corpus);
std::string format_stats(const CorpusStats& stats);

}  // namespace cloze
