#include "cloze/stats.hpp"

#include <cstdio>
#include <set>

#include "cloze/error.hpp"

namespace cloze {

CorpusStats corpus_stats(std::span<const ClozeExample> corpus) {
  if (corpus.empty()) fail(Err::EmptyCorpus, "no examples to summarize");
  CorpusStats s;
  s.example_count = static_cast<long>(corpus.size());
  double tokens = 0, sentences = 0, q_tokens = 0, entities = 0;
  for (const auto& ex : corpus) {
    tokens += static_cast<double>(ex.passage.size());
    sentences += static_cast<double>(sentence_spans(ex).size());
    q_tokens += static_cast<double>(ex.question.size());
    std::set<EntityId> distinct;
    for (const auto& tok : ex.passage) {
      if (auto id = parse_marker(tok)) distinct.insert(*id);
    }
    for (const auto& tok : ex.question) {
      if (auto id = parse_marker(tok)) distinct.insert(*id);
    }
    entities += static_cast<double>(distinct.size());
  }
  double n = static_cast<double>(s.example_count);
  s.avg_passage_tokens = tokens / n;
  s.avg_passage_sentences = sentences / n;
  s.avg_question_tokens = q_tokens / n;
  s.avg_entities = entities / n;
  return s;
}

std::string format_stats(const CorpusStats& stats) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "examples\t%ld\n", stats.example_count);
  out += buf;
  std::snprintf(buf, sizeof(buf), "passage_avg_tokens\t%.1f\n",
                stats.avg_passage_tokens);
  out += buf;
  std::snprintf(buf, sizeof(buf), "passage_avg_sentences\t%.1f\n",
                stats.avg_passage_sentences);
  out += buf;
  std::snprintf(buf, sizeof(buf), "question_avg_tokens\t%.1f\n",
                stats.avg_question_tokens);
  out += buf;
  std::snprintf(buf, sizeof(buf), "avg_entities\t%.1f\n", stats.avg_entities);
  out += buf;
  return out;
}

}  // namespace cloze
