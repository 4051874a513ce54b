#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cloze/example.hpp"
#include "cloze/features.hpp"

namespace cloze {

// A question file plus whatever sidecars sat next to it (.sents boundaries
// already folded into the example, .deps arcs, .pos tags).
struct LoadedExample {
  ClozeExample example;
  std::optional<std::vector<ParseArc>> parses;
  std::optional<PosTags> pos_tags;
};

// Blocks separated by "\n\n": source id, passage, question, answer marker,
// then zero or more "@entity{n}:{surface}" mapping lines. The mapping block
// may be absent on input; serialize always emits it (possibly empty), so
// serialize(parse(f)) yields the canonical form of f.
ClozeExample parse_question_file(std::string_view bytes);
std::string serialize_question_file(const ClozeExample& ex);

// Sidecar ".sents": one "start end" line per sentence, token offsets, end
// exclusive. Spans must be ascending and non-overlapping within the passage.
std::vector<std::pair<int, int>> parse_sents_file(std::string_view bytes,
                                                  size_t passage_len);

LoadedExample load_example_file(const std::filesystem::path& question_path);
// All *.question files in the directory, sorted by filename.
std::vector<LoadedExample> load_corpus_dir(const std::filesystem::path& dir);
void write_example_file(const ClozeExample& ex, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

std::vector<ClozeExample> examples_of(const std::vector<LoadedExample>& loaded);

}  // namespace cloze
