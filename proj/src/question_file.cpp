#include "cloze/question_file.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cloze/error.hpp"

namespace cloze {

namespace {

std::vector<std::string> split(std::string_view text, std::string_view sep) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    size_t next = text.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.emplace_back(text.substr(pos));
      return parts;
    }
    parts.emplace_back(text.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> tokens;
  std::string flat(line);
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  for (auto& piece : split(flat, " ")) {
    if (!piece.empty()) tokens.push_back(std::move(piece));
  }
  return tokens;
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

ClozeExample parse_question_file(std::string_view bytes) {
  auto blocks = split(std::string(bytes), "\n\n");
  // A canonical file with no mappings ends in "\n\n", leaving one empty
  // trailing block; treat it as the (empty) mapping block.
  if (!blocks.empty() && strip_trailing_newlines(blocks.back()).empty()) {
    blocks.back().clear();
  }
  if (blocks.size() != 4 && blocks.size() != 5) {
    fail(Err::MalformedFile, "expected 4 or 5 blocks, got " +
                                 std::to_string(blocks.size()));
  }

  ClozeExample ex;
  ex.source_id = strip_trailing_newlines(blocks[0]);
  ex.id = ex.source_id;
  ex.passage = split_tokens(strip_trailing_newlines(blocks[1]));
  ex.question = split_tokens(strip_trailing_newlines(blocks[2]));

  std::string answer_tok = strip_trailing_newlines(blocks[3]);
  auto answer = parse_marker(answer_tok);
  if (!answer) {
    fail(Err::MalformedFile, "answer block is not an entity marker: '" +
                                 answer_tok + "'");
  }
  ex.answer = *answer;

  if (blocks.size() == 5 && !blocks[4].empty()) {
    for (const auto& line : split(strip_trailing_newlines(blocks[4]), "\n")) {
      if (line.empty()) {
        fail(Err::BadEntityMapping, "empty mapping line");
      }
      size_t colon = line.find(':');
      if (colon == std::string::npos) {
        fail(Err::BadEntityMapping, "mapping line lacks ':': '" + line + "'");
      }
      auto id = parse_marker(std::string_view(line).substr(0, colon));
      if (!id) {
        fail(Err::BadEntityMapping, "mapping line key is not a marker: '" +
                                        line + "'");
      }
      ex.entity_strings[*id] = line.substr(colon + 1);
    }
  }

  validate_example(ex);
  return ex;
}

std::string serialize_question_file(const ClozeExample& ex) {
  validate_example(ex);
  std::string out = ex.source_id;
  out += "\n\n";
  for (size_t i = 0; i < ex.passage.size(); ++i) {
    if (i) out += ' ';
    out += ex.passage[i];
  }
  out += "\n\n";
  for (size_t i = 0; i < ex.question.size(); ++i) {
    if (i) out += ' ';
    out += ex.question[i];
  }
  out += "\n\n";
  out += marker(ex.answer);
  out += "\n\n";
  for (const auto& [id, surface] : ex.entity_strings) {
    out += marker(id);
    out += ':';
    out += surface;
    out += '\n';
  }
  return out;
}

std::vector<std::pair<int, int>> parse_sents_file(std::string_view bytes,
                                                  size_t passage_len) {
  std::vector<std::pair<int, int>> spans;
  int prev_end = 0;
  for (const auto& line : split(strip_trailing_newlines(std::string(bytes)), "\n")) {
    if (line.empty()) continue;
    std::istringstream in(line);
    int start = 0, end = 0;
    if (!(in >> start >> end)) {
      fail(Err::BadSentenceFile, "bad boundary line: '" + line + "'");
    }
    if (start < prev_end || end <= start ||
        end > static_cast<int>(passage_len)) {
      fail(Err::BadSentenceFile, "boundary out of order or range: '" + line + "'");
    }
    spans.emplace_back(start, end);
    prev_end = end;
  }
  if (spans.empty()) {
    fail(Err::BadSentenceFile, "sentence file holds no spans");
  }
  return spans;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Err::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Err::IoError, "short write to " + path.string());
}

LoadedExample load_example_file(const std::filesystem::path& question_path) {
  LoadedExample loaded;
  loaded.example = parse_question_file(read_file(question_path));
  loaded.example.id = question_path.stem().string();

  auto sidecar = [&](const char* ext) {
    std::filesystem::path p = question_path;
    p.replace_extension(ext);
    return p;
  };

  if (auto p = sidecar(".sents"); std::filesystem::exists(p)) {
    loaded.example.sentence_spans_override =
        parse_sents_file(read_file(p), loaded.example.passage.size());
  }
  if (auto p = sidecar(".deps"); std::filesystem::exists(p)) {
    loaded.parses = parse_deps_file(read_file(p));
  }
  if (auto p = sidecar(".pos"); std::filesystem::exists(p)) {
    loaded.pos_tags = parse_pos_file(read_file(p));
  }
  return loaded;
}

std::vector<LoadedExample> load_corpus_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    fail(Err::IoError, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".question") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<LoadedExample> corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) corpus.push_back(load_example_file(f));
  if (corpus.empty()) {
    fail(Err::EmptyCorpus, "no .question files in " + dir.string());
  }
  return corpus;
}

void write_example_file(const ClozeExample& ex,
                        const std::filesystem::path& path) {
  write_file(path, serialize_question_file(ex));
}

std::vector<ClozeExample> examples_of(const std::vector<LoadedExample>& loaded) {
  std::vector<ClozeExample> out;
  out.reserve(loaded.size());
  for (const auto& l : loaded) out.push_back(l.example);
  return out;
}

}  // namespace cloze
