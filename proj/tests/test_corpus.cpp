#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "cloze/error.hpp"
#include "cloze/question_file.hpp"
#include "cloze/rng.hpp"
#include "cloze/stats.hpp"
#include "cloze/synth.hpp"
#include "cloze/vocab.hpp"

using namespace cloze;

namespace {

std::vector<std::string> toks(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < line.size()) {
    size_t next = line.find(' ', pos);
    if (next == std::string::npos) next = line.size();
    if (next > pos) out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

ClozeExample make_example(const std::string& passage, const std::string& question,
                          int answer) {
  ClozeExample ex;
  ex.id = "test";
  ex.source_id = "test";
  ex.passage = toks(passage);
  ex.question = toks(question);
  ex.answer = EntityId{answer};
  return ex;
}

Err kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ClozeError& e) {
    return e.kind();
  }
  FAIL("expected a ClozeError");
  return Err::IoError;
}

}  // namespace

TEST_CASE("entity markers render and reparse to themselves") {
  for (int n : {0, 1, 7, 42, 100000}) {
    auto parsed = parse_marker(marker(EntityId{n}));
    REQUIRE(parsed.has_value());
    CHECK(parsed->index == n);
  }
  CHECK_FALSE(parse_marker("@entity"));
  CHECK_FALSE(parse_marker("@entity01"));
  CHECK_FALSE(parse_marker("@entityx"));
  CHECK_FALSE(parse_marker("entity3"));
}

TEST_CASE("parse_question_file reads the documented layout") {
  std::string file =
      "http://example.com/a\n\n"
      "@entity1 beat @entity2 .\n\n"
      "@placeholder beat @entity2\n\n"
      "@entity1\n\n"
      "@entity1:alice\n"
      "@entity2:bob\n";
  ClozeExample ex = parse_question_file(file);
  CHECK(ex.source_id == "http://example.com/a");
  CHECK(ex.passage.size() == 4);
  CHECK(ex.answer == EntityId{1});
  CHECK(candidates(ex) == std::vector<EntityId>{EntityId{1}, EntityId{2}});
  CHECK(ex.entity_strings.at(EntityId{1}) == "alice");
  CHECK(ex.entity_strings.at(EntityId{2}) == "bob");
}

TEST_CASE("parser error kinds") {
  CHECK(kind_of([] {
          parse_question_file("id\n\n@entity1 won .\n\nwho won\n\n@entity1\n\n");
        }) == Err::MissingPlaceholder);
  CHECK(kind_of([] { parse_question_file("just one block"); }) ==
        Err::MalformedFile);
  CHECK(kind_of([] { parse_question_file("id\n\npassage only"); }) ==
        Err::MalformedFile);
  CHECK(kind_of([] {
          parse_question_file(
              "id\n\n@entity1 won .\n\n@placeholder won\n\n@entity9\n\n");
        }) == Err::AnswerNotInPassage);
  CHECK(kind_of([] {
          parse_question_file("id\n\n@entity1 won .\n\n@placeholder won\n\n"
                              "@entity1\n\nnot a mapping\n");
        }) == Err::BadEntityMapping);
  CHECK(kind_of([] {
          parse_question_file("id\n\n@entity1 a .\n\n@placeholder a "
                              "@placeholder\n\n@entity1\n\n");
        }) == Err::DuplicatePlaceholder);

  // surface strings may contain colons
  ClozeExample ex = parse_question_file(
      "id\n\n@entity1 won .\n\n@placeholder won\n\n@entity1\n\n@entity1:a:b\n");
  CHECK(ex.entity_strings.at(EntityId{1}) == "a:b");
}

TEST_CASE("serialize emits an empty mapping section when there are no strings") {
  ClozeExample ex = make_example("@entity3 won .", "@placeholder won", 3);
  std::string bytes = serialize_question_file(ex);
  CHECK(bytes.ends_with("@entity3\n\n"));
  ClozeExample back = parse_question_file(bytes);
  CHECK(back == ex);
}

TEST_CASE("round trip: parse then serialize is byte-stable on generator output") {
  SynthSpec spec;
  spec.n_examples = 100;
  spec.seed = 11;
  for (auto mode :
       {SynthMode::ExactMatch, SynthMode::Paraphrase, SynthMode::PartialClue}) {
    spec.mode = mode;
    for (const auto& ex : generate_synthetic(spec)) {
      std::string bytes = serialize_question_file(ex);
      ClozeExample back = parse_question_file(bytes);
      CHECK(back == ex);
      CHECK(serialize_question_file(back) == bytes);
    }
  }
}

TEST_CASE("relabeling follows first occurrence over passage then question") {
  ClozeExample ex = make_example("@entity7 met @entity3 .",
                                 "@placeholder met @entity3", 7);
  ClozeExample out = relabel_entities(ex);
  CHECK(out.passage[0] == "@entity1");
  CHECK(out.passage[2] == "@entity2");
  CHECK(out.answer == EntityId{1});
  CHECK(out.question[2] == "@entity2");

  SUBCASE("question-only markers are relabeled after passage ones") {
    ClozeExample q =
        make_example("@entity9 won .", "@placeholder beat @entity4", 9);
    ClozeExample relabeled = relabel_entities(q);
    CHECK(relabeled.passage[0] == "@entity1");
    CHECK(relabeled.question[2] == "@entity2");
  }
}

TEST_CASE("relabeling already-canonical markers is the identity") {
  ClozeExample ex = make_example("@entity1 met @entity2 . @entity3 left .",
                                 "@placeholder met @entity2", 1);
  CHECK(relabel_entities(ex) == ex);
}

TEST_CASE("relabeling is idempotent and preserves candidates and the answer") {
  SynthSpec spec;
  spec.n_examples = 1000;
  spec.seed = 5;
  for (const auto& ex : generate_synthetic(spec)) {
    ClozeExample once = relabel_entities(ex);
    CHECK(relabel_entities(once) == once);
    CHECK(candidates(once).size() == candidates(ex).size());
    auto cands = candidates(once);
    CHECK(std::find(cands.begin(), cands.end(), once.answer) != cands.end());
    CHECK(once.entity_strings.size() == ex.entity_strings.size());
    validate_example(once);
  }
}

TEST_CASE("relabeling drops surface strings for absent markers") {
  ClozeExample ex = make_example("@entity5 won .", "@placeholder won", 5);
  ex.entity_strings[EntityId{5}] = "keep";
  ex.entity_strings[EntityId{99}] = "drop";
  ClozeExample out = relabel_entities(ex);
  CHECK(out.entity_strings.size() == 1);
  CHECK(out.entity_strings.at(EntityId{1}) == "keep");
}

TEST_CASE("candidates lists passage markers only") {
  ClozeExample ex = make_example("@entity1 met @entity4 .",
                                 "@placeholder met @entity9", 1);
  CHECK(candidates(ex) == std::vector<EntityId>{EntityId{1}, EntityId{4}});
  CHECK(kind_of([] {
          candidates(make_example("no markers here .", "@placeholder x", 0));
        }) == Err::EmptyCandidateSet);
}

TEST_CASE("answer is always a candidate on generated corpora") {
  SynthSpec spec;
  spec.n_examples = 200;
  spec.seed = 3;
  spec.mode = SynthMode::Paraphrase;
  for (const auto& ex : generate_synthetic(spec)) {
    auto cands = candidates(ex);
    CHECK(std::find(cands.begin(), cands.end(), ex.answer) != cands.end());
  }
}

TEST_CASE("build_vocab keeps everything under a generous cap") {
  std::vector<ClozeExample> corpus = {
      make_example("@entity1 alpha beta alpha .", "@placeholder alpha", 1)};
  Vocab v = build_vocab(corpus, 50000);
  CHECK(v.id("alpha") >= Vocab::kReservedCount);
  CHECK(v.id("beta") >= Vocab::kReservedCount);
  CHECK(v.id("@entity1") >= Vocab::kReservedCount);
  CHECK(v.token(Vocab::kUnkId) == "<unk>");
  CHECK(v.token(Vocab::kPlaceholderId) == "@placeholder");
  CHECK(v.id("@placeholder") == Vocab::kPlaceholderId);
  CHECK(v.id("never-seen") == Vocab::kUnkId);
}

TEST_CASE("build_vocab cuts rare words but never markers") {
  std::vector<ClozeExample> corpus = {make_example(
      "@entity1 alpha beta alpha gamma beta alpha .", "@placeholder alpha", 1)};
  // room for three non-reserved tokens: alpha, ".", beta outrank gamma
  Vocab v = build_vocab(corpus, Vocab::kReservedCount + 3);
  CHECK(v.id("alpha") != Vocab::kUnkId);
  CHECK(v.id("gamma") == Vocab::kUnkId);
  CHECK(v.id("@entity1") != Vocab::kUnkId);
}

TEST_CASE("build_vocab breaks frequency ties by first occurrence") {
  std::vector<ClozeExample> corpus = {
      make_example("@entity1 zzz aaa .", "@placeholder zzz aaa", 1)};
  Vocab v = build_vocab(corpus, 50000);
  CHECK(v.id("zzz") < v.id("aaa"));
}

TEST_CASE("corpus_stats means are exact on a handmade example") {
  // 10 passage tokens, one boundary inside -> 2 sentences, 3 distinct markers
  ClozeExample ex = make_example("@entity1 a b c . @entity2 d e @entity3 f",
                                 "@placeholder v w x", 1);
  CorpusStats s = corpus_stats(std::vector<ClozeExample>{ex});
  CHECK(s.example_count == 1);
  CHECK(s.avg_passage_tokens == doctest::Approx(10.0));
  CHECK(s.avg_passage_sentences == doctest::Approx(2.0));
  CHECK(s.avg_question_tokens == doctest::Approx(4.0));
  CHECK(s.avg_entities == doctest::Approx(3.0));

  CHECK_THROWS_AS(corpus_stats(std::vector<ClozeExample>{}), ClozeError);
}

TEST_CASE("trailing sentence punctuation does not create a phantom sentence") {
  ClozeExample ex = make_example("@entity1 a . b c .", "@placeholder x", 1);
  auto spans = sentence_spans(ex);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == std::pair<int, int>{0, 3});
  CHECK(spans[1] == std::pair<int, int>{3, 6});
}

TEST_CASE("sidecar sentence spans override the punctuation rule") {
  ClozeExample ex = make_example("@entity1 a b c d", "@placeholder x", 1);
  ex.sentence_spans_override = std::vector<std::pair<int, int>>{{0, 2}, {2, 5}};
  CHECK(sentence_spans(ex).size() == 2);
  CHECK(parse_sents_file("0 2\n2 5\n", 5) ==
        std::vector<std::pair<int, int>>{{0, 2}, {2, 5}});
  CHECK_THROWS_AS(parse_sents_file("3 2\n", 5), ClozeError);
  CHECK_THROWS_AS(parse_sents_file("0 9\n", 5), ClozeError);
}

TEST_CASE("generator is deterministic in the seed") {
  SynthSpec spec;
  spec.n_examples = 50;
  spec.seed = 99;
  auto a = generate_synthetic(spec);
  auto b = generate_synthetic(spec);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(serialize_question_file(a[i]) == serialize_question_file(b[i]));
  }
  spec.seed = 100;
  auto c = generate_synthetic(spec);
  CHECK(serialize_question_file(a[0]) != serialize_question_file(c[0]));
}

TEST_CASE("generator handles edge requests") {
  SynthSpec spec;
  spec.n_examples = 0;
  CHECK(generate_synthetic(spec).empty());

  spec.n_examples = 1;
  spec.vocab_size = 4;
  CHECK(kind_of([&] { generate_synthetic(spec); }) == Err::InfeasibleSpec);

  spec.vocab_size = 120;
  spec.n_entities_range = {4, 3};
  CHECK_THROWS_AS(generate_synthetic(spec), ClozeError);
}

TEST_CASE("file loader reads sidecars and uses the stem as id") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cloze-corpus-test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ClozeExample ex = make_example("@entity1 beats @entity2 . w x y z .",
                                 "@placeholder beats @entity2", 1);
  ex.source_id = "http://somewhere";
  write_example_file(ex, dir / "item.question");
  write_file(dir / "item.sents", "0 4\n4 9\n");
  write_file(dir / "item.deps",
             "-1\tbeats\tnsubj\t@placeholder\n0\tbeats\tnsubj\t@entity1\n");
  write_file(dir / "item.pos", "1\tVBZ\n");

  auto corpus = load_corpus_dir(dir);
  REQUIRE(corpus.size() == 1);
  const LoadedExample& loaded = corpus[0];
  CHECK(loaded.example.id == "item");
  CHECK(loaded.example.source_id == "http://somewhere");
  REQUIRE(loaded.example.sentence_spans_override.has_value());
  CHECK(loaded.example.sentence_spans_override->size() == 2);
  REQUIRE(loaded.parses.has_value());
  CHECK(loaded.parses->size() == 2);
  CHECK(loaded.parses->at(0).sentence_index == -1);
  REQUIRE(loaded.pos_tags.has_value());
  CHECK(loaded.pos_tags->at(1) == "VBZ");
  fs::remove_all(dir);
}
