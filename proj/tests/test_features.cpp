#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "cloze/error.hpp"
#include "cloze/features.hpp"
#include "cloze/rng.hpp"
#include "cloze/synth.hpp"

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

// Independent n-gram oracle: enumerate every (occurrence, a, b) by hand.
std::array<double, kNgramFlagCount> brute_force_ngram(const ClozeExample& ex,
                                                      EntityId entity) {
  std::array<double, kNgramFlagCount> flags{};
  int ph = placeholder_position(ex);
  int qn = static_cast<int>(ex.question.size());
  int pn = static_cast<int>(ex.passage.size());
  std::string target = marker(entity);
  struct Combo {
    NgramFlag flag;
    int a, b;
  };
  const Combo combos[] = {{L1, 1, 0},   {R1, 0, 1},   {L1R1, 1, 1},
                          {L2, 2, 0},   {R2, 0, 2},   {L2R1, 2, 1},
                          {L1R2, 1, 2}, {L2R2, 2, 2}};
  for (int pos = 0; pos < pn; ++pos) {
    if (ex.passage[static_cast<size_t>(pos)] != target) continue;
    for (const auto& combo : combos) {
      bool ok = true;
      for (int a = 1; a <= combo.a && ok; ++a) {
        ok = ph - a >= 0 && pos - a >= 0 &&
             ex.question[static_cast<size_t>(ph - a)] ==
                 ex.passage[static_cast<size_t>(pos - a)];
      }
      for (int b = 1; b <= combo.b && ok; ++b) {
        ok = ph + b < qn && pos + b < pn &&
             ex.question[static_cast<size_t>(ph + b)] ==
                 ex.passage[static_cast<size_t>(pos + b)];
      }
      if (ok) flags[combo.flag] = 1;
    }
  }
  return flags;
}

// Independent word-distance oracle straight from the definition.
double brute_force_distance(const ClozeExample& ex, EntityId entity,
                            const FeatureConfig& config) {
  std::set<std::string> words;
  for (const auto& tok : ex.question) {
    if (!is_entity_marker(tok) && !is_placeholder(tok) &&
        !is_sentence_boundary(tok) && !config.stopwords.count(tok)) {
      words.insert(tok);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::string target = marker(entity);
  for (size_t occ = 0; occ < ex.passage.size(); ++occ) {
    if (ex.passage[occ] != target) continue;
    double sum = 0;
    int counted = 0;
    for (const auto& w : words) {
      int closest = std::numeric_limits<int>::max();
      for (size_t p = 0; p < ex.passage.size(); ++p) {
        if (ex.passage[p] == w) {
          closest = std::min(closest,
                             std::abs(static_cast<int>(p) - static_cast<int>(occ)));
        }
      }
      if (closest != std::numeric_limits<int>::max()) {
        sum += closest;
        ++counted;
      }
    }
    if (counted > 0) best = std::min(best, sum / counted);
  }
  if (!std::isfinite(best)) {
    return config.no_occurrence_distance.value_or(
        static_cast<double>(ex.passage.size()));
  }
  return best;
}

const FeatureConfig& config() {
  static FeatureConfig c = FeatureConfig::defaults();
  return c;
}

}  // namespace

TEST_CASE("direct counting features") {
  // entity three times, first at token 5 of a 20-token passage
  ClozeExample ex = make_example(
      "w0 w1 w2 w3 w4 @entity1 w6 @entity1 w8 w9 w10 @entity1 w12 w13 @entity2 "
      "w15 w16 w17 w18 .",
      "@placeholder w1", 1);
  FeatureVector f = extract_features(ex, EntityId{1}, std::nullopt, config());
  CHECK(f.f1_in_passage == 1);
  CHECK(f.f2_in_question == 0);
  CHECK(f.f3_frequency == 3);
  CHECK(f.f4_first_position == doctest::Approx(0.25));
  CHECK(f.f8_available == 0);
  CHECK(f.f8_dep_match == 0);

  ClozeExample with_q = make_example("@entity1 w1 .", "@placeholder w @entity1", 1);
  CHECK(extract_features(with_q, EntityId{1}, std::nullopt, config())
            .f2_in_question == 1);
}

TEST_CASE("n-gram window flags on the canonical example") {
  ClozeExample ex =
      make_example("a b w @entity3 v c .", "x w @placeholder v y", 3);
  auto flags = ngram_match(ex, EntityId{3});
  CHECK(flags[L1] == 1);
  CHECK(flags[R1] == 1);
  CHECK(flags[L1R1] == 1);
  CHECK(flags[L2] == 0);  // question has 'x' where passage has 'b'
  CHECK(flags[R2] == 0);
  CHECK(flags[L2R2] == 0);
}

TEST_CASE("n-gram flags are zero without shared context") {
  ClozeExample ex = make_example("a b @entity3 c .", "x y @placeholder z", 3);
  auto flags = ngram_match(ex, EntityId{3});
  for (double f : flags) CHECK(f == 0);
}

TEST_CASE("placeholder at the question edge zeroes that side") {
  ClozeExample ex = make_example("w @entity3 v .", "@placeholder v", 3);
  auto flags = ngram_match(ex, EntityId{3});
  CHECK(flags[L1] == 0);
  CHECK(flags[L1R1] == 0);
  CHECK(flags[L2] == 0);
  CHECK(flags[R1] == 1);
}

TEST_CASE("n-gram matcher agrees with the brute-force oracle on random data") {
  SynthSpec spec;
  spec.n_examples = 150;
  spec.seed = 21;
  for (auto mode : {SynthMode::ExactMatch, SynthMode::PartialClue}) {
    spec.mode = mode;
    for (const auto& ex : generate_synthetic(spec)) {
      for (EntityId e : candidates(ex)) {
        CHECK(ngram_match(ex, e) == brute_force_ngram(ex, e));
      }
    }
  }
}

TEST_CASE("longer window flags imply the contained shorter ones") {
  SynthSpec spec;
  spec.n_examples = 300;
  spec.seed = 22;
  for (const auto& ex : generate_synthetic(spec)) {
    for (EntityId e : candidates(ex)) {
      auto f = ngram_match(ex, e);
      if (f[L2]) CHECK(f[L1] == 1);
      if (f[R2]) CHECK(f[R1] == 1);
      if (f[L2R1]) {
        CHECK(f[L1R1] == 1);
        CHECK(f[L2] == 1);
      }
      if (f[L1R2]) {
        CHECK(f[L1R1] == 1);
        CHECK(f[R2] == 1);
      }
      if (f[L2R2]) {
        CHECK(f[L2R1] == 1);
        CHECK(f[L1R2] == 1);
        CHECK(f[L1R1] == 1);
      }
    }
  }
}

TEST_CASE("word distance on the worked example") {
  ClozeExample ex = make_example("a b @entity1 c d", "@placeholder c", 1);
  CHECK(word_distance(ex, EntityId{1}, config()) == doctest::Approx(1.0));
}

TEST_CASE("word distance falls back to the sentinel") {
  // every question word is a stopword
  ClozeExample ex = make_example("a b @entity1 c d", "@placeholder the of", 1);
  CHECK(word_distance(ex, EntityId{1}, config()) == doctest::Approx(5.0));

  FeatureConfig custom = config();
  custom.no_occurrence_distance = 99.0;
  CHECK(word_distance(ex, EntityId{1}, custom) == doctest::Approx(99.0));
}

TEST_CASE("word distance matches the brute-force oracle on random data") {
  SynthSpec spec;
  spec.n_examples = 200;
  spec.seed = 23;
  for (auto mode : {SynthMode::ExactMatch, SynthMode::Paraphrase}) {
    spec.mode = mode;
    for (const auto& ex : generate_synthetic(spec)) {
      for (EntityId e : candidates(ex)) {
        CHECK(word_distance(ex, e, config()) ==
              doctest::Approx(brute_force_distance(ex, e, config())));
      }
    }
  }
}

TEST_CASE("word distance is at least 1 when real") {
  SynthSpec spec;
  spec.n_examples = 100;
  spec.seed = 29;
  for (const auto& ex : generate_synthetic(spec)) {
    for (EntityId e : candidates(ex)) {
      double d = word_distance(ex, e, config());
      bool sentinel = d == static_cast<double>(ex.passage.size());
      if (!sentinel) CHECK(d >= 1.0);
    }
  }
}

TEST_CASE("sentence co-occurrence through a shared question entity") {
  ClozeExample ex = make_example("@entity1 beat @entity2 . @entity3 sat .",
                                 "@placeholder beat @entity2", 1);
  CHECK(sentence_cooccurrence(ex, EntityId{1}, config()) == 1);
  CHECK(sentence_cooccurrence(ex, EntityId{3}, config()) == 0);
  // the shared entity itself needs a different co-occurring partner
  CHECK(sentence_cooccurrence(ex, EntityId{2}, config()) == 1);
}

TEST_CASE("sentence co-occurrence through a question verb") {
  ClozeExample ex = make_example("w x . @entity1 plays y .", "@placeholder plays", 1);
  CHECK(sentence_cooccurrence(ex, EntityId{1}, config()) == 1);
  ClozeExample miss = make_example("w x . @entity1 y .", "@placeholder plays", 1);
  CHECK(sentence_cooccurrence(miss, EntityId{1}, config()) == 0);
}

TEST_CASE("only the final sentence co-occurs") {
  ClozeExample ex = make_example(
      "@entity1 a . b c . @entity1 beat @entity2 .",
      "@placeholder beat @entity2", 1);
  // brute force over sentences: only sentence 3 holds both entity1 and entity2
  auto spans = sentence_spans(ex);
  REQUIRE(spans.size() == 3);
  int hits = 0;
  for (auto [start, end] : spans) {
    bool has1 = false, has2 = false;
    for (int i = start; i < end; ++i) {
      if (ex.passage[static_cast<size_t>(i)] == "@entity1") has1 = true;
      if (ex.passage[static_cast<size_t>(i)] == "@entity2") has2 = true;
    }
    if (has1 && has2) ++hits;
  }
  CHECK(hits == 1);
  CHECK(sentence_cooccurrence(ex, EntityId{1}, config()) == 1);
}

TEST_CASE("POS sidecar overrides the verb heuristic") {
  ClozeExample ex = make_example("w x . @entity1 blorp y .", "@placeholder blorp", 1);
  CHECK(sentence_cooccurrence(ex, EntityId{1}, config()) == 0);
  PosTags tags{{1, "VB"}};
  CHECK(sentence_cooccurrence(ex, EntityId{1}, config(), tags) == 1);
  PosTags noun{{1, "NN"}};
  ClozeExample played =
      make_example("w x . @entity1 played y .", "@placeholder played", 1);
  CHECK(sentence_cooccurrence(played, EntityId{1}, config()) == 1);
  CHECK(sentence_cooccurrence(played, EntityId{1}, config(), noun) == 0);
}

TEST_CASE("dependency match wants the same relation and direction") {
  ClozeExample ex = make_example("@entity1 beat @entity2 .",
                                 "@placeholder beat @entity2", 1);
  std::vector<ParseArc> arcs = {
      {-1, "beat", "nsubj", "@placeholder"},
      {0, "beat", "nsubj", "@entity1"},
      {0, "beat", "dobj", "@entity2"},
  };
  CHECK(dependency_match(ex, EntityId{1}, arcs) == 1);
  // same words, different relation
  std::vector<ParseArc> relabeled = {{-1, "beat", "nsubj", "@placeholder"},
                                     {0, "beat", "dobj", "@entity1"}};
  CHECK(dependency_match(ex, EntityId{1}, relabeled) == 0);
  // swapped direction between question and passage
  std::vector<ParseArc> swapped = {{-1, "beat", "nsubj", "@placeholder"},
                                   {0, "@entity1", "nsubj", "beat"}};
  CHECK(dependency_match(ex, EntityId{1}, swapped) == 0);
  // outgoing direction matches outgoing
  std::vector<ParseArc> outgoing = {{-1, "@placeholder", "appos", "chief"},
                                    {0, "@entity1", "appos", "chief"}};
  CHECK(dependency_match(ex, EntityId{1}, outgoing) == 1);

  CHECK_THROWS_AS(dependency_match(ex, EntityId{1}, std::nullopt), ClozeError);
}

TEST_CASE("extract_features is pure and relabel-invariant") {
  SynthSpec spec;
  spec.n_examples = 120;
  spec.seed = 31;
  spec.mode = SynthMode::ExactMatch;
  for (const auto& ex : generate_synthetic(spec)) {
    auto once = extract_features(ex, ex.answer, std::nullopt, config());
    auto twice = extract_features(ex, ex.answer, std::nullopt, config());
    CHECK(once == twice);

    // multiset of candidate feature vectors is unchanged by relabeling
    ClozeExample relabeled = relabel_entities(ex);
    std::vector<Eigen::VectorXd> before, after;
    for (EntityId e : candidates(ex)) {
      before.push_back(extract_features(ex, e, std::nullopt, config()).flatten());
    }
    for (EntityId e : candidates(relabeled)) {
      after.push_back(
          extract_features(relabeled, e, std::nullopt, config()).flatten());
    }
    auto key = [](const Eigen::VectorXd& v) {
      std::string s;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        s += std::to_string(v[i]) + ",";
      }
      return s;
    };
    std::vector<std::string> kb, ka;
    for (const auto& v : before) kb.push_back(key(v));
    for (const auto& v : after) ka.push_back(key(v));
    std::sort(kb.begin(), kb.end());
    std::sort(ka.begin(), ka.end());
    CHECK(kb == ka);
  }
}

TEST_CASE("gold entities on an exact-match corpus always fire the full window") {
  SynthSpec spec;
  spec.n_examples = 1000;
  spec.seed = 37;
  spec.mode = SynthMode::ExactMatch;
  int fired = 0, total = 0;
  for (const auto& ex : generate_synthetic(spec)) {
    auto f = extract_features(ex, ex.answer, std::nullopt, config());
    ++total;
    if (f.f5_ngram[L1R1] == 1) ++fired;
    CHECK(f.f1_in_passage == 1);
    CHECK(f.f4_first_position >= 0);
    CHECK(f.f4_first_position <= 1);
  }
  CHECK(fired == total);
}

TEST_CASE("feature group bookkeeping") {
  CHECK(group_from_name("ngram") == FeatureGroup::Ngram);
  CHECK_FALSE(group_from_name("bogus"));
  int covered = 0;
  for (int g = 0; g < kFeatureGroupCount; ++g) {
    covered += group_span(static_cast<FeatureGroup>(g)).second;
  }
  CHECK(covered == kFeatureDim);
  CHECK(config().stopwords.size() == 127);
}
