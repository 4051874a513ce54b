#include <doctest.h>

#include <sstream>

#include "cloze/error.hpp"
#include "cloze/eval.hpp"
#include "cloze/reader.hpp"
#include "cloze/rng.hpp"
#include "cloze/synth.hpp"
#include "cloze/vocab.hpp"

using namespace cloze;

namespace {

// Builds predictions/gold/labels with a fixed (count, correct) outcome per
// category. Correct items predict entity 1, wrong ones predict 2 of {1,2}.
struct Fixture {
  PredictionMap predictions;
  PredictionMap gold;
  LabelMap labels;

  void add(CategoryLabel label, int count, int correct) {
    for (int i = 0; i < count; ++i) {
      std::string id =
          std::string(category_token(label)) + "-" + std::to_string(i);
      gold[id] = EntityId{1};
      predictions[id] = i < correct ? EntityId{1} : EntityId{2};
      labels[id] = label;
    }
  }
};

}  // namespace

TEST_CASE("accuracy is the fraction of exact matches") {
  PredictionMap gold, all_right, all_wrong;
  for (int i = 0; i < 10; ++i) {
    std::string id = "ex" + std::to_string(i);
    gold[id] = EntityId{i};
    all_right[id] = EntityId{i};
    all_wrong[id] = EntityId{i + 100};
  }
  CHECK(accuracy(all_right, gold) == doctest::Approx(1.0));
  CHECK(accuracy(all_wrong, gold) == doctest::Approx(0.0));

  PredictionMap missing = all_right;
  missing.erase("ex0");
  CHECK_THROWS_AS(accuracy(missing, gold), ClozeError);
}

TEST_CASE("66 of 100 scores 66.0%") {
  Fixture f;
  f.add(CategoryLabel::ExactMatch, 100, 66);
  CHECK(accuracy(f.predictions, f.gold) == doctest::Approx(0.66));
}

TEST_CASE("per-category report counts and recombines") {
  Fixture f;
  f.add(CategoryLabel::ExactMatch, 13, 13);
  f.add(CategoryLabel::Paraphrasing, 41, 32);
  f.add(CategoryLabel::PartialClue, 19, 14);
  EvalReport report = per_category_report(f.predictions, f.gold, f.labels);
  CHECK(report.per_category.at(CategoryLabel::ExactMatch).count == 13);
  CHECK(report.per_category.at(CategoryLabel::ExactMatch).accuracy() ==
        doctest::Approx(1.0));
  CHECK(report.unlabeled_count == 0);

  // category accuracies recombine to the overall labeled accuracy
  double weighted = 0;
  int total = 0;
  for (const auto& [label, outcome] : report.per_category) {
    weighted += outcome.accuracy() * outcome.count;
    total += outcome.count;
  }
  CHECK(weighted / total == doctest::Approx(report.total_accuracy));
}

TEST_CASE("unlabeled examples are tallied separately") {
  Fixture f;
  f.add(CategoryLabel::ExactMatch, 5, 4);
  f.gold["extra"] = EntityId{1};
  f.predictions["extra"] = EntityId{1};
  EvalReport report = per_category_report(f.predictions, f.gold, f.labels);
  CHECK(report.unlabeled_count == 1);
  CHECK(report.total_count == 6);

  EvalReport bare = per_category_report(f.predictions, f.gold, {});
  CHECK(bare.unlabeled_count == 6);
  CHECK(bare.per_category.empty());
}

TEST_CASE("report rows render like the published table") {
  Fixture classifier;
  classifier.add(CategoryLabel::ExactMatch, 13, 13);
  classifier.add(CategoryLabel::Paraphrasing, 41, 32);
  classifier.add(CategoryLabel::PartialClue, 19, 14);
  classifier.add(CategoryLabel::MultipleSentences, 2, 1);
  classifier.add(CategoryLabel::CoreferenceError, 8, 4);
  classifier.add(CategoryLabel::AmbiguousHard, 17, 2);
  EvalReport report =
      per_category_report(classifier.predictions, classifier.gold,
                          classifier.labels);
  std::string rendered = render_report(report);
  CHECK(rendered.find("Exact match 13 (100.0%)") != std::string::npos);
  CHECK(rendered.find("Partial clue 14 (73.7%)") != std::string::npos);
  CHECK(rendered.find("Multiple sentences 1 (50.0%)") != std::string::npos);
  CHECK(rendered.find("Coreference errors 4 (50.0%)") != std::string::npos);
  CHECK(rendered.find("Ambiguous / hard 2 (11.8%)") != std::string::npos);
  CHECK(rendered.find("All 66 (66.0%)") != std::string::npos);
}

TEST_CASE("category counts keep the published 100-sample proportions") {
  Fixture f;
  int counts[kCategoryCount] = {13, 41, 19, 2, 8, 17};
  for (int c = 0; c < kCategoryCount; ++c) {
    f.add(static_cast<CategoryLabel>(c), counts[c], counts[c] / 2);
  }
  EvalReport report = per_category_report(f.predictions, f.gold, f.labels);
  int total = 0;
  for (const auto& [label, outcome] : report.per_category) {
    total += outcome.count;
  }
  CHECK(total == 100);
  CHECK(report.per_category.at(CategoryLabel::Paraphrasing).count == 41);
}

TEST_CASE("compare_systems keeps both columns and the row order") {
  Fixture a, b;
  a.add(CategoryLabel::Paraphrasing, 41, 32);
  b.add(CategoryLabel::Paraphrasing, 41, 39);
  EvalReport ra = per_category_report(a.predictions, a.gold, a.labels);
  EvalReport rb = per_category_report(b.predictions, b.gold, b.labels);

  std::string table = compare_systems(ra, rb, "classifier", "reader");
  CHECK(table.find("Paraphrasing\t32 (78.0%)\t39 (95.1%)") != std::string::npos);

  std::string same = compare_systems(ra, ra);
  CHECK(same.find("32 (78.0%)\t32 (78.0%)") != std::string::npos);

  // swapping arguments transposes the columns
  std::string swapped = compare_systems(rb, ra, "reader", "classifier");
  CHECK(swapped.find("Paraphrasing\t39 (95.1%)\t32 (78.0%)") != std::string::npos);

  Fixture c;
  c.add(CategoryLabel::ExactMatch, 3, 3);
  EvalReport rc = per_category_report(c.predictions, c.gold, c.labels);
  CHECK_THROWS_AS(compare_systems(ra, rc), ClozeError);
}

TEST_CASE("label files round-trip and reject unknown tokens") {
  LabelMap labels = {{"a", CategoryLabel::ExactMatch},
                     {"b", CategoryLabel::AmbiguousHard},
                     {"c", CategoryLabel::CoreferenceError}};
  std::string bytes = format_label_file(labels);
  CHECK(parse_label_file(bytes) == labels);
  CHECK(bytes.find("ambiguous-hard") != std::string::npos);
  CHECK_THROWS_AS(parse_label_file("x\tnot-a-category\n"), ClozeError);
  CHECK_THROWS_AS(parse_label_file("no tab here\n"), ClozeError);
}

TEST_CASE("reports are pure functions of their inputs") {
  Fixture f;
  f.add(CategoryLabel::PartialClue, 19, 14);
  EvalReport once = per_category_report(f.predictions, f.gold, f.labels);
  EvalReport twice = per_category_report(f.predictions, f.gold, f.labels);
  CHECK(render_report(once) == render_report(twice));
}

TEST_CASE("dump_attention emits normalized rows for real positions only") {
  SynthSpec spec;
  spec.n_examples = 5;
  spec.seed = 60;
  auto corpus = generate_synthetic(spec);
  ReaderConfig config;
  config.embed_dim = 8;
  config.gru_hidden = 8;
  config.seed = 61;
  ReaderModel model = init_reader(config, build_vocab(corpus, 50000));

  std::ostringstream out;
  dump_attention(model, corpus, out);
  std::istringstream lines(out.str());
  std::string line;
  std::map<std::string, double> sums;
  std::map<std::string, size_t> rows;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string id, token;
    long position;
    double alpha;
    fields >> id >> position >> token >> alpha;
    sums[id] += alpha;
    ++rows[id];
  }
  REQUIRE(sums.size() == corpus.size());
  for (const auto& ex : corpus) {
    CHECK(std::abs(sums.at(ex.id) - 1.0) < 1e-6);
    CHECK(rows.at(ex.id) == ex.passage.size());
  }
}
