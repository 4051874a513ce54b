#include "cloze/eval.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "cloze/error.hpp"
#include "cloze/reader.hpp"

namespace cloze {

const char* category_display_name(CategoryLabel c) {
  switch (c) {
    case CategoryLabel::ExactMatch: return "Exact match";
    case CategoryLabel::Paraphrasing: return "Paraphrasing";
    case CategoryLabel::PartialClue: return "Partial clue";
    case CategoryLabel::MultipleSentences: return "Multiple sentences";
    case CategoryLabel::CoreferenceError: return "Coreference errors";
    case CategoryLabel::AmbiguousHard: return "Ambiguous / hard";
  }
  return "?";
}

const char* category_token(CategoryLabel c) {
  switch (c) {
    case CategoryLabel::ExactMatch: return "exact-match";
    case CategoryLabel::Paraphrasing: return "paraphrasing";
    case CategoryLabel::PartialClue: return "partial-clue";
    case CategoryLabel::MultipleSentences: return "multiple-sentences";
    case CategoryLabel::CoreferenceError: return "coref-error";
    case CategoryLabel::AmbiguousHard: return "ambiguous-hard";
  }
  return "?";
}

std::optional<CategoryLabel> category_from_token(std::string_view token) {
  for (int c = 0; c < kCategoryCount; ++c) {
    auto label = static_cast<CategoryLabel>(c);
    if (token == category_token(label)) return label;
  }
  return std::nullopt;
}

namespace {

void require_same_keys(const PredictionMap& predictions,
                       const PredictionMap& gold) {
  if (predictions.size() != gold.size()) {
    fail(Err::KeyMismatch, "prediction and gold key sets differ in size");
  }
  for (const auto& [id, unused] : predictions) {
    if (!gold.count(id)) {
      fail(Err::KeyMismatch, "gold lacks example id '" + id + "'");
    }
  }
}

std::string percent(double accuracy) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", accuracy * 100.0);
  return buf;
}

std::string outcome_cell(const CategoryOutcome& o) {
  return std::to_string(o.correct) + " (" + percent(o.accuracy()) + ")";
}

CategoryOutcome labeled_totals(const EvalReport& r) {
  CategoryOutcome all;
  for (const auto& [label, outcome] : r.per_category) {
    all.count += outcome.count;
    all.correct += outcome.correct;
  }
  return all;
}

}  // namespace

double accuracy(const PredictionMap& predictions, const PredictionMap& gold) {
  require_same_keys(predictions, gold);
  if (predictions.empty()) {
    fail(Err::EmptyCorpus, "nothing to score");
  }
  long correct = 0;
  for (const auto& [id, predicted] : predictions) {
    if (predicted == gold.at(id)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

EvalReport per_category_report(const PredictionMap& predictions,
                               const PredictionMap& gold,
                               const LabelMap& labels) {
  require_same_keys(predictions, gold);
  EvalReport report;
  for (const auto& [id, predicted] : predictions) {
    bool correct = predicted == gold.at(id);
    ++report.total_count;
    if (correct) ++report.total_correct;
    auto label = labels.find(id);
    if (label == labels.end()) {
      ++report.unlabeled_count;
      continue;
    }
    auto& outcome = report.per_category[label->second];
    ++outcome.count;
    if (correct) ++outcome.correct;
  }
  report.total_accuracy =
      report.total_count > 0
          ? static_cast<double>(report.total_correct) / report.total_count
          : 0.0;
  return report;
}

std::string render_report(const EvalReport& report) {
  std::string out;
  for (int c = 0; c < kCategoryCount; ++c) {
    auto label = static_cast<CategoryLabel>(c);
    auto it = report.per_category.find(label);
    if (it == report.per_category.end()) continue;
    out += category_display_name(label);
    out += ' ';
    out += outcome_cell(it->second);
    out += '\n';
  }
  CategoryOutcome all = labeled_totals(report);
  out += "All " + outcome_cell(all) + "\n";
  if (report.unlabeled_count > 0) {
    out += "Unlabeled " + std::to_string(report.unlabeled_count) + "\n";
    out += "Overall " + std::to_string(report.total_correct) + " (" +
           percent(report.total_accuracy) + ")\n";
  }
  return out;
}

std::string compare_systems(const EvalReport& a, const EvalReport& b,
                            const std::string& name_a,
                            const std::string& name_b) {
  auto keys = [](const EvalReport& r) {
    std::vector<CategoryLabel> out;
    for (const auto& [label, unused] : r.per_category) out.push_back(label);
    return out;
  };
  if (keys(a) != keys(b)) {
    fail(Err::CategorySetMismatch, "reports cover different category sets");
  }
  std::string out = "Category\t" + name_a + "\t" + name_b + "\n";
  for (int c = 0; c < kCategoryCount; ++c) {
    auto label = static_cast<CategoryLabel>(c);
    auto ia = a.per_category.find(label);
    if (ia == a.per_category.end()) continue;
    out += category_display_name(label);
    out += '\t';
    out += outcome_cell(ia->second);
    out += '\t';
    out += outcome_cell(b.per_category.at(label));
    out += '\n';
  }
  out += "All\t" + outcome_cell(labeled_totals(a)) + "\t" +
         outcome_cell(labeled_totals(b)) + "\n";
  return out;
}

LabelMap parse_label_file(std::string_view bytes) {
  LabelMap labels;
  std::istringstream in{std::string(bytes)};
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(Err::UnknownCategoryToken,
           "line " + std::to_string(line_no) + ": expected id<TAB>category");
    }
    std::string token = line.substr(tab + 1);
    auto label = category_from_token(token);
    if (!label) {
      fail(Err::UnknownCategoryToken,
           "line " + std::to_string(line_no) + ": unknown category '" + token + "'");
    }
    labels[line.substr(0, tab)] = *label;
  }
  return labels;
}

std::string format_label_file(const LabelMap& labels) {
  std::string out;
  for (const auto& [id, label] : labels) {
    out += id;
    out += '\t';
    out += category_token(label);
    out += '\n';
  }
  return out;
}

std::string format_ablation_report(const AblationReport& report) {
  std::string out = "group\tdev_accuracy\n";
  char buf[128];
  for (const auto& [group, acc] : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s\t%.4f\n", group.c_str(), acc);
    out += buf;
  }
  return out;
}

void dump_attention(const ReaderModel& model,
                    std::span<const ClozeExample> examples, std::ostream& out) {
  char buf[64];
  for (const auto& ex : examples) {
    auto [predicted, trace] = predict_reader(model, ex);
    (void)predicted;
    for (size_t i = 0; i < trace.alpha.size(); ++i) {
      out << ex.id << '\t' << i << '\t' << ex.passage[i] << '\t';
      // enough digits that the printed weights still sum to 1 within 1e-6
      std::snprintf(buf, sizeof(buf), "%.9f", trace.alpha[i]);
      out << buf << '\n';
    }
  }
}

}  // namespace cloze
