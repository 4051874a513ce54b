#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cloze/example.hpp"

namespace cloze {

struct ReaderModel;

// Hand-analysis taxonomy, in report row order.
enum class CategoryLabel {
  ExactMatch = 0,
  Paraphrasing,
  PartialClue,
  MultipleSentences,
  CoreferenceError,
  AmbiguousHard,
};
inline constexpr int kCategoryCount = 6;

const char* category_display_name(CategoryLabel c);  // "Exact match" ...
const char* category_token(CategoryLabel c);         // "exact-match" ...
std::optional<CategoryLabel> category_from_token(std::string_view token);

struct CategoryOutcome {
  int count = 0;
  int correct = 0;
  double accuracy() const {
    return count > 0 ? static_cast<double>(correct) / count : 0.0;
  }
};

struct EvalReport {
  int total_count = 0;
  int total_correct = 0;
  double total_accuracy = 0;  // over every evaluated example
  std::map<CategoryLabel, CategoryOutcome> per_category;
  int unlabeled_count = 0;
};

using PredictionMap = std::map<std::string, EntityId>;
using LabelMap = std::map<std::string, CategoryLabel>;

// Fraction of exact matches; the key sets must agree.
double accuracy(const PredictionMap& predictions, const PredictionMap& gold);

// Labels may cover a subset of the examples; the rest are tallied as
// unlabeled. Throws KeyMismatch when predictions and gold disagree on keys.
EvalReport per_category_report(const PredictionMap& predictions,
                               const PredictionMap& gold,
                               const LabelMap& labels);

// Rows "Category correct (pct%)" plus an "All" row over the labeled items.
std::string render_report(const EvalReport& report);

// Two-system table in category row order; presentation only.
std::string compare_systems(const EvalReport& a, const EvalReport& b,
                            const std::string& name_a = "A",
                            const std::string& name_b = "B");

// TSV "example_id<TAB>category-token".
LabelMap parse_label_file(std::string_view bytes);
std::string format_label_file(const LabelMap& labels);

struct AblationReport {
  // ("full", accuracy) first, then one row per dropped group.
  std::vector<std::pair<std::string, double>> rows;
};
std::string format_ablation_report(const AblationReport& report);

// TSV rows "example_id<TAB>position<TAB>token<TAB>alpha" over real positions.
void dump_attention(const ReaderModel& model,
                    std::span<const ClozeExample> examples, std::ostream& out);

}  // namespace cloze
