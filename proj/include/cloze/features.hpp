#pragma once

#include <Eigen/Core>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cloze/example.hpp"

namespace cloze {

// Flag order for the n-gram template: left/right windows of one or two words.
enum NgramFlag { L1 = 0, R1, L1R1, L2, R2, L2R1, L1R2, L2R2 };
inline constexpr int kNgramFlagCount = 8;

enum class FeatureGroup {
  InPassage = 0,
  InQuestion,
  Frequency,
  Position,
  Ngram,
  WordDistance,
  SentenceCooccur,
  Dependency,
};
inline constexpr int kFeatureGroupCount = 8;
// f1 f2 f3 f4 | f5 x8 | f6 f7 | f8 f8_available
inline constexpr int kFeatureDim = 16;

const char* group_name(FeatureGroup g);
std::optional<FeatureGroup> group_from_name(std::string_view name);
// [offset, offset+length) of a group inside the flattened vector.
std::pair<int, int> group_span(FeatureGroup g);

// Per-(example, entity) values for the eight hand-designed templates.
struct FeatureVector {
  double f1_in_passage = 0;
  double f2_in_question = 0;
  double f3_frequency = 0;
  double f4_first_position = 0;  // first occurrence index / passage length
  std::array<double, kNgramFlagCount> f5_ngram{};
  double f6_word_distance = 0;
  double f7_sentence_cooccur = 0;
  double f8_dep_match = 0;
  double f8_available = 0;

  Eigen::VectorXd flatten() const;
  bool operator==(const FeatureVector&) const = default;
};

// One dependency arc head --relation--> dependent; sentence_index -1 marks
// the question parse, >= 0 a passage sentence.
struct ParseArc {
  int sentence_index = 0;
  std::string head_token;
  std::string relation;
  std::string dependent_token;
};

struct FeatureConfig {
  std::set<std::string> stopwords;
  std::set<std::string> verb_lexicon;
  // Sentinel for word_distance when no non-stop question word occurs in the
  // passage; unset means "passage length".
  std::optional<double> no_occurrence_distance;

  static FeatureConfig defaults();
  static std::set<std::string> load_word_list(const std::string& path);
};

// POS tags for question tokens (sidecar ".pos": token_index<TAB>tag).
using PosTags = std::map<int, std::string>;

FeatureVector extract_features(const ClozeExample& ex, EntityId entity,
                               const std::optional<std::vector<ParseArc>>& parses,
                               const FeatureConfig& config,
                               const std::optional<PosTags>& pos_tags = std::nullopt);

std::array<double, kNgramFlagCount> ngram_match(const ClozeExample& ex, EntityId entity);
double word_distance(const ClozeExample& ex, EntityId entity, const FeatureConfig& config);
double sentence_cooccurrence(const ClozeExample& ex, EntityId entity,
                             const FeatureConfig& config,
                             const std::optional<PosTags>& pos_tags = std::nullopt);
// Throws MissingParse when arcs are absent.
double dependency_match(const ClozeExample& ex, EntityId entity,
                        const std::optional<std::vector<ParseArc>>& arcs);

bool is_verb(std::string_view token, const FeatureConfig& config);

std::vector<ParseArc> parse_deps_file(std::string_view bytes);
PosTags parse_pos_file(std::string_view bytes);

}  // namespace cloze
