#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cloze/eval.hpp"
#include "cloze/features.hpp"

namespace cloze {

// Linear entity-ranking model: one weight per flattened feature coordinate
// plus an on/off mask per template group.
struct RankerModel {
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(kFeatureDim);
  std::array<uint8_t, kFeatureGroupCount> feature_mask = {1, 1, 1, 1, 1, 1, 1, 1};
};

struct RankerConfig {
  int epochs = 10;
  double learning_rate = 0.05;
  double margin = 1.0;
  double l2 = 1e-5;
  uint64_t seed = 0;
};

// One example with features extracted for every candidate.
struct RankedExample {
  std::string id;
  std::vector<EntityId> cands;            // ascending by index
  std::vector<Eigen::VectorXd> features;  // flattened, aligned with cands
  int gold_pos = -1;
};

RankedExample rank_features(const ClozeExample& ex,
                            const std::optional<std::vector<ParseArc>>& parses,
                            const FeatureConfig& config,
                            const std::optional<PosTags>& pos_tags = std::nullopt);

double score(const RankerModel& model, const Eigen::VectorXd& features);
double score(const RankerModel& model, const FeatureVector& features);

// Pairwise max-margin training over all (example, non-gold candidate) pairs,
// shuffled per epoch; returns the epoch snapshot with the best dev accuracy.
RankerModel train_ranker(std::span<const RankedExample> train,
                         std::span<const RankedExample> dev,
                         const RankerConfig& config);

// Same, with template groups switched off for the whole run (ablations).
RankerModel train_ranker_masked(
    std::span<const RankedExample> train, std::span<const RankedExample> dev,
    const RankerConfig& config,
    const std::array<uint8_t, kFeatureGroupCount>& feature_mask);

// Argmax score; ties go to the smaller entity index.
EntityId predict_ranker(const RankerModel& model, const RankedExample& ex);

double ranker_accuracy(const RankerModel& model,
                       std::span<const RankedExample> examples);

// Retrains once per named group with that group masked; rows in template
// order behind the full-model row.
AblationReport ablation_run(std::span<const RankedExample> train,
                            std::span<const RankedExample> dev,
                            const std::vector<std::string>& groups_to_drop,
                            const RankerConfig& config);

// Flat binary, magic "RNK1".
void save_ranker(const RankerModel& model, const std::filesystem::path& path);
RankerModel load_ranker(const std::filesystem::path& path);

}  // namespace cloze
