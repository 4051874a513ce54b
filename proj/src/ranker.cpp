#include "cloze/ranker.hpp"

#include <algorithm>
#include <fstream>

#include "cloze/binio.hpp"
#include "cloze/error.hpp"
#include "cloze/rng.hpp"

namespace cloze {

namespace {

Eigen::VectorXd mask_vector(const std::array<uint8_t, kFeatureGroupCount>& mask) {
  Eigen::VectorXd m = Eigen::VectorXd::Ones(kFeatureDim);
  for (int g = 0; g < kFeatureGroupCount; ++g) {
    if (mask[static_cast<size_t>(g)]) continue;
    auto [offset, len] = group_span(static_cast<FeatureGroup>(g));
    m.segment(offset, len).setZero();
  }
  return m;
}

}  // namespace

RankedExample rank_features(const ClozeExample& ex,
                            const std::optional<std::vector<ParseArc>>& parses,
                            const FeatureConfig& config,
                            const std::optional<PosTags>& pos_tags) {
  RankedExample out;
  out.id = ex.id;
  out.cands = candidates(ex);
  out.features.reserve(out.cands.size());
  for (size_t i = 0; i < out.cands.size(); ++i) {
    out.features.push_back(
        extract_features(ex, out.cands[i], parses, config, pos_tags).flatten());
    if (out.cands[i] == ex.answer) out.gold_pos = static_cast<int>(i);
  }
  return out;
}

double score(const RankerModel& model, const Eigen::VectorXd& features) {
  if (features.size() != model.weights.size()) {
    fail(Err::DimensionMismatch,
         "feature dimension " + std::to_string(features.size()) +
             " != weight dimension " + std::to_string(model.weights.size()));
  }
  return model.weights.dot(mask_vector(model.feature_mask).cwiseProduct(features));
}

double score(const RankerModel& model, const FeatureVector& features) {
  return score(model, features.flatten());
}

RankerModel train_ranker(std::span<const RankedExample> train,
                         std::span<const RankedExample> dev,
                         const RankerConfig& config) {
  return train_ranker_masked(train, dev, config,
                             {1, 1, 1, 1, 1, 1, 1, 1});
}

RankerModel train_ranker_masked(
    std::span<const RankedExample> train, std::span<const RankedExample> dev,
    const RankerConfig& config,
    const std::array<uint8_t, kFeatureGroupCount>& feature_mask) {
  if (train.empty()) fail(Err::EmptyTrainingSet, "no training examples");
  for (const auto& ex : train) {
    if (ex.gold_pos < 0 || ex.gold_pos >= static_cast<int>(ex.cands.size())) {
      fail(Err::NoGoldCandidate, "example " + ex.id + " lacks a gold candidate");
    }
  }

  RankerModel model;
  model.feature_mask = feature_mask;
  if (config.epochs <= 0) return model;

  Eigen::VectorXd mask = mask_vector(feature_mask);

  struct Pair {
    int example;
    int other;
  };
  std::vector<Pair> pairs;
  for (size_t i = 0; i < train.size(); ++i) {
    for (size_t j = 0; j < train[i].cands.size(); ++j) {
      if (static_cast<int>(j) != train[i].gold_pos) {
        pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
      }
    }
  }

  Rng rng = Rng(config.seed).stream("ranker-pairs");
  RankerModel best = model;
  double best_dev = -1.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(pairs);
    for (const auto& [ei, other] : pairs) {
      const auto& ex = train[static_cast<size_t>(ei)];
      Eigen::VectorXd gold =
          mask.cwiseProduct(ex.features[static_cast<size_t>(ex.gold_pos)]);
      Eigen::VectorXd rival =
          mask.cwiseProduct(ex.features[static_cast<size_t>(other)]);
      double violation =
          config.margin - model.weights.dot(gold) + model.weights.dot(rival);
      if (violation > 0) {
        model.weights += config.learning_rate * (gold - rival);
      }
      if (config.l2 > 0) {
        model.weights -= config.learning_rate * 2.0 * config.l2 * model.weights;
      }
    }
    if (dev.empty()) {
      best = model;
      continue;
    }
    double acc = ranker_accuracy(model, dev);
    if (acc > best_dev) {
      best_dev = acc;
      best = model;
    }
  }
  return best;
}

EntityId predict_ranker(const RankerModel& model, const RankedExample& ex) {
  if (ex.cands.empty()) {
    fail(Err::EmptyCandidateSet, "example " + ex.id + " has no candidates");
  }
  size_t best = 0;
  double best_score = score(model, ex.features[0]);
  for (size_t i = 1; i < ex.cands.size(); ++i) {
    double s = score(model, ex.features[i]);
    if (s > best_score) {  // ties keep the earlier (smaller) entity index
      best_score = s;
      best = i;
    }
  }
  return ex.cands[best];
}

double ranker_accuracy(const RankerModel& model,
                       std::span<const RankedExample> examples) {
  if (examples.empty()) return 0.0;
  long correct = 0;
  for (const auto& ex : examples) {
    if (ex.gold_pos >= 0 &&
        predict_ranker(model, ex) == ex.cands[static_cast<size_t>(ex.gold_pos)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

AblationReport ablation_run(std::span<const RankedExample> train,
                            std::span<const RankedExample> dev,
                            const std::vector<std::string>& groups_to_drop,
                            const RankerConfig& config) {
  std::vector<FeatureGroup> groups;
  for (const auto& name : groups_to_drop) {
    auto g = group_from_name(name);
    if (!g) fail(Err::UnknownGroup, "unknown feature group '" + name + "'");
    groups.push_back(*g);
  }

  AblationReport report;
  RankerModel full = train_ranker(train, dev, config);
  report.rows.emplace_back("full", ranker_accuracy(full, dev));
  for (FeatureGroup g : groups) {
    std::array<uint8_t, kFeatureGroupCount> mask = {1, 1, 1, 1, 1, 1, 1, 1};
    mask[static_cast<size_t>(g)] = 0;
    RankerModel dropped = train_ranker_masked(train, dev, config, mask);
    report.rows.emplace_back(group_name(g), ranker_accuracy(dropped, dev));
  }
  return report;
}

void save_ranker(const RankerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Err::IoError, "cannot write " + path.string());
  binio::write_bytes(out, "RNK1", 4);
  binio::write_u32(out, static_cast<uint32_t>(model.weights.size()));
  for (Eigen::Index i = 0; i < model.weights.size(); ++i) {
    binio::write_f64(out, model.weights[i]);
  }
  binio::write_u32(out, kFeatureGroupCount);
  for (uint8_t m : model.feature_mask) {
    binio::write_bytes(out, &m, 1);
  }
  if (!out) fail(Err::IoError, "short write to " + path.string());
}

RankerModel load_ranker(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::IoError, "cannot open " + path.string());
  binio::expect_magic(in, "RNK1");
  uint32_t dim = binio::read_u32(in);
  if (dim != kFeatureDim) {
    fail(Err::BadModelFile, "unexpected weight dimension " + std::to_string(dim));
  }
  RankerModel model;
  model.weights.resize(dim);
  for (uint32_t i = 0; i < dim; ++i) {
    model.weights[i] = binio::read_f64(in);
  }
  uint32_t groups = binio::read_u32(in);
  if (groups != kFeatureGroupCount) {
    fail(Err::BadModelFile, "unexpected group count " + std::to_string(groups));
  }
  for (uint32_t g = 0; g < groups; ++g) {
    binio::read_bytes(in, &model.feature_mask[g], 1);
  }
  return model;
}

}  // namespace cloze
