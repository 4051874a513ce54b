#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cloze/autodiff.hpp"
#include "cloze/example.hpp"
#include "cloze/rng.hpp"
#include "cloze/vocab.hpp"

namespace cloze {

enum class QuestionPooling { FinalConcat, Mean };

struct ReaderConfig {
  int embed_dim = 100;   // d
  int gru_hidden = 128;  // per-direction width; contextual width is twice this
  int vocab_capacity = 50000;
  double learning_rate = 0.1;
  int batch_size = 32;
  double dropout_p = 0.2;  // embedding-layer dropout, train time only
  double clip_norm = 10.0;
  int max_epochs = 30;
  uint64_t seed = 0;
  QuestionPooling question_pooling = QuestionPooling::FinalConcat;
  std::string pretrained_embeddings_path;
};

// Row-vector convention throughout: state' = f(x * W + h * U + b).
struct GruParams {
  ad::Mat Wz, Uz, bz;  // update gate
  ad::Mat Wr, Ur, br;  // reset gate
  ad::Mat Wc, Uc, bc;  // candidate
};

struct ReaderModel {
  ReaderConfig config;
  Vocab vocab;
  ad::Mat embedding;  // |V| x d
  GruParams passage_fwd, passage_bwd, question_fwd, question_bwd;
  ad::Mat attention_bilinear;  // h x h
  // One h-wide row per entity marker in the vocab, plus a trailing fallback
  // row for markers unseen at training time.
  ad::Mat output_rows;
  std::vector<int> entity_vocab_ids;  // vocab id per output row, ascending

  int hidden_width() const { return 2 * config.gru_hidden; }
  int output_row_for(int vocab_id) const;
};

struct IndexedExample {
  std::string id;
  std::vector<int> passage_ids;
  std::vector<int> question_ids;
  std::vector<EntityId> cands;  // ascending
  std::vector<int> cand_rows;   // output row per candidate
  int gold_pos = -1;
  EntityId answer;
};

struct AttentionTrace {
  std::vector<double> alpha;  // per passage position; masked ones are 0
  Eigen::VectorXd output_vector;
  std::vector<std::pair<EntityId, double>> candidate_probs;  // ascending ids
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double dev_accuracy = 0;
};

struct TrainResult {
  ReaderModel model;
  std::vector<EpochLog> log;
};

ReaderModel init_reader(const ReaderConfig& config, Vocab vocab);
IndexedExample index_example(const ReaderModel& model, const ClozeExample& ex);

// One recurrence step; reference surface for the tape-built recurrence.
Eigen::RowVectorXd gru_cell(const Eigen::RowVectorXd& prev_state,
                            const Eigen::RowVectorXd& input,
                            const GruParams& params);

// Contextual embeddings, one row per token. Recurrences run over the first
// n_real tokens only (-1 = all); any padded tail comes back as zero rows so
// masked attention ignores it. Dropout applies only in train mode.
ad::Mat encode_passage(const ReaderModel& model, const std::vector<int>& ids,
                       bool train_mode, Rng* dropout_rng = nullptr,
                       int n_real = -1);
Eigen::RowVectorXd encode_question(const ReaderModel& model,
                                   const std::vector<int>& ids, bool train_mode,
                                   Rng* dropout_rng = nullptr);

// Bilinear attention over contextual rows; mask empty = all positions real.
AttentionTrace attend(const Eigen::RowVectorXd& question_embedding,
                      const ad::Mat& contextual, const ad::Mat& bilinear,
                      const std::vector<uint8_t>& mask);

// Softmax over exactly the candidate set.
std::vector<std::pair<EntityId, double>> output_scores(
    const Eigen::RowVectorXd& output_vector, const ReaderModel& model,
    const std::vector<EntityId>& cands);

// Negative log-likelihood of the gold candidate.
double loss(const ReaderModel& model, const IndexedExample& ex, bool train_mode,
            Rng* dropout_rng = nullptr);

// Gradients of loss() w.r.t. every parameter, in parameter_list order.
ad::GradientSet loss_gradients(const ReaderModel& model, const IndexedExample& ex,
                               bool train_mode, Rng* dropout_rng = nullptr);

// Length-sorted batches, shuffled batch order, mean-loss SGD with global-norm
// clipping; returns the epoch snapshot with the best dev accuracy.
TrainResult train_reader(std::span<const ClozeExample> train,
                         std::span<const ClozeExample> dev,
                         const ReaderConfig& config);

std::pair<EntityId, AttentionTrace> predict_reader(const ReaderModel& model,
                                                   const ClozeExample& ex);
std::vector<std::pair<EntityId, double>> candidate_distribution(
    const ReaderModel& model, const ClozeExample& ex);
// Mean of the member candidate distributions, then argmax.
EntityId ensemble_predict(std::span<const ReaderModel> models,
                          const ClozeExample& ex);

double reader_accuracy(const ReaderModel& model,
                       std::span<const ClozeExample> examples);

// Flat binary, magic "RDR1": config block, vocab, entity rows, then the
// parameter tensors in declared order as 32-bit little-endian reals.
void save_reader(const ReaderModel& model, const std::filesystem::path& path);
ReaderModel load_reader(const std::filesystem::path& path);

// TSV "epoch<TAB>train_loss<TAB>dev_accuracy".
std::string format_training_log(std::span<const EpochLog> log);

// Text format: one "word v1 v2 ... vd" line per token.
void load_pretrained_embeddings(const std::string& path, const Vocab& vocab,
                                ad::Mat& embedding);

// Parameters in serialization order: embedding, the four GRU parameter sets,
// the bilinear matrix, the output rows.
std::vector<ad::Mat*> parameter_list(ReaderModel& model);
std::vector<const ad::Mat*> parameter_list(const ReaderModel& model);

}  // namespace cloze
