#include "cloze/reader.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cloze/binio.hpp"
#include "cloze/error.hpp"

namespace cloze {

using ad::Mat;
using ad::Tape;
using ad::Var;

namespace {

constexpr int kGruMatCount = 9;
constexpr int kParamCount = 1 + 4 * kGruMatCount + 2;

struct GruVars {
  Var Wz, Uz, bz, Wr, Ur, br, Wc, Uc, bc;
};

struct BoundModel {
  Var embedding;
  GruVars passage_fwd, passage_bwd, question_fwd, question_bwd;
  Var bilinear;
  Var output_rows;
};

GruVars bind_gru(Tape& tape, const GruParams& p, int first_id) {
  GruVars g;
  g.Wz = tape.parameter(first_id + 0, p.Wz);
  g.Uz = tape.parameter(first_id + 1, p.Uz);
  g.bz = tape.parameter(first_id + 2, p.bz);
  g.Wr = tape.parameter(first_id + 3, p.Wr);
  g.Ur = tape.parameter(first_id + 4, p.Ur);
  g.br = tape.parameter(first_id + 5, p.br);
  g.Wc = tape.parameter(first_id + 6, p.Wc);
  g.Uc = tape.parameter(first_id + 7, p.Uc);
  g.bc = tape.parameter(first_id + 8, p.bc);
  return g;
}

BoundModel bind(Tape& tape, const ReaderModel& m) {
  BoundModel b;
  b.embedding = tape.parameter(0, m.embedding);
  b.passage_fwd = bind_gru(tape, m.passage_fwd, 1);
  b.passage_bwd = bind_gru(tape, m.passage_bwd, 1 + kGruMatCount);
  b.question_fwd = bind_gru(tape, m.question_fwd, 1 + 2 * kGruMatCount);
  b.question_bwd = bind_gru(tape, m.question_bwd, 1 + 3 * kGruMatCount);
  b.bilinear = tape.parameter(1 + 4 * kGruMatCount, m.attention_bilinear);
  b.output_rows = tape.parameter(2 + 4 * kGruMatCount, m.output_rows);
  return b;
}

Var gru_step(const GruVars& g, Var h_prev, Var x) {
  Var z = ad::sigmoid(ad::add(ad::add(ad::matmul(x, g.Wz), ad::matmul(h_prev, g.Uz)), g.bz));
  Var r = ad::sigmoid(ad::add(ad::add(ad::matmul(x, g.Wr), ad::matmul(h_prev, g.Ur)), g.br));
  Var c = ad::tanh(ad::add(
      ad::add(ad::matmul(x, g.Wc), ad::matmul(ad::cmul(r, h_prev), g.Uc)), g.bc));
  // (1 - z) . h + z . c
  return ad::add(h_prev, ad::cmul(z, ad::sub(c, h_prev)));
}

// Embedding rows for a token sequence, with inverted dropout in train mode.
Var embed(Tape& tape, const BoundModel& b, const ReaderModel& m,
          const std::vector<int>& ids, bool train_mode, Rng* dropout_rng) {
  Var x = ad::lookup_rows(b.embedding, ids);
  if (train_mode && m.config.dropout_p > 0) {
    if (dropout_rng == nullptr) {
      fail(Err::BadConfig, "train-mode forward needs a dropout stream");
    }
    double keep = 1.0 - m.config.dropout_p;
    Mat mask(static_cast<Eigen::Index>(ids.size()), m.config.embed_dim);
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
      for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        mask(i, j) = dropout_rng->uniform_real(0.0, 1.0) < keep ? 1.0 / keep : 0.0;
      }
    }
    x = ad::apply_dropout_mask(x, tape.constant(std::move(mask)));
  }
  return x;
}

struct BiStates {
  std::vector<Var> fwd;  // fwd[i] after reading token i left-to-right
  std::vector<Var> bwd;  // bwd[i] after reading token i right-to-left
};

BiStates run_bigru(Tape& tape, Var embedded, int n, int hidden,
                   const GruVars& fwd, const GruVars& bwd) {
  std::vector<Var> xs;
  xs.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) xs.push_back(ad::row(embedded, i));

  BiStates states;
  states.fwd.resize(static_cast<size_t>(n));
  states.bwd.resize(static_cast<size_t>(n));
  Var zero = tape.constant(Mat::Zero(1, hidden));
  Var h = zero;
  for (int i = 0; i < n; ++i) {
    h = gru_step(fwd, h, xs[static_cast<size_t>(i)]);
    states.fwd[static_cast<size_t>(i)] = h;
  }
  h = zero;
  for (int i = n - 1; i >= 0; --i) {
    h = gru_step(bwd, h, xs[static_cast<size_t>(i)]);
    states.bwd[static_cast<size_t>(i)] = h;
  }
  return states;
}

// Contextual matrix over the first n_real tokens: [fwd rows | bwd rows].
Var passage_matrix(Tape& tape, const BoundModel& b, const ReaderModel& m,
                   const std::vector<int>& ids, bool train_mode,
                   Rng* dropout_rng, int n_real) {
  Var x = embed(tape, b, m, ids, train_mode, dropout_rng);
  BiStates s = run_bigru(tape, x, n_real, m.config.gru_hidden, b.passage_fwd,
                         b.passage_bwd);
  return ad::hconcat(ad::stack_rows(s.fwd), ad::stack_rows(s.bwd));
}

Var question_vector(Tape& tape, const BoundModel& b, const ReaderModel& m,
                    const std::vector<int>& ids, bool train_mode,
                    Rng* dropout_rng) {
  int n = static_cast<int>(ids.size());
  Var x = embed(tape, b, m, ids, train_mode, dropout_rng);
  BiStates s = run_bigru(tape, x, n, m.config.gru_hidden, b.question_fwd,
                         b.question_bwd);
  if (m.config.question_pooling == QuestionPooling::FinalConcat) {
    return ad::hconcat(s.fwd.back(), s.bwd.front());
  }
  Var all = ad::hconcat(ad::stack_rows(s.fwd), ad::stack_rows(s.bwd));
  Mat mean_weights = Mat::Constant(1, n, 1.0 / n);
  return ad::matmul(tape.constant(std::move(mean_weights)), all);
}

struct ForwardVars {
  Var alpha;   // 1 x m
  Var output;  // 1 x h
  Var probs;   // 1 x C, over candidates
};

ForwardVars build_forward(Tape& tape, const BoundModel& b, const ReaderModel& m,
                          const IndexedExample& ex, bool train_mode,
                          Rng* dropout_rng) {
  if (ex.passage_ids.empty()) fail(Err::EmptyPassage, ex.id);
  if (ex.question_ids.empty()) fail(Err::EmptyQuestion, ex.id);
  if (ex.cands.empty()) fail(Err::EmptyCandidateSet, ex.id);

  int m_len = static_cast<int>(ex.passage_ids.size());
  Var contextual = passage_matrix(tape, b, m, ex.passage_ids, train_mode,
                                  dropout_rng, m_len);
  Var q = question_vector(tape, b, m, ex.question_ids, train_mode, dropout_rng);

  ForwardVars fw;
  Var scores = ad::matmul(ad::matmul(q, b.bilinear), ad::transpose(contextual));
  fw.alpha = ad::masked_softmax(scores, {});
  fw.output = ad::matmul(fw.alpha, contextual);
  Var cand_block = ad::lookup_rows(b.output_rows, ex.cand_rows);
  Var logits = ad::matmul(fw.output, ad::transpose(cand_block));
  fw.probs = ad::masked_softmax(logits, {});
  return fw;
}

std::vector<std::pair<EntityId, double>> probs_to_pairs(
    const Mat& probs, const std::vector<EntityId>& cands) {
  std::vector<std::pair<EntityId, double>> out;
  out.reserve(cands.size());
  for (size_t i = 0; i < cands.size(); ++i) {
    out.emplace_back(cands[i], probs(static_cast<Eigen::Index>(i)));
  }
  return out;
}

EntityId argmax_candidate(const std::vector<std::pair<EntityId, double>>& probs) {
  size_t best = 0;
  for (size_t i = 1; i < probs.size(); ++i) {
    if (probs[i].second > probs[best].second) best = i;  // ties: smaller id
  }
  return probs[best].first;
}

void fill_uniform(Mat& m, Rng& rng, double lo, double hi) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rng.uniform_real(lo, hi);
    }
  }
}

void fill_gaussian(Mat& m, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rng.normal(0.0, stddev);
    }
  }
}

GruParams init_gru(int in_dim, int hidden, Rng& rng) {
  GruParams p;
  auto weights = [&](Mat& w, int r, int c) {
    w.resize(r, c);
    fill_gaussian(w, rng, 0.1);
  };
  weights(p.Wz, in_dim, hidden);
  weights(p.Uz, hidden, hidden);
  p.bz = Mat::Zero(1, hidden);
  weights(p.Wr, in_dim, hidden);
  weights(p.Ur, hidden, hidden);
  p.br = Mat::Zero(1, hidden);
  weights(p.Wc, in_dim, hidden);
  weights(p.Uc, hidden, hidden);
  p.bc = Mat::Zero(1, hidden);
  return p;
}

}  // namespace

int ReaderModel::output_row_for(int vocab_id) const {
  auto it = std::lower_bound(entity_vocab_ids.begin(), entity_vocab_ids.end(),
                             vocab_id);
  if (it != entity_vocab_ids.end() && *it == vocab_id) {
    return static_cast<int>(it - entity_vocab_ids.begin());
  }
  return static_cast<int>(entity_vocab_ids.size());  // fallback row
}

ReaderModel init_reader(const ReaderConfig& config, Vocab vocab) {
  if (config.embed_dim < 1 || config.gru_hidden < 1 || config.batch_size < 1 ||
      config.max_epochs < 0 || config.dropout_p < 0 || config.dropout_p >= 1) {
    fail(Err::BadConfig, "reader config out of range");
  }
  ReaderModel m;
  m.config = config;
  m.vocab = std::move(vocab);

  Rng init_rng = Rng(config.seed).stream("init");
  int d = config.embed_dim;
  int h = 2 * config.gru_hidden;

  m.embedding.resize(m.vocab.size(), d);
  fill_uniform(m.embedding, init_rng, -0.1, 0.1);

  m.passage_fwd = init_gru(d, config.gru_hidden, init_rng);
  m.passage_bwd = init_gru(d, config.gru_hidden, init_rng);
  m.question_fwd = init_gru(d, config.gru_hidden, init_rng);
  m.question_bwd = init_gru(d, config.gru_hidden, init_rng);

  m.attention_bilinear.resize(h, h);
  fill_uniform(m.attention_bilinear, init_rng, -0.01, 0.01);

  for (int id = 0; id < m.vocab.size(); ++id) {
    if (is_entity_marker(m.vocab.token(id))) m.entity_vocab_ids.push_back(id);
  }
  m.output_rows.resize(static_cast<Eigen::Index>(m.entity_vocab_ids.size()) + 1, h);
  fill_uniform(m.output_rows, init_rng, -0.01, 0.01);

  if (!config.pretrained_embeddings_path.empty()) {
    load_pretrained_embeddings(config.pretrained_embeddings_path, m.vocab,
                               m.embedding);
  }
  return m;
}

IndexedExample index_example(const ReaderModel& model, const ClozeExample& ex) {
  IndexedExample out;
  out.id = ex.id;
  out.passage_ids = model.vocab.index(ex.passage);
  out.question_ids = model.vocab.index(ex.question);
  out.cands = candidates(ex);
  out.cand_rows.reserve(out.cands.size());
  for (size_t i = 0; i < out.cands.size(); ++i) {
    int vocab_id = model.vocab.id(marker(out.cands[i]));
    out.cand_rows.push_back(model.output_row_for(vocab_id));
    if (out.cands[i] == ex.answer) out.gold_pos = static_cast<int>(i);
  }
  out.answer = ex.answer;
  return out;
}

Eigen::RowVectorXd gru_cell(const Eigen::RowVectorXd& prev_state,
                            const Eigen::RowVectorXd& input,
                            const GruParams& params) {
  Tape tape;
  GruVars g = bind_gru(tape, params, 0);
  Var h = tape.constant(Mat(prev_state));
  Var x = tape.constant(Mat(input));
  return tape.value(gru_step(g, h, x)).row(0);
}

ad::Mat encode_passage(const ReaderModel& model, const std::vector<int>& ids,
                       bool train_mode, Rng* dropout_rng, int n_real) {
  if (n_real < 0) n_real = static_cast<int>(ids.size());
  if (ids.empty() || n_real == 0) fail(Err::EmptyPassage, "no passage tokens");
  if (n_real > static_cast<int>(ids.size())) {
    fail(Err::ShapeMismatch, "n_real exceeds sequence length");
  }
  Tape tape;
  BoundModel b = bind(tape, model);
  Var p = passage_matrix(tape, b, model, ids, train_mode, dropout_rng, n_real);
  Mat out = Mat::Zero(static_cast<Eigen::Index>(ids.size()), model.hidden_width());
  out.topRows(n_real) = tape.value(p);
  return out;
}

Eigen::RowVectorXd encode_question(const ReaderModel& model,
                                   const std::vector<int>& ids, bool train_mode,
                                   Rng* dropout_rng) {
  if (ids.empty()) fail(Err::EmptyQuestion, "no question tokens");
  Tape tape;
  BoundModel b = bind(tape, model);
  Var q = question_vector(tape, b, model, ids, train_mode, dropout_rng);
  return tape.value(q).row(0);
}

AttentionTrace attend(const Eigen::RowVectorXd& question_embedding,
                      const ad::Mat& contextual, const ad::Mat& bilinear,
                      const std::vector<uint8_t>& mask) {
  if (!mask.empty()) {
    if (mask.size() != static_cast<size_t>(contextual.rows())) {
      fail(Err::ShapeMismatch, "attention mask length mismatch");
    }
    if (std::find(mask.begin(), mask.end(), uint8_t{1}) == mask.end()) {
      fail(Err::AllMasked, "attention with every position masked");
    }
  } else if (contextual.rows() == 0) {
    fail(Err::AllMasked, "attention over an empty passage");
  }

  Tape tape;
  Var q = tape.constant(Mat(question_embedding));
  Var p = tape.constant(contextual);
  Var w = tape.constant(bilinear);
  Var scores = ad::matmul(ad::matmul(q, w), ad::transpose(p));
  Var alpha = ad::masked_softmax(scores, mask);
  Var output = ad::matmul(alpha, p);

  AttentionTrace trace;
  const Mat& a = tape.value(alpha);
  trace.alpha.assign(a.data(), a.data() + a.size());
  trace.output_vector = tape.value(output).row(0).transpose();
  return trace;
}

std::vector<std::pair<EntityId, double>> output_scores(
    const Eigen::RowVectorXd& output_vector, const ReaderModel& model,
    const std::vector<EntityId>& cands) {
  if (cands.empty()) fail(Err::EmptyCandidateSet, "no candidates to score");
  Tape tape;
  Var o = tape.constant(Mat(output_vector));
  Var wa = tape.parameter(0, model.output_rows);
  std::vector<int> rows;
  rows.reserve(cands.size());
  for (EntityId c : cands) {
    rows.push_back(model.output_row_for(model.vocab.id(marker(c))));
  }
  Var logits = ad::matmul(o, ad::transpose(ad::lookup_rows(wa, rows)));
  Var probs = ad::masked_softmax(logits, {});
  return probs_to_pairs(tape.value(probs), cands);
}

double loss(const ReaderModel& model, const IndexedExample& ex, bool train_mode,
            Rng* dropout_rng) {
  if (ex.gold_pos < 0) {
    fail(Err::AnswerNotCandidate,
         "example " + ex.id + " has no gold candidate");
  }
  Tape tape;
  BoundModel b = bind(tape, model);
  ForwardVars fw = build_forward(tape, b, model, ex, train_mode, dropout_rng);
  Var nll = ad::neg(ad::log(ad::pick(fw.probs, ex.gold_pos)));
  return tape.value(nll)(0, 0);
}

ad::GradientSet loss_gradients(const ReaderModel& model, const IndexedExample& ex,
                               bool train_mode, Rng* dropout_rng) {
  if (ex.gold_pos < 0) {
    fail(Err::AnswerNotCandidate,
         "example " + ex.id + " has no gold candidate");
  }
  Tape tape;
  BoundModel b = bind(tape, model);
  ForwardVars fw = build_forward(tape, b, model, ex, train_mode, dropout_rng);
  Var nll = ad::neg(ad::log(ad::pick(fw.probs, ex.gold_pos)));
  return tape.backward(nll, kParamCount);
}

TrainResult train_reader(std::span<const ClozeExample> train,
                         std::span<const ClozeExample> dev,
                         const ReaderConfig& config) {
  if (train.empty() || dev.empty()) {
    fail(Err::EmptyCorpus, "train and dev must both be nonempty");
  }
  Vocab vocab = build_vocab(train, static_cast<size_t>(config.vocab_capacity));
  ReaderModel model = init_reader(config, std::move(vocab));

  std::vector<IndexedExample> train_idx, dev_idx;
  train_idx.reserve(train.size());
  for (const auto& ex : train) {
    auto indexed = index_example(model, ex);
    if (indexed.gold_pos < 0) {
      fail(Err::AnswerNotCandidate, "train example " + ex.id);
    }
    train_idx.push_back(std::move(indexed));
  }
  dev_idx.reserve(dev.size());
  for (const auto& ex : dev) dev_idx.push_back(index_example(model, ex));

  // Batches group consecutive examples of the length-sorted list; batch
  // order reshuffles every epoch.
  std::vector<int> order(train_idx.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return train_idx[static_cast<size_t>(a)].passage_ids.size() <
           train_idx[static_cast<size_t>(b)].passage_ids.size();
  });
  std::vector<std::vector<int>> batches;
  for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
    size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
    batches.emplace_back(order.begin() + static_cast<long>(start),
                         order.begin() + static_cast<long>(end));
  }

  Rng shuffle_rng = Rng(config.seed).stream("batches");
  Rng dropout_rng = Rng(config.seed).stream("dropout");

  std::vector<ad::Mat*> params = parameter_list(model);
  TrainResult result;
  double best_dev = -1.0;
  ReaderModel best = model;

  std::vector<int> batch_order(batches.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);

  Tape tape;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(batch_order);
    double epoch_loss = 0;
    for (int bi : batch_order) {
      const auto& batch = batches[static_cast<size_t>(bi)];
      ad::GradientSet grads(kParamCount);
      for (int ei : batch) {
        const IndexedExample& ex = train_idx[static_cast<size_t>(ei)];
        tape.reset();
        BoundModel b = bind(tape, model);
        ForwardVars fw = build_forward(tape, b, model, ex, true, &dropout_rng);
        Var nll = ad::neg(ad::log(ad::pick(fw.probs, ex.gold_pos)));
        epoch_loss += tape.value(nll)(0, 0);
        ad::accumulate(grads, tape.backward(nll, kParamCount));
      }
      ad::scale_gradients(grads, 1.0 / static_cast<double>(batch.size()));
      grads = ad::clip_global_norm(std::move(grads), config.clip_norm);
      ad::sgd_step(params, grads, config.learning_rate);
    }

    long correct = 0;
    for (const auto& ex : dev_idx) {
      tape.reset();
      BoundModel b = bind(tape, model);
      ForwardVars fw = build_forward(tape, b, model, ex, false, nullptr);
      auto probs = probs_to_pairs(tape.value(fw.probs), ex.cands);
      if (argmax_candidate(probs) == ex.answer) ++correct;
    }
    double dev_acc = static_cast<double>(correct) / static_cast<double>(dev_idx.size());
    result.log.push_back(
        {epoch, epoch_loss / static_cast<double>(train_idx.size()), dev_acc});
    if (dev_acc > best_dev) {
      best_dev = dev_acc;
      best = model;
    }
  }

  result.model = config.max_epochs > 0 ? std::move(best) : std::move(model);
  return result;
}

std::vector<std::pair<EntityId, double>> candidate_distribution(
    const ReaderModel& model, const ClozeExample& ex) {
  IndexedExample indexed = index_example(model, ex);
  Tape tape;
  BoundModel b = bind(tape, model);
  ForwardVars fw = build_forward(tape, b, model, indexed, false, nullptr);
  return probs_to_pairs(tape.value(fw.probs), indexed.cands);
}

std::pair<EntityId, AttentionTrace> predict_reader(const ReaderModel& model,
                                                   const ClozeExample& ex) {
  IndexedExample indexed = index_example(model, ex);
  Tape tape;
  BoundModel b = bind(tape, model);
  ForwardVars fw = build_forward(tape, b, model, indexed, false, nullptr);

  AttentionTrace trace;
  const Mat& a = tape.value(fw.alpha);
  trace.alpha.assign(a.data(), a.data() + a.size());
  trace.output_vector = tape.value(fw.output).row(0).transpose();
  trace.candidate_probs = probs_to_pairs(tape.value(fw.probs), indexed.cands);
  return {argmax_candidate(trace.candidate_probs), trace};
}

EntityId ensemble_predict(std::span<const ReaderModel> models,
                          const ClozeExample& ex) {
  if (models.empty()) fail(Err::EmptyCorpus, "empty ensemble");
  for (size_t i = 1; i < models.size(); ++i) {
    if (!(models[i].vocab == models[0].vocab)) {
      fail(Err::VocabMismatch, "ensemble members use different vocabularies");
    }
  }
  auto mean = candidate_distribution(models[0], ex);
  for (size_t i = 1; i < models.size(); ++i) {
    auto probs = candidate_distribution(models[i], ex);
    for (size_t j = 0; j < mean.size(); ++j) mean[j].second += probs[j].second;
  }
  for (auto& [id, p] : mean) p /= static_cast<double>(models.size());
  return argmax_candidate(mean);
}

double reader_accuracy(const ReaderModel& model,
                       std::span<const ClozeExample> examples) {
  if (examples.empty()) return 0.0;
  long correct = 0;
  for (const auto& ex : examples) {
    if (predict_reader(model, ex).first == ex.answer) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

std::vector<ad::Mat*> parameter_list(ReaderModel& m) {
  std::vector<ad::Mat*> out = {&m.embedding};
  for (GruParams* g : {&m.passage_fwd, &m.passage_bwd, &m.question_fwd,
                       &m.question_bwd}) {
    out.insert(out.end(), {&g->Wz, &g->Uz, &g->bz, &g->Wr, &g->Ur, &g->br,
                           &g->Wc, &g->Uc, &g->bc});
  }
  out.push_back(&m.attention_bilinear);
  out.push_back(&m.output_rows);
  return out;
}

std::vector<const ad::Mat*> parameter_list(const ReaderModel& m) {
  auto mutable_list = parameter_list(const_cast<ReaderModel&>(m));
  return {mutable_list.begin(), mutable_list.end()};
}

void save_reader(const ReaderModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Err::IoError, "cannot write " + path.string());
  binio::write_bytes(out, "RDR1", 4);
  binio::write_u32(out, 1);  // version
  binio::write_u32(out, static_cast<uint32_t>(m.config.embed_dim));
  binio::write_u32(out, static_cast<uint32_t>(m.config.gru_hidden));
  binio::write_u32(out, static_cast<uint32_t>(m.config.vocab_capacity));
  binio::write_u32(out, static_cast<uint32_t>(m.config.batch_size));
  binio::write_u32(out, static_cast<uint32_t>(m.config.max_epochs));
  binio::write_u32(out, m.config.question_pooling == QuestionPooling::Mean);
  binio::write_f64(out, m.config.learning_rate);
  binio::write_f64(out, m.config.dropout_p);
  binio::write_f64(out, m.config.clip_norm);
  binio::write_u64(out, m.config.seed);

  binio::write_u32(out, static_cast<uint32_t>(m.vocab.size()));
  for (const auto& tok : m.vocab.tokens()) binio::write_string(out, tok);
  binio::write_u32(out, static_cast<uint32_t>(m.entity_vocab_ids.size()));
  for (int id : m.entity_vocab_ids) {
    binio::write_u32(out, static_cast<uint32_t>(id));
  }

  for (const ad::Mat* p : parameter_list(m)) {
    binio::write_u32(out, static_cast<uint32_t>(p->rows()));
    binio::write_u32(out, static_cast<uint32_t>(p->cols()));
    for (Eigen::Index i = 0; i < p->size(); ++i) {
      binio::write_f32(out, static_cast<float>(p->data()[i]));
    }
  }
  if (!out) fail(Err::IoError, "short write to " + path.string());
}

ReaderModel load_reader(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::IoError, "cannot open " + path.string());
  binio::expect_magic(in, "RDR1");
  uint32_t version = binio::read_u32(in);
  if (version != 1) {
    fail(Err::BadModelFile, "unsupported version " + std::to_string(version));
  }

  ReaderModel m;
  m.config.embed_dim = static_cast<int>(binio::read_u32(in));
  m.config.gru_hidden = static_cast<int>(binio::read_u32(in));
  m.config.vocab_capacity = static_cast<int>(binio::read_u32(in));
  m.config.batch_size = static_cast<int>(binio::read_u32(in));
  m.config.max_epochs = static_cast<int>(binio::read_u32(in));
  m.config.question_pooling =
      binio::read_u32(in) ? QuestionPooling::Mean : QuestionPooling::FinalConcat;
  m.config.learning_rate = binio::read_f64(in);
  m.config.dropout_p = binio::read_f64(in);
  m.config.clip_norm = binio::read_f64(in);
  m.config.seed = binio::read_u64(in);

  uint32_t vocab_size = binio::read_u32(in);
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (uint32_t i = 0; i < vocab_size; ++i) {
    tokens.push_back(binio::read_string(in));
  }
  m.vocab = Vocab::from_tokens(std::move(tokens),
                               static_cast<size_t>(m.config.vocab_capacity));
  uint32_t n_entities = binio::read_u32(in);
  for (uint32_t i = 0; i < n_entities; ++i) {
    m.entity_vocab_ids.push_back(static_cast<int>(binio::read_u32(in)));
  }

  for (ad::Mat* p : parameter_list(m)) {
    uint32_t rows = binio::read_u32(in);
    uint32_t cols = binio::read_u32(in);
    p->resize(rows, cols);
    for (Eigen::Index i = 0; i < p->size(); ++i) {
      p->data()[i] = binio::read_f32(in);
    }
  }

  if (m.embedding.rows() != m.vocab.size() ||
      m.embedding.cols() != m.config.embed_dim ||
      m.output_rows.rows() !=
          static_cast<Eigen::Index>(m.entity_vocab_ids.size()) + 1 ||
      m.attention_bilinear.rows() != m.hidden_width()) {
    fail(Err::BadModelFile, "parameter shapes disagree with the config block");
  }
  return m;
}

std::string format_training_log(std::span<const EpochLog> log) {
  std::string out = "epoch\ttrain_loss\tdev_accuracy\n";
  char buf[128];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\n", row.epoch,
                  row.train_loss, row.dev_accuracy);
    out += buf;
  }
  return out;
}

void load_pretrained_embeddings(const std::string& path, const Vocab& vocab,
                                ad::Mat& embedding) {
  std::ifstream in(path);
  if (!in) fail(Err::IoError, "cannot open embeddings " + path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    if (!vocab.contains(word)) continue;
    int row = vocab.id(word);
    for (Eigen::Index j = 0; j < embedding.cols(); ++j) {
      double v;
      if (!(fields >> v)) {
        fail(Err::BadEmbeddingFile,
             "line " + std::to_string(line_no) + ": expected " +
                 std::to_string(embedding.cols()) + " values");
      }
      embedding(row, j) = v;
    }
    double extra;
    if (fields >> extra) {
      fail(Err::BadEmbeddingFile,
           "line " + std::to_string(line_no) + ": too many values");
    }
  }
}

}  // namespace cloze
