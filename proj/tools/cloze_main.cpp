// Command-line front end: corpus preparation, synthesis, statistics,
// training for both systems, evaluation, ablations, and attention dumps.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "cloze/eval.hpp"
#include "cloze/error.hpp"
#include "cloze/question_file.hpp"
#include "cloze/ranker.hpp"
#include "cloze/reader.hpp"
#include "cloze/stats.hpp"
#include "cloze/synth.hpp"

namespace fs = std::filesystem;
using namespace cloze;

namespace {

struct RankerCliOptions {
  RankerConfig config;
  std::string stopwords_path;
  std::string verbs_path;
};

FeatureConfig feature_config_from(const RankerCliOptions& opts) {
  FeatureConfig config = FeatureConfig::defaults();
  if (!opts.stopwords_path.empty()) {
    config.stopwords = FeatureConfig::load_word_list(opts.stopwords_path);
  }
  if (!opts.verbs_path.empty()) {
    config.verb_lexicon = FeatureConfig::load_word_list(opts.verbs_path);
  }
  return config;
}

std::vector<RankedExample> featurize_corpus(const std::vector<LoadedExample>& corpus,
                                            const FeatureConfig& config) {
  std::vector<RankedExample> out;
  out.reserve(corpus.size());
  for (const auto& loaded : corpus) {
    out.push_back(rank_features(loaded.example, loaded.parses, config,
                                loaded.pos_tags));
  }
  return out;
}

char model_kind(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::IoError, "cannot open model " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) fail(Err::BadModelFile, "model file too short");
  if (std::string_view(magic, 4) == "RNK1") return 'r';
  if (std::string_view(magic, 4) == "RDR1") return 'n';
  fail(Err::BadModelFile, "unrecognized model magic in " + path.string());
}

void add_ranker_options(CLI::App* cmd, RankerCliOptions& opts) {
  cmd->add_option("--epochs", opts.config.epochs, "training epochs");
  cmd->add_option("--lr", opts.config.learning_rate, "learning rate");
  cmd->add_option("--margin", opts.config.margin, "hinge margin");
  cmd->add_option("--l2", opts.config.l2, "L2 penalty");
  cmd->add_option("--stopwords", opts.stopwords_path, "stopword list file");
  cmd->add_option("--verbs", opts.verbs_path, "verb lexicon file");
}

int run(int argc, char** argv) {
  CLI::App app{"Cloze-style reading comprehension toolkit"};
  app.require_subcommand(1);

  // prep
  auto* prep = app.add_subcommand("prep", "validate, relabel, and rewrite a corpus");
  std::string prep_in, prep_out;
  bool prep_no_relabel = false;
  prep->add_option("--in", prep_in, "input corpus directory")->required();
  prep->add_option("--out", prep_out, "output directory")->required();
  prep->add_flag("--no-relabel", prep_no_relabel, "keep original marker indices");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics");
  std::string stats_in;
  stats_cmd->add_option("--in", stats_in, "corpus directory")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  SynthSpec spec;
  std::string synth_mode = "exact-match", synth_out, synth_labels;
  synth->add_option("--mode", synth_mode, "exact-match|paraphrase|partial-clue");
  synth->add_option("--n", spec.n_examples, "number of examples")->required();
  synth->add_option("--seed", spec.seed, "generator seed")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--vocab-size", spec.vocab_size, "synthetic word count");
  synth->add_option("--entities-min", spec.n_entities_range.first, "min entities");
  synth->add_option("--entities-max", spec.n_entities_range.second, "max entities");
  synth->add_option("--sentences-min", spec.passage_sentences_range.first,
                    "min sentences");
  synth->add_option("--sentences-max", spec.passage_sentences_range.second,
                    "max sentences");
  synth->add_option("--labels", synth_labels, "write category labels here");

  // train-classifier
  auto* trainc = app.add_subcommand("train-classifier", "train the feature ranker");
  std::string trainc_train, trainc_dev, trainc_model;
  RankerCliOptions trainc_opts;
  trainc->add_option("--train", trainc_train, "training corpus")->required();
  trainc->add_option("--dev", trainc_dev, "development corpus")->required();
  trainc->add_option("--seed", trainc_opts.config.seed, "training seed")->required();
  trainc->add_option("--model", trainc_model, "model output path")->required();
  add_ranker_options(trainc, trainc_opts);

  // train-reader
  auto* trainr = app.add_subcommand("train-reader", "train the attentive reader");
  std::string trainr_train, trainr_dev, trainr_model, trainr_log, trainr_pool = "final";
  ReaderConfig reader_config;
  trainr->add_option("--train", trainr_train, "training corpus")->required();
  trainr->add_option("--dev", trainr_dev, "development corpus")->required();
  trainr->add_option("--seed", reader_config.seed, "training seed")->required();
  trainr->add_option("--model", trainr_model, "model output path")->required();
  trainr->add_option("--log", trainr_log, "training log output path");
  trainr->add_option("--embed-dim", reader_config.embed_dim, "embedding width");
  trainr->add_option("--hidden", reader_config.gru_hidden, "per-direction width");
  trainr->add_option("--vocab-cap", reader_config.vocab_capacity, "vocab capacity");
  trainr->add_option("--lr", reader_config.learning_rate, "learning rate");
  trainr->add_option("--batch", reader_config.batch_size, "batch size");
  trainr->add_option("--dropout", reader_config.dropout_p, "embedding dropout");
  trainr->add_option("--clip", reader_config.clip_norm, "gradient norm cap");
  trainr->add_option("--epochs", reader_config.max_epochs, "training epochs");
  trainr->add_option("--embeddings", reader_config.pretrained_embeddings_path,
                     "pretrained embedding file");
  trainr->add_option("--question-pooling", trainr_pool, "final|mean");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a model on a corpus");
  std::string eval_model, eval_data, eval_labels, eval_ensemble;
  RankerCliOptions eval_opts;
  eval_cmd->add_option("--model", eval_model, "model file");
  eval_cmd->add_option("--data", eval_data, "corpus directory")->required();
  eval_cmd->add_option("--labels", eval_labels, "category label file");
  eval_cmd->add_option("--ensemble", eval_ensemble, "directory of reader models");
  eval_cmd->add_option("--stopwords", eval_opts.stopwords_path, "stopword list file");
  eval_cmd->add_option("--verbs", eval_opts.verbs_path, "verb lexicon file");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "feature-group ablation study");
  std::string ablate_train, ablate_dev, ablate_out, ablate_groups;
  RankerCliOptions ablate_opts;
  ablate->add_option("--train", ablate_train, "training corpus")->required();
  ablate->add_option("--dev", ablate_dev, "development corpus")->required();
  ablate->add_option("--seed", ablate_opts.config.seed, "training seed")->required();
  ablate->add_option("--out", ablate_out, "report output path");
  ablate->add_option("--groups", ablate_groups,
                     "comma-separated group names (default: all)");
  add_ranker_options(ablate, ablate_opts);

  // predict
  auto* predict = app.add_subcommand("predict", "write per-example predictions");
  std::string predict_model, predict_data, predict_out;
  RankerCliOptions predict_opts;
  predict->add_option("--model", predict_model, "model file")->required();
  predict->add_option("--data", predict_data, "corpus directory")->required();
  predict->add_option("--out", predict_out, "output path (default: stdout)");
  predict->add_option("--stopwords", predict_opts.stopwords_path, "stopword list");
  predict->add_option("--verbs", predict_opts.verbs_path, "verb lexicon");

  // inspect-attention
  auto* inspect = app.add_subcommand("inspect-attention",
                                     "dump attention weights as TSV");
  std::string inspect_model, inspect_data, inspect_out;
  inspect->add_option("--model", inspect_model, "reader model file")->required();
  inspect->add_option("--data", inspect_data, "corpus directory")->required();
  inspect->add_option("--out", inspect_out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (prep->parsed()) {
    auto corpus = load_corpus_dir(prep_in);
    fs::create_directories(prep_out);
    for (const auto& loaded : corpus) {
      const ClozeExample& original = loaded.example;
      ClozeExample out_ex =
          prep_no_relabel ? original : relabel_entities(original);
      write_example_file(out_ex, fs::path(prep_out) / (original.id + ".question"));

      fs::path in_base = fs::path(prep_in) / original.id;
      fs::path out_base = fs::path(prep_out) / original.id;
      if (original.sentence_spans_override) {
        fs::copy_file(in_base.string() + ".sents", out_base.string() + ".sents",
                      fs::copy_options::overwrite_existing);
      }
      if (auto pos_file = in_base.string() + ".pos"; fs::exists(pos_file)) {
        fs::copy_file(pos_file, out_base.string() + ".pos",
                      fs::copy_options::overwrite_existing);
      }
      if (loaded.parses) {
        auto rename = relabel_mapping(original);
        std::string deps;
        for (const auto& arc : *loaded.parses) {
          auto fix = [&](const std::string& tok) {
            if (prep_no_relabel) return tok;
            auto id = parse_marker(tok);
            if (!id) return tok;
            auto it = rename.find(*id);
            return it == rename.end() ? tok : marker(it->second);
          };
          deps += std::to_string(arc.sentence_index) + "\t" + fix(arc.head_token) +
                  "\t" + arc.relation + "\t" + fix(arc.dependent_token) + "\n";
        }
        write_file(out_base.string() + ".deps", deps);
      }
    }
    std::cout << "prepared " << corpus.size() << " examples\n";
    return 0;
  }

  if (stats_cmd->parsed()) {
    auto corpus = load_corpus_dir(stats_in);
    std::cout << format_stats(corpus_stats(examples_of(corpus)));
    return 0;
  }

  if (synth->parsed()) {
    auto mode = synth_mode_from_name(synth_mode);
    if (!mode) fail(Err::BadConfig, "unknown mode '" + synth_mode + "'");
    spec.mode = *mode;
    auto corpus = generate_synthetic(spec);
    fs::create_directories(synth_out);
    for (const auto& ex : corpus) {
      write_example_file(ex, fs::path(synth_out) / (ex.id + ".question"));
    }
    if (!synth_labels.empty()) {
      CategoryLabel label = spec.mode == SynthMode::ExactMatch
                                ? CategoryLabel::ExactMatch
                                : spec.mode == SynthMode::Paraphrase
                                      ? CategoryLabel::Paraphrasing
                                      : CategoryLabel::PartialClue;
      LabelMap labels;
      for (const auto& ex : corpus) labels[ex.id] = label;
      write_file(synth_labels, format_label_file(labels));
    }
    std::cout << "wrote " << corpus.size() << " examples to " << synth_out << "\n";
    return 0;
  }

  if (trainc->parsed()) {
    FeatureConfig fc = feature_config_from(trainc_opts);
    auto train = featurize_corpus(load_corpus_dir(trainc_train), fc);
    auto dev = featurize_corpus(load_corpus_dir(trainc_dev), fc);
    RankerModel model = train_ranker(train, dev, trainc_opts.config);
    save_ranker(model, trainc_model);
    std::cout << "dev_accuracy\t" << ranker_accuracy(model, dev) << "\n";
    return 0;
  }

  if (trainr->parsed()) {
    if (trainr_pool == "mean") {
      reader_config.question_pooling = QuestionPooling::Mean;
    } else if (trainr_pool != "final") {
      fail(Err::BadConfig, "question pooling must be final or mean");
    }
    auto train = examples_of(load_corpus_dir(trainr_train));
    auto dev = examples_of(load_corpus_dir(trainr_dev));
    TrainResult result = train_reader(train, dev, reader_config);
    save_reader(result.model, trainr_model);
    std::string log = format_training_log(result.log);
    if (!trainr_log.empty()) {
      write_file(trainr_log, log);
    } else {
      std::cout << log;
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    auto corpus = load_corpus_dir(eval_data);
    PredictionMap predictions, gold;
    for (const auto& loaded : corpus) {
      gold[loaded.example.id] = loaded.example.answer;
    }

    if (!eval_ensemble.empty()) {
      std::vector<ReaderModel> models;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(eval_ensemble)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        if (model_kind(f) == 'n') models.push_back(load_reader(f));
      }
      if (models.empty()) {
        fail(Err::IoError, "no reader models in " + eval_ensemble);
      }
      for (const auto& loaded : corpus) {
        predictions[loaded.example.id] = ensemble_predict(models, loaded.example);
      }
      std::cout << "ensemble_members\t" << models.size() << "\n";
    } else if (!eval_model.empty() && model_kind(eval_model) == 'n') {
      ReaderModel model = load_reader(eval_model);
      for (const auto& loaded : corpus) {
        predictions[loaded.example.id] = predict_reader(model, loaded.example).first;
      }
    } else if (!eval_model.empty()) {
      RankerModel model = load_ranker(eval_model);
      FeatureConfig fc = feature_config_from(eval_opts);
      for (const auto& loaded : corpus) {
        predictions[loaded.example.id] = predict_ranker(
            model, rank_features(loaded.example, loaded.parses, fc,
                                 loaded.pos_tags));
      }
    } else {
      fail(Err::BadConfig, "eval needs --model or --ensemble");
    }

    char buf[64];
    std::snprintf(buf, sizeof(buf), "accuracy\t%.4f\n",
                  accuracy(predictions, gold));
    std::cout << "examples\t" << corpus.size() << "\n" << buf;
    if (!eval_labels.empty()) {
      LabelMap labels = parse_label_file(read_file(eval_labels));
      std::cout << render_report(per_category_report(predictions, gold, labels));
    }
    return 0;
  }

  if (ablate->parsed()) {
    FeatureConfig fc = feature_config_from(ablate_opts);
    auto train = featurize_corpus(load_corpus_dir(ablate_train), fc);
    auto dev = featurize_corpus(load_corpus_dir(ablate_dev), fc);
    std::vector<std::string> groups;
    if (ablate_groups.empty()) {
      for (int g = 0; g < kFeatureGroupCount; ++g) {
        groups.push_back(group_name(static_cast<FeatureGroup>(g)));
      }
    } else {
      std::string token;
      std::istringstream in(ablate_groups);
      while (std::getline(in, token, ',')) groups.push_back(token);
    }
    AblationReport report = ablation_run(train, dev, groups, ablate_opts.config);
    std::string rendered = format_ablation_report(report);
    if (!ablate_out.empty()) {
      write_file(ablate_out, rendered);
    } else {
      std::cout << rendered;
    }
    return 0;
  }

  if (predict->parsed()) {
    auto corpus = load_corpus_dir(predict_data);
    std::string out;
    if (model_kind(predict_model) == 'n') {
      ReaderModel model = load_reader(predict_model);
      for (const auto& loaded : corpus) {
        out += loaded.example.id + "\t" +
               marker(predict_reader(model, loaded.example).first) + "\n";
      }
    } else {
      RankerModel model = load_ranker(predict_model);
      FeatureConfig fc = feature_config_from(predict_opts);
      for (const auto& loaded : corpus) {
        out += loaded.example.id + "\t" +
               marker(predict_ranker(
                   model, rank_features(loaded.example, loaded.parses, fc,
                                        loaded.pos_tags))) +
               "\n";
      }
    }
    if (!predict_out.empty()) {
      write_file(predict_out, out);
    } else {
      std::cout << out;
    }
    return 0;
  }

  if (inspect->parsed()) {
    ReaderModel model = load_reader(inspect_model);
    auto corpus = examples_of(load_corpus_dir(inspect_data));
    if (!inspect_out.empty()) {
      std::ofstream out(inspect_out, std::ios::trunc);
      if (!out) fail(Err::IoError, "cannot write " + inspect_out);
      dump_attention(model, corpus, out);
    } else {
      dump_attention(model, corpus, std::cout);
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ClozeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
