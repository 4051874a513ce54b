#include "cloze/features.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "cloze/error.hpp"

namespace cloze::detail {
const std::set<std::string>& default_stopwords();
const std::set<std::string>& default_verbs();
}  // namespace cloze::detail

namespace cloze {

const char* group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::InPassage: return "in_passage";
    case FeatureGroup::InQuestion: return "in_question";
    case FeatureGroup::Frequency: return "frequency";
    case FeatureGroup::Position: return "position";
    case FeatureGroup::Ngram: return "ngram";
    case FeatureGroup::WordDistance: return "word_distance";
    case FeatureGroup::SentenceCooccur: return "sentence_cooccur";
    case FeatureGroup::Dependency: return "dependency";
  }
  return "?";
}

std::optional<FeatureGroup> group_from_name(std::string_view name) {
  for (int g = 0; g < kFeatureGroupCount; ++g) {
    auto group = static_cast<FeatureGroup>(g);
    if (name == group_name(group)) return group;
  }
  return std::nullopt;
}

std::pair<int, int> group_span(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::InPassage: return {0, 1};
    case FeatureGroup::InQuestion: return {1, 1};
    case FeatureGroup::Frequency: return {2, 1};
    case FeatureGroup::Position: return {3, 1};
    case FeatureGroup::Ngram: return {4, kNgramFlagCount};
    case FeatureGroup::WordDistance: return {12, 1};
    case FeatureGroup::SentenceCooccur: return {13, 1};
    case FeatureGroup::Dependency: return {14, 2};
  }
  return {0, 0};
}

Eigen::VectorXd FeatureVector::flatten() const {
  Eigen::VectorXd v(kFeatureDim);
  v << f1_in_passage, f2_in_question, f3_frequency, f4_first_position,
      f5_ngram[0], f5_ngram[1], f5_ngram[2], f5_ngram[3], f5_ngram[4],
      f5_ngram[5], f5_ngram[6], f5_ngram[7], f6_word_distance,
      f7_sentence_cooccur, f8_dep_match, f8_available;
  return v;
}

FeatureConfig FeatureConfig::defaults() {
  FeatureConfig config;
  config.stopwords = detail::default_stopwords();
  config.verb_lexicon = detail::default_verbs();
  return config;
}

std::set<std::string> FeatureConfig::load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::IoError, "cannot open word list " + path);
  std::set<std::string> words;
  std::string word;
  while (in >> word) words.insert(word);
  if (words.empty()) fail(Err::BadConfig, "empty word list " + path);
  return words;
}

namespace {

std::vector<int> occurrence_positions(const std::vector<std::string>& tokens,
                                      const std::string& target) {
  std::vector<int> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == target) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool is_plain_word(const std::string& tok) {
  return !is_entity_marker(tok) && !is_placeholder(tok) &&
         !is_sentence_boundary(tok);
}

}  // namespace

bool is_verb(std::string_view token, const FeatureConfig& config) {
  std::string t(token);
  if (config.verb_lexicon.count(t)) return true;
  if (config.stopwords.count(t)) return false;
  size_t n = t.size();
  if (n >= 4 && t.compare(n - 2, 2, "ed") == 0) return true;
  if (n >= 5 && t.compare(n - 3, 3, "ing") == 0) return true;
  // -s fallback; skip -ss to avoid nouns like "miss", "class".
  if (n >= 4 && t.back() == 's' && t[n - 2] != 's') return true;
  return false;
}

std::array<double, kNgramFlagCount> ngram_match(const ClozeExample& ex,
                                                EntityId entity) {
  std::array<double, kNgramFlagCount> flags{};
  int ph = placeholder_position(ex);
  int qn = static_cast<int>(ex.question.size());
  int pn = static_cast<int>(ex.passage.size());
  std::string target = marker(entity);

  for (int pos : occurrence_positions(ex.passage, target)) {
    int max_left = 0;
    // A truncated window (either in the question or at the passage edge)
    // counts as a non-match for that side.
    for (int a = 1; a <= 2; ++a) {
      if (ph - a < 0 || pos - a < 0) break;
      if (ex.question[static_cast<size_t>(ph - a)] !=
          ex.passage[static_cast<size_t>(pos - a)]) break;
      max_left = a;
    }
    int max_right = 0;
    for (int b = 1; b <= 2; ++b) {
      if (ph + b >= qn || pos + b >= pn) break;
      if (ex.question[static_cast<size_t>(ph + b)] !=
          ex.passage[static_cast<size_t>(pos + b)]) break;
      max_right = b;
    }
    auto on = [&](NgramFlag f, int a, int b) {
      if (max_left >= a && max_right >= b) flags[f] = 1;
    };
    on(L1, 1, 0);
    on(R1, 0, 1);
    on(L1R1, 1, 1);
    on(L2, 2, 0);
    on(R2, 0, 2);
    on(L2R1, 2, 1);
    on(L1R2, 1, 2);
    on(L2R2, 2, 2);
  }
  return flags;
}

double word_distance(const ClozeExample& ex, EntityId entity,
                     const FeatureConfig& config) {
  double sentinel = config.no_occurrence_distance.value_or(
      static_cast<double>(ex.passage.size()));

  std::set<std::string> question_words;
  for (const auto& tok : ex.question) {
    if (is_plain_word(tok) && !config.stopwords.count(tok)) {
      question_words.insert(tok);
    }
  }

  std::vector<std::vector<int>> word_positions;
  for (const auto& w : question_words) {
    auto positions = occurrence_positions(ex.passage, w);
    if (!positions.empty()) word_positions.push_back(std::move(positions));
  }
  if (word_positions.empty()) return sentinel;

  auto occurrences = occurrence_positions(ex.passage, marker(entity));
  if (occurrences.empty()) return sentinel;

  double best = std::numeric_limits<double>::infinity();
  for (int occ : occurrences) {
    double sum = 0;
    for (const auto& positions : word_positions) {
      int closest = std::numeric_limits<int>::max();
      for (int p : positions) closest = std::min(closest, std::abs(p - occ));
      sum += static_cast<double>(closest);
    }
    best = std::min(best, sum / static_cast<double>(word_positions.size()));
  }
  return best;
}

double sentence_cooccurrence(const ClozeExample& ex, EntityId entity,
                             const FeatureConfig& config,
                             const std::optional<PosTags>& pos_tags) {
  std::set<std::string> question_markers;
  std::set<std::string> question_verbs;
  for (size_t i = 0; i < ex.question.size(); ++i) {
    const auto& tok = ex.question[i];
    if (auto id = parse_marker(tok)) {
      if (*id != entity) question_markers.insert(tok);
      continue;
    }
    if (!is_plain_word(tok)) continue;
    bool verb;
    if (pos_tags && pos_tags->count(static_cast<int>(i))) {
      const std::string& tag = pos_tags->at(static_cast<int>(i));
      verb = !tag.empty() && tag[0] == 'V';
    } else {
      verb = is_verb(tok, config);
    }
    if (verb) question_verbs.insert(tok);
  }

  std::string target = marker(entity);
  for (auto [start, end] : sentence_spans(ex)) {
    bool has_entity = false, has_link = false;
    for (int i = start; i < end; ++i) {
      const auto& tok = ex.passage[static_cast<size_t>(i)];
      if (tok == target) has_entity = true;
      if (question_markers.count(tok) || question_verbs.count(tok)) {
        has_link = true;
      }
    }
    if (has_entity && has_link) return 1;
  }
  return 0;
}

double dependency_match(const ClozeExample& ex, EntityId entity,
                        const std::optional<std::vector<ParseArc>>& arcs) {
  if (!arcs) {
    fail(Err::MissingParse, "no dependency arcs for " + ex.id);
  }
  std::string target = marker(entity);
  for (const auto& q : *arcs) {
    if (q.sentence_index != -1) continue;
    bool incoming = is_placeholder(q.dependent_token);
    bool outgoing = is_placeholder(q.head_token);
    if (!incoming && !outgoing) continue;
    for (const auto& p : *arcs) {
      if (p.sentence_index < 0 || p.relation != q.relation) continue;
      if (incoming && p.dependent_token == target &&
          p.head_token == q.head_token) {
        return 1;
      }
      if (outgoing && p.head_token == target &&
          p.dependent_token == q.dependent_token) {
        return 1;
      }
    }
  }
  return 0;
}

FeatureVector extract_features(const ClozeExample& ex, EntityId entity,
                               const std::optional<std::vector<ParseArc>>& parses,
                               const FeatureConfig& config,
                               const std::optional<PosTags>& pos_tags) {
  FeatureVector f;
  std::string target = marker(entity);
  auto occurrences = occurrence_positions(ex.passage, target);
  f.f1_in_passage = occurrences.empty() ? 0 : 1;
  f.f3_frequency = static_cast<double>(occurrences.size());
  if (!occurrences.empty()) {
    f.f4_first_position = static_cast<double>(occurrences.front()) /
                          static_cast<double>(ex.passage.size());
  }
  f.f2_in_question =
      occurrence_positions(ex.question, target).empty() ? 0 : 1;
  f.f5_ngram = ngram_match(ex, entity);
  f.f6_word_distance = word_distance(ex, entity, config);
  f.f7_sentence_cooccur = sentence_cooccurrence(ex, entity, config, pos_tags);
  if (parses) {
    f.f8_dep_match = dependency_match(ex, entity, parses);
    f.f8_available = 1;
  }
  return f;
}

std::vector<ParseArc> parse_deps_file(std::string_view bytes) {
  std::vector<ParseArc> arcs;
  std::istringstream in{std::string(bytes)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t pos = 0;
    while (true) {
      size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (fields.size() != 4) {
      fail(Err::BadParseFile, "expected 4 tab fields: '" + line + "'");
    }
    ParseArc arc;
    try {
      arc.sentence_index = std::stoi(fields[0]);
    } catch (const std::exception&) {
      fail(Err::BadParseFile, "bad sentence index: '" + line + "'");
    }
    arc.head_token = fields[1];
    arc.relation = fields[2];
    arc.dependent_token = fields[3];
    arcs.push_back(std::move(arc));
  }
  return arcs;
}

PosTags parse_pos_file(std::string_view bytes) {
  PosTags tags;
  std::istringstream in{std::string(bytes)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(Err::BadPosFile, "expected token_index<TAB>tag: '" + line + "'");
    }
    try {
      tags[std::stoi(line.substr(0, tab))] = line.substr(tab + 1);
    } catch (const std::exception&) {
      fail(Err::BadPosFile, "bad token index: '" + line + "'");
    }
  }
  return tags;
}

}  // namespace cloze
