#include "cloze/vocab.hpp"

#include <algorithm>

#include "cloze/error.hpp"

namespace cloze {

std::vector<int> Vocab::index(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) {
    ids.push_back(is_placeholder(tok) ? kPlaceholderId : id(tok));
  }
  return ids;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens, size_t capacity) {
  Vocab v;
  v.tokens_ = std::move(tokens);
  v.capacity_ = capacity;
  for (size_t i = 0; i < v.tokens_.size(); ++i) {
    v.ids_.emplace(v.tokens_[i], static_cast<int>(i));
  }
  return v;
}

Vocab build_vocab(std::span<const ClozeExample> corpus, size_t capacity) {
  if (corpus.empty()) fail(Err::EmptyCorpus, "cannot build vocab from nothing");
  if (capacity < Vocab::kReservedCount) {
    fail(Err::BadConfig, "vocab capacity below reserved token count");
  }

  struct Entry {
    long freq = 0;
    long first_seen = 0;
    bool is_marker = false;
  };
  std::unordered_map<std::string, Entry> counts;
  long position = 0;
  auto count = [&](const std::vector<std::string>& tokens) {
    for (const auto& tok : tokens) {
      if (is_placeholder(tok)) continue;  // reserved id
      auto [it, fresh] = counts.try_emplace(tok);
      if (fresh) {
        it->second.first_seen = position;
        it->second.is_marker = is_entity_marker(tok);
      }
      ++it->second.freq;
      ++position;
    }
  };
  for (const auto& ex : corpus) {
    count(ex.passage);
    count(ex.question);
  }

  std::vector<std::pair<std::string, Entry>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.freq != b.second.freq) return a.second.freq > b.second.freq;
    return a.second.first_seen < b.second.first_seen;
  });

  Vocab v;
  v.capacity_ = capacity;
  v.tokens_ = {std::string(kUnkToken), std::string(kPlaceholderToken)};
  for (const auto& [tok, entry] : ranked) {
    if (v.tokens_.size() < capacity || entry.is_marker) {
      v.tokens_.push_back(tok);
    }
  }
  for (size_t i = 0; i < v.tokens_.size(); ++i) {
    v.ids_.emplace(v.tokens_[i], static_cast<int>(i));
  }
  return v;
}

}  // namespace cloze
