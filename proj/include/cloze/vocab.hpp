#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cloze/example.hpp"

namespace cloze {

// Frequency-ranked token table. Id 0 is <unk>, id 1 the placeholder; entity
// markers are ordinary entries but exempt from the capacity cutoff.
class Vocab {
 public:
  static constexpr int kUnkId = 0;
  static constexpr int kPlaceholderId = 1;
  static constexpr int kReservedCount = 2;

  Vocab() = default;

  int id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnkId : it->second;
  }
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  size_t capacity() const { return capacity_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> index(const std::vector<std::string>& tokens) const;

  // Rebuild from an explicit id-ordered token list (deserialization).
  static Vocab from_tokens(std::vector<std::string> tokens, size_t capacity);

  bool operator==(const Vocab& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  friend Vocab build_vocab(std::span<const ClozeExample>, size_t);
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> tokens_;
  size_t capacity_ = 0;
};

// Ranks tokens by corpus frequency (ties: earlier first occurrence), keeps
// the top ones up to capacity, and always keeps entity markers.
Vocab build_vocab(std::span<const ClozeExample> corpus, size_t capacity);

}  // namespace cloze
