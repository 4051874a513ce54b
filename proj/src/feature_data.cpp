#include <set>
#include <string>

namespace cloze::detail {

// 127 stopwords, mirrored in data/stopwords.txt.
const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an",
      "and", "any", "are", "as", "at", "be", "because", "been", "before",
      "being", "below", "between", "both", "but", "by", "can", "cannot",
      "could", "did", "do", "does", "doing", "down", "during", "each", "few",
      "for", "from", "further", "had", "has", "have", "having", "he", "her",
      "here", "hers", "herself", "him", "himself", "his", "how", "i", "if",
      "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most",
      "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
      "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
      "same", "she", "should", "so", "some", "such", "than", "that", "the",
      "their", "theirs", "them", "themselves", "then", "there", "these",
      "they", "this", "those", "through", "to", "too", "under", "until", "up",
      "very", "was", "we", "were", "what", "when", "where", "which", "while",
      "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
      "yourself", "yourselves",
  };
  return words;
}

// Common verb forms, mirrored in data/verbs.txt; the suffix heuristic in
// is_verb() catches regular inflections this list misses.
const std::set<std::string>& default_verbs() {
  static const std::set<std::string> words = {
      "add", "adds", "allow", "allows", "appear", "appears", "beat", "beats",
      "became", "become", "becomes", "begin", "begins", "began", "believe",
      "believes", "bought", "bring", "brings", "brought", "build", "builds",
      "built", "buy", "buys", "call", "calls", "came", "change", "changes",
      "come", "comes", "consider", "considers", "continue", "continues",
      "create", "creates", "cut", "cuts", "die", "dies", "expect", "expects",
      "fall", "falls", "fell", "feel", "feels", "felt", "find", "finds",
      "follow", "follows", "found", "gave", "get", "gets", "give", "gives",
      "go", "goes", "got", "grew", "grow", "grows", "happen", "happens",
      "hear", "hears", "heard", "include", "includes", "keep", "keeps",
      "kept", "kill", "kills", "knew", "know", "knows", "lead", "leads",
      "learn", "learns", "leave", "leaves", "led", "left", "lose", "loses",
      "lost", "love", "loves", "made", "make", "makes", "meet", "meets",
      "met", "move", "moves", "need", "needs", "offer", "offers", "open",
      "opens", "paid", "pay", "pays", "play", "plays", "put", "puts", "ran",
      "reach", "reaches", "read", "reads", "remain", "remains", "remember",
      "remembers", "run", "runs", "said", "sat", "saw", "say", "says", "see",
      "sees", "send", "sends", "sent", "serve", "serves", "set", "sets",
      "show", "shows", "showed", "sit", "sits", "speak", "speaks", "spend",
      "spends", "spent", "spoke", "stand", "stands", "stay", "stays", "stood",
      "stop", "stops", "take", "takes", "tell", "tells", "think", "thinks",
      "thought", "told", "took", "tried", "tries", "try", "understand",
      "understands", "understood", "use", "uses", "wait", "waits", "walk",
      "walks", "want", "wants", "watch", "watches", "went", "win", "wins",
      "won", "work", "works", "write", "writes", "wrote",
  };
  return words;
}

}  // namespace cloze::detail
