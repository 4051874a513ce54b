#include "cloze/synth.hpp"

#include <algorithm>
#include <set>

#include "cloze/error.hpp"
#include "cloze/rng.hpp"

namespace cloze {

const char* synth_mode_name(SynthMode mode) {
  switch (mode) {
    case SynthMode::ExactMatch: return "exact-match";
    case SynthMode::Paraphrase: return "paraphrase";
    case SynthMode::PartialClue: return "partial-clue";
  }
  return "?";
}

std::optional<SynthMode> synth_mode_from_name(std::string_view name) {
  if (name == "exact-match") return SynthMode::ExactMatch;
  if (name == "paraphrase") return SynthMode::Paraphrase;
  if (name == "partial-clue") return SynthMode::PartialClue;
  return std::nullopt;
}

namespace {

struct WordPools {
  std::vector<std::string> filler;    // passage-only words
  std::vector<std::string> context;   // fact-window words
  std::vector<std::string> synonym;   // paraphrase targets, context[i] -> synonym[i]
  std::vector<std::string> qfiller;   // question-only words
};

WordPools make_pools(const SynthSpec& spec) {
  int v = spec.vocab_size;
  int nc = std::max(6, v / 4);
  int nq = std::max(4, v / 8);
  int nf = v - 2 * nc - nq;
  if (v < 24 || nf < 6) {
    fail(Err::InfeasibleSpec,
         "vocab_size " + std::to_string(v) + " too small for the word pools");
  }
  WordPools pools;
  auto fill = [](std::vector<std::string>& pool, const char* prefix, int n) {
    pool.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pool.push_back(prefix + std::to_string(i));
  };
  fill(pools.filler, "w", nf);
  fill(pools.context, "c", nc);
  fill(pools.synonym, "s", nc);
  fill(pools.qfiller, "q", nq);
  return pools;
}

void check_spec(const SynthSpec& spec) {
  if (spec.n_examples < 0) fail(Err::InfeasibleSpec, "negative example count");
  auto [e_lo, e_hi] = spec.n_entities_range;
  auto [s_lo, s_hi] = spec.passage_sentences_range;
  if (e_lo < 1 || e_hi < e_lo) fail(Err::InfeasibleSpec, "empty entity range");
  if (s_lo < 1 || s_hi < s_lo) fail(Err::InfeasibleSpec, "empty sentence range");
}

template <typename T>
const T& choice(Rng& rng, const std::vector<T>& items) {
  return items[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(items.size()) - 1))];
}

std::vector<int> distinct_ints(Rng& rng, int count, int lo, int hi) {
  std::set<int> seen;
  std::vector<int> out;
  while (static_cast<int>(out.size()) < count) {
    int v = static_cast<int>(rng.uniform_int(lo, hi));
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<ClozeExample> generate_synthetic(const SynthSpec& spec) {
  check_spec(spec);
  WordPools pools = make_pools(spec);

  std::map<std::string, std::string> table = spec.paraphrase_table;
  if (table.empty()) {
    for (size_t i = 0; i < pools.context.size(); ++i) {
      table[pools.context[i]] = pools.synonym[i];
    }
  }

  Rng rng = Rng(spec.seed).stream("synth");
  std::vector<ClozeExample> corpus;
  corpus.reserve(static_cast<size_t>(spec.n_examples));

  for (int k = 0; k < spec.n_examples; ++k) {
    int n_ent = static_cast<int>(
        rng.uniform_int(spec.n_entities_range.first, spec.n_entities_range.second));
    int n_sent = static_cast<int>(rng.uniform_int(spec.passage_sentences_range.first,
                                                  spec.passage_sentences_range.second));

    std::vector<int> raw = distinct_ints(rng, n_ent, 0, 4 * n_ent + 8);
    rng.shuffle(raw);
    EntityId gold{raw[0]};
    std::optional<EntityId> swapped_decoy, onesided_decoy;
    if (n_ent >= 2 && n_sent >= 2) swapped_decoy = EntityId{raw[1]};
    if (n_ent >= 3 && n_sent >= 3) onesided_decoy = EntityId{raw[2]};

    // Four distinct window words: question reads [cL2 cL1 @placeholder cR1 cR2].
    std::vector<int> ctx_idx =
        distinct_ints(rng, 4, 0, static_cast<int>(pools.context.size()) - 1);
    std::string cL2 = pools.context[static_cast<size_t>(ctx_idx[0])];
    std::string cL1 = pools.context[static_cast<size_t>(ctx_idx[1])];
    std::string cR1 = pools.context[static_cast<size_t>(ctx_idx[2])];
    std::string cR2 = pools.context[static_cast<size_t>(ctx_idx[3])];

    auto fillers = [&](int count) {
      std::vector<std::string> words;
      for (int i = 0; i < count; ++i) words.push_back(choice(rng, pools.filler));
      return words;
    };

    // Sentence roles at shuffled slots.
    std::vector<int> slots(static_cast<size_t>(n_sent));
    for (int i = 0; i < n_sent; ++i) slots[static_cast<size_t>(i)] = i;
    rng.shuffle(slots);
    int fact_slot = slots[0];
    int swapped_slot = swapped_decoy ? slots[1] : -1;
    int onesided_slot = onesided_decoy ? slots[2] : -1;

    std::vector<std::vector<std::string>> sentences(static_cast<size_t>(n_sent));
    for (int s = 0; s < n_sent; ++s) {
      auto& sent = sentences[static_cast<size_t>(s)];
      if (s == fact_slot) {
        sent = fillers(static_cast<int>(rng.uniform_int(0, 2)));
        sent.insert(sent.end(), {cL2, cL1, marker(gold), cR1, cR2});
        auto post = fillers(static_cast<int>(rng.uniform_int(1, 2)));
        sent.insert(sent.end(), post.begin(), post.end());
      } else if (s == swapped_slot) {
        // Same window words, reordered: ties the word-distance feature with
        // the gold occurrence while never matching both neighbors.
        sent = fillers(static_cast<int>(rng.uniform_int(0, 2)));
        sent.insert(sent.end(),
                    {cL1, cL2, marker(*swapped_decoy), cR2, cR1});
        auto post = fillers(static_cast<int>(rng.uniform_int(1, 2)));
        sent.insert(sent.end(), post.begin(), post.end());
      } else if (s == onesided_slot) {
        bool left_side = spec.mode == SynthMode::PartialClue
                             ? true
                             : rng.uniform_int(0, 1) == 0;
        sent = fillers(static_cast<int>(rng.uniform_int(1, 2)));
        if (left_side) {
          sent.push_back(cL1);
          sent.push_back(marker(*onesided_decoy));
        } else {
          sent.push_back(marker(*onesided_decoy));
          sent.push_back(cR1);
        }
        auto post = fillers(static_cast<int>(rng.uniform_int(1, 3)));
        sent.insert(sent.end(), post.begin(), post.end());
      } else {
        sent = fillers(static_cast<int>(rng.uniform_int(4, 7)));
      }
      sent.push_back(".");
    }

    // Remaining entities and occasional repeat mentions go to regular slots,
    // or before the closing period when every slot has a role.
    std::vector<int> regular_slots;
    for (int s = 0; s < n_sent; ++s) {
      if (s != fact_slot && s != swapped_slot && s != onesided_slot) {
        regular_slots.push_back(s);
      }
    }
    auto place_entity = [&](EntityId id) {
      int slot = regular_slots.empty()
                     ? static_cast<int>(rng.uniform_int(0, n_sent - 1))
                     : regular_slots[static_cast<size_t>(rng.uniform_int(
                           0, static_cast<int64_t>(regular_slots.size()) - 1))];
      auto& sent = sentences[static_cast<size_t>(slot)];
      if (regular_slots.empty() || slot == fact_slot || slot == swapped_slot ||
          slot == onesided_slot) {
        sent.insert(sent.end() - 1, marker(id));
      } else {
        int pos = static_cast<int>(
            rng.uniform_int(0, static_cast<int64_t>(sent.size()) - 2));
        sent.insert(sent.begin() + pos, marker(id));
      }
    };
    for (size_t i = 3; i < raw.size(); ++i) place_entity(EntityId{raw[i]});
    for (int idx : raw) {
      if (rng.uniform_real(0.0, 1.0) < 0.3) place_entity(EntityId{idx});
    }

    ClozeExample ex;
    ex.source_id = std::string("synth-") + synth_mode_name(spec.mode) + "-" +
                   std::to_string(k);
    ex.id = ex.source_id;
    for (const auto& sent : sentences) {
      ex.passage.insert(ex.passage.end(), sent.begin(), sent.end());
    }

    // Question: filler padding around the copied window.
    auto qfill = [&](int count) {
      std::vector<std::string> words;
      for (int i = 0; i < count; ++i) words.push_back(choice(rng, pools.qfiller));
      return words;
    };
    std::vector<std::string> window;
    switch (spec.mode) {
      case SynthMode::ExactMatch:
        window = {cL2, cL1, std::string(kPlaceholderToken), cR1, cR2};
        break;
      case SynthMode::Paraphrase: {
        window = {cL2, cL1, std::string(kPlaceholderToken), cR1, cR2};
        for (auto& w : window) {
          if (auto it = table.find(w); it != table.end()) w = it->second;
        }
        break;
      }
      case SynthMode::PartialClue:
        // Single overlapping content word, kept away from the placeholder so
        // no n-gram window can fire.
        window = {choice(rng, pools.qfiller), std::string(kPlaceholderToken),
                  choice(rng, pools.qfiller), cR1,
                  choice(rng, pools.qfiller)};
        break;
    }
    ex.question = qfill(static_cast<int>(rng.uniform_int(0, 2)));
    ex.question.insert(ex.question.end(), window.begin(), window.end());
    auto qpost = qfill(static_cast<int>(rng.uniform_int(0, 2)));
    ex.question.insert(ex.question.end(), qpost.begin(), qpost.end());

    ex.answer = gold;
    for (int idx : raw) {
      ex.entity_strings[EntityId{idx}] = "name" + std::to_string(idx);
    }

    validate_example(ex);
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

}  // namespace cloze
