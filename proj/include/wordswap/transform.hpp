#pragma once

// Challenge-set construction: control sampling, the word-pair swap, the
// one-sided substitution, ex-situ context copying and provisional labels.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wordswap/challenge.hpp"
#include "wordswap/corpus.hpp"

namespace wordswap {

enum class Side { premise, hypothesis };

inline std::string_view to_string(Side s) { return s == Side::premise ? "premise" : "hypothesis"; }

/// Fixes "a"/"an" immediately before each changed position.
inline void repair_determiners(Tokens& tokens, const std::vector<std::size_t>& changed) {
    for (auto pos : changed) {
        if (pos == 0 || pos >= tokens.size() || tokens[pos].empty()) continue;
        auto& det = tokens[pos - 1];
        if (det != "a" && det != "an") continue;
        char c = tokens[pos].front();
        bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
        det = vowel ? "an" : "a";
    }
}

namespace detail {

inline std::vector<std::size_t> exchange(Tokens& tokens, const std::string& x, const std::string& y) {
    std::vector<std::size_t> changed;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == x) {
            tokens[i] = y;
            changed.push_back(i);
        } else if (tokens[i] == y) {
            tokens[i] = x;
            changed.push_back(i);
        }
    }
    return changed;
}

inline void rebuild_raw(Instance& inst) {
    inst.raw_premise = detokenize(inst.premise);
    inst.raw_hypothesis = detokenize(inst.hypothesis);
}

}  // namespace detail

/// Exchanges w1 and w2 everywhere on both sides. Requires w1 in the premise
/// and w2 in the hypothesis. Ex-situ instances pass `repair = false` so the
/// two sides keep differing in the pair slot only.
inline Instance swap(const Instance& inst, const WordPair& pair, bool repair = true) {
    if (!contains(inst.premise, pair.w1))
        throw Error("precondition", "swap: '" + pair.w1 + "' not found in premise of '" + inst.id + "'");
    if (!contains(inst.hypothesis, pair.w2))
        throw Error("precondition",
                    "swap: '" + pair.w2 + "' not found in hypothesis of '" + inst.id + "'");
    Instance out = inst;
    auto changed_p = detail::exchange(out.premise, pair.w1, pair.w2);
    auto changed_h = detail::exchange(out.hypothesis, pair.w1, pair.w2);
    if (repair) {
        repair_determiners(out.premise, changed_p);
        repair_determiners(out.hypothesis, changed_h);
    }
    detail::rebuild_raw(out);
    return out;
}

/// Per-side sentence frequencies (number of instances containing a token).
class TokenFrequency {
public:
    explicit TokenFrequency(const Corpus& corpus) {
        for (const auto& inst : corpus.instances()) {
            for (const auto& tok : std::set<std::string>(inst.premise.begin(), inst.premise.end()))
                ++premise_[tok];
            for (const auto& tok :
                 std::set<std::string>(inst.hypothesis.begin(), inst.hypothesis.end()))
                ++hypothesis_[tok];
        }
    }

    std::size_t premise(const std::string& w) const { return lookup(premise_, w); }
    std::size_t hypothesis(const std::string& w) const { return lookup(hypothesis_, w); }
    /// Frequency on whichever side the word is more common.
    std::size_t best(const std::string& w) const { return std::max(premise(w), hypothesis(w)); }

private:
    static std::size_t lookup(const std::unordered_map<std::string, std::size_t>& m,
                              const std::string& w) {
        auto it = m.find(w);
        return it == m.end() ? 0 : it->second;
    }
    std::unordered_map<std::string, std::size_t> premise_;
    std::unordered_map<std::string, std::size_t> hypothesis_;
};

inline constexpr std::size_t kDefaultMinFrequency = 10;

/// Replaces every occurrence of the pair member on `side` (w1 for premise,
/// w2 for hypothesis) with `replacement`.
inline Instance substitute(const Instance& inst, const WordPair& pair, const std::string& replacement,
                           Side side, const TokenFrequency& freq,
                           std::size_t min_frequency = kDefaultMinFrequency) {
    const std::string& target = side == Side::premise ? pair.w1 : pair.w2;
    if (replacement == target)
        throw Error("precondition", "substitute: replacement equals replaced word '" + target + "'");
    const Tokens& tokens = side == Side::premise ? inst.premise : inst.hypothesis;
    if (!contains(tokens, target))
        throw Error("precondition", "substitute: '" + target + "' not found in " +
                                        std::string(to_string(side)) + " of '" + inst.id + "'");
    auto f = freq.best(replacement);
    if (f < min_frequency)
        throw Error("below_threshold", "substitute: '" + replacement + "' occurs " +
                                           std::to_string(f) + " times in training, need " +
                                           std::to_string(min_frequency));
    Instance out = inst;
    Tokens& dst = side == Side::premise ? out.premise : out.hypothesis;
    std::vector<std::size_t> changed;
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (dst[i] == target) {
            dst[i] = replacement;
            changed.push_back(i);
        }
    }
    repair_determiners(dst, changed);
    detail::rebuild_raw(out);
    return out;
}

/// Seeded coin flip, independent of processing order.
inline Side choose_side(std::uint64_t seed, std::string_view instance_id) {
    auto h = fnv1a64(instance_id);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    std::mt19937_64 rng(seq);
    return (rng() & 1U) == 0 ? Side::premise : Side::hypothesis;
}

struct Skip {
    std::string reason;
};

using ExSitu = std::variant<Instance, Skip>;

/// Copies the `context` side into both positions; the pair slot holds w1 in
/// the premise and w2 in the hypothesis. Determiners are left as copied.
inline ExSitu make_ex_situ_from(const Instance& inst, const WordPair& pair, Side context) {
    const Tokens& src = context == Side::premise ? inst.premise : inst.hypothesis;
    const std::string& slot_word = context == Side::premise ? pair.w1 : pair.w2;
    const std::string& other_word = context == Side::premise ? pair.w2 : pair.w1;
    auto n = count_of(src, slot_word);
    if (n == 0)
        throw Error("precondition", "ex-situ: '" + slot_word + "' not found in " +
                                        std::string(to_string(context)) + " of '" + inst.id + "'");
    if (n > 1)
        return Skip{"ambiguous slot: '" + slot_word + "' occurs " + std::to_string(n) +
                    " times in the " + std::string(to_string(context))};
    if (contains(src, other_word))
        return Skip{"ambiguous slot: '" + other_word + "' also occurs in the " +
                    std::string(to_string(context))};
    auto pos = static_cast<std::size_t>(std::find(src.begin(), src.end(), slot_word) - src.begin());
    Instance out = inst;
    out.premise = src;
    out.hypothesis = src;
    out.premise[pos] = pair.w1;
    out.hypothesis[pos] = pair.w2;
    detail::rebuild_raw(out);
    return out;
}

inline ExSitu make_ex_situ(const Instance& inst, const WordPair& pair, std::uint64_t seed) {
    return make_ex_situ_from(inst, pair, choose_side(seed, inst.id));
}

// ---------------------------------------------------------------------------
// Control sampling

enum class PairFamily { antonym, hypernymy };

inline bool in_family(PairFamily f, Relation r) {
    return f == PairFamily::antonym ? r == Relation::antonym
                                    : (r == Relation::hypernym || r == Relation::hyponym);
}

/// Collects every instance containing a family pair (w1 in premise, w2 in
/// hypothesis), optionally filtered by gold label. Ties between matching
/// pairs resolve to the smallest (w1, w2). Output is sorted by corpus id.
inline ChallengeSet sample_controls(const Corpus& corpus, const OccurrenceIndex& index,
                                    const std::vector<WordPair>& pairs, PairFamily family,
                                    std::optional<Label> label_filter, std::uint64_t seed = 0) {
    const SetRole role = family == PairFamily::antonym ? SetRole::I_A : SetRole::I_H;
    std::map<std::string, WordPair> chosen;
    for (const auto& p : pairs) {
        if (!in_family(family, p.relation)) continue;
        for (const auto& id : index.ids(p)) {
            auto [it, inserted] = chosen.emplace(id, p);
            if (!inserted && p < it->second) it->second = p;
        }
    }
    ChallengeSet set(role);
    set.provenance.corpus_digest = corpus.source_digest;
    set.provenance.seed = seed;
    for (const auto& [id, pair] : chosen) {
        const Instance* inst = corpus.find(id);
        if (!inst) throw Error("internal", "indexed id '" + id + "' missing from corpus");
        if (label_filter && inst->gold != *label_filter) continue;
        ChallengeInstance ci;
        ci.id = id + ":" + std::string(to_string(role));
        ci.role = role;
        ci.control_id = ci.id;
        ci.premise = inst->premise;
        ci.hypothesis = inst->hypothesis;
        ci.raw_premise = inst->raw_premise;
        ci.raw_hypothesis = inst->raw_hypothesis;
        ci.pair = pair;
        ci.label = inst->gold;
        ci.status = LabelStatus::gold_from_corpus;
        ci.seed = seed;
        set.add(std::move(ci));
    }
    return set;
}

struct ProvisionalLabel {
    std::optional<Label> label;
    LabelStatus status;

    bool operator==(const ProvisionalLabel&) const = default;
};

/// `pair` is positioned as in the new instance.
inline ProvisionalLabel assign_provisional_label(std::optional<Label> control_label, SetRole role,
                                                 const WordPair& pair) {
    switch (role) {
        case SetRole::I_A:
        case SetRole::I_H: return {control_label, LabelStatus::gold_from_corpus};
        case SetRole::I_TA1:
        case SetRole::E_TA:
        case SetRole::E_A: return {Label::contradiction, LabelStatus::heuristic};
        case SetRole::E_H:
            // premise holds the hyponym when w2 is its hypernym
            if (pair.relation == Relation::hypernym) return {Label::entailment, LabelStatus::heuristic};
            if (pair.relation == Relation::hyponym) return {Label::neutral, LabelStatus::heuristic};
            return {std::nullopt, LabelStatus::needs_annotation};
        case SetRole::I_TA2:
        case SetRole::I_TA3:
        case SetRole::I_TH:
        case SetRole::E_TH: return {std::nullopt, LabelStatus::needs_annotation};
    }
    return {std::nullopt, LabelStatus::needs_annotation};
}

// ---------------------------------------------------------------------------
// Set builder

struct SkipRecord {
    std::string control_id;
    SetRole role;
    std::string reason;
};

struct BuildOptions {
    PairFamily family = PairFamily::antonym;
    std::uint64_t seed = 0;
    std::size_t min_frequency = kDefaultMinFrequency;
};

struct BuildResult {
    std::map<SetRole, ChallengeSet> sets;
    std::vector<SkipRecord> skipped;
};

inline Instance as_instance(const ChallengeInstance& ci) {
    Instance inst;
    inst.id = ci.id;
    inst.premise = ci.premise;
    inst.hypothesis = ci.hypothesis;
    inst.raw_premise = ci.raw_premise;
    inst.raw_hypothesis = ci.raw_hypothesis;
    inst.gold = ci.label.value_or(Label::neutral);
    return inst;
}

namespace detail {

inline std::string source_id(const ChallengeInstance& control) {
    auto pos = control.id.rfind(':');
    return pos == std::string::npos ? control.id : control.id.substr(0, pos);
}

inline ChallengeInstance derive(const ChallengeInstance& control, const Instance& text, SetRole role,
                                WordPair pair, std::uint64_t seed) {
    ChallengeInstance ci;
    ci.id = source_id(control) + ":" + std::string(to_string(role));
    ci.role = role;
    ci.control_id = control.id;
    ci.premise = text.premise;
    ci.hypothesis = text.hypothesis;
    ci.raw_premise = text.raw_premise;
    ci.raw_hypothesis = text.raw_hypothesis;
    auto lbl = assign_provisional_label(control.label, role, pair);
    ci.pair = std::move(pair);
    ci.label = lbl.label;
    ci.status = lbl.status;
    ci.seed = seed;
    return ci;
}

struct Candidate {
    std::string word;
    Relation relation_to_anchor;  // what `word` is with respect to the anchor
    std::size_t frequency;
};

class SubstitutionTable {
public:
    SubstitutionTable(const std::vector<WordPair>& lexicon, const TokenFrequency& freq,
                      std::size_t min_frequency) {
        auto add = [&](const std::string& anchor, const std::string& word, Relation rel) {
            if (rel == Relation::antonym) return;
            auto f = freq.best(word);
            if (f < min_frequency) return;
            by_anchor_[anchor].push_back({word, rel, f});
        };
        for (const auto& p : lexicon) {
            add(p.w1, p.w2, p.relation);
            add(p.w2, p.w1, inverse(p.relation));
        }
        for (auto& [anchor, cands] : by_anchor_) {
            std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
                if (a.frequency != b.frequency) return a.frequency > b.frequency;
                if (a.word != b.word) return a.word < b.word;
                return a.relation_to_anchor < b.relation_to_anchor;
            });
        }
    }

    /// Most frequent eligible candidate related to `anchor`, excluding `banned`.
    std::optional<Candidate> best(const std::string& anchor,
                                  std::initializer_list<std::string_view> banned) const {
        auto it = by_anchor_.find(anchor);
        if (it == by_anchor_.end()) return std::nullopt;
        for (const auto& c : it->second)
            if (std::find(banned.begin(), banned.end(), c.word) == banned.end()) return c;
        return std::nullopt;
    }

private:
    std::map<std::string, std::vector<Candidate>> by_anchor_;
};

}  // namespace detail

/// Builds the control set for `opts.family` and every transformed set that
/// derives from it. `substitutions` supplies I_TA2/I_TA3 candidates.
inline BuildResult build_challenge_sets(const Corpus& corpus, const Lexicon& lexicon,
                                        const std::vector<WordPair>& substitutions,
                                        const BuildOptions& opts) {
    BuildResult result;
    auto index = build_index(corpus, lexicon.pairs);
    const bool antonyms = opts.family == PairFamily::antonym;
    std::optional<Label> filter;
    if (antonyms) filter = Label::contradiction;
    auto controls = sample_controls(corpus, index, lexicon.pairs, opts.family, filter, opts.seed);
    controls.provenance.lexicon_digest = lexicon.source_digest;

    const SetRole swapped_role = antonyms ? SetRole::I_TA1 : SetRole::I_TH;
    const SetRole exsitu_role = antonyms ? SetRole::E_A : SetRole::E_H;
    const SetRole exsitu_swapped_role = antonyms ? SetRole::E_TA : SetRole::E_TH;

    auto fresh = [&](SetRole r) {
        ChallengeSet s(r);
        s.provenance = controls.provenance;
        return s;
    };
    ChallengeSet swapped = fresh(swapped_role), exsitu = fresh(exsitu_role),
                 exsitu_swapped = fresh(exsitu_swapped_role), sub_hyp = fresh(SetRole::I_TA2),
                 sub_prem = fresh(SetRole::I_TA3);

    auto skip = [&](const std::string& id, SetRole r, std::string reason) {
        result.skipped.push_back({id, r, std::move(reason)});
    };

    // A clean swap needs w2 absent from the premise and w1 absent from the hypothesis.
    auto swappable = [](const ChallengeInstance& ci) -> std::optional<std::string> {
        if (contains(ci.premise, ci.pair.w2))
            return "'" + ci.pair.w2 + "' occurs in the premise too";
        if (contains(ci.hypothesis, ci.pair.w1))
            return "'" + ci.pair.w1 + "' occurs in the hypothesis too";
        return std::nullopt;
    };

    TokenFrequency freq(corpus);
    detail::SubstitutionTable subs(substitutions, freq, opts.min_frequency);

    for (const auto& control : controls.instances()) {
        const Instance text = as_instance(control);

        if (auto why = swappable(control)) {
            skip(control.id, swapped_role, *why);
        } else {
            swapped.add(detail::derive(control, swap(text, control.pair), swapped_role,
                                       control.pair.reversed(), opts.seed));
        }

        auto ex = make_ex_situ(text, control.pair, opts.seed);
        if (auto* s = std::get_if<Skip>(&ex)) {
            skip(control.id, exsitu_role, s->reason);
        } else {
            auto& ex_text = std::get<Instance>(ex);
            auto ex_ci = detail::derive(control, ex_text, exsitu_role, control.pair, opts.seed);
            if (auto why = swappable(ex_ci)) {
                skip(ex_ci.id, exsitu_swapped_role, *why);
            } else {
                exsitu_swapped.add(detail::derive(ex_ci, swap(ex_text, control.pair, false),
                                                  exsitu_swapped_role, control.pair.reversed(),
                                                  opts.seed));
            }
            exsitu.add(std::move(ex_ci));
        }

        if (!antonyms) continue;
        const auto& p = control.pair;
        // hypothesis side: replace w2 with a word related to w1
        if (auto c = subs.best(p.w1, {p.w1, p.w2})) {
            WordPair np{p.w1, c->word, c->relation_to_anchor};
            sub_hyp.add(detail::derive(control,
                                       substitute(text, p, c->word, Side::hypothesis, freq,
                                                  opts.min_frequency),
                                       SetRole::I_TA2, np, opts.seed));
        } else {
            skip(control.id, SetRole::I_TA2, "no substitution candidate for '" + p.w1 + "'");
        }
        // premise side: replace w1 with a word related to w2
        if (auto c = subs.best(p.w2, {p.w1, p.w2})) {
            WordPair np{c->word, p.w2, inverse(c->relation_to_anchor)};
            sub_prem.add(detail::derive(control,
                                        substitute(text, p, c->word, Side::premise, freq,
                                                   opts.min_frequency),
                                        SetRole::I_TA3, np, opts.seed));
        } else {
            skip(control.id, SetRole::I_TA3, "no substitution candidate for '" + p.w2 + "'");
        }
    }

    result.sets.emplace(controls.role(), std::move(controls));
    result.sets.emplace(swapped_role, std::move(swapped));
    result.sets.emplace(exsitu_role, std::move(exsitu));
    result.sets.emplace(exsitu_swapped_role, std::move(exsitu_swapped));
    if (antonyms) {
        result.sets.emplace(SetRole::I_TA2, std::move(sub_hyp));
        result.sets.emplace(SetRole::I_TA3, std::move(sub_prem));
    }
    return result;
}

}  // namespace wordswap
