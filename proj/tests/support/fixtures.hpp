#pragma once

// Synthetic fixtures built through the real pipeline (corpus -> builder ->
// polarity), shared by the unit tests and the acceptance binary.

#include <string>

#include "wordswap/wordswap.hpp"

namespace fixture {

using namespace wordswap;

inline std::string code3(std::size_t i) {
    std::string s(3, 'a');
    for (int k = 2; k >= 0; --k) {
        s[k] = static_cast<char>('a' + i % 26);
        i /= 26;
    }
    return s;
}

struct Built {
    Corpus corpus;
    Lexicon lexicon;
    BuildResult result;
    PolarityMap polarity;

    const ChallengeSet& set(SetRole r) const { return result.sets.at(r); }
};

/// `n` antonym pairs, one contradiction control each. The reversed pair of
/// the first `n - odd` carries contradiction polarity; the remaining `odd`
/// carry neutral (even index) or entailment polarity.
inline Built polarity_mix(std::size_t n, std::size_t odd) {
    Built b;
    for (std::size_t i = 0; i < n; ++i) {
        std::string up = "up" + code3(i), down = "down" + code3(i);
        b.lexicon.pairs.push_back({up, down, Relation::antonym});
        b.corpus.add(make_instance("c" + std::to_string(i), "The " + up + " light is on.",
                                   "The " + down + " light is on.", Label::contradiction));
        Label rev = Label::contradiction;
        if (i >= n - odd) rev = (i % 2 == 0) ? Label::neutral : Label::entailment;
        for (int k = 0; k < 2; ++k)
            b.corpus.add(make_instance("r" + std::to_string(i) + "_" + std::to_string(k),
                                       "A " + down + " door stands open.",
                                       "A door marked " + up + " stands open.", rev));
    }
    b.result = build_challenge_sets(b.corpus, b.lexicon, {}, {});
    b.polarity = polarity_table(
        b.corpus, pairs_in({&b.set(SetRole::I_A), &b.set(SetRole::I_TA1)}));
    return b;
}

/// 89% of I_TA1 instances carry contradiction polarity.
inline Built polarity89() { return polarity_mix(1000, 110); }

/// Polarity-only oracle count: the singleton polarity equals gold, or the
/// polarity is not a singleton and the fallback equals gold.
inline std::size_t polarity_matches_gold(const ChallengeSet& set, const PolarityMap& polarity,
                                         Label fallback) {
    std::size_t n = 0;
    for (const auto& ci : set.instances()) {
        if (ci.discarded()) continue;
        const auto& c = polarity_of(polarity, ci.pair).counts;
        std::size_t best = std::max({c[0], c[1], c[2]});
        int winners = 0, winner = -1;
        for (int k = 0; k < 3; ++k)
            if (best > 0 && c[k] == best) ++winners, winner = k;
        Label predicted = winners == 1 ? static_cast<Label>(winner) : fallback;
        n += predicted == *ci.label;
    }
    return n;
}

/// Three small sets for annotation: gold controls (immutable), heuristic
/// I_TA1 and unlabeled I_TH.
inline std::vector<ChallengeSet> annotation_sets(std::size_t n) {
    ChallengeSet ia(SetRole::I_A), ita1(SetRole::I_TA1), ith(SetRole::I_TH);
    for (std::size_t i = 0; i < n; ++i) {
        auto k = std::to_string(i);
        ChallengeInstance c;
        c.id = "s" + k + ":I_A";
        c.role = SetRole::I_A;
        c.control_id = c.id;
        c.pair = {"hot" + code3(i), "cold" + code3(i), Relation::antonym};
        c.premise = {"the", c.pair.w1, "tea"};
        c.hypothesis = {"the", "tea", "is", c.pair.w2};
        c.label = Label::contradiction;
        c.status = LabelStatus::gold_from_corpus;
        ChallengeInstance t = c;
        t.id = "s" + k + ":I_TA1";
        t.role = SetRole::I_TA1;
        t.pair = c.pair.reversed();
        std::swap(t.premise[1], t.hypothesis[3]);
        t.status = LabelStatus::heuristic;
        ChallengeInstance h = t;
        h.id = "s" + k + ":I_TH";
        h.role = SetRole::I_TH;
        h.pair.relation = Relation::hypernym;
        h.label.reset();
        h.status = LabelStatus::needs_annotation;
        ia.add(c);
        ita1.add(t);
        ith.add(h);
    }
    return {ia, ita1, ith};
}

}  // namespace fixture
