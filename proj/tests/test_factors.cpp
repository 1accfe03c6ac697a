#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "wordswap/factors.hpp"
#include "wordswap/transform.hpp"

using namespace wordswap;

namespace {

Polarity pol(std::size_t e, std::size_t n, std::size_t c) {
    Polarity p;
    p.counts = {e, n, c};
    return p;
}

Corpus counts_corpus(const std::string& a, const std::string& b, std::size_t e, std::size_t n,
                     std::size_t c) {
    Corpus corpus;
    std::size_t id = 0;
    auto add = [&](Label l, std::size_t k) {
        for (std::size_t i = 0; i < k; ++i)
            corpus.add(make_instance("p" + std::to_string(id++), "At " + a + " again " + a + ".",
                                     "It is " + b + ".", l));
    };
    add(Label::entailment, e);
    add(Label::neutral, n);
    add(Label::contradiction, c);
    return corpus;
}

ChallengeInstance labeled(std::string id, SetRole role, std::string control, WordPair pair,
                          std::optional<Label> l, LabelStatus s) {
    ChallengeInstance ci;
    ci.id = std::move(id);
    ci.role = role;
    ci.control_id = std::move(control);
    ci.premise = {pair.w1};
    ci.hypothesis = {pair.w2};
    ci.pair = std::move(pair);
    ci.label = l;
    ci.status = s;
    return ci;
}

}  // namespace

TEST(Polarity, CountsInstancesNotOccurrences) {
    auto corpus = counts_corpus("sunset", "sunrise", 0, 1, 12);
    std::vector<PairKey> keys = {{"sunset", "sunrise"}, {"sunrise", "sunset"}};
    auto table = polarity_table(corpus, keys);
    EXPECT_EQ(table.at(keys[0]), pol(0, 1, 12));
    EXPECT_EQ(table.at(keys[0]).category().name(), "contradiction");
    EXPECT_EQ(table.at(keys[1]).category().name(), "none");
}

TEST(Polarity, TieCategory) {
    EXPECT_EQ(pol(3, 3, 0).category().name(), "entailment-neutral");
    EXPECT_EQ(pol(2, 0, 2).category().name(), "contradiction-entailment");
    EXPECT_EQ(pol(1, 1, 1).category().name(), "contradiction-entailment-neutral");
    EXPECT_EQ(pol(0, 0, 0).category().name(), "none");
    EXPECT_FALSE(pol(3, 3, 0).category().singleton());
}

TEST(Polarity, CategoryNamesRoundTrip) {
    for (std::uint8_t bits = 0; bits < 8; ++bits) {
        auto c = PolarityCategory::of_bits(bits);
        auto parsed = PolarityCategory::parse(c.name());
        ASSERT_TRUE(parsed);
        EXPECT_EQ(*parsed, c);
    }
    EXPECT_FALSE(PolarityCategory::parse("maybe"));
}

TEST(Polarity, ArgmaxInvariantUnderScaling) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        auto p = pol(rng() % 6, rng() % 6, rng() % 6);
        auto k = 1 + rng() % 9;
        EXPECT_EQ(pol(p.counts[0] * k, p.counts[1] * k, p.counts[2] * k).category(), p.category());
    }
}

TEST(Polarity, MatchesRecount) {
    std::vector<WordPair> pairs = {{"hot", "cold", Relation::antonym}, {"up", "down", Relation::antonym}};
    auto corpus = oracle::synthetic_corpus(400, pairs, 9);
    std::vector<WordPair> both = pairs;
    for (const auto& p : pairs) both.push_back(p.reversed());
    auto table = polarity_table(corpus, both);
    for (const auto& p : both) {
        std::array<std::size_t, 3> counts{};
        for (const auto& id : oracle::scan(corpus, p.w1, p.w2))
            ++counts[static_cast<std::size_t>(corpus.find(id)->gold)];
        EXPECT_EQ(table.at(key_of(p)).counts, counts);
    }
}

TEST(Polarity, TsvRoundTripAndValidation) {
    PolarityMap m;
    m[{"hot", "cold"}] = pol(0, 1, 5);
    m[{"cold", "hot"}] = pol(2, 2, 0);
    m[{"up", "down"}] = pol(0, 0, 0);
    auto text = serialize_polarity(m, "seed 1");
    EXPECT_EQ(parse_polarity(text), m);
    EXPECT_EQ(serialize_polarity(parse_polarity(text), "seed 1"), text);
    EXPECT_THROW(parse_polarity("hot\tcold\t0\t1\t5\tneutral\n"), Error);
    EXPECT_THROW(parse_polarity("hot\tcold\t0\t1\n"), Error);
}

TEST(Unseen, ReversedOrder) {
    auto corpus = counts_corpus("sunset", "sunrise", 0, 0, 3);
    std::vector<WordPair> pairs = {{"sunset", "sunrise", Relation::antonym}};
    auto idx = build_index(corpus, pairs);
    EXPECT_TRUE(is_unseen(pairs[0].reversed(), idx));
    EXPECT_FALSE(is_unseen(pairs[0], idx));
}

TEST(Unseen, MatchesScan) {
    std::vector<WordPair> pairs = {{"hot", "cold", Relation::antonym},
                                   {"wet", "dry", Relation::antonym},
                                   {"cat", "animal", Relation::hypernym}};
    auto corpus = oracle::synthetic_corpus(200, pairs, 31);
    auto idx = build_index(corpus, pairs);
    for (const auto& p : pairs) {
        EXPECT_EQ(is_unseen(p, idx), oracle::scan(corpus, p.w1, p.w2).empty());
        EXPECT_EQ(is_unseen(p.reversed(), idx), oracle::scan(corpus, p.w2, p.w1).empty());
    }
}

TEST(Subsets, HypernymSwapRelabelled) {
    WordPair fb{"footbridge", "bridge", Relation::hypernym};
    ChallengeSet ctrl(SetRole::I_H), tr(SetRole::I_TH);
    ctrl.add(labeled("e3:I_H", SetRole::I_H, "e3:I_H", fb, Label::entailment,
                     LabelStatus::gold_from_corpus));
    tr.add(labeled("e3:I_TH", SetRole::I_TH, "e3:I_H", fb.reversed(), Label::neutral,
                   LabelStatus::annotated));
    PolarityMap m;
    m[key_of(fb)] = pol(4, 0, 0);
    m[key_of(fb.reversed())] = pol(2, 0, 0);
    auto mask = build_subsets(ctrl, tr, m);
    EXPECT_EQ(mask.subset1, std::set<std::string>{"e3:I_TH"});
    EXPECT_TRUE(mask.subset2.empty());
    EXPECT_EQ(mask.subset3, std::set<std::string>{"e3:I_TH"});
}

TEST(Subsets, NonePolarityIsUnseenAndMismatched) {
    WordPair p{"sunrise", "sunset", Relation::antonym};
    ChallengeSet ctrl(SetRole::I_A), tr(SetRole::I_TA1);
    ctrl.add(labeled("x:I_A", SetRole::I_A, "x:I_A", p.reversed(), Label::contradiction,
                     LabelStatus::gold_from_corpus));
    tr.add(labeled("x:I_TA1", SetRole::I_TA1, "x:I_A", p, Label::contradiction, LabelStatus::heuristic));
    PolarityMap m;
    m[key_of(p.reversed())] = pol(0, 0, 7);
    m[key_of(p)] = pol(0, 0, 0);
    auto mask = build_subsets(ctrl, tr, m);
    EXPECT_TRUE(mask.subset1.empty());
    EXPECT_EQ(mask.subset2, std::set<std::string>{"x:I_TA1"});
    EXPECT_EQ(mask.subset3, std::set<std::string>{"x:I_TA1"});
}

TEST(Subsets, UnlabeledInstanceListed) {
    WordPair p{"a1", "b1", Relation::hypernym};
    ChallengeSet ctrl(SetRole::I_H), tr(SetRole::I_TH);
    ctrl.add(labeled("x:I_H", SetRole::I_H, "x:I_H", p, Label::neutral, LabelStatus::gold_from_corpus));
    tr.add(labeled("x:I_TH", SetRole::I_TH, "x:I_H", p.reversed(), std::nullopt,
                   LabelStatus::needs_annotation));
    PolarityMap m;
    try {
        build_subsets(ctrl, tr, m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "unlabeled");
        EXPECT_NE(std::string(e.what()).find("x:I_TH"), std::string::npos);
    }
}

TEST(Subsets, DiscardedExcluded) {
    WordPair p{"a1", "b1", Relation::hypernym};
    ChallengeSet ctrl(SetRole::I_H), tr(SetRole::I_TH);
    ctrl.add(labeled("x:I_H", SetRole::I_H, "x:I_H", p, Label::neutral, LabelStatus::gold_from_corpus));
    tr.add(labeled("x:I_TH", SetRole::I_TH, "x:I_H", p.reversed(), std::nullopt, LabelStatus::discarded));
    PolarityMap m;
    m[key_of(p)] = pol(0, 0, 0);
    auto mask = build_subsets(ctrl, tr, m);
    EXPECT_TRUE(mask.subset1.empty() && mask.subset2.empty());
    EXPECT_EQ(mask.subset3, std::set<std::string>{"x:I_H"});
}

TEST(Subsets, IndexAndPolarityAgreeOnUnseen) {
    std::vector<WordPair> pairs = {{"hot", "cold", Relation::antonym},
                                   {"up", "down", Relation::antonym},
                                   {"wet", "dry", Relation::antonym}};
    auto corpus = oracle::synthetic_corpus(400, pairs, 17);
    Lexicon lex;
    lex.pairs = pairs;
    auto res = build_challenge_sets(corpus, lex, {}, {});
    const auto& ia = res.sets.at(SetRole::I_A);
    const auto& ita1 = res.sets.at(SetRole::I_TA1);
    auto polarity = polarity_table(corpus, pairs_in({&ia, &ita1}));
    auto idx = build_index(corpus, pairs);
    auto by_index = build_subsets(ia, ita1, polarity, idx);
    auto by_polarity = build_subsets(ia, ita1, polarity);
    EXPECT_EQ(by_index, by_polarity);
    EXPECT_TRUE(by_index.subset1.empty());
    for (const auto& id : by_index.subset2)
        EXPECT_TRUE(polarity_of(polarity, ita1.find(id)->pair).category().is_none());
}
