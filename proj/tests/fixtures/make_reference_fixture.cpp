// Generates tests/fixtures/reference: a synthetic training corpus, lexicons,
// challenge sets, an annotation log and two models' predictions whose
// contingency tables equal the published ones.
//
//   make_reference_fixture <out-dir>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "wordswap/wordswap.hpp"

namespace fs = std::filesystem;
using namespace wordswap;

namespace {

constexpr std::size_t kPairs = 620;
constexpr std::size_t kSubstituted = 400;
constexpr std::size_t kPool = 20;
constexpr std::uint64_t kSeed = 13;

std::string code(std::size_t i) {
    std::string s(3, 'a');
    for (int k = 2; k >= 0; --k) {
        s[static_cast<std::size_t>(k)] = static_cast<char>('a' + i % 26);
        i /= 26;
    }
    return s;
}

std::string up(std::size_t i) { return "up" + code(i); }
std::string down(std::size_t i) { return "down" + code(i); }
std::string pool_word(std::size_t k) { return "lift" + code(k); }

std::string id_of(std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "t%05zu", n);
    return buf;
}

/// Fisher-Yates with an explicit draw so the output does not depend on the
/// standard library's shuffle.
template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

Label other_than(Label a, Label b) {
    for (auto l : kLabels)
        if (l != a && l != b) return l;
    return a;
}

struct Writer {
    fs::path dir;
    void operator()(const std::string& name, const std::string& content) const {
        write_file((dir / name).string(), content);
    }
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_reference_fixture <out-dir>\n";
        return 2;
    }
    fs::create_directories(argv[1]);
    Writer out{argv[1]};
    std::mt19937_64 rng(kSeed);

    // polarity of each reversed pair (down_i, up_i)
    enum Cat { kNeutral, kContradiction, kEntailment, kNone };
    std::vector<Cat> cat_of(kPairs);
    {
        auto order = iota(kPairs);
        shuffle(order, rng);
        for (std::size_t r = 0; r < kPairs; ++r)
            cat_of[order[r]] = r < 26 ? kNeutral : r < 577 ? kContradiction : r < 580 ? kEntailment : kNone;
    }

    Corpus corpus;
    std::size_t n = 0;
    for (std::size_t i = 0; i < kPairs; ++i)
        corpus.add(make_instance(id_of(n++), "The " + up(i) + " light is on.",
                                 "The " + down(i) + " light is on.", Label::contradiction));
    for (std::size_t i = 0; i < kPairs; ++i) {
        if (cat_of[i] == kNone) continue;
        Label l = cat_of[i] == kNeutral ? Label::neutral
                  : cat_of[i] == kEntailment ? Label::entailment
                                             : Label::contradiction;
        corpus.add(make_instance(id_of(n++), "A " + down(i) + " door stands open.",
                                 "A door marked " + up(i) + " stands open.", l));
    }
    for (std::size_t k = 0; k < kPool; ++k)
        for (std::size_t j = 0; j < 10; ++j)
            corpus.add(make_instance(id_of(n++), "Someone waits near the " + pool_word(k) + ".",
                                     "A " + pool_word(k) + " is nearby.",
                                     j % 2 ? Label::entailment : Label::neutral));
    out("train.jsonl", serialize_native(corpus));

    std::string antonyms = "# w1\tw2\trelation\n";
    for (std::size_t i = 0; i < kPairs; ++i) antonyms += up(i) + "\t" + down(i) + "\tantonym\n";
    out("antonyms.tsv", antonyms);

    // anchors with a substitution candidate: a fixed permutation picks 400
    std::string substitutions = "# w1\tw2\trelation\n";
    for (std::size_t i = 0; i < kPairs; ++i)
        if ((i * 37) % kPairs < kSubstituted)
            substitutions += up(i) + "\t" + pool_word(i % kPool) + "\tsynonym\n";
    out("substitutions.tsv", substitutions);

    auto lexicon = parse_lexicon(antonyms);
    auto subs = parse_lexicon(substitutions);
    BuildOptions opts;
    opts.seed = kSeed;
    auto built = build_challenge_sets(corpus, lexicon, subs.pairs, opts);
    auto& ia = built.sets.at(SetRole::I_A);
    auto& ita1 = built.sets.at(SetRole::I_TA1);
    auto& ita2 = built.sets.at(SetRole::I_TA2);
    if (ia.size() != kPairs || ita1.size() != kPairs || ita2.size() != kSubstituted) {
        std::cerr << "unexpected set sizes " << ia.size() << " " << ita1.size() << " " << ita2.size()
                  << "\n";
        return 1;
    }
    out("I_A.jsonl", serialize_set(ia));
    out("I_TA1.jsonl", serialize_set(ita1));
    out("I_TA2.jsonl", serialize_set(ita2));

    auto polarity = polarity_table(corpus, pairs_in({&ia, &ita1, &ita2}));
    out("polarity.tsv", serialize_polarity(polarity, "fixture polarity, seed 13"));

    auto pair_index = [&](const ChallengeInstance& ci) {
        return static_cast<std::size_t>(std::stoul(ci.control_id.substr(1, 5)));
    };

    // DAM on I_TA1: per polarity row, counts of (neutral, contradiction, entailment)
    Predictions dam;
    dam.model = "DAM";
    {
        const std::size_t plan[4][3] = {{5, 21, 0}, {5, 543, 3}, {0, 3, 0}, {8, 20, 12}};
        const Label cols[3] = {Label::neutral, Label::contradiction, Label::entailment};
        std::size_t used[4][3] = {};
        for (const auto& ci : ita1.instances()) {
            auto c = cat_of[pair_index(ci)];
            std::size_t k = 0;
            while (used[c][k] == plan[c][k]) ++k;
            ++used[c][k];
            dam.add(ci.id, cols[k]);
        }
        // 587 of 620 controls correct
        auto order = iota(kPairs);
        shuffle(order, rng);
        std::vector<bool> wrong(kPairs, false);
        for (std::size_t r = 0; r < kPairs - 587; ++r) wrong[order[r]] = true;
        for (const auto& ci : ia.instances()) {
            auto i = pair_index(ci);
            dam.add(ci.id, wrong[i] ? (i % 2 ? Label::neutral : Label::entailment) : Label::contradiction);
        }
    }

    // I_TA2 annotation: 294 relabeled, 106 confirmed as contradiction
    std::vector<const ChallengeInstance*> ita2_items;
    for (const auto& ci : ita2.instances()) ita2_items.push_back(&ci);
    shuffle(ita2_items, rng);
    std::string log;
    std::map<std::string, Label> new_gold;
    for (std::size_t r = 0; r < ita2_items.size(); ++r) {
        Label l = r >= 294 ? Label::contradiction : r % 3 == 0 ? Label::entailment : Label::neutral;
        new_gold[ita2_items[r]->id] = l;
        AnnotationRecord rec{ita2_items[r]->id, static_cast<Decision>(static_cast<int>(l)), "fixture",
                             1700000000 + static_cast<std::int64_t>(r)};
        log += to_json(rec).dump() + "\n";
    }
    out("I_TA2.annotations.jsonl", log);

    // ESIM on I_TA2 subset1: 155 change/correct, 31 change/incorrect,
    // 8 no change/correct, 100 no change/incorrect
    Predictions esim;
    esim.model = "ESIM";
    std::map<std::string, Label> esim_control;
    for (std::size_t r = 0; r < ita2_items.size(); ++r) {
        const auto& ci = *ita2_items[r];
        Label g = new_gold[ci.id];
        Label ctrl = Label::contradiction, tr = g;
        if (r < 155) {
        } else if (r < 186) {
            tr = other_than(g, Label::contradiction);
        } else if (r < 194) {
            ctrl = g;
        } else if (r < 294) {
            tr = Label::contradiction;
        }
        esim.add(ci.id, tr);
        esim_control[ci.control_id] = ctrl;
    }
    {
        // 601 of 620 controls correct; the 8 no-change/correct ones are already wrong
        std::size_t extra_wrong = 620 - 601 - 8;
        auto order = iota(kPairs);
        shuffle(order, rng);
        for (auto i : order) {
            if (extra_wrong == 0) break;
            auto id = id_of(i) + ":I_A";
            if (esim_control.count(id)) continue;
            esim_control[id] = Label::neutral;
            --extra_wrong;
        }
        for (const auto& ci : ia.instances()) {
            auto it = esim_control.find(ci.id);
            esim.add(ci.id, it == esim_control.end() ? Label::contradiction : it->second);
        }
    }

    auto split_preds = [](const Predictions& p, SetRole role) {
        Predictions sub;
        sub.model = p.model;
        auto suffix = ":" + std::string(to_string(role));
        for (const auto& [id, l] : p.by_id)
            if (id.size() > suffix.size() && id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0)
                sub.add(id, l);
        return sub;
    };
    out("dam_I_A.tsv", serialize_predictions(split_preds(dam, SetRole::I_A), "model=DAM"));
    out("dam_I_TA1.tsv", serialize_predictions(split_preds(dam, SetRole::I_TA1), "model=DAM"));
    out("esim_I_A.tsv", serialize_predictions(split_preds(esim, SetRole::I_A), "model=ESIM"));
    out("esim_I_TA2.tsv", serialize_predictions(split_preds(esim, SetRole::I_TA2), "model=ESIM"));

    out("bundle.ini",
        "[run]\n"
        "seed = 13\n"
        "alpha = 0.05\n"
        "corpus = train.jsonl\n"
        "lexicon = antonyms.tsv\n"
        "\n"
        "[experiment:dam_ita1]\n"
        "control = I_A.jsonl\n"
        "transformed = I_TA1.jsonl\n"
        "polarity = polarity.tsv\n"
        "models = DAM\n"
        "\n"
        "[experiment:esim_ita2]\n"
        "control = I_A.jsonl\n"
        "transformed = I_TA2.jsonl\n"
        "annotations = I_TA2.annotations.jsonl\n"
        "polarity = polarity.tsv\n"
        "models = ESIM\n"
        "\n"
        "[model:DAM]\n"
        "predictions = dam_I_A.tsv, dam_I_TA1.tsv\n"
        "\n"
        "[model:ESIM]\n"
        "predictions = esim_I_A.tsv, esim_I_TA2.tsv\n");
    return 0;
}
