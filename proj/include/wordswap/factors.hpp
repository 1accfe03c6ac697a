#pragma once

// The three behavioural factors: pair polarity, unseen pairs and gold-label
// changes, materialised as subset masks over a challenge set.

#include <algorithm>
#include <array>
#include <bit>
#include <concepts>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wordswap/challenge.hpp"
#include "wordswap/corpus.hpp"

namespace wordswap {

/// Set of labels sharing the maximal count; empty means the pair is unseen.
class PolarityCategory {
public:
    PolarityCategory() = default;
    static PolarityCategory none() { return {}; }
    static PolarityCategory of(Label l) {
        PolarityCategory c;
        c.bits_ = bit(l);
        return c;
    }
    static PolarityCategory of_bits(std::uint8_t bits) {
        PolarityCategory c;
        c.bits_ = bits & 0x7;
        return c;
    }

    bool is_none() const { return bits_ == 0; }
    bool is_tie() const { return std::popcount(bits_) > 1; }
    std::optional<Label> singleton() const {
        if (std::popcount(bits_) != 1) return std::nullopt;
        for (auto l : kLabels)
            if (bits_ & bit(l)) return l;
        return std::nullopt;
    }
    std::uint8_t bits() const { return bits_; }

    /// "none", a label name, or alphabetically sorted label names joined by '-'.
    std::string name() const {
        if (is_none()) return "none";
        std::vector<std::string> names;
        for (auto l : kLabels)
            if (bits_ & bit(l)) names.emplace_back(to_string(l));
        std::sort(names.begin(), names.end());
        return join(names, "-");
    }

    static std::optional<PolarityCategory> parse(std::string_view s) {
        if (s == "none") return none();
        PolarityCategory c;
        for (const auto& part : split(s, '-')) {
            auto l = parse_label(part);
            if (!l) return std::nullopt;
            c.bits_ |= bit(*l);
        }
        return c;
    }

    /// Presentation order: entailment, neutral, contradiction, ties by name, none.
    int rank() const {
        if (auto l = singleton()) return static_cast<int>(*l);
        if (is_none()) return 100;
        return 10;
    }
    friend bool operator<(const PolarityCategory& a, const PolarityCategory& b) {
        if (a.rank() != b.rank()) return a.rank() < b.rank();
        return a.name() < b.name();
    }
    bool operator==(const PolarityCategory&) const = default;

private:
    static std::uint8_t bit(Label l) { return static_cast<std::uint8_t>(1U << static_cast<int>(l)); }
    std::uint8_t bits_ = 0;
};

struct Polarity {
    std::array<std::size_t, 3> counts{};  // indexed by Label

    std::size_t count(Label l) const { return counts[static_cast<std::size_t>(l)]; }
    std::size_t total() const { return counts[0] + counts[1] + counts[2]; }

    PolarityCategory category() const {
        auto best = std::max({counts[0], counts[1], counts[2]});
        if (best == 0) return PolarityCategory::none();
        std::uint8_t bits = 0;
        for (std::size_t i = 0; i < 3; ++i)
            if (counts[i] == best) bits |= static_cast<std::uint8_t>(1U << i);
        return PolarityCategory::of_bits(bits);
    }

    bool operator==(const Polarity&) const = default;
};

using PolarityMap = std::map<PairKey, Polarity>;

/// Counts training instances (not occurrences) per gold label for each ordered pair.
template <class PairRange>
PolarityMap polarity_table(const Corpus& training, const PairRange& pairs) {
    std::vector<PairKey> keys;
    for (const auto& p : pairs) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, PairKey>)
            keys.push_back(p);
        else
            keys.push_back(key_of(p));
    }
    std::vector<WordPair> as_pairs;
    for (const auto& k : keys) as_pairs.push_back({k.first, k.second, Relation::antonym});
    auto index = build_index(training, as_pairs);
    PolarityMap out;
    for (const auto& k : keys) {
        Polarity pol;
        for (const auto& id : index.ids(k)) ++pol.counts[static_cast<std::size_t>(training.find(id)->gold)];
        out[k] = pol;
    }
    return out;
}

inline const Polarity& polarity_of(const PolarityMap& map, const WordPair& p) {
    auto it = map.find(key_of(p));
    if (it == map.end())
        throw Error("missing_polarity", "no polarity entry for pair (" + p.w1 + ", " + p.w2 + ")");
    return it->second;
}

inline std::string serialize_polarity(const PolarityMap& map, std::string_view comment = {}) {
    std::string out;
    if (!comment.empty()) out += "# " + std::string(comment) + "\n";
    out += "w1\tw2\tn_entailment\tn_neutral\tn_contradiction\tcategory\n";
    for (const auto& [k, pol] : map) {
        out += k.first + '\t' + k.second + '\t' + std::to_string(pol.count(Label::entailment)) +
               '\t' + std::to_string(pol.count(Label::neutral)) + '\t' +
               std::to_string(pol.count(Label::contradiction)) + '\t' + pol.category().name() + '\n';
    }
    return out;
}

/// The category column is validated against the counts.
inline PolarityMap parse_polarity(std::string_view text) {
    PolarityMap out;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty() || line.front() == '#') continue;
        auto cols = split(line, '\t');
        auto where = "line " + std::to_string(line_no) + ": ";
        if (cols.size() != 6) throw Error("schema", where + "expected 6 columns");
        if (cols[0] == "w1" && cols[2] == "n_entailment") continue;
        Polarity pol;
        for (std::size_t i = 0; i < 3; ++i) {
            try {
                std::size_t used = 0;
                auto v = std::stoull(cols[2 + i], &used);
                if (used != cols[2 + i].size()) throw std::invalid_argument("trailing");
                pol.counts[i] = static_cast<std::size_t>(v);
            } catch (const std::exception&) {
                throw Error("schema", where + "bad count '" + cols[2 + i] + "'");
            }
        }
        auto cat = PolarityCategory::parse(cols[5]);
        if (!cat || !(*cat == pol.category()))
            throw Error("schema", where + "category '" + cols[5] + "' disagrees with counts");
        if (!out.emplace(PairKey{cols[0], cols[1]}, pol).second)
            throw Error("duplicate_id", where + "duplicate pair (" + cols[0] + ", " + cols[1] + ")");
    }
    return out;
}

inline PolarityMap load_polarity(const std::string& path) {
    try {
        return parse_polarity(read_file(path));
    } catch (const Error& e) {
        if (e.code() == "missing_file") throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

/// True iff no indexed training instance has w1 in the premise and w2 in the hypothesis.
inline bool is_unseen(const WordPair& pair, const OccurrenceIndex& index) {
    return index.ids(pair).empty();
}

struct SubsetMask {
    std::set<std::string> subset1;  // transformed, gold label changed
    std::set<std::string> subset2;  // transformed, ordered pair unseen in training
    std::set<std::string> subset3;  // any, pair polarity differs from gold

    bool operator==(const SubsetMask&) const = default;
};

/// True when the polarity category is a single label equal to `gold`.
inline bool polarity_matches(const PolarityCategory& cat, Label gold) {
    auto s = cat.singleton();
    return s && *s == gold;
}

namespace detail {

inline void require_labeled(const ChallengeSet& set) {
    std::vector<std::string> missing;
    for (const auto& ci : set.instances())
        if (!ci.discarded() && !ci.labeled()) missing.push_back(ci.id);
    if (!missing.empty())
        throw Error("unlabeled", std::string(to_string(set.role())) + " has " +
                                     std::to_string(missing.size()) +
                                     " instance(s) awaiting annotation: " + join_limited(missing));
}

}  // namespace detail

/// `unseen` is any callable WordPair -> bool.
template <class UnseenFn>
    requires std::predicate<UnseenFn&, const WordPair&>
SubsetMask build_subsets(const ChallengeSet& control, const ChallengeSet& transformed,
                         const PolarityMap& polarity, UnseenFn&& unseen) {
    detail::require_labeled(control);
    detail::require_labeled(transformed);
    SubsetMask mask;
    for (const auto& ci : control.instances()) {
        if (ci.discarded()) continue;
        if (!polarity_matches(polarity_of(polarity, ci.pair).category(), *ci.label))
            mask.subset3.insert(ci.id);
    }
    std::vector<std::string> orphans;
    for (const auto& ci : transformed.instances()) {
        if (ci.discarded()) continue;
        const auto* parent = control.find(ci.control_id);
        if (!parent || parent->discarded()) {
            orphans.push_back(ci.id);
            continue;
        }
        if (*ci.label != *parent->label) mask.subset1.insert(ci.id);
        if (unseen(ci.pair)) mask.subset2.insert(ci.id);
        if (!polarity_matches(polarity_of(polarity, ci.pair).category(), *ci.label))
            mask.subset3.insert(ci.id);
    }
    if (!orphans.empty())
        throw Error("unpaired", "control instance not found for: " + join_limited(orphans));
    return mask;
}

inline SubsetMask build_subsets(const ChallengeSet& control, const ChallengeSet& transformed,
                                const PolarityMap& polarity, const OccurrenceIndex& index) {
    return build_subsets(control, transformed, polarity,
                         [&](const WordPair& p) { return is_unseen(p, index); });
}

/// Unseen-ness read off the polarity counts (all zero).
inline SubsetMask build_subsets(const ChallengeSet& control, const ChallengeSet& transformed,
                                const PolarityMap& polarity) {
    return build_subsets(control, transformed, polarity,
                         [&](const WordPair& p) { return polarity_of(polarity, p).total() == 0; });
}

/// Every ordered pair positioned in the given sets.
inline std::set<PairKey> pairs_in(const std::vector<const ChallengeSet*>& sets) {
    std::set<PairKey> out;
    for (const auto* s : sets)
        for (const auto& ci : s->instances()) out.insert(key_of(ci.pair));
    return out;
}

}  // namespace wordswap
