#pragma once

// Rule-based predictors. They emit the same prediction files as external
// models, so the analysis cannot tell them apart.

#include <map>
#include <optional>
#include <random>
#include <string>

#include "wordswap/challenge.hpp"
#include "wordswap/factors.hpp"
#include "wordswap/predictions.hpp"

namespace wordswap {

enum class BaselineKind { polarity_only, majority_class, insensitive_oracle, random };

inline std::string_view to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::polarity_only: return "polarity-only";
        case BaselineKind::majority_class: return "majority-class";
        case BaselineKind::insensitive_oracle: return "insensitive-oracle";
        case BaselineKind::random: return "random";
    }
    return "?";
}

inline std::optional<BaselineKind> parse_baseline_kind(std::string_view s) {
    for (auto k : {BaselineKind::polarity_only, BaselineKind::majority_class,
                   BaselineKind::insensitive_oracle, BaselineKind::random})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct BaselineSpec {
    BaselineKind kind = BaselineKind::polarity_only;
    std::uint64_t seed = 13;
    /// Used by polarity-only for ties and unseen pairs.
    Label fallback = Label::contradiction;
    /// Most frequent training label, used by majority-class.
    Label majority = Label::contradiction;
};

/// Most frequent gold label; ties go to the earlier of entailment, neutral,
/// contradiction.
inline Label majority_label(const Corpus& training) {
    std::array<std::size_t, 3> counts{};
    for (const auto& inst : training.instances()) ++counts[static_cast<std::size_t>(inst.gold)];
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (counts[i] > counts[best]) best = i;
    return static_cast<Label>(best);
}

/// Contradiction for antonym-derived sets, the training majority otherwise.
inline Label default_fallback(SetRole role, Label majority) {
    return is_antonym_role(role) ? Label::contradiction : majority;
}

/// Gold labels of labeled control instances keyed by id.
inline std::map<std::string, Label> control_labels(const ChallengeSet& control) {
    std::map<std::string, Label> out;
    for (const auto& ci : control.instances())
        if (ci.labeled()) out.emplace(ci.id, *ci.label);
    return out;
}

inline Label random_label(std::uint64_t seed, std::string_view id) {
    auto h = fnv1a64(id);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    std::mt19937_64 rng(seq);
    return static_cast<Label>(rng() % 3);
}

/// Predicts every non-discarded instance of `set`. `polarity` is needed by
/// polarity-only, `controls` by insensitive-oracle.
inline Predictions predict(const BaselineSpec& spec, const ChallengeSet& set,
                           const PolarityMap* polarity = nullptr,
                           const std::map<std::string, Label>* controls = nullptr) {
    Predictions out;
    out.model = std::string(to_string(spec.kind));
    if (spec.kind == BaselineKind::polarity_only && !polarity)
        throw Error("missing_input", "polarity-only baseline needs a polarity table");
    if (spec.kind == BaselineKind::insensitive_oracle && !controls)
        throw Error("missing_lineage", "insensitive-oracle baseline needs control labels");
    std::vector<std::string> orphans;
    for (const auto& ci : set.instances()) {
        if (ci.discarded()) continue;
        Label l = spec.fallback;
        switch (spec.kind) {
            case BaselineKind::polarity_only:
                l = polarity_of(*polarity, ci.pair).category().singleton().value_or(spec.fallback);
                break;
            case BaselineKind::majority_class: l = spec.majority; break;
            case BaselineKind::insensitive_oracle: {
                auto it = controls->find(ci.control_id);
                if (it == controls->end()) {
                    orphans.push_back(ci.id);
                    continue;
                }
                l = it->second;
                break;
            }
            case BaselineKind::random: l = random_label(spec.seed, ci.id); break;
        }
        out.add(ci.id, l);
    }
    if (!orphans.empty())
        throw Error("missing_lineage", "control label not found for: " + join_limited(orphans));
    return out;
}

}  // namespace wordswap
