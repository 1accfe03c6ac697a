#pragma once

// Challenge-set data model and its JSONL serialization.

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wordswap/corpus.hpp"

namespace wordswap {

enum class SetRole { I_A, I_TA1, I_TA2, I_TA3, E_A, E_TA, I_H, I_TH, E_H, E_TH };

inline constexpr std::array<SetRole, 10> kRoles = {
    SetRole::I_A, SetRole::I_TA1, SetRole::I_TA2, SetRole::I_TA3, SetRole::E_A,
    SetRole::E_TA, SetRole::I_H, SetRole::I_TH, SetRole::E_H, SetRole::E_TH};

inline std::string_view to_string(SetRole r) {
    switch (r) {
        case SetRole::I_A: return "I_A";
        case SetRole::I_TA1: return "I_TA1";
        case SetRole::I_TA2: return "I_TA2";
        case SetRole::I_TA3: return "I_TA3";
        case SetRole::E_A: return "E_A";
        case SetRole::E_TA: return "E_TA";
        case SetRole::I_H: return "I_H";
        case SetRole::I_TH: return "I_TH";
        case SetRole::E_H: return "E_H";
        case SetRole::E_TH: return "E_TH";
    }
    return "?";
}

inline std::optional<SetRole> parse_role(std::string_view s) {
    for (auto r : kRoles)
        if (to_string(r) == s) return r;
    return std::nullopt;
}

inline bool is_control_role(SetRole r) {
    return r == SetRole::I_A || r == SetRole::I_H || r == SetRole::E_A || r == SetRole::E_H;
}

inline bool is_antonym_role(SetRole r) {
    switch (r) {
        case SetRole::I_A:
        case SetRole::I_TA1:
        case SetRole::I_TA2:
        case SetRole::I_TA3:
        case SetRole::E_A:
        case SetRole::E_TA: return true;
        default: return false;
    }
}

/// The control role a transformed role is derived from.
inline std::optional<SetRole> control_role_of(SetRole r) {
    switch (r) {
        case SetRole::I_TA1:
        case SetRole::I_TA2:
        case SetRole::I_TA3:
        case SetRole::E_A: return SetRole::I_A;
        case SetRole::E_TA: return SetRole::E_A;
        case SetRole::I_TH:
        case SetRole::E_H: return SetRole::I_H;
        case SetRole::E_TH: return SetRole::E_H;
        default: return std::nullopt;
    }
}

enum class LabelStatus { gold_from_corpus, heuristic, needs_annotation, annotated, discarded };

inline std::string_view to_string(LabelStatus s) {
    switch (s) {
        case LabelStatus::gold_from_corpus: return "gold-from-corpus";
        case LabelStatus::heuristic: return "heuristic";
        case LabelStatus::needs_annotation: return "needs-annotation";
        case LabelStatus::annotated: return "annotated";
        case LabelStatus::discarded: return "discarded";
    }
    return "?";
}

inline std::optional<LabelStatus> parse_label_status(std::string_view s) {
    for (auto st : {LabelStatus::gold_from_corpus, LabelStatus::heuristic,
                    LabelStatus::needs_annotation, LabelStatus::annotated, LabelStatus::discarded})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

struct ChallengeInstance {
    std::string id;
    SetRole role = SetRole::I_A;
    std::string control_id;
    Tokens premise;
    Tokens hypothesis;
    std::string raw_premise;
    std::string raw_hypothesis;
    /// Positioned as in this instance: w1 in the premise, w2 in the hypothesis.
    WordPair pair;
    std::optional<Label> label;
    LabelStatus status = LabelStatus::gold_from_corpus;
    std::uint64_t seed = 0;

    bool discarded() const { return status == LabelStatus::discarded; }
    bool labeled() const {
        return label.has_value() && status != LabelStatus::needs_annotation && !discarded();
    }

    bool operator==(const ChallengeInstance&) const = default;
};

struct Provenance {
    std::string corpus_digest;
    std::string lexicon_digest;
    std::uint64_t seed = 0;
    std::string version{kVersion};
};

class ChallengeSet {
public:
    ChallengeSet() = default;
    explicit ChallengeSet(SetRole role) : role_(role) {}

    SetRole role() const { return role_; }
    const std::vector<ChallengeInstance>& instances() const { return instances_; }
    std::size_t size() const { return instances_.size(); }
    bool empty() const { return instances_.empty(); }

    void add(ChallengeInstance inst) {
        auto [it, inserted] = by_id_.emplace(inst.id, instances_.size());
        if (!inserted) throw Error("duplicate_id", "duplicate challenge id '" + inst.id + "'");
        instances_.push_back(std::move(inst));
    }

    const ChallengeInstance* find(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &instances_[it->second];
    }
    ChallengeInstance* find(const std::string& id) {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &instances_[it->second];
    }

    Provenance provenance;

private:
    SetRole role_ = SetRole::I_A;
    std::vector<ChallengeInstance> instances_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

inline nlohmann::json to_json(const ChallengeInstance& ci) {
    nlohmann::json j = {{"id", ci.id},
                        {"role", to_string(ci.role)},
                        {"control_id", ci.control_id},
                        {"premise", ci.raw_premise},
                        {"hypothesis", ci.raw_hypothesis},
                        {"pair_w1", ci.pair.w1},
                        {"pair_w2", ci.pair.w2},
                        {"relation", to_string(ci.pair.relation)},
                        {"label", nullptr},
                        {"label_status", to_string(ci.status)},
                        {"seed", ci.seed}};
    if (ci.label) j["label"] = to_string(*ci.label);
    return j;
}

inline ChallengeInstance challenge_instance_from_json(const nlohmann::json& j) {
    auto str = [&](const char* key) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string())
            throw Error("schema", std::string("missing string field '") + key + "'");
        return it->get<std::string>();
    };
    ChallengeInstance ci;
    ci.id = str("id");
    auto role = parse_role(str("role"));
    if (!role) throw Error("schema", "unknown role in instance '" + ci.id + "'");
    ci.role = *role;
    ci.control_id = str("control_id");
    ci.raw_premise = str("premise");
    ci.raw_hypothesis = str("hypothesis");
    ci.premise = tokenize(ci.raw_premise);
    ci.hypothesis = tokenize(ci.raw_hypothesis);
    ci.pair.w1 = str("pair_w1");
    ci.pair.w2 = str("pair_w2");
    auto rel = parse_relation(str("relation"));
    if (!rel) throw Error("bad_relation", "unknown relation in instance '" + ci.id + "'");
    ci.pair.relation = *rel;
    auto status = parse_label_status(str("label_status"));
    if (!status) throw Error("schema", "unknown label_status in instance '" + ci.id + "'");
    ci.status = *status;
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw Error("schema", "label must be a string or null");
        ci.label = label_or_throw(it->get<std::string>());
    }
    if (auto it = j.find("seed"); it != j.end() && it->is_number_unsigned())
        ci.seed = it->get<std::uint64_t>();
    return ci;
}

inline std::string serialize_set(const ChallengeSet& set) {
    std::string out;
    for (const auto& ci : set.instances()) {
        out += to_json(ci).dump();
        out += '\n';
    }
    return out;
}

/// All lines must share one role; an empty file yields an empty set of
/// `fallback_role` (or I_A when absent).
inline ChallengeSet parse_set(std::string_view text,
                              std::optional<SetRole> fallback_role = std::nullopt) {
    std::vector<ChallengeInstance> items;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty()) continue;
        try {
            items.push_back(challenge_instance_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error("malformed_json", "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    SetRole role = items.empty() ? fallback_role.value_or(SetRole::I_A) : items.front().role;
    ChallengeSet set(role);
    for (auto& ci : items) {
        if (ci.role != role)
            throw Error("schema", "instance '" + ci.id + "' has role " +
                                      std::string(to_string(ci.role)) + " in a " +
                                      std::string(to_string(role)) + " set");
        if (!items.empty()) set.provenance.seed = ci.seed;
        set.add(std::move(ci));
    }
    return set;
}

inline ChallengeSet load_set(const std::string& path,
                             std::optional<SetRole> fallback_role = std::nullopt) {
    try {
        return parse_set(read_file(path), fallback_role);
    } catch (const Error& e) {
        if (e.code() == "missing_file") throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

}  // namespace wordswap
