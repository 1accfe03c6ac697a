#pragma once

// Manual annotation backend: an append-only JSONL decision log replayed over
// challenge sets. The HTTP front end lives in annotation_server.hpp.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "wordswap/challenge.hpp"

namespace wordswap {

enum class Decision { entailment, neutral, contradiction, discard };

inline std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::entailment: return "entailment";
        case Decision::neutral: return "neutral";
        case Decision::contradiction: return "contradiction";
        case Decision::discard: return "discard";
    }
    return "?";
}

inline std::optional<Decision> parse_decision(std::string_view s) {
    if (s == "discard") return Decision::discard;
    if (auto l = parse_label(s)) return static_cast<Decision>(static_cast<int>(*l));
    return std::nullopt;
}

struct AnnotationRecord {
    std::string instance_id;
    Decision decision = Decision::discard;
    std::string annotator;
    std::int64_t timestamp = 0;  // UTC seconds

    bool operator==(const AnnotationRecord&) const = default;
};

inline nlohmann::json to_json(const AnnotationRecord& r) {
    return {{"instance_id", r.instance_id},
            {"decision", to_string(r.decision)},
            {"annotator", r.annotator},
            {"timestamp", r.timestamp}};
}

inline std::vector<AnnotationRecord> parse_annotation_log(std::string_view text) {
    std::vector<AnnotationRecord> out;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty()) continue;
        auto where = "line " + std::to_string(line_no) + ": ";
        try {
            auto j = nlohmann::json::parse(line);
            AnnotationRecord r;
            r.instance_id = j.at("instance_id").get<std::string>();
            auto d = parse_decision(j.at("decision").get<std::string>());
            if (!d) throw Error("bad_decision", where + "unknown decision");
            r.decision = *d;
            r.annotator = j.value("annotator", "");
            r.timestamp = j.value("timestamp", std::int64_t{0});
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw Error("malformed_json", where + e.what());
        }
    }
    return out;
}

inline std::vector<AnnotationRecord> load_annotation_log(const std::string& path) {
    try {
        return parse_annotation_log(read_file(path));
    } catch (const Error& e) {
        if (e.code() == "missing_file") throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

/// Applies one decision to an instance. Corpus gold labels are immutable.
inline void apply_decision(ChallengeInstance& ci, Decision d) {
    if (ci.status == LabelStatus::gold_from_corpus)
        throw Error("immutable_label", "instance '" + ci.id + "' carries a corpus gold label");
    if (d == Decision::discard) {
        ci.label.reset();
        ci.status = LabelStatus::discarded;
    } else {
        ci.label = static_cast<Label>(static_cast<int>(d));
        ci.status = LabelStatus::annotated;
    }
}

/// Replays `records` in order over `set`; records for other sets are ignored.
inline void apply_annotations(ChallengeSet& set, const std::vector<AnnotationRecord>& records) {
    for (const auto& r : records)
        if (auto* ci = set.find(r.instance_id)) apply_decision(*ci, r.decision);
}

struct Progress {
    std::size_t pending = 0;
    std::size_t annotated = 0;
    std::size_t discarded = 0;

    std::size_t total() const { return pending + annotated + discarded; }
    bool operator==(const Progress&) const = default;
};

inline nlohmann::json to_json(const Progress& p) {
    return {{"pending", p.pending}, {"annotated", p.annotated}, {"discarded", p.discarded},
            {"total", p.total()}};
}

/// Heuristic and needs-annotation instances await a human decision.
inline bool awaiting_decision(const ChallengeInstance& ci) {
    return ci.status == LabelStatus::needs_annotation || ci.status == LabelStatus::heuristic;
}

inline Progress progress(const ChallengeSet& set) {
    Progress p;
    for (const auto& ci : set.instances()) {
        if (ci.discarded()) ++p.discarded;
        else if (awaiting_decision(ci)) ++p.pending;
        else ++p.annotated;
    }
    return p;
}

inline const ChallengeInstance* next_unannotated(const ChallengeSet& set) {
    for (const auto& ci : set.instances())
        if (awaiting_decision(ci)) return &ci;
    return nullptr;
}

inline std::int64_t utc_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

/// Sets under annotation plus their decision log. Reads may run concurrently;
/// decisions are applied one at a time, log first.
class AnnotationStore {
public:
    using Clock = std::function<std::int64_t()>;

    /// Replays the existing log at `log_path` (if any). An empty path keeps
    /// the log in memory only.
    AnnotationStore(std::vector<ChallengeSet> sets, std::string log_path = {}, Clock clock = utc_now)
        : log_path_(std::move(log_path)), clock_(std::move(clock)) {
        for (auto& s : sets) {
            auto role = s.role();
            if (!sets_.emplace(role, std::move(s)).second)
                throw Error("duplicate_set", "more than one set with role " +
                                                 std::string(to_string(role)));
        }
        for (const auto& [role, s] : sets_)
            for (const auto& ci : s.instances())
                if (!owner_.emplace(ci.id, role).second)
                    throw Error("duplicate_id", "instance id '" + ci.id + "' appears in two sets");
        if (!log_path_.empty() && std::ifstream(log_path_).good())
            for (const auto& r : load_annotation_log(log_path_)) apply_locked(r);
    }

    std::vector<SetRole> roles() const {
        std::shared_lock lock(mu_);
        std::vector<SetRole> out;
        for (const auto& [r, s] : sets_) out.push_back(r);
        return out;
    }

    bool has_role(SetRole r) const {
        std::shared_lock lock(mu_);
        return sets_.count(r) != 0;
    }

    ChallengeSet snapshot(SetRole role) const {
        std::shared_lock lock(mu_);
        return set_locked(role);
    }

    std::optional<ChallengeInstance> find(const std::string& id) const {
        std::shared_lock lock(mu_);
        auto it = owner_.find(id);
        if (it == owner_.end()) return std::nullopt;
        return *sets_.at(it->second).find(id);
    }

    std::optional<ChallengeInstance> next_unannotated(SetRole role) const {
        std::shared_lock lock(mu_);
        const auto* ci = wordswap::next_unannotated(set_locked(role));
        if (!ci) return std::nullopt;
        return *ci;
    }

    Progress progress(SetRole role) const {
        std::shared_lock lock(mu_);
        return wordswap::progress(set_locked(role));
    }

    std::optional<SetRole> role_of(const std::string& id) const {
        std::shared_lock lock(mu_);
        auto it = owner_.find(id);
        if (it == owner_.end()) return std::nullopt;
        return it->second;
    }

    /// Validates, appends to the log, then applies. Returns the progress of
    /// the instance's set.
    Progress record_decision(const std::string& id, std::string_view decision,
                             const std::string& annotator) {
        auto d = parse_decision(decision);
        if (!d) throw Error("bad_decision", "invalid decision '" + std::string(decision) + "'");
        std::unique_lock lock(mu_);
        auto it = owner_.find(id);
        if (it == owner_.end()) throw Error("unknown_id", "unknown instance id '" + id + "'");
        auto& set = sets_.at(it->second);
        if (set.find(id)->status == LabelStatus::gold_from_corpus)
            throw Error("immutable_label", "instance '" + id + "' carries a corpus gold label");
        AnnotationRecord rec{id, *d, annotator, clock_()};
        if (!log_path_.empty()) {
            std::ofstream out(log_path_, std::ios::app | std::ios::binary);
            out << to_json(rec).dump() << '\n';
            out.flush();
            if (!out) throw Error("io_error", "cannot append to annotation log " + log_path_);
        }
        apply_locked(rec);
        return wordswap::progress(set);
    }

    std::vector<AnnotationRecord> log() const {
        std::shared_lock lock(mu_);
        return log_;
    }

private:
    const ChallengeSet& set_locked(SetRole role) const {
        auto it = sets_.find(role);
        if (it == sets_.end())
            throw Error("unknown_role", "no set loaded for role " + std::string(to_string(role)));
        return it->second;
    }

    void apply_locked(const AnnotationRecord& r) {
        auto it = owner_.find(r.instance_id);
        if (it == owner_.end())
            throw Error("unknown_id", "log refers to unknown instance '" + r.instance_id + "'");
        apply_decision(*sets_.at(it->second).find(r.instance_id), r.decision);
        log_.push_back(r);
    }

    mutable std::shared_mutex mu_;
    std::map<SetRole, ChallengeSet> sets_;
    std::map<std::string, SetRole> owner_;
    std::vector<AnnotationRecord> log_;
    std::string log_path_;
    Clock clock_;
};

/// Renders tokens with the pair word bracketed.
inline std::string highlight(const Tokens& tokens, const std::string& word) {
    std::vector<std::string> out;
    for (const auto& t : tokens) out.push_back(t == word ? "[" + t + "]" : t);
    return join(out, " ");
}

/// Interactive terminal loop: e/n/c/d decide, Enter accepts a heuristic
/// pre-selection, q quits. Discards ask for confirmation. Returns the
/// number of decisions recorded.
inline std::size_t run_terminal_session(AnnotationStore& store, SetRole role,
                                        const std::string& annotator, std::istream& in,
                                        std::ostream& out) {
    std::size_t decided = 0;
    while (auto ci = store.next_unannotated(role)) {
        auto p = store.progress(role);
        out << "\n[" << p.annotated + p.discarded << "/" << p.total() << "] " << ci->id << "\n"
            << "  P: " << highlight(ci->premise, ci->pair.w1) << "\n"
            << "  H: " << highlight(ci->hypothesis, ci->pair.w2) << "\n";
        if (ci->label) out << "  suggested: " << to_string(*ci->label) << "\n";
        out << "  (e)ntailment (n)eutral (c)ontradiction (d)iscard"
            << (ci->label ? " <enter>=accept" : "") << " (q)uit > " << std::flush;
        std::string line;
        if (!std::getline(in, line)) break;
        auto cmd = std::string(trim(line));
        std::string decision;
        if (cmd == "q") break;
        if (cmd.empty() && ci->label) decision = std::string(to_string(*ci->label));
        else if (cmd == "e") decision = "entailment";
        else if (cmd == "n") decision = "neutral";
        else if (cmd == "c") decision = "contradiction";
        else if (cmd == "d") {
            out << "  discard as incoherent? (y/N) > " << std::flush;
            std::string confirm;
            if (!std::getline(in, confirm)) break;
            if (trim(confirm) != "y") continue;
            decision = "discard";
        } else {
            out << "  unrecognised input '" << cmd << "'\n";
            continue;
        }
        store.record_decision(ci->id, decision, annotator);
        ++decided;
    }
    auto p = store.progress(role);
    out << "\npending " << p.pending << ", annotated " << p.annotated << ", discarded "
        << p.discarded << "\n";
    return decided;
}

}  // namespace wordswap
