#pragma once

// Model prediction files: TSV (instance_id, predicted_label) or JSONL.

#include <nlohmann/json.hpp>

#include <map>
#include <string>

#include "wordswap/corpus.hpp"

namespace wordswap {

struct Predictions {
    std::string model;
    std::map<std::string, Label> by_id;

    std::optional<Label> find(const std::string& id) const {
        auto it = by_id.find(id);
        if (it == by_id.end()) return std::nullopt;
        return it->second;
    }

    void add(const std::string& id, Label l) {
        if (!by_id.emplace(id, l).second)
            throw Error("duplicate_prediction",
                        "model '" + model + "' has more than one prediction for '" + id + "'");
    }

    /// Merges another file's records; duplicates are an error.
    void merge(const Predictions& other) {
        for (const auto& [id, l] : other.by_id) add(id, l);
    }
};

/// JSONL records use `instance_id` (or `id`) and `predicted` (or
/// `predicted_label`); TSV lines are `instance_id<TAB>label` with an
/// optional header and `#` comments.
inline Predictions parse_predictions(std::string_view text, const std::string& model) {
    Predictions preds;
    preds.model = model;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto where = "line " + std::to_string(line_no) + ": ";
        std::string id, label;
        if (line.front() == '{') {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw Error("malformed_json", where + e.what());
            }
            auto get = [&](std::initializer_list<const char*> keys) -> std::string {
                for (auto k : keys)
                    if (auto it = j.find(k); it != j.end() && it->is_string()) return it->get<std::string>();
                throw Error("schema", where + "missing field '" + *keys.begin() + "'");
            };
            id = get({"instance_id", "id"});
            label = get({"predicted", "predicted_label"});
            if (auto it = j.find("model"); it != j.end() && it->is_string() && preds.model.empty())
                preds.model = it->get<std::string>();
        } else {
            auto cols = split(line, '\t');
            if (cols.size() != 2) throw Error("schema", where + "expected 2 tab-separated columns");
            if (cols[0] == "instance_id") continue;
            id = cols[0];
            label = std::string(trim(cols[1]));
        }
        auto l = parse_label(label);
        if (!l) throw Error("bad_label", where + "unknown predicted label '" + label + "'");
        preds.add(id, *l);
    }
    return preds;
}

inline Predictions load_predictions(const std::string& path, const std::string& model) {
    try {
        return parse_predictions(read_file(path), model);
    } catch (const Error& e) {
        if (e.code() == "missing_file") throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

inline std::string serialize_predictions(const Predictions& preds, std::string_view comment = {}) {
    std::string out;
    if (!comment.empty()) out += "# " + std::string(comment) + "\n";
    out += "instance_id\tpredicted_label\n";
    for (const auto& [id, l] : preds.by_id) out += id + '\t' + std::string(to_string(l)) + '\n';
    return out;
}

}  // namespace wordswap
