#pragma once

// Corpus ingestion: NLI labels, tokenization, SNLI/native JSONL loading,
// word-pair lexicons and the premise/hypothesis occurrence index.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wordswap/util.hpp"

namespace wordswap {

enum class Label { entailment = 0, neutral = 1, contradiction = 2 };

inline constexpr std::array<Label, 3> kLabels = {Label::entailment, Label::neutral,
                                                 Label::contradiction};

inline std::string_view to_string(Label l) {
    switch (l) {
        case Label::entailment: return "entailment";
        case Label::neutral: return "neutral";
        case Label::contradiction: return "contradiction";
    }
    return "?";
}

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "entailment") return Label::entailment;
    if (s == "neutral") return Label::neutral;
    if (s == "contradiction") return Label::contradiction;
    return std::nullopt;
}

inline Label label_or_throw(std::string_view s) {
    auto l = parse_label(s);
    if (!l) throw Error("bad_label", "unknown label '" + std::string(s) + "'");
    return *l;
}

using Tokens = std::vector<std::string>;

/// Lowercases, splits on whitespace and strips .,;:!?"()[] from token edges.
inline Tokens tokenize(std::string_view sentence) {
    constexpr std::string_view punct = ".,;:!?\"()[]";
    Tokens out;
    std::size_t i = 0;
    while (i < sentence.size()) {
        while (i < sentence.size() && std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
        std::size_t j = i;
        while (j < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
        std::string_view word = sentence.substr(i, j - i);
        auto b = word.find_first_not_of(punct);
        if (b != std::string_view::npos) {
            auto e = word.find_last_not_of(punct);
            std::string tok(word.substr(b, e - b + 1));
            for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            out.push_back(std::move(tok));
        }
        i = j;
    }
    return out;
}

inline std::string detokenize(const Tokens& tokens) { return join(tokens, " "); }

inline bool contains(const Tokens& tokens, std::string_view word) {
    return std::find(tokens.begin(), tokens.end(), word) != tokens.end();
}

inline std::size_t count_of(const Tokens& tokens, std::string_view word) {
    return static_cast<std::size_t>(std::count(tokens.begin(), tokens.end(), word));
}

struct Instance {
    std::string id;
    Tokens premise;
    Tokens hypothesis;
    Label gold = Label::neutral;
    std::string raw_premise;
    std::string raw_hypothesis;

    bool operator==(const Instance&) const = default;
};

inline Instance make_instance(std::string id, std::string premise, std::string hypothesis,
                              Label gold) {
    Instance inst;
    inst.id = std::move(id);
    inst.premise = tokenize(premise);
    inst.hypothesis = tokenize(hypothesis);
    inst.gold = gold;
    inst.raw_premise = std::move(premise);
    inst.raw_hypothesis = std::move(hypothesis);
    return inst;
}

class Corpus {
public:
    Corpus() = default;

    /// Throws on duplicate id or empty token sequence.
    void add(Instance inst) {
        if (inst.premise.empty() || inst.hypothesis.empty())
            throw Error("empty_sentence", "instance '" + inst.id + "' has an empty sentence");
        auto [it, inserted] = by_id_.emplace(inst.id, instances_.size());
        if (!inserted) throw Error("duplicate_id", "duplicate instance id '" + inst.id + "'");
        instances_.push_back(std::move(inst));
    }

    const std::vector<Instance>& instances() const { return instances_; }
    std::size_t size() const { return instances_.size(); }
    bool empty() const { return instances_.empty(); }

    const Instance* find(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &instances_[it->second];
    }

    /// Records dropped at load time because the gold label was "-".
    std::size_t skipped_no_consensus = 0;
    std::string source_digest;

private:
    std::vector<Instance> instances_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

enum class CorpusFormat { automatic, snli, native };

namespace detail {

inline std::string string_field(const nlohmann::json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw Error("schema", "line " + std::to_string(line) + ": missing string field '" + key + "'");
    return it->get<std::string>();
}

}  // namespace detail

/// Parses JSONL text. Lines with gold label "-" are skipped and counted.
inline Corpus parse_corpus(std::string_view text, CorpusFormat format = CorpusFormat::automatic) {
    Corpus corpus;
    corpus.source_digest = sha256_hex(text);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error("malformed_json", "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object())
            throw Error("malformed_json", "line " + std::to_string(line_no) + ": not a JSON object");

        CorpusFormat f = format;
        if (f == CorpusFormat::automatic)
            f = j.contains("sentence1") ? CorpusFormat::snli : CorpusFormat::native;

        std::string id, premise, hypothesis, gold;
        if (f == CorpusFormat::snli) {
            id = detail::string_field(j, "pairID", line_no);
            premise = detail::string_field(j, "sentence1", line_no);
            hypothesis = detail::string_field(j, "sentence2", line_no);
            gold = detail::string_field(j, "gold_label", line_no);
        } else {
            id = detail::string_field(j, "id", line_no);
            premise = detail::string_field(j, "premise", line_no);
            hypothesis = detail::string_field(j, "hypothesis", line_no);
            gold = detail::string_field(j, "gold", line_no);
        }
        if (gold == "-") {
            ++corpus.skipped_no_consensus;
            continue;
        }
        auto label = parse_label(gold);
        if (!label)
            throw Error("bad_label",
                        "line " + std::to_string(line_no) + ": unknown gold label '" + gold + "'");
        try {
            corpus.add(make_instance(std::move(id), std::move(premise), std::move(hypothesis), *label));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return corpus;
}

inline Corpus load_corpus(const std::string& path, CorpusFormat format = CorpusFormat::automatic) {
    try {
        return parse_corpus(read_file(path), format);
    } catch (const Error& e) {
        if (e.code() == "missing_file") throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

inline nlohmann::json to_native_json(const Instance& inst) {
    return {{"id", inst.id},
            {"premise", inst.raw_premise},
            {"hypothesis", inst.raw_hypothesis},
            {"gold", to_string(inst.gold)}};
}

inline std::string serialize_native(const Corpus& corpus) {
    std::string out;
    for (const auto& inst : corpus.instances()) {
        out += to_native_json(inst).dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lexicons

enum class Relation { antonym, hypernym, hyponym, synonym };

inline std::string_view to_string(Relation r) {
    switch (r) {
        case Relation::antonym: return "antonym";
        case Relation::hypernym: return "hypernym";
        case Relation::hyponym: return "hyponym";
        case Relation::synonym: return "synonym";
    }
    return "?";
}

inline std::optional<Relation> parse_relation(std::string_view s) {
    if (s == "antonym") return Relation::antonym;
    if (s == "hypernym") return Relation::hypernym;
    if (s == "hyponym") return Relation::hyponym;
    if (s == "synonym") return Relation::synonym;
    return std::nullopt;
}

/// Relation of w1 relative to w2 when the relation names w2 relative to w1.
inline Relation inverse(Relation r) {
    switch (r) {
        case Relation::hypernym: return Relation::hyponym;
        case Relation::hyponym: return Relation::hypernym;
        default: return r;
    }
}

/// Ordered (premise-side, hypothesis-side) token pair; the relation names
/// what w2 is with respect to w1 ("footbridge bridge hypernym").
struct WordPair {
    std::string w1;
    std::string w2;
    Relation relation = Relation::antonym;

    WordPair reversed() const { return {w2, w1, inverse(relation)}; }

    auto operator<=>(const WordPair&) const = default;
    bool operator==(const WordPair&) const = default;
};

/// Order-sensitive key into the occurrence index and polarity tables.
struct PairKey {
    std::string first;
    std::string second;

    auto operator<=>(const PairKey&) const = default;
    bool operator==(const PairKey&) const = default;
};

inline PairKey key_of(const WordPair& p) { return {p.w1, p.w2}; }

inline bool is_lexicon_token(std::string_view w) {
    if (w.empty()) return false;
    return std::none_of(w.begin(), w.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isspace(u) || std::isupper(u);
    });
}

struct Lexicon {
    std::vector<WordPair> pairs;
    std::size_t duplicates = 0;
    std::string source_digest;
};

/// TSV: w1 <tab> w2 <tab> relation. Blank lines and `#` comments are ignored.
inline Lexicon parse_lexicon(std::string_view text) {
    Lexicon lex;
    lex.source_digest = sha256_hex(text);
    std::set<WordPair> seen;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty() || line.front() == '#') continue;
        auto cols = split(line, '\t');
        auto where = "line " + std::to_string(line_no) + ": ";
        if (cols.size() != 3)
            throw Error("schema", where + "expected 3 tab-separated columns, got " +
                                      std::to_string(cols.size()));
        auto rel = parse_relation(cols[2]);
        if (!rel) throw Error("bad_relation", where + "unknown relation '" + cols[2] + "'");
        for (int i = 0; i < 2; ++i)
            if (!is_lexicon_token(cols[i]))
                throw Error("schema", where + "'" + cols[i] + "' is not a single lowercase word");
        if (cols[0] == cols[1]) throw Error("schema", where + "w1 equals w2 ('" + cols[0] + "')");
        WordPair p{cols[0], cols[1], *rel};
        if (!seen.insert(p).second) {
            ++lex.duplicates;
            continue;
        }
        lex.pairs.push_back(std::move(p));
    }
    return lex;
}

inline Lexicon load_lexicon(const std::string& path) {
    try {
        return parse_lexicon(read_file(path));
    } catch (const Error& e) {
        if (e.code() == "missing_file") throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Occurrence index

/// Ordered pair -> sorted ids of instances with first in premise and second
/// in hypothesis. Only keys requested at build time are present.
class OccurrenceIndex {
public:
    bool has_key(const PairKey& k) const { return entries_.count(k) != 0; }

    const std::vector<std::string>& ids(const PairKey& k) const {
        auto it = entries_.find(k);
        if (it == entries_.end())
            throw Error("not_indexed", "pair (" + k.first + ", " + k.second + ") is not indexed");
        return it->second;
    }
    const std::vector<std::string>& ids(const WordPair& p) const { return ids(key_of(p)); }

    const std::map<PairKey, std::vector<std::string>>& entries() const { return entries_; }

    std::map<PairKey, std::vector<std::string>>& mutable_entries() { return entries_; }

private:
    std::map<PairKey, std::vector<std::string>> entries_;
};

/// Indexes every pair in `pairs` and its reverse.
template <class PairRange>
OccurrenceIndex build_index(const Corpus& corpus, const PairRange& pairs) {
    OccurrenceIndex index;
    auto& entries = index.mutable_entries();
    std::unordered_map<std::string, std::vector<std::string>> by_first;
    std::set<PairKey> keys;
    for (const auto& p : pairs) {
        PairKey a = key_of(p);
        PairKey b{a.second, a.first};
        for (auto& k : {a, b}) {
            if (keys.insert(k).second) {
                entries.emplace(k, std::vector<std::string>{});
                by_first[k.first].push_back(k.second);
            }
        }
    }
    for (const auto& inst : corpus.instances()) {
        std::unordered_set<std::string_view> hyp(inst.hypothesis.begin(), inst.hypothesis.end());
        std::unordered_set<std::string_view> done;
        for (const auto& tok : inst.premise) {
            if (!done.insert(tok).second) continue;
            auto it = by_first.find(tok);
            if (it == by_first.end()) continue;
            for (const auto& second : it->second)
                if (hyp.count(second)) entries[PairKey{tok, second}].push_back(inst.id);
        }
    }
    for (auto& [k, ids] : entries) std::sort(ids.begin(), ids.end());
    return index;
}

}  // namespace wordswap
