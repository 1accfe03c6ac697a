#pragma once

// Run configuration: INI-style key/value files (boost::property_tree) with
// command-line overrides, and the canonical hash embedded in artifacts.
//
//   [run]
//   seed = 13
//   min_frequency = 10          # substitution threshold t
//   alpha = 0.05                # family-wise level before Bonferroni
//   mcnemar_exact_below = 25
//   fisher_expected_below = 5
//   fisher_max_total = 1000
//   yates_expected_below = 10
//   out = out
//   corpus = train.jsonl        # comma-separated lists allowed
//   lexicon = antonyms.tsv
//
//   [experiment:ita1]
//   control = I_A.jsonl
//   transformed = I_TA1.jsonl
//   annotations = log.jsonl     # optional, applied to both sets
//   polarity = polarity.tsv
//   models = DAM, ESIM
//
//   [model:DAM]
//   predictions = dam_I_A.tsv, dam_I_TA1.tsv

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wordswap/stats.hpp"
#include "wordswap/util.hpp"

namespace wordswap {

struct RunConfig {
    std::vector<std::string> corpus_paths;
    std::vector<std::string> lexicon_paths;
    std::uint64_t seed = 13;
    std::size_t min_frequency = 10;
    double alpha = 0.05;
    std::int64_t mcnemar_exact_below = stats::kDefaultMcNemarExactBelow;
    stats::SelectionRules rules;
    std::string out_dir = "out";

    /// Canonical key=value listing; the basis of the config hash.
    std::string canonical() const {
        std::ostringstream ss;
        ss.precision(17);
        ss << "alpha=" << alpha << "\n"
           << "corpus=" << join(corpus_paths, ",") << "\n"
           << "fisher_expected_below=" << rules.fisher_expected_below << "\n"
           << "fisher_max_total=" << rules.fisher_max_total << "\n"
           << "lexicon=" << join(lexicon_paths, ",") << "\n"
           << "mcnemar_exact_below=" << mcnemar_exact_below << "\n"
           << "min_frequency=" << min_frequency << "\n"
           << "seed=" << seed << "\n"
           << "yates_expected_below=" << rules.yates_expected_below << "\n";
        return ss.str();
    }

    std::string hash(std::string_view extra = {}) const {
        return sha256_hex(canonical() + std::string(extra)).substr(0, 16);
    }

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("config", "alpha must lie in (0, 1]");
        if (mcnemar_exact_below < 0) throw Error("config", "mcnemar_exact_below must be >= 0");
        for (const auto* list : {&corpus_paths, &lexicon_paths})
            for (const auto& p : *list)
                if (!std::filesystem::exists(p)) throw Error("missing_file", "no such file: " + p);
    }
};

inline std::vector<std::string> parse_list(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& part : split(s, ',')) {
        auto t = trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

namespace detail {

inline std::string strip_comment(const std::string& v) {
    auto pos = v.find(" #");
    return std::string(trim(pos == std::string::npos ? v : v.substr(0, pos)));
}

template <class T>
T convert(const std::string& key, const std::string& raw) {
    std::istringstream ss(raw);
    T v{};
    ss >> v;
    if (ss.fail() || !ss.eof()) throw Error("config", "bad value for '" + key + "': '" + raw + "'");
    return v;
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace detail

/// Applies `[run]` keys onto `cfg`. Unknown keys are rejected.
inline void apply_run_section(RunConfig& cfg, const boost::property_tree::ptree& run,
                              const std::filesystem::path& base) {
    for (const auto& [key, node] : run) {
        auto v = detail::strip_comment(node.data());
        if (key == "seed") cfg.seed = detail::convert<std::uint64_t>(key, v);
        else if (key == "min_frequency" || key == "t")
            cfg.min_frequency = detail::convert<std::size_t>(key, v);
        else if (key == "alpha") cfg.alpha = detail::convert<double>(key, v);
        else if (key == "mcnemar_exact_below")
            cfg.mcnemar_exact_below = detail::convert<std::int64_t>(key, v);
        else if (key == "fisher_expected_below")
            cfg.rules.fisher_expected_below = detail::convert<double>(key, v);
        else if (key == "fisher_max_total")
            cfg.rules.fisher_max_total = detail::convert<std::int64_t>(key, v);
        else if (key == "yates_expected_below")
            cfg.rules.yates_expected_below = detail::convert<double>(key, v);
        else if (key == "out") cfg.out_dir = detail::resolve(base, v);
        else if (key == "corpus") {
            cfg.corpus_paths.clear();
            for (auto& p : parse_list(v)) cfg.corpus_paths.push_back(detail::resolve(base, p));
        } else if (key == "lexicon") {
            cfg.lexicon_paths.clear();
            for (auto& p : parse_list(v)) cfg.lexicon_paths.push_back(detail::resolve(base, p));
        } else throw Error("config", "unknown [run] key '" + key + "'");
    }
}

inline boost::property_tree::ptree read_ini(const std::string& path) {
    boost::property_tree::ptree tree;
    std::istringstream in(read_file(path));
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error("config", path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    return tree;
}

inline RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    auto tree = read_ini(path);
    auto base = std::filesystem::path(path).parent_path();
    if (auto run = tree.get_child_optional("run")) apply_run_section(cfg, *run, base);
    return cfg;
}

struct ExperimentConfig {
    std::string name;
    std::string control;
    std::string transformed;
    std::vector<std::string> annotations;
    std::string polarity;
    std::vector<std::string> models;
};

struct ReportConfig {
    RunConfig run;
    std::vector<ExperimentConfig> experiments;
    std::map<std::string, std::vector<std::string>> model_predictions;
    /// Paths as written in the config, relative to its directory; these go
    /// into the report instead of resolved paths.
    std::map<std::string, std::string> display_paths;

    std::string canonical() const {
        std::string s = run.canonical();
        for (const auto& e : experiments) {
            s += "[experiment:" + e.name + "]\ncontrol=" + display_paths.at(e.control) +
                 "\ntransformed=" + display_paths.at(e.transformed) + "\npolarity=" +
                 display_paths.at(e.polarity) + "\nmodels=" + join(e.models, ",") + "\n";
            for (const auto& a : e.annotations) s += "annotations=" + display_paths.at(a) + "\n";
        }
        for (const auto& [m, paths] : model_predictions) {
            s += "[model:" + m + "]\n";
            for (const auto& p : paths) s += "predictions=" + display_paths.at(p) + "\n";
        }
        return s;
    }
    std::string hash() const { return sha256_hex(canonical()).substr(0, 16); }

    std::string display(const std::string& resolved) const {
        auto it = display_paths.find(resolved);
        return it == display_paths.end() ? resolved : it->second;
    }
};

inline ReportConfig load_report_config(const std::string& path) {
    ReportConfig cfg;
    auto tree = read_ini(path);
    auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        auto r = detail::resolve(base, p);
        cfg.display_paths.emplace(r, p);
        return r;
    };
    for (const auto& [section, node] : tree) {
        if (section == "run") {
            apply_run_section(cfg.run, node, base);
        } else if (section.rfind("experiment:", 0) == 0) {
            ExperimentConfig e;
            e.name = section.substr(11);
            for (const auto& [key, v] : node) {
                auto val = detail::strip_comment(v.data());
                if (key == "control") e.control = resolve(val);
                else if (key == "transformed") e.transformed = resolve(val);
                else if (key == "polarity") e.polarity = resolve(val);
                else if (key == "annotations")
                    for (auto& p : parse_list(val)) e.annotations.push_back(resolve(p));
                else if (key == "models") e.models = parse_list(val);
                else throw Error("config", "unknown key '" + key + "' in [" + section + "]");
            }
            if (e.control.empty() || e.transformed.empty() || e.polarity.empty() || e.models.empty())
                throw Error("config", "[" + section + "] needs control, transformed, polarity and models");
            cfg.experiments.push_back(std::move(e));
        } else if (section.rfind("model:", 0) == 0) {
            auto name = section.substr(6);
            std::vector<std::string> paths;
            for (const auto& [key, v] : node) {
                if (key != "predictions")
                    throw Error("config", "unknown key '" + key + "' in [" + section + "]");
                for (auto& p : parse_list(detail::strip_comment(v.data()))) paths.push_back(resolve(p));
            }
            cfg.model_predictions[name] = std::move(paths);
        } else {
            throw Error("config", "unknown section [" + section + "]");
        }
    }
    for (const auto& e : cfg.experiments)
        for (const auto& m : e.models)
            if (!cfg.model_predictions.count(m))
                throw Error("config", "experiment '" + e.name + "' uses undeclared model '" + m + "'");
    return cfg;
}

}  // namespace wordswap
