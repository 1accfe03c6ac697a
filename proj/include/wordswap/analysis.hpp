#pragma once

// Joins predictions with challenge sets and subset masks: accuracies, the
// three factor contingency tables, the statistical battery and the JSON /
// markdown reports.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wordswap/annotation.hpp"
#include "wordswap/challenge.hpp"
#include "wordswap/config.hpp"
#include "wordswap/factors.hpp"
#include "wordswap/predictions.hpp"
#include "wordswap/stats.hpp"

namespace wordswap {

using stats::ContingencyTable;
using stats::TestResult;

namespace detail {

inline void require_predictions(const ChallengeSet& set, const Predictions& preds) {
    std::vector<std::string> missing;
    for (const auto& ci : set.instances())
        if (!ci.discarded() && !preds.find(ci.id)) missing.push_back(ci.id);
    if (!missing.empty())
        throw Error("missing_prediction", "model '" + preds.model + "' lacks " +
                                              std::to_string(missing.size()) + " prediction(s) for " +
                                              std::string(to_string(set.role())) + ": " +
                                              join_limited(missing));
}

inline Label gold_of(const ChallengeInstance& ci) {
    if (!ci.labeled()) throw Error("unlabeled", "instance '" + ci.id + "' has no label");
    return *ci.label;
}

}  // namespace detail

/// Fraction of correct predictions over the non-discarded instances (within
/// `mask` when given). Absent when nothing is in scope.
inline std::optional<double> accuracy(const ChallengeSet& set, const Predictions& preds,
                                      const std::set<std::string>* mask = nullptr) {
    detail::require_predictions(set, preds);
    std::size_t n = 0, correct = 0;
    for (const auto& ci : set.instances()) {
        if (ci.discarded()) continue;
        if (mask && !mask->count(ci.id)) continue;
        ++n;
        correct += *preds.find(ci.id) == detail::gold_of(ci);
    }
    if (n == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(n);
}

namespace detail {

template <class Fn>
void for_each_pair(const ChallengeSet& control, const ChallengeSet& transformed, Fn&& fn) {
    std::vector<std::string> unpaired;
    for (const auto& t : transformed.instances()) {
        if (t.discarded()) continue;
        const auto* c = control.find(t.control_id);
        if (!c || c->discarded()) {
            unpaired.push_back(t.id);
            continue;
        }
        fn(*c, t);
    }
    if (!unpaired.empty())
        throw Error("unpaired", "no control instance for: " + join_limited(unpaired));
}

}  // namespace detail

/// Rows: predicted label changed / unchanged between control and transformed.
/// Columns: transformed prediction correct / incorrect.
inline ContingencyTable insensitivity_table(const ChallengeSet& control,
                                            const ChallengeSet& transformed,
                                            const Predictions& preds, bool restrict_to_subset1) {
    detail::require_predictions(control, preds);
    detail::require_predictions(transformed, preds);
    ContingencyTable t({"change", "no change"}, {"correct", "incorrect"});
    detail::for_each_pair(control, transformed, [&](const ChallengeInstance& c,
                                                    const ChallengeInstance& tr) {
        Label gold_t = detail::gold_of(tr);
        if (restrict_to_subset1 && gold_t == detail::gold_of(c)) return;
        Label pc = *preds.find(c.id), pt = *preds.find(tr.id);
        t.at(pc == pt ? 1 : 0, pt == gold_t ? 0 : 1) += 1;
    });
    return t;
}

/// Rows: correct / incorrect. Columns: pair seen / unseen in training.
inline ContingencyTable unseen_table(const ChallengeSet& transformed, const Predictions& preds,
                                     const std::set<std::string>& subset2) {
    detail::require_predictions(transformed, preds);
    ContingencyTable t({"correct", "incorrect"}, {"seen", "unseen"});
    for (const auto& ci : transformed.instances()) {
        if (ci.discarded()) continue;
        bool ok = *preds.find(ci.id) == detail::gold_of(ci);
        t.at(ok ? 0 : 1, subset2.count(ci.id) ? 1 : 0) += 1;
    }
    return t;
}

/// Rows: polarity categories present in the set (entailment, neutral,
/// contradiction, ties, none). Columns: predicted label.
inline ContingencyTable polarity_prediction_table(const ChallengeSet& set, const Predictions& preds,
                                                  const PolarityMap& polarity) {
    detail::require_predictions(set, preds);
    std::map<PolarityCategory, std::array<std::int64_t, 3>> rows;
    for (const auto& ci : set.instances()) {
        if (ci.discarded()) continue;
        auto cat = polarity_of(polarity, ci.pair).category();
        rows[cat][static_cast<std::size_t>(*preds.find(ci.id))] += 1;
    }
    std::vector<std::string> row_labels;
    std::vector<std::vector<std::int64_t>> counts;
    for (const auto& [cat, c] : rows) {
        row_labels.push_back(cat.name());
        counts.push_back({c[0], c[1], c[2]});
    }
    return ContingencyTable(row_labels, {"entailment", "neutral", "contradiction"}, counts);
}

struct Discordance {
    std::int64_t control_only = 0;      // b: control correct, transformed wrong
    std::int64_t transformed_only = 0;  // c: transformed correct, control wrong
    ContingencyTable table;
};

inline Discordance paired_correctness(const ChallengeSet& control, const ChallengeSet& transformed,
                                      const Predictions& preds) {
    detail::require_predictions(control, preds);
    detail::require_predictions(transformed, preds);
    Discordance d;
    d.table = ContingencyTable({"control correct", "control incorrect"},
                               {"transformed correct", "transformed incorrect"});
    detail::for_each_pair(control, transformed, [&](const ChallengeInstance& c,
                                                    const ChallengeInstance& t) {
        bool cc = *preds.find(c.id) == detail::gold_of(c);
        bool tc = *preds.find(t.id) == detail::gold_of(t);
        d.table.at(cc ? 0 : 1, tc ? 0 : 1) += 1;
    });
    d.control_only = d.table.at(0, 1);
    d.transformed_only = d.table.at(1, 0);
    return d;
}

// ---------------------------------------------------------------------------
// Reports

struct SetAccuracy {
    std::optional<double> whole, subset1, subset2, subset3;
    std::size_t n_whole = 0, n_subset1 = 0, n_subset2 = 0, n_subset3 = 0;
};

enum class TestStatus { executed, degenerate, skipped };

inline std::string_view to_string(TestStatus s) {
    switch (s) {
        case TestStatus::executed: return "executed";
        case TestStatus::degenerate: return "degenerate";
        case TestStatus::skipped: return "skipped";
    }
    return "?";
}

struct FactorTest {
    std::string name;    // mcnemar | insensitivity | unseen | polarity
    std::string design;  // paired | independence | homogeneity
    ContingencyTable table;
    TestStatus status = TestStatus::skipped;
    std::optional<TestResult> result;
    std::string note;
    bool significant = false;

    bool counts_toward_m() const { return status != TestStatus::skipped; }
};

struct FactorReport {
    std::string experiment;
    std::string model;
    SetRole control_role = SetRole::I_A;
    SetRole transformed_role = SetRole::I_TA1;
    SetAccuracy control;
    SetAccuracy transformed;
    SubsetMask masks;
    std::vector<FactorTest> tests;
};

struct ReportOptions {
    double alpha_family = 0.05;
    stats::SelectionRules rules;
    std::int64_t mcnemar_exact_below = stats::kDefaultMcNemarExactBelow;
};

struct Report {
    std::string config_hash;
    ReportOptions options;
    int m = 0;
    double alpha_per_test = 0.0;
    nlohmann::json inputs = nlohmann::json::object();
    std::vector<FactorReport> results;
};

struct LoadedExperiment {
    std::string name;
    ChallengeSet control;
    ChallengeSet transformed;
    PolarityMap polarity;
    std::vector<std::string> models;
};

struct ReportInputs {
    std::vector<LoadedExperiment> experiments;
    std::map<std::string, Predictions> models;
    ReportOptions options;
    std::string config_hash;
    nlohmann::json inputs = nlohmann::json::object();
};

namespace detail {

inline std::size_t mask_size(const std::set<std::string>& mask, const ChallengeSet& set) {
    std::size_t n = 0;
    for (const auto& id : mask) n += set.find(id) != nullptr;
    return n;
}

inline std::set<std::string> restrict_mask(const std::set<std::string>& mask, const ChallengeSet& set) {
    std::set<std::string> out;
    for (const auto& id : mask)
        if (set.find(id)) out.insert(id);
    return out;
}

/// Degenerate tables (a single nonzero row or column) cannot show any
/// association: reported with statistic 0, dof 0 and p = 1.
inline FactorTest run_table_test(std::string name, std::string design, ContingencyTable table,
                                 const stats::SelectionRules& rules) {
    FactorTest ft;
    ft.name = std::move(name);
    ft.design = std::move(design);
    ft.table = std::move(table);
    if (ft.table.total() == 0) {
        ft.status = TestStatus::skipped;
        ft.note = "empty table";
        return ft;
    }
    if (ft.table.degenerate()) {
        ft.status = TestStatus::degenerate;
        TestResult r;
        r.method = stats::Method::pearson;
        r.statistic = 0.0;
        r.dof = 0;
        r.p_value = 1.0;
        r.rule = "degenerate: fewer than 2 nonzero rows or columns";
        ft.result = r;
        ft.note = "no variation along one margin; independence holds trivially";
        return ft;
    }
    ft.status = TestStatus::executed;
    ft.result = stats::independence_test(ft.table, rules);
    return ft;
}

}  // namespace detail

/// Accuracies, masks and factor tests for one model on one control /
/// transformed pair. Significance verdicts are filled in by compute_report.
inline FactorReport analyze_experiment(const LoadedExperiment& exp, const Predictions& preds,
                                       const ReportOptions& opts) {
    FactorReport fr;
    fr.experiment = exp.name;
    fr.model = preds.model;
    fr.control_role = exp.control.role();
    fr.transformed_role = exp.transformed.role();
    fr.masks = build_subsets(exp.control, exp.transformed, exp.polarity);

    auto fill = [&](SetAccuracy& acc, const ChallengeSet& set, bool transformed) {
        acc.whole = accuracy(set, preds);
        acc.n_whole = progress(set).total() - progress(set).discarded;
        auto s3 = detail::restrict_mask(fr.masks.subset3, set);
        acc.subset3 = accuracy(set, preds, &s3);
        acc.n_subset3 = s3.size();
        if (transformed) {
            acc.subset1 = accuracy(set, preds, &fr.masks.subset1);
            acc.n_subset1 = fr.masks.subset1.size();
            acc.subset2 = accuracy(set, preds, &fr.masks.subset2);
            acc.n_subset2 = fr.masks.subset2.size();
        }
    };
    fill(fr.control, exp.control, false);
    fill(fr.transformed, exp.transformed, true);

    // paired comparison of control vs transformed correctness
    {
        auto d = paired_correctness(exp.control, exp.transformed, preds);
        FactorTest ft;
        ft.name = "mcnemar";
        ft.design = "paired";
        ft.table = d.table;
        if (d.table.total() == 0) {
            ft.status = TestStatus::skipped;
            ft.note = "no paired instances";
        } else if (d.control_only + d.transformed_only == 0) {
            ft.status = TestStatus::degenerate;
            TestResult r;
            r.method = stats::Method::mcnemar_exact;
            r.p_value = 1.0;
            r.rule = "degenerate: no discordant pairs";
            ft.result = r;
            ft.note = "identical correctness on every pair";
        } else {
            ft.status = TestStatus::executed;
            ft.result = stats::mcnemar(d.control_only, d.transformed_only, opts.mcnemar_exact_below);
            char buf[96];
            std::snprintf(buf, sizeof buf, "%s: b+c=%lld vs exact threshold %lld",
                          ft.result->method == stats::Method::mcnemar_exact ? "exact" : "chi-square",
                          static_cast<long long>(d.control_only + d.transformed_only),
                          static_cast<long long>(opts.mcnemar_exact_below));
            ft.result->rule = buf;
        }
        fr.tests.push_back(std::move(ft));
    }
    fr.tests.push_back(detail::run_table_test(
        "insensitivity", "independence",
        insensitivity_table(exp.control, exp.transformed, preds, true), opts.rules));
    fr.tests.push_back(detail::run_table_test(
        "unseen", "homogeneity", unseen_table(exp.transformed, preds, fr.masks.subset2), opts.rules));
    fr.tests.push_back(detail::run_table_test(
        "polarity", "independence",
        polarity_prediction_table(exp.transformed, preds, exp.polarity), opts.rules));
    return fr;
}

/// Pure function of its inputs. Bonferroni m is the number of tests that
/// produced a p-value across the whole report.
inline Report compute_report(const ReportInputs& in) {
    Report rep;
    rep.config_hash = in.config_hash;
    rep.options = in.options;
    rep.inputs = in.inputs;
    for (const auto& exp : in.experiments) {
        for (const auto& model : exp.models) {
            auto it = in.models.find(model);
            if (it == in.models.end())
                throw Error("missing_prediction", "no predictions loaded for model '" + model + "'");
            rep.results.push_back(analyze_experiment(exp, it->second, in.options));
        }
    }
    for (const auto& fr : rep.results)
        for (const auto& t : fr.tests) rep.m += t.counts_toward_m();
    rep.alpha_per_test = rep.m > 0 ? stats::bonferroni(in.options.alpha_family, rep.m)
                                   : in.options.alpha_family;
    for (auto& fr : rep.results)
        for (auto& t : fr.tests)
            t.significant = t.result && t.status == TestStatus::executed &&
                            t.result->p_value < rep.alpha_per_test;
    return rep;
}

inline ReportInputs load_report_inputs(const ReportConfig& cfg) {
    ReportInputs in;
    in.options.alpha_family = cfg.run.alpha;
    in.options.rules = cfg.run.rules;
    in.options.mcnemar_exact_below = cfg.run.mcnemar_exact_below;
    in.config_hash = cfg.hash();
    auto digest = [&](const std::string& path) {
        in.inputs[cfg.display(path)] = sha256_hex(read_file(path)).substr(0, 16);
    };
    for (const auto& e : cfg.experiments) {
        LoadedExperiment le;
        le.name = e.name;
        le.control = load_set(e.control);
        le.transformed = load_set(e.transformed);
        digest(e.control);
        digest(e.transformed);
        for (const auto& a : e.annotations) {
            auto records = load_annotation_log(a);
            apply_annotations(le.control, records);
            apply_annotations(le.transformed, records);
            digest(a);
        }
        le.polarity = load_polarity(e.polarity);
        digest(e.polarity);
        le.models = e.models;
        in.experiments.push_back(std::move(le));
    }
    for (const auto& [model, paths] : cfg.model_predictions) {
        Predictions merged;
        merged.model = model;
        for (const auto& p : paths) {
            merged.merge(load_predictions(p, model));
            digest(p);
        }
        in.models.emplace(model, std::move(merged));
    }
    return in;
}

inline Report run_report(const ReportConfig& cfg) { return compute_report(load_report_inputs(cfg)); }

// ---------------------------------------------------------------------------
// Rendering

/// (r-1)(c-1) over rows and columns with a nonzero marginal; 0 when fewer
/// than two of either remain.
inline int table_dof(const ContingencyTable& t) {
    int r = 0, c = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) r += t.row_total(i) > 0;
    for (std::size_t j = 0; j < t.cols(); ++j) c += t.col_total(j) > 0;
    return r < 2 || c < 2 ? 0 : (r - 1) * (c - 1);
}

inline nlohmann::json to_json(const ContingencyTable& t) {
    return {{"rows", t.row_labels()},
            {"columns", t.col_labels()},
            {"counts", t.matrix()},
            {"dof", table_dof(t)}};
}

namespace detail {

inline nlohmann::json opt(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const SetAccuracy& a, bool transformed) {
    nlohmann::json j = {{"whole", opt(a.whole)}, {"n_whole", a.n_whole},
                        {"subset3", opt(a.subset3)}, {"n_subset3", a.n_subset3}};
    if (transformed) {
        j["subset1"] = opt(a.subset1);
        j["n_subset1"] = a.n_subset1;
        j["subset2"] = opt(a.subset2);
        j["n_subset2"] = a.n_subset2;
    }
    return j;
}

}  // namespace detail

inline nlohmann::json to_json(const Report& rep) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& fr : rep.results) {
        nlohmann::json tests = nlohmann::json::array();
        for (const auto& t : fr.tests) {
            tests.push_back({{"name", t.name},
                             {"design", t.design},
                             {"status", to_string(t.status)},
                             {"table", to_json(t.table)},
                             {"result", t.result ? stats::to_json(*t.result) : nlohmann::json(nullptr)},
                             {"significant", t.significant},
                             {"note", t.note}});
        }
        results.push_back({{"experiment", fr.experiment},
                           {"model", fr.model},
                           {"control_role", to_string(fr.control_role)},
                           {"transformed_role", to_string(fr.transformed_role)},
                           {"accuracy",
                            {{"control", detail::to_json(fr.control, false)},
                             {"transformed", detail::to_json(fr.transformed, true)}}},
                           {"tests", tests}});
    }
    return {{"tool", "wordswap"},
            {"version", kVersion},
            {"config_hash", rep.config_hash},
            {"alpha_family", rep.options.alpha_family},
            {"bonferroni_m", rep.m},
            {"alpha_per_test", rep.alpha_per_test},
            {"rules",
             {{"fisher_expected_below", rep.options.rules.fisher_expected_below},
              {"fisher_max_total", rep.options.rules.fisher_max_total},
              {"yates_expected_below", rep.options.rules.yates_expected_below},
              {"mcnemar_exact_below", rep.options.mcnemar_exact_below}}},
            {"inputs", rep.inputs},
            {"results", results}};
}

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string cell(const std::optional<double>& v) { return v ? fmt("%.3f", *v) : ""; }

inline std::string describe(const TestResult& r) {
    std::string s = std::string(stats::to_string(r.method));
    if (r.statistic && r.dof) s += ", chi2(" + std::to_string(*r.dof) + ") = " + fmt("%.2f", *r.statistic);
    s += ", p = " + fmt("%.4g", r.p_value);
    return s;
}

}  // namespace detail

/// Accuracy table laid out like the usual model-comparison table (rows =
/// sets, columns = whole sample and subsets), followed by each factor table.
inline std::string to_markdown(const Report& rep) {
    std::string md = "# Factor analysis report\n\n";
    md += "- config hash: `" + rep.config_hash + "`\n";
    md += "- tests with a p-value (Bonferroni m): " + std::to_string(rep.m) + "\n";
    md += "- family alpha: " + detail::fmt("%g", rep.options.alpha_family) +
          ", per-test alpha: " + detail::fmt("%.3g", rep.alpha_per_test) + "\n\n";

    md += "## Accuracy\n\n";
    md += "| Experiment | Set | Model | Whole sample | Subset 1 | Subset 2 | Subset 3 |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const auto& fr : rep.results) {
        md += "| " + fr.experiment + " | " + std::string(to_string(fr.control_role)) + " | " + fr.model +
              " | " + detail::cell(fr.control.whole) + " |  |  | " + detail::cell(fr.control.subset3) +
              " |\n";
        md += "| " + fr.experiment + " | " + std::string(to_string(fr.transformed_role)) + " | " +
              fr.model + " | " + detail::cell(fr.transformed.whole) + " | " +
              detail::cell(fr.transformed.subset1) + " | " + detail::cell(fr.transformed.subset2) +
              " | " + detail::cell(fr.transformed.subset3) + " |\n";
    }

    for (const auto& fr : rep.results) {
        md += "\n## " + fr.experiment + " / " + fr.model + " (" +
              std::string(to_string(fr.control_role)) + " -> " +
              std::string(to_string(fr.transformed_role)) + ")\n";
        for (const auto& t : fr.tests) {
            md += "\n### " + t.name + " (" + t.design + ")\n\n";
            md += "|  |";
            for (const auto& c : t.table.col_labels()) md += " " + c + " |";
            md += "\n|---|";
            for (std::size_t c = 0; c < t.table.cols(); ++c) md += "---|";
            md += "\n";
            for (std::size_t r = 0; r < t.table.rows(); ++r) {
                md += "| " + t.table.row_labels()[r] + " |";
                for (std::size_t c = 0; c < t.table.cols(); ++c)
                    md += " " + std::to_string(t.table.at(r, c)) + " |";
                md += "\n";
            }
            md += "\n";
            if (t.result) {
                md += "- " + detail::describe(*t.result) + " [" + std::string(to_string(t.status)) + "]\n";
                if (!t.result->rule.empty()) md += "- rule: " + t.result->rule + "\n";
                for (const auto& w : t.result->warnings) md += "- warning: " + w + "\n";
                md += std::string("- significant at per-test alpha: ") + (t.significant ? "yes" : "no") + "\n";
            } else {
                md += "- skipped: " + t.note + "\n";
            }
        }
    }
    return md;
}

}  // namespace wordswap
