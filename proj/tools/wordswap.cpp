// wordswap: build word-pair-swap challenge sets, compute pair polarity,
// run baselines, collect annotations and analyse model predictions.

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "wordswap/annotation_server.hpp"
#include "wordswap/wordswap.hpp"

namespace fs = std::filesystem;
using namespace wordswap;

namespace {

struct Common {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> corpus;
    std::vector<std::string> lexicon;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> min_frequency;
    std::optional<double> alpha;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "INI file with a [run] section")->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out_dir, "output directory (env WORDSWAP_OUT, default ./out)");
}

/// Defaults < config file < WORDSWAP_OUT (output dir only) < flags.
RunConfig effective(const Common& c) {
    RunConfig cfg;
    if (!c.config_path.empty()) cfg = load_run_config(c.config_path);
    if (const char* env = std::getenv("WORDSWAP_OUT"); env && *env) cfg.out_dir = env;
    if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
    if (!c.corpus.empty()) cfg.corpus_paths = c.corpus;
    if (!c.lexicon.empty()) cfg.lexicon_paths = c.lexicon;
    if (c.seed) cfg.seed = *c.seed;
    if (c.min_frequency) cfg.min_frequency = *c.min_frequency;
    if (c.alpha) cfg.alpha = *c.alpha;
    cfg.validate();
    return cfg;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw Error("usage", what + " is required");
    if (!fs::exists(path)) throw Error("missing_file", what + " not found: " + path);
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / name;
}

CorpusFormat parse_format(const std::string& s) {
    if (s == "snli") return CorpusFormat::snli;
    if (s == "native") return CorpusFormat::native;
    return CorpusFormat::automatic;
}

Corpus load_corpora(const RunConfig& cfg, CorpusFormat format) {
    if (cfg.corpus_paths.empty()) throw Error("usage", "--corpus is required");
    if (cfg.corpus_paths.size() == 1) return load_corpus(cfg.corpus_paths.front(), format);
    // several files are concatenated into one corpus
    std::string text;
    for (const auto& p : cfg.corpus_paths) {
        text += read_file(p);
        if (!text.empty() && text.back() != '\n') text += '\n';
    }
    return parse_corpus(text, format);
}

Lexicon load_lexicons(const std::vector<std::string>& paths) {
    Lexicon merged;
    std::set<WordPair> seen;
    std::string digests;
    for (const auto& p : paths) {
        auto lex = load_lexicon(p);
        merged.duplicates += lex.duplicates;
        digests += lex.source_digest;
        for (auto& pair : lex.pairs) {
            if (seen.insert(pair).second) merged.pairs.push_back(pair);
            else ++merged.duplicates;
        }
    }
    merged.source_digest = paths.size() == 1 ? digests : sha256_hex(digests);
    return merged;
}

// ---------------------------------------------------------------------------

int cmd_build_sets(const Common& c, const std::string& format, const std::string& relation,
                   const std::string& roles_arg, const std::vector<std::string>& substitutions) {
    auto cfg = effective(c);
    if (cfg.lexicon_paths.empty()) throw Error("usage", "--lexicon is required");
    for (const auto& s : substitutions) require_file(s, "substitution lexicon");
    BuildOptions opts;
    if (relation == "antonym") opts.family = PairFamily::antonym;
    else if (relation == "hypernym" || relation == "hypernymy") opts.family = PairFamily::hypernymy;
    else throw Error("usage", "--relation must be antonym or hypernym");
    opts.seed = cfg.seed;
    opts.min_frequency = cfg.min_frequency;

    std::vector<SetRole> roles;
    for (const auto& r : parse_list(roles_arg)) {
        auto role = parse_role(r);
        if (!role) throw Error("usage", "unknown role '" + r + "'");
        if (is_antonym_role(*role) != (opts.family == PairFamily::antonym))
            throw Error("usage", "role " + r + " does not belong to relation " + relation);
        roles.push_back(*role);
    }

    auto corpus = load_corpora(cfg, parse_format(format));
    auto lexicon = load_lexicons(cfg.lexicon_paths);
    std::vector<WordPair> subs = load_lexicons(substitutions).pairs;
    auto result = build_challenge_sets(corpus, lexicon, subs, opts);

    if (roles.empty())
        for (const auto& [role, set] : result.sets) roles.push_back(role);

    const auto hash = cfg.hash();
    nlohmann::json manifest = {{"tool", "wordswap"},
                               {"version", kVersion},
                               {"config_hash", hash},
                               {"seed", cfg.seed},
                               {"min_frequency", cfg.min_frequency},
                               {"relation", relation},
                               {"corpus_digest", corpus.source_digest},
                               {"lexicon_digest", lexicon.source_digest},
                               {"corpus_size", corpus.size()},
                               {"skipped_no_consensus", corpus.skipped_no_consensus},
                               {"lexicon_duplicates", lexicon.duplicates},
                               {"sets", nlohmann::json::object()},
                               {"skipped", nlohmann::json::array()}};
    std::set<SetRole> wanted(roles.begin(), roles.end());
    for (auto role : roles) {
        const auto& set = result.sets.at(role);
        auto name = std::string(to_string(role)) + ".jsonl";
        write_file(out_path(cfg, name).string(), serialize_set(set));
        manifest["sets"][std::string(to_string(role))] = {{"file", name}, {"size", set.size()}};
        if (set.empty()) std::cerr << "warning: " << to_string(role) << " is empty\n";
    }
    for (const auto& s : result.skipped)
        if (wanted.count(s.role))
            manifest["skipped"].push_back(
                {{"control_id", s.control_id}, {"role", to_string(s.role)}, {"reason", s.reason}});
    write_file(out_path(cfg, "build_manifest.json").string(), manifest.dump(2) + "\n");
    for (auto role : roles)
        std::cout << to_string(role) << ": " << result.sets.at(role).size() << " instances\n";
    return 0;
}

int cmd_polarity(const Common& c, const std::string& format, const std::vector<std::string>& set_paths) {
    auto cfg = effective(c);
    for (const auto& s : set_paths) require_file(s, "challenge set");
    auto corpus = load_corpora(cfg, parse_format(format));
    std::set<PairKey> keys;
    for (const auto& p : load_lexicons(cfg.lexicon_paths).pairs) {
        keys.insert(key_of(p));
        keys.insert(key_of(p.reversed()));
    }
    std::vector<ChallengeSet> sets;
    for (const auto& s : set_paths) sets.push_back(load_set(s));
    for (const auto& s : sets)
        for (const auto& ci : s.instances()) keys.insert(key_of(ci.pair));
    if (keys.empty()) throw Error("usage", "no pairs given: pass --lexicon and/or --sets");
    auto table = polarity_table(corpus, keys);
    auto path = out_path(cfg, "polarity.tsv");
    write_file(path.string(), serialize_polarity(table, "config_hash=" + cfg.hash() +
                                                             " seed=" + std::to_string(cfg.seed)));
    std::cout << path.string() << ": " << table.size() << " pairs\n";
    return 0;
}

struct BaselineArgs {
    std::string kind = "polarity-only";
    std::string set;
    std::string control;
    std::string polarity;
    std::string fallback;
    std::string output;
    std::string model;
    std::vector<std::string> annotations;
    std::string format = "auto";
};

int cmd_predict_baseline(const Common& c, const BaselineArgs& a) {
    auto cfg = effective(c);
    auto kind = parse_baseline_kind(a.kind);
    if (!kind) throw Error("usage", "unknown baseline kind '" + a.kind + "'");
    require_file(a.set, "--set");
    auto set = load_set(a.set);
    std::vector<AnnotationRecord> records;
    for (const auto& p : a.annotations) {
        auto r = load_annotation_log(p);
        records.insert(records.end(), r.begin(), r.end());
    }
    apply_annotations(set, records);

    BaselineSpec spec;
    spec.kind = *kind;
    spec.seed = cfg.seed;
    if (!cfg.corpus_paths.empty()) spec.majority = majority_label(load_corpora(cfg, parse_format(a.format)));
    else if (*kind == BaselineKind::majority_class)
        throw Error("usage", "majority-class needs --corpus");
    spec.fallback = a.fallback.empty() ? default_fallback(set.role(), spec.majority)
                                       : label_or_throw(a.fallback);

    PolarityMap polarity;
    std::map<std::string, Label> controls;
    if (*kind == BaselineKind::polarity_only) {
        require_file(a.polarity, "--polarity");
        polarity = load_polarity(a.polarity);
    }
    if (*kind == BaselineKind::insensitive_oracle) {
        if (is_control_role(set.role()) && a.control.empty()) {
            controls = control_labels(set);
        } else {
            require_file(a.control, "--control");
            auto control = load_set(a.control);
            apply_annotations(control, records);
            controls = control_labels(control);
        }
    }
    auto preds = predict(spec, set, &polarity, &controls);
    if (!a.model.empty()) preds.model = a.model;
    auto path = a.output.empty()
                    ? out_path(cfg, std::string(to_string(*kind)) + "_" +
                                        std::string(to_string(set.role())) + ".tsv")
                    : fs::path(a.output);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path.string(), serialize_predictions(preds, "model=" + preds.model + " config_hash=" +
                                                               cfg.hash() + " seed=" +
                                                               std::to_string(cfg.seed)));
    std::cout << path.string() << ": " << preds.by_id.size() << " predictions\n";
    return 0;
}

int cmd_annotate(const std::string& set_path, const std::string& log_path,
                 const std::string& annotator, const std::string& export_path) {
    require_file(set_path, "--set");
    if (log_path.empty()) throw Error("usage", "--log is required");
    auto set = load_set(set_path);
    auto role = set.role();
    AnnotationStore store({std::move(set)}, log_path);
    if (!export_path.empty()) {
        write_file(export_path, serialize_set(store.snapshot(role)));
        auto p = store.progress(role);
        std::cout << export_path << ": pending " << p.pending << ", annotated " << p.annotated
                  << ", discarded " << p.discarded << "\n";
        return 0;
    }
    run_terminal_session(store, role, annotator, std::cin, std::cout);
    return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const std::vector<std::string>& set_paths, const std::string& log_path,
              const std::string& host, int port, const std::string& static_dir) {
    if (set_paths.empty()) throw Error("usage", "at least one --set is required");
    if (log_path.empty()) throw Error("usage", "--log is required");
    std::vector<ChallengeSet> sets;
    for (const auto& p : set_paths) {
        require_file(p, "--set");
        sets.push_back(load_set(p));
    }
    AnnotationStore store(std::move(sets), log_path);
    httplib::Server server;
    install_annotation_routes(server, store, static_dir);
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::cout << "serving on http://" << host << ":" << port << std::endl;
    if (!server.listen(host, port)) throw Error("io_error", "cannot bind " + host + ":" + std::to_string(port));
    return 0;
}

int write_report(const ReportConfig& cfg) {
    auto report = run_report(cfg);
    fs::create_directories(cfg.run.out_dir);
    auto json_path = fs::path(cfg.run.out_dir) / "report.json";
    auto md_path = fs::path(cfg.run.out_dir) / "report.md";
    write_file(json_path.string(), to_json(report).dump(2) + "\n");
    write_file(md_path.string(), to_markdown(report));
    std::cout << json_path.string() << "\n" << md_path.string() << "\n";
    return 0;
}

struct AnalyzeArgs {
    std::string control;
    std::string transformed;
    std::string polarity;
    std::vector<std::string> predictions;
    std::vector<std::string> annotations;
    std::string model = "model";
    std::string name = "experiment";
};

int cmd_analyze(const Common& c, const AnalyzeArgs& a) {
    ReportConfig cfg;
    cfg.run = effective(c);
    require_file(a.control, "--control");
    require_file(a.transformed, "--transformed");
    require_file(a.polarity, "--polarity");
    if (a.predictions.empty()) throw Error("usage", "--predictions is required");
    for (const auto& p : a.predictions) require_file(p, "predictions file");
    for (const auto& p : a.annotations) require_file(p, "annotation log");
    ExperimentConfig e{a.name, a.control, a.transformed, a.annotations, a.polarity, {a.model}};
    for (const auto& p : {a.control, a.transformed, a.polarity}) cfg.display_paths[p] = p;
    for (const auto& p : a.annotations) cfg.display_paths[p] = p;
    for (const auto& p : a.predictions) cfg.display_paths[p] = p;
    cfg.experiments.push_back(e);
    cfg.model_predictions[a.model] = a.predictions;
    return write_report(cfg);
}

int cmd_report(const Common& c) {
    if (c.config_path.empty()) throw Error("usage", "report needs --config");
    auto cfg = load_report_config(c.config_path);
    if (const char* env = std::getenv("WORDSWAP_OUT"); env && *env) cfg.run.out_dir = env;
    if (!c.out_dir.empty()) cfg.run.out_dir = c.out_dir;
    if (c.alpha) cfg.run.alpha = *c.alpha;
    cfg.run.validate();
    for (const auto& e : cfg.experiments) {
        for (const auto& p : {e.control, e.transformed, e.polarity}) require_file(p, "input");
        for (const auto& p : e.annotations) require_file(p, "annotation log");
    }
    for (const auto& [m, paths] : cfg.model_predictions)
        for (const auto& p : paths) require_file(p, "predictions file for model '" + m + "'");
    return write_report(cfg);
}

void print_error(const std::string& code, const std::string& message) {
    std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wordswap: word-pair swap challenge sets and factor analysis for NLI models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    Common common;
    std::string format = "auto";

    auto* build = app.add_subcommand("build-sets", "sample control sets and build transformed sets");
    add_common(build, common);
    std::string relation = "antonym", roles;
    std::vector<std::string> substitutions;
    build->add_option("--corpus", common.corpus, "training corpus (SNLI or native JSONL)");
    build->add_option("--format", format, "corpus format")->check(CLI::IsMember({"auto", "snli", "native"}));
    build->add_option("--lexicon", common.lexicon, "word-pair lexicon TSV");
    build->add_option("--substitutions", substitutions, "synonym/hypernym/hyponym lexicon for I_TA2/I_TA3");
    build->add_option("--relation", relation, "antonym or hypernym");
    build->add_option("--roles", roles, "comma-separated roles to write (default: all)");
    build->add_option("--seed", common.seed, "seed for ex-situ side selection");
    build->add_option("--t", common.min_frequency, "minimum training frequency of substitutes");

    auto* pol = app.add_subcommand("polarity", "compute pair polarity from a training corpus");
    add_common(pol, common);
    std::vector<std::string> pol_sets;
    pol->add_option("--corpus", common.corpus, "training corpus");
    pol->add_option("--format", format, "corpus format")->check(CLI::IsMember({"auto", "snli", "native"}));
    pol->add_option("--lexicon", common.lexicon, "lexicon(s); both pair orders are tabulated");
    pol->add_option("--sets", pol_sets, "challenge sets whose positioned pairs are tabulated");

    auto* base = app.add_subcommand("predict-baseline", "write predictions of a rule-based baseline");
    add_common(base, common);
    BaselineArgs bargs;
    base->add_option("--kind", bargs.kind, "polarity-only | majority-class | insensitive-oracle | random");
    base->add_option("--set", bargs.set, "challenge set to predict");
    base->add_option("--control", bargs.control, "control set (insensitive-oracle)");
    base->add_option("--polarity", bargs.polarity, "polarity TSV (polarity-only)");
    base->add_option("--corpus", common.corpus, "training corpus (majority label)");
    base->add_option("--fallback", bargs.fallback, "label for ties/unseen pairs (polarity-only)");
    base->add_option("--annotations", bargs.annotations, "annotation logs to apply first");
    base->add_option("--seed", common.seed, "seed (random)");
    base->add_option("--model", bargs.model, "model name recorded in the file");
    base->add_option("--output", bargs.output, "output TSV (default <out>/<kind>_<role>.tsv)");

    auto* ann = app.add_subcommand("annotate", "terminal annotation of a challenge set");
    std::string ann_set, ann_log, annotator = std::getenv("USER") ? std::getenv("USER") : "annotator",
                                  ann_export;
    ann->add_option("--set", ann_set, "challenge set JSONL")->required();
    ann->add_option("--log", ann_log, "annotation log JSONL (appended)")->required();
    ann->add_option("--annotator", annotator, "annotator name");
    ann->add_option("--export", ann_export, "write the set with the log applied and exit");

    auto* serve = app.add_subcommand("serve", "annotation HTTP service");
    std::vector<std::string> serve_sets;
    std::string serve_log, host = "127.0.0.1", static_dir;
    int port = 8080;
    serve->add_option("--set", serve_sets, "challenge set(s) to serve")->required();
    serve->add_option("--log", serve_log, "annotation log JSONL")->required();
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "bind port");
    serve->add_option("--static-dir", static_dir, "web UI assets to serve at /");

    auto* analyze = app.add_subcommand("analyze", "factor analysis of one model on one experiment");
    add_common(analyze, common);
    AnalyzeArgs aargs;
    analyze->add_option("--control", aargs.control, "control set JSONL");
    analyze->add_option("--transformed", aargs.transformed, "transformed set JSONL");
    analyze->add_option("--polarity", aargs.polarity, "polarity TSV");
    analyze->add_option("--predictions", aargs.predictions, "prediction file(s) covering both sets");
    analyze->add_option("--annotations", aargs.annotations, "annotation logs to apply");
    analyze->add_option("--model", aargs.model, "model name");
    analyze->add_option("--name", aargs.name, "experiment name");
    analyze->add_option("--alpha", common.alpha, "family-wise alpha before Bonferroni");

    auto* report = app.add_subcommand("report", "full report from a bundle config");
    add_common(report, common);
    report->add_option("--alpha", common.alpha, "family-wise alpha before Bonferroni");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 2;
    }

    try {
        if (*build) return cmd_build_sets(common, format, relation, roles, substitutions);
        if (*pol) return cmd_polarity(common, format, pol_sets);
        if (*base) return cmd_predict_baseline(common, bargs);
        if (*ann) return cmd_annotate(ann_set, ann_log, annotator, ann_export);
        if (*serve) return cmd_serve(serve_sets, serve_log, host, port, static_dir);
        if (*analyze) return cmd_analyze(common, aargs);
        if (*report) return cmd_report(common);
    } catch (const Error& e) {
        print_error(e.code(), e.what());
        return e.code() == "usage" ? 2 : 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 0;
}
