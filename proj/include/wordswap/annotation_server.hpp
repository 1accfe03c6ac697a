#pragma once

// HTTP+JSON front end for AnnotationStore.
//
//   GET  /api/sets                      roles with sizes and progress
//   GET  /api/sets/{role}/next          next instance awaiting a decision (or null)
//   GET  /api/sets/{role}/progress      {pending, annotated, discarded, total}
//   POST /api/instances/{id}/decision   body {"decision": ..., "annotator": ...}
//
// Errors come back as {"error": code, "message": text} with 400/404/409.

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <string>

#include "wordswap/annotation.hpp"

namespace wordswap {

/// Token positions holding `word`.
inline std::vector<std::size_t> positions_of(const Tokens& tokens, const std::string& word) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i] == word) out.push_back(i);
    return out;
}

/// View of one instance for the annotation UI.
inline nlohmann::json annotation_view(const ChallengeInstance& ci) {
    nlohmann::json j = {{"id", ci.id},
                        {"role", to_string(ci.role)},
                        {"control_id", ci.control_id},
                        {"premise", ci.premise},
                        {"hypothesis", ci.hypothesis},
                        {"premise_highlight", positions_of(ci.premise, ci.pair.w1)},
                        {"hypothesis_highlight", positions_of(ci.hypothesis, ci.pair.w2)},
                        {"pair", {{"w1", ci.pair.w1}, {"w2", ci.pair.w2},
                                  {"relation", to_string(ci.pair.relation)}}},
                        {"label_status", to_string(ci.status)},
                        {"label", nullptr},
                        {"preselect", nullptr}};
    if (ci.label) {
        j["label"] = to_string(*ci.label);
        if (ci.status == LabelStatus::heuristic) j["preselect"] = to_string(*ci.label);
    }
    return j;
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& code,
                       const std::string& message) {
    send_json(res, status, {{"error", code}, {"message", message}});
}

inline int http_status_for(const std::string& code) {
    if (code == "unknown_id" || code == "unknown_role") return 404;
    if (code == "immutable_label") return 409;
    if (code == "io_error" || code == "internal") return 500;
    return 400;
}

}  // namespace detail

/// Registers the API on `server`. `static_dir`, when non-empty, is mounted
/// at / for the browser UI's assets.
inline void install_annotation_routes(httplib::Server& server, AnnotationStore& store,
                                      const std::string& static_dir = {}) {
    using detail::send_error;
    using detail::send_json;

    auto with_role = [&store](const httplib::Request& req, httplib::Response& res,
                              auto&& fn) {
        auto role = parse_role(req.matches[1].str());
        if (!role || !store.has_role(*role)) {
            send_error(res, 404, "unknown_role", "no set loaded for role '" + req.matches[1].str() + "'");
            return;
        }
        fn(*role);
    };

    server.Get("/api/sets", [&store](const httplib::Request&, httplib::Response& res) {
        nlohmann::json sets = nlohmann::json::array();
        for (auto role : store.roles()) {
            auto p = store.progress(role);
            sets.push_back({{"role", to_string(role)}, {"size", p.total()}, {"progress", to_json(p)}});
        }
        send_json(res, 200, {{"sets", sets}});
    });

    server.Get(R"(/api/sets/([A-Za-z0-9_]+)/next)",
               [&store, with_role](const httplib::Request& req, httplib::Response& res) {
                   with_role(req, res, [&](SetRole role) {
                       auto next = store.next_unannotated(role);
                       send_json(res, 200,
                                 {{"role", to_string(role)},
                                  {"instance", next ? annotation_view(*next) : nlohmann::json(nullptr)},
                                  {"progress", to_json(store.progress(role))}});
                   });
               });

    server.Get(R"(/api/sets/([A-Za-z0-9_]+)/progress)",
               [&store, with_role](const httplib::Request& req, httplib::Response& res) {
                   with_role(req, res, [&](SetRole role) {
                       auto body = to_json(store.progress(role));
                       body["role"] = to_string(role);
                       send_json(res, 200, body);
                   });
               });

    server.Post(R"(/api/instances/(.+)/decision)",
                [&store](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1].str();
                    nlohmann::json body;
                    try {
                        body = nlohmann::json::parse(req.body);
                    } catch (const nlohmann::json::parse_error&) {
                        send_error(res, 400, "malformed_json", "request body is not JSON");
                        return;
                    }
                    if (!body.is_object() || !body.contains("decision") || !body["decision"].is_string()) {
                        send_error(res, 400, "bad_decision", "body needs a string 'decision'");
                        return;
                    }
                    std::string annotator = body.value("annotator", std::string{});
                    try {
                        auto p = store.record_decision(id, body["decision"].get<std::string>(), annotator);
                        auto ci = store.find(id);
                        send_json(res, 200, {{"instance", annotation_view(*ci)}, {"progress", to_json(p)}});
                    } catch (const Error& e) {
                        send_error(res, detail::http_status_for(e.code()), e.code(), e.what());
                    }
                });

    if (!static_dir.empty() && !server.set_mount_point("/", static_dir))
        throw Error("missing_file", "static asset directory not found: " + static_dir);
}

}  // namespace wordswap
