#pragma once

// JSON-over-HTTP front end of MeasureService.
//
//   POST  /sessions                     -> {"id"}
//   POST  /sessions/{id}/open           {"manifest"}                     -> session state
//   POST  /sessions/{id}/open-next                                       -> {"opened","warning","session"}
//   GET   /sessions/{id}                                                 -> session state
//   PATCH /sessions/{id}/lines          {slot,side,which,endpoint,x,y}   -> {"ccd",...}
//   POST  /sessions/{id}/voice          {"token"}                        -> {state,indicator,action?,...}
//   POST  /sessions/{id}/snapshot       {"note"}                         -> {"image","json","timestamp"}
//   GET   /healthz

#include "ccd/error.hpp"
#include "ccd/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <string>

namespace ccd::service {

namespace http_detail {

using ojson = nlohmann::ordered_json;

inline int status_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Parse:
    case ErrorKind::InvalidArgument: return 400;
    case ErrorKind::Io: return 500;
    default: return 422;
    }
}

inline void reply(httplib::Response& res, int status, const ojson& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void reply_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    reply(res, status, ojson{{"error", message}, {"kind", kind}});
}

inline nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
        auto doc = nlohmann::json::parse(req.body);
        if (!doc.is_object()) throw Error(ErrorKind::Parse, "request body must be a JSON object");
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("invalid JSON body: ") + e.what());
    }
}

template <typename T>
T field(const nlohmann::json& body, const char* name) {
    if (!body.contains(name)) throw Error(ErrorKind::InvalidArgument, std::string("missing field '") + name + "'");
    try {
        return body[name].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::InvalidArgument, std::string("field '") + name + "' has the wrong type");
    }
}

/// Wraps a handler so library errors become JSON error responses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            reply_error(res, status_for(e.kind()), to_string(e.kind()), e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, "internal", e.what());
        }
    };
}

inline ojson snapshot_json(const Snapshot& s) {
    return {{"timestamp", s.timestamp}, {"image", s.image.string()}, {"json", s.sidecar.string()}, {"note", s.note}};
}

} // namespace http_detail

inline void register_routes(httplib::Server& server, MeasureService& service) {
    using namespace http_detail;

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"status", "ok"}}); });

    server.Post("/sessions", guarded([&service](const httplib::Request&, httplib::Response& res) {
                    reply(res, 201, {{"id", service.create_session()}});
                }));

    server.Get(R"(/sessions/([^/]+))", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                   reply(res, 200, service.state(req.matches[1]));
               }));

    server.Post(R"(/sessions/([^/]+)/open)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1];
                    const auto body = parse_body(req);
                    service.open(id, field<std::string>(body, "manifest"));
                    reply(res, 200, service.state(id));
                }));

    server.Post(R"(/sessions/([^/]+)/open-next)",
                guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1];
                    const auto r = service.open_next(id);
                    ojson body;
                    body["opened"] = r.opened ? ojson(r.opened->string()) : ojson(nullptr);
                    body["warning"] = r.warning.empty() ? ojson(nullptr) : ojson(r.warning);
                    body["session"] = service.state(id);
                    reply(res, 200, body);
                }));

    server.Patch(R"(/sessions/([^/]+)/lines)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                     const std::string id = req.matches[1];
                     const auto body = parse_body(req);
                     const auto slot_text = field<std::string>(body, "slot");
                     const auto side_text = field<std::string>(body, "side");
                     const auto which_text = field<std::string>(body, "which");
                     const auto slot = parse_slot(slot_text);
                     const auto side = parse_side(side_text);
                     const auto which = parse_line_kind(which_text);
                     if (!slot) throw Error(ErrorKind::InvalidArgument, "slot must be left|right");
                     if (!side) throw Error(ErrorKind::InvalidArgument, "side must be left|right");
                     if (!which) throw Error(ErrorKind::InvalidArgument, "which must be neck|shaft");
                     const int endpoint = field<int>(body, "endpoint");
                     const Point2 p{field<double>(body, "x"), field<double>(body, "y")};
                     const double ccd = service.update_line(id, *slot, *side, *which, endpoint, p);
                     reply(res, 200,
                           {{"ccd", ccd},
                            {"degenerate", is_degenerate_ccd(ccd)},
                            {"slot", slot_text},
                            {"side", side_text},
                            {"which", which_text}});
                 }));

    server.Post(R"(/sessions/([^/]+)/voice)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1];
                    const auto body = parse_body(req);
                    auto [outcome, state] = service.voice(id, field<std::string>(body, "token"));
                    ojson out;
                    out["state"] = state["voice_state"];
                    out["indicator"] = state["indicator"];
                    out["view"] = state["view"];
                    out["action"] = outcome.action ? ojson(voice::action_name(*outcome.action)) : ojson(nullptr);
                    out["result"] = outcome.description.empty() ? ojson(nullptr) : ojson(outcome.description);
                    out["error"] = outcome.error.empty() ? ojson(nullptr) : ojson(outcome.error);
                    if (outcome.snapshot) out["snapshot"] = snapshot_json(*outcome.snapshot);
                    reply(res, 200, out);
                }));

    server.Post(R"(/sessions/([^/]+)/snapshot)",
                guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1];
                    const auto body = parse_body(req);
                    const std::string note = body.contains("note") ? field<std::string>(body, "note") : std::string();
                    reply(res, 200, snapshot_json(service.snapshot(id, note)));
                }));
}

} // namespace ccd::service
