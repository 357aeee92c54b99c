#include "ssa/server.hpp"

#include <httplib.h>

#include "ssa/error.hpp"

namespace ssa {

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownContact:
        case ErrorCode::UnknownSituation:
        case ErrorCode::UnknownRequest:
        case ErrorCode::UnknownSuggestion:
        case ErrorCode::UnknownDecision:
        case ErrorCode::UnknownConflict:
            return 404;
        case ErrorCode::ClosedRequest:
            return 409;
        case ErrorCode::StorageError:
        case ErrorCode::CorruptLog:
        case ErrorCode::SnapshotVersionMismatch:
            return 500;
        default:
            return 400;
    }
}

json error_body(const Error& e) {
    json body{{"error_code", error_code_name(e.code())}, {"message", e.what()}};
    if (!e.field().empty()) body["field"] = e.field();
    return body;
}

namespace {

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error&) {
        throw Error(ErrorCode::ValidationError, "request body is not valid JSON", "body");
    }
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Uniform error translation for every route.
Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
        try {
            h(req, res);
        } catch (const Error& e) {
            send(res, http_status(e.code()), error_body(e));
        } catch (const json::exception& e) {
            send(res, 400, json{{"error_code", "ValidationError"}, {"message", e.what()}});
        } catch (const std::exception& e) {
            send(res, 500, json{{"error_code", "StorageError"}, {"message", e.what()}});
        }
    };
}

int parse_depth(const httplib::Request& req) {
    if (!req.has_param("depth")) return 3;
    const auto raw = req.get_param_value("depth");
    if (raw != "1" && raw != "2" && raw != "3")
        throw Error(ErrorCode::ValidationError, "depth must be 1, 2 or 3", "depth");
    return raw[0] - '0';
}

json decision_json(const DecisionRecord& d) {
    json out = d.kind == DecisionKind::suggestion ? json(*d.suggestion) : json(*d.share);
    out["decision_id"] = d.decision_id;
    return out;
}

}  // namespace

ApiServer::ApiServer(Engine& engine) : engine_(engine), http_(std::make_unique<httplib::Server>()) { routes(); }

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) return http_->bind_to_any_port(host);
    return http_->bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return http_->listen_after_bind(); }

void ApiServer::stop() {
    if (http_->is_running()) http_->stop();
}

void ApiServer::wait_until_ready() const { http_->wait_until_ready(); }

void ApiServer::routes() {
    auto& s = *http_;
    auto& eng = engine_;

    s.Post("/contacts", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
        const auto contact = parse_body(req).get<SocialRelationship>();
        const bool existed = eng.state()->contacts.contains(contact.contact_id);
        eng.register_contact(contact);
        send(res, existed ? 200 : 201, json(*eng.state()->contacts.find(contact.contact_id)));
    }));
    s.Get("/contacts", guarded([&eng](const httplib::Request&, httplib::Response& res) {
        send(res, 200, json(eng.contacts()));
    }));

    s.Post("/situations", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
        const auto record = parse_body(req).get<SituationRecord>();
        const bool existed = eng.state()->situations.count(record.situation_id) != 0;
        const auto situation = eng.add_situation(record);
        json body = situation;
        body["missing_fields"] = detect_missing_fields(situation);
        send(res, existed ? 200 : 201, body);
    }));
    s.Get(R"(/situations/([A-Za-z0-9_.\-]+))", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
        send(res, 200, json(eng.situation(req.matches[1])));
    }));
    s.Get(R"(/situations/([A-Za-z0-9_.\-]+)/profile)",
          guarded([&eng](const httplib::Request& req, httplib::Response& res) {
              send(res, 200, json(eng.profile(req.matches[1])));
          }));
    s.Get(R"(/situations/([A-Za-z0-9_.\-]+)/projection)",
          guarded([&eng](const httplib::Request& req, httplib::Response& res) {
              send(res, 200, projection_json(eng.projection(req.matches[1])));
          }));

    s.Get("/agenda/conflicts", guarded([&eng](const httplib::Request&, httplib::Response& res) {
        send(res, 200, json(eng.conflicts()));
    }));
    s.Get(R"(/conflicts/([A-Za-z0-9_.~\-]+)/suggestion)",
          guarded([&eng](const httplib::Request& req, httplib::Response& res) {
              send(res, 200, decision_json(eng.suggestion(req.matches[1])));
          }));

    s.Get(R"(/decisions/([A-Za-z0-9_.\-]+)/explanation)",
          guarded([&eng](const httplib::Request& req, httplib::Response& res) {
              const int depth = parse_depth(req);
              const auto explanation = eng.explanation(req.matches[1], depth);
              json body = explanation;
              body["depth"] = depth;
              body["text"] = render(explanation, eng.config().catalog);
              send(res, 200, body);
          }));
    s.Post(R"(/decisions/([A-Za-z0-9_.\-]+)/feedback)",
           guarded([&eng](const httplib::Request& req, httplib::Response& res) {
               auto body = parse_body(req);
               if (!body.is_object()) throw Error(ErrorCode::ValidationError, "feedback must be an object", "body");
               const std::string id = req.matches[1];
               if (body.contains("suggestion_id") && body["suggestion_id"] != id)
                   throw Error(ErrorCode::ValidationError, "suggestion_id does not match the URL", "suggestion_id");
               body["suggestion_id"] = id;
               send(res, 200, eng.record_feedback(id, body.get<FeedbackRecord>()));
           }));

    s.Get("/elicitation/pending", guarded([&eng](const httplib::Request&, httplib::Response& res) {
        send(res, 200, json(eng.pending_elicitations()));
    }));
    s.Post(R"(/elicitation/([A-Za-z0-9_.\-]+)/answers)",
           guarded([&eng](const httplib::Request& req, httplib::Response& res) {
               auto body = parse_body(req);
               if (body.is_object() && body.size() == 1 && body.contains("answers")) body = body["answers"];
               send(res, 200, eng.answer_elicitation(req.matches[1], body));
           }));

    s.Post("/sharing/decide", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        static constexpr std::array<std::string_view, 2> allowed = {"situation_id", "recipient"};
        reject_unknown_fields(body, allowed, "sharing request");
        if (!body.contains("situation_id") || !body["situation_id"].is_string())
            throw Error(ErrorCode::ValidationError, "situation_id is required", "situation_id");
        if (!body.contains("recipient") || !body["recipient"].is_string())
            throw Error(ErrorCode::ValidationError, "recipient is required", "recipient");
        send(res, 200, decision_json(eng.decide_sharing(body["situation_id"], body["recipient"])));
    }));

    s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty() && res.status == 404)
            send(res, 404, json{{"error_code", "NotFound"}, {"message", "no such endpoint"}});
    });
}

}  // namespace ssa
