#include "ssa/state.hpp"

#include <algorithm>

#include "ssa/error.hpp"

namespace ssa {

namespace {

constexpr std::array<std::string_view, 6> kEventKindNames = {
    "contact_registered", "situation_added", "elicitation_answered",
    "feedback_recorded",  "model_refit",     "decision_made"};

PriorityTrainingPair priority_pair_from_json(const json& j) {
    static constexpr std::array<std::string_view, 3> kAllowed = {"situation_id", "profile", "priority"};
    reject_unknown_fields(j, kAllowed, "priority pair");
    PriorityTrainingPair p;
    p.situation_id = j.at("situation_id").get<std::string>();
    p.profile = j.at("profile").get<SituationProfile>();
    p.priority = j.at("priority").get<double>();
    return p;
}

template <class Fn>
void as_validation(Fn&& fn) {
    try {
        fn();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ValidationError, std::string("malformed event payload: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::ValidationError, std::string("malformed event payload: ") + e.what(), e.field());
    }
}

void require_keys(const json& payload, std::span<const std::string_view> keys, const char* what) {
    reject_unknown_fields(payload, keys, what);
    for (auto k : keys) {
        if (!payload.contains(std::string(k)))
            throw Error(ErrorCode::ValidationError, std::string(what) + ": missing '" + std::string(k) + "'");
    }
}

constexpr std::array<std::string_view, 5> kAnswerKeys = {"request_id", "situation_id", "contacts", "attach_contact",
                                                         "training_pair"};
constexpr std::array<std::string_view, 3> kFeedbackKeys = {"feedback", "priority_pair", "comprehension_pair"};
constexpr std::array<std::string_view, 2> kRefitKeys = {"comprehension_pairs", "priority_pairs"};

void add_situation(AgentState& s, const SituationRecord& rec) {
    require_valid_id(rec.situation_id, "situation_id");
    validate_cues(rec.cues);
    for (const auto& id : rec.participant_ids) {
        if (!s.contacts.contains(id))
            throw Error(ErrorCode::UnknownContact, "unknown contact '" + id + "'", "participants");
    }
    auto it = s.situations.find(rec.situation_id);
    if (it != s.situations.end()) {
        if (it->second == rec) return;
        throw Error(ErrorCode::ValidationError, "situation '" + rec.situation_id + "' already exists",
                    "situation_id");
    }
    s.situations.emplace(rec.situation_id, rec);
}

}  // namespace

void to_json(json& j, const PriorityTrainingPair& p) {
    j = json{{"situation_id", p.situation_id}, {"profile", p.profile}, {"priority", p.priority}};
}

std::string_view to_string(EventKind k) { return kEventKindNames[static_cast<std::size_t>(k)]; }

EventKind parse_event_kind(std::string_view s) {
    for (std::size_t i = 0; i < kEventKindNames.size(); ++i) {
        if (kEventKindNames[i] == s) return static_cast<EventKind>(i);
    }
    throw Error(ErrorCode::ValidationError, "unknown event kind '" + std::string(s) + "'", "kind");
}

void to_json(json& j, const EventRecord& e) {
    j = json{{"seq", e.seq}, {"timestamp", e.timestamp}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

void from_json(const json& j, EventRecord& e) {
    static constexpr std::array<std::string_view, 4> kAllowed = {"seq", "timestamp", "kind", "payload"};
    require_keys(j, kAllowed, "event");
    if (!j["seq"].is_number_unsigned()) throw Error(ErrorCode::ValidationError, "event seq must be unsigned", "seq");
    e.seq = j["seq"].get<std::uint64_t>();
    e.timestamp = j["timestamp"].get<std::string>();
    e.kind = parse_event_kind(j["kind"].get<std::string>());
    e.payload = j["payload"];
}

void validate_payload(EventKind kind, const json& p) {
    as_validation([&] {
        switch (kind) {
            case EventKind::contact_registered:
                validate_relationship(p.get<SocialRelationship>());
                break;
            case EventKind::situation_added: {
                auto rec = p.get<SituationRecord>();
                require_valid_id(rec.situation_id, "situation_id");
                validate_cues(rec.cues);
                break;
            }
            case EventKind::elicitation_answered:
                require_keys(p, kAnswerKeys, "elicitation_answered");
                (void)p["request_id"].get<std::string>();
                (void)p["situation_id"].get<std::string>();
                for (const auto& c : p["contacts"]) validate_relationship(c.get<SocialRelationship>());
                if (!p["attach_contact"].is_null()) (void)p["attach_contact"].get<std::string>();
                if (!p["training_pair"].is_null()) (void)p["training_pair"].get<TrainingPair>();
                break;
            case EventKind::feedback_recorded:
                require_keys(p, kFeedbackKeys, "feedback_recorded");
                validate_feedback(p["feedback"].get<FeedbackRecord>());
                if (!p["priority_pair"].is_null()) (void)priority_pair_from_json(p["priority_pair"]);
                if (!p["comprehension_pair"].is_null()) (void)p["comprehension_pair"].get<TrainingPair>();
                break;
            case EventKind::model_refit:
                require_keys(p, kRefitKeys, "model_refit");
                (void)p["comprehension_pairs"].get<std::size_t>();
                (void)p["priority_pairs"].get<std::size_t>();
                break;
            case EventKind::decision_made:
                (void)p.get<DecisionRecord>();
                break;
        }
    });
}

bool AgentState::operator==(const AgentState& o) const {
    const bool same_settings = settings == o.settings || (settings && o.settings && *settings == *o.settings);
    return same_settings && contacts == o.contacts && situations == o.situations &&
           comprehension_training == o.comprehension_training && priority_training == o.priority_training &&
           comprehension_fitted == o.comprehension_fitted && priority_fitted == o.priority_fitted && knn == o.knn &&
           priority == o.priority && elicitation_rounds == o.elicitation_rounds &&
           closed_requests == o.closed_requests && decisions == o.decisions && decision_order == o.decision_order &&
           feedback == o.feedback && last_seq == o.last_seq;
}

void refit(AgentState& s, std::size_t comprehension_pairs, std::size_t priority_pairs) {
    if (comprehension_pairs > s.comprehension_training.size() || priority_pairs > s.priority_training.size()) {
        throw Error(ErrorCode::ValidationError, "refit covers more pairs than recorded", "model_refit");
    }
    const auto& cfg = *s.settings;
    if (comprehension_pairs > 0) {
        std::vector<TrainingPair> prefix(s.comprehension_training.begin(),
                                         s.comprehension_training.begin() + static_cast<std::ptrdiff_t>(comprehension_pairs));
        s.knn = fit_knn(prefix, cfg.knn_k);
    } else {
        s.knn.reset();
    }
    std::vector<PriorityPair> pairs;
    for (std::size_t i = 0; i < priority_pairs; ++i) {
        pairs.emplace_back(s.priority_training[i].profile, s.priority_training[i].priority);
    }
    if (cfg.priority_learner == PriorityLearner::knn) {
        s.priority = pairs.size() >= std::max<std::size_t>(cfg.priority_knn_min_pairs, 1)
                         ? fit_priority_knn(pairs, cfg.priority_k)
                         : PriorityModel{};
    } else {
        s.priority = fit_priority_model(pairs, {cfg.priority_min_pairs, cfg.ridge_lambda});
    }
    s.comprehension_fitted = comprehension_pairs;
    s.priority_fitted = priority_pairs;
}

AgentState initial_state(std::shared_ptr<const Settings> settings) {
    AgentState s;
    s.settings = std::move(settings);
    s.comprehension_training = s.settings->seed_training;
    refit(s, s.comprehension_training.size(), 0);
    return s;
}

AgentState apply(const AgentState& state, const EventRecord& event) {
    if (event.seq != state.last_seq + 1) {
        throw Error(ErrorCode::CorruptLog,
                    "expected event seq " + std::to_string(state.last_seq + 1) + ", got " + std::to_string(event.seq),
                    std::to_string(event.seq));
    }
    validate_payload(event.kind, event.payload);
    AgentState s = state;
    const json& p = event.payload;
    switch (event.kind) {
        case EventKind::contact_registered:
            s.contacts.register_contact(p.get<SocialRelationship>());
            break;
        case EventKind::situation_added:
            add_situation(s, p.get<SituationRecord>());
            break;
        case EventKind::elicitation_answered: {
            const auto sid = p["situation_id"].get<std::string>();
            auto it = s.situations.find(sid);
            if (it == s.situations.end())
                throw Error(ErrorCode::UnknownSituation, "unknown situation '" + sid + "'", "situation_id");
            for (const auto& c : p["contacts"]) {
                auto rel = c.get<SocialRelationship>();
                if (s.contacts.contains(rel.contact_id)) {
                    s.contacts.update_contact(rel);
                } else {
                    s.contacts.register_contact(rel);
                }
            }
            if (!p["attach_contact"].is_null()) {
                const auto cid = p["attach_contact"].get<std::string>();
                if (!s.contacts.contains(cid))
                    throw Error(ErrorCode::UnknownContact, "unknown contact '" + cid + "'", "attach_contact");
                it->second.participant_ids.push_back(cid);
            }
            if (!p["training_pair"].is_null()) s.comprehension_training.push_back(p["training_pair"].get<TrainingPair>());
            s.closed_requests.insert(p["request_id"].get<std::string>());
            ++s.elicitation_rounds[sid];
            break;
        }
        case EventKind::feedback_recorded: {
            auto fb = p["feedback"].get<FeedbackRecord>();
            if (s.decisions.count(fb.suggestion_id) == 0)
                throw Error(ErrorCode::UnknownSuggestion, "unknown suggestion '" + fb.suggestion_id + "'",
                            "suggestion_id");
            if (!p["priority_pair"].is_null()) s.priority_training.push_back(priority_pair_from_json(p["priority_pair"]));
            if (!p["comprehension_pair"].is_null())
                s.comprehension_training.push_back(p["comprehension_pair"].get<TrainingPair>());
            s.feedback.push_back(std::move(fb));
            break;
        }
        case EventKind::model_refit:
            refit(s, p["comprehension_pairs"].get<std::size_t>(), p["priority_pairs"].get<std::size_t>());
            break;
        case EventKind::decision_made: {
            auto d = p.get<DecisionRecord>();
            require_valid_id(d.decision_id, "decision_id");
            if (s.decisions.count(d.decision_id) != 0)
                throw Error(ErrorCode::ValidationError, "decision '" + d.decision_id + "' already recorded",
                            "decision_id");
            s.decision_order.push_back(d.decision_id);
            s.decisions.emplace(d.decision_id, std::move(d));
            break;
        }
    }
    s.last_seq = event.seq;
    return s;
}

AgentState replay(std::shared_ptr<const Settings> settings, const std::vector<EventRecord>& events) {
    AgentState s = initial_state(std::move(settings));
    for (const auto& e : events) s = apply(s, e);
    return s;
}

json state_to_json(const AgentState& s) {
    json contacts = json::array();
    for (const auto& [id, c] : s.contacts.contacts()) contacts.push_back(c);
    json situations = json::array();
    for (const auto& [id, rec] : s.situations) situations.push_back(rec);
    json priority_training = json::array();
    for (const auto& p : s.priority_training) priority_training.push_back(p);
    json decisions = json::array();
    for (const auto& id : s.decision_order) decisions.push_back(s.decisions.at(id));
    return json{{"contacts", contacts},
                {"situations", situations},
                {"comprehension_training", s.comprehension_training},
                {"priority_training", priority_training},
                {"comprehension_fitted", s.comprehension_fitted},
                {"priority_fitted", s.priority_fitted},
                {"priority_model", s.priority},
                {"elicitation_rounds", s.elicitation_rounds},
                {"closed_requests", s.closed_requests},
                {"decisions", decisions},
                {"feedback", s.feedback},
                {"last_seq", s.last_seq}};
}

AgentState state_from_json(const json& j, std::shared_ptr<const Settings> settings) {
    AgentState s;
    s.settings = std::move(settings);
    for (const auto& c : j.at("contacts")) s.contacts.register_contact(c.get<SocialRelationship>());
    for (const auto& r : j.at("situations")) add_situation(s, r.get<SituationRecord>());
    s.comprehension_training = j.at("comprehension_training").get<std::vector<TrainingPair>>();
    for (const auto& p : j.at("priority_training")) s.priority_training.push_back(priority_pair_from_json(p));
    s.elicitation_rounds = j.at("elicitation_rounds").get<std::map<std::string, std::uint64_t>>();
    s.closed_requests = j.at("closed_requests").get<std::set<std::string>>();
    for (const auto& d : j.at("decisions")) {
        auto rec = d.get<DecisionRecord>();
        s.decision_order.push_back(rec.decision_id);
        s.decisions.emplace(rec.decision_id, std::move(rec));
    }
    s.feedback = j.at("feedback").get<std::vector<FeedbackRecord>>();
    s.last_seq = j.at("last_seq").get<std::uint64_t>();
    refit(s, j.at("comprehension_fitted").get<std::size_t>(), j.at("priority_fitted").get<std::size_t>());
    return s;
}

SocialSituation situation(const AgentState& state, const std::string& situation_id) {
    auto it = state.situations.find(situation_id);
    if (it == state.situations.end())
        throw Error(ErrorCode::UnknownSituation, "unknown situation '" + situation_id + "'", "situation_id");
    return resolve(it->second, state.contacts);
}

ComprehensionResult comprehension(const AgentState& state, const std::string& situation_id) {
    const auto& cfg = *state.settings;
    return comprehend(situation(state, situation_id), cfg.rules, state.knn ? &*state.knn : nullptr,
                      ComprehensionPolicy{cfg.n_train, cfg.manifest});
}

SituationAssessment assess(const AgentState& state, const std::string& situation_id) {
    const auto& cfg = *state.settings;
    SituationAssessment a;
    a.situation = situation(state, situation_id);
    a.comprehension = comprehend(a.situation, cfg.rules, state.knn ? &*state.knn : nullptr,
                                 ComprehensionPolicy{cfg.n_train, cfg.manifest});
    a.priority = predict_priority(state.priority, a.comprehension.profile);
    a.priority_model = state.priority.kind;
    a.attribution_weights = attribution_weights(state.priority);
    a.impact = assess_value_impact(a.comprehension.profile, cfg.impact_table);
    a.impact_evidence = impact_evidence(a.comprehension.profile, cfg.impact_table);
    a.support = assess_support_need(cfg.user, a.situation, a.priority, a.impact);
    return a;
}

std::vector<Meeting> agenda(const AgentState& state) {
    std::vector<Meeting> out;
    out.reserve(state.situations.size());
    for (const auto& [id, rec] : state.situations) out.push_back(meeting_for(rec));
    return out;
}

std::vector<Conflict> conflicts(const AgentState& state) { return detect_conflicts(agenda(state)); }

std::vector<ElicitationRequest> pending_elicitations(const AgentState& state) {
    std::vector<ElicitationRequest> out;
    const double tau = state.settings->user.elicitation_threshold;
    for (const auto& [id, rec] : state.situations) {
        ElicitationRequest req;
        req.situation_id = id;
        const auto sit = resolve(rec, state.contacts);
        req.missing_fields = detect_missing_fields(sit);
        // A situation the user has already profiled is not asked about again.
        const bool asserted = std::any_of(state.comprehension_training.begin(), state.comprehension_training.end(),
                                          [&](const TrainingPair& p) { return p.situation_id == id; });
        if (req.missing_fields.empty() && !asserted) {
            const auto comp = comprehension(state, id);
            if (comp.source == ComprehensionSource::learned) {
                for (std::size_t d = 0; d < kNumDimensions; ++d) {
                    if (comp.uncertainty[d] > tau) req.uncertain.push_back({static_cast<Dimension>(d), comp.uncertainty[d]});
                }
            }
        }
        if (req.missing_fields.empty() && req.uncertain.empty()) continue;
        auto round = state.elicitation_rounds.count(id) ? state.elicitation_rounds.at(id) : 0;
        req.request_id = id + ".q" + std::to_string(round + 1);
        out.push_back(std::move(req));
    }
    return out;
}

const DecisionRecord& decision(const AgentState& state, const std::string& decision_id) {
    auto it = state.decisions.find(decision_id);
    if (it == state.decisions.end())
        throw Error(ErrorCode::UnknownDecision, "unknown decision '" + decision_id + "'", "decision_id");
    return it->second;
}

}  // namespace ssa
