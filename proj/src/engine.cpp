#include "ssa/engine.hpp"

#include <chrono>
#include <regex>

#include "ssa/error.hpp"

namespace ssa {

namespace {

const std::regex kParticipantPath(R"(participants\[(\d+)\]\.(\w+))");

void set_relationship_field(SocialRelationship& r, const std::string& field, const json& v, const std::string& path) {
    try {
        if (field == "role") {
            r.role = parse_role(v.get<std::string>());
        } else if (field == "hierarchy") {
            r.hierarchy = parse_hierarchy(v.get<std::string>());
        } else if (field == "contact_frequency" || field == "relationship_quality") {
            if (!v.is_number_integer()) throw Error(ErrorCode::ValidationError, path + " must be an integer", path);
            (field == "contact_frequency" ? r.contact_frequency : r.relationship_quality) = v.get<int>();
        } else if (field == "years_known") {
            if (!v.is_number()) throw Error(ErrorCode::ValidationError, path + " must be a number", path);
            r.years_known = v.get<double>();
        } else {
            throw Error(ErrorCode::ValidationError, "unknown answer field '" + path + "'", path);
        }
    } catch (const json::exception&) {
        throw Error(ErrorCode::ValidationError, path + " has the wrong type", path);
    }
}

// Same decision apart from its identifiers.
bool same_content(DecisionRecord a, const DecisionRecord& b) {
    a.decision_id = b.decision_id;
    if (a.suggestion && b.suggestion) a.suggestion->suggestion_id = b.suggestion->suggestion_id;
    return a == b;
}

}  // namespace

std::string utc_now() {
    return format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

Engine::Engine(Config config, std::unique_ptr<EventLog> log, const Snapshot* snapshot, Clock clock)
    : config_(std::move(config)), log_(std::move(log)), clock_(clock ? std::move(clock) : Clock(utc_now)) {
    state_ = std::make_shared<const AgentState>(restore(config_.settings, log_->records(), snapshot));
}

std::unique_ptr<Engine> Engine::open(Config config, Clock clock) {
    std::filesystem::create_directories(config.store_dir);
    auto log = std::make_unique<EventLog>(config.log_path());
    std::optional<Snapshot> snap;
    if (std::filesystem::exists(config.snapshot_path())) snap = read_snapshot(config.snapshot_path());
    return std::make_unique<Engine>(std::move(config), std::move(log), snap ? &*snap : nullptr, std::move(clock));
}

std::unique_ptr<Engine> Engine::in_memory(Config config, Clock clock) {
    return std::make_unique<Engine>(std::move(config), std::make_unique<EventLog>(), nullptr, std::move(clock));
}

std::shared_ptr<const AgentState> Engine::state() const {
    std::lock_guard lock(publish_mu_);
    return state_;
}

void Engine::commit(EventKind kind, const json& payload) {
    auto current = state();
    EventRecord event{current->last_seq + 1, clock_(), kind, payload};
    // Apply first so an event that does not fold never reaches the log.
    auto next = std::make_shared<const AgentState>(apply(*current, event));
    log_->append(kind, payload, event.timestamp);
    std::lock_guard lock(publish_mu_);
    state_ = std::move(next);
}

std::string Engine::register_contact(const SocialRelationship& contact) {
    std::lock_guard lock(write_mu_);
    validate_relationship(contact);
    auto current = state();
    if (const auto* existing = current->contacts.find(contact.contact_id)) {
        if (*existing == contact) return contact.contact_id;
        throw Error(ErrorCode::DuplicateContactId,
                    "contact '" + contact.contact_id + "' already registered with a different payload", "contact_id");
    }
    commit(EventKind::contact_registered, json(contact));
    return contact.contact_id;
}

SocialSituation Engine::add_situation(const SituationRecord& record) {
    std::lock_guard lock(write_mu_);
    auto current = state();
    auto resolved = assemble_situation(record.cues, record.participant_ids, current->contacts, record.situation_id,
                                       record.label);
    require_valid_id(record.situation_id, "situation_id");
    auto it = current->situations.find(record.situation_id);
    if (it != current->situations.end()) {
        if (it->second == record) return resolved;
        throw Error(ErrorCode::ValidationError, "situation '" + record.situation_id + "' already exists",
                    "situation_id");
    }
    commit(EventKind::situation_added, json(record));
    return resolved;
}

json Engine::answer_elicitation(const std::string& request_id, const json& answers) {
    std::lock_guard lock(write_mu_);
    auto current = state();
    const auto pending = ssa::pending_elicitations(*current);
    auto req_it = std::find_if(pending.begin(), pending.end(),
                               [&](const ElicitationRequest& r) { return r.request_id == request_id; });
    if (req_it == pending.end()) {
        if (current->closed_requests.count(request_id) != 0)
            throw Error(ErrorCode::ClosedRequest, "elicitation request '" + request_id + "' is already closed",
                        "request_id");
        throw Error(ErrorCode::UnknownRequest, "unknown elicitation request '" + request_id + "'", "request_id");
    }
    const auto& req = *req_it;
    if (!answers.is_object() || answers.empty())
        throw Error(ErrorCode::ValidationError, "answers must be a non-empty object of field path to value", "answers");

    const auto& rec = current->situations.at(req.situation_id);
    const bool focal_missing = rec.participant_ids.empty() && !req.missing_fields.empty();

    std::map<std::size_t, SocialRelationship> updates;
    std::optional<std::string> attach;
    std::optional<SituationProfile> asserted;
    std::size_t covered = 0;

    if (focal_missing) {
        std::string cid = req.situation_id + ".p0";
        if (answers.contains("participants[0].contact_id")) {
            const auto& v = answers["participants[0].contact_id"];
            if (!v.is_string()) throw Error(ErrorCode::ValidationError, "contact_id must be a string",
                                            "participants[0].contact_id");
            cid = v.get<std::string>();
            ++covered;
        }
        require_valid_id(cid, "participants[0].contact_id");
        const auto* existing = current->contacts.find(cid);
        updates[0] = existing ? *existing : SocialRelationship{cid, {}, {}, {}, {}, {}};
        attach = cid;
    }

    for (const auto& [path, value] : answers.items()) {
        if (path == "participants[0].contact_id" && focal_missing) continue;
        std::smatch m;
        if (std::regex_match(path, m, kParticipantPath)) {
            if (std::find(req.missing_fields.begin(), req.missing_fields.end(), path) == req.missing_fields.end())
                throw Error(ErrorCode::ValidationError, "'" + path + "' is not asked by this request", path);
            const auto index = static_cast<std::size_t>(std::stoul(m[1].str()));
            if (!updates.count(index)) updates[index] = current->contacts.at(rec.participant_ids.at(index));
            set_relationship_field(updates[index], m[2].str(), value, path);
            ++covered;
            continue;
        }
        if (path.rfind("profile.", 0) == 0) {
            const auto dim = parse_dimension(path.substr(8));
            const bool asked = std::any_of(req.uncertain.begin(), req.uncertain.end(),
                                           [&](const UncertainDimension& u) { return u.dimension == dim; });
            if (!asked) throw Error(ErrorCode::ValidationError, "'" + path + "' is not asked by this request", path);
            if (!value.is_number() || !(value.get<double>() >= kProfileMin && value.get<double>() <= kProfileMax))
                throw Error(ErrorCode::RangeError, path + " must be a number in [1,6]", path);
            if (!asserted) asserted = ssa::comprehension(*current, req.situation_id).profile;
            (*asserted)[dim] = value.get<double>();
            ++covered;
            continue;
        }
        throw Error(ErrorCode::ValidationError, "'" + path + "' is not asked by this request", path);
    }
    if (covered == 0) throw Error(ErrorCode::ValidationError, "answers cover none of the requested items", "answers");

    json contacts = json::array();
    for (const auto& [index, rel] : updates) {
        validate_relationship(rel);
        contacts.push_back(rel);
    }
    json pair = nullptr;
    if (asserted) {
        const auto sit = ssa::situation(*current, req.situation_id);
        pair = TrainingPair{req.situation_id, encode_features(sit, current->settings->manifest), *asserted};
    }
    commit(EventKind::elicitation_answered, json{{"request_id", request_id},
                                                 {"situation_id", req.situation_id},
                                                 {"contacts", contacts},
                                                 {"attach_contact", attach ? json(*attach) : json(nullptr)},
                                                 {"training_pair", pair}});
    bool refitted = false;
    if (asserted && config_.auto_refit) refitted = refit_locked();
    return json{{"request_id", request_id},
                {"situation_id", req.situation_id},
                {"closed", true},
                {"training_pair_added", asserted.has_value()},
                {"refit", refitted}};
}

DecisionRecord Engine::suggestion(const std::string& conflict_id) {
    std::lock_guard lock(write_mu_);
    auto current = state();
    const auto all = ssa::conflicts(*current);
    auto it = std::find_if(all.begin(), all.end(), [&](const Conflict& c) { return c.conflict_id == conflict_id; });
    if (it == all.end()) throw Error(ErrorCode::UnknownConflict, "unknown conflict '" + conflict_id + "'", "conflict_id");

    auto first = assess(*current, it->meetings.first);
    auto second = assess(*current, it->meetings.second);
    auto s = suggest(*it, first.priority, second.priority, current->settings->low_confidence_margin);

    DecisionRecord rec;
    rec.kind = DecisionKind::suggestion;
    rec.important_values = current->settings->user.important_values;
    const bool keep_first = s.keep == it->meetings.first;
    rec.assessments = keep_first ? std::vector{first, second} : std::vector{second, first};

    for (auto d = current->decision_order.rbegin(); d != current->decision_order.rend(); ++d) {
        const auto& prev = current->decisions.at(*d);
        if (prev.kind != DecisionKind::suggestion || prev.suggestion->conflict_id != conflict_id) continue;
        rec.suggestion = s;
        if (same_content(rec, prev)) return prev;
        break;
    }
    rec.decision_id = "d" + std::to_string(current->decision_order.size() + 1);
    s.suggestion_id = rec.decision_id;
    rec.suggestion = s;
    commit(EventKind::decision_made, json(rec));
    return rec;
}

DecisionRecord Engine::decide_sharing(const std::string& situation_id, const std::string& recipient) {
    std::lock_guard lock(write_mu_);
    auto current = state();
    auto a = assess(*current, situation_id);
    auto share = ssa::decide_sharing(situation_id, a.impact, current->settings->user, recipient, current->contacts);

    DecisionRecord rec;
    rec.kind = DecisionKind::share;
    rec.share = share;
    rec.assessments = {a};
    rec.important_values = current->settings->user.important_values;
    for (auto d = current->decision_order.rbegin(); d != current->decision_order.rend(); ++d) {
        const auto& prev = current->decisions.at(*d);
        if (prev.kind != DecisionKind::share || prev.share->situation_id != situation_id ||
            prev.share->recipient != recipient)
            continue;
        if (same_content(rec, prev)) return prev;
        break;
    }
    rec.decision_id = "d" + std::to_string(current->decision_order.size() + 1);
    commit(EventKind::decision_made, json(rec));
    return rec;
}

json Engine::record_feedback(const std::string& decision_id, FeedbackRecord feedback) {
    std::lock_guard lock(write_mu_);
    auto current = state();
    feedback.suggestion_id = decision_id;
    auto it = current->decisions.find(decision_id);
    if (it == current->decisions.end())
        throw Error(ErrorCode::UnknownSuggestion, "unknown suggestion '" + decision_id + "'", "suggestion_id");
    validate_feedback(feedback);
    const auto& rec = it->second;

    std::string target = rec.kind == DecisionKind::suggestion ? rec.suggestion->reschedule : rec.share->situation_id;
    if (feedback.situation_id) target = *feedback.situation_id;
    const auto* assessed = rec.assessment_for(target);
    if (!assessed)
        throw Error(ErrorCode::ValidationError, "situation '" + target + "' is not part of decision " + decision_id,
                    "situation_id");
    feedback.situation_id = target;

    json priority_pair = nullptr;
    json comprehension_pair = nullptr;
    if (feedback.verdict == Verdict::reject) {
        if (feedback.corrected_priority) {
            priority_pair = PriorityTrainingPair{target, assessed->comprehension.profile, *feedback.corrected_priority};
        }
        if (feedback.corrected_profile) {
            comprehension_pair = TrainingPair{
                target, encode_features(assessed->situation, current->settings->manifest), *feedback.corrected_profile};
        }
    }
    commit(EventKind::feedback_recorded,
           json{{"feedback", feedback}, {"priority_pair", priority_pair}, {"comprehension_pair", comprehension_pair}});
    const bool has_training = !priority_pair.is_null() || !comprehension_pair.is_null();
    bool refitted = false;
    if (has_training && config_.auto_refit) refitted = refit_locked();
    return json{{"feedback", feedback}, {"training_pair_added", has_training}, {"refit", refitted}};
}

bool Engine::refit_locked() {
    auto current = state();
    if (current->comprehension_fitted == current->comprehension_training.size() &&
        current->priority_fitted == current->priority_training.size())
        return false;
    commit(EventKind::model_refit, json{{"comprehension_pairs", current->comprehension_training.size()},
                                        {"priority_pairs", current->priority_training.size()}});
    return true;
}

bool Engine::apply_feedback() {
    std::lock_guard lock(write_mu_);
    return refit_locked();
}

std::uint64_t Engine::write_snapshot() const {
    auto current = state();
    if (!log_->persistent()) throw Error(ErrorCode::StorageError, "in-memory engine has no snapshot location");
    ssa::write_snapshot(config_.snapshot_path(), *current);
    return current->last_seq;
}

std::vector<SocialRelationship> Engine::contacts() const {
    auto current = state();
    std::vector<SocialRelationship> out;
    for (const auto& [id, c] : current->contacts.contacts()) out.push_back(c);
    return out;
}

SocialSituation Engine::situation(const std::string& situation_id) const {
    return ssa::situation(*state(), situation_id);
}

ComprehensionResult Engine::profile(const std::string& situation_id) const {
    return ssa::comprehension(*state(), situation_id);
}

SituationAssessment Engine::projection(const std::string& situation_id) const {
    return assess(*state(), situation_id);
}

std::vector<Conflict> Engine::conflicts() const { return ssa::conflicts(*state()); }

std::vector<ElicitationRequest> Engine::pending_elicitations() const { return ssa::pending_elicitations(*state()); }

Explanation Engine::explanation(const std::string& decision_id, int depth) const {
    return explain(decision(*state(), decision_id), depth);
}

json projection_json(const SituationAssessment& a) {
    return json{{"situation_id", a.situation.situation_id},
                {"profile", a.comprehension.profile},
                {"source", to_string(a.comprehension.source)},
                {"priority", a.priority},
                {"priority_model", to_string(a.priority_model)},
                {"impact", a.impact},
                {"support", a.support}};
}

}  // namespace ssa
