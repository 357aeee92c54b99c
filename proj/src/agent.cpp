#include "ssa/agent.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ssa/error.hpp"
#include "ssa/kernels.hpp"

namespace ssa {

bool UserModel::values(const std::string& v) const {
    return std::find(important_values.begin(), important_values.end(), v) != important_values.end();
}

void to_json(json& j, const UserModel& u) {
    json prefs = json::array();
    for (const auto& p : u.behavior_preferences) {
        json when;
        to_json(when, p.when);
        prefs.push_back(json{{"when", when}, {"band", {p.min_priority, p.max_priority}}});
    }
    j = json{{"important_values", u.important_values},
             {"behavior_preferences", prefs},
             {"elicitation_threshold", u.elicitation_threshold}};
}

UserModel parse_user_model(const json& j, const ValueTaxonomy& taxonomy) {
    static constexpr std::array<std::string_view, 3> kAllowed = {"important_values", "behavior_preferences",
                                                                 "elicitation_threshold"};
    reject_unknown_fields(j, kAllowed, "user model");
    UserModel u;
    for (const auto& v : j.value("important_values", json::array())) {
        const auto name = v.get<std::string>();
        if (std::find(taxonomy.begin(), taxonomy.end(), name) == taxonomy.end())
            throw Error(ErrorCode::ValidationError, "important value '" + name + "' is not in the taxonomy",
                        "important_values");
        u.important_values.push_back(name);
    }
    for (const auto& p : j.value("behavior_preferences", json::array())) {
        BehaviorPreference pref;
        pref.when = parse_condition(p.value("when", json::object()));
        const auto band = p.at("band");
        if (!band.is_array() || band.size() != 2)
            throw Error(ErrorCode::ValidationError, "band must be [min, max]", "band");
        pref.min_priority = band[0].get<double>();
        pref.max_priority = band[1].get<double>();
        if (!(pref.min_priority <= pref.max_priority))
            throw Error(ErrorCode::ValidationError, "band must be [min, max] with min <= max", "band");
        u.behavior_preferences.push_back(std::move(pref));
    }
    u.elicitation_threshold = j.value("elicitation_threshold", 1.0);
    if (!(u.elicitation_threshold > 0.0))
        throw Error(ErrorCode::ValidationError, "elicitation threshold must be positive", "elicitation_threshold");
    return u;
}

Meeting meeting_for(const SituationRecord& s) {
    return Meeting{s.situation_id, s.situation_id, s.cues.start, s.cues.start + std::chrono::minutes(s.cues.duration)};
}

void to_json(json& j, const Conflict& c) {
    j = json{{"conflict_id", c.conflict_id},
             {"meetings", {c.meetings.first, c.meetings.second}},
             {"overlap", {{"start", format_timestamp(c.overlap_start)}, {"end", format_timestamp(c.overlap_end)}}}};
}

std::vector<Conflict> detect_conflicts(const std::vector<Meeting>& agenda) {
    std::vector<std::int64_t> starts, ends;
    starts.reserve(agenda.size());
    ends.reserve(agenda.size());
    for (const auto& m : agenda) {
        starts.push_back(m.start.time_since_epoch().count());
        ends.push_back(m.end.time_since_epoch().count());
    }
    auto earlier = [&](std::size_t a, std::size_t b) {
        return std::tie(agenda[a].start, agenda[a].meeting_id) < std::tie(agenda[b].start, agenda[b].meeting_id);
    };
    std::vector<std::pair<std::size_t, std::size_t>> ordered;
    for (auto [a, b] : kernels::overlapping_pairs(starts, ends)) {
        ordered.emplace_back(earlier(a, b) ? std::pair{a, b} : std::pair{b, a});
    }
    std::sort(ordered.begin(), ordered.end(), [&](const auto& x, const auto& y) {
        const auto& [a1, b1] = x;
        const auto& [a2, b2] = y;
        return std::tie(agenda[a1].start, agenda[a1].meeting_id, agenda[b1].start, agenda[b1].meeting_id) <
               std::tie(agenda[a2].start, agenda[a2].meeting_id, agenda[b2].start, agenda[b2].meeting_id);
    });
    std::vector<Conflict> conflicts;
    conflicts.reserve(ordered.size());
    for (auto [a, b] : ordered) {
        Conflict c;
        c.meetings = {agenda[a].meeting_id, agenda[b].meeting_id};
        c.conflict_id = c.meetings.first + "~" + c.meetings.second;
        c.overlap_start = std::max(agenda[a].start, agenda[b].start);
        c.overlap_end = std::min(agenda[a].end, agenda[b].end);
        conflicts.push_back(std::move(c));
    }
    return conflicts;
}

void to_json(json& j, const Suggestion& s) {
    j = json{{"suggestion_id", s.suggestion_id},
             {"conflict_id", s.conflict_id},
             {"keep", s.keep},
             {"reschedule", s.reschedule},
             {"priorities", {{"keep", s.keep_priority}, {"reschedule", s.reschedule_priority}}},
             {"margin", s.margin},
             {"low_confidence", s.low_confidence}};
}

void from_json(const json& j, Suggestion& s) {
    s.suggestion_id = j.at("suggestion_id").get<std::string>();
    s.conflict_id = j.at("conflict_id").get<std::string>();
    s.keep = j.at("keep").get<std::string>();
    s.reschedule = j.at("reschedule").get<std::string>();
    s.keep_priority = j.at("priorities").at("keep").get<double>();
    s.reschedule_priority = j.at("priorities").at("reschedule").get<double>();
    s.margin = j.at("margin").get<double>();
    s.low_confidence = j.at("low_confidence").get<bool>();
}

Suggestion suggest(const Conflict& conflict, double first_priority, double second_priority,
                   double low_confidence_margin) {
    for (double p : {first_priority, second_priority}) {
        if (!(p >= kPriorityMin && p <= kPriorityMax))
            throw Error(ErrorCode::ValidationError, "meeting priority must lie in [1,7]", "priority");
    }
    Suggestion s;
    s.conflict_id = conflict.conflict_id;
    const bool keep_first = first_priority >= second_priority;
    s.keep = keep_first ? conflict.meetings.first : conflict.meetings.second;
    s.reschedule = keep_first ? conflict.meetings.second : conflict.meetings.first;
    s.keep_priority = keep_first ? first_priority : second_priority;
    s.reschedule_priority = keep_first ? second_priority : first_priority;
    s.margin = s.keep_priority - s.reschedule_priority;
    s.low_confidence = s.margin < low_confidence_margin;
    return s;
}

std::string_view to_string(SupportNeed n) {
    switch (n) {
        case SupportNeed::none: return "none";
        case SupportNeed::value_affected: return "value_affected";
        case SupportNeed::behavior_mismatch: return "behavior_mismatch";
    }
    return "none";
}

void to_json(json& j, const SupportAssessment& s) {
    json needs = json::array();
    for (auto n : s.needs) needs.push_back(to_string(n));
    j = json{{"need", to_string(s.primary())}, {"needs", needs}, {"affected_values", s.affected_values}};
    j["band"] = s.band ? json{s.band->first, s.band->second} : json(nullptr);
}

void from_json(const json& j, SupportAssessment& s) {
    s = SupportAssessment{};
    for (const auto& n : j.at("needs")) {
        const auto name = n.get<std::string>();
        s.needs.push_back(name == "value_affected" ? SupportNeed::value_affected : SupportNeed::behavior_mismatch);
    }
    s.affected_values = j.at("affected_values").get<std::vector<std::string>>();
    if (!j.at("band").is_null()) s.band = std::pair{j["band"][0].get<double>(), j["band"][1].get<double>()};
}

SupportAssessment assess_support_need(const UserModel& user, const SocialSituation& situation, double priority,
                                      const ValueImpact& impact) {
    SupportAssessment out;
    for (const auto& [value, e] : impact.entries()) {
        if (e != 0 && user.values(value)) out.affected_values.push_back(value);
    }
    if (!out.affected_values.empty()) out.needs.push_back(SupportNeed::value_affected);
    for (const auto& pref : user.behavior_preferences) {
        if (!pref.when.matches(situation)) continue;
        out.band = std::pair{pref.min_priority, pref.max_priority};
        if (priority < pref.min_priority || priority > pref.max_priority)
            out.needs.push_back(SupportNeed::behavior_mismatch);
        break;
    }
    return out;
}

void to_json(json& j, const ShareDecision& d) {
    j = json{{"situation_id", d.situation_id},
             {"recipient", d.recipient},
             {"decision", d.decision == ShareVerdict::share ? "share" : "withhold"},
             {"driving_values", d.driving_values}};
}

void from_json(const json& j, ShareDecision& d) {
    d.situation_id = j.at("situation_id").get<std::string>();
    d.recipient = j.at("recipient").get<std::string>();
    d.decision = j.at("decision").get<std::string>() == "share" ? ShareVerdict::share : ShareVerdict::withhold;
    d.driving_values = j.at("driving_values").get<std::vector<std::string>>();
}

ShareDecision decide_sharing(const std::string& situation_id, const ValueImpact& impact, const UserModel& user,
                             const std::string& recipient, const ContactBook& contacts) {
    if (!contacts.contains(recipient))
        throw Error(ErrorCode::UnknownContact, "unknown recipient '" + recipient + "'", "recipient");
    ShareDecision d;
    d.situation_id = situation_id;
    d.recipient = recipient;
    bool vetoed = false;
    for (const auto& [value, e] : impact.entries()) {
        if (!user.values(value)) continue;
        if (e > 0) d.driving_values.push_back(value);
        if (e < 0) vetoed = true;
    }
    d.decision = (!vetoed && !d.driving_values.empty()) ? ShareVerdict::share : ShareVerdict::withhold;
    if (d.decision == ShareVerdict::withhold && vetoed) {
        // Report the demoted values that blocked sharing.
        d.driving_values.clear();
        for (const auto& [value, e] : impact.entries()) {
            if (e < 0 && user.values(value)) d.driving_values.push_back(value);
        }
    }
    return d;
}

void to_json(json& j, const ElicitationRequest& r) {
    json unc = json::array();
    for (const auto& u : r.uncertain) {
        unc.push_back(json{{"dimension", to_string(u.dimension)}, {"uncertainty", u.uncertainty}});
    }
    j = json{{"request_id", r.request_id},
             {"situation_id", r.situation_id},
             {"missing_fields", r.missing_fields},
             {"uncertain", unc}};
}

void to_json(json& j, const FeedbackRecord& f) {
    j = json{{"suggestion_id", f.suggestion_id},
             {"verdict", f.verdict == Verdict::accept ? "accept" : "reject"},
             {"reason", f.reason}};
    j["corrected_priority"] = f.corrected_priority ? json(*f.corrected_priority) : json(nullptr);
    j["corrected_profile"] = f.corrected_profile ? json(*f.corrected_profile) : json(nullptr);
    j["situation_id"] = f.situation_id ? json(*f.situation_id) : json(nullptr);
}

void from_json(const json& j, FeedbackRecord& f) {
    static constexpr std::array<std::string_view, 6> kAllowed = {
        "suggestion_id", "verdict", "corrected_priority", "corrected_profile", "reason", "situation_id"};
    reject_unknown_fields(j, kAllowed, "feedback");
    f = FeedbackRecord{};
    if (j.contains("suggestion_id") && !j["suggestion_id"].is_null())
        f.suggestion_id = j["suggestion_id"].get<std::string>();
    if (!j.contains("verdict") || !j["verdict"].is_string())
        throw Error(ErrorCode::ValidationError, "verdict must be \"accept\" or \"reject\"", "verdict");
    const auto verdict = j["verdict"].get<std::string>();
    if (verdict == "accept") {
        f.verdict = Verdict::accept;
    } else if (verdict == "reject") {
        f.verdict = Verdict::reject;
    } else {
        throw Error(ErrorCode::ValidationError, "verdict must be \"accept\" or \"reject\"", "verdict");
    }
    if (j.contains("corrected_priority") && !j["corrected_priority"].is_null()) {
        if (!j["corrected_priority"].is_number())
            throw Error(ErrorCode::ValidationError, "corrected_priority must be a number", "corrected_priority");
        f.corrected_priority = j["corrected_priority"].get<double>();
    }
    if (j.contains("corrected_profile") && !j["corrected_profile"].is_null())
        f.corrected_profile = j["corrected_profile"].get<SituationProfile>();
    if (j.contains("reason") && !j["reason"].is_null()) f.reason = j["reason"].get<std::string>();
    if (j.contains("situation_id") && !j["situation_id"].is_null()) f.situation_id = j["situation_id"].get<std::string>();
}

void validate_feedback(const FeedbackRecord& f) {
    if (f.corrected_priority &&
        !(*f.corrected_priority >= kPriorityMin && *f.corrected_priority <= kPriorityMax)) {
        throw Error(ErrorCode::InvalidCorrection, "corrected_priority must lie in [1,7]", "corrected_priority");
    }
    if (f.corrected_profile && !f.corrected_profile->in_bounds()) {
        throw Error(ErrorCode::InvalidCorrection, "corrected_profile dimensions must lie in [1,6]",
                    "corrected_profile");
    }
    if (f.verdict == Verdict::reject && !f.corrected_priority && !f.corrected_profile && f.reason.empty()) {
        throw Error(ErrorCode::ValidationError, "a rejection needs a correction or a reason", "reason");
    }
}

}  // namespace ssa
