#include "ssa/decision.hpp"

#include "ssa/error.hpp"

namespace ssa {

namespace {

PriorityModel::Kind parse_kind(const std::string& s) {
    if (s == "linear") return PriorityModel::Kind::linear;
    if (s == "knn") return PriorityModel::Kind::knn;
    if (s == "default_formula") return PriorityModel::Kind::default_formula;
    throw Error(ErrorCode::ValidationError, "unknown priority model kind '" + s + "'", "priority_model");
}

json evidence_json(const ImpactEvidence& e) {
    json j{{"value", e.value}, {"effect", e.effect}, {"dimension", to_string(e.dimension)}, {"level", e.level}};
    j["gte"] = e.gte ? json(*e.gte) : json(nullptr);
    j["lte"] = e.lte ? json(*e.lte) : json(nullptr);
    return j;
}

ImpactEvidence evidence_from_json(const json& j) {
    ImpactEvidence e;
    e.value = j.at("value").get<std::string>();
    e.effect = j.at("effect").get<int>();
    e.dimension = parse_dimension(j.at("dimension").get<std::string>());
    e.level = j.at("level").get<double>();
    if (!j.at("gte").is_null()) e.gte = j["gte"].get<double>();
    if (!j.at("lte").is_null()) e.lte = j["lte"].get<double>();
    return e;
}

}  // namespace

std::vector<ImpactEvidence> impact_evidence(const SituationProfile& profile, const ImpactTable& table) {
    const auto impact = assess_value_impact(profile, table);
    std::vector<ImpactEvidence> out;
    for (const auto& rule : table) {
        if (!rule.matches(profile)) continue;
        for (const auto& [value, effect] : rule.effects) {
            // neutralised values have no evidence worth citing
            if (impact[value] != effect) continue;
            for (const auto& t : rule.when) {
                out.push_back({value, effect, t.dimension, profile[t.dimension], t.gte, t.lte});
            }
        }
    }
    return out;
}

void to_json(json& j, const SituationAssessment& a) {
    json w = json::object();
    for (std::size_t d = 0; d < kNumDimensions; ++d) w[std::string(kDimensionNames[d])] = a.attribution_weights[d];
    j = json{{"situation", a.situation},
             {"comprehension", a.comprehension},
             {"priority", a.priority},
             {"priority_model", to_string(a.priority_model)},
             {"attribution_weights", w},
             {"impact", a.impact},
             {"support", a.support}};
    json ev = json::array();
    for (const auto& e : a.impact_evidence) ev.push_back(evidence_json(e));
    j["impact_evidence"] = ev;
}

void from_json(const json& j, SituationAssessment& a) {
    a.situation = j.at("situation").get<SocialSituation>();
    a.comprehension = j.at("comprehension").get<ComprehensionResult>();
    a.priority = j.at("priority").get<double>();
    a.priority_model = parse_kind(j.at("priority_model").get<std::string>());
    for (std::size_t d = 0; d < kNumDimensions; ++d)
        a.attribution_weights[d] = j.at("attribution_weights").at(std::string(kDimensionNames[d])).get<double>();
    a.impact = j.at("impact").get<ValueImpact>();
    a.support = j.at("support").get<SupportAssessment>();
    a.impact_evidence.clear();
    for (const auto& e : j.at("impact_evidence")) a.impact_evidence.push_back(evidence_from_json(e));
}

const SituationAssessment* DecisionRecord::assessment_for(const std::string& situation_id) const {
    for (const auto& a : assessments) {
        if (a.situation.situation_id == situation_id) return &a;
    }
    return nullptr;
}

void to_json(json& j, const DecisionRecord& d) {
    j = json{{"decision_id", d.decision_id},
             {"kind", d.kind == DecisionKind::suggestion ? "suggestion" : "share"},
             {"assessments", d.assessments},
             {"important_values", d.important_values}};
    j["suggestion"] = d.suggestion ? json(*d.suggestion) : json(nullptr);
    j["share"] = d.share ? json(*d.share) : json(nullptr);
}

void from_json(const json& j, DecisionRecord& d) {
    d = DecisionRecord{};
    d.decision_id = j.at("decision_id").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "suggestion" && kind != "share")
        throw Error(ErrorCode::ValidationError, "unknown decision kind '" + kind + "'", "kind");
    d.kind = kind == "suggestion" ? DecisionKind::suggestion : DecisionKind::share;
    d.assessments = j.at("assessments").get<std::vector<SituationAssessment>>();
    d.important_values = j.at("important_values").get<std::vector<std::string>>();
    if (!j.at("suggestion").is_null()) d.suggestion = j["suggestion"].get<Suggestion>();
    if (!j.at("share").is_null()) d.share = j["share"].get<ShareDecision>();
    if (d.kind == DecisionKind::suggestion && (!d.suggestion || d.assessments.size() != 2))
        throw Error(ErrorCode::ValidationError, "suggestion decision needs a suggestion and two assessments");
    if (d.kind == DecisionKind::share && (!d.share || d.assessments.size() != 1))
        throw Error(ErrorCode::ValidationError, "share decision needs a share record and one assessment");
}

}  // namespace ssa
