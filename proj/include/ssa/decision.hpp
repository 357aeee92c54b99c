#ifndef SSA_DECISION_HPP
#define SSA_DECISION_HPP

#include <optional>
#include <string>
#include <vector>

#include "ssa/agent.hpp"
#include "ssa/comprehension.hpp"
#include "ssa/projection.hpp"

namespace ssa {

// One matched impact-rule threshold behind a value impact.
struct ImpactEvidence {
    std::string value;
    int effect = 0;
    Dimension dimension = Dimension::duty;
    double level = 0.0;  // the profile's score on `dimension`
    std::optional<double> gte;
    std::optional<double> lte;
    bool operator==(const ImpactEvidence&) const = default;
};

std::vector<ImpactEvidence> impact_evidence(const SituationProfile& profile, const ImpactTable& table);

/// Everything the agent concluded about one situation at decision time.
/// Explanations are rendered from this copy only.
struct SituationAssessment {
    SocialSituation situation;
    ComprehensionResult comprehension;
    double priority = 0.0;
    PriorityModel::Kind priority_model = PriorityModel::Kind::default_formula;
    std::array<double, kNumDimensions> attribution_weights{};
    ValueImpact impact;
    std::vector<ImpactEvidence> impact_evidence;
    SupportAssessment support;

    bool operator==(const SituationAssessment&) const = default;
};

void to_json(json& j, const SituationAssessment& a);
void from_json(const json& j, SituationAssessment& a);

enum class DecisionKind { suggestion, share };

struct DecisionRecord {
    std::string decision_id;
    DecisionKind kind = DecisionKind::suggestion;
    std::optional<Suggestion> suggestion;
    std::optional<ShareDecision> share;
    // suggestion: [kept, rescheduled]; share: [situation]
    std::vector<SituationAssessment> assessments;
    std::vector<std::string> important_values;

    const SituationAssessment* assessment_for(const std::string& situation_id) const;
    bool operator==(const DecisionRecord&) const = default;
};

void to_json(json& j, const DecisionRecord& d);
void from_json(const json& j, DecisionRecord& d);

}  // namespace ssa

#endif  // SSA_DECISION_HPP
