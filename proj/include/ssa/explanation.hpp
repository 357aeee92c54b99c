#ifndef SSA_EXPLANATION_HPP
#define SSA_EXPLANATION_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssa/comprehension.hpp"
#include "ssa/decision.hpp"

namespace ssa {

enum class ExplanationLevel { L3_value_behavior, L2_characteristics, L1_evidence };
std::string_view to_string(ExplanationLevel l);

struct Statement {
    std::string template_id;
    json facts;
    bool operator==(const Statement&) const = default;
};

struct ExplanationLayer {
    ExplanationLevel level = ExplanationLevel::L3_value_behavior;
    std::vector<Statement> statements;
    bool operator==(const ExplanationLayer&) const = default;
};

/// Explanation chain, outermost (L3) first. Serialises as nested
/// {level, statements, child} objects.
struct Explanation {
    std::string decision_id;
    std::vector<ExplanationLayer> layers;
    bool operator==(const Explanation&) const = default;
};

void to_json(json& j, const Explanation& e);

using Contribution = std::pair<Dimension, double>;

/// w_d * (x_d - 3.5) for every dimension, ranked by |contribution|; ties keep
/// canonical dimension order.
std::vector<Contribution> contributions(const SituationProfile& profile,
                                        const std::array<double, kNumDimensions>& weights);
std::vector<Contribution> contributions(const SituationProfile& profile, const PriorityModel& model);

struct EvidenceItem {
    std::string source_id;  // rule id or neighbour situation id
    std::vector<std::pair<std::string, json>> fields;
    double distance = 0.0;  // neighbours only
    bool operator==(const EvidenceItem&) const = default;
};

/// Level-1 grounds of a comprehension result: the satisfied predicates of
/// each fired rule with the situation's actual values, or each neighbour with
/// its three closest features and the query's encoded values for them.
std::vector<EvidenceItem> level1_evidence(const ComprehensionResult& comprehension, const SocialSituation& situation,
                                          const EncodingManifest& manifest = {});

inline constexpr std::size_t kTopCharacteristics = 2;

Explanation explain(const DecisionRecord& decision, int depth);

using TemplateCatalog = std::map<std::string, std::string>;

TemplateCatalog default_catalog();
TemplateCatalog load_catalog(const std::string& path);

std::string format_number(double v);
std::string render_statement(const Statement& s, const TemplateCatalog& catalog);
std::vector<std::string> render(const Explanation& e, const TemplateCatalog& catalog);

}  // namespace ssa

#endif  // SSA_EXPLANATION_HPP
