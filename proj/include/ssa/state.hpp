#ifndef SSA_STATE_HPP
#define SSA_STATE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssa/agent.hpp"
#include "ssa/comprehension.hpp"
#include "ssa/decision.hpp"
#include "ssa/perception.hpp"
#include "ssa/projection.hpp"

namespace ssa {

enum class PriorityLearner { linear, knn };

/// Configuration-derived knowledge: fixed for the lifetime of a store and
/// not part of the event log.
struct Settings {
    RuleSet rules = default_ruleset();
    ImpactTable impact_table = default_impact_table();
    ValueTaxonomy taxonomy = default_value_taxonomy();
    UserModel user;
    EncodingManifest manifest;
    std::size_t knn_k = 5;
    std::size_t n_train = 20;
    PriorityLearner priority_learner = PriorityLearner::linear;
    std::size_t priority_k = 1;
    std::size_t priority_min_pairs = 10;      // linear learner
    std::size_t priority_knn_min_pairs = 1;   // kNN learner
    double ridge_lambda = 1e-3;
    double low_confidence_margin = kLowConfidenceMargin;
    std::vector<TrainingPair> seed_training;  // preloaded comprehension data

    bool operator==(const Settings&) const = default;
};

struct PriorityTrainingPair {
    std::string situation_id;
    SituationProfile profile;
    double priority = 0.0;
    bool operator==(const PriorityTrainingPair&) const = default;
};

void to_json(json& j, const PriorityTrainingPair& p);

enum class EventKind {
    contact_registered,
    situation_added,
    elicitation_answered,
    feedback_recorded,
    model_refit,
    decision_made,
};

std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view s);

struct EventRecord {
    std::uint64_t seq = 0;
    std::string timestamp;
    EventKind kind = EventKind::contact_registered;
    json payload;
};

void to_json(json& j, const EventRecord& e);
void from_json(const json& j, EventRecord& e);

// ValidationError unless `payload` has the fixed schema for `kind`.
void validate_payload(EventKind kind, const json& payload);

/// Agent state as a fold over the event log. Models are always a function of
/// the training-set prefixes they were last fitted on.
struct AgentState {
    std::shared_ptr<const Settings> settings = std::make_shared<Settings>();

    ContactBook contacts;
    std::map<std::string, SituationRecord> situations;
    std::vector<TrainingPair> comprehension_training;
    std::vector<PriorityTrainingPair> priority_training;
    std::size_t comprehension_fitted = 0;
    std::size_t priority_fitted = 0;
    std::optional<KnnModel> knn;
    PriorityModel priority;
    std::map<std::string, std::uint64_t> elicitation_rounds;
    std::set<std::string> closed_requests;
    std::map<std::string, DecisionRecord> decisions;
    std::vector<std::string> decision_order;
    std::vector<FeedbackRecord> feedback;
    std::uint64_t last_seq = 0;

    bool operator==(const AgentState& o) const;
};

AgentState initial_state(std::shared_ptr<const Settings> settings);

/// Fold one event. Throws on payloads that do not apply to `state` and leaves
/// `state` unchanged in that case.
AgentState apply(const AgentState& state, const EventRecord& event);

AgentState replay(std::shared_ptr<const Settings> settings, const std::vector<EventRecord>& events);

// Refit models on the first `comprehension_pairs` / `priority_pairs` pairs.
void refit(AgentState& state, std::size_t comprehension_pairs, std::size_t priority_pairs);

// Serialises everything except settings.
json state_to_json(const AgentState& state);
AgentState state_from_json(const json& j, std::shared_ptr<const Settings> settings);

// Reads derived from the state.
SocialSituation situation(const AgentState& state, const std::string& situation_id);
ComprehensionResult comprehension(const AgentState& state, const std::string& situation_id);
SituationAssessment assess(const AgentState& state, const std::string& situation_id);
std::vector<Meeting> agenda(const AgentState& state);
std::vector<Conflict> conflicts(const AgentState& state);
std::vector<ElicitationRequest> pending_elicitations(const AgentState& state);
const DecisionRecord& decision(const AgentState& state, const std::string& decision_id);

}  // namespace ssa

#endif  // SSA_STATE_HPP
