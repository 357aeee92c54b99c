#ifndef SSA_ENGINE_HPP
#define SSA_ENGINE_HPP

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ssa/config.hpp"
#include "ssa/explanation.hpp"
#include "ssa/state.hpp"
#include "ssa/store.hpp"

namespace ssa {

/// The agent loop. Mutating commands are serialised through one writer lock,
/// persisted to the event log and then published as a new immutable state;
/// readers work on whichever state was published when they started.
class Engine {
public:
    using Clock = std::function<std::string()>;

    Engine(Config config, std::unique_ptr<EventLog> log, const Snapshot* snapshot = nullptr, Clock clock = {});

    /// Open (or create) the store in `config.store_dir`, resuming from its
    /// snapshot when present.
    static std::unique_ptr<Engine> open(Config config, Clock clock = {});

    // In-memory engine with no store directory.
    static std::unique_ptr<Engine> in_memory(Config config = {}, Clock clock = {});

    std::shared_ptr<const AgentState> state() const;
    const Config& config() const { return config_; }
    const EventLog& log() const { return *log_; }

    // Commands
    std::string register_contact(const SocialRelationship& contact);
    SocialSituation add_situation(const SituationRecord& record);
    json answer_elicitation(const std::string& request_id, const json& answers);
    DecisionRecord suggestion(const std::string& conflict_id);
    DecisionRecord decide_sharing(const std::string& situation_id, const std::string& recipient);
    json record_feedback(const std::string& decision_id, FeedbackRecord feedback);
    // Refit models on all recorded training data; false if already current.
    bool apply_feedback();
    std::uint64_t write_snapshot() const;

    // Reads
    std::vector<SocialRelationship> contacts() const;
    SocialSituation situation(const std::string& situation_id) const;
    ComprehensionResult profile(const std::string& situation_id) const;
    SituationAssessment projection(const std::string& situation_id) const;
    std::vector<Conflict> conflicts() const;
    std::vector<ElicitationRequest> pending_elicitations() const;
    Explanation explanation(const std::string& decision_id, int depth) const;

private:
    // Caller holds write_mu_.
    void commit(EventKind kind, const json& payload);
    bool refit_locked();

    Config config_;
    std::unique_ptr<EventLog> log_;
    Clock clock_;
    std::mutex write_mu_;
    mutable std::mutex publish_mu_;
    std::shared_ptr<const AgentState> state_;
};

json projection_json(const SituationAssessment& a);

std::string utc_now();

}  // namespace ssa

#endif  // SSA_ENGINE_HPP
