#ifndef SSA_AGENT_HPP
#define SSA_AGENT_HPP

// Support, elicitation and feedback records plus the pure decision rules of
// the agent loop (conflict detection, suggestions, support need, sharing).

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssa/comprehension.hpp"
#include "ssa/perception.hpp"
#include "ssa/projection.hpp"
#include "ssa/types.hpp"

namespace ssa {

struct BehaviorPreference {
    Condition when;
    double min_priority = kPriorityMin;
    double max_priority = kPriorityMax;
    bool operator==(const BehaviorPreference&) const = default;
};

struct UserModel {
    std::vector<std::string> important_values;
    std::vector<BehaviorPreference> behavior_preferences;  // first match wins
    double elicitation_threshold = 1.0;

    bool values(const std::string& v) const;
    bool operator==(const UserModel&) const = default;
};

void to_json(json& j, const UserModel& u);
UserModel parse_user_model(const json& j, const ValueTaxonomy& taxonomy);

struct Meeting {
    std::string meeting_id;
    std::string situation_id;
    Timestamp start{};
    Timestamp end{};  // exclusive
};

Meeting meeting_for(const SituationRecord& situation);

struct Conflict {
    std::string conflict_id;
    std::pair<std::string, std::string> meetings;  // earlier (start, id) first
    Timestamp overlap_start{};
    Timestamp overlap_end{};
    bool operator==(const Conflict&) const = default;
};

void to_json(json& j, const Conflict& c);

/// Every unordered pair with a non-empty half-open overlap, sorted by the
/// earlier meeting's (start, id) and then the later one's.
std::vector<Conflict> detect_conflicts(const std::vector<Meeting>& agenda);

struct Suggestion {
    std::string suggestion_id;
    std::string conflict_id;
    std::string keep;
    std::string reschedule;
    double keep_priority = 0.0;
    double reschedule_priority = 0.0;
    double margin = 0.0;
    bool low_confidence = false;
    bool operator==(const Suggestion&) const = default;
};

void to_json(json& j, const Suggestion& s);
void from_json(const json& j, Suggestion& s);

inline constexpr double kLowConfidenceMargin = 0.25;

/// Keep the higher-priority meeting. An exact tie keeps the conflict's first
/// meeting (earlier start, then lower id).
Suggestion suggest(const Conflict& conflict, double first_priority, double second_priority,
                   double low_confidence_margin = kLowConfidenceMargin);

enum class SupportNeed { none, value_affected, behavior_mismatch };
std::string_view to_string(SupportNeed n);

struct SupportAssessment {
    std::vector<SupportNeed> needs;  // value_affected before behavior_mismatch
    std::vector<std::string> affected_values;
    std::optional<std::pair<double, double>> band;

    SupportNeed primary() const { return needs.empty() ? SupportNeed::none : needs.front(); }
    bool operator==(const SupportAssessment&) const = default;
};

void to_json(json& j, const SupportAssessment& s);
void from_json(const json& j, SupportAssessment& s);

SupportAssessment assess_support_need(const UserModel& user, const SocialSituation& situation, double priority,
                                      const ValueImpact& impact);

enum class ShareVerdict { share, withhold };

struct ShareDecision {
    std::string situation_id;
    std::string recipient;
    ShareVerdict decision = ShareVerdict::withhold;
    std::vector<std::string> driving_values;
    bool operator==(const ShareDecision&) const = default;
};

void to_json(json& j, const ShareDecision& d);
void from_json(const json& j, ShareDecision& d);

/// Share iff an important value is promoted and none is demoted.
ShareDecision decide_sharing(const std::string& situation_id, const ValueImpact& impact, const UserModel& user,
                             const std::string& recipient, const ContactBook& contacts);

struct UncertainDimension {
    Dimension dimension = Dimension::duty;
    double uncertainty = 0.0;
    bool operator==(const UncertainDimension&) const = default;
};

struct ElicitationRequest {
    std::string request_id;
    std::string situation_id;
    std::vector<std::string> missing_fields;
    std::vector<UncertainDimension> uncertain;
    bool operator==(const ElicitationRequest&) const = default;
};

void to_json(json& j, const ElicitationRequest& r);

enum class Verdict { accept, reject };

struct FeedbackRecord {
    std::string suggestion_id;
    Verdict verdict = Verdict::accept;
    std::optional<double> corrected_priority;
    std::optional<SituationProfile> corrected_profile;
    std::string reason;
    // Situation the correction refers to; defaults to the rescheduled meeting
    // of a suggestion or the situation of a share decision.
    std::optional<std::string> situation_id;
    bool operator==(const FeedbackRecord&) const = default;
};

void to_json(json& j, const FeedbackRecord& f);
void from_json(const json& j, FeedbackRecord& f);

// InvalidCorrection for out-of-range corrections; ValidationError for a
// reject carrying neither a correction nor a reason.
void validate_feedback(const FeedbackRecord& f);

}  // namespace ssa

#endif  // SSA_AGENT_HPP
