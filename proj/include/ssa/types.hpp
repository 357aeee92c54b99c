#ifndef SSA_TYPES_HPP
#define SSA_TYPES_HPP

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ssa {

using json = nlohmann::json;
using Timestamp = std::chrono::sys_seconds;

enum class Role {
    friend_,
    family,
    colleague,
    supervisor,
    subordinate,
    client,
    romantic_partner,
    acquaintance,
    stranger,
};

enum class Hierarchy { higher, equal, lower };

enum class ActivityType { meeting, dinner, party, call, errand, date, other };

enum class LocationType { office, home, restaurant, public_venue, online, other };

inline constexpr std::array<std::string_view, 9> kRoleNames = {
    "friend", "family", "colleague", "supervisor", "subordinate",
    "client", "romantic_partner", "acquaintance", "stranger"};
inline constexpr std::array<std::string_view, 3> kHierarchyNames = {"higher", "equal", "lower"};
inline constexpr std::array<std::string_view, 7> kActivityNames = {
    "meeting", "dinner", "party", "call", "errand", "date", "other"};
inline constexpr std::array<std::string_view, 6> kLocationNames = {
    "office", "home", "restaurant", "public_venue", "online", "other"};

std::string_view to_string(Role v);
std::string_view to_string(Hierarchy v);
std::string_view to_string(ActivityType v);
std::string_view to_string(LocationType v);

// Throw ValidationError on unknown names.
Role parse_role(std::string_view s);
Hierarchy parse_hierarchy(std::string_view s);
ActivityType parse_activity(std::string_view s);
LocationType parse_location(std::string_view s);

// Identifiers travel in URL paths, so they are restricted to [A-Za-z0-9_.-].
bool is_valid_id(std::string_view id);
void require_valid_id(std::string_view id, const char* field);

std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view s);

/// Social background features of one contact. Every attribute except the id
/// may be unknown until the user supplies it.
struct SocialRelationship {
    std::string contact_id;
    std::optional<Role> role;
    std::optional<Hierarchy> hierarchy;
    std::optional<int> contact_frequency;     // 1..7
    std::optional<int> relationship_quality;  // 1..7
    std::optional<double> years_known;        // >= 0

    bool operator==(const SocialRelationship&) const = default;
};

struct SituationCueSet {
    ActivityType activity_type = ActivityType::other;
    LocationType location_type = LocationType::other;
    Timestamp start{};
    int duration = 0;  // minutes
    int num_people = 1;

    bool operator==(const SituationCueSet&) const = default;
};

struct SocialSituation {
    std::string situation_id;
    SituationCueSet cues;
    std::vector<SocialRelationship> participants;
    std::string label;

    bool operator==(const SocialSituation&) const = default;

    Timestamp end() const { return cues.start + std::chrono::minutes(cues.duration); }
};

/// Stored form of a situation: participants are references into the contact book.
struct SituationRecord {
    std::string situation_id;
    SituationCueSet cues;
    std::vector<std::string> participant_ids;
    std::string label;

    bool operator==(const SituationRecord&) const = default;
};

// DIAMONDS characteristics, canonical order.
enum class Dimension { duty, intellect, adversity, mating, positivity, negativity, deception, sociality };

inline constexpr std::size_t kNumDimensions = 8;
inline constexpr std::array<std::string_view, kNumDimensions> kDimensionNames = {
    "duty", "intellect", "adversity", "mating", "positivity", "negativity", "deception", "sociality"};

inline constexpr double kProfileMin = 1.0;
inline constexpr double kProfileMax = 6.0;
inline constexpr double kPriorityMin = 1.0;
inline constexpr double kPriorityMax = 7.0;

std::string_view to_string(Dimension d);
Dimension parse_dimension(std::string_view s);

struct SituationProfile {
    std::array<double, kNumDimensions> values{};

    static SituationProfile uniform(double v) {
        SituationProfile p;
        p.values.fill(v);
        return p;
    }

    double& operator[](Dimension d) { return values[static_cast<std::size_t>(d)]; }
    double operator[](Dimension d) const { return values[static_cast<std::size_t>(d)]; }

    bool in_bounds() const;
    bool operator==(const SituationProfile&) const = default;
};

void to_json(json& j, const SocialRelationship& r);
void from_json(const json& j, SocialRelationship& r);
void to_json(json& j, const SituationCueSet& c);
void from_json(const json& j, SituationCueSet& c);
void to_json(json& j, const SocialSituation& s);
void from_json(const json& j, SocialSituation& s);
void to_json(json& j, const SituationRecord& s);
void from_json(const json& j, SituationRecord& s);
void to_json(json& j, const SituationProfile& p);
void from_json(const json& j, SituationProfile& p);

// Strict-object helper: reject keys outside `allowed`.
void reject_unknown_fields(const json& j, std::span<const std::string_view> allowed, const char* what);

}  // namespace ssa

#endif  // SSA_TYPES_HPP
