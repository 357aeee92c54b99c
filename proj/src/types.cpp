#include "ssa/types.hpp"

#include <algorithm>
#include <cstdio>

#include "ssa/error.hpp"

namespace ssa {

namespace {

template <class Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    throw Error(ErrorCode::ValidationError, std::string("unknown ") + what + " '" + std::string(s) + "'", what);
}

const json& require(const json& j, const char* key, const char* what) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw Error(ErrorCode::ValidationError, std::string(what) + ": missing field '" + key + "'", key);
    }
    return *it;
}

std::string require_string(const json& j, const char* key, const char* what) {
    const json& v = require(j, key, what);
    if (!v.is_string()) throw Error(ErrorCode::ValidationError, std::string(key) + " must be a string", key);
    return v.get<std::string>();
}

int require_int(const json& v, const char* key) {
    if (!v.is_number_integer()) {
        // Accept integral floats such as 6.0 coming from loosely typed clients.
        if (v.is_number_float()) {
            double d = v.get<double>();
            if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<int>(d);
        }
        throw Error(ErrorCode::ValidationError, std::string(key) + " must be an integer", key);
    }
    return v.get<int>();
}

double require_number(const json& v, const char* key) {
    if (!v.is_number()) throw Error(ErrorCode::ValidationError, std::string(key) + " must be a number", key);
    return v.get<double>();
}

bool absent(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() || it->is_null();
}

}  // namespace

std::string_view to_string(Role v) { return kRoleNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Hierarchy v) { return kHierarchyNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(ActivityType v) { return kActivityNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(LocationType v) { return kLocationNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Dimension d) { return kDimensionNames[static_cast<std::size_t>(d)]; }

Role parse_role(std::string_view s) { return parse_enum<Role>(s, kRoleNames, "role"); }
Hierarchy parse_hierarchy(std::string_view s) { return parse_enum<Hierarchy>(s, kHierarchyNames, "hierarchy"); }
ActivityType parse_activity(std::string_view s) { return parse_enum<ActivityType>(s, kActivityNames, "activity_type"); }
LocationType parse_location(std::string_view s) { return parse_enum<LocationType>(s, kLocationNames, "location_type"); }
Dimension parse_dimension(std::string_view s) { return parse_enum<Dimension>(s, kDimensionNames, "dimension"); }

bool is_valid_id(std::string_view id) {
    if (id.empty() || id.size() > 128) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

void require_valid_id(std::string_view id, const char* field) {
    if (!is_valid_id(id)) {
        throw Error(ErrorCode::ValidationError,
                    std::string(field) + " '" + std::string(id) + "' must match [A-Za-z0-9_.-]{1,128}", field);
    }
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    auto day = floor<days>(t);
    year_month_day ymd{day};
    auto secs = (t - day).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                  static_cast<long long>(secs % 60));
    return buf;
}

Timestamp parse_timestamp(std::string_view s) {
    using namespace std::chrono;
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    std::string str(s);
    char tail = 0;
    int n = std::sscanf(str.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi, &sec, &tail);
    bool ok = (n == 7 && tail == 'Z' && str.size() == 20) || (n == 6 && str.size() == 19);
    if (!ok) {
        // Minute precision is accepted too: 2026-10-14T10:00Z
        n = std::sscanf(str.c_str(), "%4d-%2u-%2uT%2u:%2u%c", &y, &mo, &d, &h, &mi, &tail);
        sec = 0;
        ok = (n == 6 && tail == 'Z' && str.size() == 17) || (n == 5 && str.size() == 16);
    }
    year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ok || !ymd.ok() || h > 23 || mi > 59 || sec > 59) {
        throw Error(ErrorCode::ValidationError, "invalid timestamp '" + str + "' (expected YYYY-MM-DDTHH:MM[:SS]Z)",
                    "start");
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

bool SituationProfile::in_bounds() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return v >= kProfileMin && v <= kProfileMax; });
}

void reject_unknown_fields(const json& j, std::span<const std::string_view> allowed, const char* what) {
    if (!j.is_object()) throw Error(ErrorCode::ValidationError, std::string(what) + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw Error(ErrorCode::ValidationError, std::string(what) + ": unknown field '" + it.key() + "'", it.key());
        }
    }
}

void to_json(json& j, const SocialRelationship& r) {
    j = json::object();
    j["contact_id"] = r.contact_id;
    j["role"] = r.role ? json(to_string(*r.role)) : json(nullptr);
    j["hierarchy"] = r.hierarchy ? json(to_string(*r.hierarchy)) : json(nullptr);
    j["contact_frequency"] = r.contact_frequency ? json(*r.contact_frequency) : json(nullptr);
    j["relationship_quality"] = r.relationship_quality ? json(*r.relationship_quality) : json(nullptr);
    j["years_known"] = r.years_known ? json(*r.years_known) : json(nullptr);
}

void from_json(const json& j, SocialRelationship& r) {
    static constexpr std::array<std::string_view, 6> kAllowed = {
        "contact_id", "role", "hierarchy", "contact_frequency", "relationship_quality", "years_known"};
    reject_unknown_fields(j, kAllowed, "contact");
    r = SocialRelationship{};
    r.contact_id = require_string(j, "contact_id", "contact");
    if (!absent(j, "role")) {
        if (!j["role"].is_string()) throw Error(ErrorCode::ValidationError, "role must be a string", "role");
        r.role = parse_role(j["role"].get<std::string>());
    }
    if (!absent(j, "hierarchy")) {
        if (!j["hierarchy"].is_string())
            throw Error(ErrorCode::ValidationError, "hierarchy must be a string", "hierarchy");
        r.hierarchy = parse_hierarchy(j["hierarchy"].get<std::string>());
    }
    if (!absent(j, "contact_frequency")) r.contact_frequency = require_int(j["contact_frequency"], "contact_frequency");
    if (!absent(j, "relationship_quality"))
        r.relationship_quality = require_int(j["relationship_quality"], "relationship_quality");
    if (!absent(j, "years_known")) r.years_known = require_number(j["years_known"], "years_known");
}

void to_json(json& j, const SituationCueSet& c) {
    j = json{{"activity_type", to_string(c.activity_type)},
             {"location_type", to_string(c.location_type)},
             {"start", format_timestamp(c.start)},
             {"duration", c.duration},
             {"num_people", c.num_people}};
}

void from_json(const json& j, SituationCueSet& c) {
    static constexpr std::array<std::string_view, 5> kAllowed = {"activity_type", "location_type", "start",
                                                                 "duration", "num_people"};
    reject_unknown_fields(j, kAllowed, "cues");
    c.activity_type = parse_activity(require_string(j, "activity_type", "cues"));
    c.location_type = parse_location(require_string(j, "location_type", "cues"));
    c.start = parse_timestamp(require_string(j, "start", "cues"));
    c.duration = require_int(require(j, "duration", "cues"), "duration");
    c.num_people = require_int(require(j, "num_people", "cues"), "num_people");
}

void to_json(json& j, const SocialSituation& s) {
    j = json{{"situation_id", s.situation_id}, {"cues", s.cues}, {"participants", s.participants}, {"label", s.label}};
}

void from_json(const json& j, SocialSituation& s) {
    static constexpr std::array<std::string_view, 4> kAllowed = {"situation_id", "cues", "participants", "label"};
    reject_unknown_fields(j, kAllowed, "situation");
    s.situation_id = require_string(j, "situation_id", "situation");
    s.cues = require(j, "cues", "situation").get<SituationCueSet>();
    s.participants.clear();
    if (!absent(j, "participants")) {
        if (!j["participants"].is_array())
            throw Error(ErrorCode::ValidationError, "participants must be an array", "participants");
        for (const auto& p : j["participants"]) s.participants.push_back(p.get<SocialRelationship>());
    }
    s.label = absent(j, "label") ? std::string{} : require_string(j, "label", "situation");
}

void to_json(json& j, const SituationRecord& s) {
    j = json{{"situation_id", s.situation_id},
             {"cues", s.cues},
             {"participants", s.participant_ids},
             {"label", s.label}};
}

void from_json(const json& j, SituationRecord& s) {
    static constexpr std::array<std::string_view, 4> kAllowed = {"situation_id", "cues", "participants", "label"};
    reject_unknown_fields(j, kAllowed, "situation");
    s.situation_id = require_string(j, "situation_id", "situation");
    s.cues = require(j, "cues", "situation").get<SituationCueSet>();
    s.participant_ids.clear();
    if (!absent(j, "participants")) {
        if (!j["participants"].is_array())
            throw Error(ErrorCode::ValidationError, "participants must be an array of contact ids", "participants");
        for (const auto& p : j["participants"]) {
            if (!p.is_string())
                throw Error(ErrorCode::ValidationError, "participants must be an array of contact ids", "participants");
            s.participant_ids.push_back(p.get<std::string>());
        }
    }
    s.label = absent(j, "label") ? std::string{} : require_string(j, "label", "situation");
}

void to_json(json& j, const SituationProfile& p) {
    j = json::object();
    for (std::size_t d = 0; d < kNumDimensions; ++d) j[std::string(kDimensionNames[d])] = p.values[d];
}

void from_json(const json& j, SituationProfile& p) {
    reject_unknown_fields(j, kDimensionNames, "profile");
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        std::string key(kDimensionNames[d]);
        p.values[d] = require_number(require(j, key.c_str(), "profile"), key.c_str());
    }
}

}  // namespace ssa
