#ifndef SSA_TEST_FIXTURES_HPP
#define SSA_TEST_FIXTURES_HPP

#include <random>
#include <string>
#include <vector>

#include "ssa/perception.hpp"
#include "ssa/types.hpp"

namespace fx {

using namespace ssa;

inline SocialRelationship boss(std::string id = "c1") {
    return {std::move(id), Role::supervisor, Hierarchy::higher, 6, 5, 3.0};
}

inline SocialRelationship pal(std::string id = "c2") {
    return {std::move(id), Role::friend_, Hierarchy::equal, 5, 6, 10.0};
}

inline SituationCueSet work_cues(const char* start = "2024-05-06T10:00Z") {
    return {ActivityType::meeting, LocationType::office, parse_timestamp(start), 60, 2};
}

inline SituationCueSet dinner_cues(const char* start = "2024-05-06T19:00Z") {
    return {ActivityType::dinner, LocationType::restaurant, parse_timestamp(start), 90, 2};
}

inline SocialSituation s_work() { return {"s_work", work_cues(), {boss()}, "work meeting"}; }
inline SocialSituation s_dinner() { return {"s_dinner", dinner_cues(), {pal()}, "dinner with friend"}; }

template <class T>
T pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<T>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
}

inline SocialRelationship random_relationship(std::mt19937_64& rng, std::string id) {
    std::uniform_int_distribution<int> ord(1, 7);
    std::uniform_real_distribution<double> years(0.0, 40.0);
    return {std::move(id), pick<Role>(rng, kRoleNames.size()), pick<Hierarchy>(rng, kHierarchyNames.size()), ord(rng),
            ord(rng), years(rng)};
}

inline SituationCueSet random_cues(std::mt19937_64& rng) {
    SituationCueSet c;
    c.activity_type = pick<ActivityType>(rng, kActivityNames.size());
    c.location_type = pick<LocationType>(rng, kLocationNames.size());
    c.start = parse_timestamp("2024-01-01T00:00Z") +
              std::chrono::minutes(std::uniform_int_distribution<int>(0, 60 * 24 * 30)(rng));
    c.duration = std::uniform_int_distribution<int>(1, 600)(rng);
    c.num_people = std::uniform_int_distribution<int>(1, 30)(rng);
    return c;
}

inline SocialSituation random_situation(std::mt19937_64& rng, std::string id) {
    SocialSituation s;
    s.situation_id = std::move(id);
    s.cues = random_cues(rng);
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < n; ++i) s.participants.push_back(random_relationship(rng, s.situation_id + ".p" + std::to_string(i)));
    return s;
}

inline SituationProfile random_profile(std::mt19937_64& rng, double lo = 1.0, double hi = 6.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    SituationProfile p;
    for (auto& v : p.values) v = u(rng);
    return p;
}

}  // namespace fx

#endif
