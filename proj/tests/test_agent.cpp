#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ssa/agent.hpp"
#include "ssa/comprehension.hpp"
#include "ssa/error.hpp"

using namespace ssa;

namespace {

Meeting meeting(const std::string& id, const char* start, int minutes) {
    const auto s = parse_timestamp(start);
    return {id, id, s, s + std::chrono::minutes(minutes)};
}

Conflict conflict_of(const Meeting& a, const Meeting& b) { return detect_conflicts({a, b}).at(0); }

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an ssa::Error");
    return ErrorCode::ValidationError;
}

UserModel valuing(std::vector<std::string> values) {
    UserModel u;
    u.important_values = std::move(values);
    return u;
}

ValueImpact impact(std::initializer_list<std::pair<const char*, int>> entries) {
    ValueImpact v;
    for (auto [k, x] : entries) v.set(k, x);
    return v;
}

ContactBook book_with_pal() {
    ContactBook b;
    b.register_contact(fx::pal());
    return b;
}

}  // namespace

TEST_CASE("overlapping meetings conflict") {
    const auto a = meeting("A", "2024-05-06T10:00Z", 60);
    const auto b = meeting("B", "2024-05-06T10:30Z", 60);
    const auto cs = detect_conflicts({b, a});
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].conflict_id == "A~B");
    CHECK(cs[0].meetings == std::pair<std::string, std::string>{"A", "B"});
    CHECK(format_timestamp(cs[0].overlap_start) == "2024-05-06T10:30:00Z");
    CHECK(format_timestamp(cs[0].overlap_end) == "2024-05-06T11:00:00Z");
}

TEST_CASE("touching meetings do not conflict") {
    CHECK(detect_conflicts({meeting("A", "2024-05-06T10:00Z", 60), meeting("B", "2024-05-06T11:00Z", 60)}).empty());
    CHECK(detect_conflicts({}).empty());
    CHECK(detect_conflicts({meeting("A", "2024-05-06T10:00Z", 60)}).empty());
}

TEST_CASE("same start orders by id; nested meetings conflict") {
    const auto cs = detect_conflicts({meeting("z", "2024-05-06T10:00Z", 120), meeting("m", "2024-05-06T10:00Z", 30),
                                      meeting("inner", "2024-05-06T10:40Z", 10)});
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].conflict_id == "m~z");
    CHECK(cs[1].conflict_id == "z~inner");
}

TEST_CASE("conflicts match the brute-force oracle") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = std::uniform_int_distribution<int>(0, 50)(rng);
        std::vector<Meeting> agenda;
        for (int i = 0; i < n; ++i) {
            const auto start = parse_timestamp("2024-05-06T08:00Z") +
                               std::chrono::minutes(15 * std::uniform_int_distribution<int>(0, 40)(rng));
            agenda.push_back({"m" + std::to_string(i), "m" + std::to_string(i), start,
                              start + std::chrono::minutes(15 * std::uniform_int_distribution<int>(1, 8)(rng))});
        }
        CHECK(detect_conflicts(agenda) == oracle::conflicts(agenda));
    }
}

TEST_CASE("suggest keeps the higher priority") {
    const auto c = conflict_of(meeting("s_work", "2024-05-06T18:00Z", 60), meeting("s_dinner", "2024-05-06T18:30Z", 90));
    const auto s = suggest(c, 5.5, 2.2);
    CHECK(s.keep == "s_work");
    CHECK(s.reschedule == "s_dinner");
    CHECK(s.margin == doctest::Approx(3.3));
    CHECK_FALSE(s.low_confidence);
    CHECK(s.keep_priority == 5.5);
    CHECK(s.reschedule_priority == 2.2);

    const auto flipped = suggest(c, 2.2, 5.5);
    CHECK(flipped.keep == "s_dinner");
}

TEST_CASE("suggest ties and the low-confidence margin") {
    const auto c = conflict_of(meeting("b", "2024-05-06T10:00Z", 60), meeting("a", "2024-05-06T10:30Z", 60));
    const auto tie = suggest(c, 4.0, 4.0);
    CHECK(tie.keep == "b");
    CHECK(tie.low_confidence);
    const auto close = suggest(c, 4.0, 4.1);
    CHECK(close.keep == "a");
    CHECK(close.margin == doctest::Approx(0.1));
    CHECK(close.low_confidence);
    CHECK_FALSE(suggest(c, 4.0, 4.25).low_confidence);
    CHECK(suggest(c, 4.0, 4.3, 0.5).low_confidence);

    const auto same_start = conflict_of(meeting("b", "2024-05-06T10:00Z", 60), meeting("a", "2024-05-06T10:00Z", 30));
    CHECK(suggest(same_start, 3.0, 3.0).keep == "a");

    CHECK(code_of([&] { suggest(c, 0.5, 4.0); }) == ErrorCode::ValidationError);
    CHECK(code_of([&] { suggest(c, 4.0, 7.5); }) == ErrorCode::ValidationError);
}

TEST_CASE("suggestion survives increasing affine transforms") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pr(1.0, 7.0), scale(0.01, 0.99);
    const auto c = conflict_of(meeting("x", "2024-05-06T10:00Z", 60), meeting("y", "2024-05-06T10:30Z", 60));
    for (int i = 0; i < 200; ++i) {
        const double p1 = pr(rng), p2 = pr(rng);
        const auto base = suggest(c, p1, p2).keep;
        for (int t = 0; t < 5; ++t) {
            // keep transformed values within [1,7]
            const double a = scale(rng);
            const double b = 1.0 - a + (6.0 - 6.0 * a) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            CHECK(suggest(c, a * p1 + b, a * p2 + b).keep == base);
        }
    }
}

TEST_CASE("support need") {
    const auto dinner = fx::s_dinner();
    CHECK(assess_support_need(valuing({"health"}), dinner, 2.2, impact({{"hedonism", 1}})).primary() ==
          SupportNeed::none);

    const auto t0 = impact({{"social_recognition", 1}, {"hedonism", 1}});
    const auto social = assess_support_need(valuing({"social_recognition"}), dinner, 2.2, t0);
    CHECK(social.primary() == SupportNeed::value_affected);
    CHECK(social.affected_values == std::vector<std::string>{"social_recognition"});

    UserModel banded;
    banded.behavior_preferences.push_back({parse_condition(json::parse(R"({"activity_type": "meeting"})")), 5.0, 7.0});
    const auto mismatch = assess_support_need(banded, fx::s_work(), 2.2, {});
    CHECK(mismatch.needs == std::vector<SupportNeed>{SupportNeed::behavior_mismatch});
    REQUIRE(mismatch.band.has_value());
    CHECK(mismatch.band->first == 5.0);
    CHECK(assess_support_need(banded, fx::s_work(), 5.5, {}).primary() == SupportNeed::none);
    CHECK(assess_support_need(banded, fx::s_dinner(), 2.2, {}).primary() == SupportNeed::none);

    banded.important_values = {"health"};
    const auto both = assess_support_need(banded, fx::s_work(), 2.2, impact({{"health", -1}}));
    CHECK(both.needs == std::vector<SupportNeed>{SupportNeed::value_affected, SupportNeed::behavior_mismatch});
}

TEST_CASE("share decisions") {
    const auto book = book_with_pal();
    const auto t0 = impact({{"social_recognition", 1}, {"hedonism", 1}});
    const auto yes = decide_sharing("s_dinner", t0, valuing({"social_recognition"}), "c2", book);
    CHECK(yes.decision == ShareVerdict::share);
    CHECK(yes.driving_values == std::vector<std::string>{"social_recognition"});

    CHECK(decide_sharing("s", {}, valuing({"social_recognition"}), "c2", book).decision == ShareVerdict::withhold);

    const auto veto = decide_sharing("s", impact({{"social_recognition", 1}, {"health", -1}}),
                                     valuing({"social_recognition", "health"}), "c2", book);
    CHECK(veto.decision == ShareVerdict::withhold);
    CHECK(veto.driving_values == std::vector<std::string>{"health"});

    CHECK(decide_sharing("s", t0, valuing({"health"}), "c2", book).decision == ShareVerdict::withhold);
    CHECK(code_of([&] { decide_sharing("s", t0, valuing({}), "ghost", book); }) == ErrorCode::UnknownContact);
}

TEST_CASE("share veto holds over every impact vector for a small taxonomy") {
    const std::vector<std::string> tax = {"a", "b", "c"};
    const auto book = book_with_pal();
    for (int code = 0; code < 27; ++code) {
        ValueImpact v;
        int rest = code;
        for (const auto& name : tax) {
            v.set(name, rest % 3 - 1);
            rest /= 3;
        }
        for (int mask = 0; mask < 8; ++mask) {
            UserModel u;
            for (int i = 0; i < 3; ++i)
                if (mask & (1 << i)) u.important_values.push_back(tax[static_cast<std::size_t>(i)]);
            const auto d = decide_sharing("s", v, u, "c2", book);
            bool promoted = false, demoted = false;
            for (const auto& name : u.important_values) {
                promoted |= v[name] == 1;
                demoted |= v[name] == -1;
            }
            CHECK((d.decision == ShareVerdict::share) == (promoted && !demoted));
            if (d.decision == ShareVerdict::share) CHECK_FALSE(d.driving_values.empty());
        }
    }
}

TEST_CASE("feedback validation") {
    FeedbackRecord f{"d1", Verdict::reject, 9.0, std::nullopt, "", std::nullopt};
    CHECK(code_of([&] { validate_feedback(f); }) == ErrorCode::InvalidCorrection);
    f.corrected_priority = 0.5;
    CHECK(code_of([&] { validate_feedback(f); }) == ErrorCode::InvalidCorrection);
    f.corrected_priority = 6.0;
    CHECK_NOTHROW(validate_feedback(f));
    f.corrected_priority.reset();
    CHECK(code_of([&] { validate_feedback(f); }) == ErrorCode::ValidationError);
    f.reason = "I never skip dinner";
    CHECK_NOTHROW(validate_feedback(f));
    f.corrected_profile = SituationProfile::uniform(7.0);
    CHECK(code_of([&] { validate_feedback(f); }) == ErrorCode::InvalidCorrection);

    FeedbackRecord ok{"d1", Verdict::accept, std::nullopt, std::nullopt, "", std::nullopt};
    CHECK_NOTHROW(validate_feedback(ok));
    const json j = ok;
    CHECK(j["verdict"] == "accept");
    CHECK(j.get<FeedbackRecord>() == ok);
    json bad = j;
    bad["verdict"] = "maybe";
    CHECK_THROWS_AS((void)bad.get<FeedbackRecord>(), Error);
}

TEST_CASE("user model documents") {
    const auto tax = default_value_taxonomy();
    const auto u = parse_user_model(json::parse(R"({
        "important_values": ["health", "social_recognition"],
        "behavior_preferences": [{"when": {"activity_type": "meeting"}, "band": [5, 7]}],
        "elicitation_threshold": 0.5})"),
                                    tax);
    CHECK(u.values("health"));
    CHECK_FALSE(u.values("success"));
    CHECK(u.elicitation_threshold == 0.5);
    CHECK(parse_user_model(json(u), tax) == u);
    CHECK_THROWS_AS(parse_user_model(json::parse(R"({"important_values": ["fame"]})"), tax), Error);
    CHECK_THROWS_AS(parse_user_model(json::parse(R"({"elicitation_threshold": 0})"), tax), Error);
}
