#include <doctest.h>

#include "fixtures.hpp"
#include "ssa/comprehension.hpp"
#include "ssa/error.hpp"
#include "ssa/projection.hpp"

using namespace ssa;

namespace {

SituationProfile with(std::initializer_list<std::pair<Dimension, double>> dims, double rest = 2.0) {
    auto p = SituationProfile::uniform(rest);
    for (auto [d, v] : dims) p[d] = v;
    return p;
}

double formula(const SituationProfile& p) {
    return std::clamp(1.0 + 0.9 * (p[Dimension::duty] - 1.0) + 0.3 * (p[Dimension::adversity] - 1.0), 1.0, 7.0);
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an ssa::Error");
    return ErrorCode::ValidationError;
}

}  // namespace

TEST_CASE("value impact of the scenario profiles") {
    const auto table = default_impact_table();
    const auto dinner = evaluate_rules(fx::s_dinner(), default_ruleset()).profile;
    const auto impact = assess_value_impact(dinner, table);
    CHECK(impact.entries() == std::map<std::string, int>{{"hedonism", 1}, {"social_recognition", 1}});

    const auto work = assess_value_impact(with({{Dimension::duty, 5}, {Dimension::intellect, 5}}), table);
    CHECK(work.entries() == std::map<std::string, int>{{"capability", 1}, {"helpfulness", 1}});
    CHECK(work["health"] == 0);

    CHECK(assess_value_impact(SituationProfile::uniform(2.0), table).empty());
}

TEST_CASE("the high threshold is inclusive at 4") {
    const auto table = default_impact_table();
    CHECK(assess_value_impact(with({{Dimension::sociality, 4.0}}), table)["social_recognition"] == 1);
    CHECK(assess_value_impact(with({{Dimension::sociality, 3.999}}), table).empty());
    CHECK(assess_value_impact(with({{Dimension::adversity, 4.5}}), table)["security"] == -1);
    CHECK(assess_value_impact(with({{Dimension::negativity, 6}}), table)["health"] == -1);
    // duty alone is not enough for the conjunctive rule
    CHECK(assess_value_impact(with({{Dimension::duty, 6}}), table).empty());
}

TEST_CASE("conflicting effects neutralise") {
    const auto table = parse_impact_table(json::parse(R"([
        {"when": {"duty": {"gte": 4}}, "effect": {"success": 1, "health": -1}},
        {"when": {"positivity": {"gte": 4}}, "effect": {"health": 1}},
        {"when": {"mating": {"lte": 1.5}}, "effect": {"independence": 1}}
    ])"),
                                          default_value_taxonomy());
    const auto both = assess_value_impact(with({{Dimension::duty, 5}, {Dimension::positivity, 5}}), table);
    CHECK(both.entries() == std::map<std::string, int>{{"success", 1}});
    CHECK(assess_value_impact(with({{Dimension::mating, 1.0}}), table)["independence"] == 1);
    CHECK(assess_value_impact(with({}, 3.0), table).empty());
}

TEST_CASE("impact table validation") {
    const auto tax = default_value_taxonomy();
    CHECK(code_of([&] { parse_impact_table(json::parse(R"([{"when": {"duty": {"gte": 7}}, "effect": {"success": 1}}])"), tax); }) ==
          ErrorCode::RangeError);
    CHECK(code_of([&] { parse_impact_table(json::parse(R"([{"when": {"duty": {"gte": 4}}, "effect": {"wealth": 1}}])"), tax); }) ==
          ErrorCode::ValidationError);
    CHECK(code_of([&] { parse_impact_table(json::parse(R"([{"when": {"duty": {"gte": 4}}, "effect": {"success": 2}}])"), tax); }) ==
          ErrorCode::ValidationError);
    CHECK(code_of([&] { parse_impact_table(json::parse(R"([{"when": {"luck": {"gte": 4}}, "effect": {"success": 1}}])"), tax); }) ==
          ErrorCode::ValidationError);
    CHECK(code_of([&] { parse_impact_table(json::parse(R"({"when": {}})"), tax); }) == ErrorCode::ValidationError);

    json round;
    for (const auto& r : default_impact_table()) round.push_back(r);
    CHECK(parse_impact_table(round, tax) == default_impact_table());
}

TEST_CASE("default priority formula") {
    const PriorityModel m;
    const auto work = evaluate_rules(fx::s_work(), default_ruleset()).profile;
    const auto dinner = evaluate_rules(fx::s_dinner(), default_ruleset()).profile;
    CHECK(predict_priority(m, work) == doctest::Approx(5.5).epsilon(1e-12));
    CHECK(predict_priority(m, dinner) == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(predict_priority(m, SituationProfile::uniform(6.0)) == 7.0);
    CHECK(predict_priority(m, SituationProfile::uniform(1.0)) == 1.0);
    CHECK(attribution_weights(m) == std::array<double, kNumDimensions>{0.9, 0, 0.3, 0, 0, 0, 0, 0});
}

TEST_CASE("priority predictions stay in [1,7]") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> w(-5.0, 5.0);
    PriorityModel wild;
    wild.kind = PriorityModel::Kind::linear;
    for (auto& x : wild.weights) x = w(rng);
    wild.intercept = w(rng);
    for (int i = 0; i < 10000; ++i) {
        const auto p = fx::random_profile(rng);
        const double a = predict_priority(PriorityModel{}, p);
        const double b = predict_priority(wild, p);
        CHECK((a >= 1.0 && a <= 7.0));
        CHECK((b >= 1.0 && b <= 7.0));
    }
}

TEST_CASE("ridge fit recovers noise-free formula data") {
    std::mt19937_64 rng(31);
    std::vector<PriorityPair> pairs;
    for (int i = 0; i < 5000; ++i) {
        const auto p = fx::random_profile(rng, 1.0, 6.0);
        pairs.emplace_back(p, formula(p));
    }
    const auto m = fit_priority_model(pairs);
    CHECK(m.kind == PriorityModel::Kind::linear);
    for (int i = 0; i < 200; ++i) {
        const auto p = fx::random_profile(rng, 1.5, 5.5);
        CHECK(std::abs(predict_priority(m, p) - formula(p)) < 1e-6);
    }
}

TEST_CASE("ridge fit thresholds and degenerate targets") {
    std::mt19937_64 rng(32);
    std::vector<PriorityPair> nine;
    for (int i = 0; i < 9; ++i) nine.emplace_back(fx::random_profile(rng), 3.0);
    CHECK(fit_priority_model(nine).kind == PriorityModel::Kind::default_formula);

    std::vector<PriorityPair> constant;
    for (int i = 0; i < 40; ++i) constant.emplace_back(fx::random_profile(rng), 4.0);
    const auto m = fit_priority_model(constant);
    CHECK(m.kind == PriorityModel::Kind::linear);
    for (int i = 0; i < 50; ++i) CHECK(std::abs(predict_priority(m, fx::random_profile(rng)) - 4.0) < 1e-6);

    // Identical profiles make the design matrix singular; ridge still solves it.
    std::vector<PriorityPair> same;
    for (int i = 0; i < 12; ++i) same.emplace_back(SituationProfile::uniform(3.0), 2.0 + (i % 3));
    const auto s = fit_priority_model(same);
    CHECK(predict_priority(s, SituationProfile::uniform(3.0)) == doctest::Approx(3.0));
}

TEST_CASE("ridge solution is a local minimum and beats the best constant") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::vector<PriorityPair> pairs;
    for (int i = 0; i < 60; ++i) {
        const auto p = fx::random_profile(rng);
        pairs.emplace_back(p, std::clamp(formula(p) + noise(rng), 1.0, 7.0));
    }
    const PriorityFitOptions opts;
    const auto m = fit_priority_model(pairs, opts);
    const double loss = ridge_loss(m, pairs, opts.ridge_lambda);
    for (std::size_t c = 0; c <= kNumDimensions; ++c) {
        for (double delta : {-1e-3, 1e-3}) {
            auto moved = m;
            (c < kNumDimensions ? moved.weights[c] : moved.intercept) += delta;
            CHECK(ridge_loss(moved, pairs, opts.ridge_lambda) >= loss);
        }
    }
    double mean = 0.0;
    for (const auto& [p, y] : pairs) mean += y;
    mean /= static_cast<double>(pairs.size());
    double mse = 0.0, mse_const = 0.0;
    for (const auto& [p, y] : pairs) {
        mse += (predict_priority(m, p) - y) * (predict_priority(m, p) - y);
        mse_const += (mean - y) * (mean - y);
    }
    CHECK(mse <= mse_const);
}

TEST_CASE("nearest-neighbour priority path") {
    std::vector<PriorityPair> pairs = {{SituationProfile::uniform(2.0), 6.0}, {SituationProfile::uniform(5.0), 1.5}};
    const auto m = fit_priority_knn(pairs, 1);
    CHECK(m.kind == PriorityModel::Kind::knn);
    CHECK(predict_priority(m, SituationProfile::uniform(2.0)) == 6.0);
    CHECK(predict_priority(m, SituationProfile::uniform(4.9)) == 1.5);
    const auto m2 = fit_priority_knn(pairs, 2);
    CHECK(predict_priority(m2, SituationProfile::uniform(2.0)) == 3.75);
    CHECK(json(m2).get<PriorityModel>() == m2);
    CHECK(fit_priority_knn({}, 1).kind == PriorityModel::Kind::default_formula);
}

TEST_CASE("priority models serialise") {
    std::mt19937_64 rng(34);
    std::vector<PriorityPair> pairs;
    for (int i = 0; i < 20; ++i) pairs.emplace_back(fx::random_profile(rng), 3.0 + (i % 4));
    const auto m = fit_priority_model(pairs);
    CHECK(json(m).get<PriorityModel>() == m);
    CHECK(json(PriorityModel{}).get<PriorityModel>() == PriorityModel{});
}

TEST_CASE("k-means separates two blobs") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> jitter(0.0, 0.2);
    std::vector<SituationProfile> profiles;
    std::vector<int> label;
    for (int i = 0; i < 40; ++i) {
        const int blob = i % 2;
        auto p = SituationProfile::uniform(blob == 0 ? 1.8 : 5.2);
        for (auto& v : p.values) v = std::clamp(v + jitter(rng), 1.0, 6.0);
        profiles.push_back(p);
        label.push_back(blob);
    }
    const auto m = fit_clusters(profiles, 2, 7);
    REQUIRE(m.centroids.size() == 2);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        CHECK((m.assignment[i] == m.assignment[0]) == (label[i] == label[0]));
        CHECK(assign_cluster(m, profiles[i]) == m.assignment[i]);
    }
    const auto again = fit_clusters(profiles, 2, 7);
    CHECK(again.assignment == m.assignment);
    CHECK(again.centroids == m.centroids);
}

TEST_CASE("k-means edge cases") {
    std::mt19937_64 rng(42);
    std::vector<SituationProfile> profiles;
    for (int i = 0; i < 10; ++i) profiles.push_back(fx::random_profile(rng));
    const auto one = fit_clusters(profiles, 1);
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        double mean = 0.0;
        for (const auto& p : profiles) mean += p.values[d];
        CHECK(one.centroids[0].values[d] == doctest::Approx(mean / 10.0).epsilon(1e-12));
    }
    CHECK(code_of([&] { fit_clusters(profiles, 11); }) == ErrorCode::TooFewProfiles);
    CHECK(code_of([&] { fit_clusters(profiles, 0); }) == ErrorCode::ValidationError);
    CHECK(code_of([&] { fit_clusters({}, 1); }) == ErrorCode::TooFewProfiles);
}

TEST_CASE("k-means WCSS never increases and assignments are nearest") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<SituationProfile> profiles;
        for (int i = 0; i < 80; ++i) profiles.push_back(fx::random_profile(rng));
        const auto m = fit_clusters(profiles, 4);
        REQUIRE_FALSE(m.wcss_history.empty());
        for (std::size_t i = 1; i < m.wcss_history.size(); ++i)
            CHECK(m.wcss_history[i] <= m.wcss_history[i - 1] + 1e-9);
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            double best = 1e300;
            std::size_t arg = 0;
            for (std::size_t c = 0; c < m.centroids.size(); ++c) {
                double d = 0.0;
                for (std::size_t k = 0; k < kNumDimensions; ++k)
                    d += (profiles[i].values[k] - m.centroids[c].values[k]) *
                         (profiles[i].values[k] - m.centroids[c].values[k]);
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            CHECK(m.assignment[i] == arg);
        }
        CHECK(within_cluster_ss(m, profiles) == doctest::Approx(m.wcss_history.back()));
    }
}

TEST_CASE("cluster report") {
    std::vector<SituationProfile> profiles = {evaluate_rules(fx::s_work(), default_ruleset()).profile,
                                              evaluate_rules(fx::s_dinner(), default_ruleset()).profile,
                                              SituationProfile::uniform(2.0)};
    const auto m = fit_clusters(profiles, 2);
    const auto report = cluster_report(m, profiles, PriorityModel{}, default_impact_table());
    CHECK(report["k"] == 2);
    REQUIRE(report["clusters"].size() == 2);
    std::size_t total = 0;
    for (const auto& c : report["clusters"]) {
        total += c["size"].get<std::size_t>();
        CHECK(c.contains("centroid"));
        CHECK(c.contains("mean_priority"));
        CHECK(c.contains("modal_impacts"));
    }
    CHECK(total == 3);
}
