#include "ssa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "ssa/comprehension.hpp"
#include "ssa/error.hpp"
#include "ssa/projection.hpp"

namespace ssa {

SyntheticRng::SyntheticRng(std::uint64_t seed) {
    mt_[0] = seed;
    for (std::size_t i = 1; i < mt_.size(); ++i)
        mt_[i] = 6364136223846793005ULL * (mt_[i - 1] ^ (mt_[i - 1] >> 62)) + i;
}

std::uint64_t SyntheticRng::next() {
    constexpr std::uint64_t upper = 0xFFFFFFFF80000000ULL;
    constexpr std::uint64_t lower = 0x7FFFFFFFULL;
    constexpr std::uint64_t matrix = 0xB5026F5AA96619E9ULL;
    if (mti_ >= 312) {
        for (std::size_t i = 0; i < 312; ++i) {
            std::uint64_t x = (mt_[i] & upper) | (mt_[(i + 1) % 312] & lower);
            std::uint64_t xa = x >> 1;
            if (x & 1U) xa ^= matrix;
            mt_[i] = mt_[(i + 156) % 312] ^ xa;
        }
        mti_ = 0;
    }
    std::uint64_t x = mt_[mti_++];
    x ^= (x >> 29) & 0x5555555555555555ULL;
    x ^= (x << 17) & 0x71D67FFFEDA60000ULL;
    x ^= (x << 37) & 0xFFF7EEE000000000ULL;
    x ^= x >> 43;
    return x;
}

double SyntheticRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t SyntheticRng::below(std::uint64_t n) {
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
}

double SyntheticRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Feature offsets of the v1 encoding.
constexpr std::size_t kAct = 0, kLoc = 7, kDuration = 13, kPeople = 14, kRole = 15, kHier = 24, kFreq = 27,
                      kQuality = 28, kYears = 29, kBias = 30;

constexpr std::size_t act(ActivityType a) { return kAct + static_cast<std::size_t>(a); }
constexpr std::size_t loc(LocationType l) { return kLoc + static_cast<std::size_t>(l); }
constexpr std::size_t role(Role r) { return kRole + static_cast<std::size_t>(r); }
constexpr std::size_t hier(Hierarchy h) { return kHier + static_cast<std::size_t>(h); }
constexpr std::size_t dim(Dimension d) { return static_cast<std::size_t>(d); }

}  // namespace

// Same qualitative structure as the default ruleset: work cues drive duty and
// intellect, friends and family at dinners or parties drive positivity and
// sociality, group size adds sociality, seniority adds duty and adversity,
// poor relationships add negativity and deception, partners and dates add mating.
std::array<std::array<double, kSyntheticFeatures + 1>, kNumDimensions> SyntheticSpec::default_g1() {
    std::array<std::array<double, kSyntheticFeatures + 1>, kNumDimensions> g{};
    for (auto& row : g) row[kBias] = 2.0;

    auto& duty = g[dim(Dimension::duty)];
    duty[act(ActivityType::meeting)] = 2.5;
    duty[loc(LocationType::office)] = 1.0;
    duty[role(Role::supervisor)] = 1.0;
    duty[role(Role::colleague)] = 0.5;
    duty[hier(Hierarchy::higher)] = 0.5;

    auto& intellect = g[dim(Dimension::intellect)];
    intellect[act(ActivityType::meeting)] = 1.5;
    intellect[act(ActivityType::call)] = 1.0;
    intellect[loc(LocationType::office)] = 1.0;
    intellect[role(Role::colleague)] = 0.5;
    intellect[kDuration] = 0.5;

    auto& adversity = g[dim(Dimension::adversity)];
    adversity[role(Role::supervisor)] = 1.5;
    adversity[role(Role::stranger)] = 1.0;
    adversity[hier(Hierarchy::higher)] = 1.0;
    adversity[kQuality] = -0.5;

    auto& mating = g[dim(Dimension::mating)];
    mating[role(Role::romantic_partner)] = 2.0;
    mating[act(ActivityType::date)] = 2.0;

    auto& positivity = g[dim(Dimension::positivity)];
    positivity[act(ActivityType::dinner)] = 1.0;
    positivity[act(ActivityType::party)] = 1.5;
    positivity[role(Role::friend_)] = 1.0;
    positivity[role(Role::family)] = 1.0;
    positivity[kQuality] = 0.5;

    auto& negativity = g[dim(Dimension::negativity)];
    negativity[role(Role::stranger)] = 2.0;
    negativity[role(Role::acquaintance)] = 1.0;
    negativity[act(ActivityType::errand)] = 1.0;
    negativity[hier(Hierarchy::higher)] = 0.5;
    negativity[kQuality] = -0.5;

    auto& deception = g[dim(Dimension::deception)];
    deception[role(Role::client)] = 1.5;
    deception[role(Role::stranger)] = 2.0;
    deception[act(ActivityType::party)] = 0.5;
    deception[kQuality] = -0.5;

    auto& sociality = g[dim(Dimension::sociality)];
    sociality[act(ActivityType::party)] = 2.0;
    sociality[act(ActivityType::dinner)] = 1.0;
    sociality[loc(LocationType::public_venue)] = 1.0;
    sociality[role(Role::friend_)] = 0.5;
    sociality[role(Role::family)] = 0.5;
    sociality[kPeople] = 1.0;
    (void)kYears;
    return g;
}

// The default priority formula written as a linear map.
std::array<double, kNumDimensions + 1> SyntheticSpec::default_g2() {
    std::array<double, kNumDimensions + 1> g{};
    g[dim(Dimension::duty)] = 0.9;
    g[dim(Dimension::adversity)] = 0.3;
    g[kNumDimensions] = 1.0 - 0.9 - 0.3;
    return g;
}

SituationProfile synthetic_profile(const SyntheticSpec& spec, const FeatureVector& features) {
    SituationProfile p;
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        double v = spec.g1[d][kBias];
        for (std::size_t f = 0; f < kSyntheticFeatures; ++f) v += spec.g1[d][f] * features.values[f];
        p.values[d] = v;
    }
    return p;
}

double synthetic_priority(const SyntheticSpec& spec, const SituationProfile& profile) {
    double v = spec.g2[kNumDimensions];
    for (std::size_t d = 0; d < kNumDimensions; ++d) v += spec.g2[d] * profile.values[d];
    return v;
}

std::vector<SyntheticRow> generate_synthetic(const SyntheticSpec& spec) {
    if (!(spec.sigma1 >= 0.0) || !(spec.sigma2 >= 0.0))
        throw Error(ErrorCode::ValidationError, "noise levels must be non-negative", "noise");
    SyntheticRng rng(spec.seed);
    const EncodingManifest manifest;
    const Timestamp origin = parse_timestamp("2024-01-01T08:00:00Z");

    std::vector<SyntheticRow> rows;
    rows.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        SyntheticRow row;
        auto& s = row.situation;
        s.situation_id = "syn" + std::to_string(i);
        s.cues.activity_type = static_cast<ActivityType>(rng.below(kActivityNames.size()));
        s.cues.location_type = static_cast<LocationType>(rng.below(kLocationNames.size()));
        s.cues.start = origin + std::chrono::hours(i);
        s.cues.duration = 15 + static_cast<int>(rng.below(226));
        s.cues.num_people = 2 + static_cast<int>(rng.below(7));

        SocialRelationship focal;
        focal.contact_id = s.situation_id + ".p0";
        focal.role = static_cast<Role>(rng.below(kRoleNames.size()));
        focal.hierarchy = static_cast<Hierarchy>(rng.below(kHierarchyNames.size()));
        focal.contact_frequency = 1 + static_cast<int>(rng.below(7));
        focal.relationship_quality = 1 + static_cast<int>(rng.below(7));
        focal.years_known = static_cast<double>(rng.below(41)) / 2.0;
        s.participants.push_back(focal);

        const auto truth = synthetic_profile(spec, encode_features(s, manifest));
        for (std::size_t d = 0; d < kNumDimensions; ++d) {
            const double noisy = truth.values[d] + spec.sigma1 * rng.normal();
            row.profile.values[d] = std::clamp(noisy, kProfileMin, kProfileMax);
        }
        const double p = synthetic_priority(spec, row.profile) + spec.sigma2 * rng.normal();
        row.priority = std::clamp(p, kPriorityMin, kPriorityMax);
        rows.push_back(std::move(row));
    }
    return rows;
}

void to_json(json& j, const SyntheticRow& r) {
    j = json{{"situation", r.situation}, {"profile", r.profile}, {"priority", r.priority}};
}

void from_json(const json& j, SyntheticRow& r) {
    static constexpr std::array<std::string_view, 3> allowed = {"situation", "profile", "priority"};
    reject_unknown_fields(j, allowed, "dataset row");
    try {
        r.situation = j.at("situation").get<SocialSituation>();
        r.profile = j.at("profile").get<SituationProfile>();
        r.priority = j.at("priority").get<double>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ValidationError, std::string("malformed dataset row: ") + e.what());
    }
    if (!r.profile.in_bounds() || !(r.priority >= kPriorityMin && r.priority <= kPriorityMax))
        throw Error(ErrorCode::RangeError, "dataset row " + r.situation.situation_id + " has out-of-range labels");
}

void write_dataset_jsonl(std::ostream& out, const std::vector<SyntheticRow>& rows) {
    for (const auto& r : rows) out << json(r).dump() << '\n';
}

std::vector<SyntheticRow> read_dataset_jsonl(std::istream& in) {
    std::vector<SyntheticRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorCode::ValidationError, "dataset line " + std::to_string(lineno) + " is not JSON");
        }
        rows.push_back(j.get<SyntheticRow>());
    }
    return rows;
}

void to_json(json& j, const PipelineMetrics& m) {
    json dims = json::object();
    json base = json::object();
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        dims[std::string(kDimensionNames[d])] = m.comprehension_mae[d];
        base[std::string(kDimensionNames[d])] = m.comprehension_baseline_mae[d];
    }
    j = json{{"n_train", m.n_train},
             {"n_test", m.n_test},
             {"k", m.k},
             {"comprehension_mae", dims},
             {"comprehension_baseline_mae", base},
             {"priority_mae_true_profiles", m.priority_mae_true},
             {"priority_mae_predicted_profiles", m.priority_mae_predicted},
             {"priority_baseline_mae", m.priority_baseline_mae}};
}

PipelineMetrics evaluate_pipeline(const std::vector<SyntheticRow>& dataset, double split, std::size_t k,
                                  std::uint64_t seed, std::size_t min_train) {
    if (!(split > 0.0 && split < 1.0)) throw Error(ErrorCode::ValidationError, "split must lie in (0,1)", "split");
    if (k == 0) throw Error(ErrorCode::ValidationError, "k must be at least 1", "k");

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SyntheticRng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    PipelineMetrics m;
    m.k = k;
    m.n_train = static_cast<std::size_t>(std::floor(split * static_cast<double>(dataset.size())));
    m.n_test = dataset.size() - m.n_train;
    if (m.n_train < min_train || m.n_test == 0)
        throw Error(ErrorCode::TooFewExamples, "dataset of " + std::to_string(dataset.size()) +
                                                   " rows leaves " + std::to_string(m.n_train) +
                                                   " for training; need at least " + std::to_string(min_train) +
                                                   " plus one test row");

    const EncodingManifest manifest;
    std::vector<TrainingPair> train;
    std::vector<PriorityPair> priority_train;
    std::array<double, kNumDimensions> mean{};
    double mean_priority = 0.0;
    for (std::size_t i = 0; i < m.n_train; ++i) {
        const auto& row = dataset[order[i]];
        train.push_back({row.situation.situation_id, encode_features(row.situation, manifest), row.profile});
        priority_train.emplace_back(row.profile, row.priority);
        for (std::size_t d = 0; d < kNumDimensions; ++d) mean[d] += row.profile.values[d];
        mean_priority += row.priority;
    }
    for (auto& v : mean) v /= static_cast<double>(m.n_train);
    mean_priority /= static_cast<double>(m.n_train);

    const auto knn = fit_knn(train, k);
    const auto priority = fit_priority_model(priority_train);

    for (std::size_t i = m.n_train; i < dataset.size(); ++i) {
        const auto& row = dataset[order[i]];
        const auto predicted = predict_profile_knn(knn, encode_features(row.situation, manifest)).profile;
        for (std::size_t d = 0; d < kNumDimensions; ++d) {
            m.comprehension_mae[d] += std::abs(predicted.values[d] - row.profile.values[d]);
            m.comprehension_baseline_mae[d] += std::abs(mean[d] - row.profile.values[d]);
        }
        m.priority_mae_true += std::abs(predict_priority(priority, row.profile) - row.priority);
        m.priority_mae_predicted += std::abs(predict_priority(priority, predicted) - row.priority);
        m.priority_baseline_mae += std::abs(mean_priority - row.priority);
    }
    const double n = static_cast<double>(m.n_test);
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        m.comprehension_mae[d] /= n;
        m.comprehension_baseline_mae[d] /= n;
    }
    m.priority_mae_true /= n;
    m.priority_mae_predicted /= n;
    m.priority_baseline_mae /= n;
    return m;
}

}  // namespace ssa
