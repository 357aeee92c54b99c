#ifndef SSA_PROJECTION_HPP
#define SSA_PROJECTION_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssa/types.hpp"

namespace ssa {

using ValueTaxonomy = std::vector<std::string>;

ValueTaxonomy default_value_taxonomy();

/// Promoted (+1) and demoted (-1) personal values. Only non-zero entries are
/// stored, so an absent key reads as 0.
class ValueImpact {
public:
    int operator[](const std::string& value) const;
    void set(const std::string& value, int impact);
    const std::map<std::string, int>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    bool operator==(const ValueImpact&) const = default;

private:
    std::map<std::string, int> entries_;
};

void to_json(json& j, const ValueImpact& v);
void from_json(const json& j, ValueImpact& v);

struct DimensionThreshold {
    Dimension dimension = Dimension::duty;
    std::optional<double> gte;
    std::optional<double> lte;

    bool matches(const SituationProfile& p) const;
    bool operator==(const DimensionThreshold&) const = default;
};

struct ImpactRule {
    std::vector<DimensionThreshold> when;  // conjunction
    std::vector<std::pair<std::string, int>> effects;

    bool matches(const SituationProfile& p) const;
    bool operator==(const ImpactRule&) const = default;
};

using ImpactTable = std::vector<ImpactRule>;

// T0: the built-in value impact table.
ImpactTable default_impact_table();

void to_json(json& j, const ImpactRule& r);
// Thresholds must lie in [1,6]; effects must be +/-1 over a value in `taxonomy`.
ImpactTable parse_impact_table(const json& j, const ValueTaxonomy& taxonomy);
ImpactTable load_impact_table(const std::string& path, const ValueTaxonomy& taxonomy);

/// Merge effects of every matching rule; a value pushed both ways ends at 0.
ValueImpact assess_value_impact(const SituationProfile& profile, const ImpactTable& table);

struct PriorityModel {
    enum class Kind { default_formula, linear, knn };

    Kind kind = Kind::default_formula;
    // linear
    std::array<double, kNumDimensions> weights{};
    double intercept = 0.0;
    // knn over profile space
    std::size_t k = 1;
    std::vector<SituationProfile> profiles;
    std::vector<double> priorities;

    bool operator==(const PriorityModel&) const = default;
};

std::string_view to_string(PriorityModel::Kind k);
void to_json(json& j, const PriorityModel& m);
void from_json(const json& j, PriorityModel& m);

/// Default formula: clamp(1 + 0.9(duty-1) + 0.3(adversity-1), 1, 7).
double predict_priority(const PriorityModel& model, const SituationProfile& profile);

/// Per-dimension linear weights used to attribute a prediction. The kNN model
/// has none of its own and reports the default formula's weights.
std::array<double, kNumDimensions> attribution_weights(const PriorityModel& model);

struct PriorityFitOptions {
    std::size_t min_pairs = 10;
    double ridge_lambda = 1e-3;
};

using PriorityPair = std::pair<SituationProfile, double>;

/// Ridge least squares on the 8 dimensions with an unpenalised intercept.
/// Fewer than `min_pairs` pairs yields the default formula.
PriorityModel fit_priority_model(const std::vector<PriorityPair>& pairs, const PriorityFitOptions& options = {});

// Regularised training loss: sum of squared residuals + lambda * |w|^2 (unclamped predictions).
double ridge_loss(const PriorityModel& model, const std::vector<PriorityPair>& pairs, double lambda);

/// Nearest-neighbour priority path: mean priority of the k closest stored
/// profiles (Euclidean, ties by insertion order).
PriorityModel fit_priority_knn(const std::vector<PriorityPair>& pairs, std::size_t k);

struct ClusterModel {
    std::vector<SituationProfile> centroids;
    std::vector<std::size_t> assignment;
    std::size_t iterations = 0;
    std::vector<double> wcss_history;  // one entry per assignment step
};

struct ClusterOptions {
    double tolerance = 1e-6;
    std::size_t max_iterations = 100;
};

/// k-means with farthest-first initialisation starting at profile 0. The
/// initialisation is deterministic so `seed` only tags the run.
ClusterModel fit_clusters(const std::vector<SituationProfile>& profiles, std::size_t k, std::uint64_t seed = 0,
                          const ClusterOptions& options = {});

std::size_t assign_cluster(const ClusterModel& model, const SituationProfile& profile);

double within_cluster_ss(const ClusterModel& model, const std::vector<SituationProfile>& profiles);

json cluster_report(const ClusterModel& model, const std::vector<SituationProfile>& profiles,
                    const PriorityModel& priority, const ImpactTable& table);

}  // namespace ssa

#endif  // SSA_PROJECTION_HPP
