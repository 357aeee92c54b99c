#ifndef SSA_COMPREHENSION_HPP
#define SSA_COMPREHENSION_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssa/perception.hpp"
#include "ssa/types.hpp"

namespace ssa {

// Situation fields a rule predicate may test. Participant fields refer to
// the focal (first) participant.
enum class Field {
    activity_type,
    location_type,
    num_people,
    duration,
    role,
    hierarchy,
    contact_frequency,
    relationship_quality,
    years_known,
};

std::string_view to_string(Field f);
Field parse_field(std::string_view s);
bool is_categorical(Field f);

/// Current value of `field` in `situation`, or null if unknown.
json field_value(const SocialSituation& situation, Field field);

/// Equality/membership on enum fields, or an inclusive threshold on numeric ones.
struct Predicate {
    Field field = Field::activity_type;
    std::vector<std::string> one_of;
    std::optional<double> gte;
    std::optional<double> lte;

    bool matches(const SocialSituation& situation) const;
    bool operator==(const Predicate&) const = default;
};

// Disjunction; a single-element clause is a plain predicate.
struct Clause {
    std::vector<Predicate> any;
    bool operator==(const Clause&) const = default;
};

/// Conjunction of clauses over situation fields plus additive deltas.
struct Condition {
    std::vector<Clause> all;

    bool matches(const SocialSituation& situation) const;
    // For each clause, the field of its first satisfied alternative. Only
    // meaningful when matches() is true.
    std::vector<Field> matched_fields(const SocialSituation& situation) const;
    bool operator==(const Condition&) const = default;
};

struct Rule {
    std::string rule_id;
    Condition when;
    std::vector<std::pair<Dimension, double>> deltas;
    bool operator==(const Rule&) const = default;
};

struct RuleSet {
    double baseline = 2.0;
    std::vector<Rule> rules;
    bool operator==(const RuleSet&) const = default;
};

// R0: the built-in ruleset used when no ruleset file is configured.
RuleSet default_ruleset();

void to_json(json& j, const Condition& c);
Condition parse_condition(const json& j);
void to_json(json& j, const RuleSet& rs);
void from_json(const json& j, RuleSet& rs);
RuleSet load_ruleset(const std::string& path);

enum class ComprehensionSource { rules, learned };
std::string_view to_string(ComprehensionSource s);

struct NeighborEvidence {
    std::string situation_id;
    double distance = 0.0;
    // Three features with the smallest weighted per-feature distance to the query.
    std::vector<std::string> closest_features;
    bool operator==(const NeighborEvidence&) const = default;
};

struct ComprehensionResult {
    SituationProfile profile;
    ComprehensionSource source = ComprehensionSource::rules;
    std::array<double, kNumDimensions> uncertainty{};
    std::vector<std::string> trace;
    // rules: one entry per fired rule (parallel to trace).
    std::vector<std::vector<Field>> rule_fields;
    // learned: one entry per neighbor (parallel to trace).
    std::vector<NeighborEvidence> neighbors;

    bool operator==(const ComprehensionResult&) const = default;
};

void to_json(json& j, const ComprehensionResult& r);
void from_json(const json& j, ComprehensionResult& r);

/// clamp(baseline + sum of fired deltas, 1, 6) per dimension.
ComprehensionResult evaluate_rules(const SocialSituation& situation, const RuleSet& rules);

struct TrainingPair {
    std::string situation_id;
    FeatureVector features;
    SituationProfile profile;
    bool operator==(const TrainingPair&) const = default;
};

void to_json(json& j, const TrainingPair& p);
void from_json(const json& j, TrainingPair& p);
std::vector<TrainingPair> read_training_jsonl(std::istream& in);
void write_training_jsonl(std::ostream& out, const std::vector<TrainingPair>& pairs);

/// Lazy k-nearest-neighbour learner. Immutable once fitted.
class KnnModel {
public:
    const std::string& manifest() const { return manifest_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    std::size_t k() const { return k_; }
    std::size_t requested_k() const { return requested_k_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& rows() const { return rows_; }
    const std::vector<SituationProfile>& labels() const { return labels_; }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const double> row(std::size_t i) const { return {rows_.data() + i * dim_, dim_}; }

    bool operator==(const KnnModel&) const = default;

private:
    friend KnnModel fit_knn(const std::vector<TrainingPair>&, std::size_t, std::optional<std::vector<double>>);

    std::string manifest_;
    std::size_t dim_ = 0;
    std::size_t k_ = 1;
    std::size_t requested_k_ = 1;
    std::vector<double> weights_;
    std::vector<double> rows_;
    std::vector<SituationProfile> labels_;
    std::vector<std::string> ids_;
};

/// Stores the dataset verbatim; effective k = min(k, |dataset|). Default
/// feature weights are all 1.0.
KnnModel fit_knn(const std::vector<TrainingPair>& dataset, std::size_t k,
                 std::optional<std::vector<double>> weights = std::nullopt);

/// Weighted Euclidean distance, k nearest with ties broken by insertion order,
/// mean and sample standard deviation of neighbour labels summed in insertion order.
ComprehensionResult predict_profile_knn(const KnnModel& model, const FeatureVector& x);

struct ComprehensionPolicy {
    std::size_t min_training_pairs = 20;
    EncodingManifest manifest;
};

/// Learned path iff a model with at least `min_training_pairs` pairs exists,
/// else the rule engine. Throws MissingField for incomplete situations.
ComprehensionResult comprehend(const SocialSituation& situation, const RuleSet& rules, const KnnModel* model,
                               const ComprehensionPolicy& policy = {});

}  // namespace ssa

#endif  // SSA_COMPREHENSION_HPP
