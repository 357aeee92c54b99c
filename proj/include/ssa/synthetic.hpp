#ifndef SSA_SYNTHETIC_HPP
#define SSA_SYNTHETIC_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ssa/perception.hpp"
#include "ssa/types.hpp"

namespace ssa {

/// Portable generator: mt19937_64 output mapped to doubles by hand so the
/// same seed yields the same stream with any standard library.
class SyntheticRng {
public:
    explicit SyntheticRng(std::uint64_t seed);
    double uniform();                       // [0, 1)
    std::uint64_t below(std::uint64_t n);   // [0, n)
    double normal();                        // Box-Muller

private:
    std::uint64_t next();
    std::array<std::uint64_t, 312> mt_{};
    std::size_t mti_ = 312;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline constexpr std::size_t kSyntheticFeatures = 30;

struct SyntheticSpec {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double sigma1 = 0.0;  // cue -> profile noise
    double sigma2 = 0.0;  // profile -> priority noise
    // Row d: weights over the encoded features followed by an intercept.
    std::array<std::array<double, kSyntheticFeatures + 1>, kNumDimensions> g1 = default_g1();
    std::array<double, kNumDimensions + 1> g2 = default_g2();

    static std::array<std::array<double, kSyntheticFeatures + 1>, kNumDimensions> default_g1();
    static std::array<double, kNumDimensions + 1> default_g2();
};

struct SyntheticRow {
    SocialSituation situation;
    SituationProfile profile;
    double priority = 0.0;
    bool operator==(const SyntheticRow&) const = default;
};

void to_json(json& j, const SyntheticRow& r);
void from_json(const json& j, SyntheticRow& r);

// ValidationError for negative noise.
std::vector<SyntheticRow> generate_synthetic(const SyntheticSpec& spec);

// Noise-free ground truth for one situation.
SituationProfile synthetic_profile(const SyntheticSpec& spec, const FeatureVector& features);
double synthetic_priority(const SyntheticSpec& spec, const SituationProfile& profile);

void write_dataset_jsonl(std::ostream& out, const std::vector<SyntheticRow>& rows);
std::vector<SyntheticRow> read_dataset_jsonl(std::istream& in);

struct PipelineMetrics {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t k = 0;
    std::array<double, kNumDimensions> comprehension_mae{};
    std::array<double, kNumDimensions> comprehension_baseline_mae{};
    double priority_mae_true = 0.0;       // priority model fed true profiles
    double priority_mae_predicted = 0.0;  // fed kNN-predicted profiles
    double priority_baseline_mae = 0.0;
};

void to_json(json& j, const PipelineMetrics& m);

/// Seeded shuffle, then the first `split` fraction trains a kNN comprehension
/// model and a ridge priority model. TooFewExamples if the training part is
/// smaller than `min_train` or nothing is left to test on.
PipelineMetrics evaluate_pipeline(const std::vector<SyntheticRow>& dataset, double split = 0.8, std::size_t k = 5,
                                  std::uint64_t seed = 0, std::size_t min_train = 20);

}  // namespace ssa

#endif  // SSA_SYNTHETIC_HPP
