#include "ssa/projection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "ssa/error.hpp"
#include "ssa/kernels.hpp"

namespace ssa {

namespace {

constexpr double kDutyWeight = 0.9;
constexpr double kAdversityWeight = 0.3;

double sq_distance(const SituationProfile& a, const SituationProfile& b) {
    double acc = 0.0;
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        const double diff = a.values[d] - b.values[d];
        acc += diff * diff;
    }
    return acc;
}

std::vector<double> flatten(const std::vector<SituationProfile>& profiles) {
    std::vector<double> flat;
    flat.reserve(profiles.size() * kNumDimensions);
    for (const auto& p : profiles) flat.insert(flat.end(), p.values.begin(), p.values.end());
    return flat;
}

// Solve (A) x = b for a symmetric positive definite A (row-major n x n).
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
        if (!(diag > 0.0)) throw Error(ErrorCode::ValidationError, "normal equations are not positive definite");
        const double ljj = std::sqrt(diag);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / ljj;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
        b[ii] = s / a[ii * n + ii];
    }
    return b;
}

double unclamped(const PriorityModel& m, const SituationProfile& p) {
    double acc = m.intercept;
    for (std::size_t d = 0; d < kNumDimensions; ++d) acc += m.weights[d] * p.values[d];
    return acc;
}

}  // namespace

ValueTaxonomy default_value_taxonomy() {
    return {"helpfulness", "capability", "social_recognition", "health",
            "security",    "hedonism",   "success",            "independence"};
}

int ValueImpact::operator[](const std::string& value) const {
    auto it = entries_.find(value);
    return it == entries_.end() ? 0 : it->second;
}

void ValueImpact::set(const std::string& value, int impact) {
    if (impact == 0) {
        entries_.erase(value);
    } else {
        entries_[value] = impact > 0 ? 1 : -1;
    }
}

void to_json(json& j, const ValueImpact& v) { j = v.entries(); }

void from_json(const json& j, ValueImpact& v) {
    v = ValueImpact{};
    if (!j.is_object()) throw Error(ErrorCode::ValidationError, "impact must be an object", "impact");
    for (const auto& [name, val] : j.items()) {
        if (!val.is_number_integer() || std::abs(val.get<int>()) > 1)
            throw Error(ErrorCode::ValidationError, "impact values must be -1, 0 or +1", name);
        v.set(name, val.get<int>());
    }
}

bool DimensionThreshold::matches(const SituationProfile& p) const {
    const double x = p[dimension];
    if (gte && !(x >= *gte)) return false;
    if (lte && !(x <= *lte)) return false;
    return true;
}

bool ImpactRule::matches(const SituationProfile& p) const {
    return std::all_of(when.begin(), when.end(), [&](const DimensionThreshold& t) { return t.matches(p); });
}

ImpactTable default_impact_table() {
    using D = Dimension;
    auto high = [](D d) { return DimensionThreshold{d, 4.0, std::nullopt}; };
    return {
        {{high(D::duty), high(D::intellect)}, {{"capability", 1}, {"helpfulness", 1}}},
        {{high(D::sociality)}, {{"social_recognition", 1}}},
        {{high(D::positivity)}, {{"hedonism", 1}}},
        {{high(D::adversity)}, {{"security", -1}}},
        {{high(D::negativity)}, {{"health", -1}}},
    };
}

void to_json(json& j, const ImpactRule& r) {
    json when = json::object();
    for (const auto& t : r.when) {
        json th = json::object();
        if (t.gte) th["gte"] = *t.gte;
        if (t.lte) th["lte"] = *t.lte;
        when[std::string(to_string(t.dimension))] = th;
    }
    json effect = json::object();
    for (const auto& [name, e] : r.effects) effect[name] = e;
    j = json{{"when", when}, {"effect", effect}};
}

ImpactTable parse_impact_table(const json& j, const ValueTaxonomy& taxonomy) {
    if (!j.is_array()) throw Error(ErrorCode::ValidationError, "impact table must be a JSON array", "impact_table");
    static constexpr std::array<std::string_view, 2> kRule = {"when", "effect"};
    static constexpr std::array<std::string_view, 2> kThreshold = {"gte", "lte"};
    ImpactTable table;
    for (const auto& r : j) {
        reject_unknown_fields(r, kRule, "impact rule");
        ImpactRule rule;
        const json when = r.value("when", json::object());
        for (const auto& [dim, th] : when.items()) {
            reject_unknown_fields(th, kThreshold, "impact threshold");
            DimensionThreshold t{parse_dimension(dim), std::nullopt, std::nullopt};
            for (const char* key : {"gte", "lte"}) {
                if (!th.contains(key)) continue;
                if (!th[key].is_number())
                    throw Error(ErrorCode::ValidationError, "impact threshold must be numeric", dim);
                const double v = th[key].get<double>();
                if (!(v >= kProfileMin && v <= kProfileMax))
                    throw Error(ErrorCode::RangeError, "impact threshold must lie in [1,6]", dim);
                (std::string_view(key) == "gte" ? t.gte : t.lte) = v;
            }
            rule.when.push_back(t);
        }
        const json effect = r.value("effect", json::object());
        for (const auto& [name, e] : effect.items()) {
            if (std::find(taxonomy.begin(), taxonomy.end(), name) == taxonomy.end())
                throw Error(ErrorCode::ValidationError, "value '" + name + "' is not in the value taxonomy", name);
            if (!e.is_number_integer() || std::abs(e.get<int>()) != 1)
                throw Error(ErrorCode::ValidationError, "impact effect must be +1 or -1", name);
            rule.effects.emplace_back(name, e.get<int>());
        }
        std::sort(rule.when.begin(), rule.when.end(),
                  [](const DimensionThreshold& a, const DimensionThreshold& b) { return a.dimension < b.dimension; });
        std::sort(rule.effects.begin(), rule.effects.end());
        table.push_back(std::move(rule));
    }
    return table;
}

ImpactTable load_impact_table(const std::string& path, const ValueTaxonomy& taxonomy) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ValidationError, "cannot open impact table '" + path + "'", "impact_table_path");
    try {
        return parse_impact_table(json::parse(in), taxonomy);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ValidationError, "impact table '" + path + "': " + e.what(), "impact_table_path");
    }
}

ValueImpact assess_value_impact(const SituationProfile& profile, const ImpactTable& table) {
    // bit 0: pushed up, bit 1: pushed down
    std::map<std::string, int> pushes;
    for (const auto& rule : table) {
        if (!rule.matches(profile)) continue;
        for (const auto& [name, e] : rule.effects) pushes[name] |= (e > 0 ? 1 : 2);
    }
    ValueImpact impact;
    for (const auto& [name, bits] : pushes) {
        if (bits == 1) impact.set(name, 1);
        if (bits == 2) impact.set(name, -1);
    }
    return impact;
}

std::string_view to_string(PriorityModel::Kind k) {
    switch (k) {
        case PriorityModel::Kind::default_formula: return "default_formula";
        case PriorityModel::Kind::linear: return "linear";
        case PriorityModel::Kind::knn: return "knn";
    }
    return "default_formula";
}

void to_json(json& j, const PriorityModel& m) {
    j = json{{"kind", to_string(m.kind)}};
    if (m.kind == PriorityModel::Kind::linear) {
        json w = json::object();
        for (std::size_t d = 0; d < kNumDimensions; ++d) w[std::string(kDimensionNames[d])] = m.weights[d];
        j["weights"] = w;
        j["intercept"] = m.intercept;
    } else if (m.kind == PriorityModel::Kind::knn) {
        j["k"] = m.k;
        j["profiles"] = m.profiles;
        j["priorities"] = m.priorities;
    }
}

void from_json(const json& j, PriorityModel& m) {
    m = PriorityModel{};
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "default_formula") {
        m.kind = PriorityModel::Kind::default_formula;
    } else if (kind == "linear") {
        m.kind = PriorityModel::Kind::linear;
        for (std::size_t d = 0; d < kNumDimensions; ++d)
            m.weights[d] = j.at("weights").at(std::string(kDimensionNames[d])).get<double>();
        m.intercept = j.at("intercept").get<double>();
    } else if (kind == "knn") {
        m.kind = PriorityModel::Kind::knn;
        m.k = j.at("k").get<std::size_t>();
        m.profiles = j.at("profiles").get<std::vector<SituationProfile>>();
        m.priorities = j.at("priorities").get<std::vector<double>>();
    } else {
        throw Error(ErrorCode::ValidationError, "unknown priority model kind '" + kind + "'", "kind");
    }
}

double predict_priority(const PriorityModel& model, const SituationProfile& profile) {
    double raw = 0.0;
    switch (model.kind) {
        case PriorityModel::Kind::default_formula:
            raw = 1.0 + kDutyWeight * (profile[Dimension::duty] - 1.0) +
                  kAdversityWeight * (profile[Dimension::adversity] - 1.0);
            break;
        case PriorityModel::Kind::linear:
            raw = unclamped(model, profile);
            break;
        case PriorityModel::Kind::knn: {
            if (model.profiles.empty()) return predict_priority(PriorityModel{}, profile);
            std::vector<double> dist(model.profiles.size());
            for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = sq_distance(model.profiles[i], profile);
            auto nearest = kernels::k_smallest(dist, std::max<std::size_t>(model.k, 1));
            std::sort(nearest.begin(), nearest.end());
            double sum = 0.0;
            for (auto i : nearest) sum += model.priorities[i];
            raw = sum / static_cast<double>(nearest.size());
            break;
        }
    }
    if (!std::isfinite(raw)) raw = kPriorityMin;
    return std::clamp(raw, kPriorityMin, kPriorityMax);
}

std::array<double, kNumDimensions> attribution_weights(const PriorityModel& model) {
    if (model.kind == PriorityModel::Kind::linear) return model.weights;
    std::array<double, kNumDimensions> w{};
    w[static_cast<std::size_t>(Dimension::duty)] = kDutyWeight;
    w[static_cast<std::size_t>(Dimension::adversity)] = kAdversityWeight;
    return w;
}

PriorityModel fit_priority_model(const std::vector<PriorityPair>& pairs, const PriorityFitOptions& options) {
    if (pairs.size() < options.min_pairs || pairs.empty()) return PriorityModel{};
    constexpr std::size_t n = kNumDimensions;
    const double count = static_cast<double>(pairs.size());

    std::array<double, n> mean_x{};
    double mean_y = 0.0;
    for (const auto& [p, y] : pairs) {
        for (std::size_t d = 0; d < n; ++d) mean_x[d] += p.values[d];
        mean_y += y;
    }
    for (auto& m : mean_x) m /= count;
    mean_y /= count;

    std::vector<double> gram(n * n, 0.0);
    std::vector<double> rhs(n, 0.0);
    for (const auto& [p, y] : pairs) {
        std::array<double, n> xc;
        for (std::size_t d = 0; d < n; ++d) xc[d] = p.values[d] - mean_x[d];
        const double yc = y - mean_y;
        for (std::size_t r = 0; r < n; ++r) {
            rhs[r] += xc[r] * yc;
            for (std::size_t c = 0; c < n; ++c) gram[r * n + c] += xc[r] * xc[c];
        }
    }
    for (std::size_t d = 0; d < n; ++d) gram[d * n + d] += options.ridge_lambda;
    const auto w = cholesky_solve(std::move(gram), std::move(rhs), n);

    PriorityModel m;
    m.kind = PriorityModel::Kind::linear;
    m.intercept = mean_y;
    for (std::size_t d = 0; d < n; ++d) {
        m.weights[d] = w[d];
        m.intercept -= w[d] * mean_x[d];
    }
    return m;
}

double ridge_loss(const PriorityModel& model, const std::vector<PriorityPair>& pairs, double lambda) {
    double loss = 0.0;
    for (const auto& [p, y] : pairs) {
        const double r = unclamped(model, p) - y;
        loss += r * r;
    }
    for (double w : model.weights) loss += lambda * w * w;
    return loss;
}

PriorityModel fit_priority_knn(const std::vector<PriorityPair>& pairs, std::size_t k) {
    PriorityModel m;
    if (pairs.empty()) return m;
    m.kind = PriorityModel::Kind::knn;
    m.k = std::max<std::size_t>(k, 1);
    for (const auto& [p, y] : pairs) {
        if (!(y >= kPriorityMin && y <= kPriorityMax))
            throw Error(ErrorCode::RangeError, "training priority must lie in [1,7]", "priority");
        m.profiles.push_back(p);
        m.priorities.push_back(y);
    }
    return m;
}

ClusterModel fit_clusters(const std::vector<SituationProfile>& profiles, std::size_t k, std::uint64_t /*seed*/,
                          const ClusterOptions& options) {
    if (k < 1) throw Error(ErrorCode::ValidationError, "k must be at least 1", "k");
    if (profiles.size() < k) {
        throw Error(ErrorCode::TooFewProfiles, "need at least k profiles, got " +
                                                   std::to_string(profiles.size()) + " for k=" + std::to_string(k));
    }
    constexpr std::size_t dim = kNumDimensions;
    const auto points = flatten(profiles);
    const std::size_t n = profiles.size();

    // Farthest-first: start at point 0, repeatedly add the point farthest from
    // its nearest chosen centroid (ties to the lower index).
    std::vector<SituationProfile> centroids{profiles.front()};
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = sq_distance(profiles[i], centroids[0]);
    while (centroids.size() < k) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (nearest[i] > nearest[best]) best = i;
        }
        centroids.push_back(profiles[best]);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], sq_distance(profiles[i], profiles[best]));
    }

    ClusterModel model;
    model.assignment.resize(n);
    std::vector<double> sq(n);
    auto assign_all = [&] {
        const auto flat = flatten(centroids);
        kernels::assign_nearest(points, dim, flat, model.assignment, sq);
        double wcss = 0.0;
        for (double v : sq) wcss += v;
        model.wcss_history.push_back(wcss);
    };
    assign_all();

    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        std::vector<SituationProfile> sums(k, SituationProfile::uniform(0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto c = model.assignment[i];
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d) sums[c].values[d] += profiles[i].values[d];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            SituationProfile next;
            for (std::size_t d = 0; d < dim; ++d) next.values[d] = sums[c].values[d] / static_cast<double>(counts[c]);
            shift = std::max(shift, std::sqrt(sq_distance(next, centroids[c])));
            centroids[c] = next;
        }
        model.iterations = iter + 1;
        assign_all();
        if (shift < options.tolerance) break;
    }
    model.centroids = std::move(centroids);
    return model;
}

std::size_t assign_cluster(const ClusterModel& model, const SituationProfile& profile) {
    std::size_t best = 0;
    double best_d = sq_distance(profile, model.centroids.front());
    for (std::size_t c = 1; c < model.centroids.size(); ++c) {
        const double d = sq_distance(profile, model.centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

double within_cluster_ss(const ClusterModel& model, const std::vector<SituationProfile>& profiles) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        wcss += sq_distance(profiles[i], model.centroids[model.assignment[i]]);
    }
    return wcss;
}

json cluster_report(const ClusterModel& model, const std::vector<SituationProfile>& profiles,
                    const PriorityModel& priority, const ImpactTable& table) {
    const std::size_t k = model.centroids.size();
    std::vector<std::size_t> sizes(k, 0);
    std::vector<double> priority_sum(k, 0.0);
    // per cluster: value -> counts of {-1, 0, +1}
    std::vector<std::map<std::string, std::array<std::size_t, 3>>> votes(k);
    std::set<std::string> values;
    for (const auto& rule : table) {
        for (const auto& [name, e] : rule.effects) values.insert(name);
    }
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto c = model.assignment[i];
        ++sizes[c];
        priority_sum[c] += predict_priority(priority, profiles[i]);
        const auto impact = assess_value_impact(profiles[i], table);
        for (const auto& v : values) ++votes[c][v][static_cast<std::size_t>(impact[v] + 1)];
    }
    json clusters = json::array();
    for (std::size_t c = 0; c < k; ++c) {
        json modal = json::object();
        for (const auto& v : values) {
            const auto& cnt = votes[c][v];
            // ties resolve towards 0, then +1
            int mode = 0;
            std::size_t best = cnt[1];
            if (cnt[2] > best) {
                mode = 1;
                best = cnt[2];
            }
            if (cnt[0] > best) mode = -1;
            if (mode != 0) modal[v] = mode;
        }
        clusters.push_back(json{{"index", c},
                                {"centroid", model.centroids[c]},
                                {"size", sizes[c]},
                                {"mean_priority", sizes[c] ? json(priority_sum[c] / static_cast<double>(sizes[c]))
                                                           : json(nullptr)},
                                {"modal_impacts", modal}});
    }
    return json{{"k", k}, {"iterations", model.iterations}, {"wcss", model.wcss_history.back()},
                {"clusters", clusters}};
}

}  // namespace ssa
