#include "ssa/comprehension.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "ssa/error.hpp"
#include "ssa/kernels.hpp"

namespace ssa {

namespace {

constexpr std::array<std::string_view, 9> kFieldNames = {
    "activity_type", "location_type", "num_people", "duration", "role", "hierarchy",
    "contact_frequency", "relationship_quality", "years_known"};

template <std::size_t N>
bool contains_name(const std::array<std::string_view, N>& names, std::string_view s) {
    return std::find(names.begin(), names.end(), s) != names.end();
}

bool valid_category(Field f, std::string_view s) {
    switch (f) {
        case Field::activity_type: return contains_name(kActivityNames, s);
        case Field::location_type: return contains_name(kLocationNames, s);
        case Field::role: return contains_name(kRoleNames, s);
        case Field::hierarchy: return contains_name(kHierarchyNames, s);
        default: return false;
    }
}

Predicate parse_predicate(Field field, const json& v) {
    Predicate p;
    p.field = field;
    const std::string name(to_string(field));
    if (is_categorical(field)) {
        if (v.is_string()) {
            p.one_of.push_back(v.get<std::string>());
        } else if (v.is_array() && !v.empty()) {
            for (const auto& e : v) {
                if (!e.is_string()) throw Error(ErrorCode::ValidationError, name + ": expected strings", name);
                p.one_of.push_back(e.get<std::string>());
            }
        } else {
            throw Error(ErrorCode::ValidationError, name + ": expected a value or list of values", name);
        }
        for (const auto& s : p.one_of) {
            if (!valid_category(field, s))
                throw Error(ErrorCode::ValidationError, name + ": unknown value '" + s + "'", name);
        }
        return p;
    }
    if (v.is_number()) {
        p.gte = p.lte = v.get<double>();
    } else if (v.is_object()) {
        static constexpr std::array<std::string_view, 2> kAllowed = {"gte", "lte"};
        reject_unknown_fields(v, kAllowed, "threshold");
        if (v.empty()) throw Error(ErrorCode::ValidationError, name + ": empty threshold", name);
        for (const char* key : {"gte", "lte"}) {
            if (!v.contains(key)) continue;
            if (!v[key].is_number() || !std::isfinite(v[key].get<double>()))
                throw Error(ErrorCode::ValidationError, name + ": threshold must be a finite number", name);
            (std::string_view(key) == "gte" ? p.gte : p.lte) = v[key].get<double>();
        }
    } else {
        throw Error(ErrorCode::ValidationError, name + ": expected a number or {gte|lte}", name);
    }
    return p;
}

json predicate_json(const Predicate& p) {
    if (is_categorical(p.field)) {
        return p.one_of.size() == 1 ? json(p.one_of.front()) : json(p.one_of);
    }
    json t = json::object();
    if (p.gte) t["gte"] = *p.gte;
    if (p.lte) t["lte"] = *p.lte;
    return t;
}

void parse_clauses_from_object(const json& obj, std::vector<Clause>& out) {
    if (!obj.is_object()) throw Error(ErrorCode::ValidationError, "rule condition must be an object", "when");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (it.key() == "any") {
            if (!it->is_array() || it->empty())
                throw Error(ErrorCode::ValidationError, "'any' must be a non-empty array", "when");
            Clause c;
            for (const auto& alt : *it) {
                if (!alt.is_object() || alt.size() != 1)
                    throw Error(ErrorCode::ValidationError, "'any' entries must hold exactly one field", "when");
                c.any.push_back(parse_predicate(parse_field(alt.begin().key()), alt.begin().value()));
            }
            out.push_back(std::move(c));
        } else {
            out.push_back(Clause{{parse_predicate(parse_field(it.key()), it.value())}});
        }
    }
}

// The object form sorts keys, so it only round-trips when the clause order is
// already the sorted order and keys are unique.
bool object_form_round_trips(const Condition& c) {
    std::vector<std::string> keys;
    for (const auto& clause : c.all) {
        keys.push_back(clause.any.size() == 1 ? std::string(to_string(clause.any.front().field)) : "any");
    }
    std::set<std::string> unique(keys.begin(), keys.end());
    return unique.size() == keys.size() && std::is_sorted(keys.begin(), keys.end());
}

json clause_json(const Clause& clause) {
    if (clause.any.size() == 1) {
        return json{{std::string(to_string(clause.any.front().field)), predicate_json(clause.any.front())}};
    }
    json alts = json::array();
    for (const auto& p : clause.any) alts.push_back(json{{std::string(to_string(p.field)), predicate_json(p)}});
    return json{{"any", alts}};
}

}  // namespace

std::string_view to_string(Field f) { return kFieldNames[static_cast<std::size_t>(f)]; }

Field parse_field(std::string_view s) {
    for (std::size_t i = 0; i < kFieldNames.size(); ++i) {
        if (kFieldNames[i] == s) return static_cast<Field>(i);
    }
    throw Error(ErrorCode::ValidationError, "unknown situation field '" + std::string(s) + "'", std::string(s));
}

bool is_categorical(Field f) {
    return f == Field::activity_type || f == Field::location_type || f == Field::role || f == Field::hierarchy;
}

json field_value(const SocialSituation& s, Field field) {
    const SocialRelationship* focal = s.participants.empty() ? nullptr : &s.participants.front();
    switch (field) {
        case Field::activity_type: return to_string(s.cues.activity_type);
        case Field::location_type: return to_string(s.cues.location_type);
        case Field::num_people: return s.cues.num_people;
        case Field::duration: return s.cues.duration;
        case Field::role:
            return focal && focal->role ? json(to_string(*focal->role)) : json(nullptr);
        case Field::hierarchy:
            return focal && focal->hierarchy ? json(to_string(*focal->hierarchy)) : json(nullptr);
        case Field::contact_frequency:
            return focal && focal->contact_frequency ? json(*focal->contact_frequency) : json(nullptr);
        case Field::relationship_quality:
            return focal && focal->relationship_quality ? json(*focal->relationship_quality) : json(nullptr);
        case Field::years_known:
            return focal && focal->years_known ? json(*focal->years_known) : json(nullptr);
    }
    return nullptr;
}

bool Predicate::matches(const SocialSituation& situation) const {
    const json v = field_value(situation, field);
    if (v.is_null()) return false;
    if (is_categorical(field)) {
        const auto s = v.get<std::string>();
        return std::find(one_of.begin(), one_of.end(), s) != one_of.end();
    }
    const double x = v.get<double>();
    if (gte && !(x >= *gte)) return false;
    if (lte && !(x <= *lte)) return false;
    return true;
}

bool Condition::matches(const SocialSituation& situation) const {
    return std::all_of(all.begin(), all.end(), [&](const Clause& c) {
        return std::any_of(c.any.begin(), c.any.end(), [&](const Predicate& p) { return p.matches(situation); });
    });
}

std::vector<Field> Condition::matched_fields(const SocialSituation& situation) const {
    std::vector<Field> fields;
    for (const auto& clause : all) {
        for (const auto& p : clause.any) {
            if (p.matches(situation)) {
                fields.push_back(p.field);
                break;
            }
        }
    }
    return fields;
}

RuleSet default_ruleset() {
    auto is = [](Field f, std::vector<std::string> values) { return Predicate{f, std::move(values), {}, {}}; };
    auto at_least = [](Field f, double v) { return Predicate{f, {}, v, {}}; };
    auto at_most = [](Field f, double v) { return Predicate{f, {}, {}, v}; };
    using D = Dimension;
    RuleSet rs;
    rs.baseline = 2.0;
    rs.rules = {
        {"R1",
         {{Clause{{is(Field::activity_type, {"meeting"}), is(Field::location_type, {"office"})}}}},
         {{D::duty, 2.5}, {D::intellect, 1.0}}},
        {"R2",
         {{Clause{{is(Field::role, {"friend", "family"})}}, Clause{{is(Field::activity_type, {"dinner", "party"})}}}},
         {{D::positivity, 2.0}, {D::sociality, 2.5}}},
        {"R3", {{Clause{{at_least(Field::num_people, 2)}}}}, {{D::sociality, 1.0}}},
        {"R4",
         {{Clause{{is(Field::role, {"supervisor"}), is(Field::hierarchy, {"higher"})}}}},
         {{D::duty, 1.0}, {D::adversity, 0.5}}},
        {"R5", {{Clause{{at_most(Field::relationship_quality, 2)}}}}, {{D::negativity, 1.5}, {D::deception, 0.5}}},
        {"R6",
         {{Clause{{is(Field::role, {"romantic_partner"}), is(Field::activity_type, {"date"})}}}},
         {{D::mating, 3.0}}},
    };
    return rs;
}

void to_json(json& j, const Condition& c) {
    if (object_form_round_trips(c)) {
        j = json::object();
        for (const auto& clause : c.all) j.update(clause_json(clause));
    } else {
        j = json::array();
        for (const auto& clause : c.all) j.push_back(clause_json(clause));
    }
}

Condition parse_condition(const json& j) {
    Condition c;
    if (j.is_array()) {
        for (const auto& obj : j) parse_clauses_from_object(obj, c.all);
    } else {
        parse_clauses_from_object(j, c.all);
    }
    return c;
}

void to_json(json& j, const RuleSet& rs) {
    json rules = json::array();
    for (const auto& r : rs.rules) {
        json add = json::object();
        for (const auto& [d, delta] : r.deltas) add[std::string(to_string(d))] = delta;
        json when;
        to_json(when, r.when);
        rules.push_back(json{{"id", r.rule_id}, {"when", when}, {"add", add}});
    }
    j = json{{"baseline", rs.baseline}, {"rules", rules}};
}

void from_json(const json& j, RuleSet& rs) {
    static constexpr std::array<std::string_view, 2> kTop = {"baseline", "rules"};
    static constexpr std::array<std::string_view, 3> kRule = {"id", "when", "add"};
    reject_unknown_fields(j, kTop, "ruleset");
    rs = RuleSet{};
    if (j.contains("baseline")) {
        if (!j["baseline"].is_number()) throw Error(ErrorCode::ValidationError, "baseline must be a number", "baseline");
        rs.baseline = j["baseline"].get<double>();
    }
    std::set<std::string> seen;
    for (const auto& r : j.value("rules", json::array())) {
        reject_unknown_fields(r, kRule, "rule");
        Rule rule;
        if (!r.contains("id") || !r["id"].is_string())
            throw Error(ErrorCode::ValidationError, "rule id must be a string", "id");
        rule.rule_id = r["id"].get<std::string>();
        if (!seen.insert(rule.rule_id).second)
            throw Error(ErrorCode::ValidationError, "duplicate rule id '" + rule.rule_id + "'", "id");
        rule.when = parse_condition(r.value("when", json::object()));
        const json add = r.value("add", json::object());
        for (const auto& [name, delta] : add.items()) {
            if (!delta.is_number() || !std::isfinite(delta.get<double>()))
                throw Error(ErrorCode::ValidationError, "rule delta must be finite", name);
            rule.deltas.emplace_back(parse_dimension(name), delta.get<double>());
        }
        // JSON objects are unordered; keep deltas in canonical dimension order.
        std::sort(rule.deltas.begin(), rule.deltas.end());
        rs.rules.push_back(std::move(rule));
    }
}

RuleSet load_ruleset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ValidationError, "cannot open ruleset '" + path + "'", "ruleset_path");
    try {
        return json::parse(in).get<RuleSet>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ValidationError, "ruleset '" + path + "': " + e.what(), "ruleset_path");
    }
}

std::string_view to_string(ComprehensionSource s) { return s == ComprehensionSource::rules ? "rules" : "learned"; }

void to_json(json& j, const ComprehensionResult& r) {
    json unc = json::object();
    for (std::size_t d = 0; d < kNumDimensions; ++d) unc[std::string(kDimensionNames[d])] = r.uncertainty[d];
    json rule_fields = json::array();
    for (const auto& fields : r.rule_fields) {
        json f = json::array();
        for (auto field : fields) f.push_back(to_string(field));
        rule_fields.push_back(f);
    }
    json neighbors = json::array();
    for (const auto& n : r.neighbors) {
        neighbors.push_back(
            json{{"situation_id", n.situation_id}, {"distance", n.distance}, {"closest_features", n.closest_features}});
    }
    j = json{{"profile", r.profile},         {"source", to_string(r.source)},
             {"uncertainty", unc},           {"trace", r.trace},
             {"rule_fields", rule_fields},   {"neighbors", neighbors}};
}

void from_json(const json& j, ComprehensionResult& r) {
    r = ComprehensionResult{};
    r.profile = j.at("profile").get<SituationProfile>();
    const auto src = j.at("source").get<std::string>();
    if (src != "rules" && src != "learned")
        throw Error(ErrorCode::ValidationError, "unknown comprehension source '" + src + "'", "source");
    r.source = src == "rules" ? ComprehensionSource::rules : ComprehensionSource::learned;
    for (std::size_t d = 0; d < kNumDimensions; ++d)
        r.uncertainty[d] = j.at("uncertainty").at(std::string(kDimensionNames[d])).get<double>();
    r.trace = j.at("trace").get<std::vector<std::string>>();
    for (const auto& fields : j.value("rule_fields", json::array())) {
        std::vector<Field> f;
        for (const auto& name : fields) f.push_back(parse_field(name.get<std::string>()));
        r.rule_fields.push_back(std::move(f));
    }
    for (const auto& n : j.value("neighbors", json::array())) {
        r.neighbors.push_back({n.at("situation_id").get<std::string>(), n.at("distance").get<double>(),
                               n.at("closest_features").get<std::vector<std::string>>()});
    }
}

ComprehensionResult evaluate_rules(const SocialSituation& situation, const RuleSet& rules) {
    std::array<double, kNumDimensions> acc;
    acc.fill(rules.baseline);
    ComprehensionResult result;
    result.source = ComprehensionSource::rules;
    for (const auto& rule : rules.rules) {
        if (!rule.when.matches(situation)) continue;
        for (const auto& [d, delta] : rule.deltas) acc[static_cast<std::size_t>(d)] += delta;
        result.trace.push_back(rule.rule_id);
        result.rule_fields.push_back(rule.when.matched_fields(situation));
    }
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        result.profile.values[d] = std::clamp(acc[d], kProfileMin, kProfileMax);
    }
    return result;
}

void to_json(json& j, const TrainingPair& p) {
    j = json{{"id", p.situation_id}, {"manifest", p.features.manifest}, {"features", p.features.values},
             {"profile", p.profile}};
}

void from_json(const json& j, TrainingPair& p) {
    static constexpr std::array<std::string_view, 4> kAllowed = {"id", "manifest", "features", "profile"};
    reject_unknown_fields(j, kAllowed, "training pair");
    p.situation_id = j.at("id").get<std::string>();
    p.features.manifest = j.at("manifest").get<std::string>();
    p.features.values = j.at("features").get<std::vector<double>>();
    p.profile = j.at("profile").get<SituationProfile>();
}

std::vector<TrainingPair> read_training_jsonl(std::istream& in) {
    std::vector<TrainingPair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            pairs.push_back(json::parse(line).get<TrainingPair>());
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ValidationError, "training data line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return pairs;
}

void write_training_jsonl(std::ostream& out, const std::vector<TrainingPair>& pairs) {
    for (const auto& p : pairs) out << json(p).dump() << '\n';
}

KnnModel fit_knn(const std::vector<TrainingPair>& dataset, std::size_t k, std::optional<std::vector<double>> weights) {
    if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit a kNN model on an empty dataset");
    if (k < 1) throw Error(ErrorCode::ValidationError, "k must be positive", "k");
    KnnModel m;
    m.manifest_ = dataset.front().features.manifest;
    m.dim_ = dataset.front().features.values.size();
    m.requested_k_ = k;
    m.k_ = std::min(k, dataset.size());
    if (weights) {
        if (weights->size() != m.dim_)
            throw Error(ErrorCode::ValidationError, "weight count does not match feature count", "weights");
        for (double w : *weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw Error(ErrorCode::ValidationError, "feature weights must be finite and non-negative", "weights");
        }
        m.weights_ = std::move(*weights);
    } else {
        m.weights_.assign(m.dim_, 1.0);
    }
    m.rows_.reserve(dataset.size() * m.dim_);
    for (const auto& pair : dataset) {
        if (pair.features.manifest != m.manifest_ || pair.features.values.size() != m.dim_)
            throw Error(ErrorCode::ManifestMismatch, "training pair '" + pair.situation_id + "' uses another encoding");
        if (!pair.profile.in_bounds())
            throw Error(ErrorCode::RangeError, "training profile for '" + pair.situation_id + "' is outside [1,6]",
                        "profile");
        m.rows_.insert(m.rows_.end(), pair.features.values.begin(), pair.features.values.end());
        m.labels_.push_back(pair.profile);
        m.ids_.push_back(pair.situation_id);
    }
    return m;
}

ComprehensionResult predict_profile_knn(const KnnModel& model, const FeatureVector& x) {
    if (x.manifest != model.manifest() || x.values.size() != model.dim()) {
        throw Error(ErrorCode::ManifestMismatch,
                    "query encoded with '" + x.manifest + "' but model expects '" + model.manifest() + "'", "manifest");
    }
    std::vector<double> dist(model.size());
    kernels::weighted_sq_distances(model.rows(), model.dim(), x.values, model.weights(), dist);
    const auto ranked = kernels::k_smallest(dist, model.k());

    ComprehensionResult result;
    result.source = ComprehensionSource::learned;

    std::vector<std::size_t> by_insertion = ranked;
    std::sort(by_insertion.begin(), by_insertion.end());
    const auto k = static_cast<double>(by_insertion.size());
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        double sum = 0.0;
        for (auto i : by_insertion) sum += model.labels()[i].values[d];
        const double mean = sum / k;
        double ss = 0.0;
        for (auto i : by_insertion) {
            const double dev = model.labels()[i].values[d] - mean;
            ss += dev * dev;
        }
        result.profile.values[d] = mean;
        result.uncertainty[d] = by_insertion.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
    }

    const auto& names = EncodingManifest{}.feature_names();
    std::vector<double> per_feature(model.dim());
    for (auto i : ranked) {
        auto row = model.row(i);
        for (std::size_t f = 0; f < model.dim(); ++f) {
            const double diff = row[f] - x.values[f];
            per_feature[f] = model.weights()[f] * diff * diff;
        }
        NeighborEvidence ev;
        ev.situation_id = model.ids()[i];
        ev.distance = std::sqrt(dist[i]);
        for (auto f : kernels::k_smallest(per_feature, 3)) {
            ev.closest_features.push_back(f < names.size() ? names[f] : "feature" + std::to_string(f));
        }
        result.trace.push_back(ev.situation_id);
        result.neighbors.push_back(std::move(ev));
    }
    return result;
}

ComprehensionResult comprehend(const SocialSituation& situation, const RuleSet& rules, const KnnModel* model,
                               const ComprehensionPolicy& policy) {
    auto missing = detect_missing_fields(situation);
    if (!missing.empty()) {
        throw Error(ErrorCode::MissingField,
                    "situation '" + situation.situation_id + "' is incomplete: " + missing.front(), missing.front());
    }
    if (model != nullptr && model->size() >= policy.min_training_pairs) {
        return predict_profile_knn(*model, encode_features(situation, policy.manifest));
    }
    return evaluate_rules(situation, rules);
}

}  // namespace ssa
