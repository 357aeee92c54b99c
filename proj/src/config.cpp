#include "ssa/config.hpp"

#include <fstream>

#include "ssa/error.hpp"

namespace ssa {

namespace {

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::optional<std::string> optional_string(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(ErrorCode::ValidationError, std::string(key) + " must be a string", key);
    return it->get<std::string>();
}

std::size_t positive(const json& doc, const char* key, std::size_t fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number_integer() || doc[key].get<long long>() < 1)
        throw Error(ErrorCode::ValidationError, std::string(key) + " must be a positive integer", key);
    return doc[key].get<std::size_t>();
}

}  // namespace

json default_config_json() {
    return json{{"ruleset_path", nullptr},
                {"impact_table_path", nullptr},
                {"training_data_path", nullptr},
                {"catalog_path", nullptr},
                {"tau", 1.0},
                {"k", 5},
                {"n_train", 20},
                {"priority_learner", "linear"},
                {"priority_k", 1},
                {"priority_min_pairs", 10},
                {"ridge_lambda", 1e-3},
                {"low_confidence_margin", kLowConfidenceMargin},
                {"value_taxonomy", default_value_taxonomy()},
                {"user", {{"important_values", json::array()}, {"behavior_preferences", json::array()}}},
                {"encoding", {{"years_cap", 20.0}, {"duration_cap", 240.0}, {"people_cap", 10.0}}},
                {"auto_refit", true}};
}

Config parse_config(const json& doc, const std::filesystem::path& base_dir) {
    static constexpr std::array<std::string_view, 18> kAllowed = {
        "store_dir",    "ruleset_path",       "impact_table_path", "training_data_path",    "catalog_path",
        "tau",          "k",                  "n_train",           "priority_learner",      "priority_k",
        "priority_min_pairs", "priority_knn_min_pairs", "ridge_lambda", "low_confidence_margin", "value_taxonomy",
        "user",         "encoding",           "auto_refit"};
    reject_unknown_fields(doc, kAllowed, "config");

    Config cfg;
    auto s = std::make_shared<Settings>();
    cfg.store_dir = doc.contains("store_dir") && doc["store_dir"].is_string()
                        ? resolve_path(base_dir, doc["store_dir"].get<std::string>())
                        : base_dir;

    if (doc.contains("value_taxonomy")) s->taxonomy = doc["value_taxonomy"].get<ValueTaxonomy>();
    if (auto p = optional_string(doc, "ruleset_path")) s->rules = load_ruleset(resolve_path(base_dir, *p).string());
    if (auto p = optional_string(doc, "impact_table_path"))
        s->impact_table = load_impact_table(resolve_path(base_dir, *p).string(), s->taxonomy);
    if (auto p = optional_string(doc, "catalog_path")) cfg.catalog = load_catalog(resolve_path(base_dir, *p).string());
    if (doc.contains("encoding")) s->manifest = doc["encoding"].get<EncodingManifest>();
    if (auto p = optional_string(doc, "training_data_path")) {
        std::ifstream in(resolve_path(base_dir, *p));
        if (!in) throw Error(ErrorCode::ValidationError, "cannot open training data '" + *p + "'", "training_data_path");
        s->seed_training = read_training_jsonl(in);
        for (const auto& pair : s->seed_training) {
            if (pair.features.manifest != s->manifest.id())
                throw Error(ErrorCode::ManifestMismatch, "training data was encoded with '" +
                                                             pair.features.manifest + "'", "training_data_path");
        }
    }
    s->user = parse_user_model(doc.value("user", json::object()), s->taxonomy);
    if (doc.contains("tau")) {
        s->user.elicitation_threshold = doc["tau"].get<double>();
        if (!(s->user.elicitation_threshold > 0.0))
            throw Error(ErrorCode::ValidationError, "tau must be positive", "tau");
    }
    s->knn_k = positive(doc, "k", s->knn_k);
    s->n_train = positive(doc, "n_train", s->n_train);
    s->priority_k = positive(doc, "priority_k", s->priority_k);
    s->priority_min_pairs = positive(doc, "priority_min_pairs", s->priority_min_pairs);
    s->priority_knn_min_pairs = positive(doc, "priority_knn_min_pairs", s->priority_knn_min_pairs);
    if (auto p = optional_string(doc, "priority_learner")) {
        if (*p == "linear") {
            s->priority_learner = PriorityLearner::linear;
        } else if (*p == "knn") {
            s->priority_learner = PriorityLearner::knn;
        } else {
            throw Error(ErrorCode::ValidationError, "priority_learner must be \"linear\" or \"knn\"", "priority_learner");
        }
    }
    s->ridge_lambda = doc.value("ridge_lambda", s->ridge_lambda);
    if (!(s->ridge_lambda > 0.0)) throw Error(ErrorCode::ValidationError, "ridge_lambda must be positive", "ridge_lambda");
    s->low_confidence_margin = doc.value("low_confidence_margin", s->low_confidence_margin);
    cfg.auto_refit = doc.value("auto_refit", true);
    cfg.settings = std::move(s);
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ValidationError, "cannot open config '" + path.string() + "'", "config");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ValidationError, "config '" + path.string() + "': " + e.what(), "config");
    }
    return parse_config(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace ssa
