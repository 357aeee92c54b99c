#include "ssa/explanation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "ssa/error.hpp"

namespace ssa {

namespace {

constexpr double kScaleMidpoint = 3.5;

json layer_json(const std::vector<ExplanationLayer>& layers, std::size_t i) {
    if (i >= layers.size()) return nullptr;
    json statements = json::array();
    for (const auto& s : layers[i].statements) statements.push_back(json{{"template", s.template_id}, {"facts", s.facts}});
    return json{{"level", to_string(layers[i].level)}, {"statements", statements}, {"child", layer_json(layers, i + 1)}};
}

std::vector<Statement> value_statements(const SituationAssessment& a, const std::vector<std::string>& important) {
    std::vector<Statement> out;
    for (const auto& [value, effect] : a.impact.entries()) {
        if (std::find(important.begin(), important.end(), value) == important.end()) continue;
        out.push_back({effect > 0 ? "value.promoted" : "value.demoted",
                       json{{"situation_id", a.situation.situation_id}, {"value", value}}});
    }
    return out;
}

std::vector<Statement> evidence_statements(const SituationAssessment& a) {
    std::vector<Statement> out;
    const bool rules = a.comprehension.source == ComprehensionSource::rules;
    for (const auto& item : level1_evidence(a.comprehension, a.situation)) {
        json fields = json::array();
        for (const auto& [name, value] : item.fields) fields.push_back(json{{"field", name}, {"value", value}});
        if (rules) {
            out.push_back({"evidence.rule", json{{"situation_id", a.situation.situation_id},
                                                 {"rule_id", item.source_id},
                                                 {"fields", fields}}});
        } else {
            out.push_back({"evidence.neighbor", json{{"situation_id", a.situation.situation_id},
                                                     {"neighbor", item.source_id},
                                                     {"distance", item.distance},
                                                     {"fields", fields}}});
        }
    }
    return out;
}

ExplanationLayer suggestion_l3(const DecisionRecord& d) {
    const auto& s = *d.suggestion;
    ExplanationLayer layer{ExplanationLevel::L3_value_behavior, {}};
    layer.statements.push_back({"suggestion.priority", json{{"keep", s.keep},
                                                            {"reschedule", s.reschedule},
                                                            {"keep_priority", s.keep_priority},
                                                            {"reschedule_priority", s.reschedule_priority}}});
    if (s.low_confidence) {
        layer.statements.push_back({"suggestion.low_confidence", json{{"margin", s.margin}}});
    }
    for (const auto& a : d.assessments) {
        auto v = value_statements(a, d.important_values);
        layer.statements.insert(layer.statements.end(), v.begin(), v.end());
    }
    return layer;
}

ExplanationLayer suggestion_l2(const DecisionRecord& d) {
    const auto& kept = d.assessments.front();
    ExplanationLayer layer{ExplanationLevel::L2_characteristics, {}};
    const auto ranked = contributions(kept.comprehension.profile, kept.attribution_weights);
    for (std::size_t i = 0; i < std::min(kTopCharacteristics, ranked.size()); ++i) {
        const auto [dim, c] = ranked[i];
        layer.statements.push_back({"characteristic.contribution",
                                    json{{"situation_id", kept.situation.situation_id},
                                         {"dimension", to_string(dim)},
                                         {"value", kept.comprehension.profile[dim]},
                                         {"contribution", c}}});
    }
    return layer;
}

ExplanationLayer share_l3(const DecisionRecord& d) {
    const auto& share = *d.share;
    const auto& a = d.assessments.front();
    ExplanationLayer layer{ExplanationLevel::L3_value_behavior, {}};
    const bool shared = share.decision == ShareVerdict::share;
    layer.statements.push_back({"share.decision", json{{"situation_id", share.situation_id},
                                                       {"recipient", share.recipient},
                                                       {"decision", shared ? "share" : "withhold"}}});
    for (const auto& v : share.driving_values) {
        layer.statements.push_back({shared ? "share.value" : "share.veto",
                                    json{{"situation_id", share.situation_id}, {"value", v}}});
    }
    if (share.driving_values.empty()) {
        layer.statements.push_back({"share.no_value", json{{"situation_id", a.situation.situation_id}}});
    }
    return layer;
}

ExplanationLayer share_l2(const DecisionRecord& d) {
    const auto& share = *d.share;
    const auto& a = d.assessments.front();
    ExplanationLayer layer{ExplanationLevel::L2_characteristics, {}};
    std::vector<const ImpactEvidence*> cited;
    std::set<Dimension> seen;
    for (const auto& e : a.impact_evidence) {
        const bool driving = std::find(share.driving_values.begin(), share.driving_values.end(), e.value) !=
                             share.driving_values.end();
        if (driving && seen.insert(e.dimension).second) cited.push_back(&e);
    }
    std::stable_sort(cited.begin(), cited.end(), [](const ImpactEvidence* x, const ImpactEvidence* y) {
        const double dx = std::abs(x->level - kScaleMidpoint), dy = std::abs(y->level - kScaleMidpoint);
        if (dx != dy) return dx > dy;
        return x->dimension < y->dimension;
    });
    if (cited.size() > kTopCharacteristics) cited.resize(kTopCharacteristics);
    for (const auto* e : cited) {
        json facts{{"situation_id", a.situation.situation_id},
                   {"dimension", to_string(e->dimension)},
                   {"value", a.comprehension.profile[e->dimension]},
                   {"affects", e->value},
                   {"effect", e->effect > 0 ? "promotes" : "demotes"}};
        facts["threshold"] = e->gte ? json(*e->gte) : (e->lte ? json(*e->lte) : json(nullptr));
        layer.statements.push_back({"characteristic.impact", facts});
    }
    return layer;
}

std::string fact_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "unknown";
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!out.empty()) out += ", ";
            if (e.is_object() && e.contains("field") && e.contains("value")) {
                out += e["field"].get<std::string>() + "=" + fact_text(e["value"]);
            } else {
                out += fact_text(e);
            }
        }
        return out;
    }
    return v.dump();
}

}  // namespace

std::string_view to_string(ExplanationLevel l) {
    switch (l) {
        case ExplanationLevel::L3_value_behavior: return "L3_value_behavior";
        case ExplanationLevel::L2_characteristics: return "L2_characteristics";
        case ExplanationLevel::L1_evidence: return "L1_evidence";
    }
    return "L3_value_behavior";
}

void to_json(json& j, const Explanation& e) {
    j = layer_json(e.layers, 0);
    if (j.is_object()) j["decision_id"] = e.decision_id;
}

std::vector<Contribution> contributions(const SituationProfile& profile,
                                        const std::array<double, kNumDimensions>& weights) {
    std::vector<Contribution> out;
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
        out.emplace_back(static_cast<Dimension>(d), weights[d] * (profile.values[d] - kScaleMidpoint));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Contribution& a, const Contribution& b) { return std::abs(a.second) > std::abs(b.second); });
    return out;
}

std::vector<Contribution> contributions(const SituationProfile& profile, const PriorityModel& model) {
    return contributions(profile, attribution_weights(model));
}

std::vector<EvidenceItem> level1_evidence(const ComprehensionResult& comprehension, const SocialSituation& situation,
                                          const EncodingManifest& manifest) {
    if (comprehension.trace.empty()) {
        throw Error(ErrorCode::PreconditionViolation, "comprehension trace is empty; nothing to ground", "trace");
    }
    std::vector<EvidenceItem> out;
    if (comprehension.source == ComprehensionSource::rules) {
        for (std::size_t i = 0; i < comprehension.trace.size(); ++i) {
            EvidenceItem item;
            item.source_id = comprehension.trace[i];
            if (i < comprehension.rule_fields.size()) {
                for (auto f : comprehension.rule_fields[i]) {
                    item.fields.emplace_back(std::string(to_string(f)), field_value(situation, f));
                }
            }
            out.push_back(std::move(item));
        }
        return out;
    }
    const auto encoded = encode_features(situation, manifest, MissingPolicy::impute_midpoint);
    const auto& names = manifest.feature_names();
    for (const auto& n : comprehension.neighbors) {
        EvidenceItem item;
        item.source_id = n.situation_id;
        item.distance = n.distance;
        for (const auto& feature : n.closest_features) {
            auto it = std::find(names.begin(), names.end(), feature);
            json value = it == names.end() ? json(nullptr)
                                           : json(encoded.values[static_cast<std::size_t>(it - names.begin())]);
            item.fields.emplace_back(feature, value);
        }
        out.push_back(std::move(item));
    }
    return out;
}

Explanation explain(const DecisionRecord& decision, int depth) {
    if (depth < 1 || depth > 3) throw Error(ErrorCode::ValidationError, "depth must be 1, 2 or 3", "depth");
    Explanation e;
    e.decision_id = decision.decision_id;
    const bool is_share = decision.kind == DecisionKind::share;
    e.layers.push_back(is_share ? share_l3(decision) : suggestion_l3(decision));
    if (depth >= 2) e.layers.push_back(is_share ? share_l2(decision) : suggestion_l2(decision));
    if (depth >= 3) {
        e.layers.push_back({ExplanationLevel::L1_evidence, evidence_statements(decision.assessments.front())});
    }
    return e;
}

TemplateCatalog default_catalog() {
    return {
        {"suggestion.priority",
         "kept meeting has priority {keep_priority} vs {reschedule_priority} (attend {keep}, reschedule {reschedule})"},
        {"suggestion.low_confidence", "the priorities are close (margin {margin}), so treat this as a low-confidence suggestion"},
        {"value.promoted", "{situation_id} promotes {value}, which is important to you"},
        {"value.demoted", "{situation_id} demotes {value}, which is important to you"},
        {"share.decision", "decision for {situation_id}: {decision} location with {recipient}"},
        {"share.value", "{situation_id} promotes {value}, which is important to you"},
        {"share.veto", "{situation_id} demotes {value}, which is important to you"},
        {"share.no_value", "{situation_id} does not promote any value that is important to you"},
        {"characteristic.contribution",
         "{dimension} is {value} in {situation_id}, contributing {contribution} to its priority"},
        {"characteristic.impact", "{situation_id} has {dimension} {value} (threshold {threshold}), which {effect} {affects}"},
        {"evidence.rule", "rule {rule_id} fired on {fields}"},
        {"evidence.neighbor", "similar situation {neighbor} (distance {distance}) is closest on {fields}"},
    };
}

TemplateCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ValidationError, "cannot open template catalog '" + path + "'");
    auto catalog = default_catalog();
    try {
        const json doc = json::parse(in);
        for (const auto& [id, text] : doc.items()) catalog[id] = text.get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ValidationError, "template catalog '" + path + "': " + e.what());
    }
    return catalog;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

std::string render_statement(const Statement& s, const TemplateCatalog& catalog) {
    auto it = catalog.find(s.template_id);
    if (it == catalog.end()) return s.template_id + " " + s.facts.dump();
    const std::string& tpl = it->second;
    std::string out;
    for (std::size_t i = 0; i < tpl.size();) {
        if (tpl[i] == '{') {
            auto close = tpl.find('}', i);
            if (close != std::string::npos) {
                const auto key = tpl.substr(i + 1, close - i - 1);
                out += s.facts.contains(key) ? fact_text(s.facts[key]) : "{" + key + "}";
                i = close + 1;
                continue;
            }
        }
        out += tpl[i++];
    }
    return out;
}

std::vector<std::string> render(const Explanation& e, const TemplateCatalog& catalog) {
    std::vector<std::string> lines;
    for (const auto& layer : e.layers) {
        for (const auto& s : layer.statements) {
            lines.push_back(std::string(to_string(layer.level)) + ": " + render_statement(s, catalog));
        }
    }
    return lines;
}

}  // namespace ssa
