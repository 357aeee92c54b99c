#include "ssa/perception.hpp"

#include <algorithm>
#include <cmath>

#include "ssa/error.hpp"

namespace ssa {

namespace {

void check_ordinal(const std::optional<int>& v, const char* field) {
    if (v && (*v < 1 || *v > 7)) {
        throw Error(ErrorCode::RangeError, std::string(field) + " must be within 1..7, got " + std::to_string(*v),
                    field);
    }
}

double scale_ordinal(int v) { return (v - 1) / 6.0; }

}  // namespace

void validate_relationship(const SocialRelationship& r) {
    require_valid_id(r.contact_id, "contact_id");
    check_ordinal(r.contact_frequency, "contact_frequency");
    check_ordinal(r.relationship_quality, "relationship_quality");
    if (r.years_known && (!std::isfinite(*r.years_known) || *r.years_known < 0.0)) {
        throw Error(ErrorCode::RangeError, "years_known must be a non-negative number", "years_known");
    }
}

void validate_cues(const SituationCueSet& cues) {
    if (cues.duration <= 0) throw Error(ErrorCode::InvalidCues, "duration must be positive", "cues.duration");
    if (cues.num_people < 1) throw Error(ErrorCode::InvalidCues, "num_people must be at least 1", "cues.num_people");
}

std::string ContactBook::register_contact(const SocialRelationship& relationship) {
    validate_relationship(relationship);
    auto it = contacts_.find(relationship.contact_id);
    if (it != contacts_.end()) {
        if (it->second == relationship) return relationship.contact_id;
        throw Error(ErrorCode::DuplicateContactId,
                    "contact '" + relationship.contact_id + "' already registered with a different payload",
                    "contact_id");
    }
    contacts_.emplace(relationship.contact_id, relationship);
    return relationship.contact_id;
}

void ContactBook::update_contact(const SocialRelationship& relationship) {
    validate_relationship(relationship);
    auto it = contacts_.find(relationship.contact_id);
    if (it == contacts_.end()) {
        throw Error(ErrorCode::UnknownContact, "unknown contact '" + relationship.contact_id + "'", "contact_id");
    }
    it->second = relationship;
}

const SocialRelationship* ContactBook::find(const std::string& contact_id) const {
    auto it = contacts_.find(contact_id);
    return it == contacts_.end() ? nullptr : &it->second;
}

const SocialRelationship& ContactBook::at(const std::string& contact_id) const {
    if (const auto* r = find(contact_id)) return *r;
    throw Error(ErrorCode::UnknownContact, "unknown contact '" + contact_id + "'", "participants");
}

SocialSituation assemble_situation(const SituationCueSet& cues, const std::vector<std::string>& participant_ids,
                                   const ContactBook& contacts, std::string situation_id, std::string label) {
    validate_cues(cues);
    SocialSituation s;
    s.situation_id = std::move(situation_id);
    s.cues = cues;
    s.label = std::move(label);
    s.participants.reserve(participant_ids.size());
    for (const auto& id : participant_ids) s.participants.push_back(contacts.at(id));
    return s;
}

SocialSituation resolve(const SituationRecord& record, const ContactBook& contacts) {
    return assemble_situation(record.cues, record.participant_ids, contacts, record.situation_id, record.label);
}

std::vector<std::string> detect_missing_fields(const SocialSituation& situation) {
    std::vector<std::string> missing;
    auto report = [&](std::size_t i, const char* field) {
        missing.push_back("participants[" + std::to_string(i) + "]." + field);
    };
    if (situation.participants.empty()) {
        if (situation.cues.num_people >= 2) {
            for (const char* f : {"role", "hierarchy", "contact_frequency", "relationship_quality", "years_known"})
                report(0, f);
        }
        return missing;
    }
    for (std::size_t i = 0; i < situation.participants.size(); ++i) {
        const auto& p = situation.participants[i];
        if (!p.role) report(i, "role");
        if (!p.hierarchy) report(i, "hierarchy");
        if (!p.contact_frequency) report(i, "contact_frequency");
        if (!p.relationship_quality) report(i, "relationship_quality");
        if (!p.years_known) report(i, "years_known");
    }
    return missing;
}

std::string EncodingManifest::id() const {
    auto fmt = [](double v) {
        json j = v;
        return j.dump();
    };
    return "ssa-features/v" + std::to_string(version) + ";years=" + fmt(years_cap) +
           ";minutes=" + fmt(duration_cap) + ";people=" + fmt(people_cap);
}

const std::vector<std::string>& EncodingManifest::feature_names() const {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (auto a : kActivityNames) n.push_back("activity." + std::string(a));
        for (auto l : kLocationNames) n.push_back("location." + std::string(l));
        n.push_back("duration");
        n.push_back("num_people");
        for (auto r : kRoleNames) n.push_back("role." + std::string(r));
        for (auto h : kHierarchyNames) n.push_back("hierarchy." + std::string(h));
        n.push_back("contact_frequency");
        n.push_back("relationship_quality");
        n.push_back("years_known");
        return n;
    }();
    return names;
}

void to_json(json& j, const EncodingManifest& m) {
    j = json{{"version", m.version},
             {"years_cap", m.years_cap},
             {"duration_cap", m.duration_cap},
             {"people_cap", m.people_cap},
             {"id", m.id()}};
}

void from_json(const json& j, EncodingManifest& m) {
    m.version = j.value("version", 1);
    m.years_cap = j.value("years_cap", 20.0);
    m.duration_cap = j.value("duration_cap", 240.0);
    m.people_cap = j.value("people_cap", 10.0);
    if (m.version != 1) throw Error(ErrorCode::ValidationError, "unsupported encoding manifest version", "version");
    if (!(m.years_cap > 0) || !(m.duration_cap > 0) || !(m.people_cap > 1)) {
        throw Error(ErrorCode::ValidationError, "encoding caps must be positive (people_cap > 1)", "manifest");
    }
}

FeatureVector encode_features(const SocialSituation& situation, const EncodingManifest& manifest,
                              MissingPolicy policy) {
    if (policy == MissingPolicy::strict) {
        auto missing = detect_missing_fields(situation);
        if (!missing.empty()) {
            throw Error(ErrorCode::MissingField,
                        "situation '" + situation.situation_id + "' is incomplete: " + missing.front(),
                        missing.front());
        }
    }
    FeatureVector fv;
    fv.manifest = manifest.id();
    auto& v = fv.values;
    v.reserve(manifest.size());

    auto one_hot = [&v](std::size_t group_size, std::optional<std::size_t> index) {
        for (std::size_t i = 0; i < group_size; ++i) {
            if (index) {
                v.push_back(i == *index ? 1.0 : 0.0);
            } else {
                v.push_back(1.0 / static_cast<double>(group_size));
            }
        }
    };
    const auto& cues = situation.cues;
    one_hot(kActivityNames.size(), static_cast<std::size_t>(cues.activity_type));
    one_hot(kLocationNames.size(), static_cast<std::size_t>(cues.location_type));
    v.push_back(std::min(cues.duration / manifest.duration_cap, 1.0));
    v.push_back(std::clamp((cues.num_people - 1) / (manifest.people_cap - 1.0), 0.0, 1.0));

    const SocialRelationship* focal = situation.participants.empty() ? nullptr : &situation.participants.front();
    auto index_of = [](const auto& opt) -> std::optional<std::size_t> {
        if (!opt) return std::nullopt;
        return static_cast<std::size_t>(*opt);
    };
    one_hot(kRoleNames.size(), focal ? index_of(focal->role) : std::nullopt);
    one_hot(kHierarchyNames.size(), focal ? index_of(focal->hierarchy) : std::nullopt);
    auto ordinal = [&](const std::optional<int>& o) { v.push_back(o ? scale_ordinal(*o) : 0.5); };
    ordinal(focal ? focal->contact_frequency : std::nullopt);
    ordinal(focal ? focal->relationship_quality : std::nullopt);
    if (focal && focal->years_known) {
        v.push_back(std::min(*focal->years_known / manifest.years_cap, 1.0));
    } else {
        v.push_back(0.5);
    }
    return fv;
}

}  // namespace ssa
