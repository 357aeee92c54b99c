#ifndef SSA_PERCEPTION_HPP
#define SSA_PERCEPTION_HPP

#include <map>
#include <string>
#include <vector>

#include "ssa/types.hpp"

namespace ssa {

/// Registered social background: the user's contacts keyed by contact id.
class ContactBook {
public:
    /// Stores `relationship` after range checks. Re-registering an identical
    /// payload is a no-op; a different payload under an existing id throws
    /// DuplicateContactId.
    std::string register_contact(const SocialRelationship& relationship);

    // Replaces an existing contact; used when elicitation fills in fields.
    void update_contact(const SocialRelationship& relationship);

    const SocialRelationship* find(const std::string& contact_id) const;
    const SocialRelationship& at(const std::string& contact_id) const;
    bool contains(const std::string& contact_id) const { return contacts_.count(contact_id) != 0; }
    std::size_t size() const { return contacts_.size(); }

    const std::map<std::string, SocialRelationship>& contacts() const { return contacts_; }

    bool operator==(const ContactBook&) const = default;

private:
    std::map<std::string, SocialRelationship> contacts_;
};

// RangeError if an ordinal is outside 1..7 or years_known is negative.
void validate_relationship(const SocialRelationship& relationship);

// InvalidCues if duration <= 0 or num_people < 1.
void validate_cues(const SituationCueSet& cues);

SocialSituation assemble_situation(const SituationCueSet& cues, const std::vector<std::string>& participant_ids,
                                   const ContactBook& contacts, std::string situation_id = {},
                                   std::string label = {});

SocialSituation resolve(const SituationRecord& record, const ContactBook& contacts);

/// Mandatory fields that are absent, as paths like "participants[0].role".
/// A situation with several people but no resolved participant reports the
/// whole focal participant (participants[0]) as missing.
std::vector<std::string> detect_missing_fields(const SocialSituation& situation);

/// Fixed feature layout and scaling caps for one encoding version.
struct EncodingManifest {
    int version = 1;
    double years_cap = 20.0;
    double duration_cap = 240.0;  // minutes
    double people_cap = 10.0;

    std::string id() const;
    const std::vector<std::string>& feature_names() const;
    std::size_t size() const { return feature_names().size(); }

    bool operator==(const EncodingManifest&) const = default;
};

void to_json(json& j, const EncodingManifest& m);
void from_json(const json& j, EncodingManifest& m);

struct FeatureVector {
    std::string manifest;
    std::vector<double> values;

    bool operator==(const FeatureVector&) const = default;
};

enum class MissingPolicy { strict, impute_midpoint };

/// One-hot for enums, ordinals as (v-1)/6, years as min(y/cap,1), duration as
/// min(minutes/cap,1), people as min((n-1)/(cap-1),1). Only the focal
/// (first) participant is encoded. Strict mode throws MissingField on an
/// incomplete situation; imputation fills ordinals with 0.5 and spreads
/// categorical groups uniformly.
FeatureVector encode_features(const SocialSituation& situation, const EncodingManifest& manifest = {},
                              MissingPolicy policy = MissingPolicy::strict);

}  // namespace ssa

#endif  // SSA_PERCEPTION_HPP
