#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace pdagent {

struct Subcategory {
    std::string name;
    std::vector<std::string> values;
};

struct Dimension {
    std::string name;
    std::vector<Subcategory> subcategories;
};

/// Four-dimensional persona attribute space. The default instance carries the
/// representative values only; user-supplied schemas may extend the value lists
/// but keep the four dimension names.
struct PersonaSchema {
    std::vector<Dimension> dimensions;

    /// Throws ValidationError when the structure is off: wrong dimension
    /// count/names, empty subcategory lists, empty or duplicated values.
    void validate() const;

    /// Flattened (dimension, subcategory) pairs in declaration order.
    std::vector<std::pair<std::string, std::string>> slots() const;

    nlohmann::json to_json() const;
    static PersonaSchema from_json(const nlohmann::json& doc);
};

struct SlotAssignment {
    std::string dimension;
    std::string subcategory;
    std::string value;
};

/// One concrete value per schema slot, in schema order. Serves as both the
/// hidden ground truth and the prediction target.
struct PersonaProfile {
    std::vector<SlotAssignment> assignments;

    const std::string* find(const std::string& dimension, const std::string& subcategory) const;
    bool operator==(const PersonaProfile& other) const;

    nlohmann::json to_json() const;
    static PersonaProfile from_json(const nlohmann::json& doc);
};

/// The canonical four dimensions and ten subcategories with their
/// representative values.
PersonaSchema default_schema();

/// Uniform, seed-deterministic draw of one value per subcategory.
/// Identical (schema, seed) pairs yield identical profiles on any platform.
PersonaProfile sample_persona(const PersonaSchema& schema, std::uint64_t seed);

/// Checks the profile covers exactly the schema's slots with allowed values.
void validate_profile(const PersonaProfile& profile, const PersonaSchema& schema);

/// Reorders assignments into schema slot order (validating coverage); needed
/// after deserializing, where object keys come back alphabetized.
PersonaProfile align_profile_to_schema(const PersonaProfile& profile,
                                       const PersonaSchema& schema);

/// Renders the system prompt that conditions the target model. Contains every
/// assigned value verbatim and instructs the model to embody the persona
/// without disclosing attribute labels. Pure function of the profile.
std::string render_hidden_prompt(const PersonaProfile& profile);

/// Version tag of the hidden-prompt template in use (recorded in manifests).
std::string hidden_prompt_version();

/// Self-contained persona document: schema plus assignments (.persona.json).
nlohmann::json persona_document(const PersonaSchema& schema, const PersonaProfile& profile);
std::pair<PersonaSchema, PersonaProfile> load_persona_document(const nlohmann::json& doc);

}  // namespace pdagent
