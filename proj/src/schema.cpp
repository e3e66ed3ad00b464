#include "pdagent/schema.hpp"

#include <random>
#include <set>
#include <sstream>

#include "pdagent/errors.hpp"
#include "pdagent/prompt_assets.hpp"
#include "pdagent/text.hpp"

namespace pdagent {

namespace {

const std::vector<std::string> kDimensionNames = {
    "Social Role", "Personality", "Background", "Interests"};

}  // namespace

void PersonaSchema::validate() const {
    if (dimensions.size() != kDimensionNames.size()) {
        throw ValidationError("invalid schema: expected 4 dimensions, got " +
                              std::to_string(dimensions.size()));
    }
    for (std::size_t i = 0; i < dimensions.size(); ++i) {
        const Dimension& dim = dimensions[i];
        if (dim.name != kDimensionNames[i]) {
            throw ValidationError("invalid schema: dimension " + std::to_string(i) +
                                  " must be named '" + kDimensionNames[i] + "', got '" +
                                  dim.name + "'");
        }
        if (dim.subcategories.empty()) {
            throw ValidationError("invalid schema: dimension '" + dim.name +
                                  "' has no subcategories");
        }
        std::set<std::string> sub_names;
        for (const Subcategory& sub : dim.subcategories) {
            if (sub.name.empty()) {
                throw ValidationError("invalid schema: unnamed subcategory in '" + dim.name + "'");
            }
            if (!sub_names.insert(sub.name).second) {
                throw ValidationError("invalid schema: duplicate subcategory '" + sub.name +
                                      "' in '" + dim.name + "'");
            }
            if (sub.values.empty()) {
                throw ValidationError("invalid schema: subcategory '" + sub.name +
                                      "' has no allowed values");
            }
            std::set<std::string> seen;
            for (const std::string& value : sub.values) {
                if (value.empty()) {
                    throw ValidationError("invalid schema: empty value in '" + sub.name + "'");
                }
                if (!seen.insert(value).second) {
                    throw ValidationError("invalid schema: duplicate value '" + value +
                                          "' in '" + sub.name + "'");
                }
            }
        }
    }
}

std::vector<std::pair<std::string, std::string>> PersonaSchema::slots() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Dimension& dim : dimensions) {
        for (const Subcategory& sub : dim.subcategories) {
            out.emplace_back(dim.name, sub.name);
        }
    }
    return out;
}

nlohmann::json PersonaSchema::to_json() const {
    nlohmann::json dims = nlohmann::json::array();
    for (const Dimension& dim : dimensions) {
        nlohmann::json subs = nlohmann::json::array();
        for (const Subcategory& sub : dim.subcategories) {
            subs.push_back({{"name", sub.name}, {"values", sub.values}});
        }
        dims.push_back({{"name", dim.name}, {"subcategories", subs}});
    }
    return {{"dimensions", dims}};
}

PersonaSchema PersonaSchema::from_json(const nlohmann::json& doc) {
    PersonaSchema schema;
    if (!doc.is_object() || !doc.contains("dimensions") || !doc["dimensions"].is_array()) {
        throw ParseError("schema document must be an object with a 'dimensions' array");
    }
    for (const auto& dim_json : doc["dimensions"]) {
        Dimension dim;
        dim.name = dim_json.value("name", "");
        for (const auto& sub_json : dim_json.value("subcategories", nlohmann::json::array())) {
            Subcategory sub;
            sub.name = sub_json.value("name", "");
            for (const auto& value : sub_json.value("values", nlohmann::json::array())) {
                sub.values.push_back(value.get<std::string>());
            }
            dim.subcategories.push_back(std::move(sub));
        }
        schema.dimensions.push_back(std::move(dim));
    }
    schema.validate();
    return schema;
}

const std::string* PersonaProfile::find(const std::string& dimension,
                                        const std::string& subcategory) const {
    for (const SlotAssignment& a : assignments) {
        if (a.dimension == dimension && a.subcategory == subcategory) return &a.value;
    }
    return nullptr;
}

bool PersonaProfile::operator==(const PersonaProfile& other) const {
    if (assignments.size() != other.assignments.size()) return false;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        const SlotAssignment& a = assignments[i];
        const SlotAssignment& b = other.assignments[i];
        if (a.dimension != b.dimension || a.subcategory != b.subcategory || a.value != b.value) {
            return false;
        }
    }
    return true;
}

nlohmann::json PersonaProfile::to_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (const SlotAssignment& a : assignments) {
        out[a.dimension][a.subcategory] = a.value;
    }
    return {{"assignments", out}};
}

PersonaProfile PersonaProfile::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("assignments") || !doc["assignments"].is_object()) {
        throw ParseError("profile document must be an object with an 'assignments' object");
    }
    PersonaProfile profile;
    for (const auto& [dim, subs] : doc["assignments"].items()) {
        for (const auto& [sub, value] : subs.items()) {
            profile.assignments.push_back({dim, sub, value.get<std::string>()});
        }
    }
    return profile;
}

PersonaSchema default_schema() {
    PersonaSchema schema;
    schema.dimensions = {
        {"Social Role",
         {{"Professional", {"Doctor", "Lawyer", "Professor", "Accountant"}},
          {"Technical Management", {"Software Engineer", "Data Scientist", "Product Manager"}},
          {"Public Service", {"Civil Servant", "Police Officer", "Teacher"}}}},
        {"Personality",
         {{"Big-Five Traits",
           {"Openness", "Conscientiousness", "Extroversion", "Agreeableness", "Neuroticism"}}}},
        {"Background",
         {{"Education", {"High School", "Bachelor's", "Master's", "Ph.D."}},
          {"Location", {"Urban", "Rural"}},
          {"Family Status", {"Single", "Married", "Living Alone"}}}},
        {"Interests",
         {{"Hobbies", {"Reading", "Traveling", "Gaming"}},
          {"Core Values", {"Creativity", "Family", "Integrity"}},
          {"Comm. Style", {"Direct", "Emotional"}}}},
    };
    return schema;
}

PersonaProfile sample_persona(const PersonaSchema& schema, std::uint64_t seed) {
    schema.validate();
    // mt19937_64 output is bit-exact across platforms; std::uniform_int_distribution
    // is not, so draw by modulo (value counts are tiny, bias is negligible).
    std::mt19937_64 rng(seed);
    PersonaProfile profile;
    for (const Dimension& dim : schema.dimensions) {
        for (const Subcategory& sub : dim.subcategories) {
            const std::size_t idx = static_cast<std::size_t>(rng() % sub.values.size());
            profile.assignments.push_back({dim.name, sub.name, sub.values[idx]});
        }
    }
    return profile;
}

void validate_profile(const PersonaProfile& profile, const PersonaSchema& schema) {
    schema.validate();
    const auto slots = schema.slots();
    if (profile.assignments.size() != slots.size()) {
        throw ValidationError("profile has " + std::to_string(profile.assignments.size()) +
                              " assignments, schema has " + std::to_string(slots.size()) +
                              " slots");
    }
    for (const Dimension& dim : schema.dimensions) {
        for (const Subcategory& sub : dim.subcategories) {
            const std::string* value = profile.find(dim.name, sub.name);
            if (value == nullptr) {
                throw ValidationError("profile missing slot " + dim.name + " / " + sub.name);
            }
            bool allowed = false;
            for (const std::string& v : sub.values) {
                if (v == *value) {
                    allowed = true;
                    break;
                }
            }
            if (!allowed) {
                throw ValidationError("profile value '" + *value + "' not allowed for " +
                                      dim.name + " / " + sub.name);
            }
        }
    }
}

std::string render_hidden_prompt(const PersonaProfile& profile) {
    if (profile.assignments.empty()) {
        throw ValidationError("cannot render hidden prompt for empty profile");
    }
    std::ostringstream description;
    for (const SlotAssignment& a : profile.assignments) {
        description << "- " << a.dimension << " / " << a.subcategory << ": " << a.value << "\n";
    }
    std::string body = description.str();
    body.pop_back();  // no trailing newline inside the block
    return render_template(prompts::kHiddenPersona, {{"persona_description", body}});
}

std::string hidden_prompt_version() {
    return std::string(prompts::kHiddenPersonaVersion);
}

nlohmann::json persona_document(const PersonaSchema& schema, const PersonaProfile& profile) {
    validate_profile(profile, schema);
    nlohmann::json doc = profile.to_json();
    doc["schema"] = schema.to_json();
    return doc;
}

PersonaProfile align_profile_to_schema(const PersonaProfile& profile,
                                       const PersonaSchema& schema) {
    PersonaProfile ordered;
    for (const auto& [dim, sub] : schema.slots()) {
        const std::string* value = profile.find(dim, sub);
        if (value == nullptr) {
            throw ValidationError("profile missing slot " + dim + " / " + sub);
        }
        ordered.assignments.push_back({dim, sub, *value});
    }
    validate_profile(ordered, schema);
    return ordered;
}

std::pair<PersonaSchema, PersonaProfile> load_persona_document(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("schema")) {
        throw ParseError("persona document must embed its schema");
    }
    PersonaSchema schema = PersonaSchema::from_json(doc["schema"]);
    PersonaProfile ordered = align_profile_to_schema(PersonaProfile::from_json(doc), schema);
    return {std::move(schema), std::move(ordered)};
}

}  // namespace pdagent
