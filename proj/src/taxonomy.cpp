#include "pdagent/taxonomy.hpp"

#include "pdagent/errors.hpp"
#include "pdagent/text.hpp"

namespace pdagent {

std::string_view relation_type_name(RelationType type) {
    switch (type) {
        case RelationType::PartOf: return "part-of";
        case RelationType::MemberOf: return "member-of";
        case RelationType::Instrument: return "instrument";
        case RelationType::Theme: return "theme";
        case RelationType::CauseOf: return "cause-of";
        case RelationType::In: return "in";
        case RelationType::Temporal: return "temporal";
    }
    throw ValidationError("invalid RelationType value");
}

RelationType parse_relation_type(std::string_view label) {
    std::string normalized = to_lower(collapse_whitespace(label));
    // LLM output drifts on punctuation: fold "part of" / "part_of" onto "part-of".
    for (char& c : normalized) {
        if (c == ' ' || c == '_') c = '-';
    }
    for (RelationType type : kAllRelationTypes) {
        if (normalized == relation_type_name(type)) return type;
    }
    throw ValidationError("unknown relation type: '" + std::string(label) + "'");
}

RelationClass relation_class(RelationType type) {
    switch (type) {
        case RelationType::PartOf:
        case RelationType::MemberOf:
            return RelationClass::Mereological;
        case RelationType::Instrument:
        case RelationType::Theme:
        case RelationType::CauseOf:
        case RelationType::In:
        case RelationType::Temporal:
            return RelationClass::FrameRelated;
    }
    throw ValidationError("invalid RelationType value");
}

std::string_view relation_class_name(RelationClass cls) {
    return cls == RelationClass::Mereological ? "mereological" : "frame-related";
}

}  // namespace pdagent
