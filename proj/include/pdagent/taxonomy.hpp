#pragma once

#include <array>
#include <string>
#include <string_view>

namespace pdagent {

/// The closed seven-type alphabet of bridging relations.
enum class RelationType {
    PartOf,
    MemberOf,
    Instrument,
    Theme,
    CauseOf,
    In,
    Temporal,
};

/// Two-way partition of the relation types.
enum class RelationClass {
    Mereological,
    FrameRelated,
};

inline constexpr std::array<RelationType, 7> kAllRelationTypes = {
    RelationType::PartOf,   RelationType::MemberOf, RelationType::Instrument,
    RelationType::Theme,    RelationType::CauseOf,  RelationType::In,
    RelationType::Temporal,
};

/// Canonical lowercase hyphenated wire spelling, e.g. "part-of".
std::string_view relation_type_name(RelationType type);

/// Case-insensitive match after trimming; space and underscore variants
/// ("part of", "part_of") normalize to the hyphenated form. Unknown labels
/// raise ValidationError carrying the offending string.
RelationType parse_relation_type(std::string_view label);

/// part-of and member-of are mereological; the other five are frame-related.
RelationClass relation_class(RelationType type);

std::string_view relation_class_name(RelationClass cls);

}  // namespace pdagent
