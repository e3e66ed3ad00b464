#include "pdagent/extraction.hpp"

#include <sstream>

#include "pdagent/errors.hpp"
#include "pdagent/prompt_assets.hpp"
#include "pdagent/text.hpp"

namespace pdagent {

nlohmann::json BridgingRelation::to_json() const {
    return {
        {"anchor", anchor},
        {"anaphor", anaphor},
        {"relation_type", std::string(relation_type_name(relation_type))},
        {"explanation", explanation},
        {"sentence_context", sentence_context},
    };
}

BridgingRelation BridgingRelation::from_json(const nlohmann::json& doc) {
    BridgingRelation relation;
    relation.anchor = doc.at("anchor").get<std::string>();
    relation.anaphor = doc.at("anaphor").get<std::string>();
    relation.relation_type = parse_relation_type(doc.at("relation_type").get<std::string>());
    relation.explanation = doc.at("explanation").get<std::string>();
    relation.sentence_context = doc.at("sentence_context").get<std::string>();
    return relation;
}

nlohmann::json ExtractionReport::to_json() const {
    nlohmann::json rejected_json = nlohmann::json::array();
    for (const RejectedRecord& record : rejected) {
        rejected_json.push_back({{"raw", record.raw}, {"reason", record.reason}});
    }
    return {
        {"accepted", relations_to_json(accepted)},
        {"rejected", rejected_json},
        {"raw_response", raw_response},
    };
}

std::vector<FewShotExample> default_few_shots() {
    return {
        {"Q: What did you do this weekend?\n"
         "A: Mostly fixing up my old car. The engine needed new gaskets.",
         {"car", "engine", RelationType::PartOf,
          "An engine is a physical component of a car.",
          "fixing up my old car ... The engine needed new gaskets"}},
        {"Q: How did the mural turn out?\n"
         "A: I finished the painting late last night. My brushes are completely worn out.",
         {"painting", "brushes", RelationType::Instrument,
          "Brushes are the tool used to produce a painting.",
          "finished the painting ... My brushes are completely worn out"}},
        {"Q: How do your days usually start?\n"
         "A: Breakfast is always rushed. Mornings get away from me.",
         {"breakfast", "mornings", RelationType::Temporal,
          "Breakfast happens within the morning.",
          "Breakfast is always rushed. Mornings get away from me"}},
    };
}

std::string canonicalize_concept(std::string_view phrase) {
    std::string canonical = to_lower(collapse_whitespace(phrase));
    bool stripped = true;
    while (stripped) {
        stripped = false;
        for (const std::string_view article : {"the ", "a ", "an "}) {
            if (canonical.size() > article.size() &&
                canonical.compare(0, article.size(), article) == 0) {
                canonical.erase(0, article.size());
                stripped = true;
            }
        }
        // A bare article is an empty concept.
        if (canonical == "the" || canonical == "a" || canonical == "an") {
            canonical.clear();
        }
    }
    if (canonical.empty()) {
        throw ValidationError("concept is empty after canonicalization: '" +
                              std::string(phrase) + "'");
    }
    return canonical;
}

std::string build_extraction_prompt(const DialogueTranscript& transcript,
                                    const std::vector<FewShotExample>& few_shots) {
    if (transcript.turns.empty()) {
        throw ValidationError("cannot build extraction prompt for empty transcript");
    }
    std::ostringstream shots;
    for (std::size_t i = 0; i < few_shots.size(); ++i) {
        const FewShotExample& shot = few_shots[i];
        shots << "Dialogue:\n" << shot.snippet << "\n";
        nlohmann::json payload = {
            {"bridging_relations", nlohmann::json::array({shot.relation.to_json()})}};
        shots << "Output:\n" << payload.dump() << "\n";
        if (i + 1 < few_shots.size()) shots << "\n";
    }
    return render_template(prompts::kBridgingExtraction,
                           {{"few_shots", shots.str()},
                            {"dialogue", trim(transcript.render_history())}});
}

namespace {

/// Returns the body of the first fenced block when the reply is fenced,
/// otherwise the input unchanged.
std::string strip_code_fences(const std::string& raw) {
    const std::string trimmed = trim(raw);
    if (trimmed.rfind("```", 0) != 0) {
        return trimmed;
    }
    std::size_t body_start = trimmed.find('\n');
    if (body_start == std::string::npos) {
        return trimmed;
    }
    ++body_start;
    const std::size_t fence_end = trimmed.rfind("```");
    if (fence_end <= body_start) {
        return trimmed;
    }
    return trim(trimmed.substr(body_start, fence_end - body_start));
}

std::size_t word_count(const std::string& phrase) {
    return word_tokens(phrase).size();
}

/// Validates one raw record; returns the relation or fills `reason`.
std::optional<BridgingRelation> validate_record(const nlohmann::json& record,
                                                std::string& reason) {
    if (!record.is_object()) {
        reason = "record is not an object";
        return std::nullopt;
    }
    for (const char* field : {"anchor", "anaphor", "relation_type", "explanation",
                              "sentence_context"}) {
        if (!record.contains(field)) {
            reason = std::string("missing field: ") + field;
            return std::nullopt;
        }
        if (!record[field].is_string()) {
            reason = std::string("field is not a string: ") + field;
            return std::nullopt;
        }
    }

    BridgingRelation relation;
    try {
        relation.relation_type =
            parse_relation_type(record["relation_type"].get<std::string>());
    } catch (const ValidationError& ex) {
        reason = ex.what();
        return std::nullopt;
    }
    try {
        relation.anchor = canonicalize_concept(record["anchor"].get<std::string>());
        relation.anaphor = canonicalize_concept(record["anaphor"].get<std::string>());
    } catch (const ValidationError& ex) {
        reason = ex.what();
        return std::nullopt;
    }
    for (const auto& [name, value] :
         {std::pair<const char*, const std::string&>{"anchor", relation.anchor},
          std::pair<const char*, const std::string&>{"anaphor", relation.anaphor}}) {
        const std::size_t words = word_count(value);
        if (words < 1 || words > 3) {
            reason = std::string("span too long: ") + name + " '" + value + "' has " +
                     std::to_string(words) + " words (allowed 1-3)";
            return std::nullopt;
        }
    }
    if (relation.anchor == relation.anaphor) {
        reason = "pure coreference: anchor equals anaphor '" + relation.anchor + "'";
        return std::nullopt;
    }
    relation.explanation = trim(record["explanation"].get<std::string>());
    relation.sentence_context = trim(record["sentence_context"].get<std::string>());
    if (relation.explanation.empty()) {
        reason = "empty explanation";
        return std::nullopt;
    }
    if (relation.sentence_context.empty()) {
        reason = "empty sentence_context";
        return std::nullopt;
    }
    return relation;
}

}  // namespace

ExtractionReport parse_relations(const std::string& raw) {
    ExtractionReport report;
    report.raw_response = raw;

    const std::string body = strip_code_fences(raw);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("extraction reply is not valid JSON: ") + ex.what());
    }
    if (!doc.is_object() || !doc.contains("bridging_relations") ||
        !doc["bridging_relations"].is_array()) {
        throw ParseError("extraction reply lacks a top-level 'bridging_relations' array");
    }

    for (const auto& record : doc["bridging_relations"]) {
        std::string reason;
        if (auto relation = validate_record(record, reason)) {
            report.accepted.push_back(std::move(*relation));
        } else {
            report.rejected.push_back({record, reason});
        }
    }
    return report;
}

ExtractionReport extract_bridging_relations(const DialogueTranscript& transcript,
                                            ChatProvider& pd, const ChatRequestParams& params) {
    const std::string prompt = build_extraction_prompt(transcript, default_few_shots());
    const std::string reply = pd.complete({{Role::User, prompt}}, params);
    return parse_relations(reply);
}

nlohmann::json relations_to_json(const std::vector<BridgingRelation>& relations) {
    nlohmann::json out = nlohmann::json::array();
    for (const BridgingRelation& relation : relations) {
        out.push_back(relation.to_json());
    }
    return out;
}

std::vector<BridgingRelation> relations_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) {
        throw ParseError("relations document must be a JSON array");
    }
    std::vector<BridgingRelation> out;
    out.reserve(doc.size());
    for (const auto& record : doc) {
        out.push_back(BridgingRelation::from_json(record));
    }
    return out;
}

}  // namespace pdagent
