#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pdagent/interview.hpp"
#include "pdagent/providers.hpp"
#include "pdagent/taxonomy.hpp"

namespace pdagent {

/// One implicit relation between two dialogue concepts. Anchor and anaphor are
/// stored canonicalized; they are never equal (pure coreference is excluded).
struct BridgingRelation {
    std::string anchor;
    std::string anaphor;
    RelationType relation_type;
    std::string explanation;
    std::string sentence_context;

    nlohmann::json to_json() const;
    static BridgingRelation from_json(const nlohmann::json& doc);
};

struct RejectedRecord {
    nlohmann::json raw;
    std::string reason;
};

/// Audit trail of one extraction call: every record of the reply lands either
/// in accepted or in rejected.
struct ExtractionReport {
    std::vector<BridgingRelation> accepted;
    std::vector<RejectedRecord> rejected;
    std::string raw_response;

    nlohmann::json to_json() const;
};

/// Worked example shown to the model: a dialogue snippet plus the record it
/// should yield.
struct FewShotExample {
    std::string snippet;
    BridgingRelation relation;
};

/// Built-in exemplars covering both relation classes.
std::vector<FewShotExample> default_few_shots();

/// Lowercases, trims, collapses whitespace, and strips leading articles
/// (the/a/an). Throws ValidationError when nothing is left.
std::string canonicalize_concept(std::string_view phrase);

/// Renders the extraction prompt: task/format contract, the seven type names,
/// the few-shot exemplars, and the full dialogue.
std::string build_extraction_prompt(const DialogueTranscript& transcript,
                                    const std::vector<FewShotExample>& few_shots);

/// Total over arbitrary byte strings: strips code fences, parses the document,
/// then validates record by record. Individual bad records are rejected with a
/// reason; only a missing/unparseable document raises ParseError.
ExtractionReport parse_relations(const std::string& raw);

/// Prompt -> complete -> parse, one call over the whole transcript.
ExtractionReport extract_bridging_relations(const DialogueTranscript& transcript,
                                            ChatProvider& pd, const ChatRequestParams& params);

/// relations.json: array of accepted records mirroring the prompt's record
/// shape (same five field names).
nlohmann::json relations_to_json(const std::vector<BridgingRelation>& relations);
std::vector<BridgingRelation> relations_from_json(const nlohmann::json& doc);

}  // namespace pdagent
