#pragma once

#include <map>
#include <string>
#include <vector>

#include "pdagent/graph.hpp"
#include "pdagent/interview.hpp"
#include "pdagent/providers.hpp"
#include "pdagent/schema.hpp"

namespace pdagent {

enum class InferenceStrategy { Vanilla, FrequencyAware, PDAgent };

/// Canonical token used in file names and configs: "vanilla",
/// "frequency-aware", "pd-agent".
std::string_view strategy_name(InferenceStrategy strategy);
InferenceStrategy parse_strategy(std::string_view name);

/// Structural digest handed to the graph-based strategy instead of the raw
/// transcript: hubs, type distribution, class balance, counts.
struct GraphSummary {
    std::vector<std::pair<std::string, double>> top_hubs;
    std::map<RelationType, RelationTypeStats> distribution;
    double mereological_fraction = 0.0;
    double frame_related_fraction = 0.0;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;

    std::string render() const;
};

GraphSummary summarize_graph(const SemanticGraph& graph, std::size_t top_k = 10);

struct PersonaPrediction {
    PersonaProfile profile;
    /// Slots whose reply value was missing or out of vocabulary and was
    /// defaulted to the schema's first listed value.
    std::vector<std::pair<std::string, std::string>> unresolved;
    std::vector<std::string> warnings;
    /// The exact prompt sent to the reasoning provider, kept for audit.
    std::string prompt;

    nlohmann::json to_json() const;
};

/// Tokens from the target's responses only, stop-words removed, sorted by
/// count descending then lexicographically.
std::vector<std::pair<std::string, int>> token_frequency_table(
    const DialogueTranscript& transcript, std::size_t top_n);

/// Direct prediction from raw dialogue text.
PersonaPrediction infer_vanilla(const DialogueTranscript& transcript,
                                const PersonaSchema& schema, ChatProvider& pd,
                                const ChatRequestParams& params);

/// As vanilla, with the top-30 token frequency table embedded in the prompt.
PersonaPrediction infer_frequency_aware(const DialogueTranscript& transcript,
                                        const PersonaSchema& schema, ChatProvider& pd,
                                        const ChatRequestParams& params);

/// Graph-based prediction: the provider sees the GraphSummary and the schema
/// vocabulary, never the transcript.
PersonaPrediction infer_persona_pd(const SemanticGraph& graph, const PersonaSchema& schema,
                                   ChatProvider& pd, const ChatRequestParams& params);

/// Schema vocabulary block shared by all inference prompts.
std::string render_schema_vocabulary(const PersonaSchema& schema);

}  // namespace pdagent
