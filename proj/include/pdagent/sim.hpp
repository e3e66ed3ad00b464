#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdagent/providers.hpp"

namespace pdagent {

/// Script for the offline simulator: canned interview turns and extraction
/// payload. Inference requests are answered either with a fixed payload or by
/// a cue-counting read of the prompt (see SimChatProvider).
struct SimScenario {
    std::vector<std::string> questions;
    std::vector<std::string> responses;
    std::string extraction_payload;
    /// When set, returned verbatim for every inference request; otherwise the
    /// heuristic reader answers.
    std::optional<std::string> inference_payload;

    nlohmann::json to_json() const;
    static SimScenario from_json(const nlohmann::json& doc);
};

/// Built-in demo scenario: a four-turn interview with an urban doctor
/// persona and twelve bridging relations over its concepts.
SimScenario default_sim_scenario();

/// Deterministic offline chat backend. Routes each request by its prompt
/// shape: interview questions and target replies come from the scenario
/// script; extraction requests return the scenario payload; inference
/// requests are answered by scoring every allowed schema value by how often
/// it occurs in the prompt's evidence section (transcript, frequency table,
/// or graph summary) and picking the argmax per slot. The same reader runs
/// for every strategy, so differences in its answers come from the prompts
/// alone.
class SimChatProvider : public ChatProvider {
public:
    explicit SimChatProvider(SimScenario scenario);

protected:
    std::string do_complete(const std::vector<ChatMessage>& messages,
                            const ChatRequestParams& params) override;

private:
    std::string answer_question(const std::string& prompt) const;
    std::string answer_target(const std::vector<ChatMessage>& messages) const;
    std::string answer_inference(const std::string& prompt) const;

    SimScenario scenario_;
};

}  // namespace pdagent
