#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdagent/providers.hpp"

namespace pdagent {

struct DialogueTurn {
    int index = 0;  // 1-based, contiguous
    std::string question;
    std::string response;
};

struct DialogueTranscript {
    std::string topic_seed;
    std::string hidden_prompt_fingerprint;
    std::vector<DialogueTurn> turns;

    /// Set when a provider failed mid-interview and a partial transcript was
    /// persisted; carries the error text.
    std::optional<std::string> failure;

    nlohmann::json to_json() const;
    static DialogueTranscript from_json(const nlohmann::json& doc);

    /// "Q1: ...\nA1: ..." rendering used in prompts.
    std::string render_history() const;
};

struct InterviewOptions {
    ChatRequestParams pd_params;
    ChatRequestParams target_params;
    std::string topic;  // empty -> first default topic
    /// Paper protocol bounds the interview to 3..5 turns.
    bool paper_protocol = true;
    /// When set, transcript.json is written here before run_interview returns
    /// (including partial transcripts on mid-interview failure).
    std::optional<std::filesystem::path> persist_dir;
};

/// Built-in open-ended starting topics.
const std::vector<std::string>& default_topics();

/// Seed-deterministic pick from default_topics().
std::string pick_topic(std::uint64_t seed);

/// Asks the discovery provider for the next open-ended question given the
/// history. The prompt embeds every prior (question, response) pair in order
/// and never the hidden prompt. The reply is normalized to a single
/// interrogative line.
std::string generate_question(const DialogueTranscript& history, ChatProvider& pd,
                              const ChatRequestParams& params, const std::string& topic);

/// The adaptive interview loop: the discovery agent asks, the hidden-persona
/// target answers, n_turns times. The target's system message is the hidden
/// prompt on every call; the discovery agent only ever sees (q, r) history.
DialogueTranscript run_interview(ChatProvider& pd, ChatProvider& target,
                                 const std::string& hidden_prompt, int n_turns,
                                 const InterviewOptions& options);

}  // namespace pdagent
