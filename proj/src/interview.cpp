#include "pdagent/interview.hpp"

#include <random>
#include <sstream>

#include "pdagent/errors.hpp"
#include "pdagent/json_io.hpp"
#include "pdagent/prompt_assets.hpp"
#include "pdagent/text.hpp"

namespace pdagent {

nlohmann::json DialogueTranscript::to_json() const {
    nlohmann::json turns_json = nlohmann::json::array();
    for (const DialogueTurn& turn : turns) {
        turns_json.push_back(
            {{"index", turn.index}, {"question", turn.question}, {"response", turn.response}});
    }
    nlohmann::json out = {
        {"topic_seed", topic_seed},
        {"hidden_prompt_fingerprint", hidden_prompt_fingerprint},
        {"turns", turns_json},
    };
    if (failure) out["failure"] = *failure;
    return out;
}

DialogueTranscript DialogueTranscript::from_json(const nlohmann::json& doc) {
    DialogueTranscript transcript;
    transcript.topic_seed = doc.value("topic_seed", "");
    transcript.hidden_prompt_fingerprint = doc.value("hidden_prompt_fingerprint", "");
    if (doc.contains("failure")) transcript.failure = doc["failure"].get<std::string>();
    int expected_index = 1;
    for (const auto& turn_json : doc.value("turns", nlohmann::json::array())) {
        DialogueTurn turn;
        turn.index = turn_json.value("index", 0);
        turn.question = turn_json.value("question", "");
        turn.response = turn_json.value("response", "");
        if (turn.index != expected_index) {
            throw ValidationError("transcript turn indices must be contiguous from 1");
        }
        if (turn.question.empty() || turn.response.empty()) {
            throw ValidationError("transcript turns must have non-empty question and response");
        }
        ++expected_index;
        transcript.turns.push_back(std::move(turn));
    }
    return transcript;
}

std::string DialogueTranscript::render_history() const {
    std::ostringstream out;
    for (const DialogueTurn& turn : turns) {
        out << "Q" << turn.index << ": " << turn.question << "\n";
        out << "A" << turn.index << ": " << turn.response << "\n";
    }
    return out.str();
}

const std::vector<std::string>& default_topics() {
    static const std::vector<std::string> topics = {
        "their daily routine",
        "a recent decision they had to make",
        "how they spend their free time",
        "a challenge they faced at work recently",
    };
    return topics;
}

std::string pick_topic(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return default_topics()[rng() % default_topics().size()];
}

std::string generate_question(const DialogueTranscript& history, ChatProvider& pd,
                              const ChatRequestParams& params, const std::string& topic) {
    std::string history_block = history.render_history();
    if (history_block.empty()) {
        history_block = "(none yet)\n";
    }
    const std::string prompt = render_template(
        prompts::kInterviewQuestion,
        {{"topic", topic.empty() ? default_topics().front() : topic},
         {"history", history_block}});

    std::string reply = pd.complete({{Role::User, prompt}}, params);
    // Normalize into a single interrogative line.
    std::string question = collapse_whitespace(reply);
    if (question.empty()) {
        throw ProviderError("question generator returned blank text");
    }
    if (question.back() != '?') {
        question.push_back('?');
    }
    return question;
}

namespace {

void persist(const DialogueTranscript& transcript, const InterviewOptions& options) {
    if (options.persist_dir) {
        write_json_atomic(*options.persist_dir / "transcript.json", transcript.to_json());
    }
}

}  // namespace

DialogueTranscript run_interview(ChatProvider& pd, ChatProvider& target,
                                 const std::string& hidden_prompt, int n_turns,
                                 const InterviewOptions& options) {
    if (hidden_prompt.empty()) {
        throw ValidationError("hidden prompt must not be empty");
    }
    if (options.paper_protocol && (n_turns < 3 || n_turns > 5)) {
        throw ValidationError("protocol violation: interview must run 3-5 turns, got " +
                              std::to_string(n_turns));
    }
    if (n_turns < 1) {
        throw ValidationError("n_turns must be positive");
    }

    DialogueTranscript transcript;
    transcript.topic_seed = options.topic.empty() ? default_topics().front() : options.topic;
    transcript.hidden_prompt_fingerprint = to_hex(fnv1a64(hidden_prompt));

    for (int i = 1; i <= n_turns; ++i) {
        try {
            const std::string question =
                generate_question(transcript, pd, options.pd_params, transcript.topic_seed);

            std::vector<ChatMessage> target_messages;
            target_messages.push_back({Role::System, hidden_prompt});
            for (const DialogueTurn& turn : transcript.turns) {
                target_messages.push_back({Role::User, turn.question});
                target_messages.push_back({Role::Assistant, turn.response});
            }
            target_messages.push_back({Role::User, question});

            std::string response = target.complete(target_messages, options.target_params);
            response = trim(response);
            if (response.empty()) {
                throw ProviderError("target returned blank response");
            }
            transcript.turns.push_back({i, question, std::move(response)});
        } catch (const std::exception& ex) {
            transcript.failure = "turn " + std::to_string(i) + ": " + ex.what();
            persist(transcript, options);
            throw;
        }
    }

    persist(transcript, options);
    return transcript;
}

}  // namespace pdagent
