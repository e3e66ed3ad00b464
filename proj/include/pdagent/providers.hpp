#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pdagent {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role);
Role parse_role(std::string_view name);

struct ChatMessage {
    Role role;
    std::string content;
};

struct ChatRequestParams {
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<long> seed;
};

/// Audit record of one completion call, appended per call within a run.
struct ProviderTranscriptRecord {
    std::vector<ChatMessage> request;
    ChatRequestParams params;
    std::string response;
    std::optional<std::string> error;
    long latency_ms = 0;
    std::string timestamp;

    nlohmann::json to_json() const;
};

/// Content hash of a message list; the fixture lookup key. Stable across runs,
/// sensitive to any prompt drift.
std::string fixture_key(const std::vector<ChatMessage>& messages);

/// Chat-completion backend. Safe for concurrent use; the transcript recorder
/// serializes appends internally.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;

    /// Validates the message list, dispatches, and records the call.
    std::string complete(const std::vector<ChatMessage>& messages, const ChatRequestParams& params);

    std::vector<ProviderTranscriptRecord> transcript() const;

    /// Appends records accumulated since the last flush to a JSONL file.
    void flush_new_records(const std::filesystem::path& path);

protected:
    virtual std::string do_complete(const std::vector<ChatMessage>& messages,
                                    const ChatRequestParams& params) = 0;

private:
    mutable std::mutex mutex_;
    std::vector<ProviderTranscriptRecord> records_;
    std::size_t flushed_ = 0;
};

/// Strict replay from a fixture file: JSON array of {key_hash, response}.
/// Read-only after load; unknown keys raise MissingFixtureError.
class ScriptedChatProvider : public ChatProvider {
public:
    explicit ScriptedChatProvider(const std::filesystem::path& fixture_path);
    explicit ScriptedChatProvider(const nlohmann::json& fixture_doc);

protected:
    std::string do_complete(const std::vector<ChatMessage>& messages,
                            const ChatRequestParams& params) override;

private:
    void load(const nlohmann::json& fixture_doc);
    std::map<std::string, std::string> responses_;
};

/// Pass-through wrapper that captures (key_hash, response) pairs so a live or
/// simulated session can be frozen into a scripted fixture.
class RecordingChatProvider : public ChatProvider {
public:
    explicit RecordingChatProvider(std::shared_ptr<ChatProvider> inner);

    nlohmann::json fixture_doc() const;
    void save_fixture(const std::filesystem::path& path) const;

protected:
    std::string do_complete(const std::vector<ChatMessage>& messages,
                            const ChatRequestParams& params) override;

private:
    std::shared_ptr<ChatProvider> inner_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> captured_;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal transport seam so the retry/parse logic is testable without sockets.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    /// Throws NetworkError / TimeoutError on transport failure.
    virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                   const std::string& api_key) = 0;
};

std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url,
                                                      std::chrono::seconds timeout);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{1000};
    double backoff_factor = 2.0;
    std::function<void(std::chrono::milliseconds)> sleep;  // injectable for tests
};

/// OpenAI-compatible chat client: POST {base_url}/chat/completions, reads
/// choices[0].message.content. API key falls back to $PB_API_KEY.
class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider(std::string base_url, std::string api_key,
                     std::chrono::seconds timeout = std::chrono::seconds(120));
    /// Test constructor with injected transport and retry policy.
    HttpChatProvider(std::unique_ptr<HttpTransport> transport, std::string api_key,
                     RetryPolicy policy);

protected:
    std::string do_complete(const std::vector<ChatMessage>& messages,
                            const ChatRequestParams& params) override;

private:
    std::unique_ptr<HttpTransport> transport_;
    std::string api_key_;
    RetryPolicy policy_;
};

std::string api_key_from_env();

}  // namespace pdagent
