#include "pdagent/providers.hpp"

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "pdagent/errors.hpp"
#include "pdagent/json_io.hpp"
#include "pdagent/text.hpp"

namespace pdagent {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

void validate_messages(const std::vector<ChatMessage>& messages) {
    if (messages.empty()) {
        throw ValidationError("message list must not be empty");
    }
    for (const ChatMessage& m : messages) {
        if (m.role != Role::System && m.content.empty()) {
            throw ValidationError("user/assistant message content must not be empty");
        }
    }
    const Role last = messages.back().role;
    if (last != Role::User && last != Role::System) {
        throw ValidationError("message list must end in a user or system message");
    }
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

HttpResponse post_with_retry(HttpTransport& transport, const std::string& path,
                             const std::string& body, const std::string& api_key,
                             const RetryPolicy& policy) {
    const auto sleep_fn = policy.sleep
        ? policy.sleep
        : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

    std::exception_ptr last_error;
    std::chrono::milliseconds delay = policy.backoff_base;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        try {
            HttpResponse response = transport.post_json(path, body, api_key);
            if (response.status >= 200 && response.status < 300) {
                return response;
            }
            if (!retryable_status(response.status)) {
                throw ProviderError("provider returned HTTP " + std::to_string(response.status),
                                    response.status, response.body);
            }
            last_error = std::make_exception_ptr(
                ProviderError("provider returned HTTP " + std::to_string(response.status) +
                                  " after " + std::to_string(attempt) + " attempts",
                              response.status, response.body));
        } catch (const TimeoutError&) {
            last_error = std::current_exception();
        } catch (const NetworkError&) {
            last_error = std::current_exception();
        }
        if (attempt < policy.max_attempts) {
            sleep_fn(delay);
            delay = std::chrono::milliseconds(
                static_cast<long long>(std::llround(static_cast<double>(delay.count()) *
                                                    policy.backoff_factor)));
        }
    }
    std::rethrow_exception(last_error);
}

}  // namespace

std::string_view role_name(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    throw ValidationError("invalid Role value");
}

Role parse_role(std::string_view name) {
    if (name == "system") return Role::System;
    if (name == "user") return Role::User;
    if (name == "assistant") return Role::Assistant;
    throw ValidationError("unknown role: '" + std::string(name) + "'");
}

nlohmann::json ProviderTranscriptRecord::to_json() const {
    nlohmann::json req = nlohmann::json::array();
    for (const ChatMessage& m : request) {
        req.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    nlohmann::json out = {
        {"request", req},
        {"params",
         {{"model", params.model_id},
          {"temperature", params.temperature},
          {"max_tokens", params.max_tokens}}},
        {"response", response},
        {"latency_ms", latency_ms},
        {"timestamp", timestamp},
    };
    if (params.seed) out["params"]["seed"] = *params.seed;
    if (error) out["error"] = *error;
    return out;
}

std::string fixture_key(const std::vector<ChatMessage>& messages) {
    std::string buffer;
    for (const ChatMessage& m : messages) {
        buffer += role_name(m.role);
        buffer += '\x1f';
        buffer += m.content;
        buffer += '\x1e';
    }
    return to_hex(fnv1a64(buffer));
}

std::string ChatProvider::complete(const std::vector<ChatMessage>& messages,
                                   const ChatRequestParams& params) {
    validate_messages(messages);
    ProviderTranscriptRecord record;
    record.request = messages;
    record.params = params;
    record.timestamp = utc_timestamp();

    const auto start = std::chrono::steady_clock::now();
    try {
        record.response = do_complete(messages, params);
    } catch (const std::exception& ex) {
        record.error = ex.what();
        record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        {
            std::lock_guard<std::mutex> lock(mutex_);
            records_.push_back(std::move(record));
        }
        throw;
    }
    record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::lock_guard<std::mutex> lock(mutex_);
    records_.push_back(record);
    return record.response;
}

std::vector<ProviderTranscriptRecord> ChatProvider::transcript() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_;
}

void ChatProvider::flush_new_records(const std::filesystem::path& path) {
    std::ostringstream out;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (std::size_t i = flushed_; i < records_.size(); ++i) {
            out << records_[i].to_json().dump() << "\n";
        }
        flushed_ = records_.size();
    }
    if (out.str().empty()) return;
    std::string existing;
    if (std::filesystem::exists(path)) {
        existing = read_text(path);
    }
    write_text_atomic(path, existing + out.str());
}

ScriptedChatProvider::ScriptedChatProvider(const std::filesystem::path& fixture_path) {
    load(read_json(fixture_path));
}

ScriptedChatProvider::ScriptedChatProvider(const nlohmann::json& fixture_doc) {
    load(fixture_doc);
}

void ScriptedChatProvider::load(const nlohmann::json& fixture_doc) {
    if (!fixture_doc.is_array()) {
        throw ConfigError("fixture document must be a JSON array of {key_hash, response}");
    }
    for (const auto& entry : fixture_doc) {
        if (!entry.is_object() || !entry.contains("key_hash") || !entry.contains("response")) {
            throw ConfigError("fixture entry must carry key_hash and response");
        }
        responses_[entry["key_hash"].get<std::string>()] = entry["response"].get<std::string>();
    }
}

std::string ScriptedChatProvider::do_complete(const std::vector<ChatMessage>& messages,
                                              const ChatRequestParams&) {
    const std::string key = fixture_key(messages);
    const auto it = responses_.find(key);
    if (it == responses_.end()) {
        throw MissingFixtureError("no fixture response for message hash " + key);
    }
    return it->second;
}

RecordingChatProvider::RecordingChatProvider(std::shared_ptr<ChatProvider> inner)
    : inner_(std::move(inner)) {
    if (!inner_) {
        throw ConfigError("RecordingChatProvider needs an inner provider");
    }
}

std::string RecordingChatProvider::do_complete(const std::vector<ChatMessage>& messages,
                                               const ChatRequestParams& params) {
    const std::string response = inner_->complete(messages, params);
    std::lock_guard<std::mutex> lock(mutex_);
    captured_[fixture_key(messages)] = response;
    return response;
}

nlohmann::json RecordingChatProvider::fixture_doc() const {
    std::lock_guard<std::mutex> lock(mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, response] : captured_) {
        out.push_back({{"key_hash", key}, {"response", response}});
    }
    return out;
}

void RecordingChatProvider::save_fixture(const std::filesystem::path& path) const {
    // Merge with a fixture already on disk so stages recorded across separate
    // invocations accumulate into one file.
    std::map<std::string, std::string> merged;
    if (std::filesystem::exists(path)) {
        for (const auto& entry : read_json(path)) {
            merged[entry.at("key_hash").get<std::string>()] =
                entry.at("response").get<std::string>();
        }
    }
    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (const auto& [key, response] : captured_) {
            merged[key] = response;
        }
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, response] : merged) {
        out.push_back({{"key_hash", key}, {"response", response}});
    }
    write_json_atomic(path, out);
}

namespace {

class HttplibTransport : public HttpTransport {
public:
    HttplibTransport(std::string base_url, std::chrono::seconds timeout) {
        // Split "https://host:port/prefix" into origin + path prefix.
        std::string url = std::move(base_url);
        while (!url.empty() && url.back() == '/') url.pop_back();
        std::size_t scheme_end = url.find("://");
        std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        std::size_t path_start = url.find('/', host_start);
        if (path_start != std::string::npos) {
            origin_ = url.substr(0, path_start);
            prefix_ = url.substr(path_start);
        } else {
            origin_ = url;
        }
        client_ = std::make_unique<httplib::Client>(origin_);
        client_->set_connection_timeout(timeout.count(), 0);
        client_->set_read_timeout(timeout.count(), 0);
        client_->set_write_timeout(timeout.count(), 0);
    }

    HttpResponse post_json(const std::string& path, const std::string& body,
                           const std::string& api_key) override {
        httplib::Headers headers;
        if (!api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key);
        }
        auto result = client_->Post(prefix_ + path, headers, body, "application/json");
        if (!result) {
            const httplib::Error err = result.error();
            const std::string detail = httplib::to_string(err);
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write) {
                throw TimeoutError("request to " + origin_ + prefix_ + path +
                                   " timed out: " + detail);
            }
            throw NetworkError("request to " + origin_ + prefix_ + path + " failed: " + detail);
        }
        return {result->status, result->body};
    }

private:
    std::string origin_;
    std::string prefix_;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url,
                                                      std::chrono::seconds timeout) {
    return std::make_unique<HttplibTransport>(base_url, timeout);
}

HttpChatProvider::HttpChatProvider(std::string base_url, std::string api_key,
                                   std::chrono::seconds timeout)
    : transport_(make_httplib_transport(base_url, timeout)), api_key_(std::move(api_key)) {}

HttpChatProvider::HttpChatProvider(std::unique_ptr<HttpTransport> transport, std::string api_key,
                                   RetryPolicy policy)
    : transport_(std::move(transport)), api_key_(std::move(api_key)), policy_(std::move(policy)) {}

std::string HttpChatProvider::do_complete(const std::vector<ChatMessage>& messages,
                                          const ChatRequestParams& params) {
    nlohmann::json body_messages = nlohmann::json::array();
    for (const ChatMessage& m : messages) {
        body_messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    nlohmann::json body = {
        {"model", params.model_id},
        {"messages", body_messages},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
    };
    if (params.seed) body["seed"] = *params.seed;

    const HttpResponse response =
        post_with_retry(*transport_, "/chat/completions", body.dump(), api_key_, policy_);

    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception& ex) {
        throw ProviderError(std::string("unparseable completion response: ") + ex.what(),
                            response.status, response.body);
    }
    if (!payload.contains("choices") || !payload["choices"].is_array() ||
        payload["choices"].empty()) {
        throw ProviderError("completion response has no choices", response.status, response.body);
    }
    const auto& message = payload["choices"][0]["message"];
    if (!message.is_object() || !message.contains("content") || !message["content"].is_string()) {
        throw ProviderError("completion response has no message content", response.status,
                            response.body);
    }
    const std::string content = message["content"].get<std::string>();
    if (content.empty()) {
        throw ProviderError("completion response content is empty", response.status,
                            response.body);
    }
    return content;
}

std::string api_key_from_env() {
    const char* key = std::getenv("PB_API_KEY");
    return key == nullptr ? std::string() : std::string(key);
}

}  // namespace pdagent
