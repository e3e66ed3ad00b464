#include "pdagent/embedding.hpp"

#include <cmath>

#include <json.hpp>

#include "pdagent/errors.hpp"
#include "pdagent/providers.hpp"
#include "pdagent/text.hpp"

namespace pdagent {

std::vector<std::vector<double>> Embedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) {
        throw ValidationError("embed() needs at least one text");
    }
    for (const std::string& text : texts) {
        if (text.empty()) {
            throw ValidationError("embed() texts must be non-empty");
        }
    }
    return do_embed(texts);
}

std::vector<std::vector<double>> DeterministicEmbedder::do_embed(
    const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        std::vector<double> vec(kDimension, 0.0);
        for (const std::string& token : word_tokens(text)) {
            vec[fnv1a64(token) % kDimension] += 1.0;
        }
        double norm_sq = 0.0;
        for (double x : vec) norm_sq += x * x;
        if (norm_sq > 0.0) {
            const double norm = std::sqrt(norm_sq);
            for (double& x : vec) x /= norm;
        }
        out.push_back(std::move(vec));
    }
    return out;
}

HttpEmbedder::HttpEmbedder(std::string base_url, std::string api_key, std::string model,
                           std::chrono::seconds timeout)
    : transport_(make_httplib_transport(base_url, timeout)),
      api_key_(std::move(api_key)),
      model_(std::move(model)) {}

HttpEmbedder::HttpEmbedder(std::unique_ptr<HttpTransport> transport, std::string api_key,
                           std::string model)
    : transport_(std::move(transport)), api_key_(std::move(api_key)), model_(std::move(model)) {}

std::vector<std::vector<double>> HttpEmbedder::do_embed(const std::vector<std::string>& texts) {
    const nlohmann::json body = {{"model", model_}, {"input", texts}};
    const HttpResponse response = transport_->post_json("/embeddings", body.dump(), api_key_);
    if (response.status < 200 || response.status >= 300) {
        throw ProviderError("embeddings endpoint returned HTTP " + std::to_string(response.status),
                            response.status, response.body);
    }
    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception& ex) {
        throw ProviderError(std::string("unparseable embeddings response: ") + ex.what(),
                            response.status, response.body);
    }
    if (!payload.contains("data") || !payload["data"].is_array() ||
        payload["data"].size() != texts.size()) {
        throw ProviderError("embeddings response data does not match input count",
                            response.status, response.body);
    }
    std::vector<std::vector<double>> out(texts.size());
    for (const auto& item : payload["data"]) {
        const std::size_t index = item.value("index", 0u);
        if (index >= out.size() || !item.contains("embedding")) {
            throw ProviderError("malformed embeddings response entry", response.status,
                                response.body);
        }
        out[index] = item["embedding"].get<std::vector<double>>();
    }
    return out;
}

}  // namespace pdagent
