#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace pdagent {

/// Text embedding backend; one fixed-dimension vector per input text.
class Embedder {
public:
    virtual ~Embedder() = default;

    /// Pre: non-empty list of non-empty texts (ValidationError otherwise).
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);

protected:
    virtual std::vector<std::vector<double>> do_embed(const std::vector<std::string>& texts) = 0;
};

/// Offline embedder: lowercased word tokens hashed into a 256-dimension
/// bag-of-words vector, L2-normalized. A text whose tokenization is empty maps
/// to the zero vector.
class DeterministicEmbedder : public Embedder {
public:
    static constexpr std::size_t kDimension = 256;

protected:
    std::vector<std::vector<double>> do_embed(const std::vector<std::string>& texts) override;
};

class HttpTransport;

/// OpenAI-compatible embeddings client: POST {base_url}/embeddings.
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(std::string base_url, std::string api_key, std::string model,
                 std::chrono::seconds timeout = std::chrono::seconds(120));
    HttpEmbedder(std::unique_ptr<HttpTransport> transport, std::string api_key, std::string model);

protected:
    std::vector<std::vector<double>> do_embed(const std::vector<std::string>& texts) override;

private:
    std::unique_ptr<HttpTransport> transport_;
    std::string api_key_;
    std::string model_;
};

}  // namespace pdagent
