#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biokg {

struct ChatEndpointConfig {
    std::string base_url;       // e.g. http://127.0.0.1:8000/v1
    std::string model_name;
    std::string api_key_env;    // name of the env var holding the key
    double temperature = 0.0;
    int max_output_tokens = 2048;
    double request_timeout_s = 60.0;
    int max_parallel = 4;
    bool strip_think_blocks = true;
    int retry_attempts = 3;
    int retry_base_delay_ms = 500;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct RawModelResponse {
    std::string text;
    TokenUsage usage;
    double latency_ms = 0.0;
};

// Non-retryable endpoint rejection (bad credentials and the like).
class AuthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Transport/provider failure that survived the retry budget.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChatResult {
    bool ok = false;
    RawModelResponse response;
    std::string error;
};

// OpenAI-compatible chat-completions client. One instance owns the
// per-endpoint parallelism bound; share it across workers.
class ChatClient {
public:
    explicit ChatClient(ChatEndpointConfig config);
    ~ChatClient();

    ChatClient(const ChatClient&) = delete;
    ChatClient& operator=(const ChatClient&) = delete;

    const ChatEndpointConfig& config() const { return config_; }

    // Throws AuthError on credential rejection, TransportError once the
    // retry budget is exhausted.
    RawModelResponse chat(const std::string& prompt);

    // One result slot per prompt, in order. Transport failures become
    // failure records; AuthError aborts the batch.
    std::vector<ChatResult> chat_batch(const std::vector<std::string>& prompts);

private:
    struct Impl;
    ChatEndpointConfig config_;
    std::unique_ptr<Impl> impl_;
};

struct ParsedOutput {
    std::optional<std::string> json_text;
    std::string error;
    std::string raw;  // original model text, kept for audit on failure

    bool ok() const { return json_text.has_value(); }
};

// Distills a raw completion into candidate JSON: <think> blocks dropped
// (when enabled), Markdown fences dropped, first balanced {...} span
// extracted, trailing commas repaired in a single pass.
ParsedOutput parse_model_output(std::string_view raw, bool strip_think = true);

struct EmbeddingVector {
    std::size_t dims = 0;
    std::vector<double> values;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(const std::string& text) = 0;
    virtual std::string id() const = 0;
};

// Deterministic offline embedder: codepoint bigrams hashed into 64
// buckets, counted, L2-normalised.
class MockEmbedder : public Embedder {
public:
    static constexpr std::size_t kDims = 64;
    EmbeddingVector embed(const std::string& text) override;
    std::string id() const override { return "mock"; }
};

EmbeddingVector mock_embed(std::string_view text);

struct EmbeddingEndpointConfig {
    std::string base_url;
    std::string model_name;   // e.g. "gte-large-zh"
    std::string api_key_env;
    double request_timeout_s = 30.0;
    int retry_attempts = 3;
    int retry_base_delay_ms = 500;
    std::size_t expected_dims = 0;  // 0 = accept whatever the provider returns
    std::string cache_path;         // optional on-disk cache (JSONL)
};

// Content-addressed embedding cache, safe for concurrent use.
class EmbeddingCache {
public:
    EmbeddingCache() = default;
    explicit EmbeddingCache(std::string path);  // loads existing entries

    std::optional<EmbeddingVector> get(const std::string& key) const;
    void put(const std::string& key, const EmbeddingVector& vec);
    std::size_t size() const;

    static std::string make_key(std::string_view provider, std::string_view model, std::string_view text);

private:
    mutable std::mutex mutex_;
    std::map<std::string, EmbeddingVector> entries_;
    std::string path_;
};

// OpenAI-compatible /embeddings client with the cache in front.
class HttpEmbedder : public Embedder {
public:
    explicit HttpEmbedder(EmbeddingEndpointConfig config);
    ~HttpEmbedder();

    EmbeddingVector embed(const std::string& text) override;
    std::string id() const override;

private:
    struct Impl;
    EmbeddingEndpointConfig config_;
    EmbeddingCache cache_;
    std::unique_ptr<Impl> impl_;
};

std::string api_key_from_env(const std::string& env_name);

}  // namespace biokg
