#include "biokg/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "biokg/common.hpp"
#include "biokg/utf8.hpp"

namespace biokg {

namespace {

using nlohmann::json;

struct ParsedUrl {
    std::string origin;  // scheme://host:port
    std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& base_url) {
    const std::size_t scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint url must include a scheme: " + base_url);
    const std::size_t path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, path_start);
        out.path_prefix = base_url.substr(path_start);
    }
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    return out;
}

void apply_timeout(httplib::Client& cli, double seconds) {
    const auto sec = static_cast<time_t>(seconds);
    const auto usec = static_cast<time_t>((seconds - static_cast<double>(sec)) * 1e6);
    cli.set_connection_timeout(sec, usec);
    cli.set_read_timeout(sec, usec);
    cli.set_write_timeout(sec, usec);
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

httplib::Headers auth_headers(const std::string& api_key_env) {
    httplib::Headers headers;
    if (!api_key_env.empty()) {
        const std::string key = api_key_from_env(api_key_env);
        if (key.empty()) throw ConfigError("environment variable " + api_key_env + " is not set");
        headers.emplace("Authorization", "Bearer " + key);
    }
    return headers;
}

void backoff_sleep(int attempt, int base_delay_ms) {
    const auto delay = std::chrono::milliseconds(static_cast<long>(base_delay_ms) << (attempt - 1));
    std::this_thread::sleep_for(delay);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::string api_key_from_env(const std::string& env_name) {
    const char* value = std::getenv(env_name.c_str());
    return value ? std::string(value) : std::string();
}

// ---- chat client --------------------------------------------------------

struct ChatClient::Impl {
    explicit Impl(int max_parallel) : slots(max_parallel) {}
    std::counting_semaphore<> slots;
};

ChatClient::ChatClient(ChatEndpointConfig config) : config_(std::move(config)) {
    if (config_.max_parallel < 1) throw ConfigError("chat endpoint: max_parallel must be >= 1");
    if (config_.temperature < 0.0) throw ConfigError("chat endpoint: temperature must be >= 0");
    impl_ = std::make_unique<Impl>(config_.max_parallel);
}

ChatClient::~ChatClient() = default;

RawModelResponse ChatClient::chat(const std::string& prompt) {
    impl_->slots.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{impl_->slots};

    const ParsedUrl url = parse_base_url(config_.base_url);
    const httplib::Headers headers = auth_headers(config_.api_key_env);

    json body;
    body["model"] = config_.model_name;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_output_tokens;
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 1; attempt <= config_.retry_attempts; ++attempt) {
        if (attempt > 1) backoff_sleep(attempt - 1, config_.retry_base_delay_ms);

        httplib::Client cli(url.origin);
        apply_timeout(cli, config_.request_timeout_s);
        const auto start = std::chrono::steady_clock::now();
        httplib::Result res = cli.Post(url.path_prefix + "/chat/completions", headers, payload, "application/json");
        const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);

        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("chat endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            if (retryable_status(res->status)) continue;
            throw TransportError("chat endpoint: " + last_error + ": " + res->body);
        }
        try {
            const json doc = json::parse(res->body);
            RawModelResponse out;
            out.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
            if (doc.contains("usage")) {
                out.usage.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
                out.usage.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
            }
            out.latency_ms = elapsed.count();
            return out;
        } catch (const json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
            continue;
        }
    }
    throw TransportError("chat request failed after " + std::to_string(config_.retry_attempts) +
                         " attempts: " + last_error);
}

std::vector<ChatResult> ChatClient::chat_batch(const std::vector<std::string>& prompts) {
    std::vector<ChatResult> results(prompts.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> auth_failed{false};
    std::string auth_message;
    std::mutex auth_mutex;

    const std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(config_.max_parallel), std::max<std::size_t>(prompts.size(), 1));
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= prompts.size() || auth_failed.load()) return;
                try {
                    results[i].response = chat(prompts[i]);
                    results[i].ok = true;
                } catch (const AuthError& e) {
                    std::lock_guard<std::mutex> lock(auth_mutex);
                    auth_failed.store(true);
                    auth_message = e.what();
                    results[i].error = e.what();
                    return;
                } catch (const std::exception& e) {
                    results[i].error = e.what();
                }
            }
        });
    }
    for (auto& worker : workers) worker.join();
    if (auth_failed.load()) throw AuthError(auth_message);
    return results;
}

// ---- model output parsing -----------------------------------------------

namespace {

std::string strip_think_spans(std::string text) {
    constexpr std::string_view kOpen = "<think>";
    constexpr std::string_view kClose = "</think>";
    std::size_t pos = 0;
    while ((pos = text.find(kOpen, pos)) != std::string::npos) {
        const std::size_t close = text.find(kClose, pos + kOpen.size());
        if (close == std::string::npos) break;  // unbalanced span stays
        text.erase(pos, close + kClose.size() - pos);
    }
    return text;
}

std::string strip_code_fences(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        const bool last = end == std::string::npos;
        if (last) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        std::string_view stripped = line;
        while (!stripped.empty() && (stripped.front() == ' ' || stripped.front() == '\t')) stripped.remove_prefix(1);
        if (stripped.rfind("```", 0) != 0) {
            out.append(line);
            if (!last) out.push_back('\n');
        }
        if (last) break;
        pos = end + 1;
    }
    return out;
}

std::optional<std::string> first_balanced_object(const std::string& text) {
    std::size_t start = std::string::npos;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (start == std::string::npos) {
            if (c == '{') {
                start = i;
                depth = 1;
            }
            continue;
        }
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

std::string remove_trailing_commas(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            out.push_back(c);
            continue;
        }
        if (c == '"') {
            in_string = true;
            out.push_back(c);
            continue;
        }
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\n' || text[j] == '\r')) ++j;
            if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;  // drop the comma
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

ParsedOutput parse_model_output(std::string_view raw, bool strip_think) {
    ParsedOutput result;
    result.raw = std::string(raw);
    std::string text = result.raw;
    if (strip_think) text = strip_think_spans(std::move(text));
    text = strip_code_fences(text);
    auto object = first_balanced_object(text);
    if (!object) {
        result.error = "no balanced JSON object found in model output";
        return result;
    }
    result.json_text = remove_trailing_commas(*object);
    return result;
}

// ---- embeddings -----------------------------------------------------------

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dims != b.dims) throw ConfigError("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingVector mock_embed(std::string_view text) {
    EmbeddingVector out;
    out.dims = MockEmbedder::kDims;
    out.values.assign(MockEmbedder::kDims, 0.0);
    const std::vector<char32_t> cps = u8_decode(text);
    if (cps.empty()) return out;

    auto bucket = [](char32_t a, char32_t b) {
        const std::uint64_t mixed = splitmix64((static_cast<std::uint64_t>(a) << 32) | b);
        return static_cast<std::size_t>(mixed % MockEmbedder::kDims);
    };
    if (cps.size() == 1) {
        out.values[bucket(cps[0], 0)] += 1.0;
    } else {
        for (std::size_t i = 0; i + 1 < cps.size(); ++i) out.values[bucket(cps[i], cps[i + 1])] += 1.0;
    }
    double norm = 0.0;
    for (double v : out.values) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& v : out.values) v /= norm;
    return out;
}

EmbeddingVector MockEmbedder::embed(const std::string& text) { return mock_embed(text); }

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const json doc = json::parse(line);
            EmbeddingVector vec;
            vec.dims = doc.at("dims").get<std::size_t>();
            vec.values = doc.at("values").get<std::vector<double>>();
            entries_[doc.at("key").get<std::string>()] = std::move(vec);
        } catch (const json::exception&) {
            // Skip corrupt cache lines; the entry will be recomputed.
        }
    }
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::put(const std::string& key, const EmbeddingVector& vec) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!entries_.emplace(key, vec).second) return;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) return;
    json doc;
    doc["key"] = key;
    doc["dims"] = vec.dims;
    doc["values"] = vec.values;
    out << doc.dump() << '\n';
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

std::string EmbeddingCache::make_key(std::string_view provider, std::string_view model, std::string_view text) {
    std::string blob;
    blob.reserve(provider.size() + model.size() + text.size() + 2);
    blob.append(provider);
    blob.push_back('\x1f');
    blob.append(model);
    blob.push_back('\x1f');
    blob.append(text);
    return content_digest(blob);
}

struct HttpEmbedder::Impl {};

HttpEmbedder::HttpEmbedder(EmbeddingEndpointConfig config)
    : config_(std::move(config)), cache_(config_.cache_path), impl_(std::make_unique<Impl>()) {}

HttpEmbedder::~HttpEmbedder() = default;

std::string HttpEmbedder::id() const { return config_.base_url + "#" + config_.model_name; }

EmbeddingVector HttpEmbedder::embed(const std::string& text) {
    if (trim(text).empty()) throw ConfigError("embed: empty text (scorers must short-circuit)");
    const std::string key = EmbeddingCache::make_key(config_.base_url, config_.model_name, text);
    if (auto cached = cache_.get(key)) return *cached;

    const ParsedUrl url = parse_base_url(config_.base_url);
    const httplib::Headers headers = auth_headers(config_.api_key_env);
    json body;
    body["model"] = config_.model_name;
    body["input"] = text;
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 1; attempt <= config_.retry_attempts; ++attempt) {
        if (attempt > 1) backoff_sleep(attempt - 1, config_.retry_base_delay_ms);
        httplib::Client cli(url.origin);
        apply_timeout(cli, config_.request_timeout_s);
        httplib::Result res = cli.Post(url.path_prefix + "/embeddings", headers, payload, "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw AuthError("embedding endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            if (retryable_status(res->status)) continue;
            throw TransportError("embedding endpoint: " + last_error + ": " + res->body);
        }
        try {
            const json doc = json::parse(res->body);
            EmbeddingVector vec;
            vec.values = doc.at("data").at(0).at("embedding").get<std::vector<double>>();
            vec.dims = vec.values.size();
            if (config_.expected_dims != 0 && vec.dims != config_.expected_dims)
                throw TransportError("embedding endpoint returned " + std::to_string(vec.dims) +
                                     " dims, expected " + std::to_string(config_.expected_dims));
            cache_.put(key, vec);
            return vec;
        } catch (const json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
            continue;
        }
    }
    throw TransportError("embedding request failed after " + std::to_string(config_.retry_attempts) +
                         " attempts: " + last_error);
}

}  // namespace biokg
