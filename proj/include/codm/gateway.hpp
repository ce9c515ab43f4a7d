#pragma once

#include <chrono>
#include <condition_variable>
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

#include "codm/prompt_forge.hpp"
#include "codm/util.hpp"

namespace codm {

/// A chat/completion backend. Implementations throw AuthError, RateLimitError,
/// TimeoutError, ValidationError (request rejected as invalid) or ProviderError.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(const PromptBundle& bundle) = 0;
};

struct GenerationRecord {
    std::string id;
    std::string request_id;  // idempotency key
    PromptBundle bundle;
    std::string output_text;
    std::string provider;
    std::int64_t latency_ms = 0;
    int attempts = 1;
    std::string created_at;
    std::optional<std::string> thread_id;
    std::optional<std::string> encounter_id;

    bool operator==(const GenerationRecord&) const = default;
};

nlohmann::json to_json(const GenerationRecord& r);

/// Where the gateway writes generations. `persist` must be idempotent on
/// request_id: a second write with the same key returns the first record.
class GenerationSink {
public:
    virtual ~GenerationSink() = default;
    virtual std::optional<GenerationRecord> find_generation_by_request(const std::string& request_id) = 0;
    virtual GenerationRecord persist_generation(const GenerationRecord& record) = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{500};
    double multiplier = 2.0;

    /// Delay before attempt `attempt + 1`, given that `attempt` (1-based) failed.
    std::chrono::milliseconds backoff_after(int attempt) const;
};

struct GatewayConfig {
    RetryPolicy retry;
    int max_concurrent = 8;
};

struct GenerateOptions {
    std::string request_id;  // generated when empty
    std::optional<std::string> thread_id;
    std::optional<std::string> encounter_id;
};

class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Gateway(std::shared_ptr<Provider> provider, GenerationSink& sink, Clock& clock, IdGenerator& ids,
            GatewayConfig config = {}, Sleeper sleeper = {});

    /// Sends the bundle, retrying transient failures with exponential backoff,
    /// and persists the result. If a generation with the same request id is
    /// already stored, returns it without contacting the provider.
    GenerationRecord generate(const PromptBundle& bundle, GenerateOptions options = {});

    int in_flight() const;
    int peak_in_flight() const;
    const Provider& provider() const { return *provider_; }

private:
    class Slot;

    std::string call_with_retries(const PromptBundle& bundle, int& attempts);

    std::shared_ptr<Provider> provider_;
    GenerationSink& sink_;
    Clock& clock_;
    IdGenerator& ids_;
    GatewayConfig config_;
    Sleeper sleeper_;

    mutable std::mutex mutex_;
    std::condition_variable slot_freed_;
    int in_flight_ = 0;
    int peak_ = 0;
};

/// Offline provider. Replies come from a canned file keyed by bundle hash, then
/// by interface kind, then a default; otherwise a deterministic text derived
/// from the hash. Canned file format:
///   {"responses": {"<sha256>": "..."}, "by_kind": {"brainstorm": "..."}, "default": "..."}
class MockProvider final : public Provider {
public:
    MockProvider() = default;
    explicit MockProvider(const nlohmann::json& canned);
    static std::shared_ptr<MockProvider> from_file(const std::filesystem::path& path);

    std::string name() const override { return "mock"; }
    std::string complete(const PromptBundle& bundle) override;

    void set_response(const std::string& hash, std::string text);

private:
    std::mutex mutex_;
    std::map<std::string, std::string> by_hash_;
    std::map<std::string, std::string> by_kind_;
    std::optional<std::string> default_;
};

/// Forwards to another provider and keeps a copy of every bundle it was asked
/// to send, in call order.
class RecordingProvider final : public Provider {
public:
    explicit RecordingProvider(std::shared_ptr<Provider> inner) : inner_(std::move(inner)) {}

    std::string name() const override { return inner_->name(); }
    std::string complete(const PromptBundle& bundle) override;

    std::vector<PromptBundle> sent() const;
    void clear();

private:
    std::shared_ptr<Provider> inner_;
    mutable std::mutex mutex_;
    std::vector<PromptBundle> sent_;
};

struct HttpProviderConfig {
    std::string base_url;  // scheme://host[:port]
    std::string chat_path = "/v1/chat/completions";
    // When set, single-message summarization/understanding prompts go to this
    // completion-style endpoint as a raw "prompt" instead of a chat message.
    std::optional<std::string> completion_path;
    std::string api_key;
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{120};
};

/// OpenAI-compatible chat-completion client.
class HttpProvider final : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config);

    std::string name() const override { return "http:" + config_.base_url; }
    std::string complete(const PromptBundle& bundle) override;

    /// Request body for a bundle, as sent on the wire.
    nlohmann::json request_body(const PromptBundle& bundle, bool completion_style) const;
    bool uses_completion_endpoint(const PromptBundle& bundle) const;

private:
    HttpProviderConfig config_;
};

}  // namespace codm
