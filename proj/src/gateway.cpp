#include "codm/gateway.hpp"

#include <cmath>
#include <thread>

#include "codm/errors.hpp"

namespace codm {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::backoff_after(int attempt) const {
    const double factor = std::pow(multiplier, std::max(0, attempt - 1));
    return std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(base_backoff.count()) * factor));
}

json to_json(const GenerationRecord& r) {
    return {{"id", r.id},
            {"request_id", r.request_id},
            {"interface_kind", to_string(r.bundle.kind())},
            {"bundle", to_json(r.bundle)},
            {"output_text", r.output_text},
            {"provider", r.provider},
            {"latency_ms", r.latency_ms},
            {"attempts", r.attempts},
            {"created_at", r.created_at},
            {"thread_id", r.thread_id ? json(*r.thread_id) : json(nullptr)},
            {"encounter_id", r.encounter_id ? json(*r.encounter_id) : json(nullptr)}};
}

class Gateway::Slot {
public:
    explicit Slot(Gateway& g) : g_(g) {
        std::unique_lock lock(g_.mutex_);
        g_.slot_freed_.wait(lock, [&] { return g_.in_flight_ < g_.config_.max_concurrent; });
        ++g_.in_flight_;
        g_.peak_ = std::max(g_.peak_, g_.in_flight_);
    }
    ~Slot() {
        {
            std::lock_guard lock(g_.mutex_);
            --g_.in_flight_;
        }
        g_.slot_freed_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    Gateway& g_;
};

Gateway::Gateway(std::shared_ptr<Provider> provider, GenerationSink& sink, Clock& clock, IdGenerator& ids,
                 GatewayConfig config, Sleeper sleeper)
    : provider_(std::move(provider)),
      sink_(sink),
      clock_(clock),
      ids_(ids),
      config_(config),
      sleeper_(std::move(sleeper)) {
    if (!provider_) {
        throw ConfigError("gateway needs a provider");
    }
    if (config_.retry.max_attempts < 1 || config_.max_concurrent < 1) {
        throw ConfigError("retry attempts and concurrency cap must be >= 1");
    }
    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

int Gateway::in_flight() const {
    std::lock_guard lock(mutex_);
    return in_flight_;
}

int Gateway::peak_in_flight() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

namespace {

bool retryable(const Error& e) {
    if (dynamic_cast<const RateLimitError*>(&e) || dynamic_cast<const TimeoutError*>(&e)) {
        return true;
    }
    if (const auto* p = dynamic_cast<const ProviderError*>(&e)) {
        return p->transient();
    }
    return false;  // auth and validation failures never improve on retry
}

}  // namespace

std::string Gateway::call_with_retries(const PromptBundle& bundle, int& attempts) {
    for (attempts = 1;; ++attempts) {
        try {
            return provider_->complete(bundle);
        } catch (Error& e) {
            e.set_attempts(attempts);
            if (!retryable(e) || attempts >= config_.retry.max_attempts) {
                throw;
            }
            auto delay = config_.retry.backoff_after(attempts);
            if (const auto* rl = dynamic_cast<const RateLimitError*>(&e); rl && rl->retry_after()) {
                delay = std::max(delay, *rl->retry_after());
            }
            sleeper_(delay);
        }
    }
}

GenerationRecord Gateway::generate(const PromptBundle& bundle, GenerateOptions options) {
    if (options.request_id.empty()) {
        options.request_id = ids_.next("req");
    } else if (auto existing = sink_.find_generation_by_request(options.request_id)) {
        return *existing;
    }

    std::string text;
    int attempts = 0;
    const auto started = clock_.now();
    {
        Slot slot(*this);
        text = call_with_retries(bundle, attempts);
    }
    const auto finished = clock_.now();

    GenerationRecord record{
        .id = ids_.next("gen"),
        .request_id = options.request_id,
        .bundle = bundle,
        .output_text = std::move(text),
        .provider = provider_->name(),
        .latency_ms = std::max<std::int64_t>(
            0, std::chrono::duration_cast<std::chrono::milliseconds>(finished - started).count()),
        .attempts = attempts,
        .created_at = format_timestamp(finished),
        .thread_id = options.thread_id,
        .encounter_id = options.encounter_id,
    };
    return sink_.persist_generation(record);
}

}  // namespace codm
