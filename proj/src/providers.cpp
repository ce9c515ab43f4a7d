#include <fstream>

#include <httplib.h>

#include "codm/errors.hpp"
#include "codm/gateway.hpp"

namespace codm {

using nlohmann::json;

// ---- MockProvider -----------------------------------------------------------

MockProvider::MockProvider(const json& canned) {
    if (!canned.is_object()) {
        throw ConfigError("mock response file must hold a JSON object");
    }
    if (const auto it = canned.find("responses"); it != canned.end()) {
        for (const auto& [hash, text] : it->items()) {
            by_hash_[hash] = text.get<std::string>();
        }
    }
    if (const auto it = canned.find("by_kind"); it != canned.end()) {
        for (const auto& [kind, text] : it->items()) {
            by_kind_[std::string(to_string(parse_interface_kind(kind)))] = text.get<std::string>();
        }
    }
    if (const auto it = canned.find("default"); it != canned.end()) {
        default_ = it->get<std::string>();
    }
}

std::shared_ptr<MockProvider> MockProvider::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open mock response file " + path.string());
    }
    try {
        return std::make_shared<MockProvider>(json::parse(in));
    } catch (const json::exception& e) {
        throw ConfigError("bad mock response file " + path.string() + ": " + e.what());
    }
}

void MockProvider::set_response(const std::string& hash, std::string text) {
    std::lock_guard lock(mutex_);
    by_hash_[hash] = std::move(text);
}

std::string MockProvider::complete(const PromptBundle& bundle) {
    const std::string hash = bundle_hash(bundle);
    std::lock_guard lock(mutex_);
    if (const auto it = by_hash_.find(hash); it != by_hash_.end()) {
        return it->second;
    }
    if (const auto it = by_kind_.find(std::string(to_string(bundle.kind()))); it != by_kind_.end()) {
        return it->second;
    }
    if (default_) {
        return *default_;
    }
    return "Mock reply " + hash.substr(0, 12) + ".";
}

// ---- RecordingProvider ------------------------------------------------------

std::string RecordingProvider::complete(const PromptBundle& bundle) {
    {
        std::lock_guard lock(mutex_);
        sent_.push_back(bundle);
    }
    return inner_->complete(bundle);
}

std::vector<PromptBundle> RecordingProvider::sent() const {
    std::lock_guard lock(mutex_);
    return sent_;
}

void RecordingProvider::clear() {
    std::lock_guard lock(mutex_);
    sent_.clear();
}

// ---- HttpProvider -----------------------------------------------------------

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw ConfigError("http provider needs a base_url");
    }
}

bool HttpProvider::uses_completion_endpoint(const PromptBundle& bundle) const {
    return config_.completion_path && bundle.messages().size() == 1 &&
           (bundle.kind() == InterfaceKind::summarization || bundle.kind() == InterfaceKind::understanding);
}

json HttpProvider::request_body(const PromptBundle& bundle, bool completion_style) const {
    const DecodingProfile& p = bundle.profile();
    json body;
    if (!p.model_id.empty()) {
        body["model"] = p.model_id;
    }
    if (completion_style) {
        body["prompt"] = bundle.messages().front().content;
    } else {
        json messages = json::array();
        for (const auto& m : bundle.messages()) {
            messages.push_back(to_json(m));
        }
        body["messages"] = messages;
    }
    body["temperature"] = p.temperature;
    body["top_p"] = p.top_p;
    body["frequency_penalty"] = p.frequency_penalty;
    body["presence_penalty"] = p.presence_penalty;
    body["max_tokens"] = p.max_tokens;
    body["stream"] = false;
    return body;
}

namespace {

std::optional<std::chrono::milliseconds> parse_retry_after(const httplib::Result& res) {
    if (!res->has_header("Retry-After")) {
        return std::nullopt;
    }
    try {
        const double secs = std::stod(res->get_header_value("Retry-After"));
        return std::chrono::milliseconds(static_cast<std::int64_t>(secs * 1000));
    } catch (const std::exception&) {
        return std::nullopt;  // HTTP-date form is not worth honoring
    }
}

std::string extract_text(const json& reply) {
    const auto& choices = reply.at("choices");
    if (!choices.is_array() || choices.empty()) {
        throw ProviderError("provider reply has no choices", false);
    }
    const auto& first = choices.front();
    if (first.contains("message")) {
        return first["message"].at("content").get<std::string>();
    }
    return first.at("text").get<std::string>();
}

}  // namespace

std::string HttpProvider::complete(const PromptBundle& bundle) {
    const bool completion_style = uses_completion_endpoint(bundle);
    const std::string path = completion_style ? *config_.completion_path : config_.chat_path;

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.connect_timeout);
    client.set_read_timeout(config_.read_timeout);
    client.set_write_timeout(config_.read_timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    auto res = client.Post(path, headers, request_body(bundle, completion_style).dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        const std::string what = httplib::to_string(err);
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write) {
            throw TimeoutError("provider request timed out: " + what);
        }
        throw ProviderError("provider request failed: " + what, true);
    }

    const int status = res->status;
    const std::string snippet = res->body.substr(0, 300);
    if (status == 401 || status == 403) {
        throw AuthError("provider rejected credentials (" + std::to_string(status) + ")");
    }
    if (status == 429) {
        throw RateLimitError("provider rate limit: " + snippet, parse_retry_after(res));
    }
    if (status == 408 || status == 504) {
        throw TimeoutError("provider timed out (" + std::to_string(status) + ")");
    }
    if (status >= 500) {
        throw ProviderError("provider error " + std::to_string(status) + ": " + snippet, true);
    }
    if (status == 400 || status == 404 || status == 422) {
        throw ValidationError("provider rejected request (" + std::to_string(status) + "): " + snippet);
    }
    if (status < 200 || status >= 300) {
        throw ProviderError("unexpected provider status " + std::to_string(status), false);
    }
    try {
        return extract_text(json::parse(res->body));
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unreadable provider reply: ") + e.what(), false);
    }
}

}  // namespace codm
