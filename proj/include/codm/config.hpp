#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "codm/encounter.hpp"
#include "codm/gateway.hpp"
#include "codm/knowledge_base.hpp"
#include "codm/session.hpp"
#include "codm/store.hpp"

namespace codm {

struct ProviderSettings {
    std::string kind = "mock";  // "mock" | "http"
    std::optional<std::filesystem::path> mock_responses;
    std::string base_url;
    std::string chat_path = "/v1/chat/completions";
    std::optional<std::string> completion_path;
    std::string api_key_env = "CODM_PROVIDER_API_KEY";
    std::chrono::seconds timeout{120};
    RetryPolicy retry;
    int max_concurrent = 8;
    std::map<InterfaceKind, std::string> models;
    int max_tokens = kDefaultMaxTokens;
};

struct ApiConfig {
    std::string bind_address = "127.0.0.1";
    int port = 8080;
    std::filesystem::path monsters_dir;
    std::filesystem::path settings_dir;
    std::map<std::string, std::filesystem::path> tables;  // name -> file
    std::string default_table;
    std::filesystem::path database = "codm.db";
    std::string persona = std::string(kDefaultPersona);
    std::size_t token_budget = 12000;
    std::chrono::seconds idle_timeout{std::chrono::hours(24)};
    int queue_capacity = 4;
    ProviderSettings provider;
    // Shared bearer token for the HTTP API, read from this env var when set.
    std::optional<std::string> auth_token_env;
};

/// Relative paths are resolved against `base_dir`. Throws ConfigError. Provider
/// credentials are never accepted from the file.
ApiConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ApiConfig load_config(const std::filesystem::path& path);

/// Registry holding the published sampling values with the configured model
/// ids and max_tokens applied.
ProfileRegistry configured_profiles(const ProviderSettings& provider);

/// Test and tooling hooks; anything left empty gets the production default.
struct AppOverrides {
    std::shared_ptr<Provider> provider;
    std::shared_ptr<Clock> clock;
    std::shared_ptr<IdGenerator> ids;
    Gateway::Sleeper sleeper;
    std::optional<std::string> database;  // e.g. ":memory:"
};

/// Composition root: loads and validates the knowledge base and tables, opens
/// the store and wires gateway and session manager. Construction fails on any
/// invalid input, so a service never starts half-configured.
class Application {
public:
    explicit Application(ApiConfig config, AppOverrides overrides = {});

    const ApiConfig& config() const { return config_; }
    const KnowledgeBase& knowledge_base() const { return *kb_; }
    const EncounterTable& table(const std::string& name) const;  // throws ValidationError
    const std::map<std::string, EncounterTable>& tables() const { return tables_; }
    Store& store() { return *store_; }
    Gateway& gateway() { return *gateway_; }
    SessionManager& sessions() { return *sessions_; }
    Provider& provider() { return *provider_; }
    std::optional<std::string> auth_token() const { return auth_token_; }

private:
    ApiConfig config_;
    std::shared_ptr<const KnowledgeBase> kb_;
    std::map<std::string, EncounterTable> tables_;
    std::shared_ptr<Clock> clock_;
    std::shared_ptr<IdGenerator> ids_;
    std::shared_ptr<Provider> provider_;
    std::unique_ptr<Store> store_;
    std::unique_ptr<Gateway> gateway_;
    std::unique_ptr<SessionManager> sessions_;
    std::optional<std::string> auth_token_;
};

}  // namespace codm
