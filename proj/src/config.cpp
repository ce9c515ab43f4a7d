#include "codm/config.hpp"

#include <cstdlib>
#include <fstream>

#include "codm/errors.hpp"

namespace codm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

std::string require_string(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw ConfigError(std::string("config key '") + key + "' is required");
    }
    return it->get<std::string>();
}

ProviderSettings parse_provider(const json& doc, const fs::path& base) {
    ProviderSettings p;
    if (doc.is_null()) {
        return p;
    }
    if (!doc.is_object()) {
        throw ConfigError("'provider' must be an object");
    }
    for (const char* forbidden : {"api_key", "key", "token", "secret"}) {
        if (doc.contains(forbidden)) {
            throw ConfigError(std::string("provider credentials are read from the environment only; remove '") +
                              forbidden + "' from the config file");
        }
    }
    p.kind = get_or<std::string>(doc, "kind", "mock");
    if (p.kind != "mock" && p.kind != "http") {
        throw ConfigError("provider.kind must be 'mock' or 'http'");
    }
    if (const auto mock = get_or<std::string>(doc, "mock_responses", ""); !mock.empty()) {
        p.mock_responses = resolve(base, mock);
    }
    p.base_url = get_or<std::string>(doc, "base_url", "");
    if (p.kind == "http" && p.base_url.empty()) {
        throw ConfigError("provider.base_url is required for the http provider");
    }
    p.chat_path = get_or<std::string>(doc, "chat_path", p.chat_path);
    if (const auto cp = get_or<std::string>(doc, "completion_path", ""); !cp.empty()) {
        p.completion_path = cp;
    }
    p.api_key_env = get_or<std::string>(doc, "api_key_env", p.api_key_env);
    p.timeout = std::chrono::seconds(get_or<int>(doc, "timeout_s", 120));
    p.retry.max_attempts = get_or<int>(doc, "max_attempts", 3);
    p.retry.base_backoff = std::chrono::milliseconds(get_or<int>(doc, "backoff_ms", 500));
    p.max_concurrent = get_or<int>(doc, "max_concurrent", 8);
    p.max_tokens = get_or<int>(doc, "max_tokens", kDefaultMaxTokens);
    if (p.retry.max_attempts < 1 || p.max_concurrent < 1 || p.max_tokens < 1 || p.timeout.count() < 1) {
        throw ConfigError("provider limits must be positive");
    }
    if (const auto it = doc.find("models"); it != doc.end()) {
        if (!it->is_object()) {
            throw ConfigError("provider.models must map interface kinds to model ids");
        }
        for (const auto& [kind, model] : it->items()) {
            try {
                p.models[parse_interface_kind(kind)] = model.get<std::string>();
            } catch (const UnknownKindError& e) {
                throw ConfigError(e.what());
            }
        }
    }
    return p;
}

}  // namespace

ApiConfig parse_config(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    ApiConfig c;
    c.bind_address = get_or<std::string>(doc, "bind", c.bind_address);
    c.port = get_or<int>(doc, "port", c.port);
    if (c.port < 0 || c.port > 65535) {
        throw ConfigError("port out of range");
    }
    c.monsters_dir = resolve(base_dir, require_string(doc, "monsters_dir"));
    c.settings_dir = resolve(base_dir, require_string(doc, "settings_dir"));

    const auto tables = doc.find("tables");
    if (tables == doc.end() || !tables->is_object() || tables->empty()) {
        throw ConfigError("config key 'tables' must map table names to files");
    }
    for (const auto& [name, path] : tables->items()) {
        if (!path.is_string()) {
            throw ConfigError("table '" + name + "' must be a file path");
        }
        c.tables[name] = resolve(base_dir, path.get<std::string>());
    }
    c.default_table = get_or<std::string>(doc, "default_table", c.tables.begin()->first);
    if (!c.tables.count(c.default_table)) {
        throw ConfigError("default_table '" + c.default_table + "' is not listed in 'tables'");
    }

    c.database = resolve(base_dir, get_or<std::string>(doc, "database", "codm.db"));
    if (const auto persona_file = get_or<std::string>(doc, "persona_file", ""); !persona_file.empty()) {
        std::ifstream in(resolve(base_dir, persona_file));
        if (!in) {
            throw ConfigError("cannot read persona_file " + persona_file);
        }
        c.persona.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        while (!c.persona.empty() && (c.persona.back() == '\n' || c.persona.back() == '\r')) {
            c.persona.pop_back();
        }
    }
    c.persona = get_or<std::string>(doc, "persona", c.persona);
    if (c.persona.empty()) {
        throw ConfigError("persona must not be empty");
    }
    const auto budget = get_or<long long>(doc, "token_budget", static_cast<long long>(c.token_budget));
    if (budget < 0) {
        throw ConfigError("token_budget must be >= 0");
    }
    c.token_budget = static_cast<std::size_t>(budget);
    c.idle_timeout = std::chrono::seconds(get_or<long long>(doc, "idle_timeout_s", c.idle_timeout.count()));
    c.queue_capacity = get_or<int>(doc, "queue_capacity", c.queue_capacity);
    if (c.queue_capacity < 0 || c.idle_timeout.count() < 0) {
        throw ConfigError("queue_capacity and idle_timeout_s must be >= 0");
    }
    c.provider = parse_provider(doc.value("provider", json(nullptr)), base_dir);
    if (const auto env = get_or<std::string>(doc, "auth_token_env", ""); !env.empty()) {
        c.auth_token_env = env;
    }
    return c;
}

ApiConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

ProfileRegistry configured_profiles(const ProviderSettings& provider) {
    ProfileRegistry registry;
    for (const auto kind : kAllInterfaceKinds) {
        DecodingProfile p = registry.get_profile(kind);
        p.max_tokens = provider.max_tokens;
        if (const auto it = provider.models.find(kind); it != provider.models.end()) {
            p.model_id = it->second;
        }
        registry.register_profile(kind, p);
    }
    return registry;
}

namespace {

std::optional<std::string> getenv_string(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr || *v == '\0') {
        return std::nullopt;
    }
    return std::string(v);
}

std::shared_ptr<Provider> make_provider(const ProviderSettings& p) {
    if (p.kind == "mock") {
        return p.mock_responses ? std::shared_ptr<Provider>(MockProvider::from_file(*p.mock_responses))
                                : std::make_shared<MockProvider>();
    }
    HttpProviderConfig hc;
    hc.base_url = p.base_url;
    hc.chat_path = p.chat_path;
    hc.completion_path = p.completion_path;
    hc.api_key = getenv_string(p.api_key_env).value_or("");
    hc.read_timeout = p.timeout;
    return std::make_shared<HttpProvider>(std::move(hc));
}

}  // namespace

Application::Application(ApiConfig config, AppOverrides overrides) : config_(std::move(config)) {
    kb_ = std::make_shared<const KnowledgeBase>(load_knowledge_base(config_.monsters_dir, config_.settings_dir));
    for (const auto& [name, path] : config_.tables) {
        tables_.emplace(name, load_encounter_table(path, *kb_));
    }
    clock_ = overrides.clock ? overrides.clock : std::make_shared<SystemClock>();
    ids_ = overrides.ids ? overrides.ids : std::make_shared<RandomIdGenerator>();
    provider_ = overrides.provider ? overrides.provider : make_provider(config_.provider);
    store_ = std::make_unique<Store>(overrides.database.value_or(config_.database.string()));

    GatewayConfig gc;
    gc.retry = config_.provider.retry;
    gc.max_concurrent = config_.provider.max_concurrent;
    gateway_ = std::make_unique<Gateway>(provider_, *store_, *clock_, *ids_, gc, overrides.sleeper);

    SessionConfig sc;
    sc.persona = config_.persona;
    sc.token_budget = config_.token_budget;
    sc.idle_timeout = config_.idle_timeout;
    sc.queue_capacity = config_.queue_capacity;
    sc.profiles = configured_profiles(config_.provider);
    sessions_ = std::make_unique<SessionManager>(*kb_, *store_, *gateway_, *clock_, *ids_, std::move(sc));

    if (config_.auth_token_env) {
        auth_token_ = getenv_string(*config_.auth_token_env);
        if (!auth_token_) {
            throw ConfigError("auth_token_env is set but $" + *config_.auth_token_env + " is empty");
        }
    }
}

const EncounterTable& Application::table(const std::string& name) const {
    const auto it = tables_.find(name);
    if (it == tables_.end()) {
        throw ValidationError("unknown encounter table '" + name + "'");
    }
    return it->second;
}

}  // namespace codm
