#include "codm/api_service.hpp"

#include <httplib.h>

#include <regex>
#include <thread>

#include "codm/util.hpp"

namespace codm {

using nlohmann::json;

namespace {

struct Reply {
    int status = 200;
    json body;
};

using Params = std::vector<std::string>;

// Client-side mistakes that never reach the provider.
const std::map<std::string, int>& status_by_code() {
    static const std::map<std::string, int> table = {
        {"unknown_setting", 404},     {"unknown_encounter", 404},  {"unknown_thread", 404},
        {"unknown_generation", 404},  {"empty_table", 422},        {"validation_error", 422},
        {"parse_error", 422},         {"unknown_kind", 422},       {"tool_invocation", 422},
        {"unresolved_monster", 422},  {"no_summary", 409},         {"thread_busy", 409},
        {"thread_closed", 409},       {"pending_message", 409},    {"no_pending_message", 409},
        {"duplicate_feedback", 409},  {"duplicate_id", 409},       {"auth_error", 502},
        {"rate_limited", 502},        {"timeout", 502},            {"provider_error", 502},
    };
    return table;
}

class BadRequest : public Error {
public:
    explicit BadRequest(const std::string& message) : Error("bad_request", message) {}
};

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) {
        return json::object();
    }
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        throw BadRequest("request body must be a JSON object");
    }
    return body;
}

template <typename T>
std::optional<T> field(const json& body, const char* key) {
    const auto it = body.find(key);
    if (it == body.end() || it->is_null()) {
        return std::nullopt;
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw BadRequest(std::string("field '") + key + "' has the wrong type");
    }
}

std::string required_string(const json& body, const char* key) {
    auto v = field<std::string>(body, key);
    if (!v) {
        throw BadRequest(std::string("field '") + key + "' is required");
    }
    return *v;
}

bool debug_requested(const httplib::Request& req, const json& body) {
    if (field<bool>(body, "debug").value_or(false)) {
        return true;
    }
    const auto q = req.get_param_value("debug");
    return q == "1" || q == "true";
}

json generation_json(const GenerationRecord& g, bool debug) {
    json out = to_json(g);
    if (!debug) {
        out.erase("bundle");
    }
    return out;
}

std::string to_regex(const std::string& path) {
    static const std::regex param(R"(\{[^/}]+\})");
    return "^" + std::regex_replace(path, param, "([^/]+)") + "$";
}

}  // namespace

int http_status_for(const Error& e) {
    if (e.attempts() > 0) {
        return 502;
    }
    if (e.code() == "bad_request") {
        return 400;
    }
    const auto& table = status_by_code();
    const auto it = table.find(e.code());
    return it == table.end() ? 500 : it->second;
}

json error_body(const Error& e) {
    json out = {{"error", e.code()}, {"message", e.what()}};
    if (e.attempts() > 0) {
        out["attempts"] = e.attempts();
    }
    if (const auto* rl = dynamic_cast<const RateLimitError*>(&e); rl && rl->retry_after()) {
        out["retry_after_ms"] = rl->retry_after()->count();
    }
    if (const auto* pe = dynamic_cast<const ProviderError*>(&e)) {
        out["transient"] = pe->transient();
    }
    return out;
}

struct ApiService::Impl {
    using Handler = Reply (Impl::*)(const httplib::Request&, const Params&);
    struct Route {
        RouteSpec spec;
        Handler handler;
        bool open = false;  // reachable without the shared token
    };

    static const std::vector<Route>& routes();

    explicit Impl(Application& a) : app(a) {}

    Application& app;
    httplib::Server server;
    std::thread runner;

    // ---- handlers --------------------------------------------------------

    Reply health(const httplib::Request&, const Params&) { return {200, {{"status", "ok"}}}; }

    Reply openapi(const httplib::Request&, const Params&) { return {200, openapi_document()}; }

    Reply settings(const httplib::Request&, const Params&) {
        json out = json::array();
        for (const auto& [id, s] : app.knowledge_base().settings()) {
            out.push_back({{"id", s.id}, {"name", s.name}, {"description", s.description}, {"tags", s.tags}});
        }
        return {200, out};
    }

    Reply tables(const httplib::Request&, const Params&) {
        json names = json::array();
        for (const auto& [name, table] : app.tables()) {
            names.push_back({{"name", name}, {"entries", table.size()}});
        }
        return {200, {{"default", app.config().default_table}, {"tables", names}}};
    }

    Reply roll(const httplib::Request& req, const Params&) {
        const json body = parse_body(req);
        const auto setting_id = required_string(body, "setting_id");
        const auto seed = field<std::uint64_t>(body, "seed").value_or(entropy_seed());
        // "table" names a configured table or carries one inline.
        if (const auto it = body.find("table"); it != body.end() && it->is_array()) {
            const auto inline_table = parse_encounter_table(*it, app.knowledge_base(), "request body");
            return {201, to_json(app.sessions().roll_encounter(inline_table, setting_id, seed))};
        }
        const auto table_name = field<std::string>(body, "table").value_or(app.config().default_table);
        return {201, to_json(app.sessions().roll_encounter(app.table(table_name), setting_id, seed))};
    }

    Reply get_encounter(const httplib::Request&, const Params& p) {
        return {200, to_json(app.sessions().encounter(p[0]))};
    }

    Reply understand(const httplib::Request& req, const Params& p) {
        const json body = parse_body(req);
        const auto variant = parse_interface_kind(field<std::string>(body, "variant").value_or("summarize"));
        if (variant != InterfaceKind::summarization && variant != InterfaceKind::understanding) {
            throw ValidationError("variant must be 'summarize' or 'understand'");
        }
        const auto seed = field<std::uint64_t>(body, "seed").value_or(entropy_seed());
        const auto g = app.sessions().understand(p[0], variant, seed);
        return {201, generation_json(g, debug_requested(req, body))};
    }

    Reply brainstorm(const httplib::Request& req, const Params& p) {
        const json body = parse_body(req);
        const auto include_summary = field<bool>(body, "include_summary").value_or(false);
        const auto seed = field<std::uint64_t>(body, "seed").value_or(entropy_seed());
        const auto user = field<std::string>(body, "user_id").value_or("dm");
        return {201, to_json(app.sessions().open_brainstorm(p[0], include_summary, seed, user))};
    }

    Reply chat(const httplib::Request& req, const Params&) {
        const json body = parse_body(req);
        const auto user = field<std::string>(body, "user_id").value_or("dm");
        return {201, to_json(app.sessions().open_chat(user, field<std::string>(body, "persona")))};
    }

    Reply get_thread(const httplib::Request&, const Params& p) { return {200, to_json(app.sessions().thread(p[0]))}; }

    Reply post_message(const httplib::Request& req, const Params& p) {
        const json body = parse_body(req);
        const auto text = required_string(body, "text");
        const auto user = field<std::string>(body, "user_id").value_or("dm");
        const auto g = app.sessions().post_user_message(p[0], text, user);
        return {201, generation_json(g, debug_requested(req, body))};
    }

    Reply retry(const httplib::Request& req, const Params& p) {
        const json body = parse_body(req);
        return {201, generation_json(app.sessions().retry_pending(p[0]), debug_requested(req, body))};
    }

    Reply reopen(const httplib::Request&, const Params& p) { return {200, to_json(app.sessions().reopen(p[0]))}; }

    Reply export_thread(const httplib::Request&, const Params& p) {
        return {200, export_transcript(app.sessions().thread(p[0]))};
    }

    Reply replay(const httplib::Request&, const Params& p) {
        int seq = 0;
        try {
            seq = std::stoi(p[1]);
        } catch (const std::exception&) {
            throw BadRequest("message sequence must be an integer");
        }
        return {200, to_json(app.sessions().replay_request(p[0], seq))};
    }

    Reply get_generation(const httplib::Request& req, const Params& p) {
        return {200, generation_json(app.sessions().generation(p[0]), debug_requested(req, json::object()))};
    }

    Reply feedback(const httplib::Request& req, const Params& p) {
        const json body = parse_body(req);
        const auto polarity = parse_polarity(required_string(body, "polarity"));
        const auto user = field<std::string>(body, "user_id").value_or("dm");
        return {201, to_json(app.sessions().record_feedback(p[0], polarity, field<std::string>(body, "comment"), user))};
    }

    Reply tallies(const httplib::Request&, const Params&) {
        json out = json::object();
        for (const auto kind : kAllInterfaceKinds) {
            out[std::string(to_string(kind))] = to_json(app.sessions().tally_feedback(kind));
        }
        return {200, out};
    }

    // ---- plumbing --------------------------------------------------------

    bool authorized(const httplib::Request& req) const {
        const auto token = app.auth_token();
        return !token || req.get_header_value("Authorization") == "Bearer " + *token;
    }

    void dispatch(const Route& route, const httplib::Request& req, httplib::Response& res) {
        Reply reply;
        if (!route.open && !authorized(req)) {
            reply = {401, {{"error", "unauthorized"}, {"message", "missing or invalid bearer token"}}};
        } else {
            try {
                const Params params(req.matches.begin() + 1, req.matches.end());
                reply = (this->*route.handler)(req, params);
            } catch (const Error& e) {
                reply = {http_status_for(e), error_body(e)};
            } catch (const std::exception& e) {
                reply = {500, {{"error", "internal_error"}, {"message", e.what()}}};
            }
        }
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    }

    void install() {
        for (const auto& route : routes()) {
            const auto pattern = to_regex(route.spec.path);
            auto fn = [this, &route](const httplib::Request& req, httplib::Response& res) { dispatch(route, req, res); };
            if (route.spec.method == "GET") {
                server.Get(pattern, fn);
            } else {
                server.Post(pattern, fn);
            }
        }
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                res.set_content(json{{"error", res.status == 404 ? "no_route" : "http_error"},
                                     {"message", httplib::status_message(res.status)}}
                                    .dump(),
                                "application/json");
            }
        });
        // Generations are synchronous; allow slow providers to finish.
        server.set_read_timeout(120, 0);
        server.set_write_timeout(120, 0);
    }
};

const std::vector<ApiService::Impl::Route>& ApiService::Impl::routes() {
    static const std::vector<Route> table = {
        {{"GET", "/health"}, &Impl::health, true},
        {{"GET", "/openapi.json"}, &Impl::openapi, true},
        {{"GET", "/settings"}, &Impl::settings},
        {{"GET", "/tables"}, &Impl::tables},
        {{"POST", "/encounters/roll"}, &Impl::roll},
        {{"GET", "/encounters/{id}"}, &Impl::get_encounter},
        {{"POST", "/encounters/{id}/understand"}, &Impl::understand},
        {{"POST", "/encounters/{id}/brainstorm"}, &Impl::brainstorm},
        {{"POST", "/chat"}, &Impl::chat},
        {{"GET", "/threads/{id}"}, &Impl::get_thread},
        {{"POST", "/threads/{id}/messages"}, &Impl::post_message},
        {{"POST", "/threads/{id}/retry"}, &Impl::retry},
        {{"POST", "/threads/{id}/reopen"}, &Impl::reopen},
        {{"GET", "/threads/{id}/export"}, &Impl::export_thread},
        {{"GET", "/threads/{id}/messages/{seq}/request"}, &Impl::replay},
        {{"GET", "/generations/{id}"}, &Impl::get_generation},
        {{"POST", "/generations/{id}/feedback"}, &Impl::feedback},
        {{"GET", "/feedback/tallies"}, &Impl::tallies},
    };
    return table;
}

std::vector<RouteSpec> api_routes() {
    std::vector<RouteSpec> out;
    for (const auto& r : ApiService::Impl::routes()) {
        out.push_back(r.spec);
    }
    return out;
}

ApiService::ApiService(Application& app) : impl_(std::make_unique<Impl>(app)) { impl_->install(); }

ApiService::~ApiService() { stop(); }

int ApiService::bind(const std::string& host, int port) {
    if (port == 0) {
        return impl_->server.bind_to_any_port(host);
    }
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiService::listen_after_bind() { return impl_->server.listen_after_bind(); }

int ApiService::start(const std::string& host, int port) {
    const int bound = bind(host, port);
    if (bound < 0) {
        return bound;
    }
    impl_->runner = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void ApiService::stop() {
    impl_->server.stop();
    if (impl_->runner.joinable()) {
        impl_->runner.join();
    }
}

}  // namespace codm
