#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "codm/config.hpp"
#include "codm/errors.hpp"

namespace codm {

struct RouteSpec {
    std::string method;  // "GET" | "POST"
    std::string path;    // template, e.g. "/threads/{id}/messages"

    bool operator==(const RouteSpec&) const = default;
    auto operator<=>(const RouteSpec&) const = default;
};

/// Every route the service registers, in registration order.
std::vector<RouteSpec> api_routes();

/// The machine-readable API description served at /openapi.json.
const nlohmann::json& openapi_document();

/// HTTP status for a library error. Errors raised after one or more provider
/// attempts always map to 502.
int http_status_for(const Error& e);
nlohmann::json error_body(const Error& e);

/// Synchronous JSON-over-HTTP facade over an Application. The Application must
/// outlive the service.
class ApiService {
public:
    explicit ApiService(Application& app);
    ~ApiService();
    ApiService(const ApiService&) = delete;
    ApiService& operator=(const ApiService&) = delete;

    /// Binds without serving; port 0 picks a free port. Returns the bound port
    /// or -1 on failure.
    int bind(const std::string& host, int port);
    /// Serves on the bound socket until stop(). Blocks.
    bool listen_after_bind();
    /// bind() then serve on a background thread. Returns the bound port.
    int start(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    friend std::vector<RouteSpec> api_routes();
    std::unique_ptr<Impl> impl_;
};

}  // namespace codm
