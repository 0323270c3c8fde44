#pragma once

#include "fixtime/eval.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fixtime {

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// Request routing over immutable model bundles. handle() is const and safe
/// to call from concurrent request threads.
class Service {
  public:
    /// Probabilities in responses are rounded to this many decimals.
    static constexpr int kDecimals = 4;

    void add_bundle(std::string project, ModelBundle bundle);
    /// Loads every `*.json` bundle in `dir`; the project id is the model's
    /// project name, or the file stem when that is empty.
    [[nodiscard]] static Service from_directory(const std::filesystem::path& dir);

    [[nodiscard]] std::vector<std::string> projects() const;
    [[nodiscard]] const ModelBundle* find(std::string_view project) const;

    /// GET /projects, POST /projects/{id}/predict, POST /projects/{id}/whatif,
    /// GET /projects/{id}/insights, GET /projects/{id}/topics.
    [[nodiscard]] Response handle(std::string_view method, std::string_view path, std::string_view body) const;

  private:
    std::map<std::string, ModelBundle, std::less<>> bundles_;
};

[[nodiscard]] Response error_response(int status, std::string message, std::vector<std::string> fields = {});

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Value of Access-Control-Allow-Origin; empty disables CORS headers.
    std::string cors_origin = "*";
};

/// "host:port", ":port" or "port". Throws ConfigError.
[[nodiscard]] ServerConfig parse_address(std::string_view addr);

/// Blocks serving HTTP until the process is stopped.
void run_server(const Service& service, const ServerConfig& config);

}  // namespace fixtime
