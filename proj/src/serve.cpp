#include "fixtime/serve.hpp"

#include "fixtime/error.hpp"
#include "fixtime/strings.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>

namespace fixtime {

using nlohmann::json;

namespace {

std::vector<std::string_view> path_segments(std::string_view path) {
    if (const auto q = path.find('?'); q != std::string_view::npos) {
        path = path.substr(0, q);
    }
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        const auto next = path.find('/', pos);
        const auto end = next == std::string_view::npos ? path.size() : next;
        if (end > pos) {
            out.push_back(path.substr(pos, end - pos));
        }
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + 1;
    }
    return out;
}

std::vector<std::string> prefixed(const std::vector<std::string>& fields, std::string_view prefix) {
    std::vector<std::string> out;
    out.reserve(fields.size());
    for (const auto& f : fields) {
        out.push_back(std::string(prefix) + f);
    }
    return out;
}

std::optional<json> parse_body(std::string_view body, Response& error) {
    try {
        auto j = json::parse(body);
        if (!j.is_object()) {
            error = error_response(422, "request body must be a JSON object");
            return std::nullopt;
        }
        return j;
    } catch (const json::parse_error& e) {
        error = error_response(400, std::string("malformed JSON: ") + e.what());
        return std::nullopt;
    }
}

PredictionInput decode_input(const json& j, std::string_view prefix) {
    try {
        return prediction_input_from_json(j);
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), prefixed(e.fields(), prefix));
    }
}

Response predict_response(const StackedModel& model, const json& body) {
    const auto input = decode_input(body, "");
    const auto prediction = predict(model, input);
    auto out = prediction_to_json(prediction, Service::kDecimals);
    auto explanation = explanation_to_json(explain(model, input, prediction), Service::kDecimals);
    explanation.erase("prediction");
    out["explanation"] = std::move(explanation);
    return {200, std::move(out)};
}

Response whatif_response(const StackedModel& model, const json& body) {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : body.items()) {
        if (key != "issue" && key != "overrides") {
            unknown.push_back(key);
        }
    }
    if (!unknown.empty()) {
        return error_response(422, "unknown request keys", unknown);
    }
    const auto issue = body.find("issue");
    if (issue == body.end() || !issue->is_object()) {
        return error_response(422, "'issue' must be an object", {"issue"});
    }
    const auto input = decode_input(*issue, "issue.");
    Overrides overrides;
    if (const auto ov = body.find("overrides"); ov != body.end()) {
        try {
            overrides = overrides_from_json(*ov);
        } catch (const OverrideError& e) {
            return error_response(422, e.what(), prefixed(e.fields(), "overrides."));
        } catch (const ValidationError& e) {
            return error_response(422, e.what(), prefixed(e.fields(), "overrides."));
        }
    }
    return {200, whatif_to_json(whatif(model, input, overrides), Service::kDecimals)};
}

}  // namespace

Response error_response(int status, std::string message, std::vector<std::string> fields) {
    json body = {{"error", std::move(message)}};
    if (status == 422) {
        body["fields"] = std::move(fields);
    }
    return {status, std::move(body)};
}

void Service::add_bundle(std::string project, ModelBundle bundle) {
    if (project.empty()) {
        throw ConfigError("bundle project id must not be empty");
    }
    if (bundles_.contains(project)) {
        throw ConfigError("duplicate bundle for project '" + project + "'");
    }
    bundles_.emplace(std::move(project), std::move(bundle));
}

Service Service::from_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw ConfigError("bundle directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    Service service;
    for (const auto& file : files) {
        auto bundle = load_bundle(file);
        std::string id = bundle.model.project;
        if (id.empty()) {
            id = file.stem().string();
            if (id.ends_with(".bundle")) {
                id.resize(id.size() - 7);
            }
        }
        service.add_bundle(std::move(id), std::move(bundle));
    }
    return service;
}

std::vector<std::string> Service::projects() const {
    std::vector<std::string> out;
    out.reserve(bundles_.size());
    for (const auto& [id, _] : bundles_) {
        out.push_back(id);
    }
    return out;
}

const ModelBundle* Service::find(std::string_view project) const {
    const auto it = bundles_.find(project);
    return it == bundles_.end() ? nullptr : &it->second;
}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) const {
    const auto seg = path_segments(path);
    if (seg.empty() || seg[0] != "projects" || seg.size() > 3) {
        return error_response(404, "no route for " + std::string(path));
    }
    if (seg.size() == 1) {
        if (method != "GET") {
            return error_response(405, "method not allowed");
        }
        json list = json::array();
        for (const auto& [id, b] : bundles_) {
            list.push_back({{"id", id}, {"n_train", b.model.n_train}, {"n_topics", b.model.topics.k()}});
        }
        return {200, {{"projects", list}}};
    }
    const auto* bundle = find(seg[1]);
    if (bundle == nullptr) {
        return error_response(404, "unknown project '" + std::string(seg[1]) + "'");
    }
    if (seg.size() == 2) {
        return error_response(404, "no route for " + std::string(path));
    }
    const auto action = seg[2];
    const bool is_get = action == "insights" || action == "topics";
    const bool is_post = action == "predict" || action == "whatif";
    if (!is_get && !is_post) {
        return error_response(404, "no route for " + std::string(path));
    }
    if ((is_get && method != "GET") || (is_post && method != "POST")) {
        return error_response(405, "method not allowed");
    }
    if (action == "insights") {
        return {200, insights_to_json(bundle->insights)};
    }
    if (action == "topics") {
        return {200, topics::topic_report(bundle->model.topics)};
    }
    Response error;
    const auto parsed = parse_body(body, error);
    if (!parsed) {
        return error;
    }
    try {
        return action == "predict" ? predict_response(bundle->model, *parsed)
                                   : whatif_response(bundle->model, *parsed);
    } catch (const ValidationError& e) {
        return error_response(422, e.what(), e.fields());
    } catch (const OverrideError& e) {
        return error_response(422, e.what(), e.fields());
    } catch (const DimensionError& e) {
        return error_response(422, e.what(), {"embedding"});
    } catch (const Error& e) {
        return error_response(500, e.what());
    }
}

ServerConfig parse_address(std::string_view addr) {
    ServerConfig cfg;
    addr = trim(addr);
    std::string_view port_text = addr;
    if (const auto colon = addr.rfind(':'); colon != std::string_view::npos) {
        const auto host = addr.substr(0, colon);
        if (!host.empty()) {
            cfg.host = std::string(host);
        }
        port_text = addr.substr(colon + 1);
    }
    int port = 0;
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw ConfigError("invalid address '" + std::string(addr) + "', expected host:port");
    }
    cfg.port = port;
    return cfg;
}

void run_server(const Service& service, const ServerConfig& config) {
    httplib::Server server;
    const auto reply = [&service, &config](const httplib::Request& req, httplib::Response& res) {
        const auto r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
        if (!config.cors_origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", config.cors_origin);
        }
    };
    server.Get(".*", reply);
    server.Post(".*", reply);
    server.Options(".*", [&config](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        if (!config.cors_origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", config.cors_origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        }
    });
    if (!server.listen(config.host, config.port)) {
        throw Error("cannot listen on " + config.host + ":" + std::to_string(config.port));
    }
}

}  // namespace fixtime
