#include <chrono>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "everify/http_client.hpp"

namespace everify {

namespace {

using nlohmann::json;

constexpr std::string_view kCompletionsPath = "/chat/completions";

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

std::string token_from_env(const std::string& env_var) {
    if (env_var.empty()) return {};
    const char* v = std::getenv(env_var.c_str());
    return v ? std::string(v) : std::string{};
}

HttpClient::HttpClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    const std::string& url = endpoint_.url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    host_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? std::string{} : url.substr(path_start);
    while (!path_.empty() && path_.back() == '/') path_.pop_back();
    if (!ends_with(path_, kCompletionsPath)) path_ += kCompletionsPath;
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.rfind("https://", 0) == 0) throw std::invalid_argument("built without TLS support: " + url);
#endif
}

HttpClient::~HttpClient() = default;

Generation HttpClient::generate(const std::string& prompt, const GenerationParams& params) {
    json body = {
        {"model", endpoint_.model},
        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", params.temperature},
        {"top_p", params.top_p},
        {"max_tokens", params.max_tokens},
        // Many servers reject seeds beyond 31 bits.
        {"seed", static_cast<std::int64_t>(params.seed & 0x7fffffffULL)},
    };
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!endpoint_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.auth_token);

    std::string last_error;
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay = endpoint_.backoff_seconds * static_cast<double>(1 << std::min(attempt - 1, 10));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client cli(host_);
        const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::duration<double>(endpoint_.timeout_seconds));
        cli.set_connection_timeout(timeout);
        cli.set_read_timeout(timeout);
        cli.set_write_timeout(timeout);
        auto res = cli.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
            if (retryable_status(res->status)) continue;
            throw ClientError(endpoint_.url + ": " + last_error);
        }
        try {
            const json reply = json::parse(res->body);
            Generation g;
            const auto& content = reply.at("choices").at(0).at("message").at("content");
            g.text = content.is_null() ? std::string{} : content.get<std::string>();
            if (auto it = reply.find("usage"); it != reply.end() && it->is_object()) {
                g.completion_tokens = it->value("completion_tokens", std::int64_t{0});
                g.prompt_tokens = it->value("prompt_tokens", std::int64_t{0});
            }
            if (g.completion_tokens < 0 || g.prompt_tokens < 0) throw ClientError("negative token usage");
            return g;
        } catch (const json::exception& e) {
            throw ClientError(endpoint_.url + ": malformed reply: " + e.what());
        }
    }
    throw ClientError(endpoint_.url + ": giving up after " + std::to_string(endpoint_.max_retries + 1) +
                      " attempts: " + last_error);
}

struct MockServer::Impl {
    std::shared_ptr<MockScript> script;
    httplib::Server server;
    bool bound = false;
};

MockServer::MockServer(std::shared_ptr<MockScript> script) : impl_(std::make_unique<Impl>()) {
    if (!script) throw std::invalid_argument("MockServer requires a script");
    impl_->script = std::move(script);
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        json request;
        try {
            request = json::parse(req.body);
        } catch (const json::exception& e) {
            res.status = 400;
            res.set_content(json{{"error", {{"message", e.what()}}}}.dump(), "application/json");
            return;
        }
        const std::string model = request.value("model", std::string{});
        std::string prompt;
        if (auto it = request.find("messages"); it != request.end() && it->is_array()) {
            for (const auto& m : *it) {
                if (!prompt.empty()) prompt += "\n";
                if (m.contains("content") && m["content"].is_string()) prompt += m["content"].get<std::string>();
            }
        }
        GenerationParams params;
        params.temperature = request.value("temperature", 1.0);
        params.top_p = request.value("top_p", 1.0);
        params.max_tokens = request.value("max_tokens", std::int64_t{16384});
        params.seed = request.value("seed", std::uint64_t{0});
        try {
            const Generation g = impl_->script->respond(model, prompt, params);
            const json reply = {
                {"object", "chat.completion"},
                {"model", model},
                {"choices", json::array({{{"index", 0},
                                          {"message", {{"role", "assistant"}, {"content", g.text}}},
                                          {"finish_reason", "stop"}}})},
                {"usage",
                 {{"prompt_tokens", g.prompt_tokens},
                  {"completion_tokens", g.completion_tokens},
                  {"total_tokens", g.prompt_tokens + g.completion_tokens}}},
            };
            res.set_content(reply.dump(), "application/json");
        } catch (const ClientError& e) {
            res.status = 500;
            res.set_content(json{{"error", {{"message", e.what()}}}}.dump(), "application/json");
        }
    };
    impl_->server.Post("/v1/chat/completions", handler);
    impl_->server.Post("/chat/completions", handler);
    impl_->server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });
}

MockServer::~MockServer() { stop(); }

int MockServer::bind(const std::string& host, int port) {
    int bound_port = port;
    if (port == 0) {
        bound_port = impl_->server.bind_to_any_port(host);
        if (bound_port < 0) throw std::runtime_error("cannot bind " + host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->bound = true;
    return bound_port;
}

void MockServer::start() {
    if (!impl_->bound) throw std::logic_error("MockServer::start before bind");
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void MockServer::serve() {
    if (!impl_->bound) throw std::logic_error("MockServer::serve before bind");
    impl_->server.listen_after_bind();
}

void MockServer::stop() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace everify
