#pragma once

// Chat-completions client for OpenAI-compatible endpoints, and the HTTP
// front end that serves a MockScript behind the same wire format.

#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "everify/client.hpp"

namespace everify {

struct HttpEndpoint {
    /// Base URL such as "http://127.0.0.1:8080/v1"; "/chat/completions" is
    /// appended unless already present.
    std::string url;
    std::string model;
    /// Sent as a bearer token when non-empty.
    std::string auth_token;
    double timeout_seconds = 300.0;
    /// Attempts after the first one for connection errors, 429 and 5xx.
    int max_retries = 3;
    double backoff_seconds = 0.5;
};

/// Reads the token from the named environment variable ("" if unset).
std::string token_from_env(const std::string& env_var);

class HttpClient final : public ModelClient {
public:
    explicit HttpClient(HttpEndpoint endpoint);
    ~HttpClient() override;

    /// Throws ClientError once retries are exhausted or on a non-retryable
    /// reply.
    Generation generate(const std::string& prompt, const GenerationParams& params) override;

    const HttpEndpoint& endpoint() const { return endpoint_; }

private:
    HttpEndpoint endpoint_;
    std::string host_;  // scheme://host:port
    std::string path_;
};

/// Serves POST /v1/chat/completions (and /chat/completions) from a
/// MockScript; the request's "model" field selects the scripted model.
/// GET /health answers "ok".
class MockServer {
public:
    explicit MockServer(std::shared_ptr<MockScript> script);
    ~MockServer();

    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    /// Binds to host:port (port 0 picks a free port) and returns the port.
    int bind(const std::string& host, int port);
    /// Serves on a background thread until stop().
    void start();
    /// Serves on the calling thread until stop().
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
};

}  // namespace everify
