#pragma once

// Model client abstraction plus the scripted mock used for deterministic
// runs. Remote clients live in http_client.hpp.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace everify {

struct GenerationParams {
    double temperature = 1.0;
    double top_p = 1.0;
    std::int64_t max_tokens = 16384;
    std::uint64_t seed = 0;
};

struct Generation {
    std::string text;
    std::int64_t completion_tokens = 0;
    std::int64_t prompt_tokens = 0;
};

/// Failure to obtain a completion (unreachable endpoint, timeout, bad reply).
class ClientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Implementations must tolerate concurrent generate() calls.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual Generation generate(const std::string& prompt, const GenerationParams& params) = 0;
};

/// One scripted reply. Exactly one of `call` or `match` selects it: `call`
/// is a 0-based call index per model, `match` a prompt substring (empty
/// matches everything). Entries sharing (model, match) form a sequence that
/// is replayed in order, with the last entry repeating once exhausted.
struct MockEntry {
    std::optional<std::int64_t> call;
    std::string match;
    std::string model;  // empty applies to every model
    std::string response;
    std::optional<std::int64_t> completion_tokens;
    std::optional<std::int64_t> prompt_tokens;
    std::string error;  // non-empty makes the call throw ClientError
};

void to_json(nlohmann::json& j, const MockEntry& e);
void from_json(const nlohmann::json& j, MockEntry& e);

/// Shared replay state for every model served by one script.
///
/// Resolution order for a prompt sent to `model`: a `call` entry equal to
/// that model's call counter; otherwise the first `match` entry (file order)
/// whose substring occurs in the prompt, advancing that sequence; otherwise a
/// deterministic fallback derived from (model, prompt, seed). The fallback
/// for a model named "verifier" is a pair of ratings, for any other model a
/// short reasoning trace ending in a boxed digit.
class MockScript {
public:
    MockScript() = default;
    explicit MockScript(std::vector<MockEntry> entries);

    static std::shared_ptr<MockScript> load(const std::filesystem::path& path);

    Generation respond(const std::string& model, const std::string& prompt, const GenerationParams& params);

    std::int64_t calls(const std::string& model) const;
    std::int64_t total_calls() const;

private:
    std::vector<MockEntry> entries_;
    mutable std::mutex mu_;
    std::map<std::string, std::int64_t> call_counts_;
    std::map<std::pair<std::string, std::string>, std::size_t> cursors_;
};

class MockClient final : public ModelClient {
public:
    MockClient(std::shared_ptr<MockScript> script, std::string model);

    Generation generate(const std::string& prompt, const GenerationParams& params) override;

    const std::string& model() const { return model_; }

private:
    std::shared_ptr<MockScript> script_;
    std::string model_;
};

}  // namespace everify
