#pragma once

// Application configuration file: a JSON tree with endpoints, template
// paths, curation settings and strategy defaults. Command-line flags
// override file values; secrets only come from environment variables.

#include <cstdint>
#include <filesystem>
#include <string>

#include "everify/curation.hpp"
#include "everify/http_client.hpp"
#include "everify/templates.hpp"

namespace everify {

struct EndpointConfig {
    std::string url;
    std::string model;
    /// Name of the environment variable holding the bearer token.
    std::string auth_env;
    double temperature = 1.0;
    double top_p = 1.0;
    std::int64_t max_tokens = 16384;
    double timeout_seconds = 300.0;
    int max_retries = 3;

    GenerationParams params() const;
    /// `role` names the model when `model` is empty.
    HttpEndpoint http(const std::string& role) const;
};

struct TemplatePaths {
    std::filesystem::path generator;
    std::filesystem::path verifier;
    std::filesystem::path reflect;
    std::filesystem::path reflect_unrated;
};

struct AppConfig {
    std::uint64_t seed = 0;
    EndpointConfig generator;
    EndpointConfig verifier;
    EndpointConfig finalizer;
    EndpointConfig judge;
    TemplatePaths templates;
    curation::CurationConfig curation;
    int k = 8;
    double tau = 5.0;
    int concurrency = 8;
    bool reflect_consistency_shortcut = false;
};

/// Parses a config file. Relative template paths resolve against the
/// file's directory and must exist. Unknown keys are rejected. Throws
/// ValidationError.
AppConfig load_app_config(const std::filesystem::path& path);

/// Defaults overlaid with any configured template files.
PromptTemplates resolve_templates(const TemplatePaths& paths);

}  // namespace everify
