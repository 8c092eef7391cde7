#include "everify/app_config.hpp"

#include <set>

#include "everify/json_io.hpp"

namespace everify {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ValidationError("unknown config key '" + where + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + where + key + "' has the wrong type");
    }
}

EndpointConfig read_endpoint(const json& j, const std::string& where) {
    check_keys(j, {"url", "model", "auth_env", "temperature", "top_p", "max_tokens", "timeout_seconds", "max_retries"},
               where);
    EndpointConfig e;
    read(j, "url", e.url, where);
    read(j, "model", e.model, where);
    read(j, "auth_env", e.auth_env, where);
    read(j, "temperature", e.temperature, where);
    read(j, "top_p", e.top_p, where);
    read(j, "max_tokens", e.max_tokens, where);
    read(j, "timeout_seconds", e.timeout_seconds, where);
    read(j, "max_retries", e.max_retries, where);
    if (e.max_retries < 0) throw ValidationError(where + "max_retries must be nonnegative");
    return e;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    if (path.is_relative()) path = base / path;
    if (!std::filesystem::exists(path)) throw ValidationError("template file not found: " + path.string());
    return path;
}

}  // namespace

GenerationParams EndpointConfig::params() const {
    GenerationParams p;
    p.temperature = temperature;
    p.top_p = top_p;
    p.max_tokens = max_tokens;
    return p;
}

HttpEndpoint EndpointConfig::http(const std::string& role) const {
    HttpEndpoint h;
    h.url = url;
    h.model = model.empty() ? role : model;
    h.auth_token = token_from_env(auth_env);
    h.timeout_seconds = timeout_seconds;
    h.max_retries = max_retries;
    return h;
}

AppConfig load_app_config(const std::filesystem::path& path) {
    json root;
    try {
        root = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("cannot parse config " + path.string() + ": " + e.what());
    }
    check_keys(root, {"seed", "endpoints", "templates", "curation", "strategy"}, "");
    AppConfig cfg;
    read(root, "seed", cfg.seed, "");

    if (auto it = root.find("endpoints"); it != root.end()) {
        check_keys(*it, {"generator", "verifier", "finalizer", "judge"}, "endpoints.");
        for (auto [name, slot] : {std::pair{"generator", &cfg.generator}, std::pair{"verifier", &cfg.verifier},
                                  std::pair{"finalizer", &cfg.finalizer}, std::pair{"judge", &cfg.judge}}) {
            if (it->contains(name)) *slot = read_endpoint(it->at(name), std::string("endpoints.") + name + ".");
        }
    }

    const auto base = path.parent_path();
    if (auto it = root.find("templates"); it != root.end()) {
        check_keys(*it, {"generator", "verifier", "reflect", "reflect_unrated"}, "templates.");
        for (auto [name, slot] :
             {std::pair{"generator", &cfg.templates.generator}, std::pair{"verifier", &cfg.templates.verifier},
              std::pair{"reflect", &cfg.templates.reflect}, std::pair{"reflect_unrated", &cfg.templates.reflect_unrated}}) {
            std::string p;
            read(*it, name, p, "templates.");
            *slot = resolve(base, p);
        }
    }

    if (auto it = root.find("curation"); it != root.end()) {
        check_keys(*it,
                   {"max_input_tokens", "difficulty_cutoff", "pairs_per_question", "holdout_count",
                    "template_overhead_tokens"},
                   "curation.");
        read(*it, "max_input_tokens", cfg.curation.max_input_tokens, "curation.");
        read(*it, "difficulty_cutoff", cfg.curation.difficulty_cutoff, "curation.");
        read(*it, "pairs_per_question", cfg.curation.pairs_per_question, "curation.");
        read(*it, "holdout_count", cfg.curation.holdout_count, "curation.");
        read(*it, "template_overhead_tokens", cfg.curation.template_overhead_tokens, "curation.");
    }

    if (auto it = root.find("strategy"); it != root.end()) {
        check_keys(*it, {"k", "tau", "concurrency", "reflect_consistency_shortcut"}, "strategy.");
        read(*it, "k", cfg.k, "strategy.");
        read(*it, "tau", cfg.tau, "strategy.");
        read(*it, "concurrency", cfg.concurrency, "strategy.");
        read(*it, "reflect_consistency_shortcut", cfg.reflect_consistency_shortcut, "strategy.");
    }
    cfg.curation.seed = cfg.seed;
    return cfg;
}

PromptTemplates resolve_templates(const TemplatePaths& paths) {
    PromptTemplates t = PromptTemplates::defaults();
    if (!paths.generator.empty()) t.generator = load_template(paths.generator);
    if (!paths.verifier.empty()) t.verifier = load_template(paths.verifier);
    if (!paths.reflect.empty()) t.reflect = load_template(paths.reflect);
    if (!paths.reflect_unrated.empty()) t.reflect_unrated = load_template(paths.reflect_unrated);
    return t;
}

}  // namespace everify
