#include "everify/client.hpp"

#include "everify/core.hpp"
#include "everify/json_io.hpp"
#include "everify/tokenizer.hpp"

namespace everify {

void to_json(nlohmann::json& j, const MockEntry& e) {
    j = nlohmann::json::object();
    if (e.call) j["call"] = *e.call;
    else j["match"] = e.match;
    if (!e.model.empty()) j["model"] = e.model;
    j["response"] = e.response;
    if (e.completion_tokens) j["completion_tokens"] = *e.completion_tokens;
    if (e.prompt_tokens) j["prompt_tokens"] = *e.prompt_tokens;
    if (!e.error.empty()) j["error"] = e.error;
}

void from_json(const nlohmann::json& j, MockEntry& e) {
    e = MockEntry{};
    if (auto it = j.find("call"); it != j.end() && !it->is_null()) e.call = it->get<std::int64_t>();
    if (auto it = j.find("match"); it != j.end()) {
        if (!it->is_string()) throw ValidationError("mock entry 'match' must be a string");
        e.match = it->get<std::string>();
    }
    if (e.call && j.contains("match")) throw ValidationError("mock entry has both 'call' and 'match'");
    e.model = j.value("model", std::string{});
    e.response = j.value("response", std::string{});
    if (auto it = j.find("completion_tokens"); it != j.end() && !it->is_null())
        e.completion_tokens = it->get<std::int64_t>();
    if (auto it = j.find("prompt_tokens"); it != j.end() && !it->is_null())
        e.prompt_tokens = it->get<std::int64_t>();
    e.error = j.value("error", std::string{});
}

MockScript::MockScript(std::vector<MockEntry> entries) : entries_(std::move(entries)) {}

std::shared_ptr<MockScript> MockScript::load(const std::filesystem::path& path) {
    std::vector<MockEntry> entries;
    for (const auto& j : read_jsonl(path)) entries.push_back(j.get<MockEntry>());
    return std::make_shared<MockScript>(std::move(entries));
}

namespace {

bool applies(const MockEntry& e, const std::string& model) { return e.model.empty() || e.model == model; }

Generation fallback(const std::string& model, const std::string& prompt, std::uint64_t seed) {
    const std::uint64_t h = mix_seed(stable_hash(prompt, stable_hash(model)), seed);
    Generation g;
    if (model == "verifier") {
        g.text = "<think>Comparing both responses.</think>\nResponse A: " + std::to_string(h % 11) +
                 "\nResponse B: " + std::to_string((h >> 16) % 11);
    } else {
        g.text = "<think>Working it out.</think>\nThe answer is \\boxed{" + std::to_string(h % 10) + "}.";
    }
    return g;
}

}  // namespace

Generation MockScript::respond(const std::string& model, const std::string& prompt, const GenerationParams& params) {
    const MockEntry* chosen = nullptr;
    {
        std::lock_guard lock(mu_);
        const std::int64_t index = call_counts_[model]++;
        for (const auto& e : entries_) {
            if (e.call && *e.call == index && applies(e, model)) {
                chosen = &e;
                break;
            }
        }
        if (!chosen) {
            const MockEntry* head = nullptr;
            for (const auto& e : entries_) {
                if (!e.call && applies(e, model) && prompt.find(e.match) != std::string::npos) {
                    head = &e;
                    break;
                }
            }
            if (head) {
                std::vector<const MockEntry*> sequence;
                for (const auto& e : entries_)
                    if (!e.call && applies(e, model) && e.match == head->match) sequence.push_back(&e);
                std::size_t& cursor = cursors_[{model, head->match}];
                chosen = sequence[std::min(cursor, sequence.size() - 1)];
                ++cursor;
            }
        }
    }
    const auto& tok = default_tokenizer();
    Generation g;
    if (chosen) {
        if (!chosen->error.empty()) throw ClientError("mock " + model + ": " + chosen->error);
        g.text = chosen->response;
        g.completion_tokens = chosen->completion_tokens.value_or(tok.count(g.text));
        g.prompt_tokens = chosen->prompt_tokens.value_or(tok.count(prompt));
    } else {
        g = fallback(model, prompt, params.seed);
        g.completion_tokens = tok.count(g.text);
        g.prompt_tokens = tok.count(prompt);
    }
    return g;
}

std::int64_t MockScript::calls(const std::string& model) const {
    std::lock_guard lock(mu_);
    auto it = call_counts_.find(model);
    return it == call_counts_.end() ? 0 : it->second;
}

std::int64_t MockScript::total_calls() const {
    std::lock_guard lock(mu_);
    std::int64_t n = 0;
    for (const auto& [_, c] : call_counts_) n += c;
    return n;
}

MockClient::MockClient(std::shared_ptr<MockScript> script, std::string model)
    : script_(std::move(script)), model_(std::move(model)) {
    if (!script_) throw std::invalid_argument("MockClient requires a script");
}

Generation MockClient::generate(const std::string& prompt, const GenerationParams& params) {
    return script_->respond(model_, prompt, params);
}

}  // namespace everify
