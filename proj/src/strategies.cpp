#include "everify/strategies.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "everify/json_io.hpp"

namespace everify::strategies {

namespace {

constexpr std::uint64_t kVerifierStream = 1'000'000;
constexpr std::uint64_t kFinalizerStream = 2'000'000;

struct Candidate {
    std::string stripped;
    std::string answer;  // empty when no boxed answer
};

std::string trim(std::string_view s) {
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    while (!s.empty() && space(s.front())) s.remove_prefix(1);
    while (!s.empty() && space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

std::string boxed_answer(std::string_view stripped) {
    auto box = verdict::extract_boxed(stripped);
    return box ? trim(*box) : std::string{};
}

std::string format_rating(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("?");
}

// Per-question bookkeeping shared by every strategy.
class Run {
public:
    Run(const Question& q, std::string_view strategy, const StrategyConfig& cfg)
        : q_(q), cfg_(cfg), seed_(mix_seed(cfg.seed, stable_hash(q.id))) {
        out_.question_id = q.id;
        out_.strategy = std::string(strategy);
    }

    const Candidate& generate(ModelClient& gen) {
        GenerationParams params = cfg_.generator_params;
        params.seed = mix_seed(seed_, static_cast<std::uint64_t>(out_.generations_used));
        const std::string prompt = render_template(cfg_.templates.generator, {{"question", q_.text}});
        const Generation g = gen.generate(prompt, params);
        account(g, true);
        ++out_.generations_used;
        Candidate c{trim(verdict::strip_think(g.text).final_answer_region), {}};
        c.answer = boxed_answer(c.stripped);
        out_.candidate_answers.push_back(c.answer);
        candidates_.push_back(std::move(c));
        return candidates_.back();
    }

    VerifierJudgment verify(ModelClient& verifier, int a, int b) {
        GenerationParams params = cfg_.verifier_params;
        params.seed = mix_seed(seed_, kVerifierStream + static_cast<std::uint64_t>(out_.verifier_calls));
        const std::string prompt =
            verifier_prompt(cfg_.templates, q_, candidates_[a].stripped, candidates_[b].stripped);
        const Generation g = verifier.generate(prompt, params);
        account(g, false);
        ++out_.verifier_calls;
        VerifierJudgment j = verdict::judge_completion(g.text);
        out_.rating_trace.push_back({j.rating_a, j.rating_b, j.parse_status, a, b});
        return j;
    }

    /// Finalizer call; returns its boxed answer ("" when absent).
    std::string finalize(ModelClient& finalizer, const std::string& prompt) {
        GenerationParams params = cfg_.finalizer_params;
        params.seed = mix_seed(seed_, kFinalizerStream);
        const Generation g = finalizer.generate(prompt, params);
        account(g, true);
        ++out_.generations_used;
        return boxed_answer(trim(verdict::strip_think(g.text).final_answer_region));
    }

    std::string reflection_prompt(const VerifierJudgment* judgment) const {
        std::map<std::string, std::string> values{{"question", q_.text},
                                                  {"response_a", candidates_[0].stripped},
                                                  {"response_b", candidates_[1].stripped}};
        if (judgment && judgment->ok()) {
            values["rating_a"] = format_rating(judgment->rating_a);
            values["rating_b"] = format_rating(judgment->rating_b);
            values["reasoning"] = trim(judgment->reasoning);
            return render_template(cfg_.templates.reflect, values);
        }
        return render_template(cfg_.templates.reflect_unrated, values);
    }

    const Candidate& candidate(int i) const { return candidates_[static_cast<std::size_t>(i)]; }

    StrategyOutcome finish_with_candidate(int index) {
        out_.chosen_candidate = index;
        return finish(index >= 0 ? candidates_[static_cast<std::size_t>(index)].answer : std::string{});
    }

    StrategyOutcome finish(std::string answer) {
        out_.final_answer = std::move(answer);
        if (out_.final_answer.empty()) {
            out_.correct = false;
        } else {
            out_.correct = verdict::answers_equivalent(out_.final_answer, q_.ground_truth, cfg_.oracle);
        }
        return std::move(out_);
    }

private:
    void account(const Generation& g, bool candidate) {
        out_.total_tokens += g.completion_tokens;
        out_.prompt_tokens += g.prompt_tokens;
        if (candidate) out_.generation_tokens += g.completion_tokens;
    }

    const Question& q_;
    const StrategyConfig& cfg_;
    std::uint64_t seed_;
    StrategyOutcome out_;
    std::vector<Candidate> candidates_;
};

template <typename Fn>
void parallel_for(std::size_t n, int concurrency, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(concurrency, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::self_consistency: return "selfcons";
        case Strategy::retry: return "retry";
        case Strategy::reflect: return "reflect";
        case Strategy::consistency: return "consistency";
    }
    return "selfcons";
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "selfcons" || s == "self_consistency") return Strategy::self_consistency;
    if (s == "retry") return Strategy::retry;
    if (s == "reflect") return Strategy::reflect;
    if (s == "consistency") return Strategy::consistency;
    throw ValidationError("unknown strategy: " + std::string(s));
}

std::string verifier_prompt(const PromptTemplates& templates, const Question& q, std::string_view response_a,
                            std::string_view response_b) {
    return render_template(templates.verifier, {{"question", q.text},
                                                {"response_a", std::string(response_a)},
                                                {"response_b", std::string(response_b)}});
}

StrategyOutcome self_consistency(const Question& q, int k, ModelClient& client, const StrategyConfig& cfg) {
    if (k < 1) throw std::invalid_argument("self_consistency needs k >= 1");
    Run run(q, to_string(Strategy::self_consistency), cfg);
    struct Group {
        int first;
        int count;
    };
    std::vector<Group> groups;
    for (int i = 0; i < k; ++i) {
        const std::string& answer = run.generate(client).answer;
        if (answer.empty()) continue;
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return verdict::answers_equivalent(run.candidate(g.first).answer, answer, cfg.oracle);
        });
        if (it == groups.end()) groups.push_back({i, 1});
        else ++it->count;
    }
    if (groups.empty()) return run.finish_with_candidate(-1);
    const Group* best = &groups.front();
    for (const auto& g : groups)
        if (g.count > best->count) best = &g;
    return run.finish_with_candidate(best->first);
}

StrategyOutcome verifier_retry(const Question& q, int k, ModelClient& gen, ModelClient& verifier, double tau,
                               const StrategyConfig& cfg) {
    if (k < 2) throw std::invalid_argument("verifier_retry needs k >= 2");
    if (!(tau > 0.0 && tau < 10.0)) throw std::invalid_argument("tau must lie in (0,10)");
    Run run(q, to_string(Strategy::retry), cfg);
    run.generate(gen);
    run.generate(gen);
    int generations = 2;
    int a = 0;
    int b = 1;
    std::vector<double> best(2, -std::numeric_limits<double>::infinity());
    for (;;) {
        const VerifierJudgment j = run.verify(verifier, a, b);
        if (j.ok()) {
            best[a] = std::max(best[a], j.rating_a);
            best[b] = std::max(best[b], j.rating_b);
            if (std::max(j.rating_a, j.rating_b) >= tau) {
                return run.finish_with_candidate(j.rating_a >= j.rating_b ? a : b);
            }
        }
        if (generations >= k) {
            // Highest rating seen; ties prefer the final A, then the final B,
            // then the earliest candidate.
            int winner = best[b] > best[a] ? b : a;
            for (int c = 0; c < static_cast<int>(best.size()); ++c) {
                if (best[c] > best[winner]) winner = c;
            }
            return run.finish_with_candidate(winner);
        }
        const int incumbent = (j.ok() && j.rating_b > j.rating_a) ? b : a;
        run.generate(gen);
        best.push_back(-std::numeric_limits<double>::infinity());
        a = incumbent;
        b = generations++;
    }
}

StrategyOutcome reflect(const Question& q, ModelClient& gen, ModelClient& verifier, ModelClient& finalizer,
                        const StrategyConfig& cfg) {
    Run run(q, to_string(Strategy::reflect), cfg);
    run.generate(gen);
    run.generate(gen);
    const auto& first = run.candidate(0).answer;
    const auto& second = run.candidate(1).answer;
    if (cfg.reflect_consistency_shortcut && !first.empty() && !second.empty() &&
        verdict::answers_equivalent(first, second, cfg.oracle)) {
        return run.finish_with_candidate(0);
    }
    const VerifierJudgment j = run.verify(verifier, 0, 1);
    std::string answer = run.finalize(finalizer, run.reflection_prompt(&j));
    if (!answer.empty()) return run.finish(std::move(answer));
    const int fallback = (j.ok() && j.rating_b > j.rating_a) ? 1 : 0;
    return run.finish_with_candidate(fallback);
}

StrategyOutcome consistency_check(const Question& q, ModelClient& gen, ModelClient& finalizer,
                                  const StrategyConfig& cfg) {
    Run run(q, to_string(Strategy::consistency), cfg);
    run.generate(gen);
    run.generate(gen);
    const auto& first = run.candidate(0).answer;
    const auto& second = run.candidate(1).answer;
    if (!first.empty() && !second.empty() && verdict::answers_equivalent(first, second, cfg.oracle)) {
        return run.finish_with_candidate(0);
    }
    std::string answer = run.finalize(finalizer, run.reflection_prompt(nullptr));
    if (!answer.empty()) return run.finish(std::move(answer));
    return run.finish_with_candidate(first.empty() && !second.empty() ? 1 : 0);
}

StrategyOutcome run_strategy(const Question& q, Strategy strategy, const Clients& clients,
                             const StrategyConfig& cfg) {
    auto need = [](ModelClient* c, const char* role) -> ModelClient& {
        if (!c) throw std::invalid_argument(std::string("strategy requires a ") + role + " client");
        return *c;
    };
    switch (strategy) {
        case Strategy::self_consistency:
            return self_consistency(q, cfg.k, need(clients.generator, "generator"), cfg);
        case Strategy::retry:
            return verifier_retry(q, cfg.k, need(clients.generator, "generator"),
                                  need(clients.verifier, "verifier"), cfg.tau, cfg);
        case Strategy::reflect:
            return reflect(q, need(clients.generator, "generator"), need(clients.verifier, "verifier"),
                           need(clients.finalizer, "finalizer"), cfg);
        case Strategy::consistency:
            return consistency_check(q, need(clients.generator, "generator"), need(clients.finalizer, "finalizer"),
                                     cfg);
    }
    throw std::invalid_argument("unknown strategy");
}

std::vector<StrategyOutcome> run_batch(const std::vector<Question>& questions, Strategy strategy,
                                       const Clients& clients, const StrategyConfig& cfg) {
    std::vector<StrategyOutcome> out(questions.size());
    parallel_for(questions.size(), cfg.concurrency, [&](std::size_t i) {
        try {
            out[i] = run_strategy(questions[i], strategy, clients, cfg);
        } catch (const std::exception& e) {
            StrategyOutcome failed;
            failed.question_id = questions[i].id;
            failed.strategy = std::string(to_string(strategy));
            failed.failed = true;
            failed.error = e.what();
            out[i] = std::move(failed);
        }
    });
    return out;
}

std::vector<JudgedRecord> judge_pairs(const std::vector<PairInstance>& pairs, int rollouts, ModelClient& verifier,
                                      const StrategyConfig& cfg) {
    if (rollouts < 1) throw std::invalid_argument("judge_pairs needs at least one rollout");
    const auto per = static_cast<std::size_t>(rollouts);
    std::vector<JudgedRecord> out(pairs.size() * per);

    // One task per question, so a question's calls always happen in the same
    // order regardless of scheduling.
    std::map<std::string, std::vector<std::size_t>> by_question;
    for (std::size_t i = 0; i < pairs.size(); ++i) by_question[pairs[i].question.id].push_back(i);
    std::vector<const std::vector<std::size_t>*> tasks;
    for (const auto& [_, idx] : by_question) tasks.push_back(&idx);

    parallel_for(tasks.size(), cfg.concurrency, [&](std::size_t t) {
        for (const std::size_t p : *tasks[t]) {
            const auto& pair = pairs[p];
            const std::string prompt = verifier_prompt(cfg.templates, pair.question, pair.response_a.stripped_text,
                                                       pair.response_b.stripped_text);
            for (std::size_t n = 0; n < per; ++n) {
                JudgedRecord& r = out[p * per + n];
                r.pair_id = pair.question.id + "#" + std::to_string(p);
                r.question_id = pair.question.id;
                r.rollout = static_cast<int>(n);
                r.labels = pair.labels;
                try {
                    GenerationParams params = cfg.verifier_params;
                    params.seed = mix_seed(mix_seed(cfg.seed, stable_hash(r.pair_id)), n);
                    const Generation g = verifier.generate(prompt, params);
                    r.completion = g.text;
                    r.completion_tokens = g.completion_tokens;
                    r.prompt_tokens = g.prompt_tokens;
                    r.judgment = verdict::judge_completion(g.text);
                } catch (const std::exception& e) {
                    r.failed = true;
                    r.error = e.what();
                    r.judgment = verdict::parse_ratings("");
                }
            }
        }
    });
    return out;
}

namespace {

nlohmann::json trace_to_json(const RatingRecord& r) {
    return {{"rating_a", number_or_null(r.rating_a)},
            {"rating_b", number_or_null(r.rating_b)},
            {"status", to_string(r.status)},
            {"candidates", {r.candidate_a, r.candidate_b}}};
}

}  // namespace

void to_json(nlohmann::json& j, const StrategyOutcome& o) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& r : o.rating_trace) trace.push_back(trace_to_json(r));
    j = {{"question_id", o.question_id},
         {"strategy", o.strategy},
         {"final_answer", o.final_answer},
         {"correct", o.correct ? nlohmann::json(*o.correct) : nlohmann::json(nullptr)},
         {"total_tokens", o.total_tokens},
         {"prompt_tokens", o.prompt_tokens},
         {"generation_tokens", o.generation_tokens},
         {"generations_used", o.generations_used},
         {"verifier_calls", o.verifier_calls},
         {"rating_trace", trace},
         {"chosen_candidate", o.chosen_candidate},
         {"candidate_answers", o.candidate_answers},
         {"failed", o.failed}};
    if (!o.error.empty()) j["error"] = o.error;
}

void from_json(const nlohmann::json& j, StrategyOutcome& o) {
    o = StrategyOutcome{};
    o.question_id = j.at("question_id").get<std::string>();
    o.strategy = j.value("strategy", std::string{});
    o.final_answer = j.value("final_answer", std::string{});
    if (auto it = j.find("correct"); it != j.end() && it->is_boolean()) o.correct = it->get<bool>();
    o.total_tokens = j.value("total_tokens", std::int64_t{0});
    o.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
    o.generation_tokens = j.value("generation_tokens", std::int64_t{0});
    o.generations_used = j.value("generations_used", 0);
    o.verifier_calls = j.value("verifier_calls", 0);
    if (auto it = j.find("rating_trace"); it != j.end()) {
        for (const auto& t : *it) {
            RatingRecord r;
            r.rating_a = number_or_nan(t.value("rating_a", nlohmann::json(nullptr)));
            r.rating_b = number_or_nan(t.value("rating_b", nlohmann::json(nullptr)));
            r.status = parse_status_from_string(t.value("status", std::string{"malformed"}));
            if (auto c = t.find("candidates"); c != t.end() && c->size() == 2) {
                r.candidate_a = (*c)[0].get<int>();
                r.candidate_b = (*c)[1].get<int>();
            }
            o.rating_trace.push_back(r);
        }
    }
    o.chosen_candidate = j.value("chosen_candidate", -1);
    o.candidate_answers = j.value("candidate_answers", std::vector<std::string>{});
    o.failed = j.value("failed", false);
    o.error = j.value("error", std::string{});
}

void to_json(nlohmann::json& j, const JudgedRecord& r) {
    j = {{"pair_id", r.pair_id},
         {"question_id", r.question_id},
         {"rollout", r.rollout},
         {"completion", r.completion},
         {"judgment", r.judgment},
         {"labels", r.labels},
         {"completion_tokens", r.completion_tokens},
         {"prompt_tokens", r.prompt_tokens},
         {"failed", r.failed}};
    if (!r.error.empty()) j["error"] = r.error;
}

void from_json(const nlohmann::json& j, JudgedRecord& r) {
    r = JudgedRecord{};
    r.pair_id = j.value("pair_id", std::string{});
    r.question_id = j.value("question_id", std::string{});
    r.rollout = j.value("rollout", 0);
    r.completion = j.value("completion", std::string{});
    if (auto it = j.find("judgment"); it != j.end()) r.judgment = it->get<VerifierJudgment>();
    else r.judgment = verdict::judge_completion(r.completion);
    r.labels = j.at("labels").get<PairLabels>();
    r.completion_tokens = j.value("completion_tokens", std::int64_t{0});
    r.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
    r.failed = j.value("failed", false);
    r.error = j.value("error", std::string{});
}

}  // namespace everify::strategies
