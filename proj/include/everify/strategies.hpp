#pragma once

// Test-time strategies over a generator, a pairwise verifier and a
// finalizer: self-consistency voting, verifier-gated retry, verifier-guided
// reflection and a verifier-free consistency baseline, plus a bounded
// concurrent batch runner.
//
// Token accounting: total_tokens is the sum of completion tokens over every
// client call a strategy makes (generator, verifier and finalizer).
// prompt_tokens is tracked separately, and generation_tokens counts only the
// completion tokens of calls that produce candidate answers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "everify/client.hpp"
#include "everify/core.hpp"
#include "everify/templates.hpp"
#include "everify/verdict.hpp"

namespace everify::strategies {

enum class Strategy { self_consistency, retry, reflect, consistency };

std::string_view to_string(Strategy s);
/// Accepts "selfcons", "retry", "reflect" and "consistency".
Strategy strategy_from_string(std::string_view s);

struct RatingRecord {
    double rating_a = 0.0;  // NaN when unparsed
    double rating_b = 0.0;
    ParseStatus status = ParseStatus::malformed;
    int candidate_a = 0;
    int candidate_b = 1;
};

struct StrategyOutcome {
    std::string question_id;
    std::string strategy;
    std::string final_answer;
    std::optional<bool> correct;
    std::int64_t total_tokens = 0;
    std::int64_t prompt_tokens = 0;
    std::int64_t generation_tokens = 0;
    int generations_used = 0;
    int verifier_calls = 0;
    std::vector<RatingRecord> rating_trace;
    /// Index of the candidate whose answer was returned, -1 when the answer
    /// came from the finalizer or no candidate had one.
    int chosen_candidate = -1;
    /// Boxed answer of each generated candidate ("" when absent).
    std::vector<std::string> candidate_answers;
    bool failed = false;
    std::string error;
};

void to_json(nlohmann::json& j, const StrategyOutcome& o);
void from_json(const nlohmann::json& j, StrategyOutcome& o);

struct Clients {
    ModelClient* generator = nullptr;
    ModelClient* verifier = nullptr;
    ModelClient* finalizer = nullptr;
};

struct StrategyConfig {
    int k = 8;
    double tau = 5.0;
    std::uint64_t seed = 0;
    int concurrency = 8;
    GenerationParams generator_params;
    GenerationParams verifier_params;
    GenerationParams finalizer_params;
    PromptTemplates templates = PromptTemplates::defaults();
    /// Reflection returns the shared answer without calling the verifier or
    /// finalizer when both candidates agree.
    bool reflect_consistency_shortcut = false;
    verdict::EquivalenceOracle oracle;
};

/// Majority vote over k generations; ties go to the answer seen first.
StrategyOutcome self_consistency(const Question& q, int k, ModelClient& client, const StrategyConfig& cfg);

/// Scores two candidates; while no rating reaches tau, generates one new
/// candidate and pairs it against the higher-rated incumbent, up to k
/// generations. On exhaustion the highest rating seen wins, ties going to
/// candidate A of the final verification. Unparseable verdicts count as
/// "both incorrect".
StrategyOutcome verifier_retry(const Question& q, int k, ModelClient& gen, ModelClient& verifier, double tau,
                               const StrategyConfig& cfg);

/// Two candidates, one verification, then a finalizer call guided by the
/// ratings and the verifier's reasoning. Falls back to the higher-rated
/// candidate when the finalizer gives no boxed answer.
StrategyOutcome reflect(const Question& q, ModelClient& gen, ModelClient& verifier, ModelClient& finalizer,
                        const StrategyConfig& cfg);

/// Verifier-free baseline: two candidates; if they agree return the shared
/// answer, otherwise ask the finalizer to reconcile them.
StrategyOutcome consistency_check(const Question& q, ModelClient& gen, ModelClient& finalizer,
                                  const StrategyConfig& cfg);

StrategyOutcome run_strategy(const Question& q, Strategy strategy, const Clients& clients,
                             const StrategyConfig& cfg);

/// Runs a strategy over every question with at most cfg.concurrency
/// questions in flight. Output order matches input order; a failing question
/// yields an outcome with failed=true instead of aborting the batch.
std::vector<StrategyOutcome> run_batch(const std::vector<Question>& questions, Strategy strategy,
                                       const Clients& clients, const StrategyConfig& cfg);

/// The verifier prompt for a pair of (think-stripped) responses.
std::string verifier_prompt(const PromptTemplates& templates, const Question& q, std::string_view response_a,
                            std::string_view response_b);

/// One verifier rollout on a labeled pair.
struct JudgedRecord {
    std::string pair_id;
    std::string question_id;
    int rollout = 0;
    std::string completion;
    VerifierJudgment judgment;
    PairLabels labels;
    std::int64_t completion_tokens = 0;
    std::int64_t prompt_tokens = 0;
    bool failed = false;
    std::string error;
};

void to_json(nlohmann::json& j, const JudgedRecord& r);
void from_json(const nlohmann::json& j, JudgedRecord& r);

/// Samples `rollouts` verifier completions for every pair (pair ids are
/// "<question id>#<position in input>"). Questions run concurrently; the
/// pairs and rollouts of one question run in input order.
std::vector<JudgedRecord> judge_pairs(const std::vector<PairInstance>& pairs, int rollouts, ModelClient& verifier,
                                      const StrategyConfig& cfg);

}  // namespace everify::strategies
