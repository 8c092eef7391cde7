// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "everify/cli.hpp"
#include "everify/client.hpp"
#include "everify/json_io.hpp"
#include "everify/metrics.hpp"
#include "everify/reward.hpp"
#include "everify/strategies.hpp"
#include "everify/tokenizer.hpp"
#include "everify/verdict.hpp"

using namespace everify;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = EVERIFY_FIXTURE_DIR;

struct Check {
    bool ok = true;
    std::vector<std::string> failures;
    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (failures.size() < 5) failures.push_back(what);
    }
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------- rationals

struct Rational {
    __int128 n = 0;
    __int128 d = 1;
};

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational make(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("division by zero");
    if (d < 0) n = -n, d = -d;
    const __int128 g = gcd128(n, d);
    return g > 1 ? Rational{n / g, d / g} : Rational{n, d};
}

bool operator==(const Rational& a, const Rational& b) { return a.n == b.n && a.d == b.d; }

// \frac{A}{B} and \dfrac{A}{B} become ((A)/(B)); nested braces are handled.
std::string expand_fracs(const std::string& s) {
    std::string out;
    std::size_t i = 0;
    auto group = [&](std::size_t& pos) {
        if (pos >= s.size() || s[pos] != '{') throw std::invalid_argument("expected {");
        int depth = 0;
        const std::size_t start = pos;
        for (; pos < s.size(); ++pos) {
            if (s[pos] == '{') ++depth;
            if (s[pos] == '}' && --depth == 0) break;
        }
        if (pos >= s.size()) throw std::invalid_argument("unbalanced");
        const std::string inner = s.substr(start + 1, pos - start - 1);
        ++pos;
        return expand_fracs(inner);
    };
    while (i < s.size()) {
        std::size_t skip = 0;
        if (s.compare(i, 6, "\\dfrac") == 0) skip = 6;
        else if (s.compare(i, 5, "\\frac") == 0) skip = 5;
        if (skip == 0) {
            out += s[i++];
            continue;
        }
        i += skip;
        const std::string a = group(i);
        const std::string b = group(i);
        out += "((" + a + ")/(" + b + "))";
    }
    return out;
}

// Shunting-yard over + - * / with unary minus and parentheses, exact arithmetic.
Rational eval_rational(const std::string& text) {
    const std::string s = expand_fracs(text);
    std::vector<Rational> values;
    std::vector<char> ops;
    auto prec = [](char op) { return op == 'u' ? 3 : (op == '*' || op == '/') ? 2 : 1; };
    auto apply = [&](char op) {
        if (op == 'u') {
            if (values.empty()) throw std::invalid_argument("dangling minus");
            values.back().n = -values.back().n;
            return;
        }
        if (values.size() < 2) throw std::invalid_argument("missing operand");
        const Rational b = values.back();
        values.pop_back();
        const Rational a = values.back();
        values.pop_back();
        switch (op) {
            case '+': values.push_back(make(a.n * b.d + b.n * a.d, a.d * b.d)); break;
            case '-': values.push_back(make(a.n * b.d - b.n * a.d, a.d * b.d)); break;
            case '*': values.push_back(make(a.n * b.n, a.d * b.d)); break;
            case '/': values.push_back(make(a.n * b.d, a.d * b.n)); break;
        }
    };
    bool expect_operand = true;
    for (std::size_t i = 0; i < s.size();) {
        const char c = s[i];
        if (c == ' ') {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            __int128 n = 0;
            __int128 d = 1;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) n = n * 10 + (s[i++] - '0');
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
                    n = n * 10 + (s[i++] - '0');
                    d *= 10;
                }
            }
            values.push_back(make(n, d));
            expect_operand = false;
        } else if (c == '(') {
            ops.push_back('(');
            ++i;
            expect_operand = true;
        } else if (c == ')') {
            while (!ops.empty() && ops.back() != '(') {
                apply(ops.back());
                ops.pop_back();
            }
            if (ops.empty()) throw std::invalid_argument("unbalanced )");
            ops.pop_back();
            ++i;
            expect_operand = false;
        } else if (c == '+' || c == '-' || c == '*' || c == '/') {
            char op = c;
            if (expect_operand) {
                if (c != '-') throw std::invalid_argument("unexpected operator");
                op = 'u';
                ops.push_back(op);
                ++i;
                continue;
            }
            while (!ops.empty() && ops.back() != '(' && prec(ops.back()) >= prec(op)) {
                apply(ops.back());
                ops.pop_back();
            }
            ops.push_back(op);
            ++i;
            expect_operand = true;
        } else {
            throw std::invalid_argument(std::string("unexpected character ") + c);
        }
    }
    while (!ops.empty()) {
        if (ops.back() == '(') throw std::invalid_argument("unbalanced (");
        apply(ops.back());
        ops.pop_back();
    }
    if (values.size() != 1) throw std::invalid_argument("not a single expression");
    return values.front();
}

// ---------------------------------------------------------------- mock helpers

MockEntry call_entry(std::int64_t index, std::string model, std::string response, std::int64_t tokens) {
    MockEntry e;
    e.call = index;
    e.model = std::move(model);
    e.response = std::move(response);
    e.completion_tokens = tokens;
    e.prompt_tokens = 0;
    return e;
}

MockEntry match_entry(std::string match, std::string model, std::string response, std::int64_t tokens) {
    MockEntry e;
    e.match = std::move(match);
    e.model = std::move(model);
    e.response = std::move(response);
    e.completion_tokens = tokens;
    e.prompt_tokens = 0;
    return e;
}

std::string boxed(const std::string& a) { return "<think>work</think>Thus \\boxed{" + a + "}."; }
std::string rated(double a, double b) { return "<think>compare</think>Response A: " + num(a) + "\nResponse B: " + num(b); }

Question question(const std::string& id, const std::string& gt = "6") {
    return Question{id, "Problem " + id + ": what is 2*3?", gt, Source::synthetic, {}};
}

struct Scripted {
    std::shared_ptr<MockScript> script;
    MockClient gen, ver, fin;
    explicit Scripted(std::vector<MockEntry> entries)
        : script(std::make_shared<MockScript>(std::move(entries))),
          gen(script, "generator"),
          ver(script, "verifier"),
          fin(script, "finalizer") {}
};

// ---------------------------------------------------------------- criteria

Check reward_exactness() {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    // ln of 0.1, 0.3, 0.5, 0.7, 0.9 evaluated by hand (p = 0.1 + 0.08 v at v = 0, 2.5, 5, 7.5, 10).
    const double ln[] = {-2.302585092994046, -1.2039728043259361, -0.6931471805599453, -0.35667494393873245,
                         -0.10536051565782628};
    const double grid[] = {0.0, 2.5, 5.0, 7.5, 10.0};
    for (int i = 0; i < 5; ++i) {
        const double r1 = reward::response_reward(grid[i], 1).value;
        const double r0 = reward::response_reward(grid[i], 0).value;
        c.expect(std::abs(r1 - ln[i]) <= 1e-12, "v=" + num(grid[i]) + " y=1 gave " + num(r1));
        c.expect(std::abs(r0 - ln[4 - i]) <= 1e-12, "v=" + num(grid[i]) + " y=0 gave " + num(r0));
    }
    c.expect(reward::response_reward(11.0, 1).value == -4.5, "(11,1) is not -4.5");
    c.expect(reward::response_reward(11.0, 0).value == -4.5, "(11,0) is not -4.5");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < 1.0, "took " + num(secs) + " s");
    return c;
}

Check reward_properties() {
    Check c;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 10.0);
    const double floor = std::log(0.1);
    c.expect(reward::kInvalidRatingPenalty < floor, "penalty not below ln(0.1)");
    for (int i = 0; i < 10000; ++i) {
        const double v1 = unit(rng);
        const double v2 = unit(rng);
        const double lo = std::min(v1, v2);
        const double hi = std::max(v1, v2);
        c.expect(reward::response_reward(lo, 1).value <= reward::response_reward(hi, 1).value,
                 "y=1 not monotone at " + num(lo) + "," + num(hi));
        c.expect(reward::response_reward(lo, 0).value >= reward::response_reward(hi, 0).value,
                 "y=0 not monotone at " + num(lo) + "," + num(hi));
        for (Label y : {Label{0}, Label{1}}) {
            c.expect(reward::response_reward(v1, y).value > reward::kInvalidRatingPenalty, "valid reward below penalty");
        }
        c.expect(std::abs(reward::response_reward(v1, 1).value - reward::response_reward(10.0 - v1, 0).value) <= 1e-12,
                 "label symmetry fails at " + num(v1));

        VerifierJudgment ab;
        ab.rating_a = v1;
        ab.rating_b = v2;
        ab.parse_status = ParseStatus::ok;
        VerifierJudgment ba = ab;
        std::swap(ba.rating_a, ba.rating_b);
        const PairLabels l{static_cast<Label>(rng() & 1), static_cast<Label>(rng() & 1)};
        c.expect(std::abs(reward::pair_reward(ab, l).value - reward::pair_reward(ba, {l.b, l.a}).value) <= 1e-12,
                 "exchange symmetry fails at " + num(v1) + "," + num(v2));
    }
    return c;
}

Check advantage_pipeline() {
    Check c;
    const std::vector<double> r{-1.0, -2.0, -3.0};
    const auto a = reward::group_advantages(r, 0.0);
    const double want[] = {1.224745, 0.0, -1.224745};
    for (int i = 0; i < 3; ++i) c.expect(std::abs(a[i] - want[i]) <= 1e-6, "advantage " + std::to_string(i) + " = " + num(a[i]));

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> rating(0.0, 10.0);
    std::vector<reward::RolloutGroup> groups;
    std::size_t constant = 0;
    for (int g = 0; g < 200; ++g) {
        reward::RolloutGroup group;
        if (g % 4 == 0) {
            const double v = rng() % 3 == 0 ? -9.0 : reward::response_reward(rating(rng), 1).value;
            group.rewards.assign(16, v);
            ++constant;
        } else {
            for (int i = 0; i < 16; ++i) {
                const bool penalized = rng() % 5 == 0;
                group.rewards.push_back(penalized ? -9.0
                                                  : reward::response_reward(rating(rng), 1).value +
                                                        reward::response_reward(rating(rng), 0).value);
            }
        }
        groups.push_back(group);
    }
    const auto result = reward::filter_zero_variance(groups);
    c.expect(result.dropped_count == constant, "dropped " + std::to_string(result.dropped_count) + " of " +
                                                   std::to_string(constant) + " constant groups");
    c.expect(result.kept.size() == groups.size() - constant, "kept count");
    for (const auto& g : result.kept) {
        c.expect(g.advantages.size() == 16, "advantages missing");
        const double m = std::accumulate(g.advantages.begin(), g.advantages.end(), 0.0) / 16.0;
        c.expect(std::abs(m) <= 1e-9, "mean advantage " + num(m));
    }
    return c;
}

Check parser_robustness() {
    Check c;
    std::mt19937_64 rng(4242);
    const std::vector<std::string> pieces{"<think>", "</think>", "Response A:", "Response B:", "\\boxed{", "}", ",",
                                          ";", "7", "10", "-3", "2.5", "/10", " ", "\n", "Rating", "score", "x"};
    for (int i = 0; i < 10000; ++i) {
        std::string s;
        const int n = static_cast<int>(rng() % 24);
        for (int k = 0; k < n; ++k) {
            if (rng() % 3 == 0) s += static_cast<char>(rng() % 256);
            else s += pieces[rng() % pieces.size()];
        }
        try {
            const auto parsed = verdict::strip_think(s);
            c.expect(verdict::strip_think(parsed.final_answer_region).final_answer_region == parsed.final_answer_region,
                     "strip_think not idempotent");
            const auto j = verdict::parse_ratings(parsed.final_answer_region);
            const bool in_range = j.rating_a >= 0 && j.rating_a <= 10 && j.rating_b >= 0 && j.rating_b <= 10;
            c.expect(j.parse_status != ParseStatus::ok || in_range, "ok status with out-of-scale rating");
            (void)verdict::judge_completion(s);
        } catch (const std::exception& e) {
            c.expect(false, std::string("threw: ") + e.what());
        }
    }

    const auto golden = read_jsonl(kFixtures / "verifier_golden.jsonl");
    c.expect(golden.size() >= 20, "fewer than 20 golden completions");
    std::set<std::string> statuses;
    for (const auto& row : golden) {
        const std::string completion = row.at("completion");
        const auto j = verdict::judge_completion(completion);
        const std::string status = row.at("parse_status");
        statuses.insert(status);
        c.expect(to_string(j.parse_status) == status, "status for: " + completion);
        c.expect(j.reasoning == row.at("reasoning").get<std::string>(), "reasoning for: " + completion);
        if (!row.at("rating_a").is_null()) {
            c.expect(j.rating_a == row.at("rating_a").get<double>() && j.rating_b == row.at("rating_b").get<double>(),
                     "ratings for: " + completion);
        }
    }
    c.expect(statuses.size() == 4, "golden set does not cover every parse status");
    return c;
}

Check equivalence_agreement() {
    Check c;
    const auto rows = read_jsonl(kFixtures / "expression_pairs.jsonl");
    c.expect(rows.size() == 200, "fixture has " + std::to_string(rows.size()) + " rows");
    std::size_t disagreements = 0;
    for (const auto& row : rows) {
        const std::string a = row.at("a");
        const std::string b = row.at("b");
        const bool oracle = eval_rational(a) == eval_rational(b);
        const bool ours = verdict::answers_equivalent(a, b);
        if (oracle != ours || oracle != row.at("equivalent").get<bool>()) {
            ++disagreements;
            c.expect(false, a + " vs " + b);
        }
    }
    c.expect(disagreements == 0, std::to_string(disagreements) + " disagreements");
    return c;
}

int cli(std::vector<std::string> args, std::string* err_out = nullptr) {
    args.insert(args.begin(), "everify");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (err_out) *err_out = err.str();
    return code;
}

Check curation_bounds(const fs::path& work) {
    Check c;
    const fs::path one = work / "curate1";
    const fs::path two = work / "curate2";
    for (const auto& dir : {one, two}) {
        std::string err;
        const int code = cli({"curate", "--in", (kFixtures / "corpus.jsonl").string(), "--out-dir", dir.string(),
                              "--seed", "11", "--holdout-count", "60"},
                             &err);
        c.expect(code == 0, "curate exited " + std::to_string(code) + ": " + err);
    }
    if (!c.ok) return c;
    for (const char* f : {"train.jsonl", "val.jsonl", "rejects.jsonl", "labeled.jsonl", "questions.jsonl"})
        c.expect(read_file(one / f) == read_file(two / f), std::string(f) + " differs between runs");

    std::map<std::string, std::string> planted;
    for (const auto& row : read_jsonl(kFixtures / "corpus.jsonl"))
        planted[row.at("id")] = row.at("metadata").at("planted");
    std::set<std::string> rejected;
    for (const auto& r : read_jsonl(one / "rejects.jsonl")) {
        const std::string id = r.at("id");
        const std::string qid = id.substr(0, id.find('#'));
        rejected.insert(qid);
        c.expect(planted.count(qid) && planted[qid] == r.at("reason").get<std::string>(),
                 id + " rejected as " + r.at("reason").get<std::string>());
    }
    for (const auto& [qid, reason] : planted) {
        if (reason != "ok") c.expect(rejected.count(qid) == 1, qid + " (" + reason + ") not rejected");
    }

    const auto& tok = default_tokenizer();
    std::set<std::string> train_q, val_q;
    const auto train = read_jsonl(one / "train.jsonl");
    const auto val = read_jsonl(one / "val.jsonl");
    c.expect(val.size() == 60, "validation has " + std::to_string(val.size()) + " pairs");
    for (const auto* rows : {&train, &val}) {
        for (const auto& j : *rows) {
            const auto p = j.get<PairInstance>();
            const auto tokens = tok.count(p.question.text) + tok.count(p.response_a.stripped_text) +
                                tok.count(p.response_b.stripped_text);
            c.expect(tokens <= 6144, p.question.id + " pair has " + std::to_string(tokens) + " tokens");
            (rows == &train ? train_q : val_q).insert(p.question.id);
        }
    }
    for (const auto& q : val_q) c.expect(train_q.count(q) == 0, q + " is in both splits");
    return c;
}

// Retry as described: incumbent = higher-rated of the last pair (A on ties or
// an unparsed verdict); exhaustion picks the highest rating seen.
struct RetryOracle {
    int chosen = -1;
    int generations = 0;
    int verifier_calls = 0;
};

struct ScriptedRating {
    bool ok = false;
    double a = 0.0;
    double b = 0.0;
};

RetryOracle retry_oracle(const std::vector<ScriptedRating>& ratings, int k, double tau) {
    RetryOracle o;
    o.generations = 2;
    int a = 0;
    int b = 1;
    std::vector<double> best{-1.0, -1.0};
    for (std::size_t r = 0;; ++r) {
        const ScriptedRating& s = ratings.at(r);
        ++o.verifier_calls;
        if (s.ok) {
            best[a] = std::max(best[a], s.a);
            best[b] = std::max(best[b], s.b);
            if (std::max(s.a, s.b) >= tau) {
                o.chosen = s.a >= s.b ? a : b;
                return o;
            }
        }
        if (o.generations == k) {
            int winner = best[b] > best[a] ? b : a;
            for (int i = 0; i < static_cast<int>(best.size()); ++i)
                if (best[i] > best[winner]) winner = i;
            o.chosen = winner;
            return o;
        }
        const int incumbent = s.ok && s.b > s.a ? b : a;
        best.push_back(-1.0);
        a = incumbent;
        b = o.generations++;
    }
}

Check strategy_correctness() {
    Check c;
    strategies::StrategyConfig cfg;
    const std::vector<std::string> answers{"6", "4", "7", "9", "5", "8", "3", "2"};

    struct Trace {
        int k;
        std::vector<std::pair<double, double>> ratings;
        int chosen;
        int generations;
        std::int64_t tokens;
    };
    // generator calls cost 100 tokens, verifier calls 50.
    const std::vector<Trace> traces{
        {8, {{9, 2}}, 0, 2, 250},
        {4, {{3, 2}, {4, 8}}, 2, 3, 400},
        {2, {{1, 1}}, 0, 2, 250},
    };
    for (std::size_t t = 0; t < traces.size(); ++t) {
        std::vector<MockEntry> entries;
        for (int i = 0; i < 8; ++i) entries.push_back(call_entry(i, "generator", boxed(answers[i]), 100));
        for (std::size_t r = 0; r < traces[t].ratings.size(); ++r)
            entries.push_back(call_entry(static_cast<std::int64_t>(r), "verifier",
                                         rated(traces[t].ratings[r].first, traces[t].ratings[r].second), 50));
        Scripted s(entries);
        const auto o = strategies::verifier_retry(question("t"), traces[t].k, s.gen, s.ver, 5.0, cfg);
        const std::string label = "trace " + std::to_string(t + 1);
        c.expect(o.chosen_candidate == traces[t].chosen, label + " chose " + std::to_string(o.chosen_candidate));
        c.expect(o.final_answer == answers[static_cast<std::size_t>(traces[t].chosen)], label + " answer " + o.final_answer);
        c.expect(o.generations_used == traces[t].generations, label + " generations " + std::to_string(o.generations_used));
        c.expect(o.total_tokens == traces[t].tokens, label + " tokens " + std::to_string(o.total_tokens));
    }

    // Majority vote against a brute-force count over every ordering. The
    // fixtures mix equivalent spellings and include a tie.
    const std::vector<std::vector<std::string>> fixtures{
        {"1/2", "0.5", "3", "\\frac{1}{2}", "3"},
        {"4", "7", "7", "4", "9"},
        {"2", "2.0", "5", "\\frac{10}{2}", "-1"},
    };
    for (const auto& base : fixtures) {
        std::vector<int> perm(base.size());
        std::iota(perm.begin(), perm.end(), 0);
        do {
            std::vector<std::string> order;
            for (int i : perm) order.push_back(base[static_cast<std::size_t>(i)]);
            std::vector<Rational> values;
            for (const auto& a : order) values.push_back(eval_rational(a));
            std::size_t winner = 0;
            std::size_t winner_count = 0;
            for (std::size_t i = 0; i < order.size(); ++i) {
                bool seen = false;
                for (std::size_t j = 0; j < i; ++j) seen = seen || values[j] == values[i];
                if (seen) continue;
                const auto count = static_cast<std::size_t>(
                    std::count_if(values.begin(), values.end(), [&](const Rational& v) { return v == values[i]; }));
                if (count > winner_count) winner = i, winner_count = count;
            }
            std::vector<MockEntry> entries;
            for (std::size_t i = 0; i < order.size(); ++i)
                entries.push_back(call_entry(static_cast<std::int64_t>(i), "generator", boxed(order[i]), 10));
            Scripted s(entries);
            const auto o = strategies::self_consistency(question("v"), static_cast<int>(order.size()), s.gen, cfg);
            c.expect(o.final_answer == order[winner], "vote picked " + o.final_answer + " over " + order[winner]);
            c.expect(o.total_tokens == 10 * static_cast<std::int64_t>(order.size()), "vote token total");
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    // Random scripted retry scenarios.
    std::mt19937_64 rng(777);
    for (int scenario = 0; scenario < 1000; ++scenario) {
        const int k = 2 + static_cast<int>(rng() % 9);
        const double tau = 0.5 + static_cast<double>(rng() % 90) / 10.0;
        std::vector<MockEntry> entries;
        for (int i = 0; i < k + 4; ++i)
            entries.push_back(call_entry(i, "generator", boxed(std::to_string(rng() % 5)), 100));
        std::vector<ScriptedRating> ratings;
        for (int r = 0; r < k + 4; ++r) {
            const auto kind = rng() % 10;
            ScriptedRating s;
            std::string text;
            if (kind == 0) {
                text = "no verdict";
            } else if (kind == 1) {
                text = rated(12, 3);
            } else {
                s = {true, static_cast<double>(rng() % 101) / 10.0, static_cast<double>(rng() % 101) / 10.0};
                text = rated(s.a, s.b);
            }
            ratings.push_back(s);
            entries.push_back(call_entry(r, "verifier", text, 50));
        }
        Scripted s(entries);
        const auto o = strategies::verifier_retry(question("r"), k, s.gen, s.ver, tau, cfg);
        const auto want = retry_oracle(ratings, k, tau);
        const std::string label = "scenario " + std::to_string(scenario);
        c.expect(o.generations_used <= k && s.script->calls("generator") <= k, label + " exceeded k generations");
        c.expect(o.verifier_calls <= k - 1 && s.script->calls("verifier") <= k - 1, label + " exceeded k-1 verifications");
        c.expect(o.generations_used == want.generations, label + " generations differ from oracle");
        c.expect(o.verifier_calls == want.verifier_calls, label + " verifier calls differ from oracle");
        c.expect(o.chosen_candidate == want.chosen, label + " chose " + std::to_string(o.chosen_candidate) +
                                                        ", oracle " + std::to_string(want.chosen));
        c.expect(o.total_tokens == 100 * o.generations_used + 50 * o.verifier_calls, label + " token sum");
    }
    return c;
}

Check token_direction() {
    Check c;
    constexpr int kQuestions = 50;
    constexpr int kLate = 10;  // accepted only after one extra generation
    std::vector<MockEntry> entries;
    std::vector<Question> questions;
    for (int i = 0; i < kQuestions; ++i) {
        const std::string id = "t" + std::to_string(100 + i);
        questions.push_back(question(id));
        const std::string tag = "Problem " + id + ":";
        entries.push_back(match_entry(tag, "generator", boxed("6"), 100));
        if (i < kLate) entries.push_back(match_entry(tag, "verifier", rated(3, 2), 100));
        entries.push_back(match_entry(tag, "verifier", rated(9, 1), 100));
    }
    // Retry: accepted questions cost 2 generations + 1 verification, late
    // ones 3 + 2. Self-consistency always costs 8 generations.
    const std::int64_t want_retry = 100 * ((kQuestions - kLate) * 3 + kLate * 5);
    const std::int64_t want_sc = 100 * kQuestions * 8;
    c.expect(kQuestions - kLate >= kQuestions * 8 / 10, "fixture accepts fewer than 80% on the first pair");

    strategies::StrategyConfig cfg;
    cfg.k = 8;
    cfg.concurrency = 4;
    Scripted retry_s(entries);
    const auto retry = strategies::run_batch(questions, strategies::Strategy::retry,
                                             {&retry_s.gen, &retry_s.ver, &retry_s.fin}, cfg);
    Scripted sc_s(entries);
    const auto sc = strategies::run_batch(questions, strategies::Strategy::self_consistency,
                                          {&sc_s.gen, &sc_s.ver, &sc_s.fin}, cfg);
    const auto eff = metrics::token_efficiency(retry, sc, metrics::TokenBasis::total);
    c.expect(eff.tokens_a == want_retry, "retry used " + std::to_string(eff.tokens_a) + ", expected " +
                                             std::to_string(want_retry));
    c.expect(eff.tokens_b == want_sc, "self-consistency used " + std::to_string(eff.tokens_b) + ", expected " +
                                          std::to_string(want_sc));
    c.expect(eff.token_ratio <= 0.6, "ratio " + num(eff.token_ratio));
    c.expect(std::abs(eff.token_ratio - static_cast<double>(want_retry) / static_cast<double>(want_sc)) <= 1e-12,
             "ratio differs from fixture arithmetic");
    return c;
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

Check calibration_and_pass_at_k() {
    Check c;
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> rating(0.0, 10.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<metrics::RatedLabel> records;
    for (int i = 0; i < 10000; ++i) {
        const double v = rating(rng);
        records.push_back({v, static_cast<Label>(coin(rng) < v / 10.0 ? 1 : 0)});
    }
    const auto mc = metrics::calibration(records);
    c.expect(mc.ece <= 0.02, "Monte-Carlo ece " + num(mc.ece));

    std::vector<metrics::RatedLabel> skewed;
    for (int i = 0; i < 100; ++i) skewed.push_back({10.0, static_cast<Label>(i % 2)});
    const auto s = metrics::calibration(skewed);
    c.expect(std::abs(s.ece - 0.45) <= 1e-9, "all-10 case ece " + num(s.ece));
    std::vector<metrics::RatedLabel> fives(100, {5.0, 1});
    const auto f = metrics::calibration(fives);
    c.expect(std::abs(f.ece - 0.45) <= 1e-9, "all-5 case ece " + num(f.ece));

    // pass@k against enumeration of every k-subset of n samples, c of them correct.
    for (int n = 1; n <= 8; ++n) {
        for (int correct = 0; correct <= n; ++correct) {
            for (int k = 1; k <= n; ++k) {
                std::int64_t subsets = 0;
                std::int64_t hit = 0;
                for (unsigned mask = 0; mask < (1u << n); ++mask) {
                    if (__builtin_popcount(mask) != k) continue;
                    ++subsets;
                    if ((mask & ((1u << correct) - 1u)) != 0) ++hit;
                }
                const double want = static_cast<double>(hit) / static_cast<double>(subsets);
                const double got = metrics::pass_at_k(n, correct, k);
                c.expect(std::abs(got - want) <= 1e-12, "pass@" + std::to_string(k) + " n=" + std::to_string(n) +
                                                            " c=" + std::to_string(correct) + " gave " + num(got));
                c.expect(static_cast<double>(subsets) == binom(n, k), "subset count");
            }
        }
    }
    return c;
}

std::vector<std::string> csv_header(const fs::path& p) {
    const std::string text = read_file(p);
    std::vector<std::string> cells;
    std::stringstream line(text.substr(0, text.find('\n')));
    for (std::string cell; std::getline(line, cell, ',');) cells.push_back(cell);
    return cells;
}

Check end_to_end(const fs::path& work) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = work / "e2e";
    const fs::path port_file = dir / "port";
    fs::create_directories(dir);

    int serve_code = -1;
    std::thread server([&] {
        serve_code = cli({"mock-serve", "--script", (kFixtures / "e2e_mock.jsonl").string(), "--port", "0",
                          "--port-file", port_file.string()});
    });
    for (int i = 0; i < 200 && !fs::exists(port_file); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(25));
    if (!fs::exists(port_file)) {
        c.expect(false, "mock server did not start");
        std::raise(SIGINT);
        server.join();
        return c;
    }
    const std::string base = "http://127.0.0.1:" + std::string(read_file(port_file).substr(0, read_file(port_file).find('\n'))) + "/v1";
    const std::string config = (kFixtures / "e2e_config.json").string();
    auto step = [&](const std::string& name, std::vector<std::string> args) {
        std::string err;
        const int code = cli(std::move(args), &err);
        c.expect(code == 0, name + " exited " + std::to_string(code) + ": " + err);
        return code == 0;
    };
    const std::vector<std::string> remote{"--generator-url", base, "--verifier-url", base, "--finalizer-url", base};
    auto with_remote = [&](std::vector<std::string> args) {
        args.insert(args.end(), remote.begin(), remote.end());
        return args;
    };

    bool ok = step("curate", {"curate", "--in", (kFixtures / "corpus.jsonl").string(), "--config", config, "--out-dir",
                              (dir / "data").string()});
    ok = ok && step("judge", with_remote({"run", "--strategy", "judge", "--config", config, "--rollouts", "16", "--in",
                                          (dir / "data" / "val.jsonl").string(), "--out", (dir / "judged.jsonl").string()}));
    for (const char* s : {"selfcons", "retry", "reflect"}) {
        ok = ok && step(s, with_remote({"run", "--strategy", s, "--config", config, "--in",
                                        (dir / "data" / "questions.jsonl").string(), "--out",
                                        (dir / (std::string(s) + ".jsonl")).string()}));
    }
    ok = ok && step("score", {"score", "--in", (dir / "judged.jsonl").string(), "--out", (dir / "scores.jsonl").string(),
                              "--group-size", "16", "--summary", (dir / "summary.json").string()});
    ok = ok && step("analyze", {"analyze", "--judgments", (dir / "judged.jsonl").string(), "--outcomes",
                                (dir / "retry.jsonl").string(), "--baseline", (dir / "selfcons.jsonl").string(),
                                "--responses", (dir / "data" / "labeled.jsonl").string(), "--out-dir",
                                (dir / "report").string()});
    std::raise(SIGINT);
    server.join();
    c.expect(serve_code == 0, "mock-serve exited " + std::to_string(serve_code));
    if (!ok) return c;

    const auto judged = read_jsonl(dir / "judged.jsonl");
    c.expect(judged.size() == 60 * 16, "judged " + std::to_string(judged.size()) + " rollouts");
    for (const auto& j : judged) c.expect(!j.at("failed").get<bool>(), "a judged rollout failed");
    const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    c.expect(summary.at("groups") == 60, "score grouped into " + summary.at("groups").dump());
    c.expect(summary.at("kept_groups").get<int>() > 0, "every group was dropped");

    const fs::path report = dir / "report";
    c.expect(csv_header(report / "calibration.csv") ==
                 std::vector<std::string>{"lo", "hi", "count", "mean_rating", "empirical_accuracy", "ideal_accuracy"},
             "calibration.csv header");
    c.expect(csv_header(report / "gt_accuracy.csv") == std::vector<std::string>{"gt_config", "count", "correct", "accuracy"},
             "gt_accuracy.csv header");
    c.expect(csv_header(report / "token_efficiency.csv").size() >= 6, "token_efficiency.csv header");
    const auto rep = nlohmann::json::parse(read_file(report / "report.json"));
    c.expect(rep.at("calibration").at("buckets").size() == 10, "calibration buckets");
    std::size_t judged_count = 0;
    for (const auto& [name, acc] : rep.at("gt_accuracy").at("configs").items()) {
        (void)gt_config_from_string(name);
        judged_count += acc.at("count").get<std::size_t>();
        const double a = acc.at("accuracy");
        c.expect(a >= 0.0 && a <= 1.0, name + " accuracy out of range");
    }
    c.expect(judged_count == judged.size(), "gt_accuracy counts " + std::to_string(judged_count) + " judgments");
    c.expect(rep.at("token_efficiency").at("token_ratio").get<double>() < 1.0, "retry did not save tokens");

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < 60.0, "took " + num(secs) + " s");
    return c;
}

}  // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / ("everify_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);

    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"reward exactness", reward_exactness},
        {"reward properties", reward_properties},
        {"advantage pipeline", advantage_pipeline},
        {"parser robustness", parser_robustness},
        {"equivalence oracle agreement", equivalence_agreement},
        {"curation determinism and bounds", [&] { return curation_bounds(work); }},
        {"strategy correctness", strategy_correctness},
        {"token-efficiency direction", token_direction},
        {"calibration and pass@k", calibration_and_pass_at_k},
        {"end-to-end", [&] { return end_to_end(work); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " ("
                  << static_cast<long>(ms) << " ms)";
        for (const auto& f : c.failures) std::cout << "\n    " << f;
        std::cout << std::endl;
        failed += c.ok ? 0 : 1;
    }
    fs::remove_all(work);
    return failed == 0 ? 0 : 1;
}
