#include "everify/cli.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <csignal>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "everify/app_config.hpp"
#include "everify/curation.hpp"
#include "everify/http_client.hpp"
#include "everify/json_io.hpp"
#include "everify/metrics.hpp"
#include "everify/reward.hpp"
#include "everify/strategies.hpp"

namespace everify {

namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

std::string fmt(double v) {
    if (!std::isfinite(v)) return {};
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string{};
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string{}; }

json opt_json(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

std::vector<json> to_records(const auto& items) {
    std::vector<json> out;
    out.reserve(items.size());
    for (const auto& x : items) out.emplace_back(x);
    return out;
}

// Options shared by subcommands that talk to models.
struct EndpointFlags {
    std::string mock;
    std::string url[3];
    std::string model[3];
    int max_retries = -1;
    double timeout = -1.0;
};

constexpr const char* kRoles[3] = {"generator", "verifier", "finalizer"};

void add_endpoint_flags(CLI::App* cmd, EndpointFlags& f) {
    cmd->add_option("--mock", f.mock, "Scripted mock JSONL served in-process")->check(CLI::ExistingFile);
    for (int i = 0; i < 3; ++i) {
        const std::string role = kRoles[i];
        cmd->add_option("--" + role + "-url", f.url[i], "Chat-completions base URL for the " + role);
        cmd->add_option("--" + role + "-model", f.model[i], "Model name sent to the " + role + " endpoint");
    }
    cmd->add_option("--max-retries", f.max_retries, "Retries per remote call");
    cmd->add_option("--timeout", f.timeout, "Seconds per remote call");
}

// Owns whatever clients a subcommand needs.
struct ClientSet {
    std::shared_ptr<MockScript> script;
    std::vector<std::unique_ptr<ModelClient>> owned;

    ModelClient* make(const std::string& role, EndpointConfig endpoint, const EndpointFlags& f, int index) {
        if (index >= 0 && !f.url[index].empty()) endpoint.url = f.url[index];
        if (index >= 0 && !f.model[index].empty()) endpoint.model = f.model[index];
        if (f.max_retries >= 0) endpoint.max_retries = f.max_retries;
        if (f.timeout > 0) endpoint.timeout_seconds = f.timeout;
        if (!f.mock.empty()) {
            if (!script) script = MockScript::load(f.mock);
            owned.push_back(std::make_unique<MockClient>(script, endpoint.model.empty() ? role : endpoint.model));
        } else {
            if (endpoint.url.empty()) throw ValidationError("no endpoint configured for the " + role);
            owned.push_back(std::make_unique<HttpClient>(endpoint.http(role)));
        }
        return owned.back().get();
    }
};

AppConfig base_config(const std::string& path) { return path.empty() ? AppConfig{} : load_app_config(path); }

// ---------------------------------------------------------------- curate

struct CurateFlags {
    std::string in;
    std::string responses;
    std::string out_dir;
    std::string config;
    std::uint64_t seed = 0;
    std::int64_t max_input_tokens = 0;
    double difficulty_cutoff = 0.0;
    std::int64_t pairs_per_question = 0;
    std::int64_t holdout_count = 0;
    std::int64_t template_overhead_tokens = 0;
    std::string judge_mock;
    std::string judge_url;
    std::string judge_model;
};

std::vector<curation::CuratedQuestion> read_corpus(const std::string& path, const std::string& responses_path) {
    std::vector<curation::CuratedQuestion> corpus;
    std::map<std::string, std::size_t> index;
    for (const auto& j : read_jsonl(path)) {
        curation::CuratedQuestion cq;
        cq.question = j.get<Question>();
        if (auto it = j.find("responses"); it != j.end()) {
            for (const auto& r : *it) {
                CandidateResponse resp;
                if (r.is_string()) resp.raw_text = r.get<std::string>();
                else resp = r.get<CandidateResponse>();
                resp.question_id = cq.question.id;
                cq.responses.push_back(std::move(resp));
            }
        }
        index[cq.question.id] = corpus.size();
        corpus.push_back(std::move(cq));
    }
    if (!responses_path.empty()) {
        for (const auto& j : read_jsonl(responses_path)) {
            auto r = j.get<CandidateResponse>();
            auto it = index.find(r.question_id);
            if (it == index.end()) throw ValidationError("response for unknown question '" + r.question_id + "'");
            corpus[it->second].responses.push_back(std::move(r));
        }
    }
    return corpus;
}

int cmd_curate(CLI::App& cmd, const CurateFlags& f, std::ostream& out) {
    AppConfig app = base_config(f.config);
    auto& c = app.curation;
    if (cmd.count("--seed")) c.seed = f.seed;
    if (cmd.count("--max-input-tokens")) c.max_input_tokens = f.max_input_tokens;
    if (cmd.count("--difficulty-cutoff")) c.difficulty_cutoff = f.difficulty_cutoff;
    if (cmd.count("--pairs-per-question")) c.pairs_per_question = f.pairs_per_question;
    if (cmd.count("--holdout-count")) c.holdout_count = f.holdout_count;
    if (cmd.count("--template-overhead-tokens")) c.template_overhead_tokens = f.template_overhead_tokens;
    c.validate();

    ClientSet clients;
    ModelClient* judge = nullptr;
    if (!f.judge_mock.empty() || !f.judge_url.empty() || !app.judge.url.empty()) {
        EndpointFlags ef;
        ef.mock = f.judge_mock;
        EndpointConfig endpoint = app.judge;
        if (!f.judge_url.empty()) endpoint.url = f.judge_url;
        if (!f.judge_model.empty()) endpoint.model = f.judge_model;
        judge = clients.make("judge", endpoint, ef, -1);
    }

    auto result = curation::run_pipeline(read_corpus(f.in, f.responses), c, default_tokenizer(), judge);

    std::vector<json> rejects;
    for (const auto& r : result.rejections) rejects.push_back({{"id", r.id}, {"reason", curation::to_string(r.reason)}});
    std::vector<json> questions;
    std::set<std::string> seen;
    for (const auto* part : {&result.split.train, &result.split.validation}) {
        for (const auto& p : *part) {
            if (seen.insert(p.question.id).second) questions.emplace_back(p.question);
        }
    }

    const fs::path dir(f.out_dir);
    fs::create_directories(dir);
    write_file_atomic(dir / "train.jsonl", to_jsonl(to_records(result.split.train)));
    write_file_atomic(dir / "val.jsonl", to_jsonl(to_records(result.split.validation)));
    write_file_atomic(dir / "rejects.jsonl", to_jsonl(rejects));
    write_file_atomic(dir / "labeled.jsonl", to_jsonl(to_records(result.labeled)));
    write_file_atomic(dir / "questions.jsonl", to_jsonl(questions));
    out << "train " << result.split.train.size() << " pairs, validation " << result.split.validation.size()
        << " pairs, " << result.rejections.size() << " rejections\n";
    return kExitOk;
}

// ---------------------------------------------------------------- run

struct RunFlags {
    std::string strategy;
    std::string in;
    std::string out = "outcomes.jsonl";
    std::string config;
    int k = 0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    int concurrency = 0;
    int rollouts = 16;
    bool reflect_shortcut = false;
    EndpointFlags endpoints;
};

std::vector<Question> read_questions(const std::string& path) {
    std::vector<Question> out;
    std::set<std::string> seen;
    for (const auto& j : read_jsonl(path)) {
        Question q = j.contains("question") && j["question"].is_object() ? j["question"].get<Question>() : j.get<Question>();
        if (seen.insert(q.id).second) out.push_back(std::move(q));
    }
    return out;
}

int cmd_run(CLI::App& cmd, const RunFlags& f, std::ostream& out) {
    AppConfig app = base_config(f.config);
    strategies::StrategyConfig cfg;
    cfg.k = cmd.count("--k") ? f.k : app.k;
    cfg.tau = cmd.count("--tau") ? f.tau : app.tau;
    cfg.seed = cmd.count("--seed") ? f.seed : app.seed;
    cfg.concurrency = cmd.count("--concurrency") ? f.concurrency : app.concurrency;
    cfg.reflect_consistency_shortcut = f.reflect_shortcut || app.reflect_consistency_shortcut;
    cfg.templates = resolve_templates(app.templates);
    cfg.generator_params = app.generator.params();
    cfg.verifier_params = app.verifier.params();
    cfg.finalizer_params = app.finalizer.params();
    if (cfg.k < 1) throw ValidationError("--k must be at least 1");
    if (cfg.concurrency < 1) throw ValidationError("--concurrency must be at least 1");

    ClientSet clients;
    const EndpointConfig* configured[3] = {&app.generator, &app.verifier, &app.finalizer};
    auto client = [&](int role) { return clients.make(kRoles[role], *configured[role], f.endpoints, role); };

    if (f.strategy == "judge") {
        std::vector<PairInstance> pairs;
        for (const auto& j : read_jsonl(f.in)) pairs.push_back(j.get<PairInstance>());
        auto records = strategies::judge_pairs(pairs, f.rollouts, *client(1), cfg);
        write_file_atomic(f.out, to_jsonl(to_records(records)));
        const auto failed = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.failed; });
        out << records.size() << " judgments, " << failed << " failed\n";
        return failed > 0 ? kExitClientError : kExitOk;
    }

    const auto strategy = strategies::strategy_from_string(f.strategy);
    if (strategy == strategies::Strategy::retry && (cfg.k < 2 || !(cfg.tau > 0.0 && cfg.tau < 10.0)))
        throw ValidationError("retry needs --k >= 2 and 0 < --tau < 10");
    const auto questions = read_questions(f.in);
    strategies::Clients cs;
    cs.generator = client(0);
    if (strategy == strategies::Strategy::retry || strategy == strategies::Strategy::reflect) cs.verifier = client(1);
    if (strategy == strategies::Strategy::reflect || strategy == strategies::Strategy::consistency)
        cs.finalizer = client(2);

    auto outcomes = strategies::run_batch(questions, strategy, cs, cfg);
    write_file_atomic(f.out, to_jsonl(to_records(outcomes)));
    std::size_t failed = 0, correct = 0, known = 0;
    std::int64_t tokens = 0;
    for (const auto& o : outcomes) {
        failed += o.failed ? 1 : 0;
        if (o.correct) {
            ++known;
            correct += *o.correct ? 1 : 0;
        }
        tokens += o.total_tokens;
    }
    out << outcomes.size() << " outcomes, " << correct << "/" << known << " correct, " << tokens << " tokens, "
        << failed << " failed\n";
    return failed > 0 ? kExitClientError : kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreFlags {
    std::string in;
    std::string out = "scores.jsonl";
    std::string summary;
    std::size_t group_size = 0;
    double epsilon = reward::kDefaultAdvantageEpsilon;
    double tol = 1e-9;
};

int cmd_score(const ScoreFlags& f, std::ostream& out) {
    const auto input = read_jsonl(f.in);
    std::vector<double> rewards;
    std::vector<std::string> group_of;
    for (std::size_t i = 0; i < input.size(); ++i) {
        const auto& j = input[i];
        VerifierJudgment judgment = j.contains("judgment") ? j["judgment"].get<VerifierJudgment>()
                                                           : verdict::judge_completion(j.value("completion", std::string{}));
        if (!j.contains("labels")) throw ValidationError("record " + std::to_string(i + 1) + " has no labels");
        rewards.push_back(reward::pair_reward(judgment, j["labels"].get<PairLabels>()).value);
        if (f.group_size > 0) group_of.push_back(std::to_string(i / f.group_size));
        else if (j.contains("group")) group_of.push_back(j["group"].is_string() ? j["group"].get<std::string>() : j["group"].dump());
        else if (j.contains("pair_id")) group_of.push_back(j["pair_id"].get<std::string>());
        else group_of.emplace_back();
    }
    if (f.group_size > 0 && input.size() % f.group_size != 0)
        throw ValidationError("record count " + std::to_string(input.size()) + " is not a multiple of --group-size");

    // Group membership in first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < group_of.size(); ++i) {
        if (group_of[i].empty()) continue;
        auto& m = members[group_of[i]];
        if (m.empty()) order.push_back(group_of[i]);
        m.push_back(i);
    }

    std::vector<std::optional<double>> advantage(input.size());
    std::vector<bool> dropped(input.size(), false);
    std::size_t dropped_groups = 0;
    for (const auto& g : order) {
        const auto& idx = members[g];
        std::vector<double> rs;
        for (auto i : idx) rs.push_back(rewards[i]);
        if (rs.size() < 2 || reward::population_stddev(rs) <= f.tol) {
            ++dropped_groups;
            for (auto i : idx) dropped[i] = true;
            continue;
        }
        const auto adv = reward::group_advantages(rs, f.epsilon);
        for (std::size_t n = 0; n < idx.size(); ++n) advantage[idx[n]] = adv[n];
    }

    std::vector<json> records;
    for (std::size_t i = 0; i < input.size(); ++i) {
        json r = {{"index", i}, {"reward", rewards[i]}};
        if (!group_of[i].empty()) {
            r["group"] = group_of[i];
            r["advantage"] = opt_json(advantage[i]);
            r["dropped"] = static_cast<bool>(dropped[i]);
        }
        records.push_back(std::move(r));
    }
    write_file_atomic(f.out, to_jsonl(records));
    const json summary = {{"records", input.size()},
                          {"groups", order.size()},
                          {"kept_groups", order.size() - dropped_groups},
                          {"dropped_groups", dropped_groups},
                          {"mean_reward", rewards.empty() ? json(nullptr) : json(reward::mean(rewards))}};
    if (!f.summary.empty()) write_file_atomic(f.summary, summary.dump(2) + "\n");
    out << summary.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeFlags {
    std::string judgments;
    std::string outcomes;
    std::string baseline;
    std::string responses;
    std::string out_dir = "report";
    int buckets = 10;
    double tau = 5.0;
    std::string rubric = "threshold";
    std::string token_basis = "total";
};

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string line;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) line += ',';
        first = false;
        if (c.find_first_of(",\"\n") != std::string::npos) {
            line += '"';
            for (char ch : c) {
                if (ch == '"') line += '"';
                line += ch;
            }
            line += '"';
        } else {
            line += c;
        }
    }
    return line + "\n";
}

std::vector<strategies::StrategyOutcome> read_outcomes(const std::string& path) {
    std::vector<strategies::StrategyOutcome> out;
    for (const auto& j : read_jsonl(path)) out.push_back(j.get<strategies::StrategyOutcome>());
    return out;
}

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out) {
    if (f.judgments.empty() && f.outcomes.empty() && f.responses.empty())
        throw ValidationError("analyze needs --judgments, --outcomes or --responses");
    const fs::path dir(f.out_dir);
    fs::create_directories(dir);
    json report = json::object();

    // Per-question pass counts from labeled responses, used for binning.
    std::map<std::string, std::vector<CandidateResponse>> by_question;
    if (!f.responses.empty()) {
        for (const auto& j : read_jsonl(f.responses)) {
            auto r = j.get<CandidateResponse>();
            by_question[r.question_id].push_back(std::move(r));
        }
        std::string csv = csv_row({"question_id", "responses", "correct", "distinct_answers", "distinct_incorrect"});
        json rows = json::array();
        for (const auto& [qid, rs] : by_question) {
            std::vector<CandidateResponse> wrong;
            std::int64_t correct = 0;
            for (const auto& r : rs) {
                if (r.label && *r.label != 0) ++correct;
                else wrong.push_back(r);
            }
            const auto distinct = metrics::distinct_answers(rs);
            const auto distinct_wrong = metrics::distinct_answers(wrong);
            csv += csv_row({qid, std::to_string(rs.size()), std::to_string(correct), std::to_string(distinct),
                            std::to_string(distinct_wrong)});
            rows.push_back({{"question_id", qid},
                            {"responses", rs.size()},
                            {"correct", correct},
                            {"distinct_answers", distinct},
                            {"distinct_incorrect", distinct_wrong}});
        }
        write_file_atomic(dir / "distinct_answers.csv", csv);
        report["distinct_answers"] = rows;
    }

    if (!f.judgments.empty()) {
        const auto rubric = f.rubric == "argmax" ? metrics::JudgmentRubric::argmax_mixed
                                                 : metrics::JudgmentRubric::threshold;
        std::vector<metrics::LabeledJudgment> records;
        std::vector<std::string> qids;
        std::size_t failed = 0;
        for (const auto& j : read_jsonl(f.judgments)) {
            auto r = j.get<strategies::JudgedRecord>();
            if (r.failed) {
                ++failed;
                continue;
            }
            records.push_back({r.judgment, r.labels});
            qids.push_back(r.question_id);
        }

        const auto acc = metrics::accuracy_by_gt_config(records, f.tau, rubric);
        std::string csv = csv_row({"gt_config", "count", "correct", "accuracy"});
        json acc_json = json::object();
        for (const auto& [config, a] : acc) {
            const std::string name(to_string(config));
            csv += csv_row({name, std::to_string(a.count), std::to_string(a.correct), fmt(a.accuracy)});
            acc_json[name] = {{"count", a.count}, {"correct", a.correct}, {"accuracy", a.accuracy}};
        }
        write_file_atomic(dir / "gt_accuracy.csv", csv);
        report["gt_accuracy"] = {{"tau", f.tau}, {"rubric", f.rubric}, {"configs", acc_json}};

        const auto cal = metrics::calibration(metrics::rated_labels(records), f.buckets);
        csv = csv_row({"lo", "hi", "count", "mean_rating", "empirical_accuracy", "ideal_accuracy"});
        json buckets = json::array();
        for (const auto& b : cal.buckets) {
            csv += csv_row({fmt(b.lo), fmt(b.hi), std::to_string(b.count), fmt(b.mean_rating),
                            fmt(b.empirical_accuracy), fmt(b.ideal_accuracy)});
            buckets.push_back({{"lo", b.lo},
                               {"hi", b.hi},
                               {"count", b.count},
                               {"mean_rating", number_or_null(b.mean_rating)},
                               {"empirical_accuracy", number_or_null(b.empirical_accuracy)},
                               {"ideal_accuracy", b.ideal_accuracy}});
        }
        write_file_atomic(dir / "calibration.csv", csv);
        report["calibration"] = {{"buckets", buckets}, {"total", cal.total}, {"ece", cal.ece}};

        std::vector<metrics::BinnedRating> binned;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (!records[i].judgment.ok()) continue;
            std::string bin = "all";
            if (auto it = by_question.find(qids[i]); it != by_question.end()) {
                const auto c = std::count_if(it->second.begin(), it->second.end(),
                                             [](const CandidateResponse& r) { return r.label && *r.label != 0; });
                bin = metrics::pass_bin(c);
            }
            binned.push_back({records[i].judgment.rating_a, records[i].labels.a, bin});
            binned.push_back({records[i].judgment.rating_b, records[i].labels.b, bin});
        }
        const auto sep = metrics::separation(binned);
        csv = csv_row({"bin", "n_correct", "n_incorrect", "mean_correct", "mean_incorrect", "var_correct",
                       "var_incorrect", "gap"});
        json sep_json = json::object();
        for (const auto& [bin, s] : sep.bins) {
            csv += csv_row({bin, std::to_string(s.n_correct), std::to_string(s.n_incorrect), fmt(s.mean_correct),
                            fmt(s.mean_incorrect), fmt(s.var_correct), fmt(s.var_incorrect), fmt(s.gap)});
            sep_json[bin] = {{"n_correct", s.n_correct},
                             {"n_incorrect", s.n_incorrect},
                             {"mean_correct", opt_json(s.mean_correct)},
                             {"mean_incorrect", opt_json(s.mean_incorrect)},
                             {"var_correct", opt_json(s.var_correct)},
                             {"var_incorrect", opt_json(s.var_incorrect)},
                             {"gap", opt_json(s.gap)}};
        }
        write_file_atomic(dir / "separation.csv", csv);
        report["separation"] = sep_json;
        report["judgments"] = {{"records", records.size()}, {"failed", failed}};
    }

    if (!f.outcomes.empty()) {
        const auto outcomes = read_outcomes(f.outcomes);
        const auto baseline = f.baseline.empty() ? outcomes : read_outcomes(f.baseline);
        const auto basis = f.token_basis == "generation" ? metrics::TokenBasis::generation : metrics::TokenBasis::total;
        const auto eff = metrics::token_efficiency(outcomes, baseline, basis);
        auto name = [](const std::vector<strategies::StrategyOutcome>& xs) {
            return xs.empty() ? std::string{} : xs.front().strategy;
        };
        std::string csv = csv_row({"strategy", "baseline", "basis", "questions", "accuracy", "baseline_accuracy",
                                   "tokens", "baseline_tokens", "token_ratio"});
        csv += csv_row({name(outcomes), name(baseline), f.token_basis, std::to_string(eff.questions),
                        fmt(eff.accuracy_a), fmt(eff.accuracy_b), std::to_string(eff.tokens_a),
                        std::to_string(eff.tokens_b), fmt(eff.token_ratio)});
        write_file_atomic(dir / "token_efficiency.csv", csv);
        report["token_efficiency"] = {{"strategy", name(outcomes)},
                                      {"baseline", name(baseline)},
                                      {"basis", f.token_basis},
                                      {"questions", eff.questions},
                                      {"accuracy", opt_json(eff.accuracy_a)},
                                      {"baseline_accuracy", opt_json(eff.accuracy_b)},
                                      {"tokens", eff.tokens_a},
                                      {"baseline_tokens", eff.tokens_b},
                                      {"token_ratio", eff.token_ratio}};
    }

    write_file_atomic(dir / "report.json", report.dump(2) + "\n");
    out << "wrote " << (dir / "report.json").string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- mock-serve

struct ServeFlags {
    std::string script;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string port_file;
};

int cmd_mock_serve(const ServeFlags& f, std::ostream& out) {
    MockServer server(MockScript::load(f.script));
    const int port = server.bind(f.host, f.port);
    g_stop = false;
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    server.start();
    out << "serving " << f.script << " on http://" << f.host << ":" << port << "/v1" << std::endl;
    if (!f.port_file.empty()) write_file_atomic(f.port_file, std::to_string(port) + "\n");
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pairwise verifier toolkit: curate, run, score, analyze, mock-serve", "everify"};
    app.require_subcommand(1);

    CurateFlags curate;
    auto* c = app.add_subcommand("curate", "Filter a corpus and write train/validation pair manifests");
    c->add_option("--in", curate.in, "Questions JSONL (each may carry a 'responses' array)")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("--responses", curate.responses, "Extra responses JSONL keyed by question_id")
        ->check(CLI::ExistingFile);
    c->add_option("--out-dir", curate.out_dir, "Output directory")->required();
    c->add_option("--config", curate.config, "Config file")->check(CLI::ExistingFile);
    c->add_option("--seed", curate.seed, "Sampling seed");
    c->add_option("--max-input-tokens", curate.max_input_tokens, "Pair input token limit");
    c->add_option("--difficulty-cutoff", curate.difficulty_cutoff, "Reject questions harder than this");
    c->add_option("--pairs-per-question", curate.pairs_per_question, "Pairs sampled per question");
    c->add_option("--holdout-count", curate.holdout_count, "Validation pairs");
    c->add_option("--template-overhead-tokens", curate.template_overhead_tokens, "Prompt tokens around a pair");
    c->add_option("--judge-mock", curate.judge_mock, "Mock script for the ambiguity judge")
        ->check(CLI::ExistingFile);
    c->add_option("--judge-url", curate.judge_url, "Endpoint for the ambiguity judge");
    c->add_option("--judge-model", curate.judge_model, "Model name for the ambiguity judge");

    RunFlags run;
    auto* r = app.add_subcommand("run", "Run a test-time strategy, or sample verifier judgments");
    r->add_option("--strategy", run.strategy, "selfcons | retry | reflect | consistency | judge")
        ->required()
        ->check(CLI::IsMember({"selfcons", "retry", "reflect", "consistency", "judge"}));
    r->add_option("--in", run.in, "Questions JSONL, or pair JSONL for judge")->required()->check(CLI::ExistingFile);
    r->add_option("--out", run.out, "Output JSONL");
    r->add_option("--config", run.config, "Config file")->check(CLI::ExistingFile);
    r->add_option("--k", run.k, "Generation budget");
    r->add_option("--tau", run.tau, "Acceptance threshold for retry");
    r->add_option("--seed", run.seed, "Seed");
    r->add_option("--concurrency", run.concurrency, "Questions in flight");
    r->add_option("--rollouts", run.rollouts, "Verifier samples per pair (judge)")->check(CLI::PositiveNumber);
    r->add_flag("--reflect-shortcut", run.reflect_shortcut, "Skip reflection when both candidates agree");
    add_endpoint_flags(r, run.endpoints);

    ScoreFlags score;
    auto* s = app.add_subcommand("score", "Rewards and group advantages for judged pairs");
    s->add_option("--in", score.in, "Judged JSONL with judgment or completion plus labels")
        ->required()
        ->check(CLI::ExistingFile);
    s->add_option("--out", score.out, "Output JSONL");
    s->add_option("--summary", score.summary, "Also write the summary JSON here");
    s->add_option("--group-size", score.group_size, "Consecutive records per rollout group");
    s->add_option("--epsilon", score.epsilon, "Advantage denominator epsilon");
    s->add_option("--tol", score.tol, "Zero-variance tolerance");

    AnalyzeFlags analyze;
    auto* a = app.add_subcommand("analyze", "Metrics report over judgment and outcome logs");
    a->add_option("--judgments", analyze.judgments, "Judged JSONL")->check(CLI::ExistingFile);
    a->add_option("--outcomes", analyze.outcomes, "Strategy outcomes JSONL")->check(CLI::ExistingFile);
    a->add_option("--baseline", analyze.baseline, "Baseline outcomes JSONL for token efficiency")
        ->check(CLI::ExistingFile);
    a->add_option("--responses", analyze.responses, "Labeled responses JSONL")->check(CLI::ExistingFile);
    a->add_option("--out-dir", analyze.out_dir, "Report directory");
    a->add_option("--buckets", analyze.buckets, "Calibration buckets")->check(CLI::Range(2, 1000));
    a->add_option("--tau", analyze.tau, "Threshold for judgment accuracy");
    a->add_option("--rubric", analyze.rubric, "threshold | argmax")->check(CLI::IsMember({"threshold", "argmax"}));
    a->add_option("--token-basis", analyze.token_basis, "total | generation")
        ->check(CLI::IsMember({"total", "generation"}));

    ServeFlags serve;
    auto* m = app.add_subcommand("mock-serve", "Serve a mock script over the chat-completions wire format");
    m->add_option("--script", serve.script, "Mock script JSONL")->required()->check(CLI::ExistingFile);
    m->add_option("--host", serve.host, "Bind address");
    m->add_option("--port", serve.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    m->add_option("--port-file", serve.port_file, "Write the bound port here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitInputError;
    }

    try {
        if (c->parsed()) return cmd_curate(*c, curate, out);
        if (r->parsed()) return cmd_run(*r, run, out);
        if (s->parsed()) return cmd_score(score, out);
        if (a->parsed()) return cmd_analyze(analyze, out);
        if (m->parsed()) return cmd_mock_serve(serve, out);
    } catch (const ClientError& e) {
        err << "error: " << e.what() << "\n";
        return kExitClientError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

}  // namespace everify
