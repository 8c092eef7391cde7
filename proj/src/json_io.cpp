#include "everify/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace everify {

namespace {

template <typename T>
T required(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    return j.at(key).get<T>();
}

}  // namespace

json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

double number_or_nan(const json& j) {
    if (j.is_number()) return j.get<double>();
    return std::numeric_limits<double>::quiet_NaN();
}

void to_json(json& j, const Question& q) {
    j = json{{"id", q.id},
             {"text", q.text},
             {"ground_truth", q.ground_truth},
             {"source", to_string(q.source)},
             {"metadata", q.metadata}};
}

void from_json(const json& j, Question& q) {
    q.id = required<std::string>(j, "id");
    q.text = j.value("text", std::string{});
    q.ground_truth = required<std::string>(j, "ground_truth");
    q.source = source_from_string(j.value("source", std::string{"synthetic"}));
    q.metadata.clear();
    if (auto it = j.find("metadata"); it != j.end() && it->is_object()) {
        for (const auto& [k, v] : it->items()) {
            q.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
}

void to_json(json& j, const CandidateResponse& r) {
    j = json{{"question_id", r.question_id},
             {"raw_text", r.raw_text},
             {"stripped_text", r.stripped_text},
             {"extracted_answer", r.extracted_answer ? json(*r.extracted_answer) : json(nullptr)},
             {"label", r.label ? json(*r.label) : json(nullptr)},
             {"token_count", r.token_count}};
}

void from_json(const json& j, CandidateResponse& r) {
    r.question_id = j.value("question_id", std::string{});
    r.raw_text = required<std::string>(j, "raw_text");
    r.stripped_text = j.value("stripped_text", std::string{});
    r.extracted_answer.reset();
    if (auto it = j.find("extracted_answer"); it != j.end() && it->is_string()) {
        r.extracted_answer = it->get<std::string>();
    }
    r.label.reset();
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
        r.label = it->is_boolean() ? static_cast<Label>(it->get<bool>()) : it->get<Label>();
    }
    r.token_count = j.value("token_count", std::int64_t{0});
}

void to_json(json& j, const PairLabels& l) { j = json::array({l.a, l.b}); }

void from_json(const json& j, PairLabels& l) {
    if (!j.is_array() || j.size() != 2) throw ValidationError("labels must be a two-element array");
    l.a = j[0].is_boolean() ? static_cast<Label>(j[0].get<bool>()) : j[0].get<Label>();
    l.b = j[1].is_boolean() ? static_cast<Label>(j[1].get<bool>()) : j[1].get<Label>();
}

void to_json(json& j, const PairInstance& p) {
    j = json{{"question", p.question},
             {"response_a", p.response_a},
             {"response_b", p.response_b},
             {"labels", p.labels}};
}

void from_json(const json& j, PairInstance& p) {
    p.question = required<Question>(j, "question");
    p.response_a = required<CandidateResponse>(j, "response_a");
    p.response_b = required<CandidateResponse>(j, "response_b");
    p.labels = required<PairLabels>(j, "labels");
}

void to_json(json& j, const VerifierJudgment& v) {
    j = json{{"reasoning", v.reasoning},
             {"rating_a", number_or_null(v.rating_a)},
             {"rating_b", number_or_null(v.rating_b)},
             {"parse_status", to_string(v.parse_status)}};
}

void from_json(const json& j, VerifierJudgment& v) {
    v.reasoning = j.value("reasoning", std::string{});
    v.rating_a = number_or_nan(j.value("rating_a", json(nullptr)));
    v.rating_b = number_or_nan(j.value("rating_b", json(nullptr)));
    v.parse_status = parse_status_from_string(required<std::string>(j, "parse_status"));
}

void to_json(json& j, const StageConfig& s) {
    j = json{{"max_seq_len", s.max_seq_len},   {"global_batch", s.global_batch},
             {"rollouts_per_prompt", s.rollouts_per_prompt},
             {"learning_rate", s.learning_rate}, {"kl_coef", s.kl_coef},
             {"entropy_coef", s.entropy_coef}, {"difficulty_cutoff", s.difficulty_cutoff},
             {"steps", s.steps}};
}

void from_json(const json& j, StageConfig& s) {
    s.max_seq_len = required<std::int64_t>(j, "max_seq_len");
    s.global_batch = required<std::int64_t>(j, "global_batch");
    s.rollouts_per_prompt = required<std::int64_t>(j, "rollouts_per_prompt");
    s.learning_rate = required<double>(j, "learning_rate");
    s.kl_coef = required<double>(j, "kl_coef");
    s.entropy_coef = required<double>(j, "entropy_coef");
    s.difficulty_cutoff = required<double>(j, "difficulty_cutoff");
    s.steps = required<std::int64_t>(j, "steps");
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string to_jsonl(const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace everify
