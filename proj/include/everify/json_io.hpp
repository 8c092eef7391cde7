#pragma once

// JSON mappings for the domain types plus JSONL file helpers.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "everify/core.hpp"

namespace everify {

using json = nlohmann::json;

void to_json(json& j, const Question& q);
void from_json(const json& j, Question& q);
void to_json(json& j, const CandidateResponse& r);
void from_json(const json& j, CandidateResponse& r);
void to_json(json& j, const PairLabels& l);
void from_json(const json& j, PairLabels& l);
void to_json(json& j, const PairInstance& p);
void from_json(const json& j, PairInstance& p);
void to_json(json& j, const VerifierJudgment& v);
void from_json(const json& j, VerifierJudgment& v);
void to_json(json& j, const StageConfig& s);
void from_json(const json& j, StageConfig& s);

/// Finite doubles map to numbers; NaN and infinities map to null.
json number_or_null(double v);
/// Inverse of number_or_null.
double number_or_nan(const json& j);

/// Reads one JSON object per non-blank line. Throws ValidationError with the
/// offending line number on malformed input.
std::vector<json> read_jsonl(const std::filesystem::path& path);

/// Serializes records one per line.
std::string to_jsonl(const std::vector<json>& records);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace everify
