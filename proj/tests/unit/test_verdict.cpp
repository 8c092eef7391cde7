#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "everify/json_io.hpp"
#include "everify/verdict.hpp"

using namespace everify;
using namespace everify::verdict;

TEST(StripThink, SeparatesReasoning) {
    auto p = strip_think("<think>abc</think>final");
    EXPECT_EQ(p.reasoning, "abc");
    EXPECT_EQ(p.final_answer_region, "final");
}

TEST(StripThink, NoMarkers) {
    auto p = strip_think("plain text");
    EXPECT_EQ(p.reasoning, "");
    EXPECT_EQ(p.final_answer_region, "plain text");
}

TEST(StripThink, UnclosedOpenMakesRestReasoning) {
    auto p = strip_think("pre <think>never closed");
    EXPECT_EQ(p.final_answer_region, "pre ");
    EXPECT_EQ(p.reasoning, "never closed");
}

TEST(StripThink, StrayCloseMakesPrefixReasoning) {
    auto p = strip_think("thinking here</think>Answer");
    EXPECT_EQ(p.reasoning, "thinking here");
    EXPECT_EQ(p.final_answer_region, "Answer");
}

TEST(StripThink, MultipleSpans) {
    auto p = strip_think("a<think>1</think>b<think>2</think>c");
    EXPECT_EQ(p.reasoning, "12");
    EXPECT_EQ(p.final_answer_region, "abc");
}

TEST(StripThink, RegionNeverContainsMarkers) {
    std::mt19937_64 rng(11);
    const std::vector<std::string> parts{"<think>", "</think>", "x", " ", "<thi", "nk>", "</", "Response A: 3"};
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const int n = static_cast<int>(rng() % 12);
        for (int k = 0; k < n; ++k) s += parts[rng() % parts.size()];
        auto p = strip_think(s);
        EXPECT_EQ(p.final_answer_region.find("<think>"), std::string::npos) << s;
        EXPECT_EQ(p.final_answer_region.find("</think>"), std::string::npos) << s;
        EXPECT_LE(p.final_answer_region.size() + p.reasoning.size(), s.size());
        EXPECT_EQ(strip_think(p.final_answer_region).final_answer_region, p.final_answer_region) << s;
    }
}

TEST(ParseRatings, LabeledFormat) {
    auto j = parse_ratings("Response A: 8\nResponse B: 2.5");
    EXPECT_EQ(j.parse_status, ParseStatus::ok);
    EXPECT_EQ(j.rating_a, 8.0);
    EXPECT_EQ(j.rating_b, 2.5);
}

TEST(ParseRatings, BoxedPairWins) {
    auto j = parse_ratings("Response A: 1 Response B: 1 \\boxed{6, 7}");
    EXPECT_EQ(j.rating_a, 6.0);
    EXPECT_EQ(j.rating_b, 7.0);
}

TEST(ParseRatings, BareNumbersIgnoreOutOfTen) {
    auto j = parse_ratings("I give 9/10 and 4 / 10");
    EXPECT_EQ(j.parse_status, ParseStatus::ok);
    EXPECT_EQ(j.rating_a, 9.0);
    EXPECT_EQ(j.rating_b, 4.0);
}

TEST(ParseRatings, Statuses) {
    EXPECT_EQ(parse_ratings("").parse_status, ParseStatus::malformed);
    EXPECT_EQ(parse_ratings("nothing").parse_status, ParseStatus::missing_ratings);
    EXPECT_EQ(parse_ratings("Response A: 4").parse_status, ParseStatus::missing_ratings);
    auto j = parse_ratings("Response A: 14\nResponse B: 3");
    EXPECT_EQ(j.parse_status, ParseStatus::out_of_range);
    EXPECT_EQ(j.rating_a, 14.0);
    EXPECT_TRUE(std::isnan(parse_ratings("nothing").rating_a));
}

TEST(ParseRatings, GoldenFixtures) {
    const auto rows = read_jsonl(EVERIFY_FIXTURE_DIR "/verifier_golden.jsonl");
    ASSERT_GE(rows.size(), 20u);
    for (const auto& row : rows) {
        const auto completion = row.at("completion").get<std::string>();
        const auto j = judge_completion(completion);
        EXPECT_EQ(to_string(j.parse_status), row.at("parse_status").get<std::string>()) << completion;
        if (row.at("rating_a").is_null()) {
            EXPECT_TRUE(std::isnan(j.rating_a)) << completion;
        } else {
            EXPECT_EQ(j.rating_a, row.at("rating_a").get<double>()) << completion;
            EXPECT_EQ(j.rating_b, row.at("rating_b").get<double>()) << completion;
        }
        EXPECT_EQ(j.reasoning, row.at("reasoning").get<std::string>()) << completion;
    }
}

TEST(ExtractBoxed, LastBalancedBox) {
    EXPECT_EQ(extract_boxed("\\boxed{1} then \\boxed{\\frac{1}{2}}"), "\\frac{1}{2}");
    EXPECT_EQ(extract_boxed("\\boxed {42}"), "42");
    EXPECT_FALSE(extract_boxed("no box").has_value());
    EXPECT_FALSE(extract_boxed("\\boxed{1} \\boxed{2").has_value());
    EXPECT_EQ(extract_boxed("\\boxed{}"), "");
}

TEST(AnswersEquivalent, NumericForms) {
    EXPECT_TRUE(answers_equivalent("1/2", "0.5"));
    EXPECT_TRUE(answers_equivalent("\\frac{1}{2}", "0.5"));
    EXPECT_TRUE(answers_equivalent("-\\frac{3}{4}", "-0.75"));
    EXPECT_TRUE(answers_equivalent("1,000", "1000"));
    EXPECT_TRUE(answers_equivalent("$6$", "6"));
    EXPECT_FALSE(answers_equivalent("1/3", "0.33"));
    EXPECT_FALSE(answers_equivalent("6", "7"));
}

TEST(AnswersEquivalent, SymbolicFallsBackToStrings) {
    EXPECT_TRUE(answers_equivalent("x+1", "x + 1"));
    EXPECT_FALSE(answers_equivalent("x+1", "1+x"));
}

TEST(AnswersEquivalent, OracleSeam) {
    EquivalenceOracle always = [](std::string_view, std::string_view) { return std::optional<bool>(true); };
    EquivalenceOracle defer = [](std::string_view, std::string_view) { return std::optional<bool>(); };
    EquivalenceOracle throws = [](std::string_view, std::string_view) -> std::optional<bool> {
        throw std::runtime_error("boom");
    };
    EXPECT_TRUE(answers_equivalent("x+1", "1+x", always));
    EXPECT_FALSE(answers_equivalent("6", "7", defer));
    EXPECT_TRUE(answers_equivalent("0.5", "1/2", throws));
}

TEST(AnswersEquivalent, NeverThrowsOnNoise) {
    std::mt19937_64 rng(5);
    const std::string alphabet = "0123456789+-*/^(){}[]\\fracdsqt., $x";
    for (int i = 0; i < 3000; ++i) {
        std::string a, b;
        for (int k = static_cast<int>(rng() % 20); k > 0; --k) a += alphabet[rng() % alphabet.size()];
        for (int k = static_cast<int>(rng() % 20); k > 0; --k) b += alphabet[rng() % alphabet.size()];
        EXPECT_NO_THROW(answers_equivalent(a, b));
    }
}
