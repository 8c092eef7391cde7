#include "everify/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "everify/reward.hpp"

namespace everify::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool predicted_correct(double v, double tau) { return v >= tau; }

}  // namespace

bool judgment_correct(const LabeledJudgment& r, double tau, JudgmentRubric rubric) {
    if (!r.judgment.ok()) return false;
    const double va = r.judgment.rating_a;
    const double vb = r.judgment.rating_b;
    if (rubric == JudgmentRubric::argmax_mixed && r.labels.a != r.labels.b) {
        return r.labels.a != 0 ? va > vb : vb > va;
    }
    return predicted_correct(va, tau) == (r.labels.a != 0) && predicted_correct(vb, tau) == (r.labels.b != 0);
}

std::map<GtConfig, GtAccuracy> accuracy_by_gt_config(std::span<const LabeledJudgment> records, double tau,
                                                     JudgmentRubric rubric) {
    std::map<GtConfig, GtAccuracy> out;
    for (const auto& r : records) {
        auto& acc = out[gt_config(r.labels)];
        ++acc.count;
        if (judgment_correct(r, tau, rubric)) ++acc.correct;
    }
    for (auto& [_, acc] : out) acc.accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.count);
    return out;
}

std::vector<RatedLabel> rated_labels(std::span<const LabeledJudgment> records) {
    std::vector<RatedLabel> out;
    out.reserve(records.size() * 2);
    for (const auto& r : records) {
        if (!r.judgment.ok()) continue;
        out.push_back({r.judgment.rating_a, r.labels.a});
        out.push_back({r.judgment.rating_b, r.labels.b});
    }
    return out;
}

CalibrationReport calibration(std::span<const RatedLabel> records, int n_buckets) {
    if (n_buckets < 2) throw std::invalid_argument("calibration needs at least two buckets");
    const double width = 10.0 / n_buckets;
    CalibrationReport report;
    report.buckets.resize(static_cast<std::size_t>(n_buckets));
    std::vector<double> rating_sum(report.buckets.size(), 0.0);
    std::vector<double> label_sum(report.buckets.size(), 0.0);
    for (int b = 0; b < n_buckets; ++b) {
        auto& bucket = report.buckets[static_cast<std::size_t>(b)];
        bucket.lo = b * width;
        bucket.hi = b + 1 == n_buckets ? 10.0 : (b + 1) * width;
        bucket.ideal_accuracy = (bucket.lo + bucket.hi) / 2.0 / 10.0;
    }
    for (const auto& r : records) {
        if (!reward::rating_in_range(r.rating)) throw std::invalid_argument("calibration rating outside [0,10]");
        const auto idx = std::min(static_cast<std::size_t>(r.rating / width), report.buckets.size() - 1);
        ++report.buckets[idx].count;
        rating_sum[idx] += r.rating;
        label_sum[idx] += r.label != 0 ? 1.0 : 0.0;
    }
    report.total = records.size();
    double ece = 0.0;
    for (std::size_t i = 0; i < report.buckets.size(); ++i) {
        auto& bucket = report.buckets[i];
        if (bucket.count == 0) {
            bucket.mean_rating = kNaN;
            bucket.empirical_accuracy = kNaN;
            continue;
        }
        const auto n = static_cast<double>(bucket.count);
        bucket.mean_rating = rating_sum[i] / n;
        bucket.empirical_accuracy = label_sum[i] / n;
        ece += n / static_cast<double>(report.total) * std::abs(bucket.empirical_accuracy - bucket.ideal_accuracy);
    }
    report.ece = ece;
    return report;
}

double pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k) {
    if (k < 1 || k > n || c < 0 || c > n) throw std::invalid_argument("pass_at_k needs 1 <= k <= n and 0 <= c <= n");
    if (n - c < k) return 1.0;
    // C(n-c,k)/C(n,k) = prod_{i=n-c+1}^{n} (1 - k/i)
    double miss = 1.0;
    for (std::int64_t i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    return 1.0 - miss;
}

double success_rate(std::span<const Label> samples, std::int64_t k) {
    const auto n = static_cast<std::int64_t>(samples.size());
    const auto c = static_cast<std::int64_t>(std::count_if(samples.begin(), samples.end(), [](Label y) { return y != 0; }));
    return pass_at_k(n, c, k);
}

std::string pass_bin(std::int64_t correct) {
    if (correct <= 0) return "0";
    if (correct <= 5) return "1-5";
    if (correct <= 10) return "6-10";
    return ">10";
}

SeparationReport separation(std::span<const BinnedRating> records) {
    struct Acc {
        std::vector<double> correct, incorrect;
    };
    std::map<std::string, Acc> acc;
    for (const auto& r : records) (r.label != 0 ? acc[r.bin].correct : acc[r.bin].incorrect).push_back(r.rating);

    auto summarize = [](const std::vector<double>& xs, std::optional<double>& mean, std::optional<double>& var) {
        if (xs.empty()) return;
        mean = reward::mean(xs);
        const double sd = reward::population_stddev(xs);
        var = sd * sd;
    };
    SeparationReport report;
    for (const auto& [bin, a] : acc) {
        SeparationBin out;
        out.n_correct = a.correct.size();
        out.n_incorrect = a.incorrect.size();
        summarize(a.correct, out.mean_correct, out.var_correct);
        summarize(a.incorrect, out.mean_incorrect, out.var_incorrect);
        if (out.mean_correct && out.mean_incorrect) out.gap = *out.mean_correct - *out.mean_incorrect;
        report.bins.emplace(bin, out);
    }
    return report;
}

std::size_t distinct_answers(std::span<const CandidateResponse> responses, const verdict::EquivalenceOracle& oracle) {
    std::vector<const std::string*> reps;
    bool no_answer = false;
    for (const auto& r : responses) {
        if (!r.extracted_answer || r.extracted_answer->empty()) {
            no_answer = true;
            continue;
        }
        const std::string& ans = *r.extracted_answer;
        const bool known = std::any_of(reps.begin(), reps.end(),
                                       [&](const std::string* rep) { return verdict::answers_equivalent(*rep, ans, oracle); });
        if (!known) reps.push_back(&ans);
    }
    return reps.size() + (no_answer ? 1 : 0);
}

TokenEfficiency token_efficiency(std::span<const strategies::StrategyOutcome> a,
                                 std::span<const strategies::StrategyOutcome> b, TokenBasis basis) {
    auto ids = [](std::span<const strategies::StrategyOutcome> xs) {
        std::multiset<std::string> out;
        for (const auto& o : xs) out.insert(o.question_id);
        return out;
    };
    if (ids(a) != ids(b)) throw std::invalid_argument("token_efficiency needs the same question set on both sides");
    auto tokens = [basis](const strategies::StrategyOutcome& o) {
        return basis == TokenBasis::total ? o.total_tokens : o.generation_tokens;
    };
    auto accuracy = [](std::span<const strategies::StrategyOutcome> xs) -> std::optional<double> {
        std::size_t known = 0;
        std::size_t right = 0;
        for (const auto& o : xs) {
            if (!o.correct) continue;
            ++known;
            right += *o.correct ? 1 : 0;
        }
        if (known == 0) return std::nullopt;
        return static_cast<double>(right) / static_cast<double>(known);
    };
    TokenEfficiency out;
    for (const auto& o : a) out.tokens_a += tokens(o);
    for (const auto& o : b) out.tokens_b += tokens(o);
    if (out.tokens_b <= 0) throw std::invalid_argument("token_efficiency baseline used no tokens");
    out.token_ratio = static_cast<double>(out.tokens_a) / static_cast<double>(out.tokens_b);
    out.accuracy_a = accuracy(a);
    out.accuracy_b = accuracy(b);
    out.questions = a.size();
    return out;
}

}  // namespace everify::metrics
