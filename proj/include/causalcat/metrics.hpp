#pragma once

// Evaluation mathematics: per-class precision/recall/F1 with macro and
// weighted aggregates, confusion matrix, Fleiss' kappa and its
// interpretation bands, and the Mann-Whitney U test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "causalcat/corpus.hpp"
#include "causalcat/error.hpp"

namespace causalcat {

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    // Set when the corresponding denominator was zero and 0 was reported.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
    bool present = false;  // appears among gold labels or predictions
};

struct EvalReport {
    std::array<ClassScores, kNumClasses> per_class;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};  // [gold][predicted]
    std::size_t total = 0;
    std::optional<double> mean_loss;

    bool operator==(const EvalReport&) const = default;
};

inline bool operator==(const ClassScores& a, const ClassScores& b) {
    return a.precision == b.precision && a.recall == b.recall && a.f1 == b.f1 && a.support == b.support &&
           a.precision_undefined == b.precision_undefined && a.recall_undefined == b.recall_undefined &&
           a.f1_undefined == b.f1_undefined && a.present == b.present;
}

inline EvalReport evaluate(const std::vector<CausalCategory>& preds, const std::vector<CausalCategory>& golds) {
    if (preds.size() != golds.size())
        throw LengthMismatch("predictions (" + std::to_string(preds.size()) + ") and gold labels (" +
                             std::to_string(golds.size()) + ") differ in length");
    if (preds.empty()) throw EmptyInput("cannot evaluate an empty prediction list");
    EvalReport r;
    r.total = preds.size();
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (const auto c : {preds[i], golds[i]})
            if (c == CausalCategory::NoReason || code(c) < 1 || code(c) > kNumClasses)
                throw BadCategoryCode("evaluation labels must be categories 1..5");
        ++r.confusion[class_index(golds[i])][class_index(preds[i])];
    }
    std::size_t correct = 0;
    for (int c = 0; c < kNumClasses; ++c) correct += r.confusion[c][c];
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);

    for (int c = 0; c < kNumClasses; ++c) {
        const std::size_t tp = r.confusion[c][c];
        std::size_t predicted = 0;
        std::size_t actual = 0;
        for (int k = 0; k < kNumClasses; ++k) {
            predicted += r.confusion[k][c];
            actual += r.confusion[c][k];
        }
        auto& s = r.per_class[c];
        s.support = actual;
        s.present = actual > 0 || predicted > 0;
        if (predicted > 0) s.precision = static_cast<double>(tp) / static_cast<double>(predicted);
        else s.precision_undefined = true;
        if (actual > 0) s.recall = static_cast<double>(tp) / static_cast<double>(actual);
        else s.recall_undefined = true;
        if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
        else s.f1_undefined = true;
    }
    // Macro averages run over the classes present in gold or predictions.
    double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0, weighted = 0.0;
    int present = 0;
    for (const auto& s : r.per_class) {
        weighted += s.f1 * static_cast<double>(s.support);
        if (!s.present) continue;
        ++present;
        macro_p += s.precision;
        macro_r += s.recall;
        macro_f += s.f1;
    }
    r.macro_precision = macro_p / present;
    r.macro_recall = macro_r / present;
    r.macro_f1 = macro_f / present;
    r.weighted_f1 = weighted / static_cast<double>(r.total);
    return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json classes = nlohmann::json::array();
    for (int c = 0; c < kNumClasses; ++c) {
        const auto& s = r.per_class[c];
        classes.push_back({{"category", std::string(category_name(category_from_index(c)))},
                           {"code", c + 1},
                           {"precision", s.precision},
                           {"recall", s.recall},
                           {"f1", s.f1},
                           {"support", s.support},
                           {"present", s.present},
                           {"precision_undefined", s.precision_undefined},
                           {"recall_undefined", s.recall_undefined},
                           {"f1_undefined", s.f1_undefined}});
    }
    nlohmann::json confusion = nlohmann::json::array();
    for (const auto& row : r.confusion) confusion.push_back(row);
    nlohmann::json j = {{"classes", classes},
                        {"accuracy", r.accuracy},
                        {"macro_precision", r.macro_precision},
                        {"macro_recall", r.macro_recall},
                        {"macro_f1", r.macro_f1},
                        {"weighted_f1", r.weighted_f1},
                        {"total", r.total},
                        {"confusion", confusion}};
    j["mean_loss"] = r.mean_loss ? nlohmann::json(*r.mean_loss) : nlohmann::json(nullptr);
    return j;
}

/// Rows are gold categories, columns predicted categories.
inline std::string confusion_csv(const EvalReport& r) {
    std::string out = "gold\\predicted";
    for (int c = 0; c < kNumClasses; ++c) out += "," + std::string(category_name(category_from_index(c)));
    out += '\n';
    for (int g = 0; g < kNumClasses; ++g) {
        out += category_name(category_from_index(g));
        for (int p = 0; p < kNumClasses; ++p) out += "," + std::to_string(r.confusion[g][p]);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fleiss' kappa

/// counts(i, j): raters who put item i in category j. Every row sums to the
/// same rater count k.
struct RatingMatrix {
    std::vector<std::vector<int>> counts;

    std::size_t items() const { return counts.size(); }
    std::size_t categories() const { return counts.empty() ? 0 : counts.front().size(); }

    /// Raters per item; throws InvalidMatrix when the matrix is malformed.
    int raters() const {
        if (counts.empty()) throw InvalidMatrix("rating matrix has no items");
        const std::size_t C = counts.front().size();
        if (C < 2) throw InvalidMatrix("rating matrix needs at least two categories");
        int k = -1;
        for (const auto& row : counts) {
            if (row.size() != C) throw InvalidMatrix("rating matrix rows differ in length");
            int sum = 0;
            for (const int v : row) {
                if (v < 0) throw InvalidMatrix("negative rating count");
                sum += v;
            }
            if (k < 0) k = sum;
            else if (sum != k) throw InvalidMatrix("items have different numbers of raters");
        }
        if (k < 2) throw InvalidMatrix("at least two raters per item are required");
        return k;
    }
};

struct FleissResult {
    double kappa = 0.0;
    double observed_agreement = 0.0;  // mean per-item agreement P-bar
    double expected_agreement = 0.0;  // chance agreement P-bar_e
};

inline FleissResult fleiss_agreement(const RatingMatrix& ratings) {
    const int k = ratings.raters();
    const std::size_t N = ratings.items();
    const std::size_t C = ratings.categories();
    std::vector<double> column(C, 0.0);
    double p_bar = 0.0;
    for (const auto& row : ratings.counts) {
        double sq = 0.0;
        for (std::size_t j = 0; j < C; ++j) {
            sq += static_cast<double>(row[j]) * row[j];
            column[j] += row[j];
        }
        p_bar += (sq - k) / (static_cast<double>(k) * (k - 1));
    }
    p_bar /= static_cast<double>(N);
    double p_e = 0.0;
    for (const double col : column) {
        const double pj = col / (static_cast<double>(N) * k);
        p_e += pj * pj;
    }
    if (p_e >= 1.0) throw DegenerateAgreement("all ratings fall in one category; kappa is undefined");
    return {(p_bar - p_e) / (1.0 - p_e), p_bar, p_e};
}

inline double fleiss_kappa(const RatingMatrix& ratings) { return fleiss_agreement(ratings).kappa; }

enum class AgreementBand { LessThanChance, Slight, Fair, Moderate, Substantial, AlmostPerfect };

inline std::string_view band_name(AgreementBand b) {
    switch (b) {
        case AgreementBand::LessThanChance: return "Less than chance agreement";
        case AgreementBand::Slight: return "Slight agreement";
        case AgreementBand::Fair: return "Fair agreement";
        case AgreementBand::Moderate: return "Moderate agreement";
        case AgreementBand::Substantial: return "Substantial agreement";
        case AgreementBand::AlmostPerfect: return "Almost perfect agreement";
    }
    return "";
}

/// Bands: <0, 0.01-0.20, 0.21-0.40, 0.41-0.60, 0.61-0.80, 0.81-0.99.
/// Zero belongs to Slight; a value in a gap between printed ranges goes to the
/// nearer edge, with the midpoint (0.205, ...) going up; 1.0 is AlmostPerfect.
inline AgreementBand kappa_band(double kappa) {
    if (std::isnan(kappa) || kappa > 1.0 + 1e-12) throw InvalidConfig("kappa must be a number <= 1");
    if (kappa < 0.0) return AgreementBand::LessThanChance;
    if (kappa < 0.205) return AgreementBand::Slight;
    if (kappa < 0.405) return AgreementBand::Fair;
    if (kappa < 0.605) return AgreementBand::Moderate;
    if (kappa < 0.805) return AgreementBand::Substantial;
    return AgreementBand::AlmostPerfect;
}

inline std::string kappa_interpretation(double kappa) { return std::string(band_name(kappa_band(kappa))); }

// ---------------------------------------------------------------------------
// Mann-Whitney U

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of the first sample
    double p = 1.0;  // two-sided
    bool significant = false;
    bool exact = false;
};

inline constexpr std::size_t kExactMannWhitneyLimit = 16;

/// Midranks (1-based) of the pooled sample.
inline std::vector<double> midranks(const std::vector<double>& pooled) {
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return pooled[x] < pooled[y]; });
    std::vector<double> ranks(pooled.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Number of ways to choose the first sample's ranks so that its U equals u,
/// for u = 0 .. n1*n2 (no ties). Uses the recurrence
/// f(n1, n2, u) = f(n1-1, n2, u-n2) + f(n1, n2-1, u).
inline std::vector<double> mann_whitney_null_counts(std::size_t n1, std::size_t n2) {
    // table[b][u] for the current a, built up over a = 0..n1.
    const std::size_t max_u = n1 * n2;
    std::vector<std::vector<double>> prev(n2 + 1, std::vector<double>(max_u + 1, 0.0));
    for (std::size_t b = 0; b <= n2; ++b) prev[b][0] = 1.0;  // a = 0: only U = 0
    for (std::size_t a = 1; a <= n1; ++a) {
        std::vector<std::vector<double>> cur(n2 + 1, std::vector<double>(max_u + 1, 0.0));
        cur[0][0] = 1.0;  // b = 0: only U = 0
        for (std::size_t b = 1; b <= n2; ++b) {
            for (std::size_t u = 0; u <= a * b; ++u) {
                double v = cur[b - 1][u];
                if (u >= b) v += prev[b][u - b];
                cur[b][u] = v;
            }
        }
        prev = std::move(cur);
    }
    return prev[n2];
}

/// Two-sided test. Exact null distribution when the pooled size is at most 16
/// and there are no ties; otherwise the normal approximation with tie and
/// continuity corrections.
inline MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                                        double alpha = 0.05) {
    if (a.empty() || b.empty()) throw EmptyInput("Mann-Whitney U needs two non-empty samples");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n1; ++i) rank_sum += ranks[i];

    MannWhitneyResult res;
    res.u = rank_sum - static_cast<double>(n1 * (n1 + 1)) / 2.0;

    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    bool ties = false;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1) ties = true;
        tie_term += t * t * t - t;
        i = j + 1;
    }

    const double mean_u = static_cast<double>(n1 * n2) / 2.0;
    if (!ties && n1 + n2 <= kExactMannWhitneyLimit) {
        const auto counts = mann_whitney_null_counts(n1, n2);
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto u = static_cast<std::size_t>(std::llround(res.u));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (k <= u) lower += counts[k];
            if (k >= u) upper += counts[k];
        }
        res.p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
        res.exact = true;
    } else {
        const double n = static_cast<double>(n1 + n2);
        const double var =
            static_cast<double>(n1 * n2) / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
        if (var <= 0.0) {
            res.p = 1.0;
        } else {
            const double z = std::max(0.0, std::abs(res.u - mean_u) - 0.5) / std::sqrt(var);
            res.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
        }
    }
    res.significant = res.p < alpha;
    return res;
}

}  // namespace causalcat
