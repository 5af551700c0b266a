#pragma once

// Scaled dot-product attention: a dense masked kernel and a sparse kernel
// that evaluates only the scores listed per row (sliding window, dilation,
// global positions).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "causalcat/error.hpp"

namespace causalcat {

using Index = Eigen::Index;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kMaxSequenceLength = 4096;

enum class AttentionKind {
    Longformer,  // sliding window + global positions, two projection sets
    Dense        // every valid token attends to every valid token
};

struct AttentionConfig {
    int window = 8;  // even; each side sees window / 2 positions
    int dilation = 1;
    std::vector<int> global_positions = {0};
    int max_len = 512;
    AttentionKind kind = AttentionKind::Longformer;

    void validate() const {
        if (window <= 0 || window % 2 != 0) throw InvalidConfig("attention window must be a positive even integer");
        if (dilation < 1) throw InvalidConfig("dilation must be >= 1");
        if (max_len < 2 || max_len > kMaxSequenceLength)
            throw InvalidConfig("max_len must be in [2, " + std::to_string(kMaxSequenceLength) + "]");
        if (window >= max_len) throw InvalidConfig("attention window must be smaller than max_len");
        for (const int g : global_positions)
            if (g < 0 || g >= max_len) throw InvalidConfig("global position out of range: " + std::to_string(g));
    }

    bool is_global(Index i) const {
        return kind == AttentionKind::Longformer &&
               std::find(global_positions.begin(), global_positions.end(), static_cast<int>(i)) !=
                   global_positions.end();
    }

    nlohmann::json to_json() const {
        return {{"window", window},
                {"dilation", dilation},
                {"global_positions", global_positions},
                {"max_len", max_len},
                {"kind", kind == AttentionKind::Dense ? "dense" : "longformer"}};
    }

    static AttentionConfig from_json(const nlohmann::json& j) {
        AttentionConfig c;
        if (j.contains("window")) c.window = j.at("window").get<int>();
        if (j.contains("dilation")) c.dilation = j.at("dilation").get<int>();
        if (j.contains("global_positions")) c.global_positions = j.at("global_positions").get<std::vector<int>>();
        if (j.contains("max_len")) c.max_len = j.at("max_len").get<int>();
        if (j.contains("kind")) {
            const auto k = j.at("kind").get<std::string>();
            if (k == "dense") c.kind = AttentionKind::Dense;
            else if (k == "longformer") c.kind = AttentionKind::Longformer;
            else throw InvalidConfig("unknown attention kind '" + k + "'");
        }
        return c;
    }
};

/// Softmax-weighted sum over an explicit column list for one query row.
/// Writes the normalized weights to `weights` (same order as `cols`).
template <class QRow, class OutRow>
void attend_row(const QRow& q, const Eigen::Ref<const Matrix>& K, const Eigen::Ref<const Matrix>& V,
                const std::vector<Index>& cols, double scale, OutRow&& out, double* weights) {
    out.setZero();
    if (cols.empty()) return;
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        weights[c] = scale * q.dot(K.row(cols[c]));
        max_score = std::max(max_score, weights[c]);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        weights[c] = std::exp(weights[c] - max_score);
        total += weights[c];
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
        weights[c] /= total;
        out.noalias() += weights[c] * V.row(cols[c]);
    }
}

/// Masked softmax(Q K^T / sqrt(d_k)) as a dense n x n matrix; disallowed
/// entries are exactly zero.
inline Matrix full_attention_weights(const Matrix& Q, const Matrix& K, const BoolMatrix& mask) {
    if (Q.cols() != K.cols() || mask.rows() != Q.rows() || mask.cols() != K.rows())
        throw ShapeMismatch("full_attention: Q, K and mask shapes disagree");
    const double scale = 1.0 / std::sqrt(static_cast<double>(Q.cols()));
    Matrix scores = (Q * K.transpose()) * scale;
    for (Index i = 0; i < scores.rows(); ++i) {
        double max_score = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (Index j = 0; j < scores.cols(); ++j) {
            if (mask(i, j)) {
                max_score = std::max(max_score, scores(i, j));
                any = true;
            }
        }
        if (!any) throw AllMaskedRow("attention row " + std::to_string(i) + " has no allowed position");
        double total = 0.0;
        for (Index j = 0; j < scores.cols(); ++j) {
            const double e = mask(i, j) ? std::exp(scores(i, j) - max_score) : 0.0;
            scores(i, j) = e;
            total += e;
        }
        scores.row(i) /= total;
    }
    return scores;
}

inline Matrix full_attention(const Matrix& Q, const Matrix& K, const Matrix& V, const BoolMatrix& mask) {
    if (K.rows() != V.rows()) throw ShapeMismatch("full_attention: K and V row counts differ");
    return full_attention_weights(Q, K, mask) * V;
}

inline Matrix full_attention(const Matrix& Q, const Matrix& K, const Matrix& V) {
    return full_attention(Q, K, V, BoolMatrix::Constant(Q.rows(), K.rows(), true));
}

/// Positions {i + k*d : k in [-w/2, w/2]} inside [0, valid_len), ascending.
inline std::vector<Index> window_positions(Index i, const AttentionConfig& config, Index valid_len) {
    std::vector<Index> cols;
    const Index half = config.window / 2;
    cols.reserve(static_cast<std::size_t>(config.window + 1));
    for (Index k = -half; k <= half; ++k) {
        const Index j = i + k * config.dilation;
        if (j >= 0 && j < valid_len) cols.push_back(j);
    }
    return cols;
}

/// Boolean mask equivalent to the dilated sliding window over the first
/// `valid_len` positions. Rows at or beyond `valid_len` are all false.
inline BoolMatrix window_mask(Index n, const AttentionConfig& config, Index valid_len) {
    BoolMatrix mask = BoolMatrix::Constant(n, n, false);
    for (Index i = 0; i < std::min(n, valid_len); ++i)
        for (const Index j : window_positions(i, config, valid_len)) mask(i, j) = true;
    return mask;
}

/// Attention restricted to the dilated sliding window. Only O(n * w) score
/// entries are evaluated. Rows at or beyond `valid_len` are zero.
inline Matrix sliding_window_attention(const Matrix& Q, const Matrix& K, const Matrix& V,
                                       const AttentionConfig& config, Index valid_len) {
    if (config.window <= 0 || config.window % 2 != 0)
        throw InvalidConfig("attention window must be a positive even integer");
    if (config.dilation < 1) throw InvalidConfig("dilation must be >= 1");
    if (Q.cols() != K.cols() || K.rows() != V.rows() || Q.rows() != K.rows())
        throw ShapeMismatch("sliding_window_attention: Q, K, V shapes disagree");
    if (valid_len > Q.rows()) throw ShapeMismatch("valid_len exceeds sequence length");
    const double scale = 1.0 / std::sqrt(static_cast<double>(Q.cols()));
    Matrix out = Matrix::Zero(Q.rows(), V.cols());
    std::vector<double> weights(static_cast<std::size_t>(config.window + 1));
    for (Index i = 0; i < valid_len; ++i) {
        const auto cols = window_positions(i, config, valid_len);
        attend_row(Q.row(i), K, V, cols, scale, out.row(i), weights.data());
    }
    return out;
}

}  // namespace causalcat
