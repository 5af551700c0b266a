#pragma once

// Longformer-style encoder and classification head, with an explicit
// backward pass. Rows are tokens: X is [n x H] and projections are X * W.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "causalcat/attention.hpp"
#include "causalcat/corpus.hpp"
#include "causalcat/error.hpp"
#include "causalcat/random.hpp"
#include "causalcat/vocab.hpp"

namespace causalcat {

enum class Activation { Gelu, Tanh };

inline std::string_view activation_name(Activation a) { return a == Activation::Gelu ? "gelu" : "tanh"; }

inline Activation parse_activation(std::string_view s) {
    if (s == "gelu") return Activation::Gelu;
    if (s == "tanh") return Activation::Tanh;
    throw InvalidConfig("unknown activation '" + std::string(s) + "'");
}

struct ModelDims {
    int vocab = 3;
    int hidden = 64;
    int layers = 2;
    int heads = 1;
    int ffn = 256;  // 4 * hidden unless overridden
    int max_len = 512;
    int classes = kNumClasses;
    Activation activation = Activation::Gelu;

    void validate() const {
        if (vocab < 3 || hidden < 1 || layers < 1 || heads < 1 || ffn < 1 || max_len < 2 || classes < 2)
            throw InvalidConfig("model dimensions must be positive");
        if (hidden % heads != 0) throw InvalidConfig("hidden size must be divisible by the head count");
    }

    nlohmann::json to_json() const {
        return {{"vocab", vocab}, {"hidden", hidden},   {"layers", layers},
                {"heads", heads}, {"ffn", ffn},         {"max_len", max_len},
                {"classes", classes}, {"activation", std::string(activation_name(activation))}};
    }

    static ModelDims from_json(const nlohmann::json& j) {
        ModelDims d;
        d.vocab = j.at("vocab").get<int>();
        d.hidden = j.at("hidden").get<int>();
        d.layers = j.at("layers").get<int>();
        d.heads = j.at("heads").get<int>();
        d.ffn = j.at("ffn").get<int>();
        d.max_len = j.at("max_len").get<int>();
        d.classes = j.at("classes").get<int>();
        d.activation = parse_activation(j.at("activation").get<std::string>());
        return d;
    }

    bool operator==(const ModelDims&) const = default;
};

struct LayerParams {
    // Sliding-window projections and global projections, each [H x H].
    Matrix wq_s, wk_s, wv_s;
    Matrix wq_g, wk_g, wv_g;
    Matrix wo, bo;  // output projection [H x H], bias [1 x H]
    Matrix ln1_gamma, ln1_beta;
    Matrix w1, b1;  // [H x F], [1 x F]
    Matrix w2, b2;  // [F x H], [1 x H]
    Matrix ln2_gamma, ln2_beta;

    template <class Self, class F>
    static void visit(Self& self, const std::string& prefix, F&& f) {
        f(prefix + "wq_s", self.wq_s);
        f(prefix + "wk_s", self.wk_s);
        f(prefix + "wv_s", self.wv_s);
        f(prefix + "wq_g", self.wq_g);
        f(prefix + "wk_g", self.wk_g);
        f(prefix + "wv_g", self.wv_g);
        f(prefix + "wo", self.wo);
        f(prefix + "bo", self.bo);
        f(prefix + "ln1_gamma", self.ln1_gamma);
        f(prefix + "ln1_beta", self.ln1_beta);
        f(prefix + "w1", self.w1);
        f(prefix + "b1", self.b1);
        f(prefix + "w2", self.w2);
        f(prefix + "b2", self.b2);
        f(prefix + "ln2_gamma", self.ln2_gamma);
        f(prefix + "ln2_beta", self.ln2_beta);
    }
};

struct ModelParams {
    ModelDims dims;
    Matrix token_embedding;     // [V x H]
    Matrix position_embedding;  // [max_len x H]
    std::vector<LayerParams> layers;
    Matrix classifier_w;  // [H x C]
    Matrix classifier_b;  // [1 x C]

    /// Visits every tensor in a fixed order (the checkpoint order).
    template <class F>
    void for_each(F&& f) {
        visit_all(*this, f);
    }
    template <class F>
    void for_each(F&& f) const {
        visit_all(*this, f);
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for_each([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
        return n;
    }

    static ModelParams zeros(const ModelDims& dims) {
        dims.validate();
        ModelParams p;
        p.dims = dims;
        const Index H = dims.hidden;
        const Index F = dims.ffn;
        p.token_embedding = Matrix::Zero(dims.vocab, H);
        p.position_embedding = Matrix::Zero(dims.max_len, H);
        p.layers.resize(static_cast<std::size_t>(dims.layers));
        for (auto& l : p.layers) {
            for (Matrix* m : {&l.wq_s, &l.wk_s, &l.wv_s, &l.wq_g, &l.wk_g, &l.wv_g, &l.wo}) *m = Matrix::Zero(H, H);
            l.bo = Matrix::Zero(1, H);
            l.ln1_gamma = Matrix::Zero(1, H);
            l.ln1_beta = Matrix::Zero(1, H);
            l.w1 = Matrix::Zero(H, F);
            l.b1 = Matrix::Zero(1, F);
            l.w2 = Matrix::Zero(F, H);
            l.b2 = Matrix::Zero(1, H);
            l.ln2_gamma = Matrix::Zero(1, H);
            l.ln2_beta = Matrix::Zero(1, H);
        }
        p.classifier_w = Matrix::Zero(H, dims.classes);
        p.classifier_b = Matrix::Zero(1, dims.classes);
        return p;
    }

    /// Weights uniform in [-scale, scale]; biases zero; normalization gains one.
    static ModelParams random(const ModelDims& dims, std::uint64_t seed, double scale = 0.05) {
        ModelParams p = zeros(dims);
        Rng rng(seed);
        p.for_each([&](const std::string& name, Matrix& m) {
            const bool is_gain = name.ends_with("_gamma");
            const bool is_bias = name.ends_with("_beta") || name.ends_with(".bo") || name.ends_with(".b1") ||
                                 name.ends_with(".b2") || name == "classifier_b";
            if (is_gain) m.setOnes();
            else if (!is_bias)
                for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
        });
        return p;
    }

    /// Same shapes, all zero (gradient buffers, optimizer moments).
    ModelParams zeros_like() const { return zeros(dims); }

    void set_zero() {
        for_each([](const std::string&, Matrix& m) { m.setZero(); });
    }

    /// Rounds every value to the nearest float, matching checkpoint storage.
    void round_to_float() {
        for_each([](const std::string&, Matrix& m) {
            for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(static_cast<float>(m.data()[i]));
        });
    }

private:
    template <class Self, class F>
    static void visit_all(Self& self, F& f) {
        f(std::string("token_embedding"), self.token_embedding);
        f(std::string("position_embedding"), self.position_embedding);
        for (std::size_t l = 0; l < self.layers.size(); ++l)
            LayerParams::visit(self.layers[l], "layer" + std::to_string(l) + ".", f);
        f(std::string("classifier_w"), self.classifier_w);
        f(std::string("classifier_b"), self.classifier_b);
    }
};

// ---------------------------------------------------------------------------
// Building blocks

namespace nn {

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
    Matrix xhat;
    Vector inv_std;
};

inline Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, LayerNormCache* cache) {
    const Index n = x.rows();
    const Index h = x.cols();
    Matrix xhat(n, h);
    Vector inv(n);
    for (Index i = 0; i < n; ++i) {
        const double mu = x.row(i).mean();
        const double var = (x.row(i).array() - mu).square().mean();
        inv(i) = 1.0 / std::sqrt(var + kLayerNormEps);
        xhat.row(i) = (x.row(i).array() - mu) * inv(i);
    }
    Matrix y = (xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv);
    }
    return y;
}

inline Matrix layer_norm_backward(const Matrix& dy, const Matrix& gamma, const LayerNormCache& cache,
                                  Matrix& dgamma, Matrix& dbeta) {
    dgamma.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
    dbeta.row(0) += dy.colwise().sum();
    const Matrix dxhat = dy.array().rowwise() * gamma.row(0).array();
    Matrix dx(dy.rows(), dy.cols());
    for (Index i = 0; i < dy.rows(); ++i) {
        const double mean_d = dxhat.row(i).mean();
        const double mean_dx = dxhat.row(i).dot(cache.xhat.row(i)) / static_cast<double>(dy.cols());
        dx.row(i) = cache.inv_std(i) * (dxhat.row(i).array() - mean_d - cache.xhat.row(i).array() * mean_dx);
    }
    return dx;
}

inline double activate(double x, Activation a) {
    if (a == Activation::Tanh) return std::tanh(x);
    constexpr double c = 0.7978845608028654;  // sqrt(2 / pi)
    return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

inline double activate_grad(double x, Activation a) {
    if (a == Activation::Tanh) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    constexpr double c = 0.7978845608028654;
    const double t = std::tanh(c * (x + 0.044715 * x * x * x));
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * 0.044715 * x * x);
}

/// Inverted dropout mask: entries are 0 or 1 / (1 - rate). Empty when inactive.
inline Matrix dropout_mask(Index rows, Index cols, double rate, Rng* rng) {
    if (!rng || rate <= 0.0) return {};
    Matrix m(rows, cols);
    const double keep = 1.0 - rate;
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
    return m;
}

inline void apply_mask(Matrix& x, const Matrix& mask) {
    if (mask.size() != 0) x.array() *= mask.array();
}

}  // namespace nn

// ---------------------------------------------------------------------------
// Layer

/// Columns attended by one row, and which projection set produced them.
struct RowAttention {
    bool global = false;
    std::vector<Index> cols;
    std::vector<double> weights;  // [head][col], row-major
};

struct LayerCache {
    Matrix x;
    Matrix q_s, k_s, v_s, q_g, k_g, v_g;
    std::vector<RowAttention> rows;
    Matrix attn;  // concatenated heads, [n x H]
    Matrix drop1;
    nn::LayerNormCache ln1;
    Matrix y1;
    Matrix f1;  // pre-activation
    Matrix g;
    Matrix drop2;
    nn::LayerNormCache ln2;
};

/// Columns a row attends to. Global rows (and every row in dense mode) see
/// all valid tokens; other rows see their dilated window plus the global
/// positions.
inline std::vector<Index> attended_columns(Index i, const AttentionConfig& config, Index valid_len) {
    std::vector<Index> cols;
    if (config.kind == AttentionKind::Dense || config.is_global(i)) {
        cols.resize(static_cast<std::size_t>(valid_len));
        for (Index j = 0; j < valid_len; ++j) cols[static_cast<std::size_t>(j)] = j;
        return cols;
    }
    cols = window_positions(i, config, valid_len);
    for (const int g : config.global_positions) {
        if (g >= valid_len) continue;
        if (std::find(cols.begin(), cols.end(), static_cast<Index>(g)) == cols.end()) cols.push_back(g);
    }
    std::sort(cols.begin(), cols.end());
    return cols;
}

struct DropoutContext {
    double rate = 0.0;
    Rng* rng = nullptr;  // null disables dropout (inference)
};

/// One transformer block with Longformer attention, post-norm:
///   Y1 = LN(X + Dropout(Attn(X) Wo + bo)); Y = LN(Y1 + Dropout(FFN(Y1))).
/// Rows at or beyond `valid_len` neither attend nor are attended.
inline Matrix longformer_layer(const Matrix& X, const LayerParams& p, const ModelDims& dims,
                               const AttentionConfig& config, Index valid_len, LayerCache* cache = nullptr,
                               DropoutContext dropout = {}) {
    const Index n = X.rows();
    const Index H = dims.hidden;
    if (X.cols() != H) throw ShapeMismatch("layer input width does not match hidden size");
    if (valid_len > n) throw ShapeMismatch("valid_len exceeds sequence length");
    const Index heads = dims.heads;
    const Index dh = H / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix q_s = X * p.wq_s;
    Matrix k_s = X * p.wk_s;
    Matrix v_s = X * p.wv_s;
    bool any_global = false;
    if (config.kind == AttentionKind::Longformer)
        for (const int g : config.global_positions) any_global = any_global || g < valid_len;
    Matrix q_g, k_g, v_g;
    if (any_global) {
        q_g = X * p.wq_g;
        k_g = X * p.wk_g;
        v_g = X * p.wv_g;
    }

    Matrix attn = Matrix::Zero(n, H);
    std::vector<RowAttention> rows(static_cast<std::size_t>(valid_len));
    for (Index i = 0; i < valid_len; ++i) {
        auto& ra = rows[static_cast<std::size_t>(i)];
        ra.global = config.is_global(i);
        ra.cols = attended_columns(i, config, valid_len);
        ra.weights.resize(ra.cols.size() * static_cast<std::size_t>(heads));
        const Matrix& Q = ra.global ? q_g : q_s;
        const Matrix& K = ra.global ? k_g : k_s;
        const Matrix& V = ra.global ? v_g : v_s;
        for (Index h = 0; h < heads; ++h) {
            attend_row(Q.row(i).segment(h * dh, dh), K.middleCols(h * dh, dh), V.middleCols(h * dh, dh), ra.cols,
                       scale, attn.row(i).segment(h * dh, dh),
                       ra.weights.data() + static_cast<std::size_t>(h) * ra.cols.size());
        }
    }

    Matrix proj = attn * p.wo;
    proj.rowwise() += p.bo.row(0);
    Matrix drop1 = nn::dropout_mask(n, H, dropout.rate, dropout.rng);
    nn::apply_mask(proj, drop1);
    nn::LayerNormCache ln1;
    Matrix y1 = nn::layer_norm(X + proj, p.ln1_gamma, p.ln1_beta, &ln1);

    Matrix f1 = y1 * p.w1;
    f1.rowwise() += p.b1.row(0);
    Matrix g = f1.unaryExpr([&](double v) { return nn::activate(v, dims.activation); });
    Matrix f2 = g * p.w2;
    f2.rowwise() += p.b2.row(0);
    Matrix drop2 = nn::dropout_mask(n, H, dropout.rate, dropout.rng);
    nn::apply_mask(f2, drop2);
    nn::LayerNormCache ln2;
    Matrix y2 = nn::layer_norm(y1 + f2, p.ln2_gamma, p.ln2_beta, &ln2);

    if (cache) {
        cache->x = X;
        cache->q_s = std::move(q_s);
        cache->k_s = std::move(k_s);
        cache->v_s = std::move(v_s);
        cache->q_g = std::move(q_g);
        cache->k_g = std::move(k_g);
        cache->v_g = std::move(v_g);
        cache->rows = std::move(rows);
        cache->attn = std::move(attn);
        cache->drop1 = std::move(drop1);
        cache->ln1 = std::move(ln1);
        cache->y1 = std::move(y1);
        cache->f1 = std::move(f1);
        cache->g = std::move(g);
        cache->drop2 = std::move(drop2);
        cache->ln2 = std::move(ln2);
    }
    return y2;
}

/// Accumulates parameter gradients into `grad` and returns dL/dX.
inline Matrix longformer_layer_backward(const Matrix& dy, const LayerParams& p, const ModelDims& dims,
                                        const LayerCache& c, LayerParams& grad) {
    const Index n = dy.rows();
    const Index H = dims.hidden;
    const Index heads = dims.heads;
    const Index dh = H / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix dr2 = nn::layer_norm_backward(dy, p.ln2_gamma, c.ln2, grad.ln2_gamma, grad.ln2_beta);
    Matrix dy1 = dr2;
    Matrix df2 = dr2;
    nn::apply_mask(df2, c.drop2);
    grad.w2.noalias() += c.g.transpose() * df2;
    grad.b2.row(0) += df2.colwise().sum();
    Matrix dg = df2 * p.w2.transpose();
    Matrix df1(dg.rows(), dg.cols());
    for (Index i = 0; i < dg.size(); ++i)
        df1.data()[i] = dg.data()[i] * nn::activate_grad(c.f1.data()[i], dims.activation);
    grad.w1.noalias() += c.y1.transpose() * df1;
    grad.b1.row(0) += df1.colwise().sum();
    dy1.noalias() += df1 * p.w1.transpose();

    Matrix dr1 = nn::layer_norm_backward(dy1, p.ln1_gamma, c.ln1, grad.ln1_gamma, grad.ln1_beta);
    Matrix dx = dr1;
    Matrix dproj = dr1;
    nn::apply_mask(dproj, c.drop1);
    grad.wo.noalias() += c.attn.transpose() * dproj;
    grad.bo.row(0) += dproj.colwise().sum();
    const Matrix dattn = dproj * p.wo.transpose();

    Matrix dq_s = Matrix::Zero(n, H), dk_s = Matrix::Zero(n, H), dv_s = Matrix::Zero(n, H);
    const bool has_global = c.q_g.size() != 0;
    Matrix dq_g, dk_g, dv_g;
    if (has_global) {
        dq_g = Matrix::Zero(n, H);
        dk_g = Matrix::Zero(n, H);
        dv_g = Matrix::Zero(n, H);
    }

    std::vector<double> dp;
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        const auto& ra = c.rows[i];
        const Index row = static_cast<Index>(i);
        const Matrix& Q = ra.global ? c.q_g : c.q_s;
        const Matrix& K = ra.global ? c.k_g : c.k_s;
        const Matrix& V = ra.global ? c.v_g : c.v_s;
        Matrix& dQ = ra.global ? dq_g : dq_s;
        Matrix& dK = ra.global ? dk_g : dk_s;
        Matrix& dV = ra.global ? dv_g : dv_s;
        const std::size_t m = ra.cols.size();
        dp.resize(m);
        for (Index h = 0; h < heads; ++h) {
            const double* w = ra.weights.data() + static_cast<std::size_t>(h) * m;
            const auto dout = dattn.row(row).segment(h * dh, dh);
            double weighted = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const Index j = ra.cols[k];
                dp[k] = dout.dot(V.row(j).segment(h * dh, dh));
                weighted += w[k] * dp[k];
                dV.row(j).segment(h * dh, dh) += w[k] * dout;
            }
            for (std::size_t k = 0; k < m; ++k) {
                const Index j = ra.cols[k];
                const double ds = w[k] * (dp[k] - weighted) * scale;
                dQ.row(row).segment(h * dh, dh) += ds * K.row(j).segment(h * dh, dh);
                dK.row(j).segment(h * dh, dh) += ds * Q.row(row).segment(h * dh, dh);
            }
        }
    }

    const Matrix xt = c.x.transpose();
    grad.wq_s.noalias() += xt * dq_s;
    grad.wk_s.noalias() += xt * dk_s;
    grad.wv_s.noalias() += xt * dv_s;
    dx.noalias() += dq_s * p.wq_s.transpose() + dk_s * p.wk_s.transpose() + dv_s * p.wv_s.transpose();
    if (has_global) {
        grad.wq_g.noalias() += xt * dq_g;
        grad.wk_g.noalias() += xt * dk_g;
        grad.wv_g.noalias() += xt * dv_g;
        dx.noalias() += dq_g * p.wq_g.transpose() + dk_g * p.wk_g.transpose() + dv_g * p.wv_g.transpose();
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Whole model

struct ForwardCache {
    std::vector<std::int32_t> ids;
    Index valid_len = 0;
    Matrix drop_embed;
    std::vector<LayerCache> layers;
    Matrix cls_hidden;  // after dropout, [1 x H]
    Matrix drop_cls;
};

/// Hidden states of every position after all layers.
inline Matrix encode(const std::vector<std::int32_t>& ids, Index valid_len, const ModelParams& params,
                     const AttentionConfig& config, ForwardCache* cache = nullptr, DropoutContext dropout = {}) {
    const Index n = static_cast<Index>(ids.size());
    if (n > params.dims.max_len) throw ShapeMismatch("sequence longer than the model's max_len");
    if (valid_len < 1 || valid_len > n) throw ShapeMismatch("valid length must be in [1, sequence length]");
    Matrix x(n, params.dims.hidden);
    for (Index t = 0; t < n; ++t) {
        const auto id = ids[static_cast<std::size_t>(t)];
        if (id < 0 || id >= params.dims.vocab) throw ShapeMismatch("token id outside the vocabulary");
        x.row(t) = params.token_embedding.row(id) + params.position_embedding.row(t);
    }
    Matrix drop = nn::dropout_mask(n, params.dims.hidden, dropout.rate, dropout.rng);
    nn::apply_mask(x, drop);
    if (cache) {
        cache->ids = ids;
        cache->valid_len = valid_len;
        cache->drop_embed = std::move(drop);
        cache->layers.resize(params.layers.size());
    }
    for (std::size_t l = 0; l < params.layers.size(); ++l)
        x = longformer_layer(x, params.layers[l], params.dims, config, valid_len, cache ? &cache->layers[l] : nullptr,
                             dropout);
    return x;
}

inline Vector classify_hidden(const Matrix& cls_row, const ModelParams& params) {
    return (cls_row * params.classifier_w + params.classifier_b).transpose();
}

/// Class logits read from the [CLS] position.
inline Vector encode_and_classify(const TokenSequence& seq, const ModelParams& params, const AttentionConfig& config,
                                  ForwardCache* cache = nullptr, DropoutContext dropout = {}) {
    const Matrix h = encode(seq.ids, seq.length, params, config, cache, dropout);
    Matrix cls = h.row(0);
    Matrix drop = nn::dropout_mask(1, params.dims.hidden, dropout.rate, dropout.rng);
    nn::apply_mask(cls, drop);
    if (cache) {
        cache->cls_hidden = cls;
        cache->drop_cls = std::move(drop);
    }
    return classify_hidden(cls, params);
}

/// Cross-entropy of `logits` against class index `label`; fills dL/dlogits.
inline double cross_entropy(const Vector& logits, int label, Vector* dlogits = nullptr) {
    const double mx = logits.maxCoeff();
    const Vector e = (logits.array() - mx).exp();
    const double z = e.sum();
    const double loss = std::log(z) + mx - logits(label);
    if (dlogits) {
        *dlogits = e / z;
        (*dlogits)(label) -= 1.0;
    }
    return loss;
}

/// Backpropagates dL/dlogits through the cached forward pass, accumulating
/// into `grad`.
inline void backward(const Vector& dlogits, const ModelParams& params, const AttentionConfig& config,
                     const ForwardCache& cache, ModelParams& grad) {
    (void)config;
    const Matrix dl = dlogits.transpose();
    grad.classifier_w.noalias() += cache.cls_hidden.transpose() * dl;
    grad.classifier_b += dl;
    Matrix dcls = dl * params.classifier_w.transpose();
    nn::apply_mask(dcls, cache.drop_cls);

    const Index n = static_cast<Index>(cache.ids.size());
    Matrix dx = Matrix::Zero(n, params.dims.hidden);
    dx.row(0) = dcls.row(0);
    for (std::size_t l = params.layers.size(); l-- > 0;)
        dx = longformer_layer_backward(dx, params.layers[l], params.dims, cache.layers[l], grad.layers[l]);
    nn::apply_mask(dx, cache.drop_embed);
    for (Index t = 0; t < n; ++t) {
        grad.token_embedding.row(cache.ids[static_cast<std::size_t>(t)]) += dx.row(t);
        grad.position_embedding.row(t) += dx.row(t);
    }
}

/// Index of the largest logit; ties go to the lowest index.
inline int argmax(const Vector& logits) {
    int best = 0;
    for (int c = 1; c < logits.size(); ++c)
        if (logits(c) > logits(best)) best = c;
    return best;
}

}  // namespace causalcat
