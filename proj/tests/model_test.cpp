#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "causalcat/model.hpp"
#include "causalcat/trainer.hpp"

using namespace causalcat;

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
    return m;
}

// Reference block written with explicit loops: per-row attention set chosen
// from first principles, post-norm residuals, tanh-approximated GELU.
struct Reference {
    static double gelu(double x) {
        return 0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x)));
    }

    static Matrix norm(const Matrix& x, const Matrix& g, const Matrix& b) {
        Matrix y(x.rows(), x.cols());
        for (Index i = 0; i < x.rows(); ++i) {
            double mu = 0.0, var = 0.0;
            for (Index c = 0; c < x.cols(); ++c) mu += x(i, c);
            mu /= static_cast<double>(x.cols());
            for (Index c = 0; c < x.cols(); ++c) var += (x(i, c) - mu) * (x(i, c) - mu);
            var /= static_cast<double>(x.cols());
            for (Index c = 0; c < x.cols(); ++c) y(i, c) = (x(i, c) - mu) / std::sqrt(var + 1e-5) * g(0, c) + b(0, c);
        }
        return y;
    }

    static bool allowed(Index i, Index j, const AttentionConfig& cfg, bool i_global) {
        if (cfg.kind == AttentionKind::Dense || i_global) return true;
        if (cfg.is_global(j)) return true;
        const Index diff = std::abs(i - j);
        return diff % cfg.dilation == 0 && diff / cfg.dilation <= cfg.window / 2;
    }

    static Matrix layer(const Matrix& X, const LayerParams& p, const AttentionConfig& cfg, Index valid, int heads) {
        const Index n = X.rows(), H = X.cols(), dh = H / heads;
        const Matrix qs = X * p.wq_s, ks = X * p.wk_s, vs = X * p.wv_s;
        const Matrix qg = X * p.wq_g, kg = X * p.wk_g, vg = X * p.wv_g;
        Matrix attn = Matrix::Zero(n, H);
        for (Index i = 0; i < valid; ++i) {
            const bool g = cfg.is_global(i);
            const Matrix& Q = g ? qg : qs;
            const Matrix& K = g ? kg : ks;
            const Matrix& V = g ? vg : vs;
            for (Index h = 0; h < heads; ++h) {
                std::vector<double> e(static_cast<std::size_t>(valid), 0.0);
                double mx = -1e300;
                for (Index j = 0; j < valid; ++j) {
                    if (!allowed(i, j, cfg, g)) continue;
                    double s = 0.0;
                    for (Index c = h * dh; c < (h + 1) * dh; ++c) s += Q(i, c) * K(j, c);
                    e[j] = s / std::sqrt(static_cast<double>(dh));
                    mx = std::max(mx, e[j]);
                }
                double z = 0.0;
                for (Index j = 0; j < valid; ++j)
                    if (allowed(i, j, cfg, g)) z += std::exp(e[j] - mx);
                for (Index j = 0; j < valid; ++j) {
                    if (!allowed(i, j, cfg, g)) continue;
                    const double w = std::exp(e[j] - mx) / z;
                    for (Index c = h * dh; c < (h + 1) * dh; ++c) attn(i, c) += w * V(j, c);
                }
            }
        }
        Matrix r1 = X + attn * p.wo;
        for (Index i = 0; i < n; ++i) r1.row(i) += p.bo.row(0);
        const Matrix y1 = norm(r1, p.ln1_gamma, p.ln1_beta);
        Matrix f = y1 * p.w1;
        for (Index i = 0; i < n; ++i) f.row(i) += p.b1.row(0);
        for (Index k = 0; k < f.size(); ++k) f.data()[k] = gelu(f.data()[k]);
        Matrix r2 = f * p.w2;
        for (Index i = 0; i < n; ++i) r2.row(i) += p.b2.row(0) + y1.row(i);
        return norm(r2, p.ln2_gamma, p.ln2_beta);
    }

    static Vector logits(const TokenSequence& seq, const ModelParams& p, const AttentionConfig& cfg) {
        const Index n = static_cast<Index>(seq.ids.size());
        Matrix x(n, p.dims.hidden);
        for (Index t = 0; t < n; ++t) x.row(t) = p.token_embedding.row(seq.ids[t]) + p.position_embedding.row(t);
        for (const auto& l : p.layers) x = layer(x, l, cfg, seq.length, p.dims.heads);
        Vector out(p.dims.classes);
        for (Index c = 0; c < p.dims.classes; ++c) {
            out(c) = p.classifier_b(0, c);
            for (Index k = 0; k < p.dims.hidden; ++k) out(c) += x(0, k) * p.classifier_w(k, c);
        }
        return out;
    }
};

ModelDims small_dims(int hidden = 8, int layers = 1, int heads = 1) {
    ModelDims d;
    d.vocab = 20;
    d.hidden = hidden;
    d.layers = layers;
    d.heads = heads;
    d.ffn = 4 * hidden;
    d.max_len = 64;
    return d;
}

TokenSequence random_sequence(Rng& rng, int len, int vocab, int pad_to = 0) {
    TokenSequence s;
    s.ids.push_back(Vocabulary::kCls);
    for (int i = 1; i < len; ++i) s.ids.push_back(3 + static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab - 3))));
    s.length = len;
    if (pad_to > len) s.ids.resize(static_cast<std::size_t>(pad_to), Vocabulary::kPad);
    return s;
}

}  // namespace

TEST(Model, LayerMatchesReferenceAcrossConfigs) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const int heads = trial % 2 == 0 ? 1 : 2;
        const auto p = ModelParams::random(small_dims(8, 1, heads), 100 + trial, 0.4);
        AttentionConfig cfg;
        cfg.window = 2 * (1 + trial % 3);
        cfg.dilation = 1 + trial % 2;
        cfg.global_positions = trial % 3 == 0 ? std::vector<int>{} : std::vector<int>{0, 3};
        const Index n = 12, valid = 9 + trial % 4;
        const Matrix X = random_matrix(n, 8, rng);
        const Matrix got = longformer_layer(X, p.layers[0], p.dims, cfg, valid);
        const Matrix want = Reference::layer(X, p.layers[0], cfg, valid, heads);
        EXPECT_LE((got.topRows(valid) - want.topRows(valid)).cwiseAbs().maxCoeff(), 1e-10) << "trial " << trial;
    }
}

TEST(Model, AllGlobalEqualsDenseWithGlobalProjections) {
    Rng rng(2);
    const auto p = ModelParams::random(small_dims(), 7, 0.4);
    const Index n = 10;
    AttentionConfig cfg;
    cfg.window = 20;
    cfg.max_len = 64;
    cfg.global_positions.clear();
    for (int i = 0; i < n; ++i) cfg.global_positions.push_back(i);
    LayerParams dense_params = p.layers[0];
    dense_params.wq_s = p.layers[0].wq_g;
    dense_params.wk_s = p.layers[0].wk_g;
    dense_params.wv_s = p.layers[0].wv_g;
    AttentionConfig dense;
    dense.kind = AttentionKind::Dense;
    const Matrix X = random_matrix(n, 8, rng);
    const Matrix a = longformer_layer(X, p.layers[0], p.dims, cfg, n);
    const Matrix b = longformer_layer(X, dense_params, p.dims, dense, n);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, ZeroAttentionGivesNormalizedResidual) {
    auto p = ModelParams::random(small_dims(), 3, 0.3);
    auto& l = p.layers[0];
    for (Matrix* m : {&l.wq_s, &l.wk_s, &l.wv_s, &l.wq_g, &l.wk_g, &l.wv_g, &l.wo, &l.w2}) m->setZero();
    Rng rng(4);
    const Matrix X = random_matrix(6, 8, rng);
    const Matrix y = longformer_layer(X, l, p.dims, AttentionConfig{}, 6);
    const Matrix once = Reference::norm(X, l.ln1_gamma, l.ln1_beta);
    const Matrix want = Reference::norm(once, l.ln2_gamma, l.ln2_beta);
    EXPECT_LE((y - want).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Model, PadTailContentDoesNotMatter) {
    Rng rng(5);
    const auto p = ModelParams::random(small_dims(8, 2), 9, 0.3);
    const Index n = 14, valid = 9;
    AttentionConfig cfg;
    cfg.window = 4;
    Matrix X = random_matrix(n, 8, rng);
    const Matrix a = longformer_layer(X, p.layers[0], p.dims, cfg, valid);
    X.bottomRows(n - valid) = random_matrix(n - valid, 8, rng, 10.0);
    const Matrix b = longformer_layer(X, p.layers[0], p.dims, cfg, valid);
    EXPECT_EQ((a.topRows(valid) - b.topRows(valid)).cwiseAbs().maxCoeff(), 0.0);

    auto seq = random_sequence(rng, 7, 20, 20);
    const Vector la = encode_and_classify(seq, p, cfg);
    for (std::size_t i = 7; i < seq.ids.size(); ++i) seq.ids[i] = 5;
    const Vector lb = encode_and_classify(seq, p, cfg);
    TokenSequence unpadded = seq;
    unpadded.ids.resize(7);
    const Vector lc = encode_and_classify(unpadded, p, cfg);
    EXPECT_EQ((la - lb).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((la - lc).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Model, GlobalReachFromClsRow) {
    Rng rng(6);
    const auto p = ModelParams::random(small_dims(), 10, 0.3);
    AttentionConfig cfg;
    cfg.window = 2;
    const Index n = 20;
    Matrix X = random_matrix(n, 8, rng);
    const Matrix a = longformer_layer(X, p.layers[0], p.dims, cfg, n);
    X.row(n - 1) += Matrix::Constant(1, 8, 0.5);
    const Matrix b = longformer_layer(X, p.layers[0], p.dims, cfg, n);
    EXPECT_GT((a.row(0) - b.row(0)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ((a.row(10) - b.row(10)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Model, LogitsMatchReference) {
    Rng rng(7);
    const auto p = ModelParams::random(small_dims(16, 2, 2), 12, 0.3);
    AttentionConfig cfg;
    cfg.window = 4;
    cfg.dilation = 2;
    for (int trial = 0; trial < 5; ++trial) {
        const auto seq = random_sequence(rng, 5 + trial * 4, 20, 30);
        const Vector got = encode_and_classify(seq, p, cfg);
        const Vector want = Reference::logits(seq, p, cfg);
        EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_EQ((got - encode_and_classify(seq, p, cfg)).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Model, ClsOnlySequenceIsFinite) {
    const auto p = ModelParams::random(small_dims(), 1);
    TokenSequence s;
    s.ids.assign(16, Vocabulary::kPad);
    s.ids[0] = Vocabulary::kCls;
    s.length = 1;
    const Vector l = encode_and_classify(s, p, AttentionConfig{});
    EXPECT_TRUE(l.allFinite());
}

TEST(Model, RejectsBadInput) {
    const auto p = ModelParams::random(small_dims(), 1);
    TokenSequence s;
    s.ids = {Vocabulary::kCls, 99};
    s.length = 2;
    EXPECT_THROW(encode_and_classify(s, p, AttentionConfig{}), ShapeMismatch);
    s.ids.assign(65, 3);
    s.length = 65;
    EXPECT_THROW(encode_and_classify(s, p, AttentionConfig{}), ShapeMismatch);
    ModelDims bad = small_dims();
    bad.heads = 3;
    EXPECT_THROW(bad.validate(), InvalidConfig);
}

TEST(Model, RandomInitIsSeededAndBounded) {
    const auto a = ModelParams::random(small_dims(), 42);
    const auto b = ModelParams::random(small_dims(), 42);
    const auto c = ModelParams::random(small_dims(), 43);
    EXPECT_EQ((a.token_embedding - b.token_embedding).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT((a.token_embedding - c.token_embedding).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE(a.layers[0].wq_s.cwiseAbs().maxCoeff(), 0.05);
    EXPECT_EQ(a.layers[0].ln1_gamma.minCoeff(), 1.0);
    EXPECT_EQ(a.classifier_b.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Model, CrossEntropyGradient) {
    Vector logits(5);
    logits << 0.3, -1.0, 2.0, 0.0, 0.5;
    Vector d;
    const double loss = cross_entropy(logits, 2, &d);
    const double z = std::exp(0.3) + std::exp(-1.0) + std::exp(2.0) + 1.0 + std::exp(0.5);
    EXPECT_NEAR(loss, std::log(z) - 2.0, 1e-14);
    EXPECT_NEAR(d.sum(), 0.0, 1e-14);
    EXPECT_NEAR(d(2), std::exp(2.0) / z - 1.0, 1e-14);
}

TEST(Model, ArgmaxTiesGoLow) {
    Vector v(5);
    v << 1.0, 3.0, 3.0, 0.0, 3.0;
    EXPECT_EQ(argmax(v), 1);
}

// Gradient checks live here because they exercise the backward pass.

std::vector<LabeledSequence> gradient_batch(Rng& rng, int vocab) {
    std::vector<LabeledSequence> batch;
    for (int k = 0; k < 3; ++k) batch.push_back({random_sequence(rng, 12, vocab), k});
    return batch;
}

TEST(Gradient, MatchesFiniteDifferences) {
    Rng rng(21);
    const auto p = ModelParams::random(small_dims(8, 1), 5, 0.5);
    AttentionConfig cfg;
    cfg.window = 4;
    cfg.max_len = 64;
    GradientCheckOptions opts;
    opts.coordinates = 240;
    const auto res = gradient_check(p, gradient_batch(rng, 20), cfg, 1e-4, opts);
    EXPECT_GE(res.coordinates, 200u);
    EXPECT_LT(res.max_relative_error, 1e-4) << res.worst_tensor;
}

TEST(Gradient, TwoHeadsTwoLayersDilatedTanh) {
    Rng rng(22);
    ModelDims d = small_dims(8, 2, 2);
    d.activation = Activation::Tanh;
    const auto p = ModelParams::random(d, 6, 0.5);
    AttentionConfig cfg;
    cfg.window = 2;
    cfg.dilation = 2;
    cfg.global_positions = {0, 4};
    const auto res = gradient_check(p, gradient_batch(rng, 20), cfg, 1e-4);
    EXPECT_LT(res.max_relative_error, 1e-4) << res.worst_tensor;
}

TEST(Gradient, DenseAttention) {
    Rng rng(23);
    const auto p = ModelParams::random(small_dims(8, 1), 7, 0.5);
    AttentionConfig cfg;
    cfg.kind = AttentionKind::Dense;
    const auto res = gradient_check(p, gradient_batch(rng, 20), cfg, 1e-4);
    EXPECT_LT(res.max_relative_error, 1e-4) << res.worst_tensor;
}

TEST(Gradient, InjectedFaultIsDetected) {
    Rng rng(24);
    const auto p = ModelParams::random(small_dims(8, 1), 5, 0.5);
    GradientCheckOptions opts;
    opts.corrupt_classifier = true;
    const auto res = gradient_check(p, gradient_batch(rng, 20), AttentionConfig{}, 1e-4, opts);
    EXPECT_GT(res.max_relative_error, 0.1);
}

TEST(Gradient, DuplicateLabelBatchIsFinite) {
    Rng rng(25);
    const auto p = ModelParams::random(small_dims(8, 1), 5, 0.5);
    auto seq = random_sequence(rng, 6, 20);
    const std::vector<LabeledSequence> batch = {{seq, 1}, {seq, 1}};
    const auto res = gradient_check(p, batch, AttentionConfig{}, 1e-4);
    EXPECT_TRUE(std::isfinite(res.max_relative_error));
    EXPECT_THROW(gradient_check(p, batch, AttentionConfig{}, 1e-2), InvalidConfig);
}

TEST(Gradient, DropoutMasksAreAppliedInBackward) {
    // With a fixed dropout stream, the analytic gradient must match finite
    // differences of the same masked forward pass.
    Rng rng(26);
    const auto p = ModelParams::random(small_dims(8, 1), 8, 0.5);
    const auto seq = random_sequence(rng, 10, 20);
    AttentionConfig cfg;
    auto loss_at = [&](const ModelParams& params) {
        Rng drng(77);
        return cross_entropy(encode_and_classify(seq, params, cfg, nullptr, {0.3, &drng}), 2);
    };
    ModelParams grad = p.zeros_like();
    ForwardCache cache;
    Rng drng(77);
    Vector dl;
    cross_entropy(encode_and_classify(seq, p, cfg, &cache, {0.3, &drng}), 2, &dl);
    backward(dl, p, cfg, cache, grad);
    ModelParams probe = p;
    double worst = 0.0;
    for (Index i = 0; i < 40; ++i) {
        const Index k = (i * 37) % probe.layers[0].w1.size();
        double& w = probe.layers[0].w1.data()[k];
        const double orig = w;
        w = orig + 1e-5;
        const double up = loss_at(probe);
        w = orig - 1e-5;
        const double down = loss_at(probe);
        w = orig;
        const double num = (up - down) / 2e-5;
        const double ana = grad.layers[0].w1.data()[k];
        worst = std::max(worst, std::abs(num - ana) / std::max(std::abs(num) + std::abs(ana), 1e-6));
    }
    EXPECT_LT(worst, 1e-4);
}
