#pragma once

// Training loop (Adam family, triangular learning-rate schedule), inference,
// k-fold grid search and a finite-difference gradient check.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "causalcat/attention.hpp"
#include "causalcat/checkpoint.hpp"
#include "causalcat/corpus.hpp"
#include "causalcat/error.hpp"
#include "causalcat/metrics.hpp"
#include "causalcat/model.hpp"
#include "causalcat/random.hpp"
#include "causalcat/vocab.hpp"

namespace causalcat {

enum class OptimizerKind { Adam, Adamax, AdamW };

inline std::string_view optimizer_name(OptimizerKind o) {
    switch (o) {
        case OptimizerKind::Adam: return "Adam";
        case OptimizerKind::Adamax: return "Adamax";
        case OptimizerKind::AdamW: return "AdamW";
    }
    return "Adam";
}

inline OptimizerKind parse_optimizer(std::string_view s) {
    const std::string l = text::ascii_lower(s);
    if (l == "adam") return OptimizerKind::Adam;
    if (l == "adamax") return OptimizerKind::Adamax;
    if (l == "adamw") return OptimizerKind::AdamW;
    throw InvalidConfig("unknown optimizer '" + std::string(s) + "' (expected Adam, Adamax or AdamW)");
}

namespace grid {
inline constexpr std::array<int, 3> kLayers = {1, 2, 3};
inline constexpr std::array<double, 5> kDropout = {0.0, 0.2, 0.4, 0.6, 0.8};
inline constexpr std::array<int, 3> kHidden = {64, 128, 256};
inline constexpr std::array<double, 3> kLearningRate = {1e-5, 3e-5, 5e-5};
inline constexpr std::array<OptimizerKind, 3> kOptimizer = {OptimizerKind::Adam, OptimizerKind::Adamax,
                                                             OptimizerKind::AdamW};
inline constexpr std::array<int, 4> kBatchSize = {8, 16, 32, 64};
inline constexpr std::array<int, 3> kEpochs = {5, 10, 15};
}  // namespace grid

inline constexpr double kBeta1 = 0.9;
inline constexpr double kBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;
inline constexpr double kAdamWDecay = 0.01;

struct Hyperparams {
    int layers = 2;
    double dropout = 0.0;
    int hidden = 64;
    double lr = 1e-5;
    OptimizerKind optimizer = OptimizerKind::Adam;
    int batch_size = 32;
    int epochs = 5;
    double warmup = 0.1;
    std::uint64_t seed = 0;
    // Model knobs outside the search grid.
    int heads = 1;
    int min_freq = 1;
    Activation activation = Activation::Gelu;
    // Allows values outside the grid sets.
    bool free_form = false;

    void validate() const {
        if (layers < 1 || hidden < 1 || batch_size < 1 || epochs < 1)
            throw InvalidConfig("layers, hidden, batch_size and epochs must be positive");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidConfig("dropout must be in [0, 1)");
        if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidConfig("learning rate must be finite and >= 0");
        if (!(warmup >= 0.0 && warmup <= 1.0)) throw InvalidConfig("warmup fraction must be in [0, 1]");
        if (heads < 1 || hidden % heads != 0) throw InvalidConfig("hidden size must be divisible by heads");
        if (min_freq < 1) throw InvalidConfig("min_freq must be >= 1");
        if (free_form) return;
        auto in = [](const auto& set, auto v) { return std::find(set.begin(), set.end(), v) != set.end(); };
        if (!in(grid::kLayers, layers)) throw InvalidConfig("layers must be one of {1, 2, 3}");
        if (!in(grid::kDropout, dropout)) throw InvalidConfig("dropout must be one of {0, 0.2, 0.4, 0.6, 0.8}");
        if (!in(grid::kHidden, hidden)) throw InvalidConfig("hidden must be one of {64, 128, 256}");
        if (!in(grid::kLearningRate, lr)) throw InvalidConfig("lr must be one of {1e-5, 3e-5, 5e-5}");
        if (!in(grid::kBatchSize, batch_size)) throw InvalidConfig("batch_size must be one of {8, 16, 32, 64}");
        if (!in(grid::kEpochs, epochs)) throw InvalidConfig("epochs must be one of {5, 10, 15}");
    }

    nlohmann::json to_json() const {
        return {{"layers", layers},
                {"dropout", dropout},
                {"hidden", hidden},
                {"lr", lr},
                {"optimizer", std::string(optimizer_name(optimizer))},
                {"batch_size", batch_size},
                {"epochs", epochs},
                {"warmup", warmup},
                {"seed", seed},
                {"heads", heads},
                {"min_freq", min_freq},
                {"activation", std::string(activation_name(activation))},
                {"free_form", free_form}};
    }

    /// Fields absent from `j` keep their current values.
    void update_from_json(const nlohmann::json& j) {
        try {
            if (j.contains("layers")) layers = j.at("layers").get<int>();
            if (j.contains("dropout")) dropout = j.at("dropout").get<double>();
            if (j.contains("hidden")) hidden = j.at("hidden").get<int>();
            if (j.contains("lr")) lr = j.at("lr").get<double>();
            if (j.contains("optimizer")) optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
            if (j.contains("batch_size")) batch_size = j.at("batch_size").get<int>();
            if (j.contains("epochs")) epochs = j.at("epochs").get<int>();
            if (j.contains("warmup")) warmup = j.at("warmup").get<double>();
            if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("heads")) heads = j.at("heads").get<int>();
            if (j.contains("min_freq")) min_freq = j.at("min_freq").get<int>();
            if (j.contains("activation")) activation = parse_activation(j.at("activation").get<std::string>());
            if (j.contains("free_form")) free_form = j.at("free_form").get<bool>();
        } catch (const nlohmann::json::exception& e) {
            throw InvalidConfig(std::string("bad hyperparameter value: ") + e.what());
        }
    }

    static Hyperparams from_json(const nlohmann::json& j) {
        Hyperparams h;
        h.update_from_json(j);
        return h;
    }

    ModelDims dims(int vocab_size, int max_len) const {
        ModelDims d;
        d.vocab = vocab_size;
        d.hidden = hidden;
        d.layers = layers;
        d.heads = heads;
        d.ffn = 4 * hidden;
        d.max_len = max_len;
        d.activation = activation;
        return d;
    }
};

/// Linear 0 -> lr over the first W = ceil(warmup * T) steps, then linear
/// lr -> 0 at step T. Update s (0-based) uses at(s).
struct LinearSchedule {
    double lr = 0.0;
    long total = 0;
    long warmup_steps = 0;

    LinearSchedule(double lr_, long total_, double warmup_fraction)
        : lr(lr_), total(total_),
          warmup_steps(static_cast<long>(std::ceil(warmup_fraction * static_cast<double>(total_) - 1e-9))) {}

    double at(long step) const {
        if (step <= 0 && warmup_steps > 0) return 0.0;
        if (step >= total) return 0.0;
        if (step < warmup_steps) return lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
        return lr * static_cast<double>(total - step) / static_cast<double>(total - warmup_steps);
    }
};

inline long total_steps(std::size_t n, int batch_size, int epochs) {
    return static_cast<long>(epochs) *
           static_cast<long>((n + static_cast<std::size_t>(batch_size) - 1) / static_cast<std::size_t>(batch_size));
}

class Optimizer {
public:
    Optimizer(OptimizerKind kind, const ModelParams& shape) : kind_(kind), m_(shape.zeros_like()), v_(m_) {}

    void step(ModelParams& params, const ModelParams& grad, double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        std::vector<Matrix*> p, m, v;
        std::vector<const Matrix*> g;
        params.for_each([&](const std::string&, Matrix& x) { p.push_back(&x); });
        m_.for_each([&](const std::string&, Matrix& x) { m.push_back(&x); });
        v_.for_each([&](const std::string&, Matrix& x) { v.push_back(&x); });
        grad.for_each([&](const std::string&, const Matrix& x) { g.push_back(&x); });
        for (std::size_t k = 0; k < p.size(); ++k) {
            double* pw = p[k]->data();
            double* mw = m[k]->data();
            double* vw = v[k]->data();
            const double* gw = g[k]->data();
            for (Index i = 0; i < p[k]->size(); ++i) {
                mw[i] = kBeta1 * mw[i] + (1.0 - kBeta1) * gw[i];
                if (kind_ == OptimizerKind::Adamax) {
                    vw[i] = std::max(kBeta2 * vw[i], std::abs(gw[i]));
                    pw[i] -= lr / bc1 * mw[i] / (vw[i] + kAdamEps);
                    continue;
                }
                vw[i] = kBeta2 * vw[i] + (1.0 - kBeta2) * gw[i] * gw[i];
                if (kind_ == OptimizerKind::AdamW) pw[i] -= lr * kAdamWDecay * pw[i];
                pw[i] -= lr * (mw[i] / bc1) / (std::sqrt(vw[i] / bc2) + kAdamEps);
            }
        }
    }

private:
    OptimizerKind kind_;
    ModelParams m_;
    ModelParams v_;
    long t_ = 0;
};

struct TrainRunResult {
    Checkpoint checkpoint;
    std::vector<double> epoch_loss;  // mean training loss per epoch
    std::optional<double> validation_loss;
    std::optional<double> validation_accuracy;
    std::optional<EvalReport> validation_report;
    double train_seconds = 0.0;
    double validate_seconds = 0.0;
    double infer_seconds = 0.0;
};

inline nlohmann::json to_json(const TrainRunResult& r) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json j = {{"epoch_loss", r.epoch_loss},
                        {"validation_loss", opt(r.validation_loss)},
                        {"validation_accuracy", opt(r.validation_accuracy)},
                        {"train_seconds", r.train_seconds},
                        {"validate_seconds", r.validate_seconds},
                        {"infer_seconds", r.infer_seconds},
                        {"hyperparams", r.checkpoint.hyperparams}};
    if (r.validation_report) j["validation_report"] = to_json(*r.validation_report);
    return j;
}

struct TrainOptions {
    const Corpus* validation = nullptr;
    PreprocessMode mode = PreprocessMode::None;  // recorded in the checkpoint
    std::function<void(int epoch, double loss)> on_epoch;
};

inline int label_of(const Post& post) {
    if (!post.category || *post.category == CausalCategory::NoReason)
        throw BadCategoryCode("post '" + post.id + "' has no causal category in 1..5");
    return class_index(*post.category);
}

/// Unpadded token sequences; rows past the text never influence the output.
inline std::vector<TokenSequence> tokenize_corpus(const Corpus& corpus, const Vocabulary& vocab, int max_len) {
    std::vector<TokenSequence> out;
    out.reserve(corpus.size());
    for (const auto& p : corpus.posts) out.push_back(tokenize(p.text, vocab, max_len, false));
    return out;
}

inline Vector logits_for(const TokenSequence& seq, const Checkpoint& ckpt) {
    return encode_and_classify(seq, ckpt.params, ckpt.attention);
}

/// Argmax class per post; ties go to the lowest category code.
inline std::vector<CausalCategory> predict(const Checkpoint& ckpt, const Corpus& corpus) {
    std::vector<CausalCategory> out;
    out.reserve(corpus.size());
    for (const auto& seq : tokenize_corpus(corpus, ckpt.vocab, ckpt.params.dims.max_len))
        out.push_back(category_from_index(argmax(logits_for(seq, ckpt))));
    return out;
}

/// Predictions, metrics and mean cross-entropy over a labeled corpus.
inline EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const Corpus& corpus) {
    if (corpus.empty()) throw EmptyInput("cannot evaluate on an empty corpus");
    std::vector<CausalCategory> preds, golds;
    double loss = 0.0;
    const auto seqs = tokenize_corpus(corpus, ckpt.vocab, ckpt.params.dims.max_len);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const int label = label_of(corpus.posts[i]);
        const Vector logits = logits_for(seqs[i], ckpt);
        loss += cross_entropy(logits, label);
        preds.push_back(category_from_index(argmax(logits)));
        golds.push_back(category_from_index(label));
    }
    EvalReport report = evaluate(preds, golds);
    report.mean_loss = loss / static_cast<double>(seqs.size());
    return report;
}

inline TrainRunResult train(const Corpus& train_corpus, const Hyperparams& hyper, const AttentionConfig& config,
                            const TrainOptions& options = {}) {
    using Clock = std::chrono::steady_clock;
    hyper.validate();
    config.validate();
    if (train_corpus.empty()) throw EmptyCorpus("training corpus is empty");
    std::vector<int> labels;
    labels.reserve(train_corpus.size());
    for (const auto& p : train_corpus.posts) labels.push_back(label_of(p));

    const auto t0 = Clock::now();
    Checkpoint ckpt;
    ckpt.vocab = build_vocab(train_corpus, hyper.min_freq);
    ckpt.attention = config;
    ckpt.mode = options.mode;
    ckpt.hyperparams = hyper.to_json();
    const ModelDims dims = hyper.dims(static_cast<int>(ckpt.vocab.size()), config.max_len);
    ckpt.params = ModelParams::random(dims, hyper.seed);
    const auto seqs = tokenize_corpus(train_corpus, ckpt.vocab, config.max_len);

    Rng root(hyper.seed);
    Rng order_rng = root.split(1);
    Rng dropout_rng = root.split(2);
    const DropoutContext dropout{hyper.dropout, hyper.dropout > 0.0 ? &dropout_rng : nullptr};

    const std::size_t N = seqs.size();
    const auto B = static_cast<std::size_t>(hyper.batch_size);
    const LinearSchedule schedule(hyper.lr, total_steps(N, hyper.batch_size, hyper.epochs), hyper.warmup);
    Optimizer opt(hyper.optimizer, ckpt.params);
    ModelParams grad = ckpt.params.zeros_like();
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);

    TrainRunResult result;
    long step = 0;
    ForwardCache cache;
    Vector dlogits;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        order_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < N; start += B, ++step) {
            const std::size_t end = std::min(N, start + B);
            grad.set_zero();
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t i = order[b];
                const Vector logits = encode_and_classify(seqs[i], ckpt.params, config, &cache, dropout);
                const double loss = cross_entropy(logits, labels[i], &dlogits);
                if (!std::isfinite(loss)) {
                    std::ostringstream msg;
                    msg << "non-finite loss at epoch " << epoch + 1 << ", step " << step << " (post '"
                        << train_corpus.posts[i].id << "', lr " << schedule.at(step) << ")";
                    throw DivergedLoss(msg.str());
                }
                epoch_loss += loss;
                backward(dlogits, ckpt.params, config, cache, grad);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            grad.for_each([&](const std::string&, Matrix& m) { m *= inv; });
            opt.step(ckpt.params, grad, schedule.at(step));
        }
        const double mean = epoch_loss / static_cast<double>(N);
        result.epoch_loss.push_back(mean);
        if (options.on_epoch) options.on_epoch(epoch + 1, mean);
    }
    ckpt.params.round_to_float();
    result.train_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    if (options.validation && !options.validation->empty()) {
        const auto t1 = Clock::now();
        auto report = evaluate_checkpoint(ckpt, *options.validation);
        result.validate_seconds = std::chrono::duration<double>(Clock::now() - t1).count();
        result.validation_loss = report.mean_loss;
        result.validation_accuracy = report.accuracy;
        result.validation_report = std::move(report);
        const auto t2 = Clock::now();
        (void)predict(ckpt, *options.validation);
        result.infer_seconds = std::chrono::duration<double>(Clock::now() - t2).count();
    }
    result.checkpoint = std::move(ckpt);
    return result;
}

// ---------------------------------------------------------------------------
// Grid search

struct GridCellResult {
    Hyperparams hyper;
    double mean_accuracy = 0.0;
    double mean_loss = 0.0;
    std::vector<double> fold_accuracy;
    std::vector<double> fold_loss;
    std::vector<double> fold_macro_f1;
    std::array<ClassScores, kNumClasses> mean_per_class{};  // P/R/F1 averaged over folds
    double mean_train_seconds = 0.0;
    double mean_validate_seconds = 0.0;
    double mean_infer_seconds = 0.0;
};

/// Orders by mean accuracy (descending), then mean loss (ascending). Stable,
/// so equal cells keep grid order.
inline void rank_cells(std::vector<GridCellResult>& cells) {
    std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
        if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
        return a.mean_loss < b.mean_loss;
    });
}

/// k-fold cross-validation of every cell; folds depend only on `fold_seed`.
inline std::vector<GridCellResult> grid_search(const Corpus& corpus, const std::vector<Hyperparams>& cells,
                                               std::size_t k, const AttentionConfig& config,
                                               std::uint64_t fold_seed = 0,
                                               PreprocessMode mode = PreprocessMode::None) {
    if (cells.empty()) throw InvalidConfig("grid is empty");
    const auto folds = split_folds(corpus, k, fold_seed);
    std::vector<GridCellResult> results;
    for (const auto& hyper : cells) {
        GridCellResult cell;
        cell.hyper = hyper;
        for (const auto& fold : folds) {
            TrainOptions opts;
            opts.validation = &fold.validation;
            opts.mode = mode;
            const auto run = train(fold.train, hyper, config, opts);
            const auto& rep = *run.validation_report;
            cell.fold_accuracy.push_back(rep.accuracy);
            cell.fold_loss.push_back(*rep.mean_loss);
            cell.fold_macro_f1.push_back(rep.macro_f1);
            for (int c = 0; c < kNumClasses; ++c) {
                cell.mean_per_class[c].precision += rep.per_class[c].precision;
                cell.mean_per_class[c].recall += rep.per_class[c].recall;
                cell.mean_per_class[c].f1 += rep.per_class[c].f1;
                cell.mean_per_class[c].support += rep.per_class[c].support;
            }
            cell.mean_train_seconds += run.train_seconds;
            cell.mean_validate_seconds += run.validate_seconds;
            cell.mean_infer_seconds += run.infer_seconds;
        }
        const double n = static_cast<double>(folds.size());
        auto mean = [](const std::vector<double>& v) {
            return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        cell.mean_accuracy = mean(cell.fold_accuracy);
        cell.mean_loss = mean(cell.fold_loss);
        for (auto& s : cell.mean_per_class) {
            s.precision /= n;
            s.recall /= n;
            s.f1 /= n;
        }
        cell.mean_train_seconds /= n;
        cell.mean_validate_seconds /= n;
        cell.mean_infer_seconds /= n;
        results.push_back(std::move(cell));
    }
    rank_cells(results);
    return results;
}

inline nlohmann::json to_json(const GridCellResult& c) {
    nlohmann::json per_class = nlohmann::json::array();
    for (int k = 0; k < kNumClasses; ++k)
        per_class.push_back({{"category", std::string(category_name(category_from_index(k)))},
                             {"precision", c.mean_per_class[k].precision},
                             {"recall", c.mean_per_class[k].recall},
                             {"f1", c.mean_per_class[k].f1}});
    return {{"hyperparams", c.hyper.to_json()},
            {"mean_accuracy", c.mean_accuracy},
            {"mean_loss", c.mean_loss},
            {"fold_accuracy", c.fold_accuracy},
            {"fold_loss", c.fold_loss},
            {"fold_macro_f1", c.fold_macro_f1},
            {"per_class", per_class},
            {"mean_train_seconds", c.mean_train_seconds},
            {"mean_validate_seconds", c.mean_validate_seconds},
            {"mean_infer_seconds", c.mean_infer_seconds}};
}

// ---------------------------------------------------------------------------
// Gradient check

struct LabeledSequence {
    TokenSequence seq;
    int label = 0;
};

inline double batch_loss(const ModelParams& params, const std::vector<LabeledSequence>& batch,
                         const AttentionConfig& config) {
    double loss = 0.0;
    for (const auto& item : batch) loss += cross_entropy(encode_and_classify(item.seq, params, config), item.label);
    return loss / static_cast<double>(batch.size());
}

/// Gradient of the mean batch loss, without dropout.
inline ModelParams batch_gradient(const ModelParams& params, const std::vector<LabeledSequence>& batch,
                                  const AttentionConfig& config) {
    ModelParams grad = params.zeros_like();
    ForwardCache cache;
    Vector dlogits;
    for (const auto& item : batch) {
        const Vector logits = encode_and_classify(item.seq, params, config, &cache);
        cross_entropy(logits, item.label, &dlogits);
        backward(dlogits, params, config, cache, grad);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    grad.for_each([&](const std::string&, Matrix& m) { m *= inv; });
    return grad;
}

struct GradientCheckOptions {
    std::size_t coordinates = 200;
    std::uint64_t seed = 0;
    double denominator_floor = 1e-6;
    bool corrupt_classifier = false;  // negative control: doubles dL/dW_c
};

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::size_t coordinates = 0;
    std::string worst_tensor;
};

/// Relative error |a - n| / max(|a| + |n|, floor) between analytic and
/// central-difference gradients, maximized over coordinates sampled evenly
/// from every tensor.
inline GradientCheckResult gradient_check(const ModelParams& params, const std::vector<LabeledSequence>& batch,
                                          const AttentionConfig& config, double epsilon,
                                          const GradientCheckOptions& options = {}) {
    if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) throw InvalidConfig("epsilon must be in [1e-6, 1e-3]");
    if (batch.empty()) throw EmptyInput("gradient check needs a non-empty batch");
    ModelParams grad = batch_gradient(params, batch, config);
    if (options.corrupt_classifier) grad.classifier_w *= 2.0;

    std::vector<std::pair<std::string, Matrix*>> tensors;
    ModelParams probe = params;
    probe.for_each([&](const std::string& name, Matrix& m) { tensors.emplace_back(name, &m); });
    std::vector<const Matrix*> grads;
    grad.for_each([&](const std::string&, const Matrix& m) { grads.push_back(&m); });

    const std::size_t per_tensor = (options.coordinates + tensors.size() - 1) / tensors.size();
    Rng rng(options.seed);
    GradientCheckResult res;
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        Matrix& m = *tensors[t].second;
        for (std::size_t s = 0; s < per_tensor; ++s) {
            const auto i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(m.size())));
            const double orig = m.data()[i];
            m.data()[i] = orig + epsilon;
            const double up = batch_loss(probe, batch, config);
            m.data()[i] = orig - epsilon;
            const double down = batch_loss(probe, batch, config);
            m.data()[i] = orig;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double analytic = grads[t]->data()[i];
            const double err = std::abs(analytic - numeric) /
                               std::max(std::abs(analytic) + std::abs(numeric), options.denominator_floor);
            if (!(err <= res.max_relative_error)) {
                res.max_relative_error = err;
                res.worst_tensor = tensors[t].first;
            }
            ++res.coordinates;
        }
    }
    return res;
}

}  // namespace causalcat
