#pragma once

// Orchestration shared by the command-line tool: run configuration,
// corpus preprocessing with a per-post report, the attention x preprocessing
// ablation, per-fold scores for significance tests, and plot data.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "causalcat/checkpoint.hpp"
#include "causalcat/corpus.hpp"
#include "causalcat/csv.hpp"
#include "causalcat/discourse.hpp"
#include "causalcat/error.hpp"
#include "causalcat/metrics.hpp"
#include "causalcat/report.hpp"
#include "causalcat/trainer.hpp"

namespace causalcat {

// ---------------------------------------------------------------------------
// Run configuration

struct GridAxes {
    std::vector<double> lr{grid::kLearningRate.begin(), grid::kLearningRate.end()};
    std::vector<int> batch_size{grid::kBatchSize.begin(), grid::kBatchSize.end()};
};

struct RunConfig {
    std::string train_path;
    std::string test_path;
    std::string corpus_path;  // unsplit corpus, used when no train path is given
    std::string lexicon_path;
    ColumnMapping columns;
    PreprocessMode mode = PreprocessMode::None;
    Hyperparams hyper;
    AttentionConfig attention;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::size_t folds = 10;
    bool candidates_only = true;
    GridAxes grid;
    std::string name;  // display name of the trained model; derived when empty

    /// Keys absent from `j` keep their current values. Relative paths are
    /// resolved against `base_dir`.
    void update_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
        static const std::set<std::string> known = {"train",  "test", "corpus", "lexicon", "columns",
                                                    "mode",   "hyperparams", "attention", "out", "seed",
                                                    "folds",  "candidates_only", "grid", "name"};
        if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
        for (const auto& [key, value] : j.items())
            if (!known.count(key)) throw InvalidConfig("unknown config key '" + key + "'");
        auto path = [&](const char* key, std::string& dst) {
            if (!j.contains(key)) return;
            const auto p = std::filesystem::path(j.at(key).get<std::string>());
            dst = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
        };
        try {
            path("train", train_path);
            path("test", test_path);
            path("corpus", corpus_path);
            path("lexicon", lexicon_path);
            path("out", out_dir);
            if (j.contains("columns")) columns = ColumnMapping::from_json(j.at("columns"));
            if (j.contains("mode")) mode = parse_mode(j.at("mode").get<std::string>());
            if (j.contains("hyperparams")) hyper.update_from_json(j.at("hyperparams"));
            if (j.contains("attention")) attention = AttentionConfig::from_json(j.at("attention"));
            if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("folds")) folds = j.at("folds").get<std::size_t>();
            if (j.contains("candidates_only")) candidates_only = j.at("candidates_only").get<bool>();
            if (j.contains("name")) name = j.at("name").get<std::string>();
            if (j.contains("grid")) {
                const auto& g = j.at("grid");
                if (g.contains("lr")) grid.lr = g.at("lr").get<std::vector<double>>();
                if (g.contains("batch_size")) grid.batch_size = g.at("batch_size").get<std::vector<int>>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw InvalidConfig(std::string("bad config value: ") + e.what());
        }
    }

    static RunConfig load(const std::string& path) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(detail::slurp(path));
        } catch (const IoError&) {
            throw InvalidConfig("config file not found: " + path);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidConfig("config " + path + " is not valid JSON: " + e.what());
        }
        RunConfig c;
        c.update_from_json(j, std::filesystem::path(path).parent_path());
        return c;
    }

    /// The seed drives initialization, batch order, dropout and folds.
    Hyperparams effective_hyper() const {
        Hyperparams h = hyper;
        h.seed = seed;
        return h;
    }

    nlohmann::json to_json() const {
        return {{"train", train_path},
                {"test", test_path},
                {"corpus", corpus_path},
                {"lexicon", lexicon_path},
                {"columns", columns.to_json()},
                {"mode", std::string(mode_name(mode))},
                {"hyperparams", effective_hyper().to_json()},
                {"attention", attention.to_json()},
                {"out", out_dir},
                {"seed", seed},
                {"folds", folds},
                {"candidates_only", candidates_only},
                {"grid", {{"lr", grid.lr}, {"batch_size", grid.batch_size}}},
                {"name", name}};
    }

    void validate() const {
        hyper.validate();
        attention.validate();
        if (folds < 2) throw InvalidConfig("folds must be at least 2");
        for (const auto* p : {&train_path, &test_path, &corpus_path, &lexicon_path})
            if (!p->empty() && !std::filesystem::exists(*p)) throw InvalidConfig("path does not exist: " + *p);
        if (mode != PreprocessMode::None && lexicon_path.empty())
            throw InvalidConfig("preprocessing mode '" + std::string(mode_name(mode)) + "' requires a lexicon");
    }
};

/// Row label used in comparison tables, e.g. "RDA + Longformer".
inline std::string model_label(AttentionKind kind, PreprocessMode mode) {
    const std::string base = kind == AttentionKind::Dense ? "Transformer" : "Longformer";
    switch (mode) {
        case PreprocessMode::None: return base;
        case PreprocessMode::Rda: return "RDA + " + base;
        case PreprocessMode::BRda: return "B-RDA + " + base;
    }
    return base;
}

// ---------------------------------------------------------------------------
// Data

struct LoadedData {
    std::optional<Corpus> train;
    std::optional<Corpus> test;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

inline LoadedData load_data(const RunConfig& cfg) {
    LoadedData d;
    auto load = [&](const std::string& path, SplitTag tag, std::size_t& rows) {
        Corpus c = load_corpus(path, cfg.columns, tag);
        rows = c.size();
        return cfg.candidates_only ? filter_candidates(c) : c;
    };
    if (!cfg.train_path.empty()) d.train = load(cfg.train_path, SplitTag::Train, d.train_rows);
    else if (!cfg.corpus_path.empty()) d.train = load(cfg.corpus_path, SplitTag::Unsplit, d.train_rows);
    if (!cfg.test_path.empty()) d.test = load(cfg.test_path, SplitTag::Test, d.test_rows);
    return d;
}

inline std::optional<ConnectiveLexicon> lexicon_for(const RunConfig& cfg) {
    if (cfg.lexicon_path.empty()) return std::nullopt;
    return load_lexicon(cfg.lexicon_path);
}

// ---------------------------------------------------------------------------
// Preprocessing

struct PreprocessEntry {
    std::string id;
    std::size_t original_words = 0;
    std::size_t new_words = 0;
    std::size_t sentences = 0;
    std::size_t kept_sentences = 0;
};

struct PreprocessReport {
    PreprocessMode mode = PreprocessMode::None;
    std::vector<PreprocessEntry> entries;

    std::size_t empty_count() const {
        std::size_t n = 0;
        for (const auto& e : entries) n += e.new_words == 0;
        return n;
    }

    double empty_pct() const {
        return entries.empty() ? 0.0 : 100.0 * static_cast<double>(empty_count()) / static_cast<double>(entries.size());
    }

    nlohmann::json to_json() const {
        nlohmann::json posts = nlohmann::json::array();
        for (const auto& e : entries)
            posts.push_back({{"id", e.id},
                             {"original_words", e.original_words},
                             {"new_words", e.new_words},
                             {"sentences", e.sentences},
                             {"kept_sentences", e.kept_sentences},
                             {"empty", e.new_words == 0}});
        return {{"mode", std::string(mode_name(mode))},
                {"posts", entries.size()},
                {"empty", empty_count()},
                {"empty_pct", empty_pct()},
                {"entries", posts}};
    }

    std::string to_csv() const {
        std::string out = "id,original_words,new_words,sentences,kept_sentences,empty\n";
        for (const auto& e : entries)
            out += csv::format_row({e.id, std::to_string(e.original_words), std::to_string(e.new_words),
                                    std::to_string(e.sentences), std::to_string(e.kept_sentences),
                                    e.new_words == 0 ? "1" : "0"});
        return out;
    }
};

inline PreprocessEntry preprocess_entry(const std::string& id, const std::string& before, const RdaResult& after) {
    return {id, text::word_length(before), text::word_length(after.text), after.sentences, after.kept_sentences};
}

inline Corpus preprocess_corpus(const Corpus& corpus, PreprocessMode mode, const ConnectiveLexicon* lexicon,
                                PreprocessReport* report = nullptr) {
    Corpus out = corpus;
    if (report) {
        report->mode = mode;
        report->entries.clear();
    }
    for (auto& p : out.posts) {
        auto r = preprocess_text(p.text, mode, lexicon);
        if (report) report->entries.push_back(preprocess_entry(p.id, p.text, r));
        p.text = std::move(r.text);
    }
    return out;
}

/// Rewrites the text column of a corpus file, leaving every other cell as it
/// was. Mode none returns the file bytes unchanged.
inline std::string preprocess_file(const std::string& path, const ColumnMapping& columns, PreprocessMode mode,
                                   const ConnectiveLexicon* lexicon, PreprocessReport& report) {
    const std::string bytes = csv::read_file(path);
    csv::Table table = csv::read_table(path);
    const Corpus corpus = corpus_from_table(table, columns, SplitTag::Unsplit, path);
    const std::size_t col = *table.column(columns.text);
    report.mode = mode;
    report.entries.clear();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::string& cell = table.rows[r][col];
        auto result = preprocess_text(cell, mode, lexicon);
        report.entries.push_back(preprocess_entry(corpus.posts[r].id, cell, result));
        cell = std::move(result.text);
    }
    if (mode == PreprocessMode::None) return bytes;
    return csv::format_table(table);
}

// ---------------------------------------------------------------------------
// Evaluation helpers

/// Report JSON tagged with a model name.
inline nlohmann::json model_report_json(const std::string& name, const EvalReport& report) {
    auto j = to_json(report);
    j["name"] = name;
    return j;
}

/// Macro F1 of a fixed checkpoint on each stratified fold of `corpus`. The
/// fold count is capped at the corpus size.
inline std::vector<double> per_fold_macro_f1(const Checkpoint& ckpt, const Corpus& corpus, std::size_t k,
                                             std::uint64_t seed) {
    if (corpus.size() < 2) throw TooFewItems("per-fold scores need at least 2 posts");
    k = std::min(k, corpus.size());
    const auto preds = predict(ckpt, corpus);
    std::vector<double> out;
    for (const auto& fold : fold_assignment(corpus, k, seed)) {
        std::vector<CausalCategory> p, g;
        for (const auto i : fold) {
            p.push_back(preds[i]);
            g.push_back(category_from_index(label_of(corpus.posts[i])));
        }
        out.push_back(evaluate(p, g).macro_f1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ablation

struct AblationRow {
    std::string name;
    AttentionKind kind = AttentionKind::Longformer;
    PreprocessMode mode = PreprocessMode::None;
    EvalReport report;
    double train_seconds = 0.0;
    double infer_seconds = 0.0;
};

/// Trains and evaluates every {dense, longformer} x {none, rda, b-rda}
/// combination with the same hyperparameters and seed.
inline std::vector<AblationRow> run_ablation(const Corpus& train_corpus, const Corpus& test_corpus,
                                             const Hyperparams& hyper, const AttentionConfig& attention,
                                             const ConnectiveLexicon& lexicon) {
    using Clock = std::chrono::steady_clock;
    std::vector<AblationRow> rows;
    for (const auto kind : {AttentionKind::Dense, AttentionKind::Longformer}) {
        for (const auto mode : {PreprocessMode::None, PreprocessMode::Rda, PreprocessMode::BRda}) {
            AblationRow row;
            row.name = model_label(kind, mode);
            row.kind = kind;
            row.mode = mode;
            AttentionConfig cfg = attention;
            cfg.kind = kind;
            const Corpus tr = preprocess_corpus(train_corpus, mode, &lexicon);
            const Corpus te = preprocess_corpus(test_corpus, mode, &lexicon);
            TrainOptions opts;
            opts.mode = mode;
            const auto run = train(tr, hyper, cfg, opts);
            row.train_seconds = run.train_seconds;
            const auto t0 = Clock::now();
            row.report = evaluate_checkpoint(run.checkpoint, te);
            row.infer_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline nlohmann::json ablation_json(const std::vector<AblationRow>& rows) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& r : rows) {
        auto j = model_report_json(r.name, r.report);
        j["attention"] = r.kind == AttentionKind::Dense ? "dense" : "longformer";
        j["preprocess"] = std::string(mode_name(r.mode));
        models.push_back(std::move(j));
    }
    return {{"models", models}};
}

inline std::vector<NamedReport> named_reports(const std::vector<AblationRow>& rows) {
    std::vector<NamedReport> out;
    for (const auto& r : rows) out.push_back({r.name, r.report});
    return out;
}

inline std::vector<ModelTiming> ablation_timings(const std::vector<AblationRow>& rows) {
    std::vector<ModelTiming> out;
    for (const auto& r : rows) out.push_back({r.name, r.train_seconds, r.infer_seconds, r.report.mean_loss});
    return out;
}

// ---------------------------------------------------------------------------
// Plot data

struct PlotModel {
    std::string name;
    std::array<ClassScores, kNumClasses> classes{};
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

namespace detail {

inline PlotModel plot_model_from_json(const nlohmann::json& j, const std::string& fallback_name) {
    PlotModel m;
    m.name = j.value("name", fallback_name);
    m.precision = j.at("macro_precision").get<double>();
    m.recall = j.at("macro_recall").get<double>();
    m.f1 = j.at("macro_f1").get<double>();
    m.accuracy = j.at("accuracy").get<double>();
    const auto& classes = j.at("classes");
    if (!classes.is_array() || classes.size() != kNumClasses)
        throw MalformedReport("report '" + m.name + "' must list exactly 5 classes");
    for (int k = 0; k < kNumClasses; ++k) {
        m.classes[k].precision = classes[k].at("precision").get<double>();
        m.classes[k].recall = classes[k].at("recall").get<double>();
        m.classes[k].f1 = classes[k].at("f1").get<double>();
    }
    return m;
}

}  // namespace detail

/// Accepts a single model report (as written by `eval`, optionally with a
/// nested "baseline"), a collection {"models": [...]}, or an empty object.
inline std::vector<PlotModel> read_plot_models(const std::string& contents, const std::string& fallback_name) {
    if (text::trim(contents).empty()) return {};
    std::vector<PlotModel> out;
    try {
        const auto j = nlohmann::json::parse(contents);
        if (!j.is_object()) throw MalformedReport(fallback_name + ": report must be a JSON object");
        if (j.contains("models")) {
            for (const auto& m : j.at("models")) out.push_back(detail::plot_model_from_json(m, fallback_name));
        } else if (j.contains("classes")) {
            out.push_back(detail::plot_model_from_json(j, fallback_name));
            if (j.contains("baseline"))
                out.push_back(detail::plot_model_from_json(j.at("baseline"), fallback_name + " baseline"));
        } else if (!j.empty()) {
            throw MalformedReport(fallback_name + ": neither a model report nor a model collection");
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedReport(fallback_name + ": " + e.what());
    }
    return out;
}

/// Long format: one row per (model, category, metric).
inline std::string per_class_csv(const std::vector<PlotModel>& models) {
    std::string out = "model,category,metric,value\n";
    for (const auto& m : models)
        for (int k = 0; k < kNumClasses; ++k) {
            const auto cat = std::string(category_name(category_from_index(k)));
            const auto& s = m.classes[k];
            out += csv::format_row({m.name, cat, "precision", format_fixed(s.precision, 6)});
            out += csv::format_row({m.name, cat, "recall", format_fixed(s.recall, 6)});
            out += csv::format_row({m.name, cat, "f1", format_fixed(s.f1, 6)});
        }
    return out;
}

inline std::string accuracy_csv(const std::vector<PlotModel>& models) {
    std::string out = "model,accuracy\n";
    for (const auto& m : models) out += csv::format_row({m.name, format_fixed(m.accuracy, 6)});
    return out;
}

inline std::string models_csv(const std::vector<PlotModel>& models) {
    std::string out = "model,precision,recall,f1,accuracy\n";
    for (const auto& m : models)
        out += csv::format_row({m.name, format_fixed(m.precision, 6), format_fixed(m.recall, 6),
                                format_fixed(m.f1, 6), format_fixed(m.accuracy, 6)});
    return out;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

/// Grouped bar chart; values[g][s] is the bar of series s in group g, all in
/// [0, 1].
inline std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& groups,
                                 const std::vector<std::string>& series,
                                 const std::vector<std::vector<double>>& values) {
    static constexpr const char* kColors[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};
    const int bar = 14, gap = 18, plot_h = 220, top = 40, left = 50, bottom = 110;
    const int group_w = static_cast<int>(series.size()) * bar + gap;
    const int width = left + std::max<int>(1, static_cast<int>(groups.size())) * group_w + 150;
    const int height = top + plot_h + bottom;
    char buf[512];
    std::string svg;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"11\">\n",
                  width, height);
    svg += buf;
    svg += "<text x=\"" + std::to_string(left) + "\" y=\"20\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const int y = top + plot_h - t * plot_h / 4;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"#ddd\"/>\n"
                      "<text x=\"%d\" y=\"%d\" text-anchor=\"end\">%.2f</text>\n",
                      left, y, width - 150, y, left - 4, y + 4, t / 4.0);
        svg += buf;
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const int x0 = left + static_cast<int>(g) * group_w + gap / 2;
        for (std::size_t s = 0; s < series.size() && s < values[g].size(); ++s) {
            const double v = std::clamp(values[g][s], 0.0, 1.0);
            const int h = static_cast<int>(v * plot_h + 0.5);
            std::snprintf(buf, sizeof buf,
                          "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\"><title>%s: %.3f</title>"
                          "</rect>\n",
                          x0 + static_cast<int>(s) * bar, top + plot_h - h, bar - 2, h, kColors[s % 6],
                          xml_escape(series[s]).c_str(), values[g][s]);
            svg += buf;
        }
        const int cx = x0 + static_cast<int>(series.size()) * bar / 2;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%d\" y=\"%d\" transform=\"rotate(40 %d %d)\">%s</text>\n", cx, top + plot_h + 14,
                      cx, top + plot_h + 14, xml_escape(groups[g]).c_str());
        svg += buf;
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const int y = top + 10 + static_cast<int>(s) * 16;
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%d\" y=\"%d\" width=\"10\" height=\"10\" fill=\"%s\"/>"
                      "<text x=\"%d\" y=\"%d\">%s</text>\n",
                      width - 140, y, kColors[s % 6], width - 125, y + 9, xml_escape(series[s]).c_str());
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

struct PlotFiles {
    std::string per_class_csv, accuracy_csv, models_csv;
    std::string per_class_svg, accuracy_svg, models_svg;
};

inline PlotFiles plot_files(const std::vector<PlotModel>& models) {
    PlotFiles f;
    f.per_class_csv = per_class_csv(models);
    f.accuracy_csv = accuracy_csv(models);
    f.models_csv = models_csv(models);

    std::vector<std::string> groups;
    std::vector<std::vector<double>> values;
    for (const auto& m : models)
        for (int k = 0; k < kNumClasses; ++k) {
            const auto cat = std::string(category_name(category_from_index(k)));
            groups.push_back(models.size() > 1 ? m.name + ": " + cat : cat);
            values.push_back({m.classes[k].precision, m.classes[k].recall, m.classes[k].f1});
        }
    f.per_class_svg = bar_chart_svg("Per-category scores", groups, {"precision", "recall", "f1"}, values);

    groups.clear();
    values.clear();
    std::vector<std::vector<double>> summary;
    for (const auto& m : models) {
        groups.push_back(m.name);
        values.push_back({m.accuracy});
        summary.push_back({m.precision, m.recall, m.f1, m.accuracy});
    }
    f.accuracy_svg = bar_chart_svg("Accuracy", groups, {"accuracy"}, values);
    f.models_svg = bar_chart_svg("Model comparison", groups, {"precision", "recall", "f1", "accuracy"}, summary);
    return f;
}

}  // namespace causalcat
