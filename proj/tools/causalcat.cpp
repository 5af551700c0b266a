// causalcat: corpus statistics, discourse preprocessing, training, evaluation,
// ablation and plot data for five-way causal categorization of posts.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "causalcat/checkpoint.hpp"
#include "causalcat/corpus.hpp"
#include "causalcat/discourse.hpp"
#include "causalcat/metrics.hpp"
#include "causalcat/pipeline.hpp"
#include "causalcat/report.hpp"
#include "causalcat/trainer.hpp"

namespace fs = std::filesystem;
using namespace causalcat;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, train, test, corpus, lexicon, mode, attention, name;
    std::optional<std::size_t> folds;
    std::optional<int> epochs, batch_size;
    std::optional<double> lr;
    bool free_form = false;
    bool grid = false;
    std::string checkpoint, baseline, baseline_name;
    std::vector<std::string> reports;
};

RunConfig resolve(const Flags& f) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out_dir = *f.out;
    if (f.train) cfg.train_path = *f.train;
    if (f.test) cfg.test_path = *f.test;
    if (f.corpus) cfg.corpus_path = *f.corpus;
    if (f.lexicon) cfg.lexicon_path = *f.lexicon;
    if (f.mode) cfg.mode = parse_mode(*f.mode);
    if (f.attention) {
        auto j = cfg.attention.to_json();
        j["kind"] = *f.attention;
        cfg.attention = AttentionConfig::from_json(j);
    }
    if (f.name) cfg.name = *f.name;
    if (f.folds) cfg.folds = *f.folds;
    if (f.epochs) cfg.hyper.epochs = *f.epochs;
    if (f.batch_size) cfg.hyper.batch_size = *f.batch_size;
    if (f.lr) cfg.hyper.lr = *f.lr;
    if (f.free_form) cfg.hyper.free_form = true;
    cfg.validate();
    return cfg;
}

void write_out(const RunConfig& cfg, const std::string& name, const std::string& contents) {
    detail::write_atomic(fs::path(cfg.out_dir) / name, contents);
}

void write_snapshot(const RunConfig& cfg) { write_out(cfg, "config.resolved.json", cfg.to_json().dump(2) + "\n"); }

const ConnectiveLexicon* lexicon_or_null(const std::optional<ConnectiveLexicon>& lex) {
    return lex ? &*lex : nullptr;
}

int cmd_stats(const RunConfig& cfg) {
    const auto data = load_data(cfg);
    if (!data.train && !data.test) throw InvalidConfig("stats needs --train/--test or --corpus");

    Corpus all;
    std::size_t unmatched = 0;
    for (const auto* c : {data.train ? &*data.train : nullptr, data.test ? &*data.test : nullptr}) {
        if (!c) continue;
        for (const auto& p : filter_candidates(*c).posts) {
            unmatched += !unmatched_explanations(p).empty();
            all.posts.push_back(p);
        }
    }
    const auto stats = length_stats(all);

    std::vector<std::pair<std::string, const Corpus*>> columns;
    nlohmann::json counts = nlohmann::json::object();
    auto add_counts = [&](const std::string& label, const std::string& key, const std::optional<Corpus>& c) {
        if (!c) return;
        columns.emplace_back(label, &*c);
        const auto n = category_counts(*c);
        counts[key] = std::vector<std::size_t>(n.begin(), n.end());
    };
    const bool split = data.train && data.test;
    add_counts(split ? "Training" : "Posts", split ? "train" : "posts", data.train);
    add_counts(split ? "Testing" : "Posts", split ? "test" : "posts", data.test);

    nlohmann::json j = {{"rows_loaded", data.train_rows + data.test_rows},
                        {"candidates", all.size()},
                        {"posts_with_unmatched_explanations", unmatched},
                        {"counts", counts},
                        {"length_stats", to_json(stats)}};
    write_snapshot(cfg);
    write_out(cfg, "stats.json", j.dump(2) + "\n");
    write_out(cfg, "stats.txt", to_text(stats));
    write_out(cfg, "counts.txt", counts_table(columns));
    std::cout << to_text(stats) << "\n" << counts_table(columns);
    return 0;
}

int cmd_preprocess(const RunConfig& cfg) {
    const auto lex = cfg.mode == PreprocessMode::None ? std::nullopt : lexicon_for(cfg);
    std::vector<std::string> inputs;
    for (const auto* p : {&cfg.train_path, &cfg.test_path, &cfg.corpus_path})
        if (!p->empty()) inputs.push_back(*p);
    if (inputs.empty()) throw InvalidConfig("preprocess needs --train, --test or --corpus");
    write_snapshot(cfg);
    for (const auto& path : inputs) {
        PreprocessReport report;
        const std::string out = preprocess_file(path, cfg.columns, cfg.mode, lexicon_or_null(lex), report);
        const std::string stem = fs::path(path).stem().string() + "." + std::string(mode_name(cfg.mode));
        write_out(cfg, stem + ".csv", out);
        write_out(cfg, stem + ".report.json", report.to_json().dump(2) + "\n");
        write_out(cfg, stem + ".report.csv", report.to_csv());
        std::cout << path << ": " << report.entries.size() << " posts, " << report.empty_count() << " empty ("
                  << format_fixed(report.empty_pct()) << "%)\n";
    }
    return 0;
}

int cmd_train(const RunConfig& cfg, bool use_grid) {
    const auto data = load_data(cfg);
    if (!data.train) throw InvalidConfig("train needs --train or --corpus");
    const auto lex = cfg.mode == PreprocessMode::None ? std::nullopt : lexicon_for(cfg);
    const Corpus tr = preprocess_corpus(*data.train, cfg.mode, lexicon_or_null(lex));
    std::optional<Corpus> te;
    if (data.test) te = preprocess_corpus(*data.test, cfg.mode, lexicon_or_null(lex));
    write_snapshot(cfg);

    Hyperparams best = cfg.effective_hyper();
    if (use_grid) {
        std::vector<Hyperparams> cells;
        for (const double lr : cfg.grid.lr)
            for (const int b : cfg.grid.batch_size) {
                Hyperparams h = best;
                h.lr = lr;
                h.batch_size = b;
                h.validate();
                cells.push_back(h);
            }
        std::cout << "grid: " << cells.size() << " cells x " << cfg.folds << " folds\n";
        const auto results = grid_search(tr, cells, cfg.folds, cfg.attention, cfg.seed, cfg.mode);
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : results) j.push_back(to_json(r));
        write_out(cfg, "grid.json", j.dump(2) + "\n");
        write_out(cfg, "grid_scores.txt", grid_class_table(results));
        write_out(cfg, "grid_loss.txt", grid_loss_table(results));
        write_out(cfg, "grid_time.txt", grid_time_table(results));
        std::cout << grid_loss_table(results);
        best = results.front().hyper;
    }

    TrainOptions opts;
    opts.mode = cfg.mode;
    if (te) opts.validation = &*te;
    opts.on_epoch = [&](int epoch, double loss) {
        std::cout << "epoch " << epoch << "/" << best.epochs << " loss " << format_fixed(loss, 4) << "\n";
    };
    const auto run = train(tr, best, cfg.attention, opts);
    save_checkpoint(run.checkpoint, fs::path(cfg.out_dir) / "checkpoint");
    write_out(cfg, "train.json", to_json(run).dump(2) + "\n");

    const std::string name = cfg.name.empty() ? model_label(cfg.attention.kind, cfg.mode) : cfg.name;
    TextTable t;
    t.headers = {"Model", "Train.", "Val.", "Inf."};
    t.rows.push_back({name, format_fixed(run.train_seconds, 2), format_fixed(run.validate_seconds, 2),
                      format_fixed(run.infer_seconds, 2)});
    std::string txt = t.render();
    txt += "epoch loss:";
    for (const double l : run.epoch_loss) txt += " " + format_fixed(l, 4);
    txt += "\n";
    if (run.validation_accuracy)
        txt += "validation accuracy " + format_fixed(*run.validation_accuracy, 3) + ", loss " +
               format_fixed(*run.validation_loss, 3) + "\n";
    write_out(cfg, "train.txt", txt);
    std::cout << txt;
    return 0;
}

int cmd_eval(const RunConfig& cfg, const Flags& f) {
    const auto data = load_data(cfg);
    const Corpus* raw = data.test ? &*data.test : data.train ? &*data.train : nullptr;
    if (!raw) throw InvalidConfig("eval needs --test or --corpus");
    std::optional<ConnectiveLexicon> lex;
    auto corpus_for = [&](PreprocessMode mode) {
        if (mode != PreprocessMode::None && !lex) {
            if (cfg.lexicon_path.empty())
                throw InvalidConfig("checkpoint preprocessing '" + std::string(mode_name(mode)) + "' needs --lexicon");
            lex = load_lexicon(cfg.lexicon_path);
        }
        return preprocess_corpus(*raw, mode, lexicon_or_null(lex));
    };

    const Checkpoint ckpt = load_checkpoint(f.checkpoint);
    require_compatible(ckpt, cfg.mode);
    const Corpus corpus = corpus_for(ckpt.mode);
    const EvalReport report = evaluate_checkpoint(ckpt, corpus);
    const std::string name = cfg.name.empty() ? model_label(ckpt.attention.kind, ckpt.mode) : cfg.name;
    nlohmann::json j = model_report_json(name, report);
    std::vector<NamedReport> rows{{name, report}};
    std::string mw_text;

    if (!f.baseline.empty()) {
        const Checkpoint base = load_checkpoint(f.baseline);
        const Corpus base_corpus = corpus_for(base.mode);
        const EvalReport base_report = evaluate_checkpoint(base, base_corpus);
        std::string base_name = f.baseline_name.empty() ? model_label(base.attention.kind, base.mode) : f.baseline_name;
        if (base_name == name) base_name += " (baseline)";
        const auto fa = per_fold_macro_f1(ckpt, corpus, cfg.folds, cfg.seed);
        const auto fb = per_fold_macro_f1(base, base_corpus, cfg.folds, cfg.seed);
        const auto mw = mann_whitney_u(fa, fb);
        j["baseline"] = model_report_json(base_name, base_report);
        j["mann_whitney"] = {{"u", mw.u},
                             {"p", mw.p},
                             {"significant", mw.significant},
                             {"exact", mw.exact},
                             {"alpha", 0.05},
                             {"model_fold_macro_f1", fa},
                             {"baseline_fold_macro_f1", fb}};
        rows.push_back({base_name, base_report});
        mw_text = "\n" + mann_whitney_block(name, base_name, mw);
    }

    write_snapshot(cfg);
    const std::string txt = model_comparison_table(rows) + mw_text;
    write_out(cfg, "eval.json", j.dump(2) + "\n");
    write_out(cfg, "eval.txt", txt);
    write_out(cfg, "confusion.csv", confusion_csv(report));
    write_out(cfg, "per_class.csv", per_class_csv(read_plot_models(j.dump(), name)));
    std::cout << txt;
    return 0;
}

int cmd_ablate(const RunConfig& cfg) {
    const auto data = load_data(cfg);
    if (!data.train) throw InvalidConfig("ablate needs --train or --corpus");
    if (cfg.lexicon_path.empty()) throw InvalidConfig("ablate needs --lexicon");
    const auto lex = load_lexicon(cfg.lexicon_path);
    Corpus tr = *data.train;
    Corpus te;
    if (data.test) {
        te = *data.test;
    } else {
        auto folds = split_folds(tr, 5, cfg.seed);
        tr = std::move(folds.front().train);
        te = std::move(folds.front().validation);
    }
    write_snapshot(cfg);
    const auto rows = run_ablation(tr, te, cfg.effective_hyper(), cfg.attention, lex);
    const auto named = named_reports(rows);
    nlohmann::json timing = nlohmann::json::array();
    for (const auto& r : rows)
        timing.push_back({{"name", r.name}, {"train_seconds", r.train_seconds}, {"infer_seconds", r.infer_seconds}});
    write_out(cfg, "ablation.json", ablation_json(rows).dump(2) + "\n");
    write_out(cfg, "ablation.txt", ablation_table(named));
    write_out(cfg, "ablation_models.txt", model_comparison_table(named));
    write_out(cfg, "ablation_timing.txt", model_timing_table(ablation_timings(rows)));
    write_out(cfg, "ablation_timing.json", timing.dump(2) + "\n");
    std::cout << ablation_table(named);
    return 0;
}

int cmd_plot(const RunConfig& cfg, const Flags& f) {
    std::vector<PlotModel> models;
    for (const auto& path : f.reports) {
        auto m = read_plot_models(detail::slurp(path), fs::path(path).stem().string());
        models.insert(models.end(), m.begin(), m.end());
    }
    if (models.empty()) std::cerr << "causalcat: warning: no models in the given reports; writing header-only CSV\n";
    const auto files = plot_files(models);
    write_out(cfg, "per_class.csv", files.per_class_csv);
    write_out(cfg, "per_class.svg", files.per_class_svg);
    write_out(cfg, "accuracy.csv", files.accuracy_csv);
    write_out(cfg, "accuracy.svg", files.accuracy_svg);
    write_out(cfg, "models.csv", files.models_csv);
    write_out(cfg, "models.svg", files.models_svg);
    std::cout << "plot data for " << models.size() << " model(s) written to " << cfg.out_dir << "\n";
    return 0;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 1;
        case ErrorKind::Data: return 2;
        case ErrorKind::Divergence: return 3;
    }
    return 2;
}

int fail(const std::string& code, const std::string& message, int status) {
    std::cerr << "causalcat: error[" << code << "]: " << message << "\n";
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal categorization toolkit for mental-health posts"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", f.seed, "Seed for initialization, batch order, dropout and folds");
    app.add_option("--out", f.out, "Output directory");
    app.add_option("--train", f.train, "Training corpus (CSV)");
    app.add_option("--test", f.test, "Test corpus (CSV)");
    app.add_option("--corpus", f.corpus, "Unsplit corpus (CSV)");
    app.add_option("--lexicon", f.lexicon, "Connective lexicon, one phrase per line");
    app.add_option("--mode", f.mode, "Preprocessing: none, rda or b-rda");
    app.add_option("--attention", f.attention, "Attention: longformer or dense");
    app.add_option("--name", f.name, "Display name of the model in reports");
    app.add_option("--folds", f.folds, "Cross-validation folds");
    app.add_option("--epochs", f.epochs, "Training epochs");
    app.add_option("--batch-size", f.batch_size, "Batch size");
    app.add_option("--lr", f.lr, "Peak learning rate");
    app.add_flag("--free-form", f.free_form, "Allow hyperparameters outside the search grid");

    auto* stats = app.add_subcommand("stats", "Length statistics and per-category counts");
    auto* preprocess = app.add_subcommand("preprocess", "Apply RDA or B-RDA to corpus files");
    auto* train_cmd = app.add_subcommand("train", "Train a classifier and write a checkpoint");
    train_cmd->add_flag("--grid", f.grid, "Cross-validated search over learning rate and batch size first");
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled corpus");
    eval->add_option("--checkpoint", f.checkpoint, "Checkpoint directory")->required();
    eval->add_option("--baseline", f.baseline, "Second checkpoint to compare against");
    eval->add_option("--baseline-name", f.baseline_name, "Display name of the baseline");
    auto* ablate = app.add_subcommand("ablate", "Attention x preprocessing ablation");
    auto* plot = app.add_subcommand("plot", "Plot data (CSV and SVG) from report files");
    plot->add_option("reports", f.reports, "Report JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("Usage", e.what(), 1);
    }

    try {
        const RunConfig cfg = resolve(f);
        if (*stats) return cmd_stats(cfg);
        if (*preprocess) return cmd_preprocess(cfg);
        if (*train_cmd) return cmd_train(cfg, f.grid);
        if (*eval) return cmd_eval(cfg, f);
        if (*ablate) return cmd_ablate(cfg);
        if (*plot) return cmd_plot(cfg, f);
    } catch (const Error& e) {
        return fail(e.code(), e.what(), exit_code(e.kind()));
    } catch (const fs::filesystem_error& e) {
        return fail("IoError", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("Internal", e.what(), 2);
    }
    return 1;
}
