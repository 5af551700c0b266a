#pragma once

// Plain-text result tables: per-category grid scores, grid loss/accuracy and
// timing, multi-model comparison, model timing and ablation summaries.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causalcat/corpus.hpp"
#include "causalcat/metrics.hpp"
#include "causalcat/trainer.hpp"

namespace causalcat {

/// Column-aligned table. The first column is left-aligned, the rest are
/// right-aligned. Optional group labels span consecutive columns.
struct TextTable {
    std::vector<std::pair<std::string, std::size_t>> groups;  // label, column span
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;

    std::string render() const {
        const std::size_t ncol = headers.size();
        std::vector<std::size_t> width(ncol, 0);
        for (std::size_t c = 0; c < ncol; ++c) width[c] = headers[c].size();
        for (const auto& row : rows)
            for (std::size_t c = 0; c < ncol && c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

        // Widen the last column of a group if its label does not fit.
        std::size_t col = 0;
        for (const auto& [label, span] : groups) {
            if (span == 0 || col + span > ncol) break;
            std::size_t w = 2 * (span - 1);
            for (std::size_t c = col; c < col + span; ++c) w += width[c];
            if (label.size() > w) width[col + span - 1] += label.size() - w;
            col += span;
        }

        auto pad = [](const std::string& s, std::size_t w, bool left) {
            const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
            return left ? s + fill : fill + s;
        };
        auto line = [&](const std::vector<std::string>& cells) {
            std::string out;
            for (std::size_t c = 0; c < ncol; ++c) {
                if (c) out += "  ";
                out += pad(c < cells.size() ? cells[c] : std::string(), width[c], c == 0);
            }
            while (!out.empty() && out.back() == ' ') out.pop_back();
            return out + "\n";
        };

        std::string out;
        if (!groups.empty()) {
            std::string g;
            col = 0;
            for (const auto& [label, span] : groups) {
                if (span == 0 || col + span > ncol) break;
                std::size_t w = 2 * (span - 1);
                for (std::size_t c = col; c < col + span; ++c) w += width[c];
                if (col) g += "  ";
                const std::size_t left = (w - std::min(w, label.size())) / 2;
                g += std::string(left, ' ') + label + std::string(w - left - std::min(w, label.size()), ' ');
                col += span;
            }
            while (!g.empty() && g.back() == ' ') g.pop_back();
            out += g + "\n";
        }
        out += line(headers);
        std::size_t total = 2 * (ncol ? ncol - 1 : 0);
        for (const auto w : width) total += w;
        out += std::string(total, '-') + "\n";
        for (const auto& row : rows) out += line(row);
        return out;
    }
};

inline std::string format_lr(double lr) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", lr);
    return buf;
}

/// First cell (in the given order) for each (learning rate, batch size).
inline std::map<std::pair<double, int>, const GridCellResult*> cells_by_lr_batch(
    const std::vector<GridCellResult>& cells) {
    std::map<std::pair<double, int>, const GridCellResult*> out;
    for (const auto& c : cells) out.emplace(std::make_pair(c.hyper.lr, c.hyper.batch_size), &c);
    return out;
}

namespace detail {

inline std::vector<double> distinct_lrs(const std::vector<GridCellResult>& cells) {
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(c.hyper.lr);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline std::vector<int> distinct_batches(const std::vector<GridCellResult>& cells) {
    std::vector<int> v;
    for (const auto& c : cells) v.push_back(c.hyper.batch_size);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace detail

/// Per-category precision/recall/F1 for every (lr, batch) cell, plus a final
/// accuracy row.
inline std::string grid_class_table(const std::vector<GridCellResult>& cells) {
    const auto index = cells_by_lr_batch(cells);
    TextTable t;
    t.headers.push_back("Causal category");
    t.groups.emplace_back("", 1);
    for (const auto& [key, cell] : index) {
        t.groups.emplace_back("lr " + format_lr(key.first) + ", batch " + std::to_string(key.second), 3);
        for (const char* h : {"P", "R", "F"}) t.headers.push_back(h);
    }
    for (int k = 0; k < kNumClasses; ++k) {
        std::vector<std::string> row{std::string(category_name(category_from_index(k)))};
        for (const auto& [key, cell] : index) {
            const auto& s = cell->mean_per_class[k];
            row.push_back(format_fixed(s.precision, 3));
            row.push_back(format_fixed(s.recall, 3));
            row.push_back(format_fixed(s.f1, 3));
        }
        t.rows.push_back(std::move(row));
    }
    std::vector<std::string> acc{"Testing Accuracy"};
    for (const auto& [key, cell] : index) {
        acc.push_back("");
        acc.push_back(format_fixed(cell->mean_accuracy, 3));
        acc.push_back("");
    }
    t.rows.push_back(std::move(acc));
    return t.render();
}

/// Rows are learning rates; each batch size contributes loss and accuracy.
inline std::string grid_loss_table(const std::vector<GridCellResult>& cells) {
    const auto index = cells_by_lr_batch(cells);
    const auto batches = detail::distinct_batches(cells);
    TextTable t;
    t.headers.push_back("Learning rate");
    t.groups.emplace_back("", 1);
    for (const int b : batches) {
        t.groups.emplace_back("Batch " + std::to_string(b), 2);
        t.headers.push_back("Loss");
        t.headers.push_back("Accuracy");
    }
    for (const double lr : detail::distinct_lrs(cells)) {
        std::vector<std::string> row{format_lr(lr)};
        for (const int b : batches) {
            const auto it = index.find({lr, b});
            row.push_back(it == index.end() ? "-" : format_fixed(it->second->mean_loss, 3));
            row.push_back(it == index.end() ? "-" : format_fixed(it->second->mean_accuracy, 3));
        }
        t.rows.push_back(std::move(row));
    }
    return t.render();
}

/// Mean training, validation and inference seconds per (lr, batch) cell.
inline std::string grid_time_table(const std::vector<GridCellResult>& cells) {
    const auto index = cells_by_lr_batch(cells);
    const auto batches = detail::distinct_batches(cells);
    TextTable t;
    t.headers.push_back("Learning rate");
    t.groups.emplace_back("", 1);
    for (const int b : batches) {
        t.groups.emplace_back("Batch " + std::to_string(b), 3);
        for (const char* h : {"Train.", "Val.", "Inf."}) t.headers.push_back(h);
    }
    for (const double lr : detail::distinct_lrs(cells)) {
        std::vector<std::string> row{format_lr(lr)};
        for (const int b : batches) {
            const auto it = index.find({lr, b});
            if (it == index.end()) {
                row.insert(row.end(), {"-", "-", "-"});
                continue;
            }
            row.push_back(format_fixed(it->second->mean_train_seconds, 2));
            row.push_back(format_fixed(it->second->mean_validate_seconds, 2));
            row.push_back(format_fixed(it->second->mean_infer_seconds, 2));
        }
        t.rows.push_back(std::move(row));
    }
    return t.render();
}

struct NamedReport {
    std::string name;
    EvalReport report;
};

/// Macro precision, recall, F-measure and accuracy, one row per model.
inline std::string model_comparison_table(const std::vector<NamedReport>& models) {
    TextTable t;
    t.headers = {"Methods", "Precision", "Recall", "F-measure", "Accuracy"};
    for (const auto& m : models)
        t.rows.push_back({m.name, format_fixed(m.report.macro_precision, 3), format_fixed(m.report.macro_recall, 3),
                          format_fixed(m.report.macro_f1, 3), format_fixed(m.report.accuracy, 3)});
    return t.render();
}

struct ModelTiming {
    std::string name;
    double train_seconds = 0.0;
    double infer_seconds = 0.0;
    std::optional<double> loss;
};

inline std::string model_timing_table(const std::vector<ModelTiming>& models) {
    TextTable t;
    t.headers = {"Methods", "Training time (s)", "Inference time (s)", "Loss"};
    for (const auto& m : models)
        t.rows.push_back({m.name, format_fixed(m.train_seconds, 2), format_fixed(m.infer_seconds, 2),
                          m.loss ? format_fixed(*m.loss, 3) : "-"});
    return t.render();
}

/// Accuracy, macro F1, weighted F1 and loss, one row per ablation setting.
inline std::string ablation_table(const std::vector<NamedReport>& rows) {
    TextTable t;
    t.headers = {"Methods", "A", "M-F1", "W-F1", "Loss"};
    for (const auto& r : rows)
        t.rows.push_back({r.name, format_fixed(r.report.accuracy, 3), format_fixed(r.report.macro_f1, 3),
                          format_fixed(r.report.weighted_f1, 3),
                          r.report.mean_loss ? format_fixed(*r.report.mean_loss, 3) : "-"});
    return t.render();
}

/// Mann-Whitney summary appended below a comparison table.
inline std::string mann_whitney_block(const std::string& a, const std::string& b, const MannWhitneyResult& r,
                                      double alpha = 0.05) {
    std::string out = "Mann-Whitney U (" + a + " vs " + b + ", per-fold macro F1)\n";
    out += "  U = " + format_fixed(r.u, 1) + "\n";
    out += "  p = " + format_fixed(r.p, 4) + (r.exact ? " (exact)" : " (normal approximation)") + "\n";
    out += "  verdict: " + std::string(r.significant ? "significant" : "not significant") + " at alpha " +
           format_fixed(alpha, 2) + "\n";
    return out;
}

}  // namespace causalcat
