#pragma once

// Labeled corpus: loading, cause-detection filtering, length statistics and
// stratified folds.

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "causalcat/csv.hpp"
#include "causalcat/error.hpp"
#include "causalcat/random.hpp"
#include "causalcat/text.hpp"

namespace causalcat {

/// Code 0 marks a post without a stated cause; 1..5 are the five causal
/// categories a candidate post can carry.
enum class CausalCategory : int {
    NoReason = 0,
    BiasOrAbuse = 1,
    JobsAndCareer = 2,
    Medication = 3,
    Relationship = 4,
    Alienation = 5,
};

inline constexpr int kNumClasses = 5;

inline constexpr std::array<CausalCategory, kNumClasses> kCandidateCategories = {
    CausalCategory::BiasOrAbuse, CausalCategory::JobsAndCareer, CausalCategory::Medication,
    CausalCategory::Relationship, CausalCategory::Alienation};

inline int code(CausalCategory c) { return static_cast<int>(c); }

/// 0-based class index used by the classifier (BiasOrAbuse -> 0).
inline int class_index(CausalCategory c) { return code(c) - 1; }
inline CausalCategory category_from_index(int index) { return static_cast<CausalCategory>(index + 1); }

inline std::string_view category_name(CausalCategory c) {
    switch (c) {
        case CausalCategory::NoReason: return "No reason";
        case CausalCategory::BiasOrAbuse: return "Bias or Abuse";
        case CausalCategory::JobsAndCareer: return "Jobs and career";
        case CausalCategory::Medication: return "Medication";
        case CausalCategory::Relationship: return "Relationship";
        case CausalCategory::Alienation: return "Alienation";
    }
    return "?";
}

/// Parses an integer code 0..5 or a category name (case-insensitive; the
/// plural spellings used in annotation sheets are accepted too).
inline std::optional<CausalCategory> parse_category(std::string_view raw) {
    const std::string s = text::ascii_lower(text::trim(raw));
    if (s.size() == 1 && s[0] >= '0' && s[0] <= '5') return static_cast<CausalCategory>(s[0] - '0');
    if (s == "no reason" || s == "no reason/ cause" || s == "none") return CausalCategory::NoReason;
    if (s == "bias or abuse" || s == "bias/abuse" || s == "bias/ abuse") return CausalCategory::BiasOrAbuse;
    if (s == "jobs and career" || s == "jobs and careers" || s == "jobs/career" || s == "jobs/ career")
        return CausalCategory::JobsAndCareer;
    if (s == "medication") return CausalCategory::Medication;
    if (s == "relationship" || s == "relationships") return CausalCategory::Relationship;
    if (s == "alienation") return CausalCategory::Alienation;
    return std::nullopt;
}

struct Post {
    std::string id;
    std::string text;
    bool cause_detected = false;
    std::optional<CausalCategory> category;  // present iff cause_detected
    std::vector<std::string> explanation;
};

enum class SplitTag { Train, Test, Unsplit };

inline std::string_view split_name(SplitTag t) {
    switch (t) {
        case SplitTag::Train: return "train";
        case SplitTag::Test: return "test";
        case SplitTag::Unsplit: return "unsplit";
    }
    return "unsplit";
}

struct Corpus {
    std::vector<Post> posts;
    SplitTag split = SplitTag::Unsplit;

    std::size_t size() const { return posts.size(); }
    bool empty() const { return posts.empty(); }
};

/// Maps logical fields to header names. An empty name marks an absent
/// column: no `cd` column means the flag is derived from the category code,
/// no `id` column means row numbers are used.
struct ColumnMapping {
    std::string id = "id";
    std::string text = "text";
    std::string cd = "cd";
    std::string category = "category";
    std::string explanation = "explanation";

    static ColumnMapping from_json(const nlohmann::json& j) {
        ColumnMapping m;
        if (j.contains("id")) m.id = j.at("id").get<std::string>();
        if (j.contains("text")) m.text = j.at("text").get<std::string>();
        if (j.contains("cd")) m.cd = j.at("cd").get<std::string>();
        if (j.contains("category")) m.category = j.at("category").get<std::string>();
        if (j.contains("explanation")) m.explanation = j.at("explanation").get<std::string>();
        return m;
    }

    nlohmann::json to_json() const {
        return {{"id", id}, {"text", text}, {"cd", cd}, {"category", category}, {"explanation", explanation}};
    }
};

/// Comma-separated explanation spans, trimmed; "-" and blanks dropped.
inline std::vector<std::string> parse_explanation(std::string_view raw) {
    std::vector<std::string> spans;
    std::size_t start = 0;
    while (start <= raw.size()) {
        const std::size_t comma = raw.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? raw.size() : comma;
        std::string span = text::trim(raw.substr(start, end - start));
        if (!span.empty() && span != "-") spans.push_back(std::move(span));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return spans;
}

/// Explanation spans that do not occur in the post text once both sides are
/// whitespace-normalized (compared case-insensitively). Annotations are often
/// paraphrased, so the loader reports these instead of rejecting the row.
inline std::vector<std::string> unmatched_explanations(const Post& post) {
    const std::string hay = text::ascii_lower(text::normalize_whitespace(post.text));
    std::vector<std::string> missing;
    for (const auto& span : post.explanation) {
        if (hay.find(text::ascii_lower(text::normalize_whitespace(span))) == std::string::npos)
            missing.push_back(span);
    }
    return missing;
}

namespace detail {

inline std::optional<std::size_t> require_column(const csv::Table& table, const std::string& name,
                                                 const std::string& path) {
    if (name.empty()) return std::nullopt;
    auto idx = table.column(name);
    if (!idx) throw MissingColumn("column '" + name + "' not found in header of " + path);
    return idx;
}

inline std::optional<bool> parse_flag(std::string_view raw) {
    const std::string s = text::ascii_lower(text::trim(raw));
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    return std::nullopt;
}

}  // namespace detail

/// Builds one post from a CSV row. `row_number` is the 1-based data row.
inline Post parse_post(const csv::Table& table, std::size_t r, const ColumnMapping& mapping,
                       const std::string& path) {
    const auto text_col = detail::require_column(table, mapping.text, path);
    if (!text_col) throw MissingColumn("the text column must be mapped");
    const auto cat_col = detail::require_column(table, mapping.category, path);
    if (!cat_col) throw MissingColumn("the category column must be mapped");
    const auto id_col = detail::require_column(table, mapping.id, path);
    const auto cd_col = detail::require_column(table, mapping.cd, path);
    const auto expl_col = detail::require_column(table, mapping.explanation, path);

    const auto& row = table.rows[r];
    const std::size_t row_number = r + 1;
    const std::string where = path + " row " + std::to_string(row_number) + " (line " +
                              std::to_string(table.row_lines[r]) + ")";
    auto cell = [&](std::size_t col, const std::string& name) -> const std::string& {
        if (col >= row.size()) throw MissingColumn(where + ": missing value for column '" + name + "'");
        return row[col];
    };

    Post post;
    post.id = id_col ? text::trim(cell(*id_col, mapping.id)) : std::to_string(row_number);

    const std::string& raw_text = cell(*text_col, mapping.text);
    if (!text::is_valid_utf8(raw_text)) throw EncodingError(where + ": text is not valid UTF-8");
    post.text = text::strip_urls(raw_text);

    const std::string& raw_cat = cell(*cat_col, mapping.category);
    const std::string cat_trimmed = text::trim(raw_cat);
    std::optional<CausalCategory> category;
    if (!cat_trimmed.empty() && cat_trimmed != "-") {
        category = parse_category(cat_trimmed);
        if (!category) throw BadCategoryCode(where + ": unparseable category '" + cat_trimmed + "'");
    }

    if (cd_col) {
        const auto flag = detail::parse_flag(cell(*cd_col, mapping.cd));
        if (!flag) throw BadCauseFlag(where + ": cause-detection flag must be 0 or 1");
        post.cause_detected = *flag;
    } else {
        post.cause_detected = category && *category != CausalCategory::NoReason;
    }

    if (post.cause_detected) {
        if (!category || *category == CausalCategory::NoReason)
            throw BadCategoryCode(where + ": post with a detected cause needs a category in 1..5");
        post.category = category;
    } else if (category && *category != CausalCategory::NoReason) {
        throw BadCategoryCode(where + ": category given for a post without a detected cause");
    }

    if (expl_col) {
        const std::string& raw_expl = cell(*expl_col, mapping.explanation);
        if (!text::is_valid_utf8(raw_expl)) throw EncodingError(where + ": explanation is not valid UTF-8");
        post.explanation = parse_explanation(raw_expl);
    }
    return post;
}

inline Corpus corpus_from_table(const csv::Table& table, const ColumnMapping& mapping, SplitTag split,
                                const std::string& path) {
    Corpus corpus;
    corpus.split = split;
    corpus.posts.reserve(table.rows.size());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        Post post = parse_post(table, r, mapping, path);
        if (!seen.insert(post.id).second) throw DuplicateId(path + ": duplicate post id '" + post.id + "'");
        corpus.posts.push_back(std::move(post));
    }
    return corpus;
}

/// Loads a labeled corpus file. Row order is preserved; text is kept as-is
/// apart from raw URL removal.
inline Corpus load_corpus(const std::string& path, const ColumnMapping& mapping = {},
                          SplitTag split = SplitTag::Unsplit) {
    return corpus_from_table(csv::read_table(path), mapping, split, path);
}

/// Posts with a detected cause, in their original order.
inline Corpus filter_candidates(const Corpus& corpus) {
    Corpus out;
    out.split = corpus.split;
    for (const auto& p : corpus.posts)
        if (p.cause_detected) out.posts.push_back(p);
    return out;
}

inline std::array<std::size_t, kNumClasses> category_counts(const Corpus& corpus) {
    std::array<std::size_t, kNumClasses> counts{};
    for (const auto& p : corpus.posts)
        if (p.category && *p.category != CausalCategory::NoReason) ++counts[class_index(*p.category)];
    return counts;
}

// ---------------------------------------------------------------------------
// Length statistics

struct LengthStats {
    std::size_t count = 0;
    std::optional<std::size_t> min_len;  // empty when count == 0
    std::optional<std::size_t> max_len;
    std::optional<double> avg_len;
    std::optional<double> pct_gt200;
    std::optional<double> pct_gt300;
    std::optional<double> pct_gt400;
    std::size_t n_gt200 = 0;
    std::size_t n_gt300 = 0;
    std::size_t n_gt400 = 0;
};

struct LengthStatsReport {
    std::array<LengthStats, kNumClasses> per_category;
    LengthStats overall;
};

namespace detail {

inline LengthStats summarize_lengths(const std::vector<std::size_t>& lengths) {
    LengthStats s;
    s.count = lengths.size();
    if (lengths.empty()) return s;
    std::size_t total = 0;
    std::size_t lo = lengths.front();
    std::size_t hi = lengths.front();
    for (const auto len : lengths) {
        total += len;
        lo = std::min(lo, len);
        hi = std::max(hi, len);
        if (len > 200) ++s.n_gt200;
        if (len > 300) ++s.n_gt300;
        if (len > 400) ++s.n_gt400;
    }
    const auto n = static_cast<double>(lengths.size());
    s.min_len = lo;
    s.max_len = hi;
    s.avg_len = static_cast<double>(total) / n;
    s.pct_gt200 = 100.0 * static_cast<double>(s.n_gt200) / n;
    s.pct_gt300 = 100.0 * static_cast<double>(s.n_gt300) / n;
    s.pct_gt400 = 100.0 * static_cast<double>(s.n_gt400) / n;
    return s;
}

}  // namespace detail

/// Per-category and overall word-length statistics of a candidate corpus.
inline LengthStatsReport length_stats(const Corpus& corpus) {
    std::array<std::vector<std::size_t>, kNumClasses> per;
    std::vector<std::size_t> all;
    for (const auto& p : corpus.posts) {
        if (!p.category || *p.category == CausalCategory::NoReason)
            throw BadCategoryCode("length statistics need candidate posts; post '" + p.id + "' has no category");
        const std::size_t len = text::word_length(p.text);
        per[class_index(*p.category)].push_back(len);
        all.push_back(len);
    }
    LengthStatsReport report;
    for (int c = 0; c < kNumClasses; ++c) report.per_category[c] = detail::summarize_lengths(per[c]);
    report.overall = detail::summarize_lengths(all);
    return report;
}

inline std::string format_fixed(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline nlohmann::json to_json(const LengthStats& s) {
    using nlohmann::json;
    auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
    return {{"count", s.count},         {"min_len", opt(s.min_len)},     {"max_len", opt(s.max_len)},
            {"avg_len", opt(s.avg_len)}, {"pct_gt200", opt(s.pct_gt200)}, {"pct_gt300", opt(s.pct_gt300)},
            {"pct_gt400", opt(s.pct_gt400)}, {"n_gt200", s.n_gt200},     {"n_gt300", s.n_gt300},
            {"n_gt400", s.n_gt400}};
}

inline nlohmann::json to_json(const LengthStatsReport& r) {
    nlohmann::json cats = nlohmann::json::array();
    for (int c = 0; c < kNumClasses; ++c) {
        auto row = to_json(r.per_category[c]);
        row["category"] = std::string(category_name(category_from_index(c)));
        row["code"] = c + 1;
        cats.push_back(std::move(row));
    }
    return {{"categories", std::move(cats)}, {"overall", to_json(r.overall)}};
}

/// Plain-text table with the columns: category, total posts, min, max and
/// average length, and the percentage of posts above 200/300/400 words.
inline std::string to_text(const LengthStatsReport& r) {
    auto line = [](std::string_view name, const LengthStats& s) {
        auto num = [](const auto& o) { return o ? std::to_string(*o) : std::string("null"); };
        auto dec = [](const std::optional<double>& o) { return o ? format_fixed(*o) : std::string("null"); };
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-18s %8zu %7s %7s %8s %7s %7s %7s\n", std::string(name).c_str(), s.count,
                      num(s.min_len).c_str(), num(s.max_len).c_str(), dec(s.avg_len).c_str(),
                      dec(s.pct_gt200).c_str(), dec(s.pct_gt300).c_str(), dec(s.pct_gt400).c_str());
        return std::string(buf);
    };
    char head[256];
    std::snprintf(head, sizeof head, "%-18s %8s %7s %7s %8s %7s %7s %7s\n", "Causal Category", "#Posts", "Min.L",
                  "Max.L", "Avg.L", ">200", ">300", ">400");
    std::string out = head;
    for (int c = 0; c < kNumClasses; ++c) out += line(category_name(category_from_index(c)), r.per_category[c]);
    out += line("Overall", r.overall);
    return out;
}

/// Training/testing/total counts per category.
inline std::string counts_table(const std::vector<std::pair<std::string, const Corpus*>>& columns) {
    std::vector<std::array<std::size_t, kNumClasses>> counts;
    for (const auto& [name, corpus] : columns) counts.push_back(category_counts(*corpus));
    const bool with_total = columns.size() > 1;

    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-18s", "Causal category");
    out += buf;
    for (const auto& [name, corpus] : columns) {
        std::snprintf(buf, sizeof buf, " %9s", name.c_str());
        out += buf;
    }
    if (with_total) out += "     Total";
    out += '\n';

    std::vector<std::size_t> col_totals(columns.size(), 0);
    for (int c = 0; c < kNumClasses; ++c) {
        std::snprintf(buf, sizeof buf, "%-18s", std::string(category_name(category_from_index(c))).c_str());
        out += buf;
        std::size_t row_total = 0;
        for (std::size_t k = 0; k < columns.size(); ++k) {
            std::snprintf(buf, sizeof buf, " %9zu", counts[k][c]);
            out += buf;
            row_total += counts[k][c];
            col_totals[k] += counts[k][c];
        }
        if (with_total) {
            std::snprintf(buf, sizeof buf, " %9zu", row_total);
            out += buf;
        }
        out += '\n';
    }
    std::snprintf(buf, sizeof buf, "%-18s", "Total");
    out += buf;
    std::size_t grand = 0;
    for (const auto t : col_totals) {
        std::snprintf(buf, sizeof buf, " %9zu", t);
        out += buf;
        grand += t;
    }
    if (with_total) {
        std::snprintf(buf, sizeof buf, " %9zu", grand);
        out += buf;
    }
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Folds

struct Fold {
    Corpus train;
    Corpus validation;
};

/// Indices of each validation fold. Items are stratified by category code:
/// each stratum is shuffled with the seed, strata are concatenated in code
/// order, and position t goes to fold t mod k. Fold sizes and per-category
/// fold counts therefore differ by at most one.
inline std::vector<std::vector<std::size_t>> fold_assignment(const Corpus& corpus, std::size_t k,
                                                             std::uint64_t seed) {
    if (k < 2) throw InvalidConfig("fold count must be at least 2");
    if (corpus.size() < k)
        throw TooFewItems("cannot split " + std::to_string(corpus.size()) + " posts into " + std::to_string(k) +
                          " folds");
    std::array<std::vector<std::size_t>, kNumClasses + 1> strata;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& cat = corpus.posts[i].category;
        strata[cat ? code(*cat) : 0].push_back(i);
    }
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t t = 0;
    for (auto& stratum : strata) {
        rng.shuffle(stratum);
        for (const auto idx : stratum) folds[t++ % k].push_back(idx);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

inline std::vector<Fold> split_folds(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
    const auto assignment = fold_assignment(corpus, k, seed);
    std::vector<Fold> folds;
    folds.reserve(k);
    std::vector<char> in_fold(corpus.size());
    for (const auto& indices : assignment) {
        std::fill(in_fold.begin(), in_fold.end(), 0);
        Fold fold;
        fold.train.split = SplitTag::Train;
        fold.validation.split = SplitTag::Test;
        for (const auto i : indices) in_fold[i] = 1;
        for (std::size_t i = 0; i < corpus.size(); ++i)
            (in_fold[i] ? fold.validation : fold.train).posts.push_back(corpus.posts[i]);
        folds.push_back(std::move(fold));
    }
    return folds;
}

}  // namespace causalcat
