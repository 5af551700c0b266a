#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "causalcat/corpus.hpp"
#include "causalcat/random.hpp"

using namespace causalcat;

namespace {

std::string write_temp(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::path(testing::TempDir()) / name;
    std::ofstream(path, std::ios::binary) << contents;
    return path.string();
}

Post candidate(std::string id, CausalCategory c, std::string text) {
    Post p;
    p.id = std::move(id);
    p.text = std::move(text);
    p.cause_detected = true;
    p.category = c;
    return p;
}

std::string words(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w");
    return s;
}

}  // namespace

TEST(LoadCorpus, PreservesRowOrderAndFields) {
    const auto path = write_temp("three.csv",
                                 "id,text,cd,category,explanation\n"
                                 "a,\"I lost my job, again\",1,2,\"lost my job\"\n"
                                 "b,nothing to say,0,0,\n"
                                 "c,see https://x.org/p now,1,Relationship,\"a, b,  -\"\n");
    const auto corpus = load_corpus(path, {}, SplitTag::Train);
    ASSERT_EQ(corpus.size(), 3u);
    EXPECT_EQ(corpus.split, SplitTag::Train);
    EXPECT_EQ(corpus.posts[0].id, "a");
    EXPECT_EQ(corpus.posts[0].text, "I lost my job, again");
    EXPECT_EQ(corpus.posts[0].category, CausalCategory::JobsAndCareer);
    EXPECT_TRUE(corpus.posts[0].cause_detected);
    EXPECT_FALSE(corpus.posts[1].cause_detected);
    EXPECT_FALSE(corpus.posts[1].category.has_value());
    EXPECT_EQ(corpus.posts[2].category, CausalCategory::Relationship);
    EXPECT_EQ(corpus.posts[2].text.find("https"), std::string::npos);
    EXPECT_EQ(corpus.posts[2].explanation, (std::vector<std::string>{"a", "b"}));
}

TEST(LoadCorpus, ColumnMappingAbsorbsRenamedAndMissingColumns) {
    const auto path = write_temp("renamed.csv",
                                 "Post,Label\n"
                                 "hello there,1\n"
                                 "bye,0\n");
    ColumnMapping m = ColumnMapping::from_json({{"text", "Post"}, {"category", "Label"}, {"id", ""},
                                                {"cd", ""}, {"explanation", ""}});
    const auto corpus = load_corpus(path, m);
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(corpus.posts[0].id, "1");
    EXPECT_EQ(corpus.posts[1].id, "2");
    EXPECT_TRUE(corpus.posts[0].cause_detected);
    EXPECT_FALSE(corpus.posts[1].cause_detected);
    EXPECT_EQ(ColumnMapping::from_json(m.to_json()).to_json(), m.to_json());
}

TEST(LoadCorpus, Errors) {
    EXPECT_THROW(load_corpus(write_temp("nocol.csv", "id,text,cd\n1,x,1\n")), MissingColumn);
    EXPECT_THROW(load_corpus(write_temp("code7.csv", "id,text,cd,category,explanation\n1,x,1,7,\n")),
                 BadCategoryCode);
    EXPECT_THROW(load_corpus(write_temp("cd0cat.csv", "id,text,cd,category,explanation\n1,x,0,3,\n")),
                 BadCategoryCode);
    EXPECT_THROW(load_corpus(write_temp("cd1nocat.csv", "id,text,cd,category,explanation\n1,x,1,0,\n")),
                 BadCategoryCode);
    EXPECT_THROW(load_corpus(write_temp("flag.csv", "id,text,cd,category,explanation\n1,x,maybe,1,\n")),
                 BadCauseFlag);
    EXPECT_THROW(load_corpus(write_temp("utf8.csv", "id,text,cd,category,explanation\n1,\xff\xfe,1,1,\n")),
                 EncodingError);
    EXPECT_THROW(load_corpus(write_temp("dup.csv", "id,text,cd,category,explanation\n1,x,1,1,\n1,y,1,2,\n")),
                 DuplicateId);
    EXPECT_THROW(load_corpus(write_temp("short.csv", "id,text,cd,category,explanation\n1,x\n")), Error);
    EXPECT_THROW(load_corpus((std::filesystem::path(testing::TempDir()) / "absent.csv").string()), IoError);
}

TEST(LoadCorpus, CategoryNamesAccepted) {
    EXPECT_EQ(parse_category("bias or abuse"), CausalCategory::BiasOrAbuse);
    EXPECT_EQ(parse_category(" 5 "), CausalCategory::Alienation);
    EXPECT_EQ(parse_category("Medication"), CausalCategory::Medication);
    EXPECT_FALSE(parse_category("6").has_value());
    EXPECT_FALSE(parse_category("x").has_value());
}

TEST(Explanation, SpansAndMatching) {
    EXPECT_EQ(parse_explanation("go to the hospital, scars and cynicism"),
              (std::vector<std::string>{"go to the hospital", "scars and cynicism"}));
    EXPECT_TRUE(parse_explanation("").empty());
    EXPECT_TRUE(parse_explanation(" - ").empty());
    Post p = candidate("x", CausalCategory::Medication, "I  had to Go to the\nhospital today");
    p.explanation = {"go to the hospital", "pills"};
    EXPECT_EQ(unmatched_explanations(p), (std::vector<std::string>{"pills"}));
}

TEST(Filter, KeepsCandidatesInOrderAndIsIdempotent) {
    Corpus c;
    c.posts.push_back(candidate("1", CausalCategory::Alienation, "a"));
    Post none;
    none.id = "2";
    none.text = "b";
    c.posts.push_back(none);
    c.posts.push_back(candidate("3", CausalCategory::BiasOrAbuse, "c"));
    const auto f = filter_candidates(c);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f.posts[0].id, "1");
    EXPECT_EQ(f.posts[1].id, "3");
    EXPECT_EQ(filter_candidates(f).size(), f.size());
    const auto counts = category_counts(c);
    EXPECT_EQ(counts[0], 1u);
    EXPECT_EQ(counts[4], 1u);
    EXPECT_EQ(counts[1] + counts[2] + counts[3], 0u);
}

TEST(LengthStats, SingletonAndEmptyCategories) {
    Corpus c;
    c.posts.push_back(candidate("1", CausalCategory::Medication, words(10)));
    const auto r = length_stats(c);
    const auto& m = r.per_category[class_index(CausalCategory::Medication)];
    EXPECT_EQ(m.count, 1u);
    EXPECT_EQ(*m.min_len, 10u);
    EXPECT_EQ(*m.max_len, 10u);
    EXPECT_DOUBLE_EQ(*m.avg_len, 10.0);
    EXPECT_DOUBLE_EQ(*m.pct_gt200, 0.0);
    const auto& empty = r.per_category[0];
    EXPECT_EQ(empty.count, 0u);
    EXPECT_FALSE(empty.min_len.has_value());
    EXPECT_FALSE(empty.avg_len.has_value());
    const auto j = to_json(r);
    EXPECT_TRUE(j["categories"][0]["min_len"].is_null());
    EXPECT_EQ(j["categories"][2]["max_len"], 10);
    EXPECT_NE(to_text(r).find("null"), std::string::npos);
}

TEST(LengthStats, MatchesIndependentComputationAndIsPermutationInvariant) {
    Rng rng(17);
    Corpus c;
    std::array<std::vector<std::size_t>, kNumClasses> lens;
    for (int i = 0; i < 300; ++i) {
        const auto cat = kCandidateCategories[rng.below(kNumClasses)];
        const std::size_t n = 1 + rng.below(500);
        lens[class_index(cat)].push_back(n);
        c.posts.push_back(candidate(std::to_string(i), cat, "  " + words(n) + "\n"));
    }
    const auto r = length_stats(c);
    std::size_t total = 0, over = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        const auto& v = lens[k];
        const auto& s = r.per_category[k];
        ASSERT_EQ(s.count, v.size());
        if (v.empty()) continue;
        EXPECT_EQ(*s.min_len, *std::min_element(v.begin(), v.end()));
        EXPECT_EQ(*s.max_len, *std::max_element(v.begin(), v.end()));
        double sum = 0;
        std::size_t gt300 = 0;
        for (auto x : v) {
            sum += static_cast<double>(x);
            gt300 += x > 300;
        }
        EXPECT_NEAR(*s.avg_len, sum / static_cast<double>(v.size()), 1e-12);
        EXPECT_NEAR(*s.pct_gt300, 100.0 * static_cast<double>(gt300) / static_cast<double>(v.size()), 1e-12);
        total += v.size();
        for (auto x : v) over += x > 200;
    }
    EXPECT_EQ(r.overall.count, total);
    EXPECT_EQ(r.overall.n_gt200, over);

    auto shuffled = c;
    rng.shuffle(shuffled.posts);
    EXPECT_EQ(to_json(length_stats(shuffled)), to_json(r));

    Corpus bad = c;
    bad.posts[0].category.reset();
    EXPECT_THROW(length_stats(bad), BadCategoryCode);
}

TEST(LengthStats, TextTableShape) {
    Corpus c;
    c.posts.push_back(candidate("1", CausalCategory::BiasOrAbuse, words(3)));
    c.posts.push_back(candidate("2", CausalCategory::BiasOrAbuse, words(4)));
    const std::string t = to_text(length_stats(c));
    EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 7);
    EXPECT_NE(t.find("Avg.L"), std::string::npos);
    EXPECT_NE(t.find("3.50"), std::string::npos);
    EXPECT_EQ(format_fixed(296.555), "296.56");
}

TEST(CountsTable, RowAndColumnTotals) {
    Corpus train, test;
    train.posts.push_back(candidate("1", CausalCategory::BiasOrAbuse, "x"));
    train.posts.push_back(candidate("2", CausalCategory::Alienation, "x"));
    test.posts.push_back(candidate("3", CausalCategory::Alienation, "x"));
    const auto t = counts_table({{"Training", &train}, {"Testing", &test}});
    EXPECT_NE(t.find("Alienation                 1         1         2"), std::string::npos);
    EXPECT_NE(t.find("Total                      2         1         3"), std::string::npos);
}

TEST(Folds, StratifiedFixture) {
    Corpus c;
    for (int i = 0; i < 20; ++i)
        c.posts.push_back(candidate(std::to_string(i), i < 12 ? CausalCategory::BiasOrAbuse : CausalCategory::Medication,
                                    "x"));
    for (std::uint64_t seed : {0u, 1u, 99u}) {
        const auto folds = split_folds(c, 4, seed);
        ASSERT_EQ(folds.size(), 4u);
        for (const auto& f : folds) {
            const auto counts = category_counts(f.validation);
            EXPECT_EQ(counts[0], 3u);
            EXPECT_EQ(counts[2], 2u);
            EXPECT_EQ(f.train.size() + f.validation.size(), 20u);
        }
    }
}

TEST(Folds, PartitionBalanceAndDeterminism) {
    Rng rng(4);
    Corpus c;
    for (int i = 0; i < 103; ++i)
        c.posts.push_back(candidate(std::to_string(i), kCandidateCategories[rng.below(kNumClasses)], "x"));
    const auto a = fold_assignment(c, 10, 7);
    EXPECT_EQ(a, fold_assignment(c, 10, 7));
    EXPECT_NE(a, fold_assignment(c, 10, 8));
    std::set<std::size_t> all;
    std::size_t lo = 1000, hi = 0;
    for (const auto& f : a) {
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
        for (auto i : f) EXPECT_TRUE(all.insert(i).second);
    }
    EXPECT_EQ(all.size(), c.size());
    EXPECT_LE(hi - lo, 1u);

    const auto totals = category_counts(c);
    for (int k = 0; k < kNumClasses; ++k) {
        std::size_t fmin = 1000, fmax = 0;
        for (const auto& f : split_folds(c, 10, 7)) {
            const auto n = category_counts(f.validation)[k];
            fmin = std::min(fmin, n);
            fmax = std::max(fmax, n);
        }
        EXPECT_LE(fmax - fmin, 1u) << "category " << k << " total " << totals[k];
    }

    Corpus hundred;
    for (int i = 0; i < 100; ++i) hundred.posts.push_back(candidate(std::to_string(i), CausalCategory::Relationship, "x"));
    for (const auto& f : fold_assignment(hundred, 10, 0)) EXPECT_EQ(f.size(), 10u);
}

TEST(Folds, Errors) {
    Corpus c;
    c.posts.push_back(candidate("1", CausalCategory::Relationship, "x"));
    EXPECT_THROW(split_folds(c, 2, 0), TooFewItems);
    EXPECT_THROW(split_folds(c, 1, 0), InvalidConfig);
}
