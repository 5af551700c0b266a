#include <gtest/gtest.h>

#include <sstream>

#include "causalcat/report.hpp"

using namespace causalcat;

namespace {

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

GridCellResult cell(double lr, int batch, double acc, double loss) {
    GridCellResult c;
    c.hyper.lr = lr;
    c.hyper.batch_size = batch;
    c.mean_accuracy = acc;
    c.mean_loss = loss;
    c.mean_train_seconds = 1.5;
    c.mean_validate_seconds = 0.25;
    c.mean_infer_seconds = 0.125;
    for (int k = 0; k < kNumClasses; ++k) c.mean_per_class[k] = {0.1 * k, 0.2, 0.3};
    return c;
}

}  // namespace

TEST(TextTable, AlignsColumnsAndGroups) {
    TextTable t;
    t.groups = {{"", 1}, {"a wide group label", 2}};
    t.headers = {"Name", "X", "Y"};
    t.rows = {{"first", "1", "22"}, {"second row", "333", "4"}};
    const auto l = lines(t.render());
    ASSERT_EQ(l.size(), 5u);
    EXPECT_NE(l[0].find("a wide group label"), std::string::npos);
    EXPECT_EQ(l[2].find_first_not_of('-'), std::string::npos);
    EXPECT_EQ(l[3].rfind("first", 0), 0u);
    // Right-aligned numeric columns end at the same offset.
    EXPECT_EQ(l[3].size(), l[4].size());
    EXPECT_EQ(l[1].size(), l[3].size());
}

TEST(GridTables, ShapesFollowLrAndBatchAxes) {
    std::vector<GridCellResult> cells = {cell(1e-5, 8, 0.6, 1.1), cell(3e-5, 8, 0.5, 1.2), cell(1e-5, 16, 0.4, 1.3)};
    const auto scores = lines(grid_class_table(cells));
    // group line, header, rule, five categories, accuracy row
    ASSERT_EQ(scores.size(), 9u);
    EXPECT_NE(scores[0].find("lr 1e-05, batch 8"), std::string::npos);
    EXPECT_NE(scores[0].find("lr 3e-05, batch 8"), std::string::npos);
    EXPECT_NE(scores[3].find("Bias or Abuse"), std::string::npos);
    EXPECT_EQ(scores[8].rfind("Testing Accuracy", 0), 0u);
    EXPECT_NE(scores[8].find("0.600"), std::string::npos);

    const auto loss = lines(grid_loss_table(cells));
    ASSERT_EQ(loss.size(), 5u);
    EXPECT_NE(loss[0].find("Batch 8"), std::string::npos);
    EXPECT_NE(loss[0].find("Batch 16"), std::string::npos);
    EXPECT_NE(loss[1].find("Loss"), std::string::npos);
    EXPECT_NE(loss[3].find("1.100"), std::string::npos);
    EXPECT_NE(loss[4].find("-"), std::string::npos);  // 3e-5 x 16 is missing

    const auto time = lines(grid_time_table(cells));
    ASSERT_EQ(time.size(), 5u);
    EXPECT_NE(time[1].find("Train."), std::string::npos);
    EXPECT_NE(time[1].find("Inf."), std::string::npos);
    EXPECT_NE(time[3].find("1.50"), std::string::npos);
}

TEST(GridTables, FirstCellWinsPerKey) {
    std::vector<GridCellResult> cells = {cell(1e-5, 8, 0.9, 0.5), cell(1e-5, 8, 0.1, 9.0)};
    const auto t = grid_loss_table(cells);
    EXPECT_NE(t.find("0.900"), std::string::npos);
    EXPECT_EQ(t.find("0.100"), std::string::npos);
}

TEST(ModelTables, Columns) {
    const auto rep = evaluate({CausalCategory::BiasOrAbuse, CausalCategory::BiasOrAbuse},
                              {CausalCategory::BiasOrAbuse, CausalCategory::Medication});
    auto with_loss = rep;
    with_loss.mean_loss = 0.25;
    const auto cmp = lines(model_comparison_table({{"Longformer", rep}, {"Transformer", rep}}));
    ASSERT_EQ(cmp.size(), 4u);
    EXPECT_NE(cmp[0].find("Methods"), std::string::npos);
    EXPECT_NE(cmp[0].find("F-measure"), std::string::npos);
    EXPECT_NE(cmp[2].find("0.500"), std::string::npos);

    const auto timing = lines(model_timing_table({{"Longformer", 12.5, 0.75, 0.25}, {"Transformer", 1, 2, {}}}));
    ASSERT_EQ(timing.size(), 4u);
    EXPECT_NE(timing[0].find("Training time"), std::string::npos);
    EXPECT_NE(timing[2].find("12.50"), std::string::npos);
    EXPECT_EQ(timing[3].back(), '-');

    const auto abl = lines(ablation_table({{"RDA + Longformer", with_loss}}));
    ASSERT_EQ(abl.size(), 3u);
    for (const char* h : {"A", "M-F1", "W-F1", "Loss"}) EXPECT_NE(abl[0].find(h), std::string::npos);
    EXPECT_NE(abl[2].find("0.250"), std::string::npos);
}

TEST(ModelTables, MannWhitneyBlock) {
    const auto r = mann_whitney_u({1, 2}, {3, 4});
    const auto b = mann_whitney_block("A", "B", r);
    EXPECT_NE(b.find("U = 0.0"), std::string::npos);
    EXPECT_NE(b.find("p = 0.3333 (exact)"), std::string::npos);
    EXPECT_NE(b.find("not significant"), std::string::npos);
    EXPECT_EQ(format_lr(5e-5), "5e-05");
}
