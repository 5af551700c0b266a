#include <gtest/gtest.h>

#include "causalcat/csv.hpp"

using namespace causalcat;

TEST(Csv, QuotedFieldsAndEscapes) {
    std::vector<std::size_t> lines;
    const auto r = csv::parse_records("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n\"multi\nline\",2\n", &lines);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[1], (std::vector<std::string>{"x, y", "say \"hi\""}));
    EXPECT_EQ(r[2], (std::vector<std::string>{"multi\nline", "2"}));
    EXPECT_EQ(lines, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Csv, BomCrlfBlankLinesAndEmptyFields) {
    const auto r = csv::parse_records("\xEF\xBB\xBFid,text\r\n\r\n1,\r\n,\"\"\r\n");
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0][0], "id");
    EXPECT_EQ(r[1], (std::vector<std::string>{"1", ""}));
    EXPECT_EQ(r[2], (std::vector<std::string>{"", ""}));
}

TEST(Csv, MalformedInput) {
    EXPECT_THROW(csv::parse_records("a,b\n\"open,2\n"), MalformedCsv);
    EXPECT_THROW(csv::parse_records("a,b\nx\"y,2\n"), MalformedCsv);
}

TEST(Csv, WriteReadRoundTrip) {
    csv::Table t;
    t.header = {"id", "text"};
    t.rows = {{"1", "plain"}, {"2", "with, comma"}, {"3", "a \"quote\"\nand newline"}, {"4", " padded "}};
    const auto back = csv::parse_records(csv::format_table(t));
    ASSERT_EQ(back.size(), 5u);
    for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_EQ(back[i + 1], t.rows[i]);
    EXPECT_EQ(csv::quote("plain"), "plain");
}

TEST(Csv, MissingFile) { EXPECT_THROW(csv::read_table("/nonexistent/file.csv"), IoError); }
