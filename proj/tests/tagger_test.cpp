#include <gtest/gtest.h>

#include "causalcat/tagger.hpp"

using namespace causalcat;

namespace {

std::vector<PosTag> tags_of(std::string_view s) {
    std::vector<PosTag> out;
    for (const auto& t : pos_tag(s)) out.push_back(t.tag);
    return out;
}

}  // namespace

TEST(Tagger, ClosedClassLookup) {
    EXPECT_EQ(tags_of("I hate jobs"), (std::vector<PosTag>{PosTag::Pron, PosTag::Verb, PosTag::Noun}));
    EXPECT_TRUE(pos_tag("").empty());
    EXPECT_EQ(tags_of("the rain"), (std::vector<PosTag>{PosTag::Other, PosTag::Noun}));
    EXPECT_EQ(tags_of("very sad"), (std::vector<PosTag>{PosTag::Adv, PosTag::Adj}));
}

TEST(Tagger, SuffixRules) {
    EXPECT_EQ(tags_of("running"), (std::vector<PosTag>{PosTag::Verb}));
    EXPECT_EQ(tags_of("failed"), (std::vector<PosTag>{PosTag::Verb}));
    EXPECT_EQ(tags_of("worries"), (std::vector<PosTag>{PosTag::Verb}));
    EXPECT_EQ(tags_of("hoping"), (std::vector<PosTag>{PosTag::Verb}));
    EXPECT_EQ(tags_of("quickly"), (std::vector<PosTag>{PosTag::Adv}));
    EXPECT_EQ(tags_of("happiness"), (std::vector<PosTag>{PosTag::Noun}));
    EXPECT_EQ(tags_of("grades"), (std::vector<PosTag>{PosTag::Noun}));
    EXPECT_EQ(tags_of("zorblat"), (std::vector<PosTag>{PosTag::Other}));
}

TEST(Tagger, CaseApostrophesAndPunctuation) {
    EXPECT_EQ(tags_of("HATE"), (std::vector<PosTag>{PosTag::Verb}));
    EXPECT_EQ(tags_of("don\xE2\x80\x99t"), (std::vector<PosTag>{PosTag::Verb}));
    const auto tokens = pos_tag("I cried.");
    ASSERT_EQ(tokens.size(), 3u);
    EXPECT_EQ(tokens[2].surface, ".");
    EXPECT_EQ(tokens[2].tag, PosTag::Other);
    EXPECT_EQ(tag_name(PosTag::Verb), "VERB");
}

TEST(Tagger, BackendIsPluggable) {
    const TagFn all_nouns = [](std::span<const std::string> t) { return std::vector<PosTag>(t.size(), PosTag::Noun); };
    const auto tokens = pos_tag("I hate jobs", all_nouns);
    ASSERT_EQ(tokens.size(), 3u);
    for (const auto& t : tokens) EXPECT_EQ(t.tag, PosTag::Noun);

    const TagFn short_backend = [](std::span<const std::string>) { return std::vector<PosTag>{PosTag::Verb}; };
    const auto padded = pos_tag("a b", short_backend);
    EXPECT_EQ(padded[0].tag, PosTag::Verb);
    EXPECT_EQ(padded[1].tag, PosTag::Other);
}
