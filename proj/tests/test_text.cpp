#include <gtest/gtest.h>

#include "mindstone/text.hpp"
#include "test_support.hpp"

using namespace mindstone;

TEST(Stopwords, EnglishListHasClassicLuceneTerms) {
    const auto sw = Stopwords::english();
    EXPECT_EQ(sw.size(), 33u);
    for (auto t : {"a", "an", "and", "the", "of", "to", "was", "will", "with"}) {
        EXPECT_TRUE(sw.contains(t)) << t;
    }
    EXPECT_FALSE(sw.contains("cat"));
}

TEST(Stopwords, LoadSkipsCommentsAndBlanks) {
    test::TempDir dir;
    test::spit(dir / "sw.txt", "# header\nfoo\n\n  bar  \n#baz\n");
    const auto sw = Stopwords::load(dir / "sw.txt");
    EXPECT_EQ(sw.terms(), (std::vector<std::string>{"bar", "foo"}));
}

TEST(Stopwords, SaveLoadRoundTripKeepsHash) {
    test::TempDir dir;
    const auto sw = Stopwords::english();
    sw.save(dir / "sw.txt");
    const auto back = Stopwords::load(dir / "sw.txt");
    EXPECT_EQ(back.terms(), sw.terms());
    EXPECT_EQ(back.hash(), sw.hash());
    EXPECT_NE(Stopwords::none().hash(), sw.hash());
}

TEST(TokenizeSpans, OffsetsPointAtSourceBytes) {
    const std::string text = "Hello, World-42!";
    const auto toks = tokenize_spans(text, Stopwords::none());
    ASSERT_EQ(toks.size(), 3u);
    for (const auto& t : toks) {
        EXPECT_EQ(to_lower_ascii(text.substr(t.begin, t.end - t.begin)), t.term);
    }
    EXPECT_EQ(toks[2].term, "42");
}

TEST(TokenizeSpans, NonAsciiLettersStayInsideTokens) {
    const std::string text = "Zürich café";
    const auto toks = tokenize_spans(text, Stopwords::none());
    ASSERT_EQ(toks.size(), 2u);
    EXPECT_EQ(toks[0].term, "zürich");
    EXPECT_EQ(toks[1].term, "café");
}

TEST(Truncate, KeepsPrefixThroughLastToken) {
    EXPECT_EQ(truncate_tokens("one two, three four", 2), "one two");
    EXPECT_EQ(truncate_tokens("one two", 5), "one two");
    EXPECT_EQ(truncate_tokens("one two", 0), "");
    EXPECT_EQ(count_tokens("the cat, the hat"), 4u);
}

TEST(Offsets, ByteAndCodepointConversionsRoundTrip) {
    const std::string text = "a\xC3\xA9" "b\xE2\x82\xAC" "c";  // a é b € c
    EXPECT_EQ(byte_to_codepoint_offset(text, 0), 0u);
    EXPECT_EQ(byte_to_codepoint_offset(text, 3), 2u);
    EXPECT_EQ(byte_to_codepoint_offset(text, 7), 4u);
    EXPECT_EQ(byte_to_codepoint_offset(text, 8), 5u);
    for (std::size_t cp = 0; cp <= 5; ++cp) {
        EXPECT_EQ(byte_to_codepoint_offset(text, codepoint_to_byte_offset(text, cp)), cp);
    }
    EXPECT_EQ(codepoint_to_byte_offset(text, 99), text.size());
}

TEST(Hash, FnvKnownVector) {
    // Standard FNV-1a 64 test vector.
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}

TEST(Trim, StripsSurroundingWhitespace) {
    EXPECT_EQ(trim("  x y \n"), "x y");
    EXPECT_EQ(trim("   "), "");
}
