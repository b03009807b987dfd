#include <gtest/gtest.h>

#include <cctype>
#include <random>

#include "mindstone/corpus.hpp"
#include "mindstone/errors.hpp"
#include "test_support.hpp"

using namespace mindstone;

TEST(SplitArticle, TitleIsPrependedToEachParagraph) {
    const auto ps = split_article({"ox", "Oxygen", "p1\n\np2"});
    ASSERT_EQ(ps.size(), 2u);
    EXPECT_EQ(ps[0].full_text, "Oxygen\np1");
    EXPECT_EQ(ps[1].full_text, "Oxygen\np2");
    EXPECT_EQ(ps[0].position, 0u);
    EXPECT_EQ(ps[1].position, 1u);
    EXPECT_EQ(ps[0].para_id, "ox#0");
    EXPECT_EQ(ps[1].para_id, "ox#1");
}

TEST(SplitArticle, EmptyBodyYieldsNothing) {
    EXPECT_TRUE(split_article({"x", "X", ""}).empty());
    EXPECT_TRUE(split_article({"x", "X", " \n\n \n"}).empty());
}

TEST(SplitArticle, EmptyTitleAddsNoLine) {
    const auto ps = split_article({"s", "", "solo"});
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_EQ(ps[0].full_text, "solo");
    EXPECT_EQ(ps[0].body_offset(), 0u);
}

TEST(SplitArticle, SeveralBlankLinesAreOneBoundary) {
    const auto ps = split_article({"a", "T", "one\nstill one\n\n\n  \n\ntwo\n"});
    ASSERT_EQ(ps.size(), 2u);
    EXPECT_EQ(ps[0].body, "one\nstill one");
    EXPECT_EQ(ps[1].body, "two");
    EXPECT_EQ(ps[1].body_offset(), 2u);
}

TEST(SplitArticle, BodiesRejoinToTrimmedBody) {
    std::mt19937 rng(3);
    const std::vector<std::string> pieces{"alpha beta", "gamma", "delta\nepsilon", "zeta eta theta"};
    for (int trial = 0; trial < 200; ++trial) {
        std::string body = "\n";
        std::string expected;
        const auto count = 1 + rng() % 4;
        for (std::size_t i = 0; i < count; ++i) {
            const auto& p = pieces[rng() % pieces.size()];
            body += p + std::string(2 + rng() % 3, '\n');
            expected += (i ? "\n\n" : "") + p;
        }
        const auto ps = split_article({"a", "T", body});
        std::string joined;
        for (std::size_t i = 0; i < ps.size(); ++i) joined += (i ? "\n\n" : "") + ps[i].body;
        EXPECT_EQ(joined, expected);
        EXPECT_EQ(split_article({"a", "T", body}).size(), ps.size());
    }
}

TEST(Tokenize, LowercasesSplitsAndDropsStopwords) {
    EXPECT_EQ(tokenize("The Quick, brown-fox!", Stopwords({"the"})),
              (TermSequence{"quick", "brown", "fox"}));
    EXPECT_TRUE(tokenize("", Stopwords::english()).empty());
    EXPECT_TRUE(tokenize("the The THE", Stopwords({"the"})).empty());
}

TEST(Tokenize, PropertiesOnRandomStrings) {
    std::mt19937 rng(11);
    const std::string alphabet = "abcXYZ019 ,.-!?\n\tThe";
    const auto stop = Stopwords::english();
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const auto len = rng() % 40;
        for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
        const auto terms = tokenize(s, stop);
        std::string joined;
        for (const auto& t : terms) {
            EXPECT_FALSE(t.empty());
            EXPECT_FALSE(stop.contains(t));
            for (char c : t) EXPECT_FALSE(std::isupper(static_cast<unsigned char>(c)));
            joined += t + " ";
        }
        EXPECT_EQ(tokenize(joined, stop), terms);
        EXPECT_EQ(terms, test::ascii_terms(s, stop));
    }
}

TEST(CorpusFiles, ArticlesAndParagraphsRoundTrip) {
    test::TempDir dir;
    const std::vector<Article> articles{{"a1", "Title One", "x y\n\nz"}, {"a2", "", "solo"}};
    write_articles(dir / "a.jsonl", articles);
    const auto back = read_articles(dir / "a.jsonl");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].title, "Title One");
    EXPECT_EQ(back[1].body, "solo");

    std::vector<Paragraph> paras;
    for (const auto& a : back) {
        for (auto& p : split_article(a)) paras.push_back(p);
    }
    write_paragraphs(dir / "p.jsonl", paras);
    const auto pback = read_paragraphs(dir / "p.jsonl");
    ASSERT_EQ(pback.size(), paras.size());
    for (std::size_t i = 0; i < paras.size(); ++i) {
        EXPECT_EQ(pback[i].para_id, paras[i].para_id);
        EXPECT_EQ(pback[i].full_text, paras[i].full_text);
        EXPECT_EQ(pback[i].position, paras[i].position);
    }
}

TEST(CorpusFiles, MalformedLineNamesTheLine) {
    test::TempDir dir;
    test::spit(dir / "a.jsonl", "{\"article_id\":\"a\",\"title\":\"\",\"body\":\"x\"}\n{oops\n");
    try {
        read_articles(dir / "a.jsonl");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
    }
}
