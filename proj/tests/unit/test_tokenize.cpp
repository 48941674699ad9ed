#include "doctest.h"

#include <random>

#include "comet/error.hpp"
#include "comet/tokenize.hpp"

using namespace comet;

namespace {

std::vector<std::string> texts(const TokenSeq& toks) {
    return token_texts(toks);
}

}  // namespace

TEST_CASE("tokenize_code basic streams") {
    CHECK(texts(tokenize_code("getX")) == std::vector<std::string>{"getX"});
    CHECK(texts(tokenize_code("")).empty());
    CHECK(texts(tokenize_code("int min_val = 0;")) ==
          std::vector<std::string>{"int", "min_val", "=", "0", ";"});
}

TEST_CASE("tokenize_code operators, literals and comments") {
    CHECK(texts(tokenize_code("a >= b && c++")) ==
          std::vector<std::string>{"a", ">=", "b", "&&", "c", "++"});
    CHECK(texts(tokenize_code("s = \"a b\"; // trailing\nx")) ==
          std::vector<std::string>{"s", "=", "\"a b\"", ";", "x"});
    CHECK(texts(tokenize_code("/* block */ y")) ==
          std::vector<std::string>{"y"});
    CHECK(texts(tokenize_code("x = 0x1F + 2.5f;")) ==
          std::vector<std::string>{"x", "=", "0x1F", "+", "2.5f", ";"});
}

TEST_CASE("tokenize_code spans address the source") {
    std::string src = "int  foo(bar)";
    for (const Token& t : tokenize_code(src)) {
        REQUIRE(t.span.has_value());
        CHECK(src.substr(t.span->begin, t.span->end - t.span->begin) == t.text);
    }
}

TEST_CASE("tokenize_code reports unterminated literals with offset") {
    CHECK_THROWS_AS(tokenize_code("x = \"abc"), LexError);
    try {
        tokenize_code("y = 'a");
        FAIL("expected LexError");
    } catch (const LexError& e) {
        CHECK(e.offset == 4);
    }
}

TEST_CASE("split_subtokens camel, snake and acronym runs") {
    auto split = [](const char* s) {
        return texts(split_subtokens({code_token(s)}).subtokens);
    };
    CHECK(split("getX") == std::vector<std::string>{"get", "X"});
    CHECK(split("min_val") == std::vector<std::string>{"min", "val"});
    CHECK(split("HTTPResponse2") ==
          std::vector<std::string>{"HTTP", "Response", "2"});
    CHECK(split("parseURL") == std::vector<std::string>{"parse", "URL"});
    CHECK(split("simple") == std::vector<std::string>{"simple"});
}

TEST_CASE("split_subtokens keeps parent indices and passes others through") {
    TokenSeq toks{code_token("fooBar"), code_token("+"), code_token("x2")};
    SubtokenSeq sub = split_subtokens(toks);
    CHECK(texts(sub.subtokens) ==
          std::vector<std::string>{"foo", "Bar", "+", "x", "2"});
    CHECK(sub.parent_index == std::vector<std::size_t>{0, 0, 1, 2, 2});
}

TEST_CASE("split_subtokens is idempotent") {
    std::mt19937_64 rng(7);
    const char* pool[] = {"fooBar", "a_b_c", "XMLHttpRequest", "x", "value2"};
    for (int trial = 0; trial < 50; ++trial) {
        TokenSeq toks;
        std::uniform_int_distribution<int> pick(0, 4);
        for (int k = 0; k < 6; ++k) toks.push_back(code_token(pool[pick(rng)]));
        SubtokenSeq once = split_subtokens(toks);
        SubtokenSeq twice = split_subtokens(once.subtokens);
        CHECK(texts(once.subtokens) == texts(twice.subtokens));
        for (std::size_t i = 0; i < twice.parent_index.size(); ++i)
            CHECK(twice.parent_index[i] == i);
    }
}

TEST_CASE("subtoken reassembly reproduces the compound exactly") {
    // Build identifiers with known casing/underscore structure, then check
    // that re-joining the parts at the recorded boundaries restores them.
    std::mt19937_64 rng(11);
    const char* parts[] = {"get", "set", "http", "url", "value", "x", "parse"};
    std::uniform_int_distribution<int> pick(0, 6);
    std::uniform_int_distribution<int> npieces(1, 4);
    std::uniform_int_distribution<int> style(0, 1);  // 0 camel, 1 snake
    for (int trial = 0; trial < 200; ++trial) {
        int n = npieces(rng);
        bool snake = style(rng) == 1;
        std::string ident;
        for (int k = 0; k < n; ++k) {
            std::string p = parts[pick(rng)];
            if (!snake && k > 0) p[0] = static_cast<char>(std::toupper(p[0]));
            if (snake && k > 0) ident += "_";
            ident += p;
        }
        auto sub = split_identifier(ident);
        std::string joined;
        for (std::size_t k = 0; k < sub.size(); ++k) {
            if (snake && k > 0) joined += "_";
            joined += sub[k];
        }
        CHECK(joined == ident);
        // and with the separator dropped, concatenation matches too
        std::string bare;
        for (const auto& p : sub) bare += p;
        std::string expect = ident;
        expect.erase(std::remove(expect.begin(), expect.end(), '_'),
                     expect.end());
        CHECK(bare == expect);
    }
}

TEST_CASE("clean_comment strips delimiters and html") {
    CHECK(texts(clean_comment("<p>Hello</p>")) ==
          std::vector<std::string>{"Hello"});
    CHECK(texts(clean_comment("//")).empty());
    CHECK(texts(clean_comment("/** Returns the processed message */")) ==
          std::vector<std::string>{"Returns", "the", "processed", "message"});
    CHECK(texts(clean_comment("/**\n * line one\n * lineTwo\n */")) ==
          std::vector<std::string>{"line", "one", "line", "Two"});
}

TEST_CASE("clean_comment keeps comparison operators and urls") {
    CHECK(texts(clean_comment("// checks a < b and a > b")) ==
          std::vector<std::string>{"checks", "a", "<", "b", "and", "a", ">",
                                   "b"});
    auto url = texts(clean_comment("// see http://example.com/x"));
    CHECK(url == std::vector<std::string>{"see", "http://example.com/x"});
}

TEST_CASE("clean_comment preserves case") {
    CHECK(texts(clean_comment("// Returns THE Value")) ==
          std::vector<std::string>{"Returns", "THE", "Value"});
}

TEST_CASE("clean_comment never emits delimiter or tag tokens") {
    std::mt19937_64 rng(13);
    const char* pieces[] = {"/**", "*/", "//", "*", "<p>", "</p>", "word",
                            "other", "<code>", "a*b", "x", "**"};
    std::uniform_int_distribution<int> pick(0, 11);
    for (int trial = 0; trial < 200; ++trial) {
        std::string raw;
        for (int k = 0; k < 8; ++k) {
            raw += pieces[pick(rng)];
            raw += (k % 3 == 2) ? "\n" : " ";
        }
        for (const Token& t : clean_comment(raw)) {
            CHECK(t.text != "//");
            CHECK(t.text != "/*");
            CHECK(t.text != "/**");
            CHECK(t.text != "*/");
            CHECK(t.text != "*");
            CHECK(t.text.find("<p>") == std::string::npos);
            CHECK(t.text.find("</p>") == std::string::npos);
        }
    }
}
