#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace comet {

enum class TokenKind {
    CodeToken,
    CommentWord,
    EditKeyword,
    Sentinel,
};

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Span&) const = default;
};

// A lexed or synthesized token. `span`, when present, addresses the
// substring of the origin text the token was read from.
struct Token {
    std::string text;
    TokenKind kind = TokenKind::CodeToken;
    std::optional<Span> span;

    bool operator==(const Token& other) const {
        return text == other.text && kind == other.kind;
    }
};

using TokenSeq = std::vector<Token>;

inline Token code_token(std::string text) {
    return Token{std::move(text), TokenKind::CodeToken, std::nullopt};
}

inline Token comment_word(std::string text) {
    return Token{std::move(text), TokenKind::CommentWord, std::nullopt};
}

inline TokenSeq to_tokens(const std::vector<std::string>& texts, TokenKind kind) {
    TokenSeq out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(Token{t, kind, std::nullopt});
    return out;
}

inline std::vector<std::string> token_texts(const TokenSeq& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
}

// Subtoken sequence with back-pointers to the compound tokens it came from.
struct SubtokenSeq {
    TokenSeq subtokens;
    std::vector<std::size_t> parent_index;
};

}  // namespace comet
