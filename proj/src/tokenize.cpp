#include "comet/tokenize.hpp"

#include <cctype>

#include "comet/error.hpp"

namespace comet {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_part(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// Multi-character operators, longest first within each leading character.
const char* const kOperators[] = {
    ">>>=", "<<=", ">>=", ">>>", "...", "==", "!=", "<=", ">=", "&&", "||",
    "++",   "--",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "->",
    "::",   "<<",  ">>",
};

}  // namespace

TokenSeq tokenize_code(std::string_view src) {
    TokenSeq out;
    std::size_t i = 0;
    const std::size_t n = src.size();

    auto push = [&](std::size_t begin, std::size_t end) {
        out.push_back(Token{std::string(src.substr(begin, end - begin)),
                            TokenKind::CodeToken, Span{begin, end}});
    };

    while (i < n) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            std::size_t start = i;
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) ++i;
            if (i + 1 >= n) throw LexError("unterminated block comment", start);
            i += 2;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t start = i;
            while (i < n && is_ident_part(src[i])) ++i;
            push(start, i);
            continue;
        }
        if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(src[i + 1]))) {
            std::size_t start = i;
            if (c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X')) {
                i += 2;
                while (i < n && (std::isxdigit(static_cast<unsigned char>(src[i])) ||
                                 src[i] == '_'))
                    ++i;
            } else {
                while (i < n && (is_digit(src[i]) || src[i] == '_')) ++i;
                if (i < n && src[i] == '.') {
                    ++i;
                    while (i < n && is_digit(src[i])) ++i;
                }
                if (i < n && (src[i] == 'e' || src[i] == 'E')) {
                    std::size_t mark = i;
                    ++i;
                    if (i < n && (src[i] == '+' || src[i] == '-')) ++i;
                    if (i < n && is_digit(src[i])) {
                        while (i < n && is_digit(src[i])) ++i;
                    } else {
                        i = mark;  // 'e' belongs to a following identifier
                    }
                }
            }
            // Type suffix (3L, 2.5f, ...).
            if (i < n && (src[i] == 'l' || src[i] == 'L' || src[i] == 'f' ||
                          src[i] == 'F' || src[i] == 'd' || src[i] == 'D'))
                ++i;
            push(start, i);
            continue;
        }
        if (c == '"' || c == '\'') {
            std::size_t start = i;
            char quote = c;
            ++i;
            bool closed = false;
            while (i < n) {
                if (src[i] == '\\' && i + 1 < n) {
                    i += 2;
                    continue;
                }
                if (src[i] == quote) {
                    ++i;
                    closed = true;
                    break;
                }
                if (src[i] == '\n') break;
                ++i;
            }
            if (!closed)
                throw LexError(quote == '"' ? "unterminated string literal"
                                            : "unterminated char literal",
                               start);
            push(start, i);
            continue;
        }
        bool matched = false;
        for (const char* op : kOperators) {
            std::size_t len = std::char_traits<char>::length(op);
            if (src.substr(i, len) == op) {
                push(i, i + len);
                i += len;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        push(i, i + 1);
        ++i;
    }
    return out;
}

std::vector<std::string> split_identifier(std::string_view text) {
    std::vector<std::string> parts;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            parts.push_back(cur);
            cur.clear();
        }
    };

    enum class Cls { None, Upper, Lower, Digit, Other };
    Cls prev = Cls::None;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '_') {
            flush();
            prev = Cls::None;
            continue;
        }
        Cls cls;
        if (std::isupper(static_cast<unsigned char>(c)))
            cls = Cls::Upper;
        else if (std::islower(static_cast<unsigned char>(c)))
            cls = Cls::Lower;
        else if (std::isdigit(static_cast<unsigned char>(c)))
            cls = Cls::Digit;
        else
            cls = Cls::Other;

        bool boundary = false;
        if (prev != Cls::None && cls != prev) {
            // Lower->Upper and transitions into/out of digits split; an
            // uppercase run splits before its last letter when lowercase
            // follows (HTTPResponse -> HTTP, Response).
            if (cls == Cls::Upper || cls == Cls::Digit || prev == Cls::Digit)
                boundary = true;
            else if (prev == Cls::Upper && cls == Cls::Lower && cur.size() > 1) {
                char last = cur.back();
                cur.pop_back();
                flush();
                cur.push_back(last);
            }
        }
        if (boundary) flush();
        cur.push_back(c);
        prev = cls;
    }
    flush();
    if (parts.empty()) parts.push_back(std::string(text));
    return parts;
}

namespace {

bool is_compound_candidate(const Token& tok) {
    if (tok.kind == TokenKind::EditKeyword || tok.kind == TokenKind::Sentinel)
        return false;
    if (tok.text.empty()) return false;
    char c = tok.text[0];
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace

SubtokenSeq split_subtokens(const TokenSeq& tokens) {
    SubtokenSeq out;
    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
        const Token& tok = tokens[ti];
        if (!is_compound_candidate(tok)) {
            out.subtokens.push_back(tok);
            out.parent_index.push_back(ti);
            continue;
        }
        for (auto& part : split_identifier(tok.text)) {
            out.subtokens.push_back(Token{std::move(part), tok.kind, tok.span});
            out.parent_index.push_back(ti);
        }
    }
    return out;
}

namespace {

// Balanced angle-bracket tag with an alphabetic first character (optionally
// after '/'), e.g. <p>, </a>, <code class="x">. Malformed tags stay as text.
bool is_html_tag(std::string_view s, std::size_t i, std::size_t* end) {
    if (s[i] != '<') return false;
    std::size_t j = i + 1;
    if (j < s.size() && s[j] == '/') ++j;
    if (j >= s.size() || !std::isalpha(static_cast<unsigned char>(s[j])))
        return false;
    while (j < s.size() && s[j] != '<') {
        if (s[j] == '>') {
            *end = j + 1;
            return true;
        }
        ++j;
    }
    return false;
}

}  // namespace

namespace {

bool is_delimiter_word(std::string_view w) {
    if (w == "//" || w == "/*" || w == "/**" || w == "*/") return true;
    for (char c : w)
        if (c != '*') return false;
    return true;  // bare stars / star runs
}

}  // namespace

TokenSeq clean_comment(std::string_view raw) {
    std::string text;
    text.reserve(raw.size());

    auto at_line_start = [&](std::size_t i) {
        while (i-- > 0) {
            if (raw[i] == '\n') return true;
            if (!std::isspace(static_cast<unsigned char>(raw[i])) &&
                raw[i] != '*' && raw[i] != '/')
                return false;
        }
        return true;
    };

    // Drop comment delimiters and HTML tags in one pass. Slash delimiters
    // are positional so that e.g. "http://x" mid-line survives.
    std::size_t i = 0;
    while (i < raw.size()) {
        char c = raw[i];
        if (c == '/' && raw.substr(i, 2) == "/*" && at_line_start(i)) {
            i += (raw.substr(i, 3) == "/**") ? 3 : 2;
            continue;
        }
        if (c == '/' && raw.substr(i, 2) == "//" && at_line_start(i)) {
            i += 2;
            continue;
        }
        if (c == '*' && raw.substr(i, 2) == "*/") {
            i += 2;
            continue;
        }
        if (c == '*' && at_line_start(i)) {
            ++i;
            continue;
        }
        std::size_t tag_end = 0;
        if (c == '<' && is_html_tag(raw, i, &tag_end)) {
            text.push_back(' ');
            i = tag_end;
            continue;
        }
        text.push_back(c);
        ++i;
    }

    TokenSeq words;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() &&
               std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        std::size_t start = pos;
        while (pos < text.size() &&
               !std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos > start) {
            std::string w = text.substr(start, pos - start);
            if (!is_delimiter_word(w))
                words.push_back(
                    Token{std::move(w), TokenKind::CommentWord, std::nullopt});
        }
    }
    return split_subtokens(words).subtokens;
}

}  // namespace comet
