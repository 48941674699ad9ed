#include "comet/edit_script.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "comet/error.hpp"

namespace comet {

namespace {

bool text_eq(const TokenSeq& hay, std::size_t at, const TokenSeq& needle) {
    for (std::size_t k = 0; k < needle.size(); ++k)
        if (hay[at + k].text != needle[k].text) return false;
    return true;
}

// First occurrence of `needle` in `hay` starting at or after `from`;
// npos when absent. Comparison is by token text.
std::size_t find_first(const TokenSeq& hay, const TokenSeq& needle,
                       std::size_t from) {
    if (needle.empty()) return from;
    if (needle.size() > hay.size()) return std::string::npos;
    for (std::size_t s = from; s + needle.size() <= hay.size(); ++s)
        if (text_eq(hay, s, needle)) return s;
    return std::string::npos;
}

std::size_t count_occurrences(const TokenSeq& hay, const TokenSeq& needle) {
    std::size_t count = 0;
    if (needle.empty() || needle.size() > hay.size()) return 0;
    for (std::size_t s = 0; s + needle.size() <= hay.size(); ++s)
        if (text_eq(hay, s, needle)) ++count;
    return count;
}

TokenSeq slice(const TokenSeq& seq, std::size_t begin, std::size_t end) {
    return TokenSeq(seq.begin() + begin, seq.begin() + end);
}

TokenSeq concat(TokenSeq a, const TokenSeq& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

bool is_reserved_word(const std::string& text) {
    static const std::set<std::string> reserved = {
        kw::kKeepOpen,   kw::kKeepClose,  kw::kInsertOpen, kw::kInsertClose,
        kw::kDelOpen,    kw::kDelClose,   kw::kUpdateFrom, kw::kUpdateTo,
        kw::kUpdateClose, kw::kInsertTag, kw::kEscape,     kw::kBeginOfComment,
    };
    return reserved.count(text) > 0;
}

Token keyword_token(const char* text) {
    return Token{text, TokenKind::EditKeyword, std::nullopt};
}

Token begin_of_comment_token() {
    return Token{kw::kBeginOfComment, TokenKind::Sentinel, std::nullopt};
}

// ---------------------------------------------------------------------------
// Diff

namespace {

struct Opcode {
    ActionKind kind;
    std::size_t i1, i2;  // range in old
    std::size_t j1, j2;  // range in new
};

// LCS backtrace grouped into maximal runs. Adjacent delete+insert runs
// collapse into one Update.
std::vector<Opcode> lcs_opcodes(const TokenSeq& a, const TokenSeq& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j) {
            if (a[i - 1].text == b[j - 1].text)
                dp[i][j] = dp[i - 1][j - 1] + 1;
            else
                dp[i][j] = std::max(dp[i - 1][j], dp[i][j - 1]);
        }

    // Walk back preferring skips whenever they preserve optimality, so
    // equal runs align as early as possible (sequence-matcher style).
    enum class Step { Match, DelOld, InsNew };
    std::vector<Step> steps;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (j > 0 && dp[i][j - 1] == dp[i][j]) {
            steps.push_back(Step::InsNew);
            --j;
        } else if (i > 0 && dp[i - 1][j] == dp[i][j]) {
            steps.push_back(Step::DelOld);
            --i;
        } else {
            steps.push_back(Step::Match);
            --i, --j;
        }
    }
    std::reverse(steps.begin(), steps.end());

    std::vector<Opcode> ops;
    std::size_t oi = 0, oj = 0;
    std::size_t k = 0;
    while (k < steps.size()) {
        if (steps[k] == Step::Match) {
            std::size_t len = 0;
            while (k < steps.size() && steps[k] == Step::Match) ++k, ++len;
            ops.push_back({ActionKind::Keep, oi, oi + len, oj, oj + len});
            oi += len, oj += len;
        } else {
            std::size_t dels = 0, inss = 0;
            while (k < steps.size() && steps[k] != Step::Match) {
                if (steps[k] == Step::DelOld)
                    ++dels;
                else
                    ++inss;
                ++k;
            }
            if (dels > 0 && inss > 0)
                ops.push_back({ActionKind::Update, oi, oi + dels, oj, oj + inss});
            else if (dels > 0)
                ops.push_back({ActionKind::Del, oi, oi + dels, oj, oj});
            else
                ops.push_back({ActionKind::Insert, oi, oi, oj, oj + inss});
            oi += dels, oj += inss;
        }
    }
    return ops;
}

}  // namespace

EditScript diff_tokens(const TokenSeq& old_tokens, const TokenSeq& new_tokens) {
    EditScript script;
    script.side = ScriptSide::CodeSide;
    for (const Opcode& op : lcs_opcodes(old_tokens, new_tokens)) {
        EditAction act;
        act.kind = op.kind;
        act.old_span = slice(old_tokens, op.i1, op.i2);
        act.new_span = slice(new_tokens, op.j1, op.j2);
        if (op.kind == ActionKind::Keep || op.kind == ActionKind::Del)
            act.new_span.clear();
        script.actions.push_back(std::move(act));
    }
    return script;
}

TokenSeq find_insert_tag(const TokenSeq& old_comment,
                         std::size_t insert_position) {
    assert(insert_position <= old_comment.size());
    if (insert_position == 0) return {begin_of_comment_token()};
    for (std::size_t len = 1; len <= insert_position; ++len) {
        TokenSeq tag = slice(old_comment, insert_position - len, insert_position);
        if (count_occurrences(old_comment, tag) == 1) return tag;
    }
    return slice(old_comment, 0, insert_position);
}

EditScript build_comment_edit_seq(const TokenSeq& old_comment,
                                  const TokenSeq& new_comment) {
    EditScript script;
    script.side = ScriptSide::CommentSide;
    std::size_t vp = 0;  // apply-time pointer, simulated

    // Emits an update whose from-span is extended left with kept context
    // until apply's first-occurrence binding lands on the true position.
    auto emit_anchored_update = [&](std::size_t i1, std::size_t i2,
                                    const TokenSeq& replacement) {
        for (std::size_t k = 1; k <= i1 - vp; ++k) {
            TokenSeq from = slice(old_comment, i1 - k, i2);
            if (find_first(old_comment, from, vp) == i1 - k) {
                EditAction act;
                act.kind = ActionKind::Update;
                act.old_span = std::move(from);
                act.new_span =
                    concat(slice(old_comment, i1 - k, i1), replacement);
                script.actions.push_back(std::move(act));
                return;
            }
        }
        assert(false && "context extension always terminates at vp");
    };

    for (const Opcode& op : lcs_opcodes(old_comment, new_comment)) {
        switch (op.kind) {
            case ActionKind::Keep:
                break;
            case ActionKind::Del: {
                TokenSeq span = slice(old_comment, op.i1, op.i2);
                if (find_first(old_comment, span, vp) == op.i1) {
                    EditAction act;
                    act.kind = ActionKind::Del;
                    act.old_span = std::move(span);
                    script.actions.push_back(std::move(act));
                } else {
                    emit_anchored_update(op.i1, op.i2, {});
                }
                vp = op.i2;
                break;
            }
            case ActionKind::Update: {
                TokenSeq from = slice(old_comment, op.i1, op.i2);
                TokenSeq to = slice(new_comment, op.j1, op.j2);
                if (find_first(old_comment, from, vp) == op.i1) {
                    EditAction act;
                    act.kind = ActionKind::Update;
                    act.old_span = std::move(from);
                    act.new_span = std::move(to);
                    script.actions.push_back(std::move(act));
                } else {
                    emit_anchored_update(op.i1, op.i2, to);
                }
                vp = op.i2;
                break;
            }
            case ActionKind::Insert: {
                const std::size_t p = op.i1;
                TokenSeq ins = slice(new_comment, op.j1, op.j2);
                TokenSeq tag = find_insert_tag(old_comment, p);
                bool is_boc = p == 0;
                std::size_t tag_start = is_boc ? 0 : p - tag.size();
                if (is_boc ? vp == 0
                           : find_first(old_comment, tag, vp) == tag_start) {
                    EditAction act;
                    act.kind = ActionKind::Insert;
                    act.insert_tag = tag;
                    act.new_span = concat(std::move(tag), ins);
                    script.actions.push_back(std::move(act));
                } else {
                    emit_anchored_update(p, p, ins);
                }
                vp = p;
                break;
            }
        }
    }
    return script;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void emit_span(TokenSeq& out, const TokenSeq& span) {
    for (const Token& t : span) {
        if (t.kind == TokenKind::Sentinel) {
            out.push_back(t);
            continue;
        }
        if (is_reserved_word(t.text)) out.push_back(keyword_token(kw::kEscape));
        out.push_back(t);
    }
}

}  // namespace

SerializedScript serialize(const EditScript& script) {
    SerializedScript out;
    for (const EditAction& act : script.actions) {
        switch (act.kind) {
            case ActionKind::Keep:
                out.tokens.push_back(keyword_token(kw::kKeepOpen));
                emit_span(out.tokens, act.old_span);
                out.tokens.push_back(keyword_token(kw::kKeepClose));
                break;
            case ActionKind::Del:
                out.tokens.push_back(keyword_token(kw::kDelOpen));
                emit_span(out.tokens, act.old_span);
                out.tokens.push_back(keyword_token(kw::kDelClose));
                break;
            case ActionKind::Update:
                out.tokens.push_back(keyword_token(kw::kUpdateFrom));
                emit_span(out.tokens, act.old_span);
                out.tokens.push_back(keyword_token(kw::kUpdateTo));
                emit_span(out.tokens, act.new_span);
                out.tokens.push_back(keyword_token(kw::kUpdateClose));
                break;
            case ActionKind::Insert:
                if (!act.insert_tag.empty()) {
                    out.tokens.push_back(keyword_token(kw::kInsertTag));
                    emit_span(out.tokens, act.insert_tag);
                }
                out.tokens.push_back(keyword_token(kw::kInsertOpen));
                emit_span(out.tokens, act.new_span);
                out.tokens.push_back(keyword_token(kw::kInsertClose));
                break;
        }
    }
    return out;
}

EditScript deserialize(const TokenSeq& tokens, ScriptSide side) {
    EditScript script;
    script.side = side;
    const TokenKind data_kind = side == ScriptSide::CodeSide
                                    ? TokenKind::CodeToken
                                    : TokenKind::CommentWord;
    std::size_t i = 0;

    auto fail = [&](const std::string& msg, std::size_t pos) -> void {
        throw ScriptFormatError(msg, pos);
    };
    auto at_keyword = [&](const char* kw_text) {
        return i < tokens.size() && tokens[i].text == kw_text;
    };
    auto is_any_keyword = [&]() {
        return i < tokens.size() && is_reserved_word(tokens[i].text);
    };
    // Reads data tokens until the next (unescaped) keyword.
    auto read_span = [&](const char* what) {
        TokenSeq span;
        while (i < tokens.size()) {
            if (tokens[i].text == kw::kEscape) {
                if (i + 1 >= tokens.size())
                    fail("escape token at end of stream", i);
                span.push_back(Token{tokens[i + 1].text, data_kind, std::nullopt});
                i += 2;
                continue;
            }
            if (tokens[i].text == kw::kBeginOfComment) {
                span.push_back(begin_of_comment_token());
                ++i;
                continue;
            }
            if (is_any_keyword()) break;
            span.push_back(Token{tokens[i].text, data_kind, tokens[i].span});
            ++i;
        }
        if (span.empty())
            fail(std::string("empty ") + what, i < tokens.size() ? i : tokens.size());
        return span;
    };
    auto expect = [&](const char* kw_text) {
        if (!at_keyword(kw_text))
            fail(std::string("expected ") + kw_text,
                 i < tokens.size() ? i : tokens.size());
        ++i;
    };

    while (i < tokens.size()) {
        std::size_t start = i;
        EditAction act;
        if (at_keyword(kw::kKeepOpen)) {
            if (side == ScriptSide::CommentSide)
                fail("KEEP action in a comment-side script", start);
            ++i;
            act.kind = ActionKind::Keep;
            act.old_span = read_span("KEEP span");
            expect(kw::kKeepClose);
        } else if (at_keyword(kw::kDelOpen)) {
            ++i;
            act.kind = ActionKind::Del;
            act.old_span = read_span("DEL span");
            expect(kw::kDelClose);
        } else if (at_keyword(kw::kUpdateFrom)) {
            ++i;
            act.kind = ActionKind::Update;
            act.old_span = read_span("UPDATE from-span");
            expect(kw::kUpdateTo);
            act.new_span = read_span("UPDATE to-span");
            expect(kw::kUpdateClose);
        } else if (at_keyword(kw::kInsertTag)) {
            if (side == ScriptSide::CodeSide)
                fail("INSERTTAG in a code-side script", start);
            ++i;
            act.kind = ActionKind::Insert;
            act.insert_tag = read_span("insert tag");
            expect(kw::kInsertOpen);
            act.new_span = read_span("INSERT span");
            expect(kw::kInsertClose);
        } else if (at_keyword(kw::kInsertOpen)) {
            if (side == ScriptSide::CommentSide)
                fail("INSERT without INSERTTAG in a comment-side script", start);
            ++i;
            act.kind = ActionKind::Insert;
            act.new_span = read_span("INSERT span");
            expect(kw::kInsertClose);
        } else {
            fail("expected an action-start keyword", i);
        }
        script.actions.push_back(std::move(act));
    }
    return script;
}

// ---------------------------------------------------------------------------
// Application

namespace {

void emit_words(TokenSeq& out, const TokenSeq& span) {
    for (const Token& t : span)
        if (t.kind != TokenKind::Sentinel) out.push_back(t);
}

}  // namespace

TokenSeq apply_edits(const TokenSeq& old_comment, const EditScript& script) {
    if (script.side != ScriptSide::CommentSide)
        throw std::invalid_argument("apply_edits expects a comment-side script");

    TokenSeq out;
    std::size_t vp = 0;
    for (std::size_t idx = 0; idx < script.actions.size(); ++idx) {
        const EditAction& act = script.actions[idx];
        switch (act.kind) {
            case ActionKind::Keep:
                throw ApplyError("KEEP action in comment-side script", idx);
            case ActionKind::Del: {
                std::size_t s = find_first(old_comment, act.old_span, vp);
                if (s == std::string::npos)
                    throw ApplyError("DEL span not found in old comment", idx);
                out.insert(out.end(), old_comment.begin() + vp,
                           old_comment.begin() + s);
                vp = s + act.old_span.size();
                break;
            }
            case ActionKind::Update: {
                std::size_t s = find_first(old_comment, act.old_span, vp);
                if (s == std::string::npos)
                    throw ApplyError("UPDATE span not found in old comment", idx);
                out.insert(out.end(), old_comment.begin() + vp,
                           old_comment.begin() + s);
                emit_words(out, act.new_span);
                vp = s + act.old_span.size();
                break;
            }
            case ActionKind::Insert: {
                bool is_boc = act.insert_tag.size() == 1 &&
                              act.insert_tag[0].kind == TokenKind::Sentinel;
                if (act.insert_tag.empty())
                    throw ApplyError("INSERT without a tag", idx);
                if (is_boc) {
                    if (vp != 0)
                        throw ApplyError(
                            "begin-of-comment tag after consumed prefix", idx);
                    emit_words(out, act.new_span);
                    break;
                }
                std::size_t s = find_first(old_comment, act.insert_tag, vp);
                if (s == std::string::npos)
                    throw ApplyError("INSERT tag not found in old comment", idx);
                out.insert(out.end(), old_comment.begin() + vp,
                           old_comment.begin() + s);
                emit_words(out, act.new_span);
                vp = s + act.insert_tag.size();
                break;
            }
        }
    }
    out.insert(out.end(), old_comment.begin() + vp, old_comment.end());
    return out;
}

}  // namespace comet
