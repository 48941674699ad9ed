#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "comet/token.hpp"

namespace comet {

enum class ActionKind { Keep, Insert, Del, Update };

enum class ScriptSide { CodeSide, CommentSide };

// One edit action over a token sequence. Keep/Del use old_span; Insert uses
// new_span (and, on the comment side, a locating insert_tag); Update uses
// both spans.
struct EditAction {
    ActionKind kind = ActionKind::Keep;
    TokenSeq old_span;
    TokenSeq new_span;
    TokenSeq insert_tag;
};

struct EditScript {
    std::vector<EditAction> actions;
    ScriptSide side = ScriptSide::CodeSide;
};

// Flat keyword-delimited token stream; parses back to a unique EditScript.
struct SerializedScript {
    TokenSeq tokens;
};

// Serialized-form keywords and sentinels.
namespace kw {
inline constexpr const char* kKeepOpen = "<KEEP>";
inline constexpr const char* kKeepClose = "</KEEP>";
inline constexpr const char* kInsertOpen = "<INSERT>";
inline constexpr const char* kInsertClose = "</INSERT>";
inline constexpr const char* kDelOpen = "<DEL>";
inline constexpr const char* kDelClose = "</DEL>";
inline constexpr const char* kUpdateFrom = "<UPDATEFROM>";
inline constexpr const char* kUpdateTo = "<UPDATETO>";
inline constexpr const char* kUpdateClose = "</UPDATE>";
inline constexpr const char* kInsertTag = "<INSERTTAG>";
inline constexpr const char* kEscape = "<ESC>";
inline constexpr const char* kBeginOfComment = "<BOC>";
}  // namespace kw

bool is_reserved_word(const std::string& text);

Token keyword_token(const char* text);
Token begin_of_comment_token();

// LCS-opcode diff; maximal contiguous runs produce one action each.
// Applying the result reconstructs `new_tokens` from `old_tokens`.
EditScript diff_tokens(const TokenSeq& old_tokens, const TokenSeq& new_tokens);

// Comment-side edit sequence: KEEP runs dropped, inserts tagged with the
// shortest unique suffix before the insertion point, and spans anchored so
// that apply_edits' first-occurrence binding always lands on the intended
// position.
EditScript build_comment_edit_seq(const TokenSeq& old_comment,
                                  const TokenSeq& new_comment);

// Shortest suffix of old_comment[0..insert_position) that occurs exactly
// once in old_comment; the begin-of-comment sentinel when the prefix is
// empty; the entire prefix when no suffix is unique.
TokenSeq find_insert_tag(const TokenSeq& old_comment, std::size_t insert_position);

SerializedScript serialize(const EditScript& script);

// Parses a keyword-delimited stream back to a script. Throws
// ScriptFormatError (with token position) on malformed input.
EditScript deserialize(const TokenSeq& tokens,
                       ScriptSide side = ScriptSide::CommentSide);

// Applies a comment-side script to the old comment, walking both left to
// right. Throws ApplyError (with action index) when a span or tag cannot
// be located at or after the current pointer.
TokenSeq apply_edits(const TokenSeq& old_comment, const EditScript& script);

}  // namespace comet
