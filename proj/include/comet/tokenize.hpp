#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "comet/token.hpp"

namespace comet {

// Lexes a code snippet into identifiers, literals, operators, punctuation
// and keywords. Whitespace and comments inside the code are dropped.
// Throws LexError on an unterminated string or char literal.
TokenSeq tokenize_code(std::string_view source);

// Splits camelCase and snake_case compounds. Underscores are dropped; a
// run of uppercase letters splits before its last letter when followed by
// lowercase; digit runs start a new subtoken. Non-compound tokens pass
// through with parent_index pointing at themselves.
SubtokenSeq split_subtokens(const TokenSeq& tokens);

std::vector<std::string> split_identifier(std::string_view text);

// Strips comment delimiters (/** */ // leading stars) and HTML tags,
// splits on whitespace, then subtoken-splits compounds. Case preserved.
TokenSeq clean_comment(std::string_view raw);

}  // namespace comet
