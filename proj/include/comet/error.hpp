#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace comet {

// Lexical error (e.g. unterminated string literal); offset is a byte
// position into the source text.
struct LexError : std::runtime_error {
    std::size_t offset;
    LexError(std::string msg, std::size_t off)
        : std::runtime_error(std::move(msg)), offset(off) {}
};

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::string msg, std::size_t off)
        : std::runtime_error(std::move(msg)), offset(off) {}
};

// Malformed serialized edit script; position indexes the offending token.
struct ScriptFormatError : std::runtime_error {
    std::size_t position;
    ScriptFormatError(std::string msg, std::size_t pos)
        : std::runtime_error(std::move(msg)), position(pos) {}
};

// An edit action whose span or tag cannot be located in the old comment.
struct ApplyError : std::runtime_error {
    std::size_t action_index;
    ApplyError(std::string msg, std::size_t idx)
        : std::runtime_error(std::move(msg)), action_index(idx) {}
};

}  // namespace comet
