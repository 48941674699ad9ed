#pragma once

#include <string>

namespace comet {

// Comment-side edit-script grammar over the serialized keyword surface.
// States: outside any action, inside an insert tag, inside the three span
// kinds (update split into its from/to halves). An escape keyword forces
// the next token to be read as data.
enum class ScriptState {
    Outside,
    InsertTag,
    InsertSpan,
    DelSpan,
    UpdateFrom,
    UpdateTo,
};

class GrammarAutomaton {
public:
    bool allows(const std::string& token) const;
    bool allows_eos() const;
    // Advances on a token; returns false (state unchanged) when invalid.
    bool step(const std::string& token);

    // Tokens needed to reach an accepting state (excluding EOS itself).
    int min_tokens_to_accept() const;

    ScriptState state() const { return state_; }
    bool escape_pending() const { return escape_pending_; }

private:
    ScriptState state_ = ScriptState::Outside;
    int span_len_ = 0;
    bool escape_pending_ = false;
};

}  // namespace comet
