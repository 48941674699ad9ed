#include "comet/grammar.hpp"

#include "comet/edit_script.hpp"

namespace comet {

namespace {

bool is_action_keyword(const std::string& t) {
    return is_reserved_word(t) && t != kw::kBeginOfComment;
}

}  // namespace

bool GrammarAutomaton::allows(const std::string& token) const {
    if (escape_pending_) return true;  // anything reads as data
    const bool is_kw = is_action_keyword(token);
    switch (state_) {
        case ScriptState::Outside:
            return token == kw::kInsertTag || token == kw::kDelOpen ||
                   token == kw::kUpdateFrom;
        case ScriptState::InsertTag:
            if (token == kw::kInsertOpen) return span_len_ >= 1;
            if (token == kw::kEscape) return true;
            return !is_kw || token == kw::kBeginOfComment;
        case ScriptState::InsertSpan:
            if (token == kw::kInsertClose) return span_len_ >= 1;
            if (token == kw::kEscape) return true;
            return !is_kw;
        case ScriptState::DelSpan:
            if (token == kw::kDelClose) return span_len_ >= 1;
            if (token == kw::kEscape) return true;
            return !is_kw;
        case ScriptState::UpdateFrom:
            if (token == kw::kUpdateTo) return span_len_ >= 1;
            if (token == kw::kEscape) return true;
            return !is_kw;
        case ScriptState::UpdateTo:
            if (token == kw::kUpdateClose) return span_len_ >= 1;
            if (token == kw::kEscape) return true;
            return !is_kw;
    }
    return false;
}

bool GrammarAutomaton::allows_eos() const {
    return state_ == ScriptState::Outside && !escape_pending_;
}

bool GrammarAutomaton::step(const std::string& token) {
    if (!allows(token)) return false;
    if (escape_pending_) {
        escape_pending_ = false;
        ++span_len_;
        return true;
    }
    if (token == kw::kEscape && state_ != ScriptState::Outside) {
        escape_pending_ = true;
        return true;
    }
    switch (state_) {
        case ScriptState::Outside:
            if (token == kw::kInsertTag) state_ = ScriptState::InsertTag;
            else if (token == kw::kDelOpen) state_ = ScriptState::DelSpan;
            else state_ = ScriptState::UpdateFrom;
            span_len_ = 0;
            break;
        case ScriptState::InsertTag:
            if (token == kw::kInsertOpen) {
                state_ = ScriptState::InsertSpan;
                span_len_ = 0;
            } else {
                ++span_len_;
            }
            break;
        case ScriptState::InsertSpan:
            if (token == kw::kInsertClose) {
                state_ = ScriptState::Outside;
                span_len_ = 0;
            } else {
                ++span_len_;
            }
            break;
        case ScriptState::DelSpan:
            if (token == kw::kDelClose) {
                state_ = ScriptState::Outside;
                span_len_ = 0;
            } else {
                ++span_len_;
            }
            break;
        case ScriptState::UpdateFrom:
            if (token == kw::kUpdateTo) {
                state_ = ScriptState::UpdateTo;
                span_len_ = 0;
            } else {
                ++span_len_;
            }
            break;
        case ScriptState::UpdateTo:
            if (token == kw::kUpdateClose) {
                state_ = ScriptState::Outside;
                span_len_ = 0;
            } else {
                ++span_len_;
            }
            break;
    }
    return true;
}

int GrammarAutomaton::min_tokens_to_accept() const {
    int span = span_len_ + (escape_pending_ ? 1 : 0);
    int pending = escape_pending_ ? 1 : 0;
    switch (state_) {
        case ScriptState::Outside:
            return pending;  // escape never pends here, but stay safe
        case ScriptState::InsertTag:
            // [tag data], <INSERT>, data, </INSERT>
            return pending + (span >= 1 ? 0 : 1) + 3;
        case ScriptState::InsertSpan:
        case ScriptState::DelSpan:
        case ScriptState::UpdateTo:
            return pending + (span >= 1 ? 0 : 1) + 1;
        case ScriptState::UpdateFrom:
            return pending + (span >= 1 ? 0 : 1) + 3;
    }
    return 0;
}

}  // namespace comet
