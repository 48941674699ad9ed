#include "support/generators.hpp"

#include <algorithm>

namespace comet::testing {

std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t min_len,
                                      std::size_t max_len,
                                      std::size_t alphabet) {
    static const char* kWords[] = {
        "the",  "a",    "message", "null",   "text",  "value", "count",
        "list", "node", "index",   "buffer", "token", "was",   "if",
        "or",   "and",  "returns", "sets",   "first", "last",  "item",
        "map",  "key",  "cache",   "flag",   "state", "next",  "prev",
        "size", "name", "id",      "data",   "gets",  "parse", "builds",
        "reads"};
    std::size_t pool = std::min(alphabet, std::size(kWords));
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
    std::vector<std::string> out(len(rng));
    for (auto& w : out) w = kWords[pick(rng)];
    return out;
}

std::vector<std::string> random_edit(std::mt19937_64& rng,
                                     const std::vector<std::string>& base,
                                     std::size_t max_edits) {
    std::vector<std::string> out = base;
    std::uniform_int_distribution<std::size_t> edit_count(1, max_edits);
    std::uniform_int_distribution<int> kind(0, 2);
    std::size_t edits = edit_count(rng);
    for (std::size_t e = 0; e < edits; ++e) {
        std::uniform_int_distribution<std::size_t> pos_dist(0, out.size());
        std::size_t pos = pos_dist(rng);
        std::vector<std::string> patch =
            random_words(rng, 1, 3, 36);
        switch (kind(rng)) {
            case 0:  // insert
                out.insert(out.begin() + pos, patch.begin(), patch.end());
                break;
            case 1: {  // delete a short run
                if (out.empty()) break;
                std::size_t at = std::min(pos, out.size() - 1);
                std::size_t len = std::min<std::size_t>(patch.size(),
                                                        out.size() - at);
                out.erase(out.begin() + at, out.begin() + at + len);
                break;
            }
            default: {  // replace a short run
                if (out.empty()) {
                    out.insert(out.end(), patch.begin(), patch.end());
                    break;
                }
                std::size_t at = std::min(pos, out.size() - 1);
                std::size_t len = std::min<std::size_t>(2, out.size() - at);
                out.erase(out.begin() + at, out.begin() + at + len);
                out.insert(out.begin() + at, patch.begin(), patch.end());
                break;
            }
        }
    }
    return out;
}

TokenSeq comment_tokens(const std::vector<std::string>& words) {
    TokenSeq out;
    for (const auto& w : words) out.push_back(comment_word(w));
    return out;
}

namespace {

const char* kVars[] = {"a", "b", "min", "max", "sum", "val", "tmp", "n"};
const char* kOps[] = {"+", "-", "*"};
const char* kCmps[] = {"<", ">", "<=", ">=", "==", "!="};

struct MethodGen {
    std::mt19937_64& rng;
    std::vector<std::string> declared;
    int label = 0;

    std::string fresh_var() {
        std::uniform_int_distribution<std::size_t> pick(0, std::size(kVars) - 1);
        std::string name = std::string(kVars[pick(rng)]) + std::to_string(label++);
        declared.push_back(name);
        return name;
    }
    std::string any_var() {
        std::uniform_int_distribution<std::size_t> pick(0, declared.size() - 1);
        return declared[pick(rng)];
    }
    std::string literal() {
        std::uniform_int_distribution<int> v(0, 99);
        return std::to_string(v(rng));
    }
    std::string operand() {
        std::uniform_int_distribution<int> c(0, 2);
        return c(rng) == 0 ? literal() : any_var();
    }
    std::string expr() {
        std::uniform_int_distribution<int> c(0, 3);
        std::uniform_int_distribution<std::size_t> op(0, std::size(kOps) - 1);
        switch (c(rng)) {
            case 0: return operand();
            case 1: return operand() + " " + kOps[op(rng)] + " " + operand();
            case 2: return "f(" + operand() + ")";
            default:
                return operand() + " " + kOps[op(rng)] + " (" + operand() +
                       " " + kOps[op(rng)] + " " + operand() + ")";
        }
    }
    std::string cond() {
        std::uniform_int_distribution<std::size_t> cmp(0, std::size(kCmps) - 1);
        return operand() + " " + kCmps[cmp(rng)] + " " + operand();
    }

    std::string statement(int depth, int budget) {
        std::uniform_int_distribution<int> kind_dist(0, depth < 2 && budget > 2 ? 6 : 3);
        switch (kind_dist(rng)) {
            case 0: return "int " + fresh_var() + " = " + expr() + ";";
            case 1: return any_var() + " = " + expr() + ";";
            case 2: return any_var() + "++;";
            case 3: return any_var() + " = f(" + operand() + ", " + operand() + ");";
            case 4: {
                std::string s = "if (" + cond() + ") { " +
                                statement(depth + 1, 1) + " }";
                std::uniform_int_distribution<int> has_else(0, 1);
                if (has_else(rng))
                    s += " else { " + statement(depth + 1, 1) + " }";
                return s;
            }
            case 5:
                return "while (" + cond() + ") { " +
                       statement(depth + 1, 1) + " }";
            default:
                return "for (int " + fresh_var() + " = 0; " + cond() + "; " +
                       any_var() + "++) { " + statement(depth + 1, 1) + " }";
        }
    }
};

}  // namespace

std::string random_method_source(std::mt19937_64& rng,
                                 std::size_t max_statements) {
    MethodGen gen{rng};
    std::uniform_int_distribution<std::size_t> count(1, max_statements);
    std::string body;
    gen.declared.push_back("a");
    gen.declared.push_back("b");
    std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i)
        body += "    " + gen.statement(0, static_cast<int>(n)) + "\n";
    body += "    return " + gen.any_var() + ";\n";
    return "int work(int a, int b) {\n" + body + "}\n";
}

std::vector<std::string> random_statement_list(std::mt19937_64& rng,
                                               std::size_t count) {
    MethodGen gen{rng};
    gen.declared.push_back("a");
    gen.declared.push_back("b");
    std::vector<std::string> stmts;
    for (std::size_t i = 0; i < count; ++i)
        stmts.push_back(gen.statement(0, static_cast<int>(count)));
    return stmts;
}

std::string method_from_statements(const std::vector<std::string>& statements) {
    std::string body;
    for (const auto& s : statements) body += "    " + s + "\n";
    return "int work(int a, int b) {\n" + body + "}\n";
}

}  // namespace comet::testing
