// SPDX-License-Identifier: Apache-2.0
#include "fsmcov/lexer.hpp"

#include "fsmcov/bits.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace fsmcov {
namespace {

const std::unordered_set<std::string> kKeywords = {
    "module", "endmodule", "input",  "output",  "inout",   "reg",
    "wire",   "parameter", "localparam", "assign", "always", "initial",
    "begin",  "end",       "if",     "else",    "case",    "endcase",
    "default", "posedge",  "negedge", "or",     "task",    "endtask",
    "integer", "for",
};

struct Cursor {
    const std::string& s;
    const std::string& file;
    size_t i = 0;
    int line = 1;
    int col = 1;

    bool done() const { return i >= s.size(); }
    char peek(size_t off = 0) const {
        return i + off < s.size() ? s[i + off] : '\0';
    }
    char advance() {
        char c = s[i++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }
    SourceLoc loc() const { return {line, col}; }
};

std::uint32_t parse_digits(const std::string& digits, int base, Cursor& cur,
                           SourceLoc at) {
    std::uint64_t v = 0;
    for (char c : digits) {
        if (c == '_') continue;
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = 10 + (c - 'a');
        else if (c >= 'A' && c <= 'F') d = 10 + (c - 'A');
        else d = 99;
        if (d >= base)
            raise("LexError", "bad digit '" + std::string(1, c) + "' for base " +
                              std::to_string(base), at, cur.file);
        v = v * base + d;
    }
    return static_cast<std::uint32_t>(v);
}

} // namespace

std::vector<Token> tokenize(const SourceUnit& source) {
    Cursor cur{source.text, source.path};
    std::vector<Token> out;

    auto push = [&](TokKind k, std::string text, SourceLoc at) {
        out.push_back(Token{k, std::move(text), at});
    };

    while (!cur.done()) {
        char c = cur.peek();
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '/') {
            while (!cur.done() && cur.peek() != '\n') cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '*') {
            SourceLoc at = cur.loc();
            cur.advance();
            cur.advance();
            while (!(cur.peek() == '*' && cur.peek(1) == '/')) {
                if (cur.done())
                    raise("LexError", "unterminated block comment", at, cur.file);
                cur.advance();
            }
            cur.advance();
            cur.advance();
            continue;
        }

        SourceLoc at = cur.loc();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string ident;
            while (std::isalnum(static_cast<unsigned char>(cur.peek())) ||
                   cur.peek() == '_')
                ident += cur.advance();
            TokKind k =
                kKeywords.count(ident) ? TokKind::Keyword : TokKind::Identifier;
            push(k, std::move(ident), at);
            continue;
        }

        if (c == '$') {
            cur.advance();
            std::string name = "$";
            while (std::isalnum(static_cast<unsigned char>(cur.peek())) ||
                   cur.peek() == '_')
                name += cur.advance();
            if (name.size() == 1)
                raise("LexError", "stray '$'", at, cur.file);
            push(TokKind::SystemTask, std::move(name), at);
            continue;
        }

        if (c == '"') {
            cur.advance();
            std::string text;
            while (cur.peek() != '"') {
                if (cur.done() || cur.peek() == '\n')
                    raise("LexError", "unterminated string", at, cur.file);
                text += cur.advance();
            }
            cur.advance();
            push(TokKind::String, std::move(text), at);
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            while (std::isdigit(static_cast<unsigned char>(cur.peek())) ||
                   cur.peek() == '_')
                digits += cur.advance();
            Token tok{TokKind::Number, digits, at};
            if (cur.peek() == '\'') {
                cur.advance();
                char basec = cur.advance();
                int base;
                switch (std::tolower(static_cast<unsigned char>(basec))) {
                case 'b': base = 2; break;
                case 'o': base = 8; break;
                case 'd': base = 10; break;
                case 'h': base = 16; break;
                default:
                    raise("LexError",
                          "unknown literal base '" + std::string(1, basec) + "'",
                          at, cur.file);
                }
                std::string body;
                while (std::isalnum(static_cast<unsigned char>(cur.peek())) ||
                       cur.peek() == '_')
                    body += cur.advance();
                if (body.empty())
                    raise("LexError", "missing digits after base", at, cur.file);
                tok.width = static_cast<int>(parse_digits(digits, 10, cur, at));
                if (tok.width <= 0 || tok.width > 32)
                    raise("LexError", "unsupported literal width", at, cur.file);
                tok.value = parse_digits(body, base, cur, at) & BitVec::mask(tok.width);
                tok.text = digits + "'" + basec + body;
            } else {
                tok.width = -1;
                tok.value = parse_digits(digits, 10, cur, at);
            }
            out.push_back(std::move(tok));
            continue;
        }

        // Multi-char operators first.
        static const std::array<const char*, 8> two = {"<=", ">=", "==", "!=",
                                                       "&&", "||", "<<", ">>"};
        bool matched = false;
        for (const char* op : two) {
            if (c == op[0] && cur.peek(1) == op[1]) {
                cur.advance();
                cur.advance();
                push(TokKind::Punct, op, at);
                matched = true;
                break;
            }
        }
        if (matched) continue;

        static const std::string single = "()[]{};,:.#=~!&|^+-*/<>?@";
        if (single.find(c) != std::string::npos) {
            cur.advance();
            push(TokKind::Punct, std::string(1, c), at);
            continue;
        }

        raise("LexError",
              "unrecognized character '" + std::string(1, c) + "'", at,
              cur.file);
    }

    out.push_back(Token{TokKind::Eof, "", cur.loc()});
    return out;
}

} // namespace fsmcov
