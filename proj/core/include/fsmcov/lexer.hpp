// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsmcov/diag.hpp"

namespace fsmcov {

/// Where a source file came from and what dialect it is expected to hold.
enum class SourceKind { Rtl, Testbench };

struct SourceUnit {
    std::string path;
    std::string text;
    SourceKind kind = SourceKind::Rtl;
};

enum class TokKind {
    Keyword,
    Identifier,
    SystemTask, // $finish, $fsdbDumpvars, ...
    Number,
    String,
    Punct, // operators and punctuation, text holds the spelling
    Eof,
};

struct Token {
    TokKind kind = TokKind::Eof;
    std::string text;
    SourceLoc loc;
    // Number payload: width < 0 means an unsized decimal literal.
    std::uint32_t value = 0;
    int width = -1;

    bool is(TokKind k, const std::string& t) const {
        return kind == k && text == t;
    }
    bool is_kw(const char* t) const { return kind == TokKind::Keyword && text == t; }
    bool is_punct(const char* t) const { return kind == TokKind::Punct && text == t; }
};

/// Splits Verilog-subset source into tokens; comments and whitespace are
/// dropped. Throws DiagError with code LexError on an unrecognized character.
std::vector<Token> tokenize(const SourceUnit& source);

} // namespace fsmcov
