// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fsmcov/ast.hpp"
#include "fsmcov/lexer.hpp"

namespace fsmcov {

/// Parses one module from a token stream. `kind` selects which dialect is
/// allowed: RTL modules reject initial blocks, tasks, and instances.
/// Throws DiagError with codes ParseError / UnsupportedConstruct.
ModuleDecl parse_module(const std::vector<Token>& tokens,
                        const std::string& file = "",
                        SourceKind kind = SourceKind::Rtl);

inline ModuleDecl parse_module(const SourceUnit& source) {
    return parse_module(tokenize(source), source.path, source.kind);
}

} // namespace fsmcov
