// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fsmcov {

struct SourceLoc {
    int line = 0;   // 1-based, 0 = unknown
    int column = 0; // 1-based

    auto operator<=>(const SourceLoc&) const = default;
};

enum class Severity { Error, Warning };

/// One diagnostic line. Rendered as "SEVERITY file:line:col CODE message".
struct Diagnostic {
    Severity severity = Severity::Error;
    std::string file;
    SourceLoc loc;
    std::string code;
    std::string message;

    std::string render() const;
};

/// Thrown by the frontend on hard failures (lex/parse/extract errors).
class DiagError : public std::runtime_error {
public:
    explicit DiagError(Diagnostic d)
        : std::runtime_error(d.render()), diag_(std::move(d)) {}
    const Diagnostic& diag() const { return diag_; }

private:
    Diagnostic diag_;
};

[[noreturn]] inline void raise(std::string code, std::string message,
                               SourceLoc loc = {}, std::string file = {}) {
    throw DiagError(Diagnostic{Severity::Error, std::move(file), loc,
                               std::move(code), std::move(message)});
}

std::string render_diagnostics(const std::vector<Diagnostic>& diags);

} // namespace fsmcov
