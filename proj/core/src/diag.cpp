// SPDX-License-Identifier: Apache-2.0
#include "fsmcov/diag.hpp"

#include <sstream>

namespace fsmcov {

std::string Diagnostic::render() const {
    std::ostringstream os;
    os << (severity == Severity::Error ? "ERROR" : "WARNING") << ' '
       << (file.empty() ? "<input>" : file) << ':' << loc.line << ':'
       << loc.column << ' ' << code << ' ' << message;
    return os.str();
}

std::string render_diagnostics(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        out += d.render();
        out += '\n';
    }
    return out;
}

} // namespace fsmcov
