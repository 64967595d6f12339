// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace fsmcov {

/// Fixed-width two-state value. Widths stay small (FSM-scale signals).
struct BitVec {
    std::uint32_t value = 0;
    int width = 1;

    BitVec() = default;
    BitVec(std::uint32_t v, int w) : value(v & mask(w)), width(w) {}

    static std::uint32_t mask(int w) {
        return w >= 32 ? 0xffffffffu : ((1u << w) - 1u);
    }

    bool bit(int i) const { return (value >> i) & 1u; }

    bool operator==(const BitVec&) const = default;

    /// "3'b101" style literal.
    std::string to_verilog() const {
        std::string s = std::to_string(width) + "'b";
        for (int i = width - 1; i >= 0; --i)
            s += bit(i) ? '1' : '0';
        return s;
    }

    /// Plain binary digits, msb first.
    std::string to_binary() const {
        std::string s;
        for (int i = width - 1; i >= 0; --i)
            s += bit(i) ? '1' : '0';
        return s;
    }
};

} // namespace fsmcov
