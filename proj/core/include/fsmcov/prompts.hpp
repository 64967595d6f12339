// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fsmcov/fsm.hpp"
#include "fsmcov/lexer.hpp"

namespace fsmcov {

enum class Role { System, User, Assistant };

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

std::string role_name(Role r);
Role role_from_name(const std::string& n);

/// System prompt: verification-expert instructions (five numbered rules)
/// followed by the DUT RTL verbatim.
ChatMessage build_system_prompt(const SourceUnit& dut);

/// Coverage feedback: quotes each uncovered-transition line and asks to
/// combine test cases, with the reset hint. Throws EmptyUncoveredList.
ChatMessage build_coverage_feedback_prompt(const std::vector<std::string>& uncovered);

/// State-sequence check against the natural-language design specification.
ChatMessage build_trace_spec_prompt(const std::string& state_seq,
                                    const std::string& spec);

/// Chunked I/O-pair check. `pairs` is one line per cycle; the cycle count is
/// taken from its line count. carry_reminder injects the remember-the-state
/// sentence.
ChatMessage build_chunk_prompt(int chunk_index, const std::string& pairs,
                               bool carry_reminder);

/// Per-bit detection pass scoped to one named output bit.
ChatMessage build_bitwise_prompt(const std::string& output_bit,
                                 const std::string& pairs);
/// Same, but validates the bit name against the model (UnknownOutputBit).
ChatMessage build_bitwise_prompt(const FsmModel& m, const std::string& output_bit,
                                 const std::string& pairs);

} // namespace fsmcov
