// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "fsmcov/prompts.hpp"

namespace fsmcov {
namespace {

int count_lines(const std::string& s) {
    if (s.empty()) return 0;
    int n = static_cast<int>(std::count(s.begin(), s.end(), '\n'));
    if (s.back() != '\n') ++n;
    return n;
}

std::string ordinal(int n) {
    int mod100 = n % 100;
    if (mod100 >= 11 && mod100 <= 13) return std::to_string(n) + "th";
    switch (n % 10) {
    case 1: return std::to_string(n) + "st";
    case 2: return std::to_string(n) + "nd";
    case 3: return std::to_string(n) + "rd";
    default: return std::to_string(n) + "th";
    }
}

} // namespace

std::string role_name(Role r) {
    switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    }
    return "user";
}

Role role_from_name(const std::string& n) {
    if (n == "system") return Role::System;
    if (n == "assistant") return Role::Assistant;
    if (n == "user") return Role::User;
    raise("FormatError", "unknown chat role '" + n + "'");
}

ChatMessage build_system_prompt(const SourceUnit& dut) {
    std::string text =
        "You are an expert in design verification for Verilog code. Given a "
        "Verilog RTL module, you will write a testbench to simulate it and try "
        "to cover all the possible state transitions. Please follow the below "
        "instructions while providing any response:\n"
        "1. The testbench should start with module tb();\n"
        "2. You will add $fsdbDumpfile, $fsdbDumpvars commands in the testbench "
        "at the start of the first initial block.\n"
        "3. Please use apply_input() format to apply input sequences.\n"
        "4. You should consider whether it requires an active or high reset from "
        "the RTL code provided.\n"
        "5. At the end of test patterns add $finish.\n"
        "\n";
    text += dut.text;
    return {Role::System, std::move(text)};
}

ChatMessage build_coverage_feedback_prompt(
    const std::vector<std::string>& uncovered) {
    if (uncovered.empty())
        raise("EmptyUncoveredList",
              "coverage feedback prompt needs at least one uncovered transition");
    std::string text =
        "The above testbench provided doesn't cover all the transitions. This "
        "is the list of transitions that were expected but didn't happen:\n";
    for (const auto& line : uncovered) text += "\"" + line + "\"\n";
    text +=
        "Please consider the RTL Verilog code provided while providing the "
        "testbench and combine the test cases from the above response. You may "
        "have to reset a few times to cover certain transitions.";
    return {Role::User, std::move(text)};
}

ChatMessage build_trace_spec_prompt(const std::string& state_seq,
                                    const std::string& spec) {
    if (state_seq.empty() || spec.empty())
        raise("EmptyPromptInput",
              "trace/spec prompt needs a state sequence and a specification");
    std::string text =
        "We ran the simulation tool with the testbench, this is the value for "
        "the state register variable across the clock cycle, the sequence is "
        "provided serially starting from 0 till the simulation finishes. This "
        "also shows the transition at each clock cycle.\n";
    text += "\"" + state_seq + "\"\n";
    text +=
        "Please use the design specification provided and find out if there is "
        "any mismatch between them. We are looking to see if any transitions "
        "are inconsistent with the design spec.\n"
        "\n"
        "Design specification:\n";
    text += spec;
    return {Role::User, std::move(text)};
}

ChatMessage build_chunk_prompt(int chunk_index, const std::string& pairs,
                               bool carry_reminder) {
    int n = count_lines(pairs);
    std::string nstr = std::to_string(n);
    std::string text;
    if (chunk_index == 0) {
        text = "This is the input-output pair for the first " + nstr +
               " clock cycles. Please use the design specification provided "
               "and find out if there is any mismatch between them. We are "
               "looking to see if any transitions are inconsistent with the "
               "design spec. This will be followed up with the next " + nstr +
               " clock cycles and so on.";
    } else {
        text = "This is the input-output pair for the next " + nstr +
               " clock cycles. Please continue the mismatch detection from the "
               "current state you remembered. We are looking to see if any "
               "transitions are inconsistent with the design spec.";
    }
    if (carry_reminder)
        text += " After every " + ordinal(n) +
                " clock cycle please remember the current state which is very "
                "important when we provide new " + nstr + " input-output pairs.";
    text += "\n\n" + pairs;
    return {Role::User, std::move(text)};
}

ChatMessage build_bitwise_prompt(const std::string& output_bit,
                                 const std::string& pairs) {
    std::string text =
        "To simplify the mismatch detection, consider the provided "
        "input-output pair for each clock cycle. Start the detection process "
        "by focusing on one bit of output and check for correct values as the "
        "input patterns are applied, followed by checking on other bits of "
        "output as well.\n";
    text += "For this pass focus only on output bit " + output_bit +
            "; the other output bits will be checked separately.\n";
    text += "\n" + pairs;
    return {Role::User, std::move(text)};
}

ChatMessage build_bitwise_prompt(const FsmModel& m, const std::string& output_bit,
                                 const std::string& pairs) {
    bool known = false;
    for (const auto& [name, w] : m.outputs) {
        if (name == output_bit) known = true;
        for (int i = 0; i < w; ++i)
            if (output_bit == name + "[" + std::to_string(i) + "]") known = true;
    }
    if (!known)
        raise("UnknownOutputBit",
              m.name + " has no output bit named '" + output_bit + "'");
    return build_bitwise_prompt(output_bit, pairs);
}

} // namespace fsmcov
