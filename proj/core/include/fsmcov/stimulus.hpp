// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fsmcov/ast.hpp"
#include "fsmcov/fsm.hpp"
#include "fsmcov/lexer.hpp"
#include "fsmcov/parser.hpp"

namespace fsmcov {

enum class EventKind {
    ResetAssert,        // one clock cycle with reset active
    ResetDeassert,      // marker between reset and input application
    ApplyInput,         // one clock cycle driving the sampled net values
    ApplyInputSequence, // never survives parsing; sequences expand to ApplyInput
    Finish
};

struct StimulusEvent {
    EventKind kind = EventKind::ApplyInput;
    // Testbench net values sampled at this cycle's posedge. The simulator
    // resolves them onto DUT ports through the instance bindings.
    std::vector<std::pair<std::string, std::uint32_t>> drives;
    SourceLoc loc;
};

struct StimulusProgram {
    std::string tb_name;
    std::string clock_net;
    std::string reset_net;
    int clock_half_period = 5;
    ResetPolarity reset_polarity = ResetPolarity::ActiveHigh;
    std::vector<StimulusEvent> events; // ends with Finish
    std::vector<Instance> instances;   // DUT hookup, for port resolution
    bool has_dump_commands = false;
    bool has_apply_input_task = false;
};

/// Interprets a parsed testbench module into a cycle-resolved event program.
/// Throws DiagError: ParseError on structure outside the dialect,
/// ConventionError when there is no $finish/$stop or no reset before inputs.
StimulusProgram parse_testbench(const ModuleDecl& tb);

inline StimulusProgram parse_testbench(const SourceUnit& source) {
    return parse_testbench(parse_module(tokenize(source), source.path,
                                        SourceKind::Testbench));
}

/// Checks the five testbench conventions plus reset-polarity agreement with
/// the DUT. Violations come back as diagnostics (MissingDumpCommands is
/// warning-severity); an empty list means fully conventional.
std::vector<Diagnostic> validate_testbench_conventions(const StimulusProgram& program,
                                                       const ModuleDecl& dut);

} // namespace fsmcov
