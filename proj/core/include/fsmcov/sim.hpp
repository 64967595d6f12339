// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fsmcov/fsm.hpp"
#include "fsmcov/stimulus.hpp"

namespace fsmcov {

struct TraceRecord {
    int cycle = 0;
    bool reset_active = false;
    std::uint32_t inputs = 0;  // concatenated model input vector
    int state = 0;             // state id at the start of the cycle
    std::uint32_t outputs = 0; // concatenated model output vector
};

struct Trace {
    std::string dut_name;
    std::vector<TraceRecord> records;
    bool finished = false; // true iff the program's Finish executed
};

struct CompileDiagnostics {
    std::vector<Diagnostic> errors;
    std::vector<Diagnostic> warnings;

    bool ok() const { return errors.empty(); }
    /// One diagnostic per line, errors first, ordered by location. This is
    /// the text appended to the prompt on a failed compile.
    std::string render() const;
};

/// The compile-check step: lex/parse the testbench, validate conventions,
/// and check that its instance bindings resolve against the DUT's ports.
CompileDiagnostics compile_check(const SourceUnit& tb_source, const ModuleDecl& dut);

inline constexpr int kDefaultMaxCycles = 10000;

/// Cycle-accurate run of a stimulus program against the model. Mealy outputs
/// follow the inputs combinationally; Moore outputs are per-state.
Trace simulate(const FsmModel& m, const StimulusProgram& program,
               int max_cycles = kDefaultMaxCycles);

std::vector<std::string> trace_to_state_sequence(const FsmModel& m, const Trace& t);

/// One (input vector, output vector) pair per non-reset cycle.
std::vector<std::pair<BitVec, BitVec>> trace_to_io_pairs(const FsmModel& m,
                                                         const Trace& t);

std::string trace_to_csv(const FsmModel& m, const Trace& t);
std::string trace_to_json(const FsmModel& m, const Trace& t);

} // namespace fsmcov
