// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fsmcov/gateway.hpp"
#include "fsmcov/sim.hpp"

namespace fsmcov {

struct CoveragePlan {
    struct Segment {
        bool reset_prefix = true;
        std::vector<std::uint32_t> inputs;
    };
    std::vector<Segment> segments;
    std::set<int> targeted; // transition ids the plan fires
};

inline constexpr int kDefaultSegmentBudget = 64;

/// Greedy walk: repeatedly extend toward the nearest uncovered transition;
/// start a fresh reset segment when nothing is reachable or the budget is
/// hit. Throws UnreachableTarget for transitions unreachable from reset.
CoveragePlan plan_coverage(const FsmModel& m, const std::set<int>& uncovered,
                           int segment_budget = kDefaultSegmentBudget);

/// Renders a plan as a testbench in the constrained dialect.
/// parse_testbench on the result reproduces the plan's event sequence.
std::string emit_testbench(const FsmModel& m, const CoveragePlan& plan);

enum class CheckMode { StateRegs, IOPairs };

struct MismatchVerdict {
    bool found = false;
    int cycle = -1;
    std::string observed;
    std::string expected;
    std::string narrative;
};

/// Replays the golden machine over one contiguous chunk of a recorded trace
/// and compares state labels (StateRegs) or output vectors (IOPairs).
/// Returns the verdict plus the golden end state to carry into the next
/// chunk.
std::pair<MismatchVerdict, int> check_chunk(const FsmModel& golden,
                                            int carried_state,
                                            const std::vector<TraceRecord>& chunk,
                                            CheckMode mode);

/// Whole-trace IOPairs check projected onto one output bit
/// (name "out1" for 1-bit ports, "out[2]" for wider ones).
MismatchVerdict check_bitwise(const FsmModel& golden, const Trace& trace,
                              const std::string& bit);

// Wire format shared by the loop driver (builds prompts) and the oracle
// (parses them back): one line per cycle, e.g.
//   "cycle 3: rst=1 in=10 state=B"   (StateRegs)
//   "cycle 3: in=10 out1=0 out2=1"   (IOPairs)
std::string format_chunk_lines(const FsmModel& m,
                               const std::vector<TraceRecord>& records,
                               CheckMode mode);
std::vector<TraceRecord> parse_chunk_lines(const FsmModel& m,
                                           const std::string& text,
                                           CheckMode mode);

/// The deterministic LLM stand-in. Dispatches on the last prompt's text and
/// answers from the golden model; unknown prompts raise
/// OracleUnsupportedPrompt.
std::unique_ptr<Backend> make_oracle_backend(FsmModel golden,
                                             const BackendConfig& cfg = {});

} // namespace fsmcov
