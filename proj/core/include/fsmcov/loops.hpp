// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsmcov/coverage.hpp"
#include "fsmcov/gateway.hpp"
#include "fsmcov/mutation.hpp"
#include "fsmcov/oracle.hpp"

namespace fsmcov {

enum class Scenario { StateRegs, IOPairs, Fuzzing };
std::string scenario_name(Scenario s);

struct LoopConfig {
    double coverage_threshold = 100.0; // percent
    int max_iterations = 25;
    int compile_fix_retries = 3;
    int chunk_size = 10;
    Scenario scenario = Scenario::StateRegs;
    int fuzz_pattern_budget = 512;
    std::uint64_t rng_seed = 1;
    int max_cycles = kDefaultMaxCycles;
    int segment_budget = kDefaultSegmentBudget;
    std::string results_dir; // empty disables persistence
};

struct IterationLog {
    int iteration = 0; // 1-based
    bool compiled = false;
    std::string testbench;       // last testbench source of this iteration
    std::string compile_summary; // diagnostics of the last compile attempt
    CoverageReport iteration_report;
    CoverageReport cumulative_report;
    std::vector<std::string> feedback_sent; // uncovered list fed forward
};

struct LoopResult {
    FsmModel model;
    std::vector<IterationLog> iterations;
    PromptTranscript transcript;

    const CoverageReport& final_report() const {
        return iterations.back().cumulative_report;
    }
};

/// The coverage-feedback loop: system prompt, testbench, compile fixes,
/// simulate, merge coverage, feed uncovered transitions back; stops at the
/// threshold, max_iterations, or a stall (two consecutive iterations with no
/// new coverage and identical uncovered sets).
LoopResult run_testbench_loop(const SourceUnit& dut, Backend& backend,
                              const LoopConfig& cfg);

struct DetectionOutcome {
    bool detected = false;
    int patterns_to_detection = 0; // input vectors applied up to the mismatch
    int mismatch_cycle = -1;
    std::string evidence; // JSON: scenario, verdicts, backend id
};

/// The bug-detection pipeline. The mutant is simulated on `stimulus` (or, if
/// null, on an oracle-planned full-coverage program for the golden machine);
/// the trace is fed to the backend per scenario and every reported mismatch
/// is confirmed against the golden model before counting.
DetectionOutcome run_bug_detection(const FsmModel& golden, const FsmModel& mutant,
                                   const std::string& spec_text, Backend& backend,
                                   const LoopConfig& cfg,
                                   const StimulusProgram* stimulus = nullptr);

struct ExperimentRecord {
    std::string fsm_id;
    int input_bits = 0;
    int output_bits = 0;
    int states = 0;
    std::string backend;
    double final_cov = 0.0;
    int iters = 0;
    struct ScenarioOutcome {
        bool detected = false;
        int patterns = 0;
    };
    std::optional<ScenarioOutcome> state_regs, io_pairs, fuzzing;
};

std::string level_for_states(int states); // Easy <=7, Medium 8-14, Hard >=15

struct Summary {
    std::string table_csv;    // results-table schema
    std::string plotdata_csv; // (fsm, method, patterns) rows for plotting
};
Summary summarize(const std::vector<ExperimentRecord>& records);

/// Creates parent directories as needed.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace fsmcov
