// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <random>

#include "fsmcov/loops.hpp"
#include "fsmcov/oracle.hpp"
#include "fsmcov/parser.hpp"
#include "testutil.hpp"

using namespace fsmcov;
using testutil::repo_path;

namespace {
SourceUnit rtl(const std::string& rel) {
    return SourceUnit{rel, read_file(repo_path(rel)), SourceKind::Rtl};
}

FsmModel load(const std::string& rel) {
    return extract_fsm(parse_module(rtl(rel)));
}

// A backend that never produces usable Verilog.
class JunkBackend : public Backend {
public:
    std::string id() const override { return "junk"; }
    std::string complete(const PromptTranscript&) override {
        ++calls;
        return "I'm sorry, I can only talk about cooking.";
    }
    int calls = 0;
};
} // namespace

TEST_CASE("the guided loop reaches full coverage on the shipped machines") {
    for (const char* rel : {"corpus/fsm16.v", "corpus/router4.v",
                            "corpus/seq1011.v", "corpus/counter8.v",
                            "corpus/wide4.v"}) {
        SourceUnit dut = rtl(rel);
        FsmModel m = extract_fsm(parse_module(dut));
        auto backend = make_oracle_backend(m);
        LoopConfig cfg;
        LoopResult res = run_testbench_loop(dut, *backend, cfg);
        INFO(rel);
        CHECK(res.iterations.size() <= 2);
        CHECK(res.final_report().transition_percent() == "100.00");
        CHECK(res.iterations.front().compiled);
        // Cumulative coverage is monotone across iterations.
        int prev = 0;
        for (const auto& it : res.iterations) {
            CHECK(it.cumulative_report.transitions_covered() >= prev);
            prev = it.cumulative_report.transitions_covered();
        }
    }
}

TEST_CASE("a recorded conversation replays to the same iteration count") {
    SourceUnit dut = rtl("corpus/fsm16.v");
    BackendConfig bc;
    bc.kind = BackendKind::Replay;
    bc.transcript_path = testutil::golden_path("replay_fsm16.jsonl");
    for (int round = 0; round < 2; ++round) {
        auto backend = make_replay_backend(bc);
        LoopConfig cfg;
        LoopResult res = run_testbench_loop(dut, *backend, cfg);
        CHECK(res.iterations.size() == 3);
        CHECK(res.final_report().transition_percent() == "100.00");
        // Feedback was sent after each partial iteration.
        CHECK_FALSE(res.iterations[0].feedback_sent.empty());
        CHECK_FALSE(res.iterations[1].feedback_sent.empty());
        CHECK(res.iterations[2].feedback_sent.empty());
    }
}

TEST_CASE("compile retries are exhausted and recorded, not fatal") {
    SourceUnit dut = rtl("corpus/gate2.v");
    JunkBackend backend;
    LoopConfig cfg;
    cfg.compile_fix_retries = 2;
    LoopResult res = run_testbench_loop(dut, backend, cfg);
    REQUIRE(res.iterations.size() == 1);
    CHECK_FALSE(res.iterations[0].compiled);
    CHECK_FALSE(res.iterations[0].compile_summary.empty());
    CHECK(backend.calls == 3); // initial attempt plus two retries
}

TEST_CASE("the loop persists per-iteration artifacts") {
    namespace fs = std::filesystem;
    std::string dir = "/tmp/fsmcov_test_loop_persist";
    fs::remove_all(dir);
    SourceUnit dut = rtl("corpus/router4.v");
    FsmModel m = extract_fsm(parse_module(dut));
    auto backend = make_oracle_backend(m);
    LoopConfig cfg;
    cfg.results_dir = dir;
    LoopResult res = run_testbench_loop(dut, *backend, cfg);
    REQUIRE_FALSE(res.iterations.empty());
    for (const char* f :
         {"testbench.v", "coverage.txt", "coverage.json", "transcript.jsonl"})
        CHECK(fs::exists(dir + "/iter01/" + std::string(f)));
    CoverageReport persisted =
        parse_report(read_file(dir + "/iter01/coverage.txt"));
    CHECK(persisted.transition_percent() ==
          res.iterations[0].cumulative_report.transition_percent());
}

TEST_CASE("detection catches a retargeted transition in every scenario") {
    FsmModel golden = load("corpus/fsm16.v");
    Mutation mu;
    mu.kind = MutationKind::RetargetTransition;
    mu.site = 7;
    mu.payload = 4;
    FsmModel mutant = inject(golden, mu);
    auto backend = make_oracle_backend(golden);
    int state_regs_cycle = -1, io_pairs_cycle = -1;
    for (Scenario sc : {Scenario::StateRegs, Scenario::IOPairs,
                        Scenario::Fuzzing}) {
        LoopConfig cfg;
        cfg.scenario = sc;
        DetectionOutcome out =
            run_bug_detection(golden, mutant, "", *backend, cfg);
        INFO(scenario_name(sc));
        CHECK(out.detected);
        CHECK(out.patterns_to_detection > 0);
        CHECK_FALSE(out.evidence.empty());
        if (sc == Scenario::StateRegs) state_regs_cycle = out.mismatch_cycle;
        if (sc == Scenario::IOPairs) io_pairs_cycle = out.mismatch_cycle;
    }
    // The state register shows the bug no later than the outputs do.
    CHECK(io_pairs_cycle >= state_regs_cycle);
}

TEST_CASE("an output-only bug is invisible to the state register check") {
    FsmModel golden = load("corpus/router4.v");
    Mutation mu;
    mu.kind = MutationKind::SwapOutputs;
    mu.site = 2;
    mu.payload = 1;
    FsmModel mutant = inject(golden, mu);
    auto backend = make_oracle_backend(golden);
    LoopConfig cfg;
    cfg.scenario = Scenario::StateRegs;
    CHECK_FALSE(run_bug_detection(golden, mutant, "", *backend, cfg).detected);
    cfg.scenario = Scenario::IOPairs;
    CHECK(run_bug_detection(golden, mutant, "", *backend, cfg).detected);
}

TEST_CASE("an unmutated design is never reported buggy") {
    FsmModel golden = load("corpus/gray3.v");
    auto backend = make_oracle_backend(golden);
    for (Scenario sc : {Scenario::StateRegs, Scenario::IOPairs,
                        Scenario::Fuzzing}) {
        LoopConfig cfg;
        cfg.scenario = sc;
        cfg.fuzz_pattern_budget = 64;
        DetectionOutcome out =
            run_bug_detection(golden, golden, "", *backend, cfg);
        CHECK_FALSE(out.detected);
    }
}

TEST_CASE("fuzzing detection is reproducible under a fixed seed") {
    FsmModel golden = load("corpus/fsm16.v");
    Mutation mu;
    mu.kind = MutationKind::RetargetTransition;
    mu.site = 7;
    mu.payload = 4;
    FsmModel mutant = inject(golden, mu);
    auto backend = make_oracle_backend(golden);
    LoopConfig cfg;
    cfg.scenario = Scenario::Fuzzing;
    cfg.rng_seed = 123;
    DetectionOutcome a = run_bug_detection(golden, mutant, "", *backend, cfg);
    DetectionOutcome b = run_bug_detection(golden, mutant, "", *backend, cfg);
    CHECK(a.detected == b.detected);
    CHECK(a.patterns_to_detection == b.patterns_to_detection);
    CHECK(a.mismatch_cycle == b.mismatch_cycle);
}

TEST_CASE("levels tier by state count") {
    CHECK(level_for_states(2) == "Easy");
    CHECK(level_for_states(7) == "Easy");
    CHECK(level_for_states(8) == "Medium");
    CHECK(level_for_states(14) == "Medium");
    CHECK(level_for_states(15) == "Hard");
    CHECK(level_for_states(28) == "Hard");
}

TEST_CASE("the results table keeps its column schema") {
    ExperimentRecord r;
    r.fsm_id = "demo";
    r.input_bits = 2;
    r.output_bits = 1;
    r.states = 4;
    r.backend = "oracle:demo";
    r.final_cov = 100.0;
    r.iters = 1;
    r.state_regs = ExperimentRecord::ScenarioOutcome{true, 5};
    r.io_pairs = ExperimentRecord::ScenarioOutcome{false, 0};
    Summary s = summarize({r});
    std::string header =
        "Level,FSM,i/p,o/p,states,Backend,%Cov,Iters,StateRegs,"
        "StateRegsPatterns,IOPairs,IOPairsPatterns,Fuzzing,FuzzingPatterns";
    CHECK(s.table_csv.substr(0, header.size()) == header);
    CHECK(s.table_csv.find("Easy,demo,2,1,4,oracle:demo,100.00,1,pass,5,fail,"
                           ",,") != std::string::npos);
    // Missed detections keep their row but leave the pattern count empty.
    CHECK(s.plotdata_csv.substr(0, 20) == "fsm,method,patterns\n");
    CHECK(s.plotdata_csv.find("demo,state_regs,5\n") != std::string::npos);
    CHECK(s.plotdata_csv.find("demo,io_pairs,\n") != std::string::npos);
}
