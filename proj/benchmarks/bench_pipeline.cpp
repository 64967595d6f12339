// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths: frontend, extraction, simulation,
// coverage accounting, planning, and the detection checks.
#include <random>
#include <set>

#include <benchmark/benchmark.h>

#include "fsmcov/loops.hpp"
#include "fsmcov/oracle.hpp"
#include "fsmcov/parser.hpp"

using namespace fsmcov;

#ifndef FSMCOV_SOURCE_DIR
#define FSMCOV_SOURCE_DIR "."
#endif

namespace {

SourceUnit fsm16_source() {
    static const std::string text =
        read_file(std::string(FSMCOV_SOURCE_DIR) + "/corpus/fsm16.v");
    return SourceUnit{"fsm16.v", text, SourceKind::Rtl};
}

FsmModel fsm16_model() { return extract_fsm(parse_module(fsm16_source())); }

StimulusProgram random_walk(const FsmModel& m, int len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    StimulusProgram prog;
    prog.reset_net = m.reset_port;
    prog.events.push_back({EventKind::ResetAssert, {}, {}});
    prog.events.push_back({EventKind::ResetDeassert, {}, {}});
    std::uint32_t mask = BitVec::mask(m.total_input_width());
    for (int i = 0; i < len; ++i) {
        StimulusEvent ev;
        ev.kind = EventKind::ApplyInput;
        std::uint32_t v = std::uint32_t(rng()) & mask;
        int off = 0;
        for (const auto& [n, w] : m.inputs) {
            ev.drives.emplace_back(n, (v >> off) & BitVec::mask(w));
            off += w;
        }
        prog.events.push_back(std::move(ev));
    }
    prog.events.push_back({EventKind::Finish, {}, {}});
    return prog;
}

void BM_ParseRtl(benchmark::State& state) {
    SourceUnit src = fsm16_source();
    for (auto _ : state)
        benchmark::DoNotOptimize(parse_module(src));
}
BENCHMARK(BM_ParseRtl);

void BM_ExtractFsm(benchmark::State& state) {
    ModuleDecl mod = parse_module(fsm16_source());
    for (auto _ : state)
        benchmark::DoNotOptimize(extract_fsm(mod));
}
BENCHMARK(BM_ExtractFsm);

void BM_Simulate(benchmark::State& state) {
    FsmModel m = fsm16_model();
    StimulusProgram prog = random_walk(m, int(state.range(0)), 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate(m, prog, int(state.range(0)) + 8));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(64)->Arg(1024);

void BM_Accumulate(benchmark::State& state) {
    FsmModel m = fsm16_model();
    Trace tr = simulate(m, random_walk(m, 1024, 2), 2048);
    for (auto _ : state)
        benchmark::DoNotOptimize(accumulate(m, {tr}));
}
BENCHMARK(BM_Accumulate);

void BM_PlanCoverage(benchmark::State& state) {
    FsmModel m = fsm16_model();
    auto rt = reachable_transitions(m);
    std::set<int> all(rt.begin(), rt.end());
    for (auto _ : state)
        benchmark::DoNotOptimize(plan_coverage(m, all));
}
BENCHMARK(BM_PlanCoverage);

void BM_CheckChunk(benchmark::State& state) {
    FsmModel m = fsm16_model();
    Trace tr = simulate(m, random_walk(m, 256, 3), 512);
    for (auto _ : state)
        benchmark::DoNotOptimize(check_chunk(m, m.reset_state, tr.records,
                                             CheckMode::IOPairs));
}
BENCHMARK(BM_CheckChunk);

void BM_GuidedLoop(benchmark::State& state) {
    SourceUnit dut = fsm16_source();
    FsmModel m = fsm16_model();
    for (auto _ : state) {
        auto backend = make_oracle_backend(m);
        LoopConfig cfg;
        benchmark::DoNotOptimize(run_testbench_loop(dut, *backend, cfg));
    }
}
BENCHMARK(BM_GuidedLoop);

} // namespace

BENCHMARK_MAIN();
