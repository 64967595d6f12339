// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "fsmcov/parser.hpp"
#include "fsmcov/sim.hpp"
#include "testutil.hpp"

using namespace fsmcov;
using testutil::repo_path;

namespace {
FsmModel load(const std::string& rel) {
    SourceUnit su{rel, read_file(repo_path(rel)), SourceKind::Rtl};
    return extract_fsm(parse_module(su));
}
} // namespace

TEST_CASE("simulation records reset cycles and per-cycle stepping") {
    FsmModel m = load("corpus/fsm16.v");
    std::mt19937_64 rng(1);
    StimulusProgram prog;
    prog.reset_net = m.reset_port;
    prog.events.push_back({EventKind::ResetAssert, {}, {}});
    prog.events.push_back({EventKind::ResetDeassert, {}, {}});
    for (std::uint32_t v : {1u, 1u, 0u})
        prog.events.push_back({EventKind::ApplyInput, {{"inp", v}}, {}});
    prog.events.push_back({EventKind::Finish, {}, {}});
    Trace tr = simulate(m, prog);
    REQUIRE(tr.records.size() == 4);
    CHECK(tr.finished);
    CHECK(tr.records[0].reset_active);
    CHECK(tr.records[1].state == m.reset_state);
    // A --1--> B --1--> D; outputs are per-state (out2 high in B and D).
    CHECK(m.states[tr.records[2].state].label == "B");
    CHECK(m.states[tr.records[3].state].label == "D");
    CHECK(tr.records[2].outputs == 0b10);
    CHECK(tr.records[3].outputs == 0b10);
}

TEST_CASE("mealy outputs follow the inputs combinationally") {
    FsmModel m = load("corpus/seq1011.v");
    CHECK(m.style == FsmStyle::Mealy);
    StimulusProgram prog;
    prog.reset_net = m.reset_port;
    prog.events.push_back({EventKind::ResetAssert, {}, {}});
    prog.events.push_back({EventKind::ResetDeassert, {}, {}});
    for (std::uint32_t v : {1u, 0u, 1u, 1u})
        prog.events.push_back({EventKind::ApplyInput, {{"in", v}}, {}});
    prog.events.push_back({EventKind::Finish, {}, {}});
    Trace tr = simulate(m, prog);
    REQUIRE(tr.records.size() == 5);
    // The detector pulses exactly when the fourth symbol completes 1011.
    CHECK(tr.records[1].outputs == 0);
    CHECK(tr.records[2].outputs == 0);
    CHECK(tr.records[3].outputs == 0);
    CHECK(tr.records[4].outputs == 1);
}

TEST_CASE("the cycle cap truncates runaway programs") {
    FsmModel m = load("corpus/gate2.v");
    std::mt19937_64 rng(2);
    StimulusProgram prog = testutil::random_program(rng, m, 500);
    Trace tr = simulate(m, prog, 100);
    CHECK(tr.records.size() == 100);
    CHECK_FALSE(tr.finished);
}

TEST_CASE("simulator agrees with the reference interpreter") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        FsmModel m = testutil::random_model(rng);
        StimulusProgram prog =
            testutil::random_program(rng, m, 1 + int(rng() % 40), true);
        CHECK(testutil::traces_equal(simulate(m, prog),
                                     testutil::ref_simulate(m, prog)));
    }
}

TEST_CASE("trace serialization carries every record") {
    FsmModel m = load("corpus/router4.v");
    std::mt19937_64 rng(4);
    StimulusProgram prog = testutil::random_program(rng, m, 6);
    Trace tr = simulate(m, prog);
    std::string csv = trace_to_csv(m, tr);
    // Header plus one row per record.
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          static_cast<long>(tr.records.size()) + 1);
    std::string js = trace_to_json(m, tr);
    CHECK(js.find("\"records\"") != std::string::npos);
    auto pairs = trace_to_io_pairs(m, tr);
    CHECK(pairs.size() == 6); // non-reset cycles only
    auto seq = trace_to_state_sequence(m, tr);
    CHECK(seq.size() == tr.records.size());
    CHECK(seq.front() == "A");
}
