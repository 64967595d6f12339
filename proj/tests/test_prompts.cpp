// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fsmcov/loops.hpp"
#include "fsmcov/oracle.hpp"
#include "fsmcov/parser.hpp"
#include "fsmcov/prompts.hpp"
#include "testutil.hpp"

using namespace fsmcov;
using testutil::golden_path;
using testutil::repo_path;

namespace {
SourceUnit router() {
    return SourceUnit{"corpus/router4.v", read_file(repo_path("corpus/router4.v")),
                      SourceKind::Rtl};
}

std::vector<TraceRecord> fixture_records(const FsmModel& m) {
    (void)m;
    return {{0, false, 1, 0, 0}, {1, false, 1, 1, 0}, {2, false, 2, 2, 0}};
}
} // namespace

TEST_CASE("system prompt matches its golden") {
    ChatMessage msg = build_system_prompt(router());
    CHECK(msg.role == Role::System);
    CHECK(msg.content == read_file(golden_path("prompt_system.txt")));
}

TEST_CASE("coverage feedback prompt matches its golden") {
    ChatMessage msg = build_coverage_feedback_prompt(
        {"Transition from B to A", "Transition from C to A"});
    CHECK(msg.role == Role::User);
    CHECK(msg.content == read_file(golden_path("prompt_feedback.txt")));
}

TEST_CASE("state-sequence spec prompt matches its golden") {
    ChatMessage msg = build_trace_spec_prompt(
        "A -> B -> C -> D -> A",
        "A four-state request router: a request moves the machine out of idle; "
        "a priority flag drains immediately.");
    CHECK(msg.content == read_file(golden_path("prompt_trace_spec.txt")));
}

TEST_CASE("chunk prompt matches its golden") {
    FsmModel m = extract_fsm(parse_module(router()));
    std::string lines =
        format_chunk_lines(m, fixture_records(m), CheckMode::IOPairs);
    ChatMessage msg = build_chunk_prompt(2, lines, true);
    CHECK(msg.content == read_file(golden_path("prompt_chunk.txt")));
}

TEST_CASE("bitwise prompt matches its golden and validates the bit name") {
    FsmModel m = extract_fsm(parse_module(router()));
    std::string lines =
        format_chunk_lines(m, fixture_records(m), CheckMode::IOPairs);
    ChatMessage msg = build_bitwise_prompt(m, "out", lines);
    CHECK(msg.content == read_file(golden_path("prompt_bitwise.txt")));
    CHECK_THROWS_AS((void)build_bitwise_prompt(m, "nonexistent", lines),
                    DiagError);
}

TEST_CASE("an empty uncovered list is rejected") {
    CHECK_THROWS_AS((void)build_coverage_feedback_prompt({}), DiagError);
}

TEST_CASE("role names round-trip") {
    for (Role r : {Role::System, Role::User, Role::Assistant})
        CHECK(role_from_name(role_name(r)) == r);
}
