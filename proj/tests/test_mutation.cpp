// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "fsmcov/mutation.hpp"
#include "fsmcov/parser.hpp"
#include "testutil.hpp"

using namespace fsmcov;
using testutil::repo_path;

namespace {
FsmModel load(const std::string& rel) {
    SourceUnit su{rel, read_file(repo_path(rel)), SourceKind::Rtl};
    return extract_fsm(parse_module(su));
}

Mutation make(MutationKind k, int site, std::uint32_t payload) {
    Mutation mu;
    mu.kind = k;
    mu.site = site;
    mu.payload = payload;
    return mu;
}
} // namespace

TEST_CASE("retargeting moves exactly one transition") {
    FsmModel golden = load("corpus/fsm16.v");
    FsmModel mutant =
        inject(golden, make(MutationKind::RetargetTransition, 7, 4));
    REQUIRE(mutant.transitions.size() == golden.transitions.size());
    int changed = 0;
    for (std::size_t i = 0; i < golden.transitions.size(); ++i) {
        if (golden.transitions[i].from != mutant.transitions[i].from ||
            golden.transitions[i].to != mutant.transitions[i].to)
            ++changed;
    }
    CHECK(changed == 1);
    mutant.canonicalize(); // the mutant still satisfies the model invariants
}

TEST_CASE("output swaps change observations but not structure") {
    FsmModel golden = load("corpus/fsm16.v");
    FsmModel mutant = inject(golden, make(MutationKind::SwapOutputs, 4, 0));
    for (std::size_t i = 0; i < golden.transitions.size(); ++i) {
        CHECK(golden.transitions[i].from == mutant.transitions[i].from);
        CHECK(golden.transitions[i].to == mutant.transitions[i].to);
    }
    CHECK(golden.states[4].moore_output != mutant.states[4].moore_output);
}

TEST_CASE("a wrong reset state starts the mutant elsewhere") {
    FsmModel golden = load("corpus/gate2.v");
    FsmModel mutant = inject(golden, make(MutationKind::WrongResetState, 0, 1));
    CHECK(mutant.reset_state != golden.reset_state);
}

TEST_CASE("identity and out-of-range mutations are rejected") {
    FsmModel golden = load("corpus/fsm16.v");
    // Retargeting a transition onto its existing successor changes nothing.
    int to = golden.transitions[0].to;
    CHECK_THROWS_AS((void)inject(golden, make(MutationKind::RetargetTransition,
                                              0, std::uint32_t(to))),
                    DiagError);
    CHECK_THROWS_AS(
        (void)inject(golden, make(MutationKind::RetargetTransition, 999, 0)),
        DiagError);
}

TEST_CASE("a distinguishing witness ends on the first observable divergence") {
    std::mt19937_64 rng(41);
    int verified = 0;
    for (int trial = 0; trial < 60; ++trial) {
        FsmModel golden = testutil::random_model(rng);
        Mutation mu;
        try {
            mu = sample_mutation(golden, rng());
        } catch (const DiagError&) {
            continue; // no distinguishable mutant in this machine
        }
        FsmModel mutant = inject(golden, mu);
        auto w = distinguishing_witness(golden, mutant,
                                        default_witness_horizon(golden));
        REQUIRE(w.has_value());
        int gs = golden.reset_state, ms = mutant.reset_state;
        for (std::size_t i = 0; i < w->size(); ++i) {
            bool differ = golden.output_for(gs, (*w)[i]).value !=
                          mutant.output_for(ms, (*w)[i]).value;
            if (i + 1 < w->size())
                CHECK_FALSE(differ); // divergence only at the last cycle
            else
                CHECK(differ);
            gs = golden.step(gs, (*w)[i]);
            ms = mutant.step(ms, (*w)[i]);
        }
        ++verified;
    }
    CHECK(verified > 30);
}

TEST_CASE("identical machines admit no witness") {
    FsmModel m = load("corpus/router4.v");
    CHECK_FALSE(
        distinguishing_witness(m, m, default_witness_horizon(m)).has_value());
}

TEST_CASE("witness search demands matching interfaces") {
    FsmModel a = load("corpus/router4.v");
    FsmModel b = load("corpus/fsm16.v");
    CHECK_THROWS_AS((void)distinguishing_witness(a, b, 8), DiagError);
}

TEST_CASE("mutation sampling is seed-deterministic and distinguishable") {
    FsmModel golden = load("corpus/counter8.v");
    Mutation a = sample_mutation(golden, 97);
    Mutation b = sample_mutation(golden, 97);
    CHECK(a.kind == b.kind);
    CHECK(a.site == b.site);
    CHECK(a.payload == b.payload);
    FsmModel mutant = inject(golden, a);
    CHECK(distinguishing_witness(golden, mutant,
                                 default_witness_horizon(golden))
              .has_value());
}

TEST_CASE("mutant records serialize with their witness") {
    FsmModel golden = load("corpus/gate2.v");
    MutantRecord rec;
    rec.golden_id = golden.name;
    rec.mutation = sample_mutation(golden, 5);
    rec.mutant = inject(golden, rec.mutation);
    auto w = distinguishing_witness(golden, rec.mutant,
                                    default_witness_horizon(golden));
    REQUIRE(w.has_value());
    rec.distinguishable = true;
    rec.witness = *w;
    std::string js = mutant_to_json(rec);
    CHECK(js.find("\"witness\"") != std::string::npos);
    CHECK(js.find("gate2") != std::string::npos);
}
