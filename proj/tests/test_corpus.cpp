// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <map>

#include "fsmcov/corpus.hpp"
#include "fsmcov/loops.hpp"
#include "fsmcov/mutation.hpp"
#include "testutil.hpp"

using namespace fsmcov;
namespace fs = std::filesystem;
using testutil::repo_path;

TEST_CASE("the shipped corpus loads clean and matches its manifest") {
    CorpusManifest m = load_corpus(repo_path("corpus/manifest.json"));
    CHECK(m.format == 1);
    CHECK(m.entries.size() == 10);
    std::map<std::string, const CorpusEntry*> by_id;
    for (const auto& e : m.entries) by_id[e.id] = &e;
    REQUIRE(by_id.count("fsm16"));
    const CorpusEntry& fsm16 = *by_id["fsm16"];
    CHECK(fsm16.states == 6);
    CHECK(fsm16.golden.transitions.size() == 12);
    CHECK(fsm16.level == "Easy");
    REQUIRE(fsm16.canonical_mutation.has_value());
    // Every canonical mutation is observably wrong.
    for (const auto& e : m.entries) {
        if (!e.canonical_mutation) continue;
        FsmModel mutant = inject(e.golden, *e.canonical_mutation);
        INFO(e.id);
        CHECK(distinguishing_witness(e.golden, mutant,
                                     default_witness_horizon(e.golden))
                  .has_value());
    }
}

TEST_CASE("generation is seed-deterministic byte for byte") {
    std::string d1 = "/tmp/fsmcov_test_gen_a";
    std::string d2 = "/tmp/fsmcov_test_gen_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    CorpusProfile p = CorpusProfile::published_default();
    CorpusManifest a = generate_corpus(8, 42, p, d1);
    CorpusManifest b = generate_corpus(8, 42, p, d2);
    CHECK(a.entries.size() == 8);
    CHECK(manifest_to_json(a) == manifest_to_json(b));
    for (const auto& e : a.entries) {
        CHECK(read_file(d1 + "/" + e.rtl_path) ==
              read_file(d2 + "/" + e.rtl_path));
        CHECK(read_file(d1 + "/" + e.spec_path) ==
              read_file(d2 + "/" + e.spec_path));
    }
    // A different seed produces different machines.
    std::string d3 = "/tmp/fsmcov_test_gen_c";
    fs::remove_all(d3);
    CorpusManifest c = generate_corpus(8, 43, p, d3);
    CHECK(manifest_to_json(a) != manifest_to_json(c));
}

TEST_CASE("generated corpora load back and report true characteristics") {
    std::string dir = "/tmp/fsmcov_test_gen_load";
    fs::remove_all(dir);
    generate_corpus(10, 7, CorpusProfile::published_default(), dir);
    CorpusManifest m = load_corpus(dir + "/manifest.json");
    CHECK(m.entries.size() == 10);
    for (const auto& e : m.entries) {
        CHECK(e.states == static_cast<int>(e.golden.states.size()));
        CHECK(e.input_bits == e.golden.total_input_width());
        CHECK(e.output_bits == e.golden.total_output_width());
        CHECK(e.level == level_for_states(e.states));
        CHECK(reachable_states(e.golden).size() == e.golden.states.size());
        CHECK_FALSE(read_file(dir + "/" + e.spec_path).empty());
    }
}

TEST_CASE("a missing RTL file fails loading with the entry named") {
    std::string dir = "/tmp/fsmcov_test_gen_missing";
    fs::remove_all(dir);
    generate_corpus(3, 9, CorpusProfile::published_default(), dir);
    CorpusManifest m = load_corpus(dir + "/manifest.json");
    fs::remove(dir + "/" + m.entries[1].rtl_path);
    try {
        load_corpus(dir + "/manifest.json");
        FAIL("expected a manifest error");
    } catch (const DiagError& e) {
        CHECK(e.diag().code == "ManifestError");
        CHECK(e.diag().message.find(m.entries[1].id) != std::string::npos);
    }
}

TEST_CASE("drifted characteristics fail loading") {
    std::string dir = "/tmp/fsmcov_test_gen_drift";
    fs::remove_all(dir);
    CorpusManifest m =
        generate_corpus(3, 11, CorpusProfile::published_default(), dir);
    m.entries[0].states += 1; // claim one more state than the RTL has
    save_corpus(m, dir + "/manifest.json");
    try {
        load_corpus(dir + "/manifest.json");
        FAIL("expected a manifest error");
    } catch (const DiagError& e) {
        CHECK(e.diag().code == "ManifestError");
        CHECK(e.diag().message.find(m.entries[0].id) != std::string::npos);
    }
}

TEST_CASE("duplicate ids fail loading") {
    std::string dir = "/tmp/fsmcov_test_gen_dup";
    fs::remove_all(dir);
    CorpusManifest m =
        generate_corpus(2, 13, CorpusProfile::published_default(), dir);
    m.entries[1].id = m.entries[0].id;
    save_corpus(m, dir + "/manifest.json");
    CHECK_THROWS_AS((void)load_corpus(dir + "/manifest.json"), DiagError);
}

TEST_CASE("the default profile fills all three difficulty tiers") {
    std::string dir = "/tmp/fsmcov_test_gen_tiers";
    fs::remove_all(dir);
    CorpusManifest m =
        generate_corpus(60, 5, CorpusProfile::published_default(), dir);
    std::map<std::string, int> tally;
    for (const auto& e : m.entries) ++tally[e.level];
    CHECK(tally["Easy"] > 0);
    CHECK(tally["Medium"] > 0);
    CHECK(tally["Hard"] > 0);
    CHECK(tally["Easy"] + tally["Medium"] + tally["Hard"] == 60);
    CHECK(tally["Easy"] > tally["Hard"]);
}
