// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsmcov/fsm.hpp"
#include "fsmcov/mutation.hpp"

namespace fsmcov {

struct CorpusEntry {
    std::string id;
    std::string rtl_path;  // relative to the manifest directory
    std::string spec_path; // natural-language design spec, same convention
    FsmModel golden;
    int input_bits = 0;
    int output_bits = 0;
    int states = 0;
    std::string level; // Easy / Medium / Hard
    std::optional<Mutation> canonical_mutation;
};

struct CorpusManifest {
    int format = 1;
    std::string root; // directory the relative paths resolve against
    std::vector<CorpusEntry> entries;
    std::vector<std::string> notes;
};

/// Size-class buckets the generator samples machines from.
struct CorpusProfile {
    struct Bucket {
        int weight = 1;
        int min_states = 2, max_states = 7;
        int min_inputs = 1, max_inputs = 3;
        int min_outputs = 1, max_outputs = 4;
    };
    std::vector<Bucket> buckets;

    /// Roughly the published corpus marginals: 45% Easy (2-7 states),
    /// 29% Medium (8-14), 26% Hard (15-28); 1-12 input and 1-16 output bits
    /// overall, skewed small.
    static CorpusProfile published_default();
};

/// Seed-deterministic synthetic corpus. Writes <id>.v and <id>.txt plus
/// manifest.json under out_dir; every machine is fully reachable by
/// construction and its RTL round-trips through extraction.
CorpusManifest generate_corpus(int count, std::uint64_t seed,
                               const CorpusProfile& profile,
                               const std::string& out_dir);

/// Loads and validates manifest.json: files exist, RTL extracts, declared
/// characteristics match the extracted model. Throws ManifestError listing
/// every failing entry.
CorpusManifest load_corpus(const std::string& manifest_path);

std::string manifest_to_json(const CorpusManifest& m);
void save_corpus(const CorpusManifest& m, const std::string& manifest_path);

} // namespace fsmcov
