// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsmcov/fsm.hpp"

namespace fsmcov {

enum class MutationKind {
    RetargetTransition, // point one transition at a different successor
    SwapOutputs,        // change one state's (Moore) or transition's output
    FlipGuardLiteral,   // move one input vector between sibling guards
    WrongResetState     // start in the wrong state
};

std::string mutation_kind_name(MutationKind k);

struct Mutation {
    MutationKind kind = MutationKind::RetargetTransition;
    int site = 0;              // transition id, or state id for WrongResetState
    std::uint32_t payload = 0; // new target state / new output / moved vector
    std::uint64_t seed = 0;
};

/// How divergence is observed when searching for a witness.
enum class ObservationMode { Outputs, StateLabels };

struct MutantRecord {
    std::string golden_id;
    Mutation mutation;
    FsmModel mutant;
    bool distinguishable = false;
    std::vector<std::uint32_t> witness; // diverges exactly at its last cycle
};

/// Applies one mutation; the result still satisfies every model invariant.
/// Throws InvalidSite / IdentityMutation.
FsmModel inject(const FsmModel& golden, const Mutation& mutation);

/// Shortest input sequence after which the two machines observably differ
/// (BFS over the product machine), or nullopt within the horizon.
/// Throws InterfaceMismatch.
std::optional<std::vector<std::uint32_t>>
distinguishing_witness(const FsmModel& golden, const FsmModel& mutant,
                       int horizon, ObservationMode mode = ObservationMode::Outputs);

inline int default_witness_horizon(const FsmModel& m) {
    return 4 * static_cast<int>(m.states.size());
}

/// Seed-deterministic mutation choice, resampled (bounded) until the mutant
/// is distinguishable within the default horizon. Throws
/// NoDistinguishableMutant.
Mutation sample_mutation(const FsmModel& golden, std::uint64_t seed);

std::string mutant_to_json(const MutantRecord& r);

} // namespace fsmcov
