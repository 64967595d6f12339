// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsmcov/ast.hpp"
#include "fsmcov/bits.hpp"

namespace fsmcov {

enum class ResetPolarity { ActiveHigh, ActiveLow };
enum class FsmStyle { Moore, Mealy };

/// Transition guard over the concatenated input vector (port 0 at the LSB).
/// Cube guards are conjunctions of single-bit literals; Explicit guards list
/// their satisfying vectors outright; Default fires when nothing else does.
struct Guard {
    enum class Kind { Cube, Explicit, Default };

    struct Literal {
        int bit = 0;
        bool value = false;
        auto operator<=>(const Literal&) const = default;
    };

    Kind kind = Kind::Default;
    std::vector<Literal> literals;       // Cube, sorted by bit
    std::vector<std::uint32_t> vectors;  // Explicit, sorted ascending

    bool operator==(const Guard&) const = default;

    bool matches(std::uint32_t input) const; // Default never self-matches
    static Guard cube(std::vector<Literal> lits);
    static Guard explicit_set(std::vector<std::uint32_t> vecs);
    static Guard fallback() { return Guard{}; }
};

struct StateDef {
    int id = 0;
    std::string label;
    BitVec encoding;
    BitVec moore_output; // valid when style == Moore
    int line = 0;        // case-arm source line, or synthetic
};

struct Transition {
    int id = 0;
    int from = 0;
    int to = 0;
    Guard guard;
    BitVec output; // valid when style == Mealy
    int line = 0;
};

struct FsmModel {
    std::string name;
    std::string state_reg = "state";
    std::string clock_port = "clk";
    std::string reset_port = "rst";
    std::vector<std::pair<std::string, int>> inputs;  // (name, width), port order
    std::vector<std::pair<std::string, int>> outputs;
    std::vector<StateDef> states;
    int reset_state = 0;
    ResetPolarity reset_polarity = ResetPolarity::ActiveHigh;
    FsmStyle style = FsmStyle::Moore;
    std::vector<Transition> transitions; // canonical order, ids == indices
    std::vector<std::vector<int>> outgoing; // per-state ids, by canonicalize()

    int total_input_width() const;
    int total_output_width() const;
    std::uint32_t input_space() const { return 1u << total_input_width(); }

    const StateDef* find_state_by_label(const std::string& label) const;
    const StateDef* find_state_by_encoding(std::uint32_t enc) const;

    /// Index of the unique transition fired from `state` by `input`.
    /// Returns -1 only on a guard hole (a model invariant violation).
    int transition_for(int state, std::uint32_t input) const;
    int step(int state, std::uint32_t input) const;
    BitVec output_for(int state, std::uint32_t input) const;

    std::vector<std::uint32_t> satisfying_vectors(int tid) const;
    std::uint32_t any_satisfying(int tid) const;

    std::string guard_text(const Guard& g) const;
    std::string transition_text(int tid) const; // "A->B [guard]"

    /// Distinct (from, to) edges in canonical order; coverage is counted
    /// per edge, matching the report's row granularity.
    struct Edge {
        int from = 0;
        int to = 0;
        auto operator<=>(const Edge&) const = default;
    };
    std::vector<Edge> edges() const;
    int edge_index(int from, int to) const; // -1 if the model has no such edge
    int edge_of_transition(int tid) const;
    int first_transition_of_edge(int edge) const;

    /// Sorts transitions by (from, to, guard text), reassigns ids, and checks
    /// the exhaustive/exclusive guard invariant per state. Throws DiagError.
    void canonicalize();
};

// Graph queries -------------------------------------------------------------

std::vector<int> enumerate_transitions(const FsmModel& m);
std::vector<int> reachable_transitions(const FsmModel& m);
std::vector<int> reachable_states(const FsmModel& m);

/// Minimal-length input vector sequence driving the machine from `from` to the
/// source of `target` and then firing it. nullopt when unreachable.
std::optional<std::vector<std::uint32_t>>
shortest_input_path(const FsmModel& m, int from, int target_tid);

// Extraction ----------------------------------------------------------------

struct ExtractOptions {
    int max_enum_input_width = 12; // beyond this, guards must stay symbolic
};

/// Lifts an explicit FSM out of a parsed RTL module. Throws DiagError with
/// codes NoStateRegisterFound / MultipleStateRegisters / NonConstantEncoding /
/// UnsupportedGuard.
FsmModel extract_fsm(const ModuleDecl& dut, const ExtractOptions& opts = {});

// Serialization -------------------------------------------------------------

std::string fsm_to_json(const FsmModel& m);
FsmModel fsm_from_json(const std::string& json_text);
std::string fsm_to_dot(const FsmModel& m);

/// Renders the model back to subset RTL (single clocked process plus a
/// combinational output process). extract_fsm on the result reproduces the
/// model up to guard normalization.
std::string render_fsm_rtl(const FsmModel& m);

} // namespace fsmcov
