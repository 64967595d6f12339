// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the test suites: an independent reference interpreter,
// an independent coverage recount, and seed-deterministic fuzz generators.
// The reference implementations deliberately share no code with the library
// so that agreement between the two is meaningful.
#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fsmcov/coverage.hpp"
#include "fsmcov/fsm.hpp"
#include "fsmcov/loops.hpp"
#include "fsmcov/sim.hpp"
#include "fsmcov/stimulus.hpp"

#ifndef FSMCOV_SOURCE_DIR
#define FSMCOV_SOURCE_DIR "."
#endif

namespace testutil {

using namespace fsmcov;

inline std::string repo_path(const std::string& rel) {
    return std::string(FSMCOV_SOURCE_DIR) + "/" + rel;
}

inline std::string golden_path(const std::string& name) {
    return repo_path("tests/goldens/" + name);
}

// Reference semantics ------------------------------------------------------

// Guard evaluation written from the definition rather than via
// Guard::matches: a cube is a conjunction of bit literals, an explicit set
// is a membership test, and a default only fires when no sibling does.
inline bool ref_guard_fires(const FsmModel& m, int tid, std::uint32_t input) {
    const Guard& g = m.transitions[tid].guard;
    switch (g.kind) {
    case Guard::Kind::Cube:
        for (const auto& lit : g.literals)
            if ((((input >> lit.bit) & 1u) != 0) != lit.value) return false;
        return true;
    case Guard::Kind::Explicit:
        return std::find(g.vectors.begin(), g.vectors.end(), input) !=
               g.vectors.end();
    case Guard::Kind::Default: {
        int from = m.transitions[tid].from;
        for (int other = 0; other < static_cast<int>(m.transitions.size());
             ++other) {
            if (other == tid || m.transitions[other].from != from) continue;
            if (m.transitions[other].guard.kind != Guard::Kind::Default &&
                ref_guard_fires(m, other, input))
                return false;
        }
        return true;
    }
    }
    return false;
}

inline int ref_transition(const FsmModel& m, int state, std::uint32_t input) {
    for (int tid = 0; tid < static_cast<int>(m.transitions.size()); ++tid)
        if (m.transitions[tid].from == state && ref_guard_fires(m, tid, input))
            return tid;
    return -1;
}

// Independent cycle-by-cycle interpretation of a stimulus program. Walks
// the event list directly: reset cycles pin the state, each ApplyInput
// samples the nets, emits one record, and steps.
inline Trace ref_simulate(const FsmModel& m, const StimulusProgram& program,
                          int max_cycles = kDefaultMaxCycles) {
    std::map<std::string, std::string> port_net;
    for (const auto& inst : program.instances)
        for (const auto& b : inst.bindings) port_net[b.port] = b.net;
    std::map<std::string, std::uint32_t> nets;
    auto sample = [&]() {
        std::uint32_t v = 0;
        int off = 0;
        for (const auto& [port, w] : m.inputs) {
            std::string net = port_net.count(port) ? port_net[port] : port;
            std::uint32_t raw = nets.count(net) ? nets[net] : 0u;
            v |= (raw & BitVec::mask(w)) << off;
            off += w;
        }
        return v;
    };
    auto observe = [&](int state, std::uint32_t input) {
        if (m.style == FsmStyle::Moore) return m.states[state].moore_output.value;
        int tid = ref_transition(m, state, input);
        return tid < 0 ? 0u : m.transitions[tid].output.value;
    };
    Trace out;
    out.dut_name = m.name;
    int state = m.reset_state;
    int cycle = 0;
    for (const auto& ev : program.events) {
        if (cycle >= max_cycles) return out;
        for (const auto& [net, v] : ev.drives) nets[net] = v;
        if (ev.kind == EventKind::ResetAssert) {
            state = m.reset_state;
            std::uint32_t in = sample();
            out.records.push_back({cycle++, true, in, state, observe(state, in)});
        } else if (ev.kind == EventKind::ApplyInput) {
            std::uint32_t in = sample();
            out.records.push_back({cycle++, false, in, state, observe(state, in)});
            int tid = ref_transition(m, state, in);
            if (tid >= 0) state = m.transitions[tid].to;
        } else if (ev.kind == EventKind::Finish) {
            out.finished = true;
            return out;
        }
    }
    return out;
}

inline bool traces_equal(const Trace& a, const Trace& b) {
    if (a.finished != b.finished || a.records.size() != b.records.size())
        return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& x = a.records[i];
        const auto& y = b.records[i];
        if (x.cycle != y.cycle || x.reset_active != y.reset_active ||
            x.inputs != y.inputs || x.state != y.state || x.outputs != y.outputs)
            return false;
    }
    return true;
}

// Independent coverage recount: slide a two-record window over each trace
// and collect the (from, to) pairs it witnesses, plus every visited state.
struct RecountResult {
    std::set<int> states;
    std::set<std::pair<int, int>> edges;
};

inline RecountResult recount(const FsmModel& m, const std::vector<Trace>& traces) {
    RecountResult out;
    for (const auto& t : traces) {
        for (std::size_t i = 0; i < t.records.size(); ++i) {
            const auto& cur = t.records[i];
            out.states.insert(cur.state);
            if (cur.reset_active || i + 1 >= t.records.size()) continue;
            const auto& nxt = t.records[i + 1];
            int to = nxt.reset_active ? m.reset_state : nxt.state;
            if (nxt.reset_active && m.edge_index(cur.state, to) < 0)
                continue; // reset jump, not a modeled edge
            out.edges.insert({cur.state, to});
        }
    }
    return out;
}

// Fuzz generators ----------------------------------------------------------

// Random deterministic, input-complete machine. Every input vector of each
// state gets an owner successor; the largest group per state becomes the
// default arm and the rest become explicit guards.
inline FsmModel random_model(std::mt19937_64& rng, int max_states = 6,
                             int max_input_bits = 3, int max_output_bits = 3,
                             bool allow_mealy = true) {
    FsmModel m;
    int n = 2 + static_cast<int>(rng() % (max_states - 1));
    int iw = 1 + static_cast<int>(rng() % max_input_bits);
    int ow = 1 + static_cast<int>(rng() % max_output_bits);
    m.name = "fuzz";
    m.state_reg = "state";
    m.inputs = {{"in", iw}};
    m.outputs = {{"out", ow}};
    m.style = allow_mealy && (rng() & 1) ? FsmStyle::Mealy : FsmStyle::Moore;
    m.reset_polarity = (rng() & 1) ? ResetPolarity::ActiveLow
                                   : ResetPolarity::ActiveHigh;
    int enc_w = 1;
    while ((1 << enc_w) < n) ++enc_w;
    for (int s = 0; s < n; ++s) {
        StateDef sd;
        sd.id = s;
        sd.label = "S" + std::to_string(s);
        sd.encoding = BitVec(static_cast<std::uint32_t>(s), enc_w);
        sd.moore_output = BitVec(static_cast<std::uint32_t>(rng()), ow);
        sd.line = 10 + s;
        m.states.push_back(sd);
    }
    std::uint32_t space = 1u << iw;
    for (int s = 0; s < n; ++s) {
        std::map<int, std::vector<std::uint32_t>> groups;
        for (std::uint32_t v = 0; v < space; ++v) {
            int to = (v == 0) ? (s + 1) % n // a guaranteed covering cycle
                              : static_cast<int>(rng() % n);
            groups[to].push_back(v);
        }
        int def_to = groups.begin()->first;
        for (const auto& [to, vecs] : groups)
            if (vecs.size() > groups[def_to].size()) def_to = to;
        for (const auto& [to, vecs] : groups) {
            Transition t;
            t.from = s;
            t.to = to;
            t.guard = (to == def_to) ? Guard::fallback()
                                     : Guard::explicit_set(vecs);
            t.output = BitVec(static_cast<std::uint32_t>(rng()), ow);
            t.line = 20 + s;
            m.transitions.push_back(t);
        }
    }
    m.reset_state = 0;
    m.canonicalize();
    return m;
}

// Reset, a marker, `len` random input applications, then finish. Drives the
// model's ports directly (no instance indirection).
inline StimulusProgram random_program(std::mt19937_64& rng, const FsmModel& m,
                                      int len, bool mid_resets = false) {
    StimulusProgram prog;
    prog.reset_net = m.reset_port;
    prog.reset_polarity = m.reset_polarity;
    prog.events.push_back({EventKind::ResetAssert, {}, {}});
    prog.events.push_back({EventKind::ResetDeassert, {}, {}});
    std::uint32_t space_mask = BitVec::mask(m.total_input_width());
    for (int i = 0; i < len; ++i) {
        if (mid_resets && i > 0 && rng() % 7 == 0) {
            prog.events.push_back({EventKind::ResetAssert, {}, {}});
            prog.events.push_back({EventKind::ResetDeassert, {}, {}});
            continue;
        }
        StimulusEvent ev;
        ev.kind = EventKind::ApplyInput;
        std::uint32_t v = static_cast<std::uint32_t>(rng()) & space_mask;
        int off = 0;
        for (const auto& [name, w] : m.inputs) {
            ev.drives.emplace_back(name, (v >> off) & BitVec::mask(w));
            off += w;
        }
        prog.events.push_back(std::move(ev));
    }
    prog.events.push_back({EventKind::Finish, {}, {}});
    return prog;
}

} // namespace testutil
