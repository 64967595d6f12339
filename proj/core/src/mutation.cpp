// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <deque>
#include <map>
#include <random>

#include <json.hpp>

#include "fsmcov/mutation.hpp"

namespace fsmcov {
namespace {

Guard guard_for_vectors(const std::vector<std::uint32_t>& vs, int input_width) {
    std::uint32_t diff = 0;
    for (std::uint32_t v : vs) diff |= v ^ vs[0];
    int free_bits = __builtin_popcount(diff);
    if (vs.size() == (1u << free_bits)) {
        std::vector<Guard::Literal> lits;
        for (int b = 0; b < input_width; ++b)
            if (!((diff >> b) & 1u))
                lits.push_back({b, ((vs[0] >> b) & 1u) != 0});
        return Guard::cube(std::move(lits));
    }
    return Guard::explicit_set(vs);
}

} // namespace

std::string mutation_kind_name(MutationKind k) {
    switch (k) {
    case MutationKind::RetargetTransition: return "RetargetTransition";
    case MutationKind::SwapOutputs: return "SwapOutputs";
    case MutationKind::FlipGuardLiteral: return "FlipGuardLiteral";
    case MutationKind::WrongResetState: return "WrongResetState";
    }
    return "?";
}

FsmModel inject(const FsmModel& golden, const Mutation& mutation) {
    FsmModel m = golden;
    int nstates = static_cast<int>(m.states.size());
    switch (mutation.kind) {
    case MutationKind::RetargetTransition: {
        if (mutation.site < 0 ||
            mutation.site >= static_cast<int>(m.transitions.size()))
            raise("InvalidSite", "no such transition id");
        int new_to = static_cast<int>(mutation.payload);
        if (new_to < 0 || new_to >= nstates)
            raise("InvalidSite", "retarget payload is not a state id");
        if (new_to == m.transitions[mutation.site].to)
            raise("IdentityMutation", "retarget to the original successor");
        m.transitions[mutation.site].to = new_to;
        break;
    }
    case MutationKind::SwapOutputs: {
        int ow = m.total_output_width();
        BitVec next(mutation.payload, ow);
        if (m.style == FsmStyle::Moore) {
            if (mutation.site < 0 || mutation.site >= nstates)
                raise("InvalidSite", "no such state id");
            if (m.states[mutation.site].moore_output == next)
                raise("IdentityMutation", "output unchanged");
            m.states[mutation.site].moore_output = next;
        } else {
            if (mutation.site < 0 ||
                mutation.site >= static_cast<int>(m.transitions.size()))
                raise("InvalidSite", "no such transition id");
            if (m.transitions[mutation.site].output == next)
                raise("IdentityMutation", "output unchanged");
            m.transitions[mutation.site].output = next;
        }
        break;
    }
    case MutationKind::FlipGuardLiteral: {
        if (mutation.site < 0 ||
            mutation.site >= static_cast<int>(m.transitions.size()))
            raise("InvalidSite", "no such transition id");
        const Transition src = m.transitions[mutation.site];
        if (src.guard.kind == Guard::Kind::Default)
            raise("InvalidSite", "cannot move vectors out of a default guard");
        int state = src.from;
        if (m.outgoing[state].size() < 2)
            raise("InvalidSite", "state has no sibling guard to absorb the vector");
        auto sat = golden.satisfying_vectors(mutation.site);
        if (sat.size() < 2)
            raise("InvalidSite", "guard would become unsatisfiable");
        std::uint32_t moved = mutation.payload;
        if (std::find(sat.begin(), sat.end(), moved) == sat.end())
            raise("InvalidSite", "payload vector does not satisfy the guard");

        // Absorber: the state's default transition, else the lowest-id sibling.
        int absorber = -1;
        for (int tid : m.outgoing[state])
            if (m.transitions[tid].guard.kind == Guard::Kind::Default)
                absorber = tid;
        if (absorber < 0)
            for (int tid : m.outgoing[state])
                if (tid != mutation.site) {
                    absorber = tid;
                    break;
                }

        // Rebuild this state's transitions from per-vector ownership.
        struct Key {
            int to;
            std::uint32_t out;
            auto operator<=>(const Key&) const = default;
        };
        std::map<Key, std::vector<std::uint32_t>> groups;
        std::map<Key, int> lines;
        for (std::uint32_t v = 0; v < m.input_space(); ++v) {
            int tid = golden.transition_for(state, v);
            if (v == moved) tid = absorber;
            const Transition& t = golden.transitions[tid];
            Key k{t.to, t.output.value};
            groups[k].push_back(v);
            if (!lines.count(k)) lines[k] = t.line;
        }
        std::vector<Transition> rebuilt;
        for (const auto& t : m.transitions)
            if (t.from != state) rebuilt.push_back(t);
        auto largest = groups.begin();
        for (auto it = groups.begin(); it != groups.end(); ++it)
            if (it->second.size() > largest->second.size()) largest = it;
        int iw = m.total_input_width();
        int ow = m.total_output_width();
        for (auto it = groups.begin(); it != groups.end(); ++it) {
            Transition t;
            t.from = state;
            t.to = it->first.to;
            t.output = BitVec(it->first.out, ow);
            t.line = lines[it->first];
            if (it == largest && groups.size() > 1)
                t.guard = Guard::fallback();
            else if (groups.size() == 1)
                t.guard = Guard::cube({});
            else
                t.guard = guard_for_vectors(it->second, iw);
            rebuilt.push_back(std::move(t));
        }
        m.transitions = std::move(rebuilt);
        break;
    }
    case MutationKind::WrongResetState: {
        int next = static_cast<int>(mutation.payload);
        if (next < 0 || next >= nstates)
            raise("InvalidSite", "reset payload is not a state id");
        if (next == m.reset_state)
            raise("IdentityMutation", "reset state unchanged");
        m.reset_state = next;
        break;
    }
    }
    m.canonicalize();
    return m;
}

std::optional<std::vector<std::uint32_t>>
distinguishing_witness(const FsmModel& golden, const FsmModel& mutant,
                       int horizon, ObservationMode mode) {
    if (golden.inputs != mutant.inputs || golden.outputs != mutant.outputs ||
        golden.states.size() != mutant.states.size())
        raise("InterfaceMismatch",
              "golden and mutant machines have different interfaces");

    int n = static_cast<int>(golden.states.size());
    auto pack = [n](int g, int m) { return g * n + m; };
    std::uint32_t space = golden.input_space();

    int g0 = golden.reset_state, m0 = mutant.reset_state;
    if (mode == ObservationMode::StateLabels && g0 != m0)
        return std::vector<std::uint32_t>{0}; // visible in the first record

    std::vector<int> prev(n * n, -1);
    std::vector<std::uint32_t> via(n * n, 0);
    std::vector<int> depth(n * n, -1);
    std::deque<int> q;
    depth[pack(g0, m0)] = 0;
    q.push_back(pack(g0, m0));
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        int g = cur / n, mm = cur % n;
        if (depth[cur] >= horizon) continue;
        for (std::uint32_t v = 0; v < space; ++v) {
            bool diverges;
            int g2 = golden.step(g, v), m2 = mutant.step(mm, v);
            if (mode == ObservationMode::Outputs)
                diverges = golden.output_for(g, v).value !=
                           mutant.output_for(mm, v).value;
            else
                diverges = g2 != m2;
            if (diverges) {
                std::vector<std::uint32_t> path{v};
                for (int c = cur; prev[c] >= 0; c = prev[c])
                    path.push_back(via[c]);
                std::reverse(path.begin(), path.end());
                return path;
            }
            int nxt = pack(g2, m2);
            if (depth[nxt] < 0) {
                depth[nxt] = depth[cur] + 1;
                prev[nxt] = cur;
                via[nxt] = v;
                q.push_back(nxt);
            }
        }
    }
    return std::nullopt;
}

Mutation sample_mutation(const FsmModel& golden, std::uint64_t seed) {
    if (golden.states.size() < 2)
        raise("NoDistinguishableMutant", "machine has fewer than two states");
    std::mt19937_64 rng(seed);
    int horizon = default_witness_horizon(golden);
    int nstates = static_cast<int>(golden.states.size());
    int ntrans = static_cast<int>(golden.transitions.size());
    std::uint32_t out_space = 1u << golden.total_output_width();

    for (int attempt = 0; attempt < 64; ++attempt) {
        Mutation mu;
        mu.seed = seed;
        switch (rng() % 4) {
        case 0: {
            mu.kind = MutationKind::RetargetTransition;
            mu.site = static_cast<int>(rng() % ntrans);
            int old = golden.transitions[mu.site].to;
            mu.payload = static_cast<std::uint32_t>(
                (old + 1 + rng() % (nstates - 1)) % nstates);
            break;
        }
        case 1: {
            mu.kind = MutationKind::SwapOutputs;
            if (out_space < 2) continue;
            if (golden.style == FsmStyle::Moore) {
                mu.site = static_cast<int>(rng() % nstates);
                std::uint32_t old = golden.states[mu.site].moore_output.value;
                mu.payload = (old + 1 + rng() % (out_space - 1)) % out_space;
            } else {
                mu.site = static_cast<int>(rng() % ntrans);
                std::uint32_t old = golden.transitions[mu.site].output.value;
                mu.payload = (old + 1 + rng() % (out_space - 1)) % out_space;
            }
            break;
        }
        case 2: {
            mu.kind = MutationKind::FlipGuardLiteral;
            mu.site = static_cast<int>(rng() % ntrans);
            const Transition& t = golden.transitions[mu.site];
            if (t.guard.kind == Guard::Kind::Default ||
                golden.outgoing[t.from].size() < 2)
                continue;
            auto sat = golden.satisfying_vectors(mu.site);
            if (sat.size() < 2) continue;
            mu.payload = sat[rng() % sat.size()];
            break;
        }
        default: {
            mu.kind = MutationKind::WrongResetState;
            mu.site = 0;
            mu.payload = static_cast<std::uint32_t>(
                (golden.reset_state + 1 + rng() % (nstates - 1)) % nstates);
            break;
        }
        }
        try {
            FsmModel mutant = inject(golden, mu);
            if (distinguishing_witness(golden, mutant, horizon)) return mu;
        } catch (const DiagError&) {
            // invalid site for this machine shape; resample
        }
    }
    raise("NoDistinguishableMutant",
          golden.name + ": no distinguishable mutant found within the bound");
}

std::string mutant_to_json(const MutantRecord& r) {
    nlohmann::json j;
    j["format"] = 1;
    j["golden_id"] = r.golden_id;
    j["mutation"] = {{"kind", mutation_kind_name(r.mutation.kind)},
                     {"site", r.mutation.site},
                     {"payload", r.mutation.payload},
                     {"seed", r.mutation.seed}};
    j["distinguishable"] = r.distinguishable;
    j["witness"] = r.witness;
    j["mutant"] = nlohmann::json::parse(fsm_to_json(r.mutant));
    return j.dump(2) + "\n";
}

} // namespace fsmcov
