// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "fsmcov/fsm.hpp"
#include "fsmcov/parser.hpp"

namespace fsmcov {
namespace {

// ---------------------------------------------------------------- evaluation

struct Env {
    std::unordered_map<std::string, BitVec> vals;
    const ModuleDecl* mod = nullptr;

    BitVec get(const std::string& n, SourceLoc loc) const {
        auto it = vals.find(n);
        if (it != vals.end()) return it->second;
        if (const auto* p = mod->find_param(n)) return p->value;
        raise("ExtractError", "read of unknown signal '" + n + "'", loc);
    }
    void set(const std::string& n, BitVec v) { vals[n] = v; }
};

BitVec eval(const Expr& e, const Env& env) {
    switch (e.kind) {
    case ExprKind::Const:
        return e.value;
    case ExprKind::Ref:
        return env.get(e.name, e.loc);
    case ExprKind::Index: {
        int idx = e.a ? static_cast<int>(eval(*e.a, env).value) : e.index;
        BitVec v = env.get(e.name, e.loc);
        return BitVec(v.bit(idx), 1);
    }
    case ExprKind::Unary: {
        BitVec a = eval(*e.a, env);
        if (e.op == "~") return BitVec(~a.value & BitVec::mask(a.width), a.width);
        if (e.op == "!") return BitVec(a.value == 0, 1);
        if (e.op == "-")
            return BitVec((0u - a.value) & BitVec::mask(a.width), a.width);
        if (e.op == "&") return BitVec(a.value == BitVec::mask(a.width), 1);
        if (e.op == "|") return BitVec(a.value != 0, 1);
        if (e.op == "^") return BitVec(__builtin_popcount(a.value) & 1, 1);
        raise("ExtractError", "unknown unary operator " + e.op, e.loc);
    }
    case ExprKind::Binary: {
        BitVec a = eval(*e.a, env);
        if (e.op == "&&") return BitVec(a.value != 0 && eval(*e.b, env).value != 0, 1);
        if (e.op == "||") return BitVec(a.value != 0 || eval(*e.b, env).value != 0, 1);
        BitVec b = eval(*e.b, env);
        int w = std::max(a.width, b.width);
        std::uint32_t m = BitVec::mask(w);
        if (e.op == "==") return BitVec(a.value == b.value, 1);
        if (e.op == "!=") return BitVec(a.value != b.value, 1);
        if (e.op == "<") return BitVec(a.value < b.value, 1);
        if (e.op == ">") return BitVec(a.value > b.value, 1);
        if (e.op == "<=") return BitVec(a.value <= b.value, 1);
        if (e.op == ">=") return BitVec(a.value >= b.value, 1);
        if (e.op == "&") return BitVec(a.value & b.value, w);
        if (e.op == "|") return BitVec(a.value | b.value, w);
        if (e.op == "^") return BitVec(a.value ^ b.value, w);
        if (e.op == "+") return BitVec((a.value + b.value) & m, w);
        if (e.op == "-") return BitVec((a.value - b.value) & m, w);
        if (e.op == "<<")
            return BitVec(b.value >= 32 ? 0 : (a.value << b.value) & m, w);
        if (e.op == ">>") return BitVec(b.value >= 32 ? 0 : a.value >> b.value, w);
        raise("ExtractError", "unknown binary operator " + e.op, e.loc);
    }
    case ExprKind::Ternary:
        return eval(*e.c, env).value != 0 ? eval(*e.a, env) : eval(*e.b, env);
    }
    raise("ExtractError", "unreachable expression kind");
}

// Executes an RTL statement. Blocking assigns hit `env` immediately;
// nonblocking assigns land in `nb`. The last assignment (of either kind)
// to `track` has its source line recorded in `track_line`.
struct Exec {
    Env& env;
    std::unordered_map<std::string, BitVec> nb;
    std::string track;
    const std::set<std::string>* track_set = nullptr;
    int track_line = 0;

    void assign(const std::string& lhs, int lhs_index, BitVec v, bool nonblocking,
                SourceLoc loc) {
        int w = env.mod->net_width(lhs);
        if (w < 0) raise("ExtractError", "assignment to undeclared '" + lhs + "'", loc);
        BitVec cur = env.vals.count(lhs) ? env.vals[lhs] : BitVec(0, w);
        if (nonblocking && nb.count(lhs)) cur = nb[lhs];
        BitVec next = cur;
        next.width = w;
        if (lhs_index >= 0) {
            std::uint32_t bit = (v.value & 1u) << lhs_index;
            next.value = (next.value & ~(1u << lhs_index)) | bit;
        } else {
            next.value = v.value & BitVec::mask(w);
        }
        if (nonblocking)
            nb[lhs] = next;
        else
            env.set(lhs, next);
        if (lhs == track || (track_set && track_set->count(lhs)))
            track_line = loc.line;
    }

    void run(const Stmt& s) {
        switch (s.kind) {
        case StmtKind::Null:
            return;
        case StmtKind::Block:
            for (const auto& st : s.stmts) run(*st);
            return;
        case StmtKind::If:
            if (eval(*s.cond, env).value != 0) {
                if (s.then_body) run(*s.then_body);
            } else if (s.else_body) {
                run(*s.else_body);
            }
            return;
        case StmtKind::Case: {
            std::uint32_t sel = eval(*s.selector, env).value;
            for (const auto& arm : s.arms)
                for (const auto& lab : arm.labels)
                    if (eval(*lab, env).value == sel) {
                        if (arm.body) run(*arm.body);
                        return;
                    }
            if (s.default_body) run(*s.default_body);
            return;
        }
        case StmtKind::Assign:
            assign(s.lhs, s.lhs_index, eval(*s.rhs, env), s.nonblocking, s.loc);
            return;
        case StmtKind::SysCall:
            return; // $display and friends are no-ops here
        default:
            raise("UnsupportedConstruct", "statement not allowed in synthesizable code",
                  s.loc);
        }
    }
};

// ------------------------------------------------------------ static analysis

void collect_assigned(const Stmt& s, std::set<std::string>& out) {
    switch (s.kind) {
    case StmtKind::Block:
        for (const auto& st : s.stmts) collect_assigned(*st, out);
        break;
    case StmtKind::If:
        if (s.then_body) collect_assigned(*s.then_body, out);
        if (s.else_body) collect_assigned(*s.else_body, out);
        break;
    case StmtKind::Case:
        for (const auto& arm : s.arms)
            if (arm.body) collect_assigned(*arm.body, out);
        if (s.default_body) collect_assigned(*s.default_body, out);
        break;
    case StmtKind::Assign:
        out.insert(s.lhs);
        break;
    default:
        break;
    }
}

struct CaseInfo {
    const Stmt* stmt;
    std::string selector;
};

void collect_cases(const Stmt& s, std::vector<CaseInfo>& out) {
    switch (s.kind) {
    case StmtKind::Block:
        for (const auto& st : s.stmts) collect_cases(*st, out);
        break;
    case StmtKind::If:
        if (s.then_body) collect_cases(*s.then_body, out);
        if (s.else_body) collect_cases(*s.else_body, out);
        break;
    case StmtKind::Case:
        if (s.selector->kind == ExprKind::Ref) out.push_back({&s, s.selector->name});
        for (const auto& arm : s.arms)
            if (arm.body) collect_cases(*arm.body, out);
        if (s.default_body) collect_cases(*s.default_body, out);
        break;
    default:
        break;
    }
}

// Constant sources on the right-hand side of state assignments: parameter
// refs, sized constants, and ternary combinations thereof. Plain refs to a
// comb-driven reg are followed one level (two-process style).
struct EncodingWalk {
    const ModuleDecl& mod;
    std::set<std::string> aliases; // regs whose value feeds the state reg
    std::vector<std::pair<std::uint32_t, std::string>> found; // (value, label)
    std::set<std::uint32_t> seen;
    int width;

    void add(std::uint32_t v, const std::string& label) {
        if (seen.insert(v).second) found.emplace_back(v, label);
    }

    void rhs(const Expr& e) {
        switch (e.kind) {
        case ExprKind::Const:
            add(e.value.value & BitVec::mask(width), "");
            return;
        case ExprKind::Ref:
            if (const auto* p = mod.find_param(e.name)) {
                add(p->value.value & BitVec::mask(width), e.name);
                return;
            }
            aliases.insert(e.name);
            return;
        case ExprKind::Ternary:
            rhs(*e.a);
            rhs(*e.b);
            return;
        default:
            raise("NonConstantEncoding",
                  "state register assigned a non-constant expression", e.loc);
        }
    }

    void stmt(const Stmt& s, const std::set<std::string>& targets) {
        switch (s.kind) {
        case StmtKind::Block:
            for (const auto& st : s.stmts) stmt(*st, targets);
            break;
        case StmtKind::If:
            if (s.then_body) stmt(*s.then_body, targets);
            if (s.else_body) stmt(*s.else_body, targets);
            break;
        case StmtKind::Case:
            for (const auto& arm : s.arms)
                if (arm.body) stmt(*arm.body, targets);
            if (s.default_body) stmt(*s.default_body, targets);
            break;
        case StmtKind::Assign:
            if (targets.count(s.lhs)) rhs(*s.rhs);
            break;
        default:
            break;
        }
    }
};

std::string auto_label(std::uint32_t v) { return "S" + std::to_string(v); }

} // namespace

FsmModel extract_fsm(const ModuleDecl& dut, const ExtractOptions& opts) {
    // Clocked process.
    const AlwaysBlock* seq = nullptr;
    for (const auto& ab : dut.always_blocks) {
        if (ab.sensitivity == Sensitivity::Combinational) continue;
        if (seq) raise("UnsupportedConstruct",
                       "more than one clocked process", ab.loc);
        seq = &ab;
    }
    if (!seq) raise("NoStateRegisterFound", "module has no clocked process");
    std::string clk = seq->clock;

    // Reset signal and polarity.
    std::string rst = seq->reset;
    ResetPolarity polarity =
        seq->reset_negedge ? ResetPolarity::ActiveLow : ResetPolarity::ActiveHigh;
    if (rst.empty()) {
        // Synchronous reset: look at the top-level if of the clocked body.
        const Stmt* top = seq->body.get();
        while (top && top->kind == StmtKind::Block && top->stmts.size() == 1)
            top = top->stmts[0].get();
        if (top && top->kind == StmtKind::If) {
            const Expr& c = *top->cond;
            if (c.kind == ExprKind::Ref) {
                rst = c.name;
                polarity = ResetPolarity::ActiveHigh;
            } else if (c.kind == ExprKind::Unary && c.op == "!" &&
                       c.a->kind == ExprKind::Ref) {
                rst = c.a->name;
                polarity = ResetPolarity::ActiveLow;
            } else if (c.kind == ExprKind::Binary && c.op == "==" &&
                       c.a->kind == ExprKind::Ref &&
                       c.b->kind == ExprKind::Const) {
                rst = c.a->name;
                polarity = c.b->value.value ? ResetPolarity::ActiveHigh
                                            : ResetPolarity::ActiveLow;
            }
        }
        if (!rst.empty()) {
            const PortDecl* p = dut.find_port(rst);
            if (!p || p->direction != PortDir::Input || p->width != 1) rst.clear();
        }
    }
    if (rst.empty())
        raise("UnsupportedConstruct", "no reset condition found", seq->loc);

    // State register: the single reg assigned inside the clocked process.
    std::set<std::string> clocked_regs;
    collect_assigned(*seq->body, clocked_regs);
    std::vector<CaseInfo> cases;
    for (const auto& ab : dut.always_blocks) collect_cases(*ab.body, cases);

    std::vector<std::string> candidates(clocked_regs.begin(), clocked_regs.end());
    if (candidates.empty())
        raise("NoStateRegisterFound", "clocked process assigns no register",
              seq->loc);
    if (candidates.size() > 1) {
        // Prefer the one that drives a case statement.
        std::vector<std::string> cased;
        for (const auto& r : candidates)
            for (const auto& ci : cases)
                if (ci.selector == r) {
                    cased.push_back(r);
                    break;
                }
        if (cased.size() == 1)
            candidates = cased;
        else if (cased.size() > 1)
            raise("MultipleStateRegisters",
                  "several clocked registers drive case statements", seq->loc);
        else
            raise("MultipleStateRegisters",
                  "cannot single out the state register", seq->loc);
    }
    std::string state_reg = candidates[0];
    int sw = dut.net_width(state_reg);
    if (sw <= 0)
        raise("NoStateRegisterFound", "state register has no declaration");
    for (const auto& r : clocked_regs)
        if (r != state_reg)
            raise("UnsupportedConstruct",
                  "clocked process assigns extra register '" + r + "'", seq->loc);

    // Encodings and labels.
    EncodingWalk walk{dut, {}, {}, {}, sw};
    std::set<std::string> targets{state_reg};
    walk.stmt(*seq->body, targets);
    for (int pass = 0; pass < 4; ++pass) { // follow two-process aliases
        std::set<std::string> next_targets = walk.aliases;
        if (next_targets.empty()) break;
        walk.aliases.clear();
        for (const auto& ab : dut.always_blocks)
            if (ab.sensitivity == Sensitivity::Combinational)
                walk.stmt(*ab.body, next_targets);
        for (const auto& ca : dut.assigns)
            if (next_targets.count(ca.lhs)) walk.rhs(*ca.rhs);
    }
    std::set<std::string> state_vars = targets;
    // Case labels over the state var (or its comb alias) both name states and
    // pin down report line numbers.
    std::map<std::uint32_t, int> arm_lines;
    std::set<std::string> state_aliases;
    {
        EncodingWalk probe{dut, {}, {}, {}, sw};
        probe.stmt(*seq->body, targets); // repopulate aliases
        state_aliases = probe.aliases;
        std::set<std::string> alias_or_state = targets;
        for (const auto& a : probe.aliases) alias_or_state.insert(a);
        for (const auto& ci : cases) {
            bool on_state = alias_or_state.count(ci.selector) != 0;
            // Two-process: the comb case runs over the state reg directly.
            if (!on_state) continue;
            for (const auto& arm : ci.stmt->arms)
                for (const auto& lab : arm.labels) {
                    std::uint32_t v;
                    std::string label;
                    if (lab->kind == ExprKind::Const) {
                        v = lab->value.value & BitVec::mask(sw);
                    } else if (lab->kind == ExprKind::Ref &&
                               dut.find_param(lab->name)) {
                        v = dut.find_param(lab->name)->value.value & BitVec::mask(sw);
                        label = lab->name;
                    } else {
                        raise("NonConstantEncoding", "case label is not a constant",
                              arm.loc);
                    }
                    walk.add(v, label);
                    if (!label.empty()) {
                        // Keep the first label name for this encoding.
                        for (auto& [fv, fl] : walk.found)
                            if (fv == v && fl.empty()) fl = label;
                    }
                    if (!arm_lines.count(v)) arm_lines[v] = arm.loc.line;
                }
        }
    }
    if (walk.found.empty())
        raise("NonConstantEncoding", "no state encodings found");

    // Inputs and outputs (everything except clock and reset).
    FsmModel m;
    m.name = dut.name;
    m.state_reg = state_reg;
    m.clock_port = clk;
    m.reset_port = rst;
    m.reset_polarity = polarity;
    for (const auto& p : dut.ports) {
        if (p.name == clk || p.name == rst) continue;
        if (p.direction == PortDir::Input)
            m.inputs.emplace_back(p.name, p.width);
        else
            m.outputs.emplace_back(p.name, p.width);
    }
    int iw = m.total_input_width();
    int ow = m.total_output_width();
    if (iw == 0) raise("UnsupportedConstruct", "module has no data inputs");
    if (ow == 0) raise("UnsupportedConstruct", "module has no outputs");
    if (iw > opts.max_enum_input_width)
        raise("UnsupportedConstruct",
              "combined input width " + std::to_string(iw) +
                  " exceeds the enumeration limit of " +
                  std::to_string(opts.max_enum_input_width));

    int idx = 0;
    std::map<std::uint32_t, int> enc_to_id;
    // State ids follow ascending encoding order so reports list states the
    // way their localparam declarations do.
    std::sort(walk.found.begin(), walk.found.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [v, label] : walk.found) {
        StateDef s;
        s.id = idx;
        s.encoding = BitVec(v, sw);
        s.label = label.empty() ? auto_label(v) : label;
        s.line = arm_lines.count(v) ? arm_lines[v] : 17 + idx;
        enc_to_id[v] = idx;
        m.states.push_back(std::move(s));
        ++idx;
    }

    // One evaluation pass per (state, input vector).
    auto fresh_env = [&](std::uint32_t state_enc, std::uint32_t input,
                         bool reset_active) {
        Env env;
        env.mod = &dut;
        for (const auto& n : dut.nets) env.set(n.name, BitVec(0, n.width));
        for (const auto& p : dut.ports) env.set(p.name, BitVec(0, p.width));
        env.set(clk, BitVec(0, 1));
        bool high = polarity == ResetPolarity::ActiveHigh;
        env.set(rst, BitVec(reset_active == high, 1));
        int off = 0;
        for (const auto& [n, w] : m.inputs) {
            env.set(n, BitVec((input >> off) & BitVec::mask(w), w));
            off += w;
        }
        env.set(state_reg, BitVec(state_enc, sw));
        return env;
    };
    // Settles combinational logic; returns the line of the last assignment to
    // a state-reg alias (the two-process "next_state = X"), 0 when none.
    auto comb_settle = [&](Env& env) {
        int alias_line = 0;
        for (int pass = 0; pass < 3; ++pass) {
            for (const auto& ca : dut.assigns) {
                Exec ex{env};
                ex.track_set = &state_aliases;
                ex.assign(ca.lhs, ca.lhs_index, eval(*ca.rhs, env), false, ca.loc);
                if (pass == 0 && ex.track_line) alias_line = ex.track_line;
            }
            for (const auto& ab : dut.always_blocks)
                if (ab.sensitivity == Sensitivity::Combinational) {
                    Exec ex{env};
                    ex.track_set = &state_aliases;
                    ex.run(*ab.body);
                    if (pass == 0 && ex.track_line) alias_line = ex.track_line;
                }
        }
        return alias_line;
    };
    auto read_outputs = [&](Env& env) {
        std::uint32_t v = 0;
        int off = 0;
        for (const auto& [n, w] : m.outputs) {
            v |= (env.get(n, {}).value & BitVec::mask(w)) << off;
            off += w;
        }
        return BitVec(v, ow);
    };

    // Reset state.
    {
        Env env = fresh_env(m.states[0].encoding.value, 0, true);
        comb_settle(env);
        Exec ex{env};
        ex.track = state_reg;
        ex.run(*seq->body);
        BitVec nv = ex.nb.count(state_reg) ? ex.nb[state_reg] : env.get(state_reg, {});
        auto it = enc_to_id.find(nv.value);
        if (it == enc_to_id.end())
            raise("NonConstantEncoding", "reset state has an unknown encoding");
        m.reset_state = it->second;
    }

    // Transition function and outputs.
    struct Cell {
        int to;
        std::uint32_t out;
        int line;
    };
    std::uint32_t space = 1u << iw;
    std::vector<std::vector<Cell>> table(m.states.size(),
                                         std::vector<Cell>(space));
    for (size_t s = 0; s < m.states.size(); ++s) {
        for (std::uint32_t v = 0; v < space; ++v) {
            Env env = fresh_env(m.states[s].encoding.value, v, false);
            int alias_line = comb_settle(env);
            BitVec outv = read_outputs(env);
            Exec ex{env};
            ex.track = state_reg;
            ex.run(*seq->body);
            BitVec nv =
                ex.nb.count(state_reg) ? ex.nb[state_reg] : env.get(state_reg, {});
            auto it = enc_to_id.find(nv.value);
            if (it == enc_to_id.end())
                raise("NonConstantEncoding",
                      "next-state value " + BitVec(nv.value, sw).to_verilog() +
                          " is not a declared state");
            table[s][v] = {it->second, outv.value,
                           alias_line > 0 ? alias_line : ex.track_line};
        }
    }

    // Moore if outputs never depend on the inputs.
    bool moore = true;
    for (size_t s = 0; s < m.states.size() && moore; ++s)
        for (std::uint32_t v = 1; v < space; ++v)
            if (table[s][v].out != table[s][0].out) {
                moore = false;
                break;
            }
    m.style = moore ? FsmStyle::Moore : FsmStyle::Mealy;
    if (moore)
        for (size_t s = 0; s < m.states.size(); ++s)
            m.states[s].moore_output = BitVec(table[s][0].out, ow);

    // Group vectors into transitions: per state, by (next, mealy output).
    for (size_t s = 0; s < m.states.size(); ++s) {
        std::map<std::pair<int, std::uint32_t>, std::vector<std::uint32_t>> groups;
        std::map<std::pair<int, std::uint32_t>, int> lines;
        for (std::uint32_t v = 0; v < space; ++v) {
            const Cell& c = table[s][v];
            auto key = std::make_pair(c.to, moore ? 0u : c.out);
            groups[key].push_back(v);
            auto it = lines.find(key);
            int line = c.line;
            if (it == lines.end())
                lines[key] = line;
            else if (line > 0 && (it->second == 0 || line < it->second))
                it->second = line;
        }
        // Largest group takes the default guard.
        auto largest = groups.begin();
        for (auto it = groups.begin(); it != groups.end(); ++it)
            if (it->second.size() > largest->second.size()) largest = it;
        for (auto it = groups.begin(); it != groups.end(); ++it) {
            Transition t;
            t.from = static_cast<int>(s);
            t.to = it->first.first;
            t.output = BitVec(it->first.second, ow);
            t.line = lines[it->first] > 0
                         ? lines[it->first]
                         : 17 + static_cast<int>(m.transitions.size());
            if (it == largest && groups.size() > 1) {
                t.guard = Guard::fallback();
            } else if (groups.size() == 1) {
                t.guard = Guard::cube({}); // whole space
            } else {
                // Cube when the set is exactly a subcube, else explicit.
                const auto& vs = it->second;
                std::uint32_t diff = 0;
                for (std::uint32_t v : vs) diff |= v ^ vs[0];
                int free_bits = __builtin_popcount(diff);
                if (vs.size() == (1u << free_bits)) {
                    std::vector<Guard::Literal> lits;
                    for (int b = 0; b < iw; ++b)
                        if (!((diff >> b) & 1u))
                            lits.push_back({b, ((vs[0] >> b) & 1u) != 0});
                    t.guard = Guard::cube(std::move(lits));
                } else {
                    t.guard = Guard::explicit_set(vs);
                }
            }
            m.transitions.push_back(std::move(t));
        }
    }

    // Report convention: a state's line is the first place its value is
    // assigned to the state register, falling back to the case-arm line.
    {
        std::vector<int> first_assign(m.states.size(), 0);
        for (const auto& t : m.transitions)
            if (t.line > 0 &&
                (first_assign[t.to] == 0 || t.line < first_assign[t.to]))
                first_assign[t.to] = t.line;
        for (auto& s : m.states)
            if (first_assign[s.id] > 0) s.line = first_assign[s.id];
    }

    m.canonicalize();
    return m;
}

} // namespace fsmcov
