// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_map>

#include "fsmcov/parser.hpp"
#include "fsmcov/stimulus.hpp"

namespace fsmcov {
namespace {

bool name_looks_like_reset(const std::string& n) {
    std::string low;
    for (char c : n) low += static_cast<char>(std::tolower(c));
    return low.find("rst") != std::string::npos ||
           low.find("reset") != std::string::npos;
}

struct Change {
    long t;
    int order; // tie-break: interpretation order
    std::string net;
    std::uint32_t value;
};

// Interprets the initial blocks of a testbench module on a virtual timeline.
struct TbInterp {
    const ModuleDecl& tb;
    std::vector<Change>& changes;
    long& finish_time;
    bool& dump_seen;
    bool& apply_input_called;

    long now = 0;
    int order = 0;
    std::unordered_map<std::string, std::uint32_t> env; // regs + formals
    int depth = 0;

    std::uint32_t eval(const Expr& e) {
        switch (e.kind) {
        case ExprKind::Const:
            return e.value.value;
        case ExprKind::Ref: {
            auto it = env.find(e.name);
            if (it != env.end()) return it->second;
            if (const auto* p = tb.find_param(e.name)) return p->value.value;
            raise("ParseError", "read of undriven testbench net '" + e.name + "'",
                  e.loc);
        }
        case ExprKind::Index: {
            std::uint32_t idx = e.a ? eval(*e.a) : static_cast<std::uint32_t>(e.index);
            return (eval(*Expr::ref(e.name, e.loc)) >> idx) & 1u;
        }
        case ExprKind::Unary: {
            std::uint32_t a = eval(*e.a);
            if (e.op == "~") return ~a;
            if (e.op == "!") return a == 0;
            if (e.op == "-") return 0u - a;
            raise("ParseError", "operator " + e.op + " not allowed in testbenches",
                  e.loc);
        }
        case ExprKind::Binary: {
            std::uint32_t a = eval(*e.a), b = eval(*e.b);
            // Testbench arithmetic is loop bookkeeping over `integer`s; treat
            // comparisons as signed so `i >= 0` countdown loops terminate.
            long sa = static_cast<long>(static_cast<std::int32_t>(a));
            long sb = static_cast<long>(static_cast<std::int32_t>(b));
            if (e.op == "+") return a + b;
            if (e.op == "-") return a - b;
            if (e.op == "==") return a == b;
            if (e.op == "!=") return a != b;
            if (e.op == "<") return sa < sb;
            if (e.op == ">") return sa > sb;
            if (e.op == "<=") return sa <= sb;
            if (e.op == ">=") return sa >= sb;
            raise("ParseError", "operator " + e.op + " not allowed in testbenches",
                  e.loc);
        }
        case ExprKind::Ternary:
            return eval(*e.c) ? eval(*e.a) : eval(*e.b);
        }
        raise("ParseError", "unsupported testbench expression");
    }

    void assign(const std::string& lhs, int lhs_index, std::uint32_t v,
                SourceLoc loc) {
        int w = tb.net_width(lhs);
        bool formal = w < 0 &&
                      (env.count(lhs) ||
                       std::find(tb.integers.begin(), tb.integers.end(), lhs) !=
                           tb.integers.end());
        if (w < 0 && !formal)
            raise("ParseError", "assignment to undeclared net '" + lhs + "'", loc);
        std::uint32_t cur = env.count(lhs) ? env[lhs] : 0;
        std::uint32_t next;
        if (lhs_index >= 0)
            next = (cur & ~(1u << lhs_index)) | ((v & 1u) << lhs_index);
        else
            next = w > 0 ? (v & BitVec::mask(w)) : v;
        env[lhs] = next;
        if (!formal) changes.push_back({now, order++, lhs, next});
    }

    void run(const Stmt& s) {
        if (finish_time >= 0) return; // $finish/$stop halts everything
        switch (s.kind) {
        case StmtKind::Null:
            return;
        case StmtKind::Block:
            for (const auto& st : s.stmts) run(*st);
            return;
        case StmtKind::Delay:
            now += s.delay;
            if (s.inner) run(*s.inner);
            return;
        case StmtKind::Assign:
            assign(s.lhs, s.lhs_index, eval(*s.rhs), s.loc);
            return;
        case StmtKind::If:
            if (eval(*s.cond))
                run(*s.then_body);
            else if (s.else_body)
                run(*s.else_body);
            return;
        case StmtKind::For: {
            run(*s.for_init);
            int guard = 0;
            while (eval(*s.cond)) {
                if (++guard > 100000)
                    raise("ParseError", "testbench for loop does not terminate",
                          s.loc);
                run(*s.then_body);
                if (finish_time >= 0) return;
                run(*s.for_step);
            }
            return;
        }
        case StmtKind::SysCall: {
            if (s.callee == "$finish" || s.callee == "$stop") {
                if (finish_time < 0) finish_time = now;
            } else if (s.callee == "$fsdbDumpfile" || s.callee == "$fsdbDumpvars" ||
                       s.callee == "$dumpfile" || s.callee == "$dumpvars") {
                dump_seen = true;
            }
            return; // $display and friends are no-ops
        }
        case StmtKind::TaskCall: {
            const TaskDecl* task = nullptr;
            for (const auto& t : tb.tasks)
                if (t.name == s.callee) task = &t;
            if (!task)
                raise("ParseError", "call of undefined task '" + s.callee + "'",
                      s.loc);
            if (s.args.size() != task->params.size())
                raise("ParseError", "wrong argument count for task '" + s.callee +
                                        "'", s.loc);
            if (++depth > 8)
                raise("ParseError", "task recursion in testbench", s.loc);
            if (s.callee.rfind("apply_input", 0) == 0) apply_input_called = true;
            // Formals shadow nothing in this dialect; save and restore anyway.
            std::vector<std::pair<std::string, std::optional<std::uint32_t>>> saved;
            for (size_t i = 0; i < task->params.size(); ++i) {
                const std::string& f = task->params[i].name;
                saved.emplace_back(f, env.count(f)
                                          ? std::optional<std::uint32_t>(env[f])
                                          : std::nullopt);
                env[f] = eval(*s.args[i]) &
                         BitVec::mask(task->params[i].width);
            }
            run(*task->body);
            for (auto& [f, old] : saved) {
                if (old)
                    env[f] = *old;
                else
                    env.erase(f);
            }
            --depth;
            return;
        }
        default:
            raise("ParseError", "statement not allowed in a testbench initial block",
                  s.loc);
        }
    }
};

} // namespace

StimulusProgram parse_testbench(const ModuleDecl& tb) {
    StimulusProgram prog;
    prog.tb_name = tb.name;
    prog.instances = tb.instances;

    // Clock generator: a free-running block toggling one net with a delay.
    for (const auto& ab : tb.always_blocks) {
        const Stmt* body = ab.body.get();
        while (body && body->kind == StmtKind::Block && body->stmts.size() == 1)
            body = body->stmts[0].get();
        if (body && body->kind == StmtKind::Delay && body->inner &&
            body->inner->kind == StmtKind::Assign) {
            const Stmt& a = *body->inner;
            if (a.rhs->kind == ExprKind::Unary && a.rhs->op == "~" &&
                a.rhs->a->kind == ExprKind::Ref && a.rhs->a->name == a.lhs) {
                prog.clock_net = a.lhs;
                prog.clock_half_period = body->delay;
            }
        }
    }
    if (prog.clock_net.empty())
        raise("ParseError", "testbench has no clock generator block");

    // Run the initial blocks.
    std::vector<Change> changes;
    long finish_time = -1;
    TbInterp interp{tb, changes, finish_time, prog.has_dump_commands,
                    prog.has_apply_input_task};
    for (const auto& n : tb.nets) interp.env[n.name] = 0;
    for (const auto& blk : tb.initial_blocks) {
        interp.now = 0;
        interp.run(*blk);
    }
    std::stable_sort(changes.begin(), changes.end(),
                     [](const Change& a, const Change& b) {
                         return a.t != b.t ? a.t < b.t : a.order < b.order;
                     });

    // Reset net: the first driven reg whose name suggests a reset. Its first
    // driven value defines the asserted level.
    for (const Change& c : changes) {
        if (c.net == prog.clock_net || !name_looks_like_reset(c.net)) continue;
        prog.reset_net = c.net;
        prog.reset_polarity =
            c.value ? ResetPolarity::ActiveHigh : ResetPolarity::ActiveLow;
        break;
    }
    if (prog.reset_net.empty())
        raise("ConventionError", "testbench never asserts a reset before applying inputs");
    if (finish_time < 0)
        raise("ConventionError", "testbench never reaches $finish or $stop");

    // Sample net values at every posedge before the finish time. The clock
    // starts low, so posedges land at odd multiples of the half period.
    std::map<std::string, std::uint32_t> cur;
    for (const auto& n : tb.nets) cur[n.name] = 0;
    std::uint32_t active = prog.reset_polarity == ResetPolarity::ActiveHigh ? 1u : 0u;
    size_t ci = 0;
    bool in_reset = false, saw_reset = false;
    long period = 2L * prog.clock_half_period;
    for (long t = prog.clock_half_period; t < finish_time; t += period) {
        while (ci < changes.size() && changes[ci].t <= t) {
            cur[changes[ci].net] = changes[ci].value;
            ++ci;
        }
        StimulusEvent ev;
        ev.kind = (cur[prog.reset_net] & 1u) == active ? EventKind::ResetAssert
                                                       : EventKind::ApplyInput;
        for (const auto& [net, v] : cur) {
            if (net == prog.clock_net) continue;
            if (ev.kind == EventKind::ApplyInput && net == prog.reset_net) continue;
            ev.drives.emplace_back(net, v);
        }
        if (ev.kind == EventKind::ResetAssert) {
            saw_reset = true;
            in_reset = true;
        } else {
            if (!saw_reset)
                raise("ConventionError",
                      "testbench applies inputs before asserting reset");
            if (in_reset) prog.events.push_back({EventKind::ResetDeassert, {}, {}});
            in_reset = false;
        }
        prog.events.push_back(std::move(ev));
    }
    if (!saw_reset)
        raise("ConventionError",
              "testbench never asserts a reset before applying inputs");
    if (in_reset) prog.events.push_back({EventKind::ResetDeassert, {}, {}});
    prog.events.push_back({EventKind::Finish, {}, {}});
    return prog;
}

std::vector<Diagnostic> validate_testbench_conventions(const StimulusProgram& program,
                                                       const ModuleDecl& dut) {
    std::vector<Diagnostic> out;
    auto add = [&](Severity sev, std::string code, std::string msg) {
        out.push_back(Diagnostic{sev, "", {}, std::move(code), std::move(msg)});
    };
    if (program.tb_name.rfind("tb", 0) != 0)
        add(Severity::Error, "ConventionError",
            "testbench module should be named tb (got '" + program.tb_name + "')");
    if (!program.has_dump_commands)
        add(Severity::Warning, "MissingDumpCommands",
            "testbench does not emit $fsdbDumpfile/$fsdbDumpvars");
    if (!program.has_apply_input_task)
        add(Severity::Error, "ConventionError",
            "inputs should be applied through apply_input() tasks");
    if (program.events.empty() || program.events.back().kind != EventKind::Finish)
        add(Severity::Error, "ConventionError",
            "test patterns should end with $finish");
    try {
        FsmModel golden = extract_fsm(dut);
        if (golden.reset_polarity != program.reset_polarity)
            add(Severity::Error, "PolarityMismatch",
                "testbench drives the reset with the wrong polarity for this DUT");
    } catch (const DiagError&) {
        // Not an extractable FSM; polarity agreement is unknowable here.
    }
    return out;
}

} // namespace fsmcov
