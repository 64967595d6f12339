// SPDX-License-Identifier: Apache-2.0
#include "fsmcov/parser.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>

namespace fsmcov {

// ------------------------------------------------------------- Expr builders

ExprPtr Expr::constant(BitVec v, bool sized, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Const;
    e->value = v;
    e->sized = sized;
    e->loc = loc;
    return e;
}
ExprPtr Expr::ref(std::string name, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ref;
    e->name = std::move(name);
    e->loc = loc;
    return e;
}
ExprPtr Expr::bit(std::string name, int idx, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Index;
    e->name = std::move(name);
    e->index = idx;
    e->loc = loc;
    return e;
}
ExprPtr Expr::bit_dyn(std::string name, ExprPtr idx, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Index;
    e->name = std::move(name);
    e->a = std::move(idx);
    e->loc = loc;
    return e;
}
ExprPtr Expr::unary(std::string op, ExprPtr a, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Unary;
    e->op = std::move(op);
    e->a = std::move(a);
    e->loc = loc;
    return e;
}
ExprPtr Expr::binary(std::string op, ExprPtr a, ExprPtr b, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->op = std::move(op);
    e->a = std::move(a);
    e->b = std::move(b);
    e->loc = loc;
    return e;
}
ExprPtr Expr::ternary(ExprPtr c, ExprPtr a, ExprPtr b, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ternary;
    e->c = std::move(c);
    e->a = std::move(a);
    e->b = std::move(b);
    e->loc = loc;
    return e;
}

// ------------------------------------------------------------ ModuleDecl api

const PortDecl* ModuleDecl::find_port(const std::string& n) const {
    for (const auto& p : ports)
        if (p.name == n) return &p;
    return nullptr;
}
const ParamDecl* ModuleDecl::find_param(const std::string& n) const {
    for (const auto& p : params)
        if (p.name == n) return &p;
    return nullptr;
}
int ModuleDecl::net_width(const std::string& n) const {
    if (const auto* p = find_port(n)) return p->width;
    for (const auto& d : nets)
        if (d.name == n) return d.width;
    return -1;
}
std::vector<PortDecl> ModuleDecl::inputs_excluding(const std::string& clk,
                                                   const std::string& rst) const {
    std::vector<PortDecl> out;
    for (const auto& p : ports)
        if (p.direction == PortDir::Input && p.name != clk && p.name != rst)
            out.push_back(p);
    return out;
}

// ------------------------------------------------------------------- parser

namespace {

const std::unordered_set<std::string> kUnsupported = {
    "generate", "endgenerate", "genvar", "function", "endfunction",
    "interface", "modport", "specify", "primitive", "fork",
};

class Parser {
public:
    Parser(const std::vector<Token>& toks, std::string file, SourceKind kind)
        : toks_(toks), file_(std::move(file)), kind_(kind) {}

    ModuleDecl parse() {
        expect_kw("module");
        mod_.name = expect_ident();
        if (accept_punct("(")) parse_port_list();
        expect_punct(";");
        while (!peek().is_kw("endmodule")) {
            if (peek().kind == TokKind::Eof)
                err("unexpected end of input, expected 'endmodule'");
            parse_item();
        }
        expect_kw("endmodule");
        validate();
        return std::move(mod_);
    }

private:
    const std::vector<Token>& toks_;
    std::string file_;
    SourceKind kind_;
    size_t pos_ = 0;
    ModuleDecl mod_;
    // Names legal in expressions beyond ports/nets/params (task formals,
    // loop integers).
    std::vector<std::string> local_names_;

    const Token& peek(size_t off = 0) const {
        size_t i = std::min(pos_ + off, toks_.size() - 1);
        return toks_[i];
    }
    const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    [[noreturn]] void err(const std::string& msg, SourceLoc loc = {}) const {
        raise("ParseError", msg, loc.line ? loc : peek().loc, file_);
    }
    [[noreturn]] void unsupported(const std::string& what, SourceLoc loc) const {
        raise("UnsupportedConstruct", what, loc, file_);
    }

    bool accept_kw(const char* t) {
        if (peek().is_kw(t)) { advance(); return true; }
        return false;
    }
    bool accept_punct(const char* t) {
        if (peek().is_punct(t)) { advance(); return true; }
        return false;
    }
    void expect_kw(const char* t) {
        if (!accept_kw(t)) err(std::string("expected '") + t + "', found '" + peek().text + "'");
    }
    void expect_punct(const char* t) {
        if (!accept_punct(t)) err(std::string("expected '") + t + "', found '" + peek().text + "'");
    }
    std::string expect_ident() {
        if (peek().kind != TokKind::Identifier)
            err("expected identifier, found '" + peek().text + "'");
        return advance().text;
    }

    int parse_range_opt() {
        // "[msb:lsb]" -> width, or 1 when absent.
        if (!accept_punct("[")) return 1;
        const Token& msbTok = peek();
        if (msbTok.kind != TokKind::Number) err("expected constant msb");
        int msb = static_cast<int>(advance().value);
        expect_punct(":");
        if (peek().kind != TokKind::Number) err("expected constant lsb");
        int lsb = static_cast<int>(advance().value);
        expect_punct("]");
        if (lsb != 0 || msb < lsb) err("only [N:0] ranges are supported", msbTok.loc);
        return msb - lsb + 1;
    }

    void add_port(PortDir dir, bool is_reg, int width, std::string name, SourceLoc loc) {
        mod_.ports.push_back(PortDecl{name, dir, width, loc});
        if (is_reg) mod_.nets.push_back(NetDecl{name, width, true, loc});
    }

    void parse_port_list() {
        if (accept_punct(")")) return;
        bool ansi = peek().is_kw("input") || peek().is_kw("output");
        if (ansi) {
            PortDir dir = PortDir::Input;
            bool is_reg = false;
            int width = 1;
            for (;;) {
                if (accept_kw("input")) dir = PortDir::Input;
                else if (accept_kw("output")) dir = PortDir::Output;
                is_reg = accept_kw("reg");
                accept_kw("wire");
                width = (peek().is_punct("[")) ? parse_range_opt() : 1;
                SourceLoc loc = peek().loc;
                add_port(dir, is_reg, width, expect_ident(), loc);
                if (!accept_punct(",")) break;
            }
            expect_punct(")");
        } else {
            // Non-ANSI: names only, directions come from body declarations.
            for (;;) {
                SourceLoc loc = peek().loc;
                std::string name = expect_ident();
                mod_.ports.push_back(PortDecl{name, PortDir::Input, 0, loc});
                if (!accept_punct(",")) break;
            }
            expect_punct(")");
        }
    }

    void parse_item() {
        const Token& t = peek();
        if (t.kind == TokKind::Identifier && kUnsupported.count(t.text))
            unsupported("'" + t.text + "' is outside the supported subset", t.loc);

        if (t.is_kw("input") || t.is_kw("output")) { parse_body_port_decl(); return; }
        if (t.is_kw("reg") || t.is_kw("wire")) { parse_net_decl(); return; }
        if (t.is_kw("parameter") || t.is_kw("localparam")) { parse_param_decl(); return; }
        if (t.is_kw("assign")) { parse_cont_assign(); return; }
        if (t.is_kw("always")) { parse_always(); return; }
        if (t.is_kw("initial")) {
            if (kind_ == SourceKind::Rtl)
                unsupported("initial block in RTL module", t.loc);
            advance();
            mod_.initial_blocks.push_back(parse_stmt());
            return;
        }
        if (t.is_kw("task")) {
            if (kind_ == SourceKind::Rtl)
                unsupported("task in RTL module", t.loc);
            parse_task();
            return;
        }
        if (t.is_kw("integer")) { parse_integer_decl(); return; }
        if (t.kind == TokKind::Identifier) {
            if (kind_ == SourceKind::Rtl)
                unsupported("module instantiation in RTL module", t.loc);
            parse_instance();
            return;
        }
        err("unexpected token '" + t.text + "' at module scope");
    }

    void parse_body_port_decl() {
        PortDir dir = accept_kw("input") ? PortDir::Input
                                         : (expect_kw("output"), PortDir::Output);
        bool is_reg = accept_kw("reg");
        accept_kw("wire");
        int width = parse_range_opt();
        for (;;) {
            SourceLoc loc = peek().loc;
            std::string name = expect_ident();
            // Non-ANSI style: fill in the header-declared stub.
            bool found = false;
            for (auto& p : mod_.ports) {
                if (p.name == name && p.width == 0) {
                    p.direction = dir;
                    p.width = width;
                    found = true;
                    break;
                }
            }
            if (!found) add_port(dir, false, width, name, loc);
            if (is_reg) mod_.nets.push_back(NetDecl{name, width, true, loc});
            if (!accept_punct(",")) break;
        }
        expect_punct(";");
    }

    void parse_net_decl() {
        bool is_reg = accept_kw("reg");
        if (!is_reg) expect_kw("wire");
        int width = parse_range_opt();
        for (;;) {
            SourceLoc loc = peek().loc;
            mod_.nets.push_back(NetDecl{expect_ident(), width, is_reg, loc});
            if (!accept_punct(",")) break;
        }
        expect_punct(";");
    }

    void parse_integer_decl() {
        expect_kw("integer");
        for (;;) {
            local_names_.push_back(expect_ident());
            mod_.integers.push_back(local_names_.back());
            if (!accept_punct(",")) break;
        }
        expect_punct(";");
    }

    void parse_param_decl() {
        bool local = accept_kw("localparam");
        if (!local) expect_kw("parameter");
        int width = parse_range_opt();
        for (;;) {
            SourceLoc loc = peek().loc;
            std::string name = expect_ident();
            expect_punct("=");
            if (peek().kind != TokKind::Number) err("expected constant parameter value");
            const Token& num = advance();
            int w = num.width > 0 ? num.width : (width > 1 ? width : 32);
            mod_.params.push_back(ParamDecl{name, BitVec(num.value, w), local, loc});
            if (!accept_punct(",")) break;
        }
        expect_punct(";");
    }

    void parse_cont_assign() {
        expect_kw("assign");
        SourceLoc loc = peek().loc;
        std::string lhs = expect_ident();
        int idx = -1;
        if (accept_punct("[")) {
            if (peek().kind != TokKind::Number) err("expected constant bit index");
            idx = static_cast<int>(advance().value);
            expect_punct("]");
        }
        expect_punct("=");
        ExprPtr rhs = parse_expr();
        expect_punct(";");
        mod_.assigns.push_back(ContAssign{std::move(lhs), idx, std::move(rhs), loc});
    }

    void parse_always() {
        SourceLoc loc = peek().loc;
        expect_kw("always");
        AlwaysBlock blk;
        blk.loc = loc;
        if (accept_punct("@")) {
            expect_punct("(");
            if (accept_punct("*")) {
                blk.sensitivity = Sensitivity::Combinational;
            } else if (peek().is_kw("posedge") || peek().is_kw("negedge")) {
                bool neg0 = accept_kw("negedge");
                if (!neg0) expect_kw("posedge");
                std::string sig0 = expect_ident();
                if (neg0) err("negedge clock is not supported", loc);
                blk.clock = sig0;
                blk.sensitivity = Sensitivity::PosedgeClk;
                if (accept_kw("or") || accept_punct(",")) {
                    bool neg1 = accept_kw("negedge");
                    if (!neg1) expect_kw("posedge");
                    blk.reset = expect_ident();
                    blk.reset_negedge = neg1;
                    blk.sensitivity = Sensitivity::PosedgeClkOrReset;
                }
            } else {
                // Plain sensitivity list -> combinational.
                blk.sensitivity = Sensitivity::Combinational;
                expect_ident();
                while (accept_kw("or") || accept_punct(",")) expect_ident();
            }
            expect_punct(")");
        } else {
            // Free-running block (testbench clock generator).
            if (kind_ == SourceKind::Rtl)
                unsupported("always block without sensitivity list in RTL", loc);
            blk.sensitivity = Sensitivity::Combinational;
        }
        blk.body = parse_stmt();
        mod_.always_blocks.push_back(std::move(blk));
    }

    void parse_task() {
        SourceLoc loc = peek().loc;
        expect_kw("task");
        TaskDecl task;
        task.loc = loc;
        task.name = expect_ident();
        if (accept_punct("(")) {
            if (!peek().is_punct(")")) {
                for (;;) {
                    expect_kw("input");
                    accept_kw("reg");
                    accept_kw("wire");
                    int width = parse_range_opt();
                    SourceLoc ploc = peek().loc;
                    task.params.push_back(NetDecl{expect_ident(), width, true, ploc});
                    if (!accept_punct(",")) break;
                }
            }
            expect_punct(")");
        }
        expect_punct(";");
        for (const auto& p : task.params) local_names_.push_back(p.name);
        while (peek().is_kw("integer")) parse_integer_decl();
        task.body = parse_stmt();
        expect_kw("endtask");
        mod_.tasks.push_back(std::move(task));
    }

    void parse_instance() {
        SourceLoc loc = peek().loc;
        Instance inst;
        inst.loc = loc;
        inst.module_name = expect_ident();
        inst.inst_name = expect_ident();
        expect_punct("(");
        if (!peek().is_punct(")")) {
            for (;;) {
                SourceLoc bloc = peek().loc;
                expect_punct(".");
                std::string port = expect_ident();
                expect_punct("(");
                std::string net = expect_ident();
                expect_punct(")");
                inst.bindings.push_back(PortBinding{std::move(port), std::move(net), bloc});
                if (!accept_punct(",")) break;
            }
        }
        expect_punct(")");
        expect_punct(";");
        mod_.instances.push_back(std::move(inst));
    }

    // -------------------------------------------------------------- statements

    StmtPtr parse_stmt() {
        const Token& t = peek();
        if (t.kind == TokKind::Identifier && kUnsupported.count(t.text))
            unsupported("'" + t.text + "' is outside the supported subset", t.loc);

        if (t.is_kw("begin")) {
            advance();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::Block;
            s->loc = t.loc;
            while (!peek().is_kw("end")) {
                if (peek().kind == TokKind::Eof)
                    err("unbalanced begin/end", t.loc);
                s->stmts.push_back(parse_stmt());
            }
            expect_kw("end");
            return s;
        }
        if (t.is_kw("if")) {
            advance();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::If;
            s->loc = t.loc;
            expect_punct("(");
            s->cond = parse_expr();
            expect_punct(")");
            s->then_body = parse_stmt();
            if (accept_kw("else")) s->else_body = parse_stmt();
            return s;
        }
        if (t.is_kw("case")) {
            advance();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::Case;
            s->loc = t.loc;
            expect_punct("(");
            s->selector = parse_expr();
            expect_punct(")");
            while (!peek().is_kw("endcase")) {
                if (peek().kind == TokKind::Eof) err("unterminated case", t.loc);
                if (peek().is_kw("default")) {
                    SourceLoc dloc = advance().loc;
                    accept_punct(":");
                    if (s->default_body)
                        err("multiple default arms in case", dloc);
                    s->default_body = parse_stmt();
                    continue;
                }
                CaseArm arm;
                arm.loc = peek().loc;
                for (;;) {
                    arm.labels.push_back(parse_primary());
                    if (!accept_punct(",")) break;
                }
                expect_punct(":");
                arm.body = parse_stmt();
                s->arms.push_back(std::move(arm));
            }
            expect_kw("endcase");
            return s;
        }
        if (t.is_punct("#")) {
            advance();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::Delay;
            s->loc = t.loc;
            if (peek().kind != TokKind::Number) err("expected delay amount");
            s->delay = static_cast<int>(advance().value);
            if (kind_ == SourceKind::Rtl)
                unsupported("delay inside RTL module", t.loc);
            if (accept_punct(";")) return s;
            s->inner = parse_stmt();
            return s;
        }
        if (t.kind == TokKind::SystemTask) {
            advance();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::SysCall;
            s->loc = t.loc;
            s->callee = t.text;
            if (accept_punct("(")) {
                if (!peek().is_punct(")")) {
                    for (;;) {
                        if (peek().kind == TokKind::String)
                            s->string_arg = advance().text;
                        else
                            s->args.push_back(parse_expr());
                        if (!accept_punct(",")) break;
                    }
                }
                expect_punct(")");
            }
            expect_punct(";");
            return s;
        }
        if (t.is_kw("for")) {
            advance();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::For;
            s->loc = t.loc;
            expect_punct("(");
            s->for_init = parse_assign_nosemi();
            expect_punct(";");
            s->cond = parse_expr();
            expect_punct(";");
            s->for_step = parse_assign_nosemi();
            expect_punct(")");
            s->then_body = parse_stmt();
            return s;
        }
        if (t.is_punct(";")) {
            advance();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::Null;
            s->loc = t.loc;
            return s;
        }
        if (t.kind == TokKind::Identifier) {
            // Assignment or task call.
            if (peek(1).is_punct("(")) {
                advance();
                auto s = std::make_shared<Stmt>();
                s->kind = StmtKind::TaskCall;
                s->loc = t.loc;
                s->callee = t.text;
                expect_punct("(");
                if (!peek().is_punct(")")) {
                    for (;;) {
                        s->args.push_back(parse_expr());
                        if (!accept_punct(",")) break;
                    }
                }
                expect_punct(")");
                expect_punct(";");
                return s;
            }
            auto s = parse_assign_nosemi();
            expect_punct(";");
            return s;
        }
        err("unexpected token '" + t.text + "' in statement");
    }

    StmtPtr parse_assign_nosemi() {
        auto s = std::make_shared<Stmt>();
        s->kind = StmtKind::Assign;
        s->loc = peek().loc;
        s->lhs = expect_ident();
        if (accept_punct("[")) {
            if (peek().kind != TokKind::Number) err("expected constant bit index");
            s->lhs_index = static_cast<int>(advance().value);
            expect_punct("]");
        }
        if (accept_punct("<=")) s->nonblocking = true;
        else expect_punct("=");
        s->rhs = parse_expr();
        return s;
    }

    // ------------------------------------------------------------- expressions

    ExprPtr parse_expr() { return parse_ternary(); }

    ExprPtr parse_ternary() {
        ExprPtr c = parse_binary(0);
        if (accept_punct("?")) {
            ExprPtr a = parse_ternary();
            expect_punct(":");
            ExprPtr b = parse_ternary();
            return Expr::ternary(std::move(c), std::move(a), std::move(b));
        }
        return c;
    }

    // Precedence levels, loosest first.
    static int prec_of(const std::string& op) {
        if (op == "||") return 1;
        if (op == "&&") return 2;
        if (op == "|") return 3;
        if (op == "^") return 4;
        if (op == "&") return 5;
        if (op == "==" || op == "!=") return 6;
        if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
        if (op == "<<" || op == ">>") return 8;
        if (op == "+" || op == "-") return 9;
        return -1;
    }

    ExprPtr parse_binary(int min_prec) {
        ExprPtr lhs = parse_unary();
        for (;;) {
            if (peek().kind != TokKind::Punct) return lhs;
            std::string op = peek().text;
            int p = prec_of(op);
            if (p < 0 || p < min_prec) return lhs;
            SourceLoc loc = advance().loc;
            ExprPtr rhs = parse_binary(p + 1);
            lhs = Expr::binary(op, std::move(lhs), std::move(rhs), loc);
        }
    }

    ExprPtr parse_unary() {
        const Token& t = peek();
        if (t.is_punct("~") || t.is_punct("!") || t.is_punct("-") ||
            t.is_punct("&") || t.is_punct("|") || t.is_punct("^")) {
            advance();
            return Expr::unary(t.text, parse_unary(), t.loc);
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        if (t.kind == TokKind::Number) {
            advance();
            int w = t.width > 0 ? t.width : 32;
            return Expr::constant(BitVec(t.value, w), t.width > 0, t.loc);
        }
        if (t.is_punct("(")) {
            advance();
            ExprPtr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (t.kind == TokKind::Identifier) {
            advance();
            if (accept_punct("[")) {
                if (peek().kind == TokKind::Number && peek(1).is_punct("]")) {
                    int idx = static_cast<int>(advance().value);
                    expect_punct("]");
                    return Expr::bit(t.text, idx, t.loc);
                }
                ExprPtr idx = parse_expr();
                if (accept_punct(":"))
                    unsupported("part select in expression", t.loc);
                expect_punct("]");
                return Expr::bit_dyn(t.text, std::move(idx), t.loc);
            }
            return Expr::ref(t.text, t.loc);
        }
        if (t.is_punct("{"))
            unsupported("concatenation", t.loc);
        err("expected expression, found '" + t.text + "'");
    }

    // -------------------------------------------------------------- validation

    void collect_names(const Expr& e, std::vector<std::pair<std::string, SourceLoc>>& out) const {
        if (e.kind == ExprKind::Ref || e.kind == ExprKind::Index)
            out.emplace_back(e.name, e.loc);
        for (const ExprPtr& sub : {e.a, e.b, e.c})
            if (sub) collect_names(*sub, out);
    }

    void collect_names(const Stmt& s, std::vector<std::pair<std::string, SourceLoc>>& out) const {
        for (const ExprPtr& e : {s.cond, s.selector, s.rhs})
            if (e) collect_names(*e, out);
        for (const auto& e : s.args) collect_names(*e, out);
        if (!s.lhs.empty()) out.emplace_back(s.lhs, s.loc);
        for (const auto& arm : s.arms) {
            for (const auto& l : arm.labels) collect_names(*l, out);
            if (arm.body) collect_names(*arm.body, out);
        }
        for (const StmtPtr& sub :
             {s.then_body, s.else_body, s.default_body, s.inner, s.for_init, s.for_step})
            if (sub) collect_names(*sub, out);
        for (const auto& sub : s.stmts) collect_names(*sub, out);
    }

    void validate() const {
        std::set<std::string> seen;
        for (const auto& p : mod_.ports) {
            if (!seen.insert(p.name).second)
                err("duplicate port name '" + p.name + "'", p.loc);
            if (p.width <= 0)
                err("port '" + p.name + "' has no direction declaration", p.loc);
        }
        std::set<std::string> known;
        for (const auto& p : mod_.ports) known.insert(p.name);
        for (const auto& n : mod_.nets) known.insert(n.name);
        for (const auto& p : mod_.params) known.insert(p.name);
        for (const auto& n : local_names_) known.insert(n);
        for (const auto& i : mod_.instances) known.insert(i.inst_name);
        for (const auto& t : mod_.tasks) known.insert(t.name);

        std::vector<std::pair<std::string, SourceLoc>> refs;
        for (const auto& b : mod_.always_blocks) collect_names(*b.body, refs);
        for (const auto& b : mod_.initial_blocks) collect_names(*b, refs);
        for (const auto& t : mod_.tasks) collect_names(*t.body, refs);
        for (const auto& a : mod_.assigns) {
            refs.emplace_back(a.lhs, a.loc);
            collect_names(*a.rhs, refs);
        }
        for (const auto& [name, loc] : refs)
            if (!known.count(name))
                err("reference to undeclared net '" + name + "'", loc);
    }
};

} // namespace

ModuleDecl parse_module(const std::vector<Token>& tokens,
                        const std::string& file, SourceKind kind) {
    return Parser(tokens, file, kind).parse();
}

// ------------------------------------------------------------------ renderer

std::string render_expr(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Const:
        return e.sized ? e.value.to_verilog() : std::to_string(e.value.value);
    case ExprKind::Ref:
        return e.name;
    case ExprKind::Index:
        if (e.a) return e.name + "[" + render_expr(*e.a) + "]";
        return e.name + "[" + std::to_string(e.index) + "]";
    case ExprKind::Unary:
        return e.op + "(" + render_expr(*e.a) + ")";
    case ExprKind::Binary:
        return "(" + render_expr(*e.a) + " " + e.op + " " + render_expr(*e.b) + ")";
    case ExprKind::Ternary:
        return "(" + render_expr(*e.c) + " ? " + render_expr(*e.a) + " : " +
               render_expr(*e.b) + ")";
    }
    return "";
}

namespace {

void render_stmt(const Stmt& s, std::ostringstream& os, int indent) {
    std::string pad(indent * 2, ' ');
    switch (s.kind) {
    case StmtKind::Block:
        os << pad << "begin\n";
        for (const auto& sub : s.stmts) render_stmt(*sub, os, indent + 1);
        os << pad << "end\n";
        break;
    case StmtKind::If:
        os << pad << "if (" << render_expr(*s.cond) << ")\n";
        render_stmt(*s.then_body, os, indent + 1);
        if (s.else_body) {
            os << pad << "else\n";
            render_stmt(*s.else_body, os, indent + 1);
        }
        break;
    case StmtKind::Case:
        os << pad << "case (" << render_expr(*s.selector) << ")\n";
        for (const auto& arm : s.arms) {
            os << pad << "  ";
            for (size_t i = 0; i < arm.labels.size(); ++i)
                os << (i ? ", " : "") << render_expr(*arm.labels[i]);
            os << ":\n";
            render_stmt(*arm.body, os, indent + 2);
        }
        if (s.default_body) {
            os << pad << "  default:\n";
            render_stmt(*s.default_body, os, indent + 2);
        }
        os << pad << "endcase\n";
        break;
    case StmtKind::Assign:
        os << pad << s.lhs;
        if (s.lhs_index >= 0) os << "[" << s.lhs_index << "]";
        os << (s.nonblocking ? " <= " : " = ") << render_expr(*s.rhs) << ";\n";
        break;
    case StmtKind::Delay:
        os << pad << "#" << s.delay;
        if (s.inner) {
            os << "\n";
            render_stmt(*s.inner, os, indent);
        } else {
            os << ";\n";
        }
        break;
    case StmtKind::TaskCall:
    case StmtKind::SysCall:
        os << pad << s.callee;
        if (!s.args.empty() || !s.string_arg.empty() || s.kind == StmtKind::TaskCall) {
            os << "(";
            bool first = true;
            if (!s.string_arg.empty()) {
                os << '"' << s.string_arg << '"';
                first = false;
            }
            for (const auto& a : s.args) {
                if (!first) os << ", ";
                os << render_expr(*a);
                first = false;
            }
            os << ")";
        }
        os << ";\n";
        break;
    case StmtKind::For: {
        std::ostringstream init, step;
        render_stmt(*s.for_init, init, 0);
        render_stmt(*s.for_step, step, 0);
        auto chop = [](std::string v) {
            while (!v.empty() && (v.back() == '\n' || v.back() == ';')) v.pop_back();
            return v;
        };
        os << pad << "for (" << chop(init.str()) << "; " << render_expr(*s.cond)
           << "; " << chop(step.str()) << ")\n";
        render_stmt(*s.then_body, os, indent + 1);
        break;
    }
    case StmtKind::Null:
        os << pad << ";\n";
        break;
    }
}

} // namespace

std::string render_module(const ModuleDecl& m) {
    std::ostringstream os;
    os << "module " << m.name << "(";
    for (size_t i = 0; i < m.ports.size(); ++i) {
        const auto& p = m.ports[i];
        if (i) os << ", ";
        os << (p.direction == PortDir::Input ? "input " : "output ");
        bool is_reg = false;
        for (const auto& n : m.nets)
            if (n.name == p.name && n.is_reg) is_reg = true;
        if (is_reg) os << "reg ";
        if (p.width > 1) os << "[" << p.width - 1 << ":0] ";
        os << p.name;
    }
    os << ");\n";
    for (const auto& p : m.params) {
        os << "  " << (p.localparam ? "localparam " : "parameter ");
        if (p.value.width > 1) os << "[" << p.value.width - 1 << ":0] ";
        os << p.name << " = " << p.value.to_verilog() << ";\n";
    }
    for (const auto& n : m.nets) {
        bool is_port = m.find_port(n.name) != nullptr;
        if (is_port) continue; // already rendered with the port
        os << "  " << (n.is_reg ? "reg " : "wire ");
        if (n.width > 1) os << "[" << n.width - 1 << ":0] ";
        os << n.name << ";\n";
    }
    for (const auto& a : m.assigns) {
        os << "  assign " << a.lhs;
        if (a.lhs_index >= 0) os << "[" << a.lhs_index << "]";
        os << " = " << render_expr(*a.rhs) << ";\n";
    }
    for (const auto& b : m.always_blocks) {
        os << "  always @(";
        switch (b.sensitivity) {
        case Sensitivity::Combinational: os << "*"; break;
        case Sensitivity::PosedgeClk: os << "posedge " << b.clock; break;
        case Sensitivity::PosedgeClkOrReset:
            os << "posedge " << b.clock << " or "
               << (b.reset_negedge ? "negedge " : "posedge ") << b.reset;
            break;
        }
        os << ")\n";
        render_stmt(*b.body, os, 1);
    }
    os << "endmodule\n";
    return os.str();
}

} // namespace fsmcov
