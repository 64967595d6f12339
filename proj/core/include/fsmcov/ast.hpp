// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fsmcov/bits.hpp"
#include "fsmcov/diag.hpp"

namespace fsmcov {

// ---------------------------------------------------------------- expressions

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { Const, Ref, Index, Unary, Binary, Ternary };

struct Expr {
    ExprKind kind;
    SourceLoc loc;

    // Const
    BitVec value;
    bool sized = false; // true when written as W'b...

    // Ref / Index. An Index with a != nullptr uses a dynamic index
    // expression (only seen inside testbench task bodies).
    std::string name;
    int index = 0;

    // Unary / Binary / Ternary
    std::string op; // "~", "!", "==", "&&", ...
    ExprPtr a, b, c;

    static ExprPtr constant(BitVec v, bool sized, SourceLoc loc = {});
    static ExprPtr ref(std::string name, SourceLoc loc = {});
    static ExprPtr bit(std::string name, int idx, SourceLoc loc = {});
    static ExprPtr bit_dyn(std::string name, ExprPtr idx, SourceLoc loc = {});
    static ExprPtr unary(std::string op, ExprPtr a, SourceLoc loc = {});
    static ExprPtr binary(std::string op, ExprPtr a, ExprPtr b, SourceLoc loc = {});
    static ExprPtr ternary(ExprPtr c, ExprPtr a, ExprPtr b, SourceLoc loc = {});
};

std::string render_expr(const Expr& e);

// ----------------------------------------------------------------- statements

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

enum class StmtKind { Block, If, Case, Assign, Delay, TaskCall, SysCall, For, Null };

struct CaseArm {
    std::vector<ExprPtr> labels; // constants or parameter refs
    StmtPtr body;
    SourceLoc loc;
};

struct Stmt {
    StmtKind kind = StmtKind::Null;
    SourceLoc loc;

    std::vector<StmtPtr> stmts; // Block

    ExprPtr cond;               // If / For condition
    StmtPtr then_body, else_body;

    ExprPtr selector;           // Case
    std::vector<CaseArm> arms;
    StmtPtr default_body;       // may be null

    // Assign: lhs[index] = rhs. index < 0 means whole net.
    std::string lhs;
    int lhs_index = -1;
    ExprPtr rhs;
    bool nonblocking = false;

    int delay = 0;              // Delay: #N, then `inner` (may be null)
    StmtPtr inner;

    std::string callee;         // TaskCall / SysCall
    std::vector<ExprPtr> args;
    std::string string_arg;     // SysCall with a string argument

    StmtPtr for_init, for_step; // For
};

// ---------------------------------------------------------------- declarations

enum class PortDir { Input, Output };

struct PortDecl {
    std::string name;
    PortDir direction = PortDir::Input;
    int width = 1;
    SourceLoc loc;
};

struct ParamDecl {
    std::string name;
    BitVec value;
    bool localparam = true;
    SourceLoc loc;
};

struct NetDecl {
    std::string name;
    int width = 1;
    bool is_reg = false;
    SourceLoc loc;
};

enum class Sensitivity { PosedgeClk, PosedgeClkOrReset, Combinational };

struct AlwaysBlock {
    Sensitivity sensitivity = Sensitivity::Combinational;
    std::string clock;       // posedge signal, empty for combinational
    std::string reset;       // async reset signal, empty if none
    bool reset_negedge = false;
    StmtPtr body;
    SourceLoc loc;
};

struct ContAssign {
    std::string lhs;
    int lhs_index = -1;
    ExprPtr rhs;
    SourceLoc loc;
};

struct PortBinding {
    std::string port; // DUT-side name
    std::string net;  // testbench-side expression (identifier)
    SourceLoc loc;
};

struct Instance {
    std::string module_name;
    std::string inst_name;
    std::vector<PortBinding> bindings;
    SourceLoc loc;
};

struct TaskDecl {
    std::string name;
    std::vector<NetDecl> params; // formal inputs, in order
    StmtPtr body;
    SourceLoc loc;
};

struct ModuleDecl {
    std::string name;
    std::vector<PortDecl> ports;
    std::vector<ParamDecl> params;
    std::vector<NetDecl> nets; // regs/wires declared in the body
    std::vector<AlwaysBlock> always_blocks;
    std::vector<ContAssign> assigns;

    // Testbench-dialect extras; empty for RTL modules.
    std::vector<Instance> instances;
    std::vector<StmtPtr> initial_blocks;
    std::vector<TaskDecl> tasks;
    std::vector<std::string> integers; // loop counters, task locals

    const PortDecl* find_port(const std::string& n) const;
    const ParamDecl* find_param(const std::string& n) const;
    int net_width(const std::string& n) const; // -1 if undeclared
    std::vector<PortDecl> inputs_excluding(const std::string& clk,
                                           const std::string& rst) const;
};

/// Renders a module back to Verilog text. Used by round-trip tests and the
/// corpus generator.
std::string render_module(const ModuleDecl& m);

} // namespace fsmcov
