// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "fsmcov/parser.hpp"
#include "fsmcov/sim.hpp"

namespace fsmcov {

std::string CompileDiagnostics::render() const {
    std::vector<Diagnostic> all = errors;
    all.insert(all.end(), warnings.begin(), warnings.end());
    std::stable_sort(all.begin(), all.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                         return a.loc < b.loc;
                     });
    return render_diagnostics(all);
}

CompileDiagnostics compile_check(const SourceUnit& tb_source,
                                 const ModuleDecl& dut) {
    CompileDiagnostics out;
    ModuleDecl tb;
    try {
        tb = parse_module(tokenize(tb_source), tb_source.path,
                          SourceKind::Testbench);
    } catch (const DiagError& e) {
        out.errors.push_back(e.diag());
        return out;
    }

    StimulusProgram prog;
    try {
        prog = parse_testbench(tb);
    } catch (const DiagError& e) {
        out.errors.push_back(e.diag());
        return out;
    }

    for (const auto& d : validate_testbench_conventions(prog, dut)) {
        if (d.severity == Severity::Error)
            out.errors.push_back(d);
        else
            out.warnings.push_back(d);
    }

    // Port bindings: every bound port must exist on the DUT, every bound net
    // in the testbench, and every DUT input must be driven.
    const Instance* uut = nullptr;
    for (const auto& inst : tb.instances)
        if (inst.module_name == dut.name) uut = &inst;
    if (!uut && !tb.instances.empty()) uut = &tb.instances.front();
    if (!uut) {
        out.errors.push_back(Diagnostic{Severity::Error, tb_source.path, {},
                                        "PortBindingError",
                                        "testbench does not instantiate the DUT"});
        return out;
    }
    std::unordered_map<std::string, std::string> bound; // port -> net
    for (const auto& b : uut->bindings) {
        if (!dut.find_port(b.port))
            out.errors.push_back(
                Diagnostic{Severity::Error, tb_source.path, b.loc,
                           "PortBindingError",
                           "DUT module '" + dut.name + "' has no port '" +
                               b.port + "'"});
        if (tb.net_width(b.net) < 0)
            out.errors.push_back(
                Diagnostic{Severity::Error, tb_source.path, b.loc,
                           "PortBindingError",
                           "testbench net '" + b.net + "' is not declared"});
        bound[b.port] = b.net;
    }
    for (const auto& p : dut.ports)
        if (p.direction == PortDir::Input && !bound.count(p.name))
            out.errors.push_back(
                Diagnostic{Severity::Error, tb_source.path, uut->loc,
                           "PortBindingError",
                           "DUT input '" + p.name + "' is not driven"});
    return out;
}

Trace simulate(const FsmModel& m, const StimulusProgram& program, int max_cycles) {
    Trace trace;
    trace.dut_name = m.name;

    // Map each model input port to the testbench net that drives it.
    std::unordered_map<std::string, std::string> port_to_net;
    for (const auto& inst : program.instances)
        if (inst.module_name == m.name || program.instances.size() == 1)
            for (const auto& b : inst.bindings) port_to_net[b.port] = b.net;

    std::unordered_map<std::string, std::uint32_t> nets;
    auto input_vector = [&]() {
        std::uint32_t v = 0;
        int off = 0;
        for (const auto& [port, w] : m.inputs) {
            auto pn = port_to_net.find(port);
            const std::string& net = pn != port_to_net.end() ? pn->second : port;
            auto it = nets.find(net);
            if (it != nets.end()) v |= (it->second & BitVec::mask(w)) << off;
            off += w;
        }
        return v;
    };

    int state = m.reset_state;
    int cycle = 0;
    for (const auto& ev : program.events) {
        if (cycle >= max_cycles) return trace; // finished stays false
        switch (ev.kind) {
        case EventKind::ResetAssert: {
            for (const auto& [net, v] : ev.drives) nets[net] = v;
            state = m.reset_state;
            std::uint32_t in = input_vector();
            trace.records.push_back(
                {cycle++, true, in, state, m.output_for(state, in).value});
            break;
        }
        case EventKind::ResetDeassert:
            break;
        case EventKind::ApplyInput: {
            for (const auto& [net, v] : ev.drives) nets[net] = v;
            std::uint32_t in = input_vector();
            int tid = m.transition_for(state, in);
            if (tid < 0)
                raise("GuardHole", m.name + ": no transition from state " +
                                       m.states[state].label);
            trace.records.push_back(
                {cycle++, false, in, state, m.output_for(state, in).value});
            state = m.transitions[tid].to;
            break;
        }
        case EventKind::ApplyInputSequence:
            raise("ParseError", "unexpanded input sequence in stimulus program");
        case EventKind::Finish:
            trace.finished = true;
            return trace;
        }
    }
    return trace;
}

std::vector<std::string> trace_to_state_sequence(const FsmModel& m,
                                                const Trace& t) {
    std::vector<std::string> out;
    out.reserve(t.records.size());
    for (const auto& r : t.records) out.push_back(m.states[r.state].label);
    return out;
}

std::vector<std::pair<BitVec, BitVec>> trace_to_io_pairs(const FsmModel& m,
                                                         const Trace& t) {
    std::vector<std::pair<BitVec, BitVec>> out;
    int iw = m.total_input_width(), ow = m.total_output_width();
    for (const auto& r : t.records)
        if (!r.reset_active)
            out.emplace_back(BitVec(r.inputs, iw), BitVec(r.outputs, ow));
    return out;
}

std::string trace_to_csv(const FsmModel& m, const Trace& t) {
    std::ostringstream os;
    os << "cycle,reset";
    for (const auto& [n, w] : m.inputs) os << "," << n;
    os << ",state";
    for (const auto& [n, w] : m.outputs) os << "," << n;
    os << "\n";
    for (const auto& r : t.records) {
        os << r.cycle << "," << (r.reset_active ? 1 : 0);
        int off = 0;
        for (const auto& [n, w] : m.inputs) {
            os << "," << BitVec((r.inputs >> off) & BitVec::mask(w), w).to_binary();
            off += w;
        }
        os << "," << m.states[r.state].label;
        off = 0;
        for (const auto& [n, w] : m.outputs) {
            os << ","
               << BitVec((r.outputs >> off) & BitVec::mask(w), w).to_binary();
            off += w;
        }
        os << "\n";
    }
    return os.str();
}

std::string trace_to_json(const FsmModel& m, const Trace& t) {
    nlohmann::json j;
    j["format"] = 1;
    j["dut"] = t.dut_name;
    j["finished"] = t.finished;
    j["records"] = nlohmann::json::array();
    for (const auto& r : t.records) {
        nlohmann::json jr;
        jr["cycle"] = r.cycle;
        jr["reset"] = r.reset_active;
        int off = 0;
        for (const auto& [n, w] : m.inputs) {
            jr["inputs"][n] = BitVec((r.inputs >> off) & BitVec::mask(w), w).to_binary();
            off += w;
        }
        jr["state"] = m.states[r.state].label;
        off = 0;
        for (const auto& [n, w] : m.outputs) {
            jr["outputs"][n] =
                BitVec((r.outputs >> off) & BitVec::mask(w), w).to_binary();
            off += w;
        }
        j["records"].push_back(std::move(jr));
    }
    return j.dump(2) + "\n";
}

} // namespace fsmcov
