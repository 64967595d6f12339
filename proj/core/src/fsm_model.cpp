// SPDX-License-Identifier: Apache-2.0
#include "fsmcov/fsm.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fsmcov {

// -------------------------------------------------------------------- Guard

Guard Guard::cube(std::vector<Literal> lits) {
    Guard g;
    g.kind = Kind::Cube;
    std::sort(lits.begin(), lits.end());
    g.literals = std::move(lits);
    return g;
}

Guard Guard::explicit_set(std::vector<std::uint32_t> vecs) {
    Guard g;
    g.kind = Kind::Explicit;
    std::sort(vecs.begin(), vecs.end());
    vecs.erase(std::unique(vecs.begin(), vecs.end()), vecs.end());
    g.vectors = std::move(vecs);
    return g;
}

bool Guard::matches(std::uint32_t input) const {
    switch (kind) {
    case Kind::Cube:
        for (const auto& l : literals)
            if (((input >> l.bit) & 1u) != static_cast<std::uint32_t>(l.value))
                return false;
        return true;
    case Kind::Explicit:
        return std::binary_search(vectors.begin(), vectors.end(), input);
    case Kind::Default:
        return false;
    }
    return false;
}

// ----------------------------------------------------------------- FsmModel

int FsmModel::total_input_width() const {
    int w = 0;
    for (const auto& [n, iw] : inputs) w += iw;
    return w;
}
int FsmModel::total_output_width() const {
    int w = 0;
    for (const auto& [n, ow] : outputs) w += ow;
    return w;
}

const StateDef* FsmModel::find_state_by_label(const std::string& label) const {
    for (const auto& s : states)
        if (s.label == label) return &s;
    return nullptr;
}
const StateDef* FsmModel::find_state_by_encoding(std::uint32_t enc) const {
    for (const auto& s : states)
        if (s.encoding.value == enc) return &s;
    return nullptr;
}

int FsmModel::transition_for(int state, std::uint32_t input) const {
    int fallback = -1;
    const auto& out = outgoing[state];
    for (int tid : out) {
        const Transition& t = transitions[tid];
        if (t.guard.kind == Guard::Kind::Default) {
            fallback = tid;
            continue;
        }
        if (t.guard.matches(input)) return tid;
    }
    return fallback;
}

int FsmModel::step(int state, std::uint32_t input) const {
    int tid = transition_for(state, input);
    return tid < 0 ? state : transitions[tid].to;
}

BitVec FsmModel::output_for(int state, std::uint32_t input) const {
    if (style == FsmStyle::Moore) return states[state].moore_output;
    int tid = transition_for(state, input);
    return tid < 0 ? BitVec(0, total_output_width()) : transitions[tid].output;
}

std::vector<std::uint32_t> FsmModel::satisfying_vectors(int tid) const {
    std::vector<std::uint32_t> out;
    const Transition& t = transitions[tid];
    for (std::uint32_t v = 0; v < input_space(); ++v)
        if (transition_for(t.from, v) == tid) out.push_back(v);
    return out;
}

std::uint32_t FsmModel::any_satisfying(int tid) const {
    const Transition& t = transitions[tid];
    for (std::uint32_t v = 0; v < input_space(); ++v)
        if (transition_for(t.from, v) == tid) return v;
    return 0; // canonicalize() rules this out
}

std::string FsmModel::guard_text(const Guard& g) const {
    auto bit_name = [&](int bit) -> std::string {
        int off = 0;
        for (const auto& [name, w] : inputs) {
            if (bit < off + w)
                return w == 1 ? name : name + "[" + std::to_string(bit - off) + "]";
            off += w;
        }
        return "?" + std::to_string(bit);
    };
    switch (g.kind) {
    case Guard::Kind::Default:
        return "default";
    case Guard::Kind::Cube: {
        if (g.literals.empty()) return "true";
        std::string s;
        for (size_t i = 0; i < g.literals.size(); ++i) {
            if (i) s += " & ";
            s += bit_name(g.literals[i].bit) + "=" + (g.literals[i].value ? "1" : "0");
        }
        return s;
    }
    case Guard::Kind::Explicit: {
        std::string s = "one of {";
        int w = total_input_width();
        for (size_t i = 0; i < g.vectors.size(); ++i) {
            if (i) s += ",";
            s += BitVec(g.vectors[i], w).to_binary();
        }
        return s + "}";
    }
    }
    return "";
}

std::string FsmModel::transition_text(int tid) const {
    const Transition& t = transitions[tid];
    return states[t.from].label + "->" + states[t.to].label + " [" +
           guard_text(t.guard) + "]";
}

std::vector<FsmModel::Edge> FsmModel::edges() const {
    std::vector<Edge> out;
    for (const auto& t : transitions) out.push_back({t.from, t.to});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int FsmModel::edge_index(int from, int to) const {
    auto es = edges();
    auto it = std::lower_bound(es.begin(), es.end(), Edge{from, to});
    if (it == es.end() || !(*it == Edge{from, to})) return -1;
    return static_cast<int>(it - es.begin());
}

int FsmModel::edge_of_transition(int tid) const {
    return edge_index(transitions[tid].from, transitions[tid].to);
}

int FsmModel::first_transition_of_edge(int edge) const {
    auto es = edges();
    for (size_t i = 0; i < transitions.size(); ++i) {
        const auto& t = transitions[i];
        if (Edge{t.from, t.to} == es[edge]) return static_cast<int>(i);
    }
    return -1;
}

void FsmModel::canonicalize() {
    auto fail = [&](const std::string& code, const std::string& msg) {
        raise(code, name.empty() ? msg : name + ": " + msg);
    };

    if (states.empty()) fail("InvalidModel", "no states");
    for (size_t i = 0; i < states.size(); ++i) {
        states[i].id = static_cast<int>(i);
        for (size_t j = i + 1; j < states.size(); ++j) {
            if (states[i].label == states[j].label)
                fail("InvalidModel", "duplicate state label " + states[i].label);
            if (states[i].encoding == states[j].encoding)
                fail("InvalidModel", "duplicate state encoding");
            if (states[i].encoding.width != states[j].encoding.width)
                fail("InvalidModel", "state encodings of unequal width");
        }
    }
    if (reset_state < 0 || reset_state >= static_cast<int>(states.size()))
        fail("InvalidModel", "reset state out of range");

    int w = total_input_width();
    if (w < 1 || w > 16) fail("InvalidModel", "total input width out of range");

    std::stable_sort(transitions.begin(), transitions.end(),
                     [&](const Transition& a, const Transition& b) {
                         if (a.from != b.from) return a.from < b.from;
                         if (a.to != b.to) return a.to < b.to;
                         return guard_text(a.guard) < guard_text(b.guard);
                     });
    outgoing.assign(states.size(), {});
    for (size_t i = 0; i < transitions.size(); ++i) {
        auto& t = transitions[i];
        t.id = static_cast<int>(i);
        if (t.from < 0 || t.from >= static_cast<int>(states.size()) ||
            t.to < 0 || t.to >= static_cast<int>(states.size()))
            fail("InvalidModel", "transition endpoint out of range");
        for (const auto& l : t.guard.literals)
            if (l.bit < 0 || l.bit >= w)
                fail("InvalidModel", "guard references undeclared input bit");
        outgoing[t.from].push_back(t.id);
    }

    // Exhaustive + mutually exclusive guards per state, default at most once.
    for (size_t s = 0; s < states.size(); ++s) {
        int defaults = 0;
        for (int tid : outgoing[s])
            if (transitions[tid].guard.kind == Guard::Kind::Default) ++defaults;
        if (defaults > 1)
            fail("InvalidModel", "state " + states[s].label + " has two default guards");

        std::vector<int> hits(outgoing[s].size(), 0);
        for (std::uint32_t v = 0; v < input_space(); ++v) {
            int matched = 0;
            for (size_t k = 0; k < outgoing[s].size(); ++k) {
                const Transition& t = transitions[outgoing[s][k]];
                if (t.guard.kind != Guard::Kind::Default && t.guard.matches(v)) {
                    ++matched;
                    ++hits[k];
                }
            }
            if (matched > 1)
                fail("InvalidModel", "overlapping guards in state " + states[s].label);
            if (matched == 0) {
                if (defaults == 0)
                    fail("InvalidModel", "guard hole in state " + states[s].label);
                for (size_t k = 0; k < outgoing[s].size(); ++k)
                    if (transitions[outgoing[s][k]].guard.kind == Guard::Kind::Default)
                        ++hits[k];
            }
        }
        for (size_t k = 0; k < outgoing[s].size(); ++k)
            if (hits[k] == 0)
                fail("InvalidModel", "unsatisfiable guard on " +
                                         transition_text(outgoing[s][k]));
    }
}

// ------------------------------------------------------------ graph queries

std::vector<int> enumerate_transitions(const FsmModel& m) {
    std::vector<int> ids(m.transitions.size());
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return ids;
}

std::vector<int> reachable_states(const FsmModel& m) {
    std::vector<bool> seen(m.states.size(), false);
    std::deque<int> q{m.reset_state};
    seen[m.reset_state] = true;
    std::vector<int> out;
    while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        out.push_back(s);
        for (int tid : m.outgoing[s]) {
            int to = m.transitions[tid].to;
            if (!seen[to]) {
                seen[to] = true;
                q.push_back(to);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> reachable_transitions(const FsmModel& m) {
    auto rs = reachable_states(m);
    std::vector<bool> seen(m.states.size(), false);
    for (int s : rs) seen[s] = true;
    std::vector<int> out;
    for (const auto& t : m.transitions)
        if (seen[t.from]) out.push_back(t.id);
    return out;
}

std::optional<std::vector<std::uint32_t>>
shortest_input_path(const FsmModel& m, int from, int target_tid) {
    const Transition& target = m.transitions[target_tid];
    // BFS on states; one input vector per step.
    std::vector<int> prev_state(m.states.size(), -1);
    std::vector<std::uint32_t> prev_input(m.states.size(), 0);
    std::vector<bool> seen(m.states.size(), false);
    std::deque<int> q{from};
    seen[from] = true;
    while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        if (s == target.from) {
            std::vector<std::uint32_t> path;
            for (int cur = s; cur != from; cur = prev_state[cur])
                path.push_back(prev_input[cur]);
            std::reverse(path.begin(), path.end());
            // Fire the target itself.
            std::uint32_t firing = 0;
            bool found = false;
            for (std::uint32_t v = 0; v < m.input_space() && !found; ++v)
                if (m.transition_for(target.from, v) == target_tid) {
                    firing = v;
                    found = true;
                }
            if (!found) return std::nullopt;
            path.push_back(firing);
            return path;
        }
        for (int tid : m.outgoing[s]) {
            int to = m.transitions[tid].to;
            if (seen[to]) continue;
            // Representative input for this hop.
            for (std::uint32_t v = 0; v < m.input_space(); ++v) {
                if (m.transition_for(s, v) == tid) {
                    seen[to] = true;
                    prev_state[to] = s;
                    prev_input[to] = v;
                    q.push_back(to);
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

// ------------------------------------------------------------ serialization

using nlohmann::json;

std::string fsm_to_json(const FsmModel& m) {
    json j;
    j["format"] = 1;
    j["name"] = m.name;
    j["state_reg"] = m.state_reg;
    j["clock_port"] = m.clock_port;
    j["reset_port"] = m.reset_port;
    j["style"] = m.style == FsmStyle::Moore ? "moore" : "mealy";
    j["reset_state"] = m.reset_state;
    j["reset_polarity"] =
        m.reset_polarity == ResetPolarity::ActiveHigh ? "active_high" : "active_low";
    for (const auto& [n, w] : m.inputs) j["inputs"].push_back({{"name", n}, {"width", w}});
    for (const auto& [n, w] : m.outputs) j["outputs"].push_back({{"name", n}, {"width", w}});
    j["inputs"] = j.value("inputs", json::array());
    j["outputs"] = j.value("outputs", json::array());
    for (const auto& s : m.states) {
        json js{{"id", s.id},
                {"label", s.label},
                {"encoding", s.encoding.value},
                {"encoding_width", s.encoding.width},
                {"line", s.line}};
        if (m.style == FsmStyle::Moore) js["output"] = s.moore_output.value;
        j["states"].push_back(std::move(js));
    }
    for (const auto& t : m.transitions) {
        json jt{{"id", t.id},
                {"from", t.from},
                {"to", t.to},
                {"line", t.line},
                {"guard", m.guard_text(t.guard)}};
        switch (t.guard.kind) {
        case Guard::Kind::Default:
            jt["guard_kind"] = "default";
            break;
        case Guard::Kind::Cube: {
            jt["guard_kind"] = "cube";
            json lits = json::array();
            for (const auto& l : t.guard.literals)
                lits.push_back({{"bit", l.bit}, {"value", l.value}});
            jt["literals"] = std::move(lits);
            break;
        }
        case Guard::Kind::Explicit:
            jt["guard_kind"] = "vectors";
            jt["vectors"] = t.guard.vectors;
            break;
        }
        if (m.style == FsmStyle::Mealy) jt["output"] = t.output.value;
        j["transitions"].push_back(std::move(jt));
    }
    j["states"] = j.value("states", json::array());
    j["transitions"] = j.value("transitions", json::array());
    return j.dump(2) + "\n";
}

FsmModel fsm_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    if (j.value("format", 0) != 1)
        raise("FormatError", "unsupported fsm json format version");
    FsmModel m;
    m.name = j.value("name", "");
    m.state_reg = j.value("state_reg", "state");
    m.clock_port = j.value("clock_port", "clk");
    m.reset_port = j.value("reset_port", "rst");
    m.style = j.value("style", "moore") == "moore" ? FsmStyle::Moore : FsmStyle::Mealy;
    m.reset_state = j.value("reset_state", 0);
    m.reset_polarity = j.value("reset_polarity", "active_high") == "active_high"
                           ? ResetPolarity::ActiveHigh
                           : ResetPolarity::ActiveLow;
    for (const auto& ji : j["inputs"])
        m.inputs.emplace_back(ji.at("name").get<std::string>(), ji.at("width").get<int>());
    for (const auto& jo : j["outputs"])
        m.outputs.emplace_back(jo.at("name").get<std::string>(), jo.at("width").get<int>());
    int ow = m.total_output_width();
    for (const auto& js : j["states"]) {
        StateDef s;
        s.id = js.at("id").get<int>();
        s.label = js.at("label").get<std::string>();
        s.encoding = BitVec(js.at("encoding").get<std::uint32_t>(),
                            js.at("encoding_width").get<int>());
        s.line = js.value("line", 0);
        if (m.style == FsmStyle::Moore)
            s.moore_output = BitVec(js.value("output", 0u), ow);
        m.states.push_back(std::move(s));
    }
    for (const auto& jt : j["transitions"]) {
        Transition t;
        t.from = jt.at("from").get<int>();
        t.to = jt.at("to").get<int>();
        t.line = jt.value("line", 0);
        std::string gk = jt.value("guard_kind", "default");
        if (gk == "cube") {
            std::vector<Guard::Literal> lits;
            for (const auto& jl : jt["literals"])
                lits.push_back({jl.at("bit").get<int>(), jl.at("value").get<bool>()});
            t.guard = Guard::cube(std::move(lits));
        } else if (gk == "vectors") {
            t.guard = Guard::explicit_set(jt["vectors"].get<std::vector<std::uint32_t>>());
        } else {
            t.guard = Guard::fallback();
        }
        if (m.style == FsmStyle::Mealy)
            t.output = BitVec(jt.value("output", 0u), ow);
        m.transitions.push_back(std::move(t));
    }
    m.canonicalize();
    return m;
}

std::string fsm_to_dot(const FsmModel& m) {
    std::ostringstream os;
    os << "// format: 1\n";
    os << "digraph \"" << m.name << "\" {\n";
    os << "  rankdir=LR;\n";
    os << "  node [shape=circle];\n";
    os << "  __reset [shape=point];\n";
    os << "  __reset -> " << m.states[m.reset_state].label << ";\n";
    for (const auto& s : m.states)
        os << "  " << s.label << ";\n";
    for (const auto& t : m.transitions)
        os << "  " << m.states[t.from].label << " -> " << m.states[t.to].label
           << " [label=\"" << m.guard_text(t.guard) << "\"];\n";
    os << "}\n";
    return os.str();
}

// ----------------------------------------------------------------- renderer

namespace {

std::string input_condition(const FsmModel& m, const Guard& g) {
    auto bit_ref = [&](int bit) -> std::pair<std::string, int> {
        int off = 0;
        for (const auto& [name, w] : m.inputs) {
            if (bit < off + w) return {name, bit - off};
            off += w;
        }
        return {"?", 0};
    };
    auto vector_eq = [&](std::uint32_t v) {
        std::string s;
        int off = 0;
        bool first = true;
        for (const auto& [name, w] : m.inputs) {
            std::uint32_t field = (v >> off) & BitVec::mask(w);
            if (!first) s += " && ";
            s += name + " == " + BitVec(field, w).to_verilog();
            first = false;
            off += w;
        }
        return m.inputs.size() > 1 ? "(" + s + ")" : s;
    };
    switch (g.kind) {
    case Guard::Kind::Default:
        return ""; // callers render the else branch
    case Guard::Kind::Cube: {
        if (g.literals.empty()) return "1";
        std::string s;
        for (size_t i = 0; i < g.literals.size(); ++i) {
            auto [name, bit] = bit_ref(g.literals[i].bit);
            if (i) s += " && ";
            bool wide = false;
            for (const auto& [n2, w2] : m.inputs)
                if (n2 == name && w2 > 1) wide = true;
            std::string ref = wide ? name + "[" + std::to_string(bit) + "]" : name;
            s += ref + " == 1'b" + (g.literals[i].value ? "1" : "0");
        }
        return s;
    }
    case Guard::Kind::Explicit: {
        std::string s;
        for (size_t i = 0; i < g.vectors.size(); ++i) {
            if (i) s += " || ";
            s += vector_eq(g.vectors[i]);
        }
        return s;
    }
    }
    return "";
}

void render_output_assigns(const FsmModel& m, std::uint32_t out_vec,
                           std::ostringstream& os, const std::string& pad) {
    int off = 0;
    for (const auto& [name, w] : m.outputs) {
        std::uint32_t field = (out_vec >> off) & BitVec::mask(w);
        os << pad << name << " = " << BitVec(field, w).to_verilog() << ";\n";
        off += w;
    }
}

} // namespace

std::string render_fsm_rtl(const FsmModel& m) {
    std::ostringstream os;
    bool active_low = m.reset_polarity == ResetPolarity::ActiveLow;
    const std::string& rst = m.reset_port;
    int sw = m.states[0].encoding.width;

    os << "module " << m.name << "(\n  input " << m.clock_port << ",\n  input "
       << rst;
    for (const auto& [n, w] : m.inputs) {
        os << ",\n  input ";
        if (w > 1) os << "[" << w - 1 << ":0] ";
        os << n;
    }
    for (const auto& [n, w] : m.outputs) {
        os << ",\n  output reg ";
        if (w > 1) os << "[" << w - 1 << ":0] ";
        os << n;
    }
    os << "\n);\n\n";
    for (const auto& s : m.states)
        os << "  localparam [" << sw - 1 << ":0] " << s.label << " = "
           << s.encoding.to_verilog() << ";\n";
    os << "\n  reg [" << sw - 1 << ":0] " << m.state_reg << ";\n\n";

    os << "  always @(posedge " << m.clock_port << " or "
       << (active_low ? "negedge " : "posedge ")
       << rst << ") begin\n";
    os << "    if (" << (active_low ? "!" : "") << rst << ")\n";
    os << "      " << m.state_reg << " <= " << m.states[m.reset_state].label << ";\n";
    os << "    else begin\n";
    os << "      case (" << m.state_reg << ")\n";
    for (const auto& s : m.states) {
        os << "        " << s.label << ": begin\n";
        const Transition* def = nullptr;
        bool first = true;
        for (int tid : m.outgoing[s.id]) {
            const Transition& t = m.transitions[tid];
            if (t.guard.kind == Guard::Kind::Default) {
                def = &t;
                continue;
            }
            os << "          " << (first ? "if (" : "else if (")
               << input_condition(m, t.guard) << ")\n";
            os << "            " << m.state_reg << " <= " << m.states[t.to].label
               << ";\n";
            first = false;
        }
        if (def) {
            os << "          " << (first ? "" : "else\n            ")
               << (first ? m.state_reg : m.state_reg) << " <= "
               << m.states[def->to].label << ";\n";
        }
        os << "        end\n";
    }
    os << "        default: " << m.state_reg << " <= "
       << m.states[m.reset_state].label << ";\n";
    os << "      endcase\n";
    os << "    end\n";
    os << "  end\n\n";

    os << "  always @(*) begin\n";
    os << "    case (" << m.state_reg << ")\n";
    for (const auto& s : m.states) {
        os << "      " << s.label << ": begin\n";
        if (m.style == FsmStyle::Moore) {
            render_output_assigns(m, s.moore_output.value, os, "        ");
        } else {
            const Transition* def = nullptr;
            bool first = true;
            for (int tid : m.outgoing[s.id]) {
                const Transition& t = m.transitions[tid];
                if (t.guard.kind == Guard::Kind::Default) {
                    def = &t;
                    continue;
                }
                os << "        " << (first ? "if (" : "else if (")
                   << input_condition(m, t.guard) << ") begin\n";
                render_output_assigns(m, t.output.value, os, "          ");
                os << "        end\n";
                first = false;
            }
            if (def) {
                if (!first) os << "        else begin\n";
                else os << "        begin\n";
                render_output_assigns(m, def->output.value, os, "          ");
                os << "        end\n";
            }
        }
        os << "      end\n";
    }
    os << "      default: begin\n";
    render_output_assigns(m, 0, os, "        ");
    os << "      end\n";
    os << "    endcase\n";
    os << "  end\n\n";
    os << "endmodule\n";
    return os.str();
}

} // namespace fsmcov
