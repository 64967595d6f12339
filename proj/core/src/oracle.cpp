// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <limits>
#include <sstream>

#include "fsmcov/oracle.hpp"

namespace fsmcov {
namespace {

std::string label_of(const FsmModel& m, int state) { return m.states[state].label; }

} // namespace

// ------------------------------------------------------------------ planning

CoveragePlan plan_coverage(const FsmModel& m, const std::set<int>& uncovered,
                           int segment_budget) {
    CoveragePlan plan;
    plan.targeted = uncovered;
    if (uncovered.empty()) return plan;

    {
        auto rt = reachable_transitions(m);
        std::set<int> reach(rt.begin(), rt.end());
        for (int t : uncovered)
            if (!reach.count(t))
                raise("UnreachableTarget",
                      m.name + ": " + m.transition_text(t) +
                          " is unreachable from reset");
    }

    std::set<int> remaining = uncovered;
    CoveragePlan::Segment seg;
    int cur = m.reset_state;
    auto close_segment = [&] {
        if (!seg.inputs.empty()) plan.segments.push_back(std::move(seg));
        seg = {};
        cur = m.reset_state;
    };

    while (!remaining.empty()) {
        int best = -1;
        std::vector<std::uint32_t> best_path;
        for (int t : remaining) { // set order => lowest-id tie-break
            auto p = shortest_input_path(m, cur, t);
            if (p && (best < 0 || p->size() < best_path.size())) {
                best = t;
                best_path = std::move(*p);
            }
        }
        bool over_budget =
            best >= 0 && !seg.inputs.empty() &&
            seg.inputs.size() + best_path.size() >
                static_cast<std::size_t>(segment_budget);
        if (best < 0 || over_budget) {
            if (seg.inputs.empty())
                raise("UnreachableTarget",
                      m.name + ": planning stalled at state " + label_of(m, cur));
            close_segment();
            continue;
        }
        for (std::uint32_t v : best_path) {
            int tid = m.transition_for(cur, v);
            remaining.erase(tid);
            seg.inputs.push_back(v);
            cur = m.transitions[tid].to;
        }
    }
    close_segment();
    return plan;
}

std::string emit_testbench(const FsmModel& m, const CoveragePlan& plan) {
    bool active_high = m.reset_polarity == ResetPolarity::ActiveHigh;
    std::string rst_net = m.reset_port;
    std::string clk_net = m.clock_port;
    bool single_bit_input = m.inputs.size() == 1 && m.inputs[0].second == 1;
    bool use_sequences = false;
    if (single_bit_input)
        for (const auto& seg : plan.segments)
            if (seg.inputs.size() >= 8) use_sequences = true;

    std::ostringstream os;
    os << "module tb();\n";
    os << "  reg " << clk_net << ";\n";
    os << "  reg " << rst_net << ";\n";
    for (const auto& [n, w] : m.inputs) {
        os << "  reg ";
        if (w > 1) os << "[" << w - 1 << ":0] ";
        os << n << ";\n";
    }
    for (const auto& [n, w] : m.outputs) {
        os << "  wire ";
        if (w > 1) os << "[" << w - 1 << ":0] ";
        os << n << ";\n";
    }
    os << "\n  " << m.name << " uut(." << clk_net << "(" << clk_net << "), ."
       << rst_net << "(" << rst_net << ")";
    for (const auto& [n, w] : m.inputs) os << ", ." << n << "(" << n << ")";
    for (const auto& [n, w] : m.outputs) os << ", ." << n << "(" << n << ")";
    os << ");\n\n";
    os << "  always begin\n    #5 " << clk_net << " = ~" << clk_net << ";\n  end\n\n";

    os << "  initial begin\n";
    os << "    $fsdbDumpfile(\"test.fsdb\");\n";
    os << "    $fsdbDumpvars;\n";
    os << "    " << clk_net << " = 0;\n";
    os << "    " << rst_net << " = " << (active_high ? "1" : "0") << ";\n";
    for (const auto& [n, w] : m.inputs) os << "    " << n << " = 0;\n";
    os << "    #10 " << rst_net << " = " << (active_high ? "0" : "1") << ";\n";
    bool first_segment = true;
    for (const auto& seg : plan.segments) {
        if (!first_segment && seg.reset_prefix) {
            os << "    " << rst_net << " = " << (active_high ? "1" : "0") << ";\n";
            os << "    #10 " << rst_net << " = " << (active_high ? "0" : "1")
               << ";\n";
        }
        first_segment = false;
        std::size_t i = 0;
        while (i < seg.inputs.size()) {
            if (use_sequences && seg.inputs.size() - i >= 8) {
                BitVec word(0, 8);
                for (int b = 0; b < 8; ++b) // msb applied first
                    word.value |= (seg.inputs[i + b] & 1u) << (7 - b);
                os << "    apply_input_sequence(" << word.to_verilog() << ");\n";
                i += 8;
                continue;
            }
            os << "    apply_input(";
            int off = 0;
            bool first_arg = true;
            for (const auto& [n, w] : m.inputs) {
                if (!first_arg) os << ", ";
                os << BitVec((seg.inputs[i] >> off) & BitVec::mask(w), w)
                          .to_verilog();
                first_arg = false;
                off += w;
            }
            os << ");\n";
            ++i;
        }
        if (!seg.inputs.empty()) {
            // Trailing flush cycle: coverage counts a transition from a pair
            // of consecutive sampled cycles, so the segment's last targeted
            // input needs one successor sample before a reset or $finish.
            os << "    apply_input(";
            bool first_arg = true;
            for (const auto& [n, w] : m.inputs) {
                if (!first_arg) os << ", ";
                os << BitVec(0, w).to_verilog();
                first_arg = false;
            }
            os << ");\n";
        }
    }
    os << "    $finish;\n";
    os << "  end\n\n";

    os << "  task apply_input(";
    {
        bool first_arg = true;
        for (const auto& [n, w] : m.inputs) {
            if (!first_arg) os << ", ";
            os << "input reg ";
            if (w > 1) os << "[" << w - 1 << ":0] ";
            os << n << "_val";
            first_arg = false;
        }
    }
    os << ");\n    begin\n";
    for (const auto& [n, w] : m.inputs)
        os << "      " << n << " = " << n << "_val;\n";
    os << "      #10;\n    end\n  endtask\n";
    if (use_sequences) {
        os << "\n  task apply_input_sequence(input reg [7:0] seq);\n";
        os << "    integer i;\n";
        os << "    begin\n";
        os << "      for (i = 7; i >= 0; i = i - 1) begin\n";
        os << "        apply_input(seq[i]);\n";
        os << "      end\n";
        os << "    end\n  endtask\n";
    }
    os << "endmodule\n";
    return os.str();
}

// ------------------------------------------------------------------ checking

std::pair<MismatchVerdict, int> check_chunk(const FsmModel& golden,
                                            int carried_state,
                                            const std::vector<TraceRecord>& chunk,
                                            CheckMode mode) {
    MismatchVerdict v;
    int ow = golden.total_output_width();
    int state = carried_state;
    for (const auto& rec : chunk) {
        int expected_state = rec.reset_active ? golden.reset_state : state;
        if (mode == CheckMode::StateRegs) {
            if (rec.state != expected_state) {
                v.found = true;
                v.cycle = rec.cycle;
                v.observed = label_of(golden, rec.state);
                v.expected = label_of(golden, expected_state);
                v.narrative = "Mismatch found at cycle " +
                              std::to_string(rec.cycle) + ": expected state " +
                              v.expected + ", observed state " + v.observed +
                              ". This transition is inconsistent with the design "
                              "spec.";
                return {v, expected_state};
            }
        } else {
            std::uint32_t exp = golden.output_for(expected_state, rec.inputs).value;
            if (rec.outputs != exp) {
                v.found = true;
                v.cycle = rec.cycle;
                v.observed = BitVec(rec.outputs, ow).to_binary();
                v.expected = BitVec(exp, ow).to_binary();
                v.narrative = "Mismatch found at cycle " +
                              std::to_string(rec.cycle) + ": expected output " +
                              v.expected + ", observed output " + v.observed +
                              ". This transition is inconsistent with the design "
                              "spec.";
                return {v, expected_state};
            }
        }
        state = rec.reset_active ? golden.reset_state
                                 : golden.step(expected_state, rec.inputs);
    }
    v.narrative = "No mismatch found in the provided cycles. Current state: " +
                  label_of(golden, state);
    return {v, state};
}

MismatchVerdict check_bitwise(const FsmModel& golden, const Trace& trace,
                              const std::string& bit) {
    int bit_index = -1, off = 0;
    for (const auto& [n, w] : golden.outputs) {
        if (w == 1 && bit == n) bit_index = off;
        for (int i = 0; i < w; ++i)
            if (bit == n + "[" + std::to_string(i) + "]") bit_index = off + i;
        off += w;
    }
    if (bit_index < 0)
        raise("UnknownOutputBit",
              golden.name + " has no output bit named '" + bit + "'");

    MismatchVerdict v;
    int state = golden.reset_state;
    for (const auto& rec : trace.records) {
        int expected_state = rec.reset_active ? golden.reset_state : state;
        std::uint32_t exp =
            (golden.output_for(expected_state, rec.inputs).value >> bit_index) & 1u;
        std::uint32_t obs = (rec.outputs >> bit_index) & 1u;
        if (exp != obs) {
            v.found = true;
            v.cycle = rec.cycle;
            v.observed = std::to_string(obs);
            v.expected = std::to_string(exp);
            v.narrative = "Mismatch found at cycle " + std::to_string(rec.cycle) +
                          ": expected " + bit + "=" + v.expected + ", observed " +
                          bit + "=" + v.observed +
                          ". This transition is inconsistent with the design spec.";
            return v;
        }
        state = rec.reset_active ? golden.reset_state
                                 : golden.step(expected_state, rec.inputs);
    }
    v.narrative = "No mismatch found on output bit " + bit + ".";
    return v;
}

// ---------------------------------------------------------------- wire format

std::string format_chunk_lines(const FsmModel& m,
                               const std::vector<TraceRecord>& records,
                               CheckMode mode) {
    std::ostringstream os;
    for (const auto& r : records) {
        os << "cycle " << r.cycle << ":";
        if (r.reset_active) os << " " << m.reset_port << "=1";
        int off = 0;
        for (const auto& [n, w] : m.inputs) {
            os << " " << n << "="
               << BitVec((r.inputs >> off) & BitVec::mask(w), w).to_binary();
            off += w;
        }
        if (mode == CheckMode::StateRegs) {
            os << " state=" << m.states[r.state].label;
        } else {
            off = 0;
            for (const auto& [n, w] : m.outputs) {
                os << " " << n << "="
                   << BitVec((r.outputs >> off) & BitVec::mask(w), w).to_binary();
                off += w;
            }
        }
        os << "\n";
    }
    return os.str();
}

std::vector<TraceRecord> parse_chunk_lines(const FsmModel& m,
                                           const std::string& text,
                                           CheckMode mode) {
    std::vector<TraceRecord> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok != "cycle") continue;
        TraceRecord rec;
        ls >> tok; // "N:"
        rec.cycle = std::stoi(tok);
        while (ls >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            std::string name = tok.substr(0, eq);
            std::string val = tok.substr(eq + 1);
            if (name == m.reset_port) {
                rec.reset_active = val != "0";
                continue;
            }
            if (name == "state") {
                const StateDef* s = m.find_state_by_label(val);
                if (!s) raise("FormatError", "unknown state label " + val);
                rec.state = s->id;
                continue;
            }
            auto set_field = [&](const std::vector<std::pair<std::string, int>>&
                                     ports,
                                 std::uint32_t& field) {
                int off = 0;
                for (const auto& [n, w] : ports) {
                    if (n == name) {
                        std::uint32_t v = 0;
                        for (char c : val) v = (v << 1) | (c == '1' ? 1u : 0u);
                        field |= (v & BitVec::mask(w)) << off;
                        return true;
                    }
                    off += w;
                }
                return false;
            };
            if (!set_field(m.inputs, rec.inputs))
                set_field(m.outputs, rec.outputs);
        }
        (void)mode;
        out.push_back(rec);
    }
    return out;
}

// -------------------------------------------------------------------- backend

namespace {

class OracleBackend final : public Backend {
public:
    OracleBackend(FsmModel golden, BackendConfig cfg)
        : golden_(std::move(golden)), cfg_(std::move(cfg)) {}

    std::string id() const override { return "oracle:" + golden_.name; }

    std::string complete(const PromptTranscript& transcript) override {
        if (transcript.messages.empty())
            raise("OracleUnsupportedPrompt", "empty transcript");
        const ChatMessage& last = transcript.messages.back();
        const std::string& text = last.content;

        if (text.find("doesn't cover all the transitions") != std::string::npos)
            return answer_coverage_feedback(text);
        if (last.role == Role::System ||
            text.find("try to cover all the possible state transitions") !=
                std::string::npos)
            return answer_initial_testbench();
        if (text.find("value for the state register variable") !=
            std::string::npos)
            return answer_state_sequence(text);
        if (text.find("focusing on one bit of output") != std::string::npos)
            return answer_bitwise(text);
        if (text.find("input-output pair") != std::string::npos)
            return answer_chunk(transcript, text);
        raise("OracleUnsupportedPrompt",
              "oracle cannot answer this prompt: " + text.substr(0, 80));
    }

private:
    FsmModel golden_;
    BackendConfig cfg_;

    std::string answer_initial_testbench() {
        auto rt = reachable_transitions(golden_);
        std::set<int> all(rt.begin(), rt.end());
        return emit_testbench(golden_, plan_coverage(golden_, all));
    }

    std::string answer_coverage_feedback(const std::string& text) {
        std::set<int> targets;
        const std::string marker = "Transition from ";
        for (std::size_t pos = text.find(marker); pos != std::string::npos;
             pos = text.find(marker, pos + 1)) {
            std::istringstream ls(text.substr(pos + marker.size()));
            std::string from, to_kw, to;
            ls >> from >> to_kw >> to;
            while (!to.empty() && (to.back() == '"' || to.back() == '.' ||
                                   to.back() == ','))
                to.pop_back();
            const StateDef* sf = golden_.find_state_by_label(from);
            const StateDef* st = golden_.find_state_by_label(to);
            if (!sf || !st)
                raise("OracleUnsupportedPrompt",
                      "unknown transition '" + from + " to " + to + "'");
            for (const auto& t : golden_.transitions)
                if (t.from == sf->id && t.to == st->id) targets.insert(t.id);
        }
        if (targets.empty())
            raise("OracleUnsupportedPrompt", "no transitions found in feedback");
        return emit_testbench(golden_, plan_coverage(golden_, targets));
    }

    std::string answer_state_sequence(const std::string& text) {
        // The sequence is the quoted line.
        auto q1 = text.find('"');
        auto q2 = q1 == std::string::npos ? std::string::npos
                                          : text.find('"', q1 + 1);
        if (q2 == std::string::npos)
            raise("OracleUnsupportedPrompt", "no quoted state sequence");
        std::istringstream ls(text.substr(q1 + 1, q2 - q1 - 1));
        std::vector<int> seq;
        std::string lab;
        while (ls >> lab) {
            const StateDef* s = golden_.find_state_by_label(lab);
            if (!s)
                raise("OracleUnsupportedPrompt", "unknown state label " + lab);
            seq.push_back(s->id);
        }
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            if (golden_.edge_index(seq[i], seq[i + 1]) < 0)
                return "Mismatch found at step " + std::to_string(i + 1) +
                       ": the transition from " + label_of(golden_, seq[i]) +
                       " to " + label_of(golden_, seq[i + 1]) +
                       " is inconsistent with the design spec.";
        }
        return "No mismatch found. The sequence is consistent with the design "
               "spec.";
    }

    int carried_state_from(const PromptTranscript& transcript) const {
        const std::string marker = "Current state: ";
        for (auto it = transcript.messages.rbegin();
             it != transcript.messages.rend(); ++it) {
            if (it->role != Role::Assistant) continue;
            auto pos = it->content.find(marker);
            if (pos == std::string::npos) continue;
            std::istringstream ls(it->content.substr(pos + marker.size()));
            std::string lab;
            ls >> lab;
            while (!lab.empty() && (lab.back() == '.' || lab.back() == ','))
                lab.pop_back();
            if (const StateDef* s = golden_.find_state_by_label(lab))
                return s->id;
        }
        return golden_.reset_state;
    }

    std::string answer_chunk(const PromptTranscript& transcript,
                             const std::string& text) {
        CheckMode mode = text.find(" state=") != std::string::npos
                             ? CheckMode::StateRegs
                             : CheckMode::IOPairs;
        auto records = parse_chunk_lines(golden_, text, mode);
        if (records.empty())
            raise("OracleUnsupportedPrompt", "no cycle lines in chunk prompt");
        auto [verdict, carry] =
            check_chunk(golden_, carried_state_from(transcript), records, mode);
        (void)carry;
        return verdict.narrative;
    }

    std::string answer_bitwise(const std::string& text) {
        const std::string marker = "focus only on output bit ";
        auto pos = text.find(marker);
        if (pos == std::string::npos)
            raise("OracleUnsupportedPrompt", "no output bit named in prompt");
        auto end = text.find(';', pos);
        std::string bit = text.substr(pos + marker.size(),
                                      end - (pos + marker.size()));
        Trace t;
        t.records = parse_chunk_lines(golden_, text, CheckMode::IOPairs);
        return check_bitwise(golden_, t, bit).narrative;
    }
};

} // namespace

std::unique_ptr<Backend> make_oracle_backend(FsmModel golden,
                                             const BackendConfig& cfg) {
    return std::make_unique<OracleBackend>(std::move(golden), cfg);
}

} // namespace fsmcov
