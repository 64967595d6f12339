// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "fsmcov/coverage.hpp"

namespace fsmcov {
namespace {

std::string pad(const std::string& s, size_t w) {
    return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

constexpr size_t kCol1 = 16, kCol2 = 12;

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string f;
    while (is >> f) out.push_back(f);
    return out;
}

} // namespace

int CoverageReport::states_covered() const {
    return static_cast<int>(
        std::count_if(per_state.begin(), per_state.end(),
                      [](const StateRow& r) { return r.covered; }));
}

int CoverageReport::transitions_covered() const {
    return static_cast<int>(
        std::count_if(per_transition.begin(), per_transition.end(),
                      [](const TransitionRow& r) { return r.covered; }));
}

std::string CoverageReport::state_percent() const {
    return format_percent(states_covered(), states_total());
}

std::string CoverageReport::transition_percent() const {
    return format_percent(transitions_covered(), transitions_total());
}

std::string format_percent(int covered, int total) {
    if (total == 0) return "0.00";
    // Hundredths of a percent, rounded half-up, in integer arithmetic.
    long hundredths = (static_cast<long>(covered) * 10000L * 2 + total) / (2L * total);
    std::string whole = std::to_string(hundredths / 100);
    std::string frac = std::to_string(hundredths % 100);
    if (frac.size() < 2) frac = "0" + frac;
    return whole + "." + frac;
}

CoverageReport accumulate(const FsmModel& m, const std::vector<Trace>& traces) {
    CoverageReport r;
    r.module_name = m.name;
    r.fsm_register_name = m.state_reg;
    for (const auto& s : m.states)
        r.per_state.push_back({s.label, s.line, false});
    auto es = m.edges();
    for (const auto& e : es)
        r.per_transition.push_back({m.states[e.from].label, m.states[e.to].label,
                                    m.transitions[m.first_transition_of_edge(
                                                      m.edge_index(e.from, e.to))]
                                        .line,
                                    false});

    for (const auto& t : traces) {
        for (size_t i = 0; i < t.records.size(); ++i) {
            const TraceRecord& rec = t.records[i];
            if (rec.state < 0 || rec.state >= static_cast<int>(m.states.size()))
                raise("TraceModelMismatch",
                      m.name + ": trace references an unknown state id");
            r.per_state[rec.state].covered = true;
            if (i + 1 >= t.records.size() || rec.reset_active) continue;
            const TraceRecord& next = t.records[i + 1];
            if (next.reset_active) {
                // A mid-program reset jump covers from->reset_state only when
                // the model actually declares that edge.
                int e = m.edge_index(rec.state, m.reset_state);
                if (e >= 0 && next.state == m.reset_state)
                    r.per_transition[e].covered = true;
                continue;
            }
            int tid = m.transition_for(rec.state, rec.inputs);
            if (tid < 0 || m.transitions[tid].to != next.state)
                raise("TraceModelMismatch",
                      m.name + ": trace step does not match any transition");
            r.per_transition[m.edge_of_transition(tid)].covered = true;
        }
    }
    return r;
}

std::vector<std::string> uncovered_transitions(const CoverageReport& r) {
    std::vector<std::string> out;
    for (const auto& row : r.per_transition)
        if (!row.covered)
            out.push_back("Transition from " + row.from + " to " + row.to);
    return out;
}

std::string render_report(const CoverageReport& r) {
    std::ostringstream os;
    os << "FSM Coverage for Module : " << r.module_name << "\n";
    os << "Summary for FSM :: " << r.fsm_register_name << "\n";
    os << pad("", kCol1) << pad("Total", kCol2) << pad("Covered", kCol2)
       << "Percent\n";
    os << pad("States", kCol1) << pad(std::to_string(r.states_total()), kCol2)
       << pad(std::to_string(r.states_covered()), kCol2) << r.state_percent()
       << "\n";
    os << pad("Transitions", kCol1)
       << pad(std::to_string(r.transitions_total()), kCol2)
       << pad(std::to_string(r.transitions_covered()), kCol2)
       << r.transition_percent() << "\n";
    os << pad("States", kCol1) << pad("Line No.", kCol2) << "Covered\n";
    for (const auto& row : r.per_state)
        os << pad(row.label, kCol1) << pad(std::to_string(row.line), kCol2)
           << (row.covered ? "Covered" : "Not Covered") << "\n";
    os << pad("Transitions", kCol1) << pad("Line No.", kCol2) << "Covered\n";
    for (const auto& row : r.per_transition)
        os << pad(row.from + "->" + row.to, kCol1)
           << pad(std::to_string(row.line), kCol2)
           << (row.covered ? "Covered" : "Not Covered") << "\n";
    return os.str();
}

CoverageReport parse_report(const std::string& text) {
    CoverageReport r;
    std::istringstream is(text);
    std::string line;
    int section = 0; // 0 header, 1 states, 2 transitions
    while (std::getline(is, line)) {
        if (line.rfind("FSM Coverage for Module : ", 0) == 0) {
            r.module_name = line.substr(26);
            continue;
        }
        if (line.rfind("Summary for FSM :: ", 0) == 0) {
            r.fsm_register_name = line.substr(19);
            continue;
        }
        auto f = split_fields(line);
        if (f.empty()) continue;
        if (f[0] == "States" && f.size() >= 3 && f[1] == "Line") {
            section = 1;
            continue;
        }
        if (f[0] == "Transitions" && f.size() >= 3 && f[1] == "Line") {
            section = 2;
            continue;
        }
        if (section == 0) continue; // summary rows are recomputed
        bool covered = f.back() == "Covered" && f[f.size() - 2] != "Not";
        if (section == 1) {
            r.per_state.push_back({f[0], std::stoi(f[1]), covered});
        } else {
            auto arrow = f[0].find("->");
            if (arrow == std::string::npos)
                raise("FormatError", "bad transition row: " + line);
            r.per_transition.push_back({f[0].substr(0, arrow),
                                        f[0].substr(arrow + 2), std::stoi(f[1]),
                                        covered});
        }
    }
    if (r.module_name.empty())
        raise("FormatError", "not a coverage report");
    return r;
}

std::string report_to_json(const CoverageReport& r) {
    nlohmann::json j;
    j["format"] = 1;
    j["module"] = r.module_name;
    j["fsm_register"] = r.fsm_register_name;
    j["states"] = {{"total", r.states_total()},
                   {"covered", r.states_covered()},
                   {"percent", r.state_percent()}};
    j["transitions"] = {{"total", r.transitions_total()},
                        {"covered", r.transitions_covered()},
                        {"percent", r.transition_percent()}};
    j["per_state"] = nlohmann::json::array();
    for (const auto& row : r.per_state)
        j["per_state"].push_back(
            {{"label", row.label}, {"line", row.line}, {"covered", row.covered}});
    j["per_transition"] = nlohmann::json::array();
    for (const auto& row : r.per_transition)
        j["per_transition"].push_back({{"from", row.from},
                                       {"to", row.to},
                                       {"line", row.line},
                                       {"covered", row.covered}});
    return j.dump(2) + "\n";
}

CoverageReport merge(const CoverageReport& a, const CoverageReport& b) {
    auto mismatch = [&] {
        raise("ModelMismatch", "coverage reports describe different models");
    };
    if (a.module_name != b.module_name ||
        a.per_state.size() != b.per_state.size() ||
        a.per_transition.size() != b.per_transition.size())
        mismatch();
    CoverageReport out = a;
    for (size_t i = 0; i < out.per_state.size(); ++i) {
        if (out.per_state[i].label != b.per_state[i].label) mismatch();
        out.per_state[i].covered |= b.per_state[i].covered;
    }
    for (size_t i = 0; i < out.per_transition.size(); ++i) {
        if (out.per_transition[i].from != b.per_transition[i].from ||
            out.per_transition[i].to != b.per_transition[i].to)
            mismatch();
        out.per_transition[i].covered |= b.per_transition[i].covered;
    }
    return out;
}

} // namespace fsmcov
