// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fsmcov/sim.hpp"

namespace fsmcov {

/// Transition rows are per distinct (from, to) edge, which is the report's
/// granularity (a Mealy machine may split one edge across transitions).
struct CoverageReport {
    std::string module_name;
    std::string fsm_register_name;

    struct StateRow {
        std::string label;
        int line = 0;
        bool covered = false;
    };
    struct TransitionRow {
        std::string from, to;
        int line = 0;
        bool covered = false;
    };
    std::vector<StateRow> per_state;
    std::vector<TransitionRow> per_transition;

    int states_total() const { return static_cast<int>(per_state.size()); }
    int transitions_total() const { return static_cast<int>(per_transition.size()); }
    int states_covered() const;
    int transitions_covered() const;
    std::string state_percent() const;      // "100.00"
    std::string transition_percent() const; // "75.00"
};

/// Two-decimal percentage, rounded half-up ("75.00"). total == 0 gives "0.00".
std::string format_percent(int covered, int total);

CoverageReport accumulate(const FsmModel& m, const std::vector<Trace>& traces);

/// One line per uncovered transition: "Transition from <X> to <Y>".
std::vector<std::string> uncovered_transitions(const CoverageReport& r);

std::string render_report(const CoverageReport& r);
/// Scraper inverse of render_report, used by tests and the loop driver.
CoverageReport parse_report(const std::string& text);

std::string report_to_json(const CoverageReport& r);

/// OR of covered flags; totals and rows must agree. Throws ModelMismatch.
CoverageReport merge(const CoverageReport& a, const CoverageReport& b);

} // namespace fsmcov
