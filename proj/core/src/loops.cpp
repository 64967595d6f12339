// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fsmcov/loops.hpp"

namespace fsmcov {

using nlohmann::json;

std::string scenario_name(Scenario s) {
    switch (s) {
    case Scenario::StateRegs: return "state_regs";
    case Scenario::IOPairs: return "io_pairs";
    case Scenario::Fuzzing: return "fuzzing";
    }
    return "?";
}

std::string level_for_states(int states) {
    if (states <= 7) return "Easy";
    if (states <= 14) return "Medium";
    return "Hard";
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) raise("IoError", "cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise("IoError", "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

namespace {

// Pulls the first module...endmodule span out of a backend reply (which may
// wrap the code in prose or fences).
std::string extract_module_text(const std::string& reply) {
    std::istringstream is(reply);
    std::string line, out;
    bool in_module = false;
    while (std::getline(is, line)) {
        if (!in_module) {
            auto pos = line.find("module");
            if (pos != std::string::npos &&
                (pos == 0 || !isalnum(static_cast<unsigned char>(line[pos - 1]))) &&
                line.find("endmodule") == std::string::npos) {
                in_module = true;
                out += line.substr(pos) + "\n";
            }
            continue;
        }
        out += line + "\n";
        if (line.find("endmodule") != std::string::npos) break;
    }
    return in_module ? out : std::string{};
}

double percent_value(const CoverageReport& r) {
    if (r.transitions_total() == 0) return 0.0;
    return 100.0 * r.transitions_covered() / r.transitions_total();
}

bool threshold_met(const CoverageReport& r, double threshold) {
    if (threshold >= 100.0)
        return r.transitions_covered() == r.transitions_total();
    return percent_value(r) + 1e-9 >= threshold;
}

std::string iter_dir(const LoopConfig& cfg, int iteration) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "iter%02d", iteration);
    return cfg.results_dir + "/" + buf;
}

int patterns_up_to(const std::vector<TraceRecord>& records, int cycle) {
    int n = 0;
    for (const auto& r : records) {
        if (r.cycle > cycle) break;
        if (!r.reset_active) ++n;
    }
    return n;
}

} // namespace

LoopResult run_testbench_loop(const SourceUnit& dut, Backend& backend,
                              const LoopConfig& cfg) {
    LoopResult result;
    ModuleDecl dut_mod;
    try {
        dut_mod = parse_module(dut);
        result.model = extract_fsm(dut_mod);
    } catch (const DiagError& e) {
        raise("ExtractionFailed", e.diag().message, e.diag().loc, dut.path);
    }
    const FsmModel& model = result.model;

    result.transcript.push(build_system_prompt(dut));
    CoverageReport cumulative = accumulate(model, {});
    std::vector<std::string> prev_uncovered;
    int zero_streak = 0;

    for (int iteration = 1; iteration <= cfg.max_iterations; ++iteration) {
        IterationLog log;
        log.iteration = iteration;

        std::string reply = complete(backend, result.transcript);
        std::string tb_text = extract_module_text(reply);
        CompileDiagnostics diags;
        for (int attempt = 0;; ++attempt) {
            if (tb_text.empty()) {
                diags = {};
                diags.errors.push_back(
                    Diagnostic{Severity::Error, "", {}, "ParseError",
                               "response contains no module ... endmodule block"});
            } else {
                diags = compile_check(SourceUnit{"testbench.v", tb_text,
                                                 SourceKind::Testbench},
                                      dut_mod);
            }
            log.testbench = tb_text;
            log.compile_summary = diags.render();
            if (diags.ok() || attempt >= cfg.compile_fix_retries) break;
            result.transcript.push(
                {Role::User,
                 "The testbench failed to compile with the following errors:\n" +
                     diags.render() +
                     "Please provide a corrected testbench following the same "
                     "instructions."});
            reply = complete(backend, result.transcript);
            tb_text = extract_module_text(reply);
        }
        log.compiled = diags.ok();
        if (!log.compiled) {
            log.iteration_report = accumulate(model, {});
            log.cumulative_report = cumulative;
            result.iterations.push_back(std::move(log));
            break; // retries exhausted; record the failure and stop
        }

        StimulusProgram program = parse_testbench(
            SourceUnit{"testbench.v", tb_text, SourceKind::Testbench});
        Trace trace = simulate(model, program, cfg.max_cycles);
        log.iteration_report = accumulate(model, {trace});
        int before = cumulative.transitions_covered();
        cumulative = merge(cumulative, log.iteration_report);
        log.cumulative_report = cumulative;
        int gained = cumulative.transitions_covered() - before;

        if (!cfg.results_dir.empty()) {
            std::string dir = iter_dir(cfg, iteration);
            write_file(dir + "/testbench.v", tb_text);
            write_file(dir + "/coverage.txt", render_report(cumulative));
            write_file(dir + "/coverage.json", report_to_json(cumulative));
            write_file(dir + "/transcript.jsonl",
                       transcript_to_jsonl(result.transcript));
        }

        std::vector<std::string> uncovered = uncovered_transitions(cumulative);
        bool done = threshold_met(cumulative, cfg.coverage_threshold);
        bool stalled = false;
        if (!done) {
            if (gained == 0 && uncovered == prev_uncovered)
                ++zero_streak;
            else
                zero_streak = gained == 0 ? 1 : 0;
            stalled = zero_streak >= 2;
            if (!stalled) {
                log.feedback_sent = uncovered;
                result.transcript.push(build_coverage_feedback_prompt(uncovered));
            }
            prev_uncovered = std::move(uncovered);
        }
        result.iterations.push_back(std::move(log));
        if (done || stalled) break;
    }
    return result;
}

namespace {

bool reply_reports_mismatch(const std::string& reply) {
    return reply.find("Mismatch found") != std::string::npos ||
           reply.find("mismatch found at") != std::string::npos;
}

// Chunked check of a mutant trace against the golden model through the
// backend, every verdict confirmed locally. Returns the confirmed mismatch
// cycle or -1.
int detect_chunked(const FsmModel& golden, const Trace& trace, Backend& backend,
                   const LoopConfig& cfg, CheckMode mode, json& evidence) {
    PromptTranscript transcript;
    int carry = golden.reset_state;
    int chunk_index = 0;
    for (std::size_t start = 0; start < trace.records.size();
         start += cfg.chunk_size) {
        std::size_t end =
            std::min(trace.records.size(),
                     start + static_cast<std::size_t>(cfg.chunk_size));
        std::vector<TraceRecord> chunk(trace.records.begin() + start,
                                       trace.records.begin() + end);
        std::string lines = format_chunk_lines(golden, chunk, mode);
        transcript.push(build_chunk_prompt(chunk_index, lines, true));
        std::string reply = complete(backend, transcript);
        auto [confirmed, next_carry] = check_chunk(golden, carry, chunk, mode);
        bool reported = reply_reports_mismatch(reply);
        evidence["chunks"].push_back({{"index", chunk_index},
                                      {"reported", reported},
                                      {"confirmed", confirmed.found},
                                      {"reply", reply}});
        if (reported && confirmed.found) return confirmed.cycle;
        // Unconfirmed reports are noise; missed mismatches end the carry's
        // validity, so fall back to the golden carry either way.
        if (confirmed.found) return -1; // backend missed a real divergence
        carry = next_carry;
        ++chunk_index;
    }
    return -1;
}

int detect_bitwise(const FsmModel& golden, const Trace& trace, Backend& backend,
                   const LoopConfig& cfg, json& evidence) {
    (void)cfg;
    std::string lines = format_chunk_lines(golden, trace.records,
                                           CheckMode::IOPairs);
    int best_cycle = -1;
    int off = 0;
    for (const auto& [name, w] : golden.outputs) {
        for (int i = 0; i < w; ++i) {
            std::string bit =
                w == 1 ? name : name + "[" + std::to_string(i) + "]";
            PromptTranscript transcript;
            transcript.push(build_bitwise_prompt(golden, bit, lines));
            std::string reply = complete(backend, transcript);
            MismatchVerdict confirmed = check_bitwise(golden, trace, bit);
            bool reported = reply_reports_mismatch(reply);
            evidence["bits"].push_back({{"bit", bit},
                                        {"reported", reported},
                                        {"confirmed", confirmed.found},
                                        {"reply", reply}});
            if (reported && confirmed.found &&
                (best_cycle < 0 || confirmed.cycle < best_cycle))
                best_cycle = confirmed.cycle;
        }
        off += w;
    }
    return best_cycle;
}

StimulusProgram default_stimulus(const FsmModel& golden, int segment_budget) {
    auto rt = reachable_transitions(golden);
    std::set<int> all(rt.begin(), rt.end());
    CoveragePlan plan = plan_coverage(golden, all, segment_budget);
    std::string tb = emit_testbench(golden, plan);
    return parse_testbench(SourceUnit{"tb.v", tb, SourceKind::Testbench});
}

StimulusProgram fuzz_stimulus(const FsmModel& golden, const LoopConfig& cfg) {
    std::mt19937_64 rng(cfg.rng_seed);
    StimulusProgram prog;
    prog.reset_polarity = golden.reset_polarity;
    prog.reset_net = golden.reset_port;
    prog.events.push_back({EventKind::ResetAssert, {}, {}});
    prog.events.push_back({EventKind::ResetDeassert, {}, {}});
    std::uint32_t space_mask = BitVec::mask(golden.total_input_width());
    for (int i = 0; i < cfg.fuzz_pattern_budget; ++i) {
        StimulusEvent ev;
        ev.kind = EventKind::ApplyInput;
        std::uint32_t v = static_cast<std::uint32_t>(rng()) & space_mask;
        int off = 0;
        for (const auto& [n, w] : golden.inputs) {
            ev.drives.emplace_back(n, (v >> off) & BitVec::mask(w));
            off += w;
        }
        prog.events.push_back(std::move(ev));
    }
    prog.events.push_back({EventKind::Finish, {}, {}});
    return prog;
}

} // namespace

DetectionOutcome run_bug_detection(const FsmModel& golden, const FsmModel& mutant,
                                   const std::string& spec_text, Backend& backend,
                                   const LoopConfig& cfg,
                                   const StimulusProgram* stimulus) {
    if (golden.inputs != mutant.inputs || golden.outputs != mutant.outputs)
        raise("InterfaceMismatch",
              "golden and mutant machines have different interfaces");

    StimulusProgram program;
    if (cfg.scenario == Scenario::Fuzzing)
        program = fuzz_stimulus(golden, cfg);
    else if (stimulus)
        program = *stimulus;
    else
        program = default_stimulus(golden, cfg.segment_budget);

    Trace trace = simulate(mutant, program,
                           std::max(cfg.max_cycles, cfg.fuzz_pattern_budget + 8));

    json evidence;
    evidence["scenario"] = scenario_name(cfg.scenario);
    evidence["backend"] = backend.id();
    evidence["spec_provided"] = !spec_text.empty();
    evidence["trace_cycles"] = trace.records.size();

    int cycle = -1;
    switch (cfg.scenario) {
    case Scenario::StateRegs:
        cycle = detect_chunked(golden, trace, backend, cfg, CheckMode::StateRegs,
                               evidence);
        break;
    case Scenario::IOPairs:
    case Scenario::Fuzzing:
        if (golden.total_output_width() > 1)
            cycle = detect_bitwise(golden, trace, backend, cfg, evidence);
        else
            cycle = detect_chunked(golden, trace, backend, cfg,
                                   CheckMode::IOPairs, evidence);
        break;
    }

    DetectionOutcome out;
    out.detected = cycle >= 0;
    out.mismatch_cycle = cycle;
    out.patterns_to_detection =
        out.detected ? patterns_up_to(trace.records, cycle) : 0;
    evidence["detected"] = out.detected;
    evidence["mismatch_cycle"] = cycle;
    evidence["patterns_to_detection"] = out.patterns_to_detection;
    out.evidence = evidence.dump(2) + "\n";

    if (!cfg.results_dir.empty())
        write_file(cfg.results_dir + "/detection/" +
                       scenario_name(cfg.scenario) + ".json",
                   out.evidence);
    return out;
}

Summary summarize(const std::vector<ExperimentRecord>& records) {
    if (records.empty()) raise("EmptyRecordList", "nothing to summarize");
    std::ostringstream table, plot;
    table << "Level,FSM,i/p,o/p,states,Backend,%Cov,Iters,"
             "StateRegs,StateRegsPatterns,IOPairs,IOPairsPatterns,"
             "Fuzzing,FuzzingPatterns\n";
    plot << "fsm,method,patterns\n";
    auto cell = [](const std::optional<ExperimentRecord::ScenarioOutcome>& o)
        -> std::string {
        if (!o) return ",";
        return std::string(o->detected ? "pass" : "fail") + "," +
               (o->detected ? std::to_string(o->patterns) : "");
    };
    for (const auto& r : records) {
        char cov[16];
        std::snprintf(cov, sizeof cov, "%.2f", r.final_cov);
        table << level_for_states(r.states) << "," << r.fsm_id << ","
              << r.input_bits << "," << r.output_bits << "," << r.states << ","
              << r.backend << "," << cov << "," << r.iters << ","
              << cell(r.state_regs) << "," << cell(r.io_pairs) << ","
              << cell(r.fuzzing) << "\n";
        auto plot_row = [&](const char* method,
                            const std::optional<
                                ExperimentRecord::ScenarioOutcome>& o) {
            plot << r.fsm_id << "," << method << ",";
            if (o && o->detected) plot << o->patterns;
            plot << "\n";
        };
        plot_row("state_regs", r.state_regs);
        plot_row("io_pairs", r.io_pairs);
        plot_row("fuzzing", r.fuzzing);
    }
    return {table.str(), plot.str()};
}

} // namespace fsmcov
