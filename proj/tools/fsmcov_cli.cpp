// SPDX-License-Identifier: Apache-2.0
//
// fsmcov: command-line driver for the coverage-guided testbench loop and
// the trace-based bug-detection pipeline. Every subcommand writes its
// primary artifact to stdout and diagnostics to stderr; --json switches the
// artifact to a machine-readable form.
#include <atomic>
#include <cstdio>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsmcov/corpus.hpp"
#include "fsmcov/loops.hpp"
#include "fsmcov/oracle.hpp"

using namespace fsmcov;
using nlohmann::json;

namespace {

SourceUnit load_source(const std::string& path, SourceKind kind) {
    return SourceUnit{path, read_file(path), kind};
}

// Backend selection shared by loop/detect/bench.
struct BackendOpts {
    std::string backend = "oracle";
    std::string replay_tape;
    std::string endpoint;
    std::string model = "gpt-4";
    std::string auth_env = "LLM_API_KEY";

    void attach(CLI::App* cmd) {
        cmd->add_option("--backend", backend, "oracle, replay, or remote")
            ->check(CLI::IsMember({"oracle", "replay", "remote"}));
        cmd->add_option("--replay", replay_tape, "JSONL tape for the replay backend");
        cmd->add_option("--endpoint", endpoint, "chat-completions endpoint URL");
        cmd->add_option("--model", model, "remote model name");
        cmd->add_option("--auth-env", auth_env, "env var holding the API key");
    }

    std::unique_ptr<Backend> make(const FsmModel& golden) const {
        BackendConfig bc;
        bc.model = model;
        bc.auth_env = auth_env;
        if (backend == "oracle") {
            bc.kind = BackendKind::Oracle;
            return make_oracle_backend(golden, bc);
        }
        if (backend == "replay") {
            bc.kind = BackendKind::Replay;
            if (replay_tape.empty())
                raise("UsageError", "--replay <tape.jsonl> is required");
            bc.transcript_path = replay_tape;
            return make_replay_backend(bc);
        }
        bc.kind = BackendKind::Remote;
        if (endpoint.empty())
            raise("UsageError", "--endpoint is required for the remote backend");
        bc.endpoint = endpoint;
        return make_remote_backend(bc);
    }
};

struct LoopOpts {
    LoopConfig cfg;
    void attach(CLI::App* cmd) {
        cmd->add_option("--threshold", cfg.coverage_threshold,
                        "stop at this transition coverage percent");
        cmd->add_option("--max-iterations", cfg.max_iterations, "loop iteration cap");
        cmd->add_option("--compile-retries", cfg.compile_fix_retries,
                        "compile-fix rounds per iteration");
        cmd->add_option("--chunk-size", cfg.chunk_size, "trace cycles per prompt chunk");
        cmd->add_option("--fuzz-budget", cfg.fuzz_pattern_budget,
                        "random patterns for the fuzzing scenario");
        cmd->add_option("--seed", cfg.rng_seed, "RNG seed");
        cmd->add_option("--max-cycles", cfg.max_cycles, "simulation cycle cap");
        cmd->add_option("--segment-budget", cfg.segment_budget,
                        "oracle plan inputs per reset segment");
        cmd->add_option("--results", cfg.results_dir,
                        "persist per-iteration artifacts under this directory");
    }
};

Scenario scenario_from(const std::string& s) {
    if (s == "state_regs") return Scenario::StateRegs;
    if (s == "io_pairs") return Scenario::IOPairs;
    if (s == "fuzzing") return Scenario::Fuzzing;
    raise("UsageError", "unknown scenario: " + s);
}

Mutation mutation_from_flags(const std::string& kind, int site,
                             std::uint32_t payload, std::uint64_t seed) {
    Mutation mu;
    if (kind == "retarget") mu.kind = MutationKind::RetargetTransition;
    else if (kind == "swap-outputs") mu.kind = MutationKind::SwapOutputs;
    else if (kind == "flip-guard") mu.kind = MutationKind::FlipGuardLiteral;
    else if (kind == "wrong-reset") mu.kind = MutationKind::WrongResetState;
    else raise("UsageError", "unknown mutation kind: " + kind);
    mu.site = site;
    mu.payload = payload;
    mu.seed = seed;
    return mu;
}

json report_json(const CoverageReport& r) {
    return json::parse(report_to_json(r));
}

int run_bench(const std::string& manifest_path, const BackendOpts& bopts,
              LoopConfig cfg, const std::string& results_dir, int workers,
              bool as_json);

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FSM coverage-loop and bug-detection toolkit"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "emit machine-readable JSON artifacts");
    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON file with default values for the loop knobs");

    // parse ------------------------------------------------------------
    auto* cmd_parse = app.add_subcommand("parse", "frontend check of a source file");
    std::string parse_input;
    bool parse_tb = false;
    cmd_parse->add_option("--input", parse_input, "source file")->required();
    cmd_parse->add_flag("--tb", parse_tb, "treat the input as a testbench");

    // extract ----------------------------------------------------------
    auto* cmd_extract = app.add_subcommand("extract", "lift the FSM out of RTL");
    std::string extract_dut;
    bool extract_dot = false;
    cmd_extract->add_option("--dut", extract_dut, "RTL file")->required();
    cmd_extract->add_flag("--dot", extract_dot, "emit Graphviz instead of JSON");

    // simulate ---------------------------------------------------------
    auto* cmd_sim = app.add_subcommand("simulate", "run a testbench, emit the trace");
    std::string sim_dut, sim_tb;
    int sim_max_cycles = kDefaultMaxCycles;
    cmd_sim->add_option("--dut", sim_dut, "RTL file")->required();
    cmd_sim->add_option("--tb", sim_tb, "testbench file")->required();
    cmd_sim->add_option("--max-cycles", sim_max_cycles, "simulation cycle cap");

    // cover ------------------------------------------------------------
    auto* cmd_cover = app.add_subcommand("cover", "coverage report for testbenches");
    std::string cover_dut;
    std::vector<std::string> cover_tbs;
    cmd_cover->add_option("--dut", cover_dut, "RTL file")->required();
    cmd_cover->add_option("--tb", cover_tbs, "testbench file (repeatable)")
        ->required();

    // loop -------------------------------------------------------------
    auto* cmd_loop = app.add_subcommand("loop", "coverage-feedback testbench loop");
    std::string loop_dut;
    cmd_loop->add_option("--dut", loop_dut, "RTL file")->required();
    BackendOpts loop_backend;
    loop_backend.attach(cmd_loop);
    LoopOpts loop_opts;
    loop_opts.attach(cmd_loop);

    // inject -----------------------------------------------------------
    auto* cmd_inject = app.add_subcommand("inject", "apply or sample a mutation");
    std::string inj_dut, inj_kind;
    int inj_site = 0;
    std::uint32_t inj_payload = 0;
    std::uint64_t inj_seed = 1;
    bool inj_sample = false;
    cmd_inject->add_option("--dut", inj_dut, "RTL file")->required();
    cmd_inject->add_option("--kind", inj_kind,
                           "retarget, swap-outputs, flip-guard, wrong-reset");
    cmd_inject->add_option("--site", inj_site, "transition or state id");
    cmd_inject->add_option("--payload", inj_payload, "mutation payload");
    cmd_inject->add_flag("--sample", inj_sample, "sample a distinguishable mutation");
    cmd_inject->add_option("--seed", inj_seed, "sampling seed");

    // detect -----------------------------------------------------------
    auto* cmd_detect = app.add_subcommand("detect", "trace-based bug detection");
    std::string det_dut, det_kind = "retarget", det_scenario = "state_regs",
                det_spec;
    int det_site = 0;
    std::uint32_t det_payload = 0;
    bool det_sample = false;
    cmd_detect->add_option("--dut", det_dut, "golden RTL file")->required();
    cmd_detect->add_option("--kind", det_kind,
                           "retarget, swap-outputs, flip-guard, wrong-reset");
    cmd_detect->add_option("--site", det_site, "mutation site");
    cmd_detect->add_option("--payload", det_payload, "mutation payload");
    cmd_detect->add_flag("--sample", det_sample, "sample the mutation instead");
    cmd_detect
        ->add_option("--scenario", det_scenario,
                     "state_regs, io_pairs, or fuzzing")
        ->check(CLI::IsMember({"state_regs", "io_pairs", "fuzzing"}));
    cmd_detect->add_option("--spec", det_spec, "natural-language spec file");
    BackendOpts det_backend;
    det_backend.attach(cmd_detect);
    LoopOpts det_opts;
    det_opts.attach(cmd_detect);

    // bench ------------------------------------------------------------
    auto* cmd_bench = app.add_subcommand("bench", "full corpus run");
    std::string bench_manifest, bench_results = "results/run";
    int bench_workers = 1;
    cmd_bench->add_option("--corpus", bench_manifest, "corpus manifest.json")
        ->required();
    cmd_bench->add_option("--workers", bench_workers, "parallel corpus entries");
    BackendOpts bench_backend;
    bench_backend.attach(cmd_bench);
    LoopOpts bench_opts;
    bench_opts.cfg.results_dir = bench_results;
    bench_opts.attach(cmd_bench);

    // report -----------------------------------------------------------
    auto* cmd_report = app.add_subcommand("report", "summarize a bench run");
    std::string report_results;
    cmd_report->add_option("--results", report_results, "bench results directory")
        ->required();

    // gen-corpus -------------------------------------------------------
    auto* cmd_gen = app.add_subcommand("gen-corpus", "synthesize a seeded corpus");
    int gen_count = 100;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "corpus-gen";
    cmd_gen->add_option("--count", gen_count, "number of machines");
    cmd_gen->add_option("--seed", gen_seed, "generator seed");
    cmd_gen->add_option("--out", gen_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        // Config file: JSON object of long-option defaults; explicit flags win.
        // (CLI11 already parsed flags; we only fill fields left at defaults.)
        json cfg_file;
        if (!config_path.empty()) cfg_file = json::parse(read_file(config_path));
        // Fills a LoopConfig field from the config file only when the flag
        // was left at its default, so explicit flags always win.
        auto apply_config = [&](LoopConfig& cfg) {
            const LoopConfig d;
            auto fill = [&](const char* key, auto& field, auto dflt) {
                using T = std::remove_reference_t<decltype(field)>;
                if (field == dflt && cfg_file.contains(key))
                    field = cfg_file[key].template get<T>();
            };
            fill("threshold", cfg.coverage_threshold, d.coverage_threshold);
            fill("max_iterations", cfg.max_iterations, d.max_iterations);
            fill("compile_retries", cfg.compile_fix_retries, d.compile_fix_retries);
            fill("chunk_size", cfg.chunk_size, d.chunk_size);
            fill("fuzz_budget", cfg.fuzz_pattern_budget, d.fuzz_pattern_budget);
            fill("seed", cfg.rng_seed, d.rng_seed);
            fill("max_cycles", cfg.max_cycles, d.max_cycles);
            fill("segment_budget", cfg.segment_budget, d.segment_budget);
            fill("results", cfg.results_dir, d.results_dir);
        };

        if (*cmd_parse) {
            SourceUnit src = load_source(
                parse_input, parse_tb ? SourceKind::Testbench : SourceKind::Rtl);
            ModuleDecl mod = parse_module(src);
            if (as_json)
                std::cout << json{{"ok", true}, {"module", mod.name}}.dump()
                          << "\n";
            else
                std::cout << "parsed module " << mod.name << "\n";
            return 0;
        }

        if (*cmd_extract) {
            FsmModel m = extract_fsm(parse_module(load_source(extract_dut,
                                                              SourceKind::Rtl)));
            std::cout << (extract_dot ? fsm_to_dot(m) : fsm_to_json(m));
            return 0;
        }

        if (*cmd_sim) {
            FsmModel m =
                extract_fsm(parse_module(load_source(sim_dut, SourceKind::Rtl)));
            StimulusProgram prog =
                parse_testbench(load_source(sim_tb, SourceKind::Testbench));
            Trace tr = simulate(m, prog, sim_max_cycles);
            std::cout << (as_json ? trace_to_json(m, tr) : trace_to_csv(m, tr));
            return 0;
        }

        if (*cmd_cover) {
            FsmModel m = extract_fsm(
                parse_module(load_source(cover_dut, SourceKind::Rtl)));
            std::vector<Trace> traces;
            for (const auto& tb : cover_tbs)
                traces.push_back(simulate(
                    m, parse_testbench(load_source(tb, SourceKind::Testbench)),
                    kDefaultMaxCycles));
            CoverageReport r = accumulate(m, traces);
            std::cout << (as_json ? report_to_json(r) : render_report(r));
            return 0;
        }

        if (*cmd_loop) {
            SourceUnit dut = load_source(loop_dut, SourceKind::Rtl);
            FsmModel golden = extract_fsm(parse_module(dut));
            auto backend = loop_backend.make(golden);
            LoopConfig cfg = loop_opts.cfg;
            apply_config(cfg);
            LoopResult res = run_testbench_loop(dut, *backend, cfg);
            const CoverageReport& final = res.final_report();
            if (as_json) {
                json j;
                j["iterations"] = res.iterations.size();
                j["final"] = report_json(final);
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << render_report(final);
            }
            std::cerr << "loop finished after " << res.iterations.size()
                      << " iteration(s), " << final.transition_percent()
                      << "% transition coverage\n";
            return 0;
        }

        if (*cmd_inject) {
            FsmModel golden =
                extract_fsm(parse_module(load_source(inj_dut, SourceKind::Rtl)));
            MutantRecord rec;
            rec.golden_id = golden.name;
            rec.mutation = inj_sample
                               ? sample_mutation(golden, inj_seed)
                               : mutation_from_flags(inj_kind, inj_site,
                                                     inj_payload, inj_seed);
            rec.mutant = inject(golden, rec.mutation);
            auto w = distinguishing_witness(golden, rec.mutant,
                                            default_witness_horizon(golden));
            rec.distinguishable = w.has_value();
            if (w) rec.witness = *w;
            std::cout << mutant_to_json(rec);
            return 0;
        }

        if (*cmd_detect) {
            FsmModel golden =
                extract_fsm(parse_module(load_source(det_dut, SourceKind::Rtl)));
            LoopConfig cfg = det_opts.cfg;
            apply_config(cfg);
            cfg.scenario = scenario_from(det_scenario);
            Mutation mu =
                det_sample ? sample_mutation(golden, cfg.rng_seed)
                           : mutation_from_flags(det_kind, det_site,
                                                 det_payload, cfg.rng_seed);
            FsmModel mutant = inject(golden, mu);
            auto backend = det_backend.make(golden);
            std::string spec_text =
                det_spec.empty() ? std::string{} : read_file(det_spec);
            DetectionOutcome out =
                run_bug_detection(golden, mutant, spec_text, *backend, cfg);
            std::cout << out.evidence;
            return out.detected ? 0 : 1;
        }

        if (*cmd_bench) {
            LoopConfig cfg = bench_opts.cfg;
            apply_config(cfg);
            return run_bench(bench_manifest, bench_backend, cfg,
                             cfg.results_dir, bench_workers, as_json);
        }

        if (*cmd_report) {
            json records =
                json::parse(read_file(report_results + "/records.json"));
            std::vector<ExperimentRecord> recs;
            for (const auto& jr : records) {
                ExperimentRecord r;
                r.fsm_id = jr.at("fsm_id");
                r.input_bits = jr.at("inputs");
                r.output_bits = jr.at("outputs");
                r.states = jr.at("states");
                r.backend = jr.at("backend");
                r.final_cov = jr.at("cov");
                r.iters = jr.at("iters");
                auto sc = [&](const char* key)
                    -> std::optional<ExperimentRecord::ScenarioOutcome> {
                    if (!jr.contains(key) || jr[key].is_null()) return std::nullopt;
                    return ExperimentRecord::ScenarioOutcome{
                        jr[key].at("detected").get<bool>(),
                        jr[key].at("patterns").get<int>()};
                };
                r.state_regs = sc("state_regs");
                r.io_pairs = sc("io_pairs");
                r.fuzzing = sc("fuzzing");
                recs.push_back(std::move(r));
            }
            Summary s = summarize(recs);
            write_file(report_results + "/summary.csv", s.table_csv);
            write_file(report_results + "/plotdata.csv", s.plotdata_csv);
            std::cout << s.table_csv;
            return 0;
        }

        if (*cmd_gen) {
            CorpusManifest m = generate_corpus(gen_count, gen_seed,
                                               CorpusProfile::published_default(),
                                               gen_out);
            std::cout << manifest_to_json(m);
            return 0;
        }
    } catch (const DiagError& e) {
        std::cerr << "error " << e.diag().code << ": " << e.diag().message
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

namespace {

int run_bench(const std::string& manifest_path, const BackendOpts& bopts,
              LoopConfig base_cfg, const std::string& results_dir, int workers,
              bool as_json) {
    CorpusManifest corpus = load_corpus(manifest_path);
    std::vector<ExperimentRecord> recs(corpus.entries.size());
    json records = json::array();

    auto run_entry = [&](std::size_t i) {
        const CorpusEntry& e = corpus.entries[i];
        SourceUnit dut{e.rtl_path, read_file(corpus.root + "/" + e.rtl_path),
                       SourceKind::Rtl};
        auto backend = bopts.make(e.golden);
        LoopConfig cfg = base_cfg;
        cfg.results_dir = results_dir + "/" + e.id;
        LoopResult loop = run_testbench_loop(dut, *backend, cfg);
        const CoverageReport& final = loop.final_report();

        ExperimentRecord r;
        r.fsm_id = e.id;
        r.input_bits = e.input_bits;
        r.output_bits = e.output_bits;
        r.states = e.states;
        r.backend = backend->id();
        r.final_cov = final.transitions_total()
                          ? 100.0 * final.transitions_covered() /
                                final.transitions_total()
                          : 0.0;
        r.iters = static_cast<int>(loop.iterations.size());

        if (e.canonical_mutation) {
            FsmModel mutant = inject(e.golden, *e.canonical_mutation);
            std::string spec_text =
                read_file(corpus.root + "/" + e.spec_path);
            auto run_scenario = [&](Scenario sc)
                -> ExperimentRecord::ScenarioOutcome {
                LoopConfig dc = base_cfg;
                dc.scenario = sc;
                dc.results_dir = results_dir + "/" + e.id;
                DetectionOutcome out = run_bug_detection(e.golden, mutant,
                                                         spec_text, *backend, dc);
                return {out.detected, out.patterns_to_detection};
            };
            r.state_regs = run_scenario(Scenario::StateRegs);
            r.io_pairs = run_scenario(Scenario::IOPairs);
            r.fuzzing = run_scenario(Scenario::Fuzzing);
        }
        recs[i] = std::move(r);
    };

    if (workers > 1) {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < corpus.entries.size();
                     i = next++)
                    run_entry(i);
            });
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < corpus.entries.size(); ++i) run_entry(i);
    }

    for (const auto& r : recs) {
        json jr = {{"fsm_id", r.fsm_id}, {"inputs", r.input_bits},
                   {"outputs", r.output_bits}, {"states", r.states},
                   {"backend", r.backend}, {"cov", r.final_cov},
                   {"iters", r.iters}};
        auto put = [&](const char* key,
                       const std::optional<ExperimentRecord::ScenarioOutcome>& o) {
            jr[key] = o ? json{{"detected", o->detected},
                               {"patterns", o->patterns}}
                        : json();
        };
        put("state_regs", r.state_regs);
        put("io_pairs", r.io_pairs);
        put("fuzzing", r.fuzzing);
        records.push_back(std::move(jr));
    }

    Summary s = summarize(recs);
    write_file(results_dir + "/records.json", records.dump(2) + "\n");
    write_file(results_dir + "/summary.csv", s.table_csv);
    write_file(results_dir + "/plotdata.csv", s.plotdata_csv);
    json run_manifest = {{"corpus", manifest_path},
                         {"backend", bopts.backend},
                         {"seed", base_cfg.rng_seed},
                         {"threshold", base_cfg.coverage_threshold},
                         {"max_iterations", base_cfg.max_iterations},
                         {"chunk_size", base_cfg.chunk_size},
                         {"fuzz_pattern_budget", base_cfg.fuzz_pattern_budget},
                         {"entries", corpus.entries.size()}};
    write_file(results_dir + "/run.json", run_manifest.dump(2) + "\n");
    std::cout << (as_json ? records.dump(2) + "\n" : s.table_csv);
    return 0;
}

} // namespace
