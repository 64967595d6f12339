// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fsmcov/corpus.hpp"
#include "fsmcov/loops.hpp"
#include "fsmcov/parser.hpp"

namespace fsmcov {

using nlohmann::json;
namespace fs = std::filesystem;

CorpusProfile CorpusProfile::published_default() {
    CorpusProfile p;
    p.buckets = {
        {45, 2, 7, 1, 3, 1, 4},   // Easy
        {29, 8, 14, 1, 4, 1, 6},  // Medium
        {26, 15, 28, 1, 5, 2, 8}, // Hard
    };
    return p;
}

namespace {

Guard guard_for_vectors(const std::vector<std::uint32_t>& vs, int input_width) {
    std::uint32_t diff = 0;
    for (std::uint32_t v : vs) diff |= v ^ vs[0];
    int free_bits = __builtin_popcount(diff);
    if (vs.size() == (1u << free_bits)) {
        std::vector<Guard::Literal> lits;
        for (int b = 0; b < input_width; ++b)
            if (!((diff >> b) & 1u))
                lits.push_back({b, ((vs[0] >> b) & 1u) != 0});
        return Guard::cube(std::move(lits));
    }
    return Guard::explicit_set(vs);
}

int bits_for(int n) {
    int w = 1;
    while ((1 << w) < n) ++w;
    return w;
}

std::string binary(std::uint32_t v, int width) {
    std::string s;
    for (int b = width - 1; b >= 0; --b) s += ((v >> b) & 1u) ? '1' : '0';
    return s;
}

FsmModel random_machine(const std::string& name, std::mt19937_64& rng,
                        const CorpusProfile::Bucket& b) {
    FsmModel m;
    m.name = name;
    int n = b.min_states + static_cast<int>(rng() % (b.max_states - b.min_states + 1));
    int iw = b.min_inputs + static_cast<int>(rng() % (b.max_inputs - b.min_inputs + 1));
    int ow = b.min_outputs + static_cast<int>(rng() % (b.max_outputs - b.min_outputs + 1));
    m.inputs = {{"in", iw}};
    m.outputs = {{"out", ow}};
    m.style = FsmStyle::Moore;
    m.reset_state = 0;
    m.reset_polarity = ResetPolarity::ActiveHigh;

    int enc_w = bits_for(n);
    std::uint32_t out_mask = BitVec::mask(ow);
    for (int s = 0; s < n; ++s) {
        StateDef st;
        st.id = s;
        st.label = "S" + std::to_string(s);
        st.encoding = BitVec(static_cast<std::uint32_t>(s), enc_w);
        st.moore_output = BitVec(static_cast<std::uint32_t>(rng()) & out_mask, ow);
        m.states.push_back(std::move(st));
    }

    std::uint32_t space = 1u << iw;
    for (int s = 0; s < n; ++s) {
        // Target set: the chain successor keeps every state reachable from S0;
        // the rest are free picks.
        std::vector<int> targets;
        if (s + 1 < n) targets.push_back(s + 1);
        int extra = 1 + static_cast<int>(rng() % 3);
        int want = std::min({1 + extra, static_cast<int>(space), n});
        while (static_cast<int>(targets.size()) < want) {
            int t = static_cast<int>(rng() % n);
            if (std::find(targets.begin(), targets.end(), t) == targets.end())
                targets.push_back(t);
        }
        std::map<int, std::vector<std::uint32_t>> owner;
        for (std::uint32_t v = 0; v < space; ++v) {
            int t = v < targets.size()
                        ? targets[v]
                        : targets[rng() % targets.size()];
            owner[t].push_back(v);
        }
        auto largest = owner.begin();
        for (auto it = owner.begin(); it != owner.end(); ++it)
            if (it->second.size() > largest->second.size()) largest = it;
        for (auto it = owner.begin(); it != owner.end(); ++it) {
            Transition t;
            t.from = s;
            t.to = it->first;
            if (owner.size() == 1)
                t.guard = Guard::cube({});
            else if (it == largest)
                t.guard = Guard::fallback();
            else
                t.guard = guard_for_vectors(it->second, iw);
            m.transitions.push_back(std::move(t));
        }
    }
    m.canonicalize();
    return m;
}

std::string spec_text(const FsmModel& m) {
    int iw = m.total_input_width();
    int ow = m.total_output_width();
    std::ostringstream os;
    os << "Write a Verilog module named " << m.name
       << " that implements a Moore finite state machine.\n"
       << "Ports: clk (clock), rst (synchronous, active-high reset), in ("
       << iw << "-bit input), out (" << ow << "-bit output).\n"
       << "The machine has " << m.states.size() << " states, S0 through S"
       << m.states.size() - 1 << ", and resets to "
       << m.states[m.reset_state].label << ".\n";
    for (const auto& st : m.states) {
        os << "In " << st.label << " the output is " << ow << "'b"
           << binary(st.moore_output.value, ow) << ".";
        for (int tid : m.outgoing[st.id]) {
            const Transition& t = m.transitions[tid];
            if (t.guard.kind == Guard::Kind::Default)
                os << " Otherwise go to " << m.states[t.to].label << ".";
            else
                os << " When " << m.guard_text(t.guard) << ", go to "
                   << m.states[t.to].label << ".";
        }
        os << "\n";
    }
    return os.str();
}

json mutation_json(const Mutation& mu) {
    return {{"kind", mutation_kind_name(mu.kind)},
            {"site", mu.site},
            {"payload", mu.payload},
            {"seed", mu.seed}};
}

Mutation mutation_from_json(const json& j) {
    Mutation mu;
    std::string k = j.at("kind").get<std::string>();
    if (k == "RetargetTransition") mu.kind = MutationKind::RetargetTransition;
    else if (k == "SwapOutputs") mu.kind = MutationKind::SwapOutputs;
    else if (k == "FlipGuardLiteral") mu.kind = MutationKind::FlipGuardLiteral;
    else if (k == "WrongResetState") mu.kind = MutationKind::WrongResetState;
    else raise("ManifestError", "unknown mutation kind: " + k);
    mu.site = j.at("site").get<int>();
    mu.payload = j.at("payload").get<std::uint32_t>();
    mu.seed = j.at("seed").get<std::uint64_t>();
    return mu;
}

} // namespace

CorpusManifest generate_corpus(int count, std::uint64_t seed,
                               const CorpusProfile& profile,
                               const std::string& out_dir) {
    if (count < 1) raise("InvalidArgument", "corpus count must be at least 1");
    if (profile.buckets.empty())
        raise("InvalidArgument", "profile has no buckets");
    std::mt19937_64 rng(seed);
    int total_weight = 0;
    for (const auto& b : profile.buckets) total_weight += b.weight;

    CorpusManifest manifest;
    manifest.root = out_dir;
    manifest.notes.push_back("synthetic corpus, seed " + std::to_string(seed));

    for (int i = 0; i < count; ++i) {
        int pick = static_cast<int>(rng() % total_weight);
        const CorpusProfile::Bucket* bucket = &profile.buckets.back();
        for (const auto& b : profile.buckets) {
            if (pick < b.weight) {
                bucket = &b;
                break;
            }
            pick -= b.weight;
        }
        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "fsm%03d", i + 1);
        FsmModel generated = random_machine(idbuf, rng, *bucket);
        std::string rtl = render_fsm_rtl(generated);

        CorpusEntry e;
        e.id = idbuf;
        e.rtl_path = e.id + ".v";
        e.spec_path = e.id + ".txt";
        // The extracted model is the golden cache, so the manifest can never
        // drift from what the frontend reads back.
        e.golden = extract_fsm(
            parse_module(SourceUnit{e.rtl_path, rtl, SourceKind::Rtl}));
        e.input_bits = e.golden.total_input_width();
        e.output_bits = e.golden.total_output_width();
        e.states = static_cast<int>(e.golden.states.size());
        e.level = level_for_states(e.states);
        try {
            e.canonical_mutation = sample_mutation(e.golden, seed + i + 1);
        } catch (const DiagError&) {
            e.canonical_mutation = std::nullopt;
        }
        write_file(out_dir + "/" + e.rtl_path, rtl);
        write_file(out_dir + "/" + e.spec_path, spec_text(e.golden));
        manifest.entries.push_back(std::move(e));
    }
    save_corpus(manifest, out_dir + "/manifest.json");
    return manifest;
}

std::string manifest_to_json(const CorpusManifest& m) {
    json j;
    j["format"] = m.format;
    j["notes"] = m.notes;
    j["entries"] = json::array();
    for (const auto& e : m.entries) {
        json je = {{"id", e.id},
                   {"rtl", e.rtl_path},
                   {"spec", e.spec_path},
                   {"inputs", e.input_bits},
                   {"outputs", e.output_bits},
                   {"states", e.states},
                   {"level", e.level}};
        je["mutation"] =
            e.canonical_mutation ? mutation_json(*e.canonical_mutation) : json();
        j["entries"].push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

void save_corpus(const CorpusManifest& m, const std::string& manifest_path) {
    write_file(manifest_path, manifest_to_json(m));
}

CorpusManifest load_corpus(const std::string& manifest_path) {
    if (!fs::exists(manifest_path))
        raise("ManifestError", "manifest file not found: " + manifest_path);
    json j;
    try {
        j = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        raise("ManifestError", std::string("manifest is not valid JSON: ") + e.what());
    }

    CorpusManifest m;
    m.root = fs::path(manifest_path).parent_path().string();
    if (m.root.empty()) m.root = ".";
    m.format = j.value("format", 0);
    std::vector<std::string> problems;
    if (m.format != 1)
        problems.push_back("unsupported manifest format " +
                           std::to_string(m.format));
    for (const auto& n : j.value("notes", json::array()))
        m.notes.push_back(n.get<std::string>());

    std::vector<std::string> seen_ids;
    for (const auto& je : j.value("entries", json::array())) {
        CorpusEntry e;
        try {
            e.id = je.at("id").get<std::string>();
            e.rtl_path = je.at("rtl").get<std::string>();
            e.spec_path = je.at("spec").get<std::string>();
            e.input_bits = je.at("inputs").get<int>();
            e.output_bits = je.at("outputs").get<int>();
            e.states = je.at("states").get<int>();
            e.level = je.at("level").get<std::string>();
            if (je.contains("mutation") && !je["mutation"].is_null())
                e.canonical_mutation = mutation_from_json(je["mutation"]);
        } catch (const json::exception& ex) {
            problems.push_back(std::string("malformed entry: ") + ex.what());
            continue;
        }
        if (std::find(seen_ids.begin(), seen_ids.end(), e.id) != seen_ids.end())
            problems.push_back(e.id + ": duplicate id");
        seen_ids.push_back(e.id);

        std::string rtl_full = m.root + "/" + e.rtl_path;
        std::string spec_full = m.root + "/" + e.spec_path;
        if (!fs::exists(rtl_full)) {
            problems.push_back(e.id + ": missing RTL file " + e.rtl_path);
            continue;
        }
        if (!fs::exists(spec_full)) {
            problems.push_back(e.id + ": missing spec file " + e.spec_path);
            continue;
        }
        if (read_file(spec_full).empty())
            problems.push_back(e.id + ": spec file is empty");
        try {
            e.golden = extract_fsm(parse_module(
                SourceUnit{rtl_full, read_file(rtl_full), SourceKind::Rtl}));
        } catch (const DiagError& ex) {
            problems.push_back(e.id + ": extraction failed: " +
                               ex.diag().message);
            continue;
        }
        if (e.states != static_cast<int>(e.golden.states.size()))
            problems.push_back(e.id + ": declared " + std::to_string(e.states) +
                               " states but extracted " +
                               std::to_string(e.golden.states.size()));
        if (e.input_bits != e.golden.total_input_width())
            problems.push_back(e.id + ": declared input width " +
                               std::to_string(e.input_bits) +
                               " but extracted " +
                               std::to_string(e.golden.total_input_width()));
        if (e.output_bits != e.golden.total_output_width())
            problems.push_back(e.id + ": declared output width " +
                               std::to_string(e.output_bits) +
                               " but extracted " +
                               std::to_string(e.golden.total_output_width()));
        if (e.canonical_mutation) {
            try {
                inject(e.golden, *e.canonical_mutation);
            } catch (const DiagError& ex) {
                problems.push_back(e.id + ": canonical mutation invalid: " +
                                   ex.diag().message);
            }
        }
        m.entries.push_back(std::move(e));
    }
    if (!problems.empty()) {
        std::string msg = "corpus validation failed:";
        for (const auto& p : problems) msg += "\n  " + p;
        raise("ManifestError", msg);
    }
    return m;
}

} // namespace fsmcov
