#include "ldbp/cli.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ldbp/config.hpp"
#include "ldbp/engine.hpp"
#include "ldbp/kernels.hpp"
#include "ldbp/sweep.hpp"

namespace ldbp {

std::vector<std::uint64_t> parse_value_list(std::string_view text) {
    std::vector<std::uint64_t> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = text.substr(0, comma);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
            throw std::invalid_argument("bad value '" + std::string(item) + "' in list");
        out.push_back(v);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    }
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config_path;
    std::string preset = "ldbp";
    bool infinite = false;
};

SimConfig resolve_config(const Common& c) {
    SimConfig cfg = SimConfig::preset(c.preset);
    std::string path = c.config_path.empty() ? default_config_path() : c.config_path;
    if (!path.empty()) cfg = load_config(path, cfg);
    if (c.infinite) make_infinite(cfg);
    cfg.validate();
    return cfg;
}

Trace load_source(const std::string& trace_path, const std::string& kernel, std::optional<std::uint64_t> seed) {
    if (!trace_path.empty()) {
        try {
            return load_trace(trace_path);
        } catch (const TraceFormatError& e) {
            throw UsageError(std::string("bad trace file: ") + e.what());
        } catch (const std::runtime_error& e) {
            throw UsageError(e.what());
        }
    }
    auto k = parse_kernel_spec(kernel);
    if (seed) k.params.seed = *seed;
    return make_kernel(k.name, k.params);
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f << text;
    if (!f) throw UsageError("write to '" + path + "' failed");
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int cmd_gen(const std::string& kernel, const KernelParams& params, const std::string& path, std::ostream& out) {
    if (!is_known_kernel(kernel)) throw UsageError("unknown kernel '" + kernel + "'");
    Trace t;
    try {
        t = make_kernel(kernel, params);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    try {
        save_trace(t, path);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    std::map<Addr, std::pair<std::uint64_t, std::uint64_t>> branches;
    for (const auto& in : t.instrs)
        if (in.kind == InstrKind::CondBranch) {
            auto& b = branches[in.pc];
            ++b.first;
            b.second += *in.taken ? 1 : 0;
        }
    out << "wrote " << t.instrs.size() << " records (" << t.header.kernel << ", seed " << t.header.seed << ") to "
        << path << "\n";
    for (const auto& [pc, b] : branches)
        out << "  branch " << hex_pc(pc) << ": " << b.first << " executions, taken fraction "
            << fmt("%.4f", static_cast<double>(b.second) / static_cast<double>(b.first)) << "\n";
    return kExitOk;
}

nlohmann::ordered_json run_doc(const SimConfig& cfg, const Trace& t, const SimStats& s) {
    auto j = stats_to_json(s);
    j["trace"] = {{"kernel", t.header.kernel}, {"seed", t.header.seed}, {"count", t.instrs.size()}};
    j["config"] = config_to_json(cfg);
    return j;
}

void print_summary(const SimStats& s, std::ostream& err) {
    err << "MPKI " << fmt("%.4f", s.mpki()) << ", coverage " << fmt("%.4f", s.coverage()) << ", LDBP accuracy "
        << fmt("%.4f", s.ldbp_accuracy()) << " (" << s.ldbp_correct << "/" << s.ldbp_predicted
        << "), baseline right on LDBP-predicted " << s.baseline_correct_when_ldbp_used << ", baseline-predicted "
        << s.baseline_predicted << "\n";
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Load-dependent branch predictor simulator", "ldbp"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic trace");
    std::string gen_kernel, gen_out;
    KernelParams kp;
    gen->add_option("kernel", gen_kernel, "vec_scan | bfs_parent | hmmer4 | load_load")->required();
    gen->add_option("--n", kp.n, "Iterations / elements")->capture_default_str();
    gen->add_option("--p", kp.p, "vec_scan taken probability")->capture_default_str();
    gen->add_option("--stride", kp.stride, "vec_scan stride in bytes")->capture_default_str();
    gen->add_option("--seed", kp.seed, "Generator seed")->capture_default_str();
    gen->add_option("--neg-prob", kp.neg_prob, "bfs_parent negative-parent probability")->capture_default_str();
    gen->add_option("--index-range", kp.index_range, "load_load index range")->capture_default_str();
    gen->add_option("--out", gen_out, "Output trace file")->required();

    // sim
    auto* sim = app.add_subcommand("sim", "Run one simulation");
    Common sim_c;
    std::string sim_trace, sim_kernel, sim_out;
    unsigned reps = 1;
    std::optional<std::uint64_t> sim_seed;
    auto* t_opt = sim->add_option("--trace", sim_trace, "Trace file");
    auto* k_opt = sim->add_option("--kernel", sim_kernel, "Generator spec, e.g. vec_scan:n=1000,p=0.5,seed=42");
    t_opt->excludes(k_opt);
    sim->add_option("--config", sim_c.config_path, "JSON config (comments allowed); default $LDBP_CONFIG");
    sim->add_option("--preset", sim_c.preset, "ldbp | baseline | infinite")->capture_default_str();
    sim->add_flag("--infinite", sim_c.infinite, "512 entries in every LDBP table");
    sim->add_option("--reps", reps, "Repetitions; rep i adds i to every seed")->check(CLI::Range(1u, 100000u));
    sim->add_option("--seed", sim_seed, "Override simulator seeds (and the generator seed for --kernel)");
    sim->add_option("--out", sim_out, "Stats JSON path ('-' for stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Sweep one table size or threshold");
    Common sw_c;
    std::string axis, values_text, sw_out;
    std::vector<std::string> sw_traces, sw_kernels;
    std::uint64_t suite_n = 20000;
    int jobs = 1;
    sweep->add_option("--axis", axis, "sp_entries | lor_entries | queue_n | bot_entries | max_loads | max_alu_ops | "
                                      "csb_subentries | tl_dist")
        ->required();
    sweep->add_option("--values", values_text, "Comma-separated values")->required();
    sweep->add_option("--trace", sw_traces, "Trace files (repeatable)");
    sweep->add_option("--kernel", sw_kernels, "Generator specs (repeatable)");
    sweep->add_option("--suite-n", suite_n, "Iterations per kernel of the built-in suite")->capture_default_str();
    sweep->add_option("--config", sw_c.config_path, "JSON config applied before the 512-entry reference");
    sweep->add_option("--jobs", jobs, "Parallel simulations")->check(CLI::Range(1, 1024))->capture_default_str();
    sweep->add_option("--out", sw_out, "CSV path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) return cmd_gen(gen_kernel, kp, gen_out, out);

        if (*sim) {
            if (sim_trace.empty() == sim_kernel.empty()) throw UsageError("sim needs exactly one of --trace or --kernel");
            const SimConfig base = resolve_config(sim_c);
            std::vector<nlohmann::ordered_json> docs;
            for (unsigned i = 0; i < reps; ++i) {
                SimConfig cfg = base;
                std::optional<std::uint64_t> kseed;
                if (sim_seed || i > 0) {
                    const std::uint64_t off = i;
                    cfg.engine.seed = (sim_seed ? *sim_seed : base.engine.seed) + off;
                    cfg.baseline.tage.seed = (sim_seed ? *sim_seed : base.baseline.tage.seed) + off;
                    cfg.mem.seed = (sim_seed ? *sim_seed : base.mem.seed) + off;
                    if (!sim_kernel.empty())
                        kseed = (sim_seed ? *sim_seed : parse_kernel_spec(sim_kernel).params.seed) + off;
                }
                const Trace t = load_source(sim_trace, sim_kernel, kseed);
                const auto s = simulate(cfg, t);
                print_summary(s, err);
                docs.push_back(run_doc(cfg, t, s));
            }
            nlohmann::ordered_json doc;
            if (reps == 1) doc = docs.front();
            else doc = {{"schema", kStatsSchema}, {"runs", docs}};
            write_text(sim_out, doc.dump(2) + "\n", out);
            return kExitOk;
        }

        if (*sweep) {
            if (!is_sweep_axis(axis)) throw UsageError("unknown axis '" + axis + "'");
            const auto values = parse_value_list(values_text);
            SimConfig base = resolve_config(sw_c);
            make_infinite(base);
            std::vector<Trace> suite;
            for (const auto& p : sw_traces) suite.push_back(load_source(p, "", std::nullopt));
            for (const auto& k : sw_kernels) suite.push_back(load_source("", k, std::nullopt));
            if (suite.empty()) suite = default_suite(suite_n);
            const auto pts = jobs > 1 ? run_sweep_parallel(base, suite, axis, values, jobs)
                                      : run_sweep_serial(base, suite, axis, values);
            write_text(sw_out, sweep_csv(pts), out);
            err << "swept " << axis << " over " << values.size() << " values x " << suite.size() << " traces\n";
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace ldbp
