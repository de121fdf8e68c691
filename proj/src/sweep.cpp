#include "ldbp/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>


#include "ldbp/engine.hpp"
#include "ldbp/kernels.hpp"

namespace ldbp {

bool is_sweep_axis(std::string_view axis) {
    return std::find(std::begin(kSweepAxes), std::end(kSweepAxes), axis) != std::end(kSweepAxes);
}

SimConfig with_axis(SimConfig c, std::string_view axis, std::uint64_t value) {
    if (value == 0 || value > (1u << 20)) throw ConfigError(std::string(axis), "value must be in [1, 2^20]");
    const auto v = static_cast<std::uint32_t>(value);
    if (axis == "sp_entries") {
        c.sp.entries = v;
        c.rb.plq_entries = v;
    } else if (axis == "lor_entries") {
        c.fb.lor_entries = v;
    } else if (axis == "queue_n") {
        if (v < 2) throw ConfigError("queue_n", "must be at least 2");
        c.fb.queue_n = v;
        c.engine.tl_dist = std::min(c.engine.tl_dist, v - 1);
    } else if (axis == "bot_entries") {
        c.fb.bot_entries = v;
        c.rb.btt_entries = v;
    } else if (axis == "max_loads") {
        c.rb.max_loads = v;
    } else if (axis == "max_alu_ops") {
        c.rb.max_alu_ops = v;
    } else if (axis == "csb_subentries") {
        c.rb.csb_subentries = v;
    } else if (axis == "tl_dist") {
        c.engine.tl_dist = v;
    } else {
        throw ConfigError("axis", "unknown sweep axis '" + std::string(axis) + "'");
    }
    c.validate();
    return c;
}

SweepPoint summarize(std::string_view axis, std::uint64_t value, const std::vector<SimStats>& runs) {
    std::uint64_t instr = 0, miss = 0, branches = 0, ldbp = 0, delayed = 0;
    for (const auto& s : runs) {
        instr += s.instructions;
        miss += s.mispredictions;
        branches += s.cond_branches;
        ldbp += s.ldbp_predicted;
        delayed += s.triggers_delayed;
    }
    SweepPoint p;
    p.axis = std::string(axis);
    p.value = value;
    p.mpki = instr ? static_cast<double>(miss) * 1000.0 / instr : 0.0;
    p.coverage = branches ? static_cast<double>(ldbp) / branches : 0.0;
    p.delayed_triggers = delayed;
    return p;
}

namespace {

std::vector<SimConfig> configs_for(const SimConfig& base, std::string_view axis,
                                   const std::vector<std::uint64_t>& values) {
    std::vector<SimConfig> out;
    for (auto v : values) out.push_back(with_axis(base, axis, v));
    return out;
}

std::vector<SweepPoint> fold(std::string_view axis, const std::vector<std::uint64_t>& values,
                             const std::vector<SimStats>& flat, std::size_t per_value) {
    std::vector<SweepPoint> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::vector<SimStats> runs(flat.begin() + static_cast<std::ptrdiff_t>(i * per_value),
                                   flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * per_value));
        out.push_back(summarize(axis, values[i], runs));
    }
    return out;
}

} // namespace

std::vector<SweepPoint> run_sweep_serial(const SimConfig& base, const std::vector<Trace>& suite,
                                         std::string_view axis, const std::vector<std::uint64_t>& values) {
    const auto cfgs = configs_for(base, axis, values);
    std::vector<SimStats> flat;
    for (const auto& c : cfgs)
        for (const auto& t : suite) flat.push_back(simulate(c, t));
    return fold(axis, values, flat, suite.size());
}

std::vector<SweepPoint> run_sweep_parallel(const SimConfig& base, const std::vector<Trace>& suite,
                                           std::string_view axis, const std::vector<std::uint64_t>& values,
                                           int jobs) {
    const auto cfgs = configs_for(base, axis, values);
    const auto n_traces = static_cast<std::int64_t>(suite.size());
    const std::int64_t total = static_cast<std::int64_t>(cfgs.size()) * n_traces;
    std::vector<SimStats> flat(static_cast<std::size_t>(total));
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
    for (std::int64_t k = 0; k < total; ++k) {
        try {
            flat[static_cast<std::size_t>(k)] =
                simulate(cfgs[static_cast<std::size_t>(k / n_traces)], suite[static_cast<std::size_t>(k % n_traces)]);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return fold(axis, values, flat, suite.size());
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out = std::string(kSweepCsvHeader) + "\n";
    char buf[256];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%.6f,%.6f,%llu\n", p.axis.c_str(),
                      static_cast<unsigned long long>(p.value), p.mpki, p.coverage,
                      static_cast<unsigned long long>(p.delayed_triggers));
        out += buf;
    }
    return out;
}

std::vector<Trace> default_suite(std::uint64_t n, std::uint64_t seed) {
    return {gen_vec_scan(n, 0.5, 4, seed), gen_bfs_parent(n, 0.5, seed + 1), gen_hmmer4(n, seed + 2),
            gen_load_load(n, seed + 3)};
}

} // namespace ldbp
