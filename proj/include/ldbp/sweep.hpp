#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ldbp/config.hpp"
#include "ldbp/stats.hpp"
#include "ldbp/trace.hpp"

namespace ldbp {

inline constexpr std::string_view kSweepAxes[] = {"sp_entries",  "lor_entries", "queue_n",        "bot_entries",
                                                   "max_loads",   "max_alu_ops", "csb_subentries", "tl_dist"};

bool is_sweep_axis(std::string_view axis);

/// Sets one sweep axis on a config. sp_entries also sizes the PLQ and
/// bot_entries also sizes the BTT. Shrinking queue_n pulls tl_dist down to
/// queue_n - 1. Throws ConfigError for unknown axes or invalid results.
SimConfig with_axis(SimConfig c, std::string_view axis, std::uint64_t value);

struct SweepPoint {
    std::string axis;
    std::uint64_t value = 0;
    double mpki = 0;
    double coverage = 0;
    std::uint64_t delayed_triggers = 0;

    bool operator==(const SweepPoint&) const = default;
};

/// Folds per-trace stats of one configuration into suite totals.
SweepPoint summarize(std::string_view axis, std::uint64_t value, const std::vector<SimStats>& runs);

/// One simulation per (value, trace) pair. `base` is used as given; callers
/// that want the large-table reference pass it through make_infinite first.
std::vector<SweepPoint> run_sweep_serial(const SimConfig& base, const std::vector<Trace>& suite,
                                         std::string_view axis, const std::vector<std::uint64_t>& values);

/// Same result as run_sweep_serial, with the simulations spread over up to
/// `jobs` OpenMP threads.
std::vector<SweepPoint> run_sweep_parallel(const SimConfig& base, const std::vector<Trace>& suite,
                                           std::string_view axis, const std::vector<std::uint64_t>& values,
                                           int jobs);

inline constexpr const char* kSweepCsvHeader = "axis,value,mpki,coverage,delayed_triggers";
std::string sweep_csv(const std::vector<SweepPoint>& points);

/// vec_scan, bfs_parent, hmmer4 and load_load with `n` iterations each.
std::vector<Trace> default_suite(std::uint64_t n = 20000, std::uint64_t seed = 1);

} // namespace ldbp
