#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "ldbp/trace.hpp"

namespace ldbp {

inline constexpr const char* kStatsSchema = "ldbp-stats/1";

struct Counts {
    std::uint64_t executed = 0;
    std::uint64_t mispredicted = 0;
    std::uint64_t ldbp_predicted = 0;
    std::uint64_t ldbp_correct = 0;
    std::uint64_t baseline_correct = 0;

    bool operator==(const Counts&) const = default;
};

struct PcStats {
    Counts all;
    Counts post_warmup;  // instances after the first warmup_branches of this PC

    bool operator==(const PcStats&) const = default;
};

struct SimStats {
    std::uint64_t instructions = 0;
    std::uint64_t loads = 0;
    std::uint64_t cycles = 0;
    std::uint64_t cond_branches = 0;
    std::uint64_t mispredictions = 0;

    std::uint64_t ldbp_predicted = 0;
    std::uint64_t ldbp_correct = 0;
    std::uint64_t baseline_predicted = 0;
    std::uint64_t baseline_correct_when_ldbp_used = 0;
    std::uint64_t bot_tag_hits = 0;

    std::uint64_t triggers_issued = 0;
    std::uint64_t triggers_completed = 0;
    std::uint64_t triggers_stale = 0;
    std::uint64_t triggers_rejected = 0;
    std::uint64_t triggers_delayed = 0;
    std::uint64_t triggers_dropped = 0;

    std::uint64_t flush_mispredict = 0;
    std::uint64_t flush_delta_change = 0;
    std::uint64_t flush_slice_mismatch = 0;
    std::uint64_t flush_stride_eviction = 0;
    std::uint64_t flush_btt_replacement = 0;
    std::uint64_t btt_allocations = 0;
    std::uint64_t btt_deallocations = 0;
    std::uint64_t fetch_allocations = 0;
    std::uint64_t fetch_evictions = 0;
    std::uint64_t plq_full = 0;

    std::uint64_t outcomes_computed = 0;
    std::uint64_t fsm_waits = 0;
    std::uint64_t low_power_cycles = 0;
    std::uint64_t extra_memory_accesses = 0;
    std::uint64_t unmapped_reads = 0;

    std::map<Addr, PcStats> per_pc;

    bool operator==(const SimStats&) const = default;

    double mpki() const { return instructions ? static_cast<double>(mispredictions) * 1000.0 / instructions : 0.0; }
    double coverage() const { return cond_branches ? static_cast<double>(ldbp_predicted) / cond_branches : 0.0; }
    double ldbp_accuracy() const { return ldbp_predicted ? static_cast<double>(ldbp_correct) / ldbp_predicted : 0.0; }
    /// LDBP hits over fetch lookups that found the branch in the BOT.
    double valid_slot_rate() const { return bot_tag_hits ? static_cast<double>(ldbp_predicted) / bot_tag_hits : 0.0; }
    double low_power_fraction() const { return cycles ? static_cast<double>(low_power_cycles) / cycles : 0.0; }
};

/// Accuracy of the used prediction on one PC; post-warmup when requested.
double pc_accuracy(const SimStats& s, Addr pc, bool post_warmup = true);

nlohmann::ordered_json stats_to_json(const SimStats& s);
std::string hex_pc(Addr pc);

} // namespace ldbp
