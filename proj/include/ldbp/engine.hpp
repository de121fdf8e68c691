#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ldbp/config.hpp"
#include "ldbp/stats.hpp"
#include "ldbp/trace.hpp"

namespace ldbp {

enum class EventKind : std::uint8_t { Allocate, Reallocate, Deallocate, Flush, FetchEvict };

struct SimEvent {
    std::uint64_t seq = 0;  // index of the retiring instruction
    std::uint64_t cycle = 0;
    Addr pc = 0;
    EventKind kind = EventKind::Allocate;
    FlushReason reason = FlushReason::DeltaChange;  // Flush only

    bool operator==(const SimEvent&) const = default;
};

std::string_view to_string(EventKind k);
std::string_view to_string(FlushReason r);

struct RunOptions {
    /// Digest of the retirement tables plus the non-speculative fetch
    /// tables, taken after every retirement.
    bool record_digests = false;
    bool record_events = false;
};

struct SimResult {
    SimStats stats;
    std::vector<std::uint64_t> digests;
    std::vector<SimEvent> events;
    /// Chains held in the fetch block when the run ended, by branch PC.
    std::map<Addr, ChainSlice> chains;
    std::uint64_t wrong_path_lookups = 0;
};

/// Runs the two-phase pipeline model over a trace. Fetch happens at one
/// instruction per cycle, each instruction retires pipeline_depth cycles
/// later, and a misprediction stalls fetch until the branch has retired.
///
/// With engine.wrong_path_fetches = K, every mispredicted fetch is followed
/// by K extra BOT lookups on randomly chosen tracked branches, standing in
/// for wrong-path fetches. They are not counted in the stats.
SimResult run(const SimConfig& cfg, const Trace& trace, const RunOptions& opts = {});

inline SimStats simulate(const SimConfig& cfg, const Trace& trace) { return run(cfg, trace).stats; }

/// Low-power cycles for a set of LDBP prediction cycles (sorted, each
/// < total_cycles): every idle stretch of at least `window` cycles counts,
/// including the ones before the first and after the last prediction.
std::uint64_t gated_cycles(const std::vector<std::uint64_t>& predict_cycles, std::uint64_t total_cycles,
                           std::uint64_t window);

} // namespace ldbp
