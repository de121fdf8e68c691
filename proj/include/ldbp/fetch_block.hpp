#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ldbp/digest.hpp"
#include "ldbp/retire_block.hpp"
#include "ldbp/slice.hpp"
#include "ldbp/stride_predictor.hpp"

namespace ldbp {

struct FetchConfig {
    std::uint32_t lor_entries = 16;
    std::uint32_t bot_entries = 8;   // the CST has one entry per BOT entry
    std::uint32_t queue_n = 64;      // LOT data queue and BOT outcome queue depth
    std::uint32_t fsm_count = 2;
};

/// lot_id = (addr - ldstart) / delta when the division is exact and the id
/// falls inside [0, queue_n). Requires delta != 0 and |queue_n * delta| < 2^63.
std::optional<std::uint32_t> lot_id_for(Addr addr, Addr ldstart, std::int64_t delta, std::uint32_t queue_n);

/// lot_index = (lot_pos + lot_id) % queue_n
constexpr std::uint32_t lot_index_for(std::uint32_t lot_pos, std::uint32_t lot_id, std::uint32_t queue_n) {
    return (lot_pos + lot_id) % queue_n;
}

struct LorEntry {
    bool valid = false;
    StridePtr ptr;
    Addr ldstart = 0;
    std::int64_t delta = 0;
    std::uint32_t lot_pos = 0;
    int owner = -1;  // BOT index
};

struct LotEntry {
    std::vector<std::int64_t> ld_data;
    std::vector<std::uint8_t> valid;
};

struct BotEntry {
    bool valid = false;
    Addr pc = 0;
    std::vector<std::uint8_t> outcome;
    std::vector<std::uint8_t> outcome_valid;
    std::vector<std::uint8_t> pending;     // an FSM is computing this slot
    std::vector<std::uint32_t> slot_gen;   // bumped when a slot is retired
    std::uint32_t head = 0;                // slot of the oldest unretired instance
    std::uint32_t ahead = 0;               // speculative: fetched but unretired instances
    std::vector<int> lors;                 // one per chain load, in load-slot order
    int priority = 0;                      // owning BTT accuracy
    std::uint64_t alloc_seq = 0;
    std::uint64_t generation = 0;
    bool warmed = false;

    std::uint32_t outcome_ptr() const {
        return static_cast<std::uint32_t>((head + ahead) % outcome.size());
    }
};

struct CstEntry {
    bool valid = false;
    ChainSlice slice;
};

struct TriggerLoadReq {
    Addr addr = 0;
    std::uint32_t lor_index = 0;

    bool operator==(const TriggerLoadReq&) const = default;
};

struct FetchLookup {
    bool tag_hit = false;
    std::optional<bool> outcome;  // set on Hit
};

struct FetchAllocRequest {
    Addr branch_pc = 0;
    std::vector<StridePtr> ptrs;
    std::vector<LoadSnapshot> loads;
    ChainSlice slice;
    std::uint32_t inflight = 0;  // instances of the branch already fetched
    int priority = 0;
};

struct FetchAllocResult {
    bool ok = false;
    std::vector<Addr> evicted;
};

struct FetchCounters {
    std::uint64_t completions_matched = 0;
    std::uint64_t completions_stale = 0;
    std::uint64_t outcomes_computed = 0;
    std::uint64_t fsm_waits = 0;
    std::uint64_t capacity_evictions = 0;
};

/// Fetch half of the predictor. Only BotEntry::ahead is touched by
/// speculative fetches; everything else is driven from retirement.
class FetchBlock {
public:
    explicit FetchBlock(FetchConfig cfg = {});

    FetchAllocResult allocate(const FetchAllocRequest& req);

    /// Emits n_triggers loads per chain load (the last one at
    /// ldstart + delta * tl_dist), then retires the head slot and advances
    /// ldstart / lot_pos by one step.
    std::vector<TriggerLoadReq> trigger_loads(Addr branch_pc, std::uint32_t tl_dist, std::uint32_t n_triggers);

    /// Stores a completed trigger load into every LOT whose range covers
    /// addr. Returns the number of matching LOR entries.
    std::uint32_t complete_trigger(Addr addr, std::int64_t data);

    void compute_outcomes(std::uint64_t cycle);

    FetchLookup predict(Addr branch_pc);

    /// Pipeline flush: speculative pointers fall back to retirement truth.
    void flush_mispredict();
    void flush_chain(Addr branch_pc);

    void set_priority(Addr branch_pc, int priority);
    bool covers(Addr addr) const;

    const BotEntry* find(Addr branch_pc) const;
    BotEntry* find(Addr branch_pc);
    const std::vector<LorEntry>& lor() const { return lor_; }
    const std::vector<LotEntry>& lot() const { return lot_; }
    const std::vector<BotEntry>& bot() const { return bot_; }
    const std::vector<CstEntry>& cst() const { return cst_; }
    const FetchCounters& counters() const { return counters_; }
    const FetchConfig& config() const { return cfg_; }
    std::uint32_t busy_fsms() const;
    std::vector<Addr> tracked_branches() const;

    void digest(StateDigest& d, bool include_speculative) const;

private:
    struct Job {
        int bot = -1;
        std::uint64_t generation = 0;
        std::uint32_t slot = 0;
        std::uint32_t slot_gen = 0;
    };
    struct Fsm {
        bool busy = false;
        Job job;
        std::uint64_t done_cycle = 0;
        bool result = false;
    };

    void release(int bot_index);
    int pick_victim() const;
    void mark_ready(int bot_index, std::uint32_t slot);
    void store(int lor_index, std::uint32_t slot, std::int64_t data);
    bool job_live(const Job& j) const;

    FetchConfig cfg_;
    std::vector<LorEntry> lor_;
    std::vector<LotEntry> lot_;
    std::vector<BotEntry> bot_;
    std::vector<CstEntry> cst_;
    std::vector<Fsm> fsms_;
    std::deque<Job> ready_;
    std::unordered_map<Addr, int> by_pc_;
    std::uint64_t next_seq_ = 0;
    FetchCounters counters_;
};

} // namespace ldbp
