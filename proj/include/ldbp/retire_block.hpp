#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "ldbp/digest.hpp"
#include "ldbp/slice.hpp"
#include "ldbp/stride_predictor.hpp"
#include "ldbp/trace.hpp"

namespace ldbp {

struct RetireConfig {
    std::uint32_t nops_max = 7;       // 3-bit rtt.nops
    std::uint32_t max_loads = 5;
    std::uint32_t max_alu_ops = 3;
    std::uint32_t btt_entries = 8;
    std::uint32_t btt_tag_bits = 10;
    std::uint32_t csb_subentries = 4;
    std::uint32_t plq_entries = 48;
    int accuracy_max = 7;             // 3-bit btt.accuracy
    int accuracy_init = 4;
};

struct RttEntry {
    std::uint32_t nops = 0;
    std::vector<StridePtr> ptrs;
    bool valid = false;
};

struct CsbEntry {
    std::vector<SliceOp> ops;
    bool overflow = false;
};

struct BttEntry {
    bool valid = false;
    std::uint64_t pctag = 0;
    Addr pc = 0;
    std::vector<StridePtr> ptrs;
    int accuracy = 0;
    ChainSlice slice;
};

struct PlqEntry {
    bool valid = false;
    StridePtr ptr;
    bool tracking = false;
};

struct LoadSnapshot {
    Addr lastaddr = 0;
    std::int64_t delta = 0;
};

enum class FlushReason : std::uint8_t { DeltaChange, SliceMismatch, StrideEviction, BttReplacement };

namespace action {
struct None {};
struct AllocateBtt {
    Addr branch_pc = 0;
    ChainSlice slice;
    std::vector<StridePtr> ptrs;
    std::vector<LoadSnapshot> loads;
    std::optional<Addr> victim_pc;  // previous owner of the BTT slot
};
struct BttHit {
    Addr branch_pc = 0;
    int accuracy = 0;
};
struct Flush {
    Addr branch_pc = 0;
    FlushReason reason = FlushReason::DeltaChange;
};
struct DeallocateBtt {
    Addr branch_pc = 0;
};
} // namespace action

using BranchRetireAction =
    std::variant<action::None, action::AllocateBtt, action::BttHit, action::Flush, action::DeallocateBtt>;

/// Per-dynamic-branch facts the engine computes before retirement.
struct BranchFlags {
    bool baseline_low_conf = false;
    bool ldbp_used = false;
    bool ldbp_correct = false;
    bool baseline_correct = false;
};

struct RetireCounters {
    std::uint64_t btt_allocations = 0;
    std::uint64_t btt_deallocations = 0;
    std::uint64_t chain_flushes = 0;
    std::uint64_t plq_full = 0;
};

/// Retirement half of the predictor: stride predictor, rename tracking
/// table, code snippet builder, branch trigger table and pending load queue.
/// Everything here is updated with retired (non-speculative) state only.
class RetireBlock {
public:
    explicit RetireBlock(RetireConfig cfg = {}, StrideConfig sp_cfg = {});

    /// Runs the stride update for a retiring load and then retire_load.
    /// Returns branch PCs whose chains were flushed by a stride eviction.
    std::vector<Addr> retire_load(const RetiredInstr& in);
    std::vector<Addr> retire_load(const RetiredInstr& in, const StrideUpdate& upd);

    void retire_alu(const RetiredInstr& in);
    /// Other/complex records: invalidates the destination if there is one.
    void retire_other(const RetiredInstr& in);

    BranchRetireAction retire_branch(const RetiredInstr& in, const BranchFlags& flags);

    std::vector<LoadSnapshot> snapshot(const std::vector<StridePtr>& ptrs) const;
    std::optional<int> accuracy_of(Addr branch_pc) const;
    const BttEntry* find_btt(Addr branch_pc) const;

    StridePredictor& stride() { return sp_; }
    const StridePredictor& stride() const { return sp_; }
    const RttEntry& rtt(RegId r) const { return rtt_.at(r); }
    const CsbEntry& csb(RegId r) const { return csb_.at(r); }
    const std::vector<BttEntry>& btt() const { return btt_; }
    const std::vector<PlqEntry>& plq() const { return plq_; }
    const RetireCounters& counters() const { return counters_; }
    const RetireConfig& config() const { return cfg_; }

    void digest(StateDigest& d) const;

    std::uint32_t btt_index(Addr pc) const;
    std::uint64_t btt_tag(Addr pc) const;

private:
    struct Operand {
        bool valid = true;
        std::uint32_t nops = 0;
        std::vector<StridePtr> ptrs;
        std::vector<SliceOp> ops;
        bool overflow = false;
    };

    Operand operand(std::optional<RegId> r, bool push_zero) const;
    void invalidate(RegId r);
    void release(BttEntry& e);
    PlqEntry* find_plq(StridePtr p);
    bool referenced_elsewhere(const BttEntry& self, StridePtr p) const;

    RetireConfig cfg_;
    StridePredictor sp_;
    std::vector<RttEntry> rtt_;
    std::vector<CsbEntry> csb_;
    std::vector<BttEntry> btt_;
    std::vector<PlqEntry> plq_;
    RetireCounters counters_;
};

} // namespace ldbp
