#include "ldbp/retire_block.hpp"

#include <algorithm>
#include <stdexcept>

namespace ldbp {

RetireBlock::RetireBlock(RetireConfig cfg, StrideConfig sp_cfg)
    : cfg_(cfg), sp_(sp_cfg), rtt_(kNumRegs), csb_(kNumRegs), btt_(cfg.btt_entries), plq_(cfg.plq_entries) {
    if (cfg_.btt_entries == 0 || cfg_.plq_entries == 0)
        throw std::invalid_argument("BTT and PLQ need at least one entry");
    if (cfg_.accuracy_init <= 0 || cfg_.accuracy_init > cfg_.accuracy_max)
        throw std::invalid_argument("BTT accuracy init must be in (0, max]");
    // The zero register is a constant: a valid chain leaf with no loads.
    rtt_[kZeroReg].valid = true;
}

std::uint32_t RetireBlock::btt_index(Addr pc) const {
    return static_cast<std::uint32_t>(((pc >> 2) ^ (pc >> 13)) % cfg_.btt_entries);
}

std::uint64_t RetireBlock::btt_tag(Addr pc) const {
    const std::uint64_t upper = (pc >> 2) / cfg_.btt_entries;
    return cfg_.btt_tag_bits >= 64 ? upper : upper & ((std::uint64_t{1} << cfg_.btt_tag_bits) - 1);
}

void RetireBlock::invalidate(RegId r) {
    if (r == kZeroReg) return;
    auto& e = rtt_[r];
    e.valid = false;
    e.nops = cfg_.nops_max;  // saturated
    e.ptrs.clear();
    csb_[r].ops.clear();
    csb_[r].overflow = false;
}

std::vector<Addr> RetireBlock::retire_load(const RetiredInstr& in) {
    return retire_load(in, sp_.update(in.pc, *in.load_addr));
}

std::vector<Addr> RetireBlock::retire_load(const RetiredInstr& in, const StrideUpdate& upd) {
    if (in.kind != InstrKind::Load) throw std::invalid_argument("retire_load on a non-load record");
    std::vector<Addr> flushed;
    if (upd.evicted_tracked) {
        const StridePtr victim = *upd.evicted_tracked;
        for (auto& e : btt_) {
            if (!e.valid) continue;
            if (std::find(e.ptrs.begin(), e.ptrs.end(), victim) == e.ptrs.end()) continue;
            flushed.push_back(e.pc);
            release(e);
            ++counters_.chain_flushes;
        }
        for (auto& q : plq_)
            if (q.valid && q.ptr == victim) q = PlqEntry{};
    }

    const RegId dst = *in.dst;
    if (sp_.is_predictable(upd.ptr)) {
        auto& r = rtt_[dst];
        r.valid = true;
        r.nops = 0;
        r.ptrs.assign(1, upd.ptr);
        csb_[dst].ops.assign(1, SliceOp::load(0));
        csb_[dst].overflow = cfg_.csb_subentries < 1;
    } else {
        invalidate(dst);
    }

    if (sp_.entry(upd.ptr).tracking && !upd.delta_matched)
        if (auto* q = find_plq(upd.ptr)) q->tracking = false;
    return flushed;
}

RetireBlock::Operand RetireBlock::operand(std::optional<RegId> r, bool push_zero) const {
    Operand o;
    if (!r || *r == kZeroReg) {
        if (push_zero) o.ops.push_back(SliceOp::zero());
        return o;
    }
    const auto& e = rtt_[*r];
    o.valid = e.valid;
    o.nops = e.nops;
    o.ptrs = e.ptrs;
    o.ops = csb_[*r].ops;
    o.overflow = csb_[*r].overflow;
    return o;
}

namespace {

void append_shifted(std::vector<SliceOp>& dst, const std::vector<SliceOp>& src, std::size_t shift) {
    for (auto op : src) {
        if (op.op == SliceOpcode::LoadSlot) op.slot = static_cast<std::uint16_t>(op.slot + shift);
        dst.push_back(op);
    }
}

} // namespace

void RetireBlock::retire_alu(const RetiredInstr& in) {
    if (in.kind == InstrKind::ComplexAlu) {
        if (in.dst) invalidate(*in.dst);
        return;
    }
    if (in.kind != InstrKind::SimpleAlu) throw std::invalid_argument("retire_alu on a non-ALU record");
    const RegId dst = *in.dst;
    const bool unary = is_unary(*in.alu_op);
    const Operand a = operand(in.src1, true);
    const Operand b = unary ? Operand{} : operand(in.src2, true);
    if (!a.valid || !b.valid) {
        invalidate(dst);
        return;
    }
    const std::uint64_t nops = std::uint64_t{a.nops} + b.nops + 1;  // rtt[dst] = rtt[src1] + rtt[src2] + 1
    const std::size_t nloads = a.ptrs.size() + b.ptrs.size();
    if (nops > cfg_.nops_max || nloads > cfg_.max_loads) {
        invalidate(dst);
        return;
    }
    RttEntry r;
    r.valid = true;
    r.nops = static_cast<std::uint32_t>(nops);
    r.ptrs = a.ptrs;
    r.ptrs.insert(r.ptrs.end(), b.ptrs.begin(), b.ptrs.end());

    CsbEntry c;
    c.overflow = a.overflow || b.overflow;
    if (!c.overflow) {
        c.ops = a.ops;
        append_shifted(c.ops, b.ops, a.ptrs.size());
        c.ops.push_back(SliceOp::alu(*in.alu_op, in.imm.value_or(0)));
        if (c.ops.size() > cfg_.csb_subentries) c.overflow = true;
    }
    if (c.overflow) c.ops.clear();
    rtt_[dst] = std::move(r);
    csb_[dst] = std::move(c);
}

void RetireBlock::retire_other(const RetiredInstr& in) {
    if (in.dst) invalidate(*in.dst);
}

PlqEntry* RetireBlock::find_plq(StridePtr p) {
    for (auto& q : plq_)
        if (q.valid && q.ptr == p) return &q;
    return nullptr;
}

bool RetireBlock::referenced_elsewhere(const BttEntry& self, StridePtr p) const {
    for (const auto& e : btt_) {
        if (!e.valid || &e == &self) continue;
        if (std::find(e.ptrs.begin(), e.ptrs.end(), p) != e.ptrs.end()) return true;
    }
    return false;
}

void RetireBlock::release(BttEntry& e) {
    for (const auto& p : e.ptrs) {
        if (referenced_elsewhere(e, p)) continue;
        if (sp_.is_live(p)) sp_.set_tracking(p, false);
        if (auto* q = find_plq(p)) *q = PlqEntry{};
    }
    e = BttEntry{};
}

const BttEntry* RetireBlock::find_btt(Addr pc) const {
    const auto& e = btt_[btt_index(pc)];
    return e.valid && e.pctag == btt_tag(pc) ? &e : nullptr;
}

std::optional<int> RetireBlock::accuracy_of(Addr pc) const {
    if (const auto* e = find_btt(pc)) return e->accuracy;
    return std::nullopt;
}

std::vector<LoadSnapshot> RetireBlock::snapshot(const std::vector<StridePtr>& ptrs) const {
    std::vector<LoadSnapshot> out;
    out.reserve(ptrs.size());
    for (const auto& p : ptrs) {
        const auto& e = sp_.entry(p);
        out.push_back({e.lastaddr, e.delta});
    }
    return out;
}

BranchRetireAction RetireBlock::retire_branch(const RetiredInstr& in, const BranchFlags& flags) {
    if (in.kind != InstrKind::CondBranch) throw std::invalid_argument("retire_branch on a non-branch record");

    // Candidate chain from the current rename state. Each source keeps its own
    // op list; the second source's load slots follow the first's.
    const Operand a = operand(in.src1, false);
    const Operand b = operand(in.src2, false);
    ChainSlice slice;
    slice.cond = *in.br_cond;
    slice.src1_ops = a.ops;
    append_shifted(slice.src2_ops, b.ops, a.ptrs.size());
    slice.n_loads = static_cast<std::uint32_t>(a.ptrs.size() + b.ptrs.size());
    slice.n_alu_ops = a.nops + b.nops;
    std::vector<StridePtr> ptrs = a.ptrs;
    ptrs.insert(ptrs.end(), b.ptrs.begin(), b.ptrs.end());

    bool chain_ok = a.valid && b.valid && !a.overflow && !b.overflow && slice.n_loads >= 1 &&
                    slice.n_loads <= cfg_.max_loads && slice.n_alu_ops <= cfg_.max_alu_ops;
    for (const auto& p : ptrs)
        chain_ok = chain_ok && sp_.is_live(p) && sp_.is_predictable(p);

    const auto idx = btt_index(in.pc);
    auto& slot = btt_[idx];
    const bool hit = slot.valid && slot.pctag == btt_tag(in.pc);

    if (hit) {
        bool tracked = true;
        for (const auto& p : slot.ptrs) {
            const auto* q = sp_.is_live(p) ? find_plq(p) : nullptr;
            tracked = tracked && q && q->tracking;
        }
        if (!tracked || !chain_ok || ptrs != slot.ptrs || slice != slot.slice) {
            const Addr pc = slot.pc;
            release(slot);
            ++counters_.chain_flushes;
            return action::Flush{pc, tracked ? FlushReason::SliceMismatch : FlushReason::DeltaChange};
        }
        if (flags.ldbp_used) {
            if (flags.ldbp_correct && !flags.baseline_correct)
                slot.accuracy = std::min(slot.accuracy + 1, cfg_.accuracy_max);
            else if (!flags.ldbp_correct && flags.baseline_correct)
                slot.accuracy = std::max(slot.accuracy - 1, 0);
        }
        if (slot.accuracy == 0) {
            const Addr pc = slot.pc;
            release(slot);
            ++counters_.btt_deallocations;
            return action::DeallocateBtt{pc};
        }
        return action::BttHit{slot.pc, slot.accuracy};
    }

    if (!flags.baseline_low_conf || !chain_ok) return action::None{};

    // The PLQ must be able to hold every load that is not already queued.
    std::vector<StridePtr> fresh;
    for (const auto& p : ptrs)
        if (!find_plq(p) && std::find(fresh.begin(), fresh.end(), p) == fresh.end()) fresh.push_back(p);
    const auto free_plq = static_cast<std::size_t>(
        std::count_if(plq_.begin(), plq_.end(), [](const PlqEntry& q) { return !q.valid; }));
    std::optional<Addr> victim;
    if (slot.valid) {
        // Entries freed by replacing the victim count toward the budget.
        std::size_t reclaim = 0;
        for (const auto& p : slot.ptrs)
            if (!referenced_elsewhere(slot, p) && find_plq(p) &&
                std::find(ptrs.begin(), ptrs.end(), p) == ptrs.end())
                ++reclaim;
        if (fresh.size() > free_plq + reclaim) {
            ++counters_.plq_full;
            return action::None{};
        }
        victim = slot.pc;
        release(slot);
        ++counters_.chain_flushes;
    } else if (fresh.size() > free_plq) {
        ++counters_.plq_full;
        return action::None{};
    }
    // Re-scan: the release above may have dropped shared PLQ entries.
    for (const auto& p : ptrs) {
        if (find_plq(p)) continue;
        auto it = std::find_if(plq_.begin(), plq_.end(), [](const PlqEntry& q) { return !q.valid; });
        *it = PlqEntry{true, p, true};
    }
    for (const auto& p : ptrs) {
        sp_.set_tracking(p, true);
        find_plq(p)->tracking = true;
    }

    slot.valid = true;
    slot.pctag = btt_tag(in.pc);
    slot.pc = in.pc;
    slot.ptrs = ptrs;
    slot.accuracy = cfg_.accuracy_init;
    slot.slice = slice;
    ++counters_.btt_allocations;

    action::AllocateBtt out;
    out.branch_pc = in.pc;
    out.slice = std::move(slice);
    out.loads = snapshot(ptrs);
    out.ptrs = std::move(ptrs);
    out.victim_pc = victim;
    return out;
}

void RetireBlock::digest(StateDigest& d) const {
    for (const auto& e : sp_.entries())
        d.add(e.valid).add(e.pctag).add(e.lastaddr).add(e.delta).add(e.confidence).add(e.tracking).add(e.generation);
    for (RegId r = 0; r < kNumRegs; ++r) {
        const auto& e = rtt_[r];
        d.add(e.valid).add(e.nops).add(e.ptrs.size());
        for (const auto& p : e.ptrs) d.add(p.index).add(p.generation);
        d.add(csb_[r].overflow).add(csb_[r].ops.size());
        for (const auto& op : csb_[r].ops) d.add(op.op).add(op.imm).add(op.slot);
    }
    for (const auto& e : btt_) {
        d.add(e.valid).add(e.pctag).add(e.pc).add(e.accuracy).add(e.ptrs.size());
        for (const auto& p : e.ptrs) d.add(p.index).add(p.generation);
        d.add(e.slice.src1_ops.size()).add(e.slice.src2_ops.size()).add(e.slice.cond);
    }
    for (const auto& q : plq_) d.add(q.valid).add(q.ptr.index).add(q.ptr.generation).add(q.tracking);
}

} // namespace ldbp
