#pragma once

// Randomized cases for the three address/dataflow relations. Each returns an
// empty string on success and a description of the first mismatch otherwise.

#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ldbp/fetch_block.hpp"
#include "ldbp/retire_block.hpp"
#include "ldbp/rng.hpp"
#include "oracles.hpp"

namespace cases {

using namespace ldbp;

/// Random straight-line program ending in a branch, retired through a fresh
/// retire block. RTT op/load counts and the allocated slice are compared
/// with a backward walk over the program, and the slice is evaluated on the
/// leaf data against a direct recomputation of the branch operands.
inline std::string slice_counts(std::uint64_t seed) {
    SplitMix64 rng(seed);
    RetireConfig rc;
    if (rng.bernoulli(0.3)) {
        rc.nops_max = 12;
        rc.max_loads = 8;
        rc.max_alu_ops = 10;
        rc.csb_subentries = 24;
    }
    RetireBlock rb(rc);
    std::vector<RetiredInstr> prog;
    std::vector<bool> predictable;

    constexpr int kLoadPcs = 4;
    Addr last[kLoadPcs];
    std::int64_t stride[kLoadPcs];
    auto load_pc = [](int i) { return Addr{0x1000 + 4u * static_cast<unsigned>(i)}; };
    auto retire = [&](const RetiredInstr& in) {
        prog.push_back(in);
        bool pred = false;
        switch (in.kind) {
        case InstrKind::Load:
            rb.retire_load(in);
            pred = rb.stride().is_predictable(*rb.stride().lookup(in.pc));
            break;
        case InstrKind::SimpleAlu: rb.retire_alu(in); break;
        case InstrKind::Store: break;
        default: rb.retire_other(in); break;
        }
        predictable.push_back(pred);
    };

    for (int i = 0; i < kLoadPcs; ++i) {
        last[i] = 0x100000 * static_cast<Addr>(i + 1);
        stride[i] = static_cast<std::int64_t>(rng.uniform(3)) * 8 - 8;  // -8, 0 or 8
        for (int k = 0; k < 18; ++k) {
            last[i] += static_cast<Addr>(stride[i]);
            retire(RetiredInstr::load(load_pc(i), 31, 30, last[i], 0));
        }
    }

    constexpr RegId kRegs = 8;
    auto reg = [&] { return static_cast<RegId>(1 + rng.uniform(kRegs)); };
    auto src = [&] { return static_cast<RegId>(rng.uniform(kRegs + 1)); };
    const auto body = 3 + rng.uniform(18);
    for (std::uint64_t k = 0; k < body; ++k) {
        const auto roll = rng.uniform(100);
        const Addr pc = 0x2000 + 4 * k;
        if (roll < 40) {
            const int i = static_cast<int>(rng.uniform(kLoadPcs));
            if (rng.bernoulli(0.9)) last[i] += static_cast<Addr>(stride[i]);
            else last[i] += 4 + rng.uniform(64);
            retire(RetiredInstr::load(load_pc(i), reg(), 30, last[i],
                                      static_cast<std::int64_t>(rng.uniform(2000)) - 1000));
        } else if (roll < 88) {
            const auto op = static_cast<AluOp>(rng.uniform(8));
            const auto imm = static_cast<std::int64_t>(rng.uniform(40)) - 8;
            if (is_unary(op)) retire(RetiredInstr::alu(pc, op, reg(), src(), std::nullopt, imm));
            else retire(RetiredInstr::alu(pc, op, reg(), src(), src()));
        } else if (roll < 93) {
            retire(RetiredInstr::complex_alu(pc, reg(), src(), src()));
        } else if (roll < 96) {
            retire(RetiredInstr::store(pc, src(), 30, 0x900000 + 8 * k));
        } else {
            retire(RetiredInstr::other(pc, reg()));
        }
    }

    const oracle::SliceLimits lim{rc.nops_max, rc.max_loads, rc.csb_subentries};
    const std::size_t end = prog.size();
    std::ostringstream err;
    for (RegId r = 1; r <= kRegs; ++r) {
        auto o = oracle::backward_slice(prog, predictable, r, end, lim, true);
        const auto& e = rb.rtt(r);
        if (o.valid != e.valid || (o.valid && (o.n_alu_ops != e.nops || o.load_leaves.size() != e.ptrs.size()))) {
            err << "seed " << seed << " r" << int(r) << ": oracle valid=" << o.valid << " nops=" << o.n_alu_ops
                << " loads=" << o.load_leaves.size() << " vs rtt valid=" << e.valid << " nops=" << e.nops
                << " loads=" << e.ptrs.size();
            return err.str();
        }
        if (o.valid && (o.csb_len > rc.csb_subentries) != rb.csb(r).overflow) {
            err << "seed " << seed << " r" << int(r) << ": snippet overflow mismatch";
            return err.str();
        }
    }

    const RegId s1 = reg();
    const auto s2kind = rng.uniform(3);
    const std::optional<RegId> s2 = s2kind == 0 ? std::nullopt : std::optional<RegId>(s2kind == 1 ? 0 : reg());
    const auto cond = static_cast<BranchCond>(rng.uniform(6));
    const auto br = RetiredInstr::branch(0x3000, cond, s1, s2, false);
    auto a = oracle::backward_slice(prog, predictable, s1, end, lim, false);
    auto b = oracle::backward_slice(prog, predictable, s2, end, lim, false);
    const auto loads = a.load_leaves.size() + b.load_leaves.size();
    const auto ops = a.n_alu_ops + b.n_alu_ops;
    bool ok = a.valid && b.valid && a.csb_len <= rc.csb_subentries && b.csb_len <= rc.csb_subentries &&
              loads >= 1 && loads <= rc.max_loads && ops <= rc.max_alu_ops;
    std::vector<std::size_t> leaves = a.load_leaves;
    leaves.insert(leaves.end(), b.load_leaves.begin(), b.load_leaves.end());
    for (auto i : leaves) ok = ok && rb.stride().is_predictable(*rb.stride().lookup(prog[i].pc));

    BranchFlags fl;
    fl.baseline_low_conf = true;
    const auto act = rb.retire_branch(br, fl);
    const auto* alloc = std::get_if<action::AllocateBtt>(&act);
    if (ok != (alloc != nullptr)) {
        err << "seed " << seed << ": oracle chain_ok=" << ok << " but action index " << act.index();
        return err.str();
    }
    if (!alloc) return {};
    if (alloc->slice.n_loads != loads || alloc->slice.n_alu_ops != ops) {
        err << "seed " << seed << ": slice counts " << alloc->slice.n_loads << "/" << alloc->slice.n_alu_ops
            << " vs oracle " << loads << "/" << ops;
        return err.str();
    }
    std::vector<std::int64_t> vals;
    for (auto i : leaves) vals.push_back(*prog[i].load_data);
    const auto va = oracle::value_of(prog, s1, end), vb = oracle::value_of(prog, s2, end);
    if (!va || !vb) return "seed " + std::to_string(seed) + ": oracle could not evaluate a valid chain";
    if (alloc->slice.evaluate(vals) != oracle::branch(cond, *va, *vb)) {
        err << "seed " << seed << ": slice evaluates differently from the program: " << describe(alloc->slice);
        return err.str();
    }
    return {};
}

/// Trigger addresses from a fresh allocation through warm-up and steady
/// state, against addr_k + delta * tl_dist for the retiring instance k.
inline std::string trigger_addresses(std::uint64_t seed) {
    SplitMix64 rng(seed);
    static constexpr std::uint32_t kQueues[] = {4, 16, 64, 512};
    FetchConfig fc;
    fc.queue_n = kQueues[rng.uniform(4)];
    fc.lor_entries = 8;
    FetchBlock fb(fc);
    const auto nloads = 1 + rng.uniform(5);
    FetchAllocRequest req;
    req.branch_pc = 0x400;
    for (std::uint64_t i = 0; i < nloads; ++i) {
        req.ptrs.push_back({static_cast<std::uint32_t>(i), 0});
        const auto delta = rng.bernoulli(0.1) ? 0 : static_cast<std::int64_t>(rng.uniform(1u << 21)) - (1 << 20);
        req.loads.push_back({rng.next_u64(), delta});
        req.slice.src1_ops.push_back(SliceOp::load(static_cast<std::uint16_t>(i)));
    }
    req.slice.n_loads = static_cast<std::uint32_t>(nloads);
    if (!fb.allocate(req).ok) return "seed " + std::to_string(seed) + ": allocation failed";
    const auto tl = static_cast<std::uint32_t>(1 + rng.uniform(fc.queue_n - 1));
    const auto calls = 1 + rng.uniform(40);
    std::ostringstream err;
    for (std::uint64_t k = 0; k < calls; ++k) {
        const std::uint32_t n = k == 0 ? tl : 1;
        const auto out = fb.trigger_loads(0x400, tl, n);
        if (out.size() != nloads * n) return "seed " + std::to_string(seed) + ": wrong request count";
        for (std::uint64_t i = 0; i < nloads; ++i) {
            // instance retiring at call k is the (k+1)-th after the allocating one
            const Addr retiring = req.loads[i].lastaddr + static_cast<Addr>(req.loads[i].delta) * (k + 1);
            for (std::uint32_t s = 0; s < n; ++s) {
                const auto dist = n == 1 ? tl : s + 1;
                const Addr expect = oracle::trigger_address(retiring, req.loads[i].delta, dist);
                const auto& got = out[i * n + s];
                if (got.addr != expect || fb.lor()[got.lor_index].ptr != req.ptrs[i]) {
                    err << "seed " << seed << ": call " << k << " load " << i << " step " << s << " got 0x"
                        << std::hex << got.addr << " expected 0x" << expect;
                    return err.str();
                }
            }
        }
    }
    return {};
}

/// Slot placement of a completed trigger against a linear scan of the
/// expected address sequence, both through the pure mapping and through a
/// fetch block whose head has been advanced to lot_pos.
inline std::string slot_placement(std::uint64_t seed) {
    SplitMix64 rng(seed);
    const auto n = static_cast<std::uint32_t>(1 + rng.uniform(rng.bernoulli(0.5) ? 64 : 512));
    std::int64_t delta = 0;
    while (delta == 0) delta = static_cast<std::int64_t>(rng.uniform(1ULL << 41)) - (1LL << 40);
    const Addr ldstart0 = rng.next_u64();
    const auto advance = rng.uniform(2 * n + 1);

    FetchConfig fc;
    fc.queue_n = n;
    fc.lor_entries = 1;
    fc.bot_entries = 1;
    FetchBlock fb(fc);
    FetchAllocRequest req;
    req.branch_pc = 0x800;
    req.ptrs = {{0, 0}};
    req.loads = {{ldstart0 - static_cast<Addr>(delta), delta}};
    req.slice.src1_ops = {SliceOp::load(0)};
    req.slice.n_loads = 1;
    fb.allocate(req);
    for (std::uint64_t k = 0; k < advance; ++k) fb.trigger_loads(0x800, 1, 1);
    const auto& lor = fb.lor()[0];
    const Addr ldstart = lor.ldstart;
    const std::uint32_t lot_pos = lor.lot_pos;
    if (ldstart != ldstart0 + static_cast<Addr>(delta) * advance || lot_pos != advance % n)
        return "seed " + std::to_string(seed) + ": head did not advance by one step per call";

    Addr addr;
    const auto pick = rng.uniform(4);
    const auto j = static_cast<std::int64_t>(rng.uniform(n + 4)) - 2;
    if (pick <= 1) addr = ldstart + static_cast<Addr>(delta * j);
    else if (pick == 2) addr = ldstart + static_cast<Addr>(delta * j) + 1 + rng.uniform(3);
    else addr = rng.next_u64();

    const auto expect = oracle::slot_by_scan(addr, ldstart, delta, lot_pos, n);
    const auto id = lot_id_for(addr, ldstart, delta, n);
    std::optional<std::uint32_t> got;
    if (id) got = lot_index_for(lot_pos, *id, n);
    std::ostringstream err;
    if (got != expect) {
        err << "seed " << seed << ": mapping gave " << (got ? std::to_string(*got) : "none") << ", scan gave "
            << (expect ? std::to_string(*expect) : "none");
        return err.str();
    }
    fb.complete_trigger(addr, 77);
    const auto& lot = fb.lot()[0];
    for (std::uint32_t s = 0; s < n; ++s) {
        const bool want = expect && *expect == s;
        if ((lot.valid[s] != 0) != want || (want && lot.ld_data[s] != 77)) {
            err << "seed " << seed << ": LOT slot " << s << " valid=" << int(lot.valid[s]) << " expected " << want;
            return err.str();
        }
    }
    return {};
}

} // namespace cases
