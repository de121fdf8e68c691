#include "ldbp/fetch_block.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace ldbp {

std::optional<std::uint32_t> lot_id_for(Addr addr, Addr ldstart, std::int64_t delta, std::uint32_t queue_n) {
    if (delta == 0) throw std::invalid_argument("lot_id_for: delta must be non-zero");
    auto diff = static_cast<std::int64_t>(addr - ldstart);
    if (diff % delta != 0) return std::nullopt;
    std::int64_t id = diff / delta;
    if (id < 0 || id >= static_cast<std::int64_t>(queue_n)) return std::nullopt;
    return static_cast<std::uint32_t>(id);
}

FetchBlock::FetchBlock(FetchConfig cfg) : cfg_(cfg) {
    if (cfg_.lor_entries == 0 || cfg_.bot_entries == 0 || cfg_.queue_n == 0 || cfg_.fsm_count == 0)
        throw std::invalid_argument("fetch block: table sizes must be positive");
    lor_.resize(cfg_.lor_entries);
    lot_.resize(cfg_.lor_entries);
    for (auto& l : lot_) {
        l.ld_data.assign(cfg_.queue_n, 0);
        l.valid.assign(cfg_.queue_n, 0);
    }
    bot_.resize(cfg_.bot_entries);
    cst_.resize(cfg_.bot_entries);
    fsms_.resize(cfg_.fsm_count);
}

const BotEntry* FetchBlock::find(Addr branch_pc) const {
    auto it = by_pc_.find(branch_pc);
    return it == by_pc_.end() ? nullptr : &bot_[it->second];
}

BotEntry* FetchBlock::find(Addr branch_pc) {
    auto it = by_pc_.find(branch_pc);
    return it == by_pc_.end() ? nullptr : &bot_[it->second];
}

void FetchBlock::release(int b) {
    auto& e = bot_[b];
    for (int li : e.lors) {
        lor_[li] = LorEntry{};
        std::fill(lot_[li].valid.begin(), lot_[li].valid.end(), 0);
        std::fill(lot_[li].ld_data.begin(), lot_[li].ld_data.end(), 0);
    }
    by_pc_.erase(e.pc);
    cst_[b] = CstEntry{};
    e.valid = false;
    e.lors.clear();
}

int FetchBlock::pick_victim() const {
    int best = -1;
    for (int i = 0; i < static_cast<int>(bot_.size()); ++i) {
        if (!bot_[i].valid) continue;
        if (best < 0 || std::tie(bot_[i].priority, bot_[i].alloc_seq) < std::tie(bot_[best].priority, bot_[best].alloc_seq))
            best = i;
    }
    return best;
}

FetchAllocResult FetchBlock::allocate(const FetchAllocRequest& req) {
    FetchAllocResult res;
    const auto k = req.ptrs.size();
    if (k == 0 || k != req.loads.size() || k > cfg_.lor_entries) return res;

    if (auto it = by_pc_.find(req.branch_pc); it != by_pc_.end()) release(it->second);

    auto free_bot = [&] {
        for (int i = 0; i < static_cast<int>(bot_.size()); ++i)
            if (!bot_[i].valid) return i;
        return -1;
    };
    auto free_lors = [&] {
        return static_cast<std::size_t>(std::count_if(lor_.begin(), lor_.end(), [](const LorEntry& l) { return !l.valid; }));
    };
    while (free_bot() < 0 || free_lors() < k) {
        int v = pick_victim();
        if (v < 0) return res;
        res.evicted.push_back(bot_[v].pc);
        ++counters_.capacity_evictions;
        release(v);
    }

    int b = free_bot();
    auto& e = bot_[b];
    const auto n = cfg_.queue_n;
    e = BotEntry{};
    e.valid = true;
    e.pc = req.branch_pc;
    e.outcome.assign(n, 0);
    e.outcome_valid.assign(n, 0);
    e.pending.assign(n, 0);
    e.slot_gen.assign(n, 0);
    e.ahead = req.inflight;
    e.priority = req.priority;
    e.alloc_seq = next_seq_;
    e.generation = next_seq_;
    ++next_seq_;
    for (std::size_t i = 0; i < k; ++i) {
        int li = static_cast<int>(std::find_if(lor_.begin(), lor_.end(), [](const LorEntry& l) { return !l.valid; }) - lor_.begin());
        auto& l = lor_[li];
        l.valid = true;
        l.ptr = req.ptrs[i];
        l.delta = req.loads[i].delta;
        l.ldstart = req.loads[i].lastaddr + static_cast<Addr>(l.delta);
        l.lot_pos = 0;
        l.owner = b;
        e.lors.push_back(li);
    }
    cst_[b] = CstEntry{true, req.slice};
    by_pc_[req.branch_pc] = b;
    res.ok = true;
    return res;
}

std::vector<TriggerLoadReq> FetchBlock::trigger_loads(Addr branch_pc, std::uint32_t tl_dist, std::uint32_t n_triggers) {
    std::vector<TriggerLoadReq> out;
    auto it = by_pc_.find(branch_pc);
    if (it == by_pc_.end()) return out;
    auto& e = bot_[it->second];
    n_triggers = std::min(n_triggers, tl_dist);
    for (int li : e.lors) {
        const auto& l = lor_[li];
        for (std::uint32_t s = n_triggers; s-- > 0;) {
            Addr a = l.ldstart + static_cast<Addr>(l.delta) * static_cast<Addr>(tl_dist - s);
            out.push_back({a, static_cast<std::uint32_t>(li)});
        }
    }

    // retire the head instance
    const auto n = cfg_.queue_n;
    const std::uint32_t h = e.head;
    e.outcome[h] = 0;
    e.outcome_valid[h] = 0;
    e.pending[h] = 0;
    ++e.slot_gen[h];
    e.head = (h + 1) % n;
    if (e.ahead > 0) --e.ahead;
    for (int li : e.lors) {
        lot_[li].valid[h] = 0;
        lot_[li].ld_data[h] = 0;
        auto& l = lor_[li];
        l.ldstart += static_cast<Addr>(l.delta);
        l.lot_pos = e.head;
    }
    return out;
}

void FetchBlock::store(int li, std::uint32_t slot, std::int64_t data) {
    lot_[li].ld_data[slot] = data;
    lot_[li].valid[slot] = 1;
    mark_ready(lor_[li].owner, slot);
}

void FetchBlock::mark_ready(int b, std::uint32_t slot) {
    auto& e = bot_[b];
    if (e.outcome_valid[slot] || e.pending[slot]) return;
    for (int li : e.lors)
        if (!lot_[li].valid[slot]) return;
    e.pending[slot] = 1;
    ready_.push_back({b, e.generation, slot, e.slot_gen[slot]});
}

std::uint32_t FetchBlock::complete_trigger(Addr addr, std::int64_t data) {
    std::uint32_t matched = 0;
    const auto n = cfg_.queue_n;
    for (int li = 0; li < static_cast<int>(lor_.size()); ++li) {
        const auto& l = lor_[li];
        if (!l.valid) continue;
        if (l.delta == 0) {
            if (addr != l.ldstart) continue;
            ++matched;
            for (std::uint32_t s = 0; s < n; ++s) store(li, s, data);
            continue;
        }
        auto id = lot_id_for(addr, l.ldstart, l.delta, n);
        if (!id) continue;
        ++matched;
        store(li, lot_index_for(l.lot_pos, *id, n), data);
    }
    if (matched) ++counters_.completions_matched;
    else ++counters_.completions_stale;
    return matched;
}

bool FetchBlock::job_live(const Job& j) const {
    const auto& e = bot_[j.bot];
    return e.valid && e.generation == j.generation && e.slot_gen[j.slot] == j.slot_gen;
}

void FetchBlock::compute_outcomes(std::uint64_t cycle) {
    for (auto& f : fsms_) {
        if (!f.busy || f.done_cycle > cycle) continue;
        if (job_live(f.job)) {
            auto& e = bot_[f.job.bot];
            e.outcome[f.job.slot] = f.result ? 1 : 0;
            e.outcome_valid[f.job.slot] = 1;
            e.pending[f.job.slot] = 0;
            ++counters_.outcomes_computed;
        }
        f.busy = false;
    }
    std::vector<std::int64_t> vals;
    for (auto& f : fsms_) {
        if (f.busy) continue;
        while (!ready_.empty() && !job_live(ready_.front())) ready_.pop_front();
        if (ready_.empty()) break;
        Job j = ready_.front();
        ready_.pop_front();
        const auto& e = bot_[j.bot];
        vals.clear();
        for (int li : e.lors) vals.push_back(lot_[li].ld_data[j.slot]);
        const auto& slice = cst_[j.bot].slice;
        f.busy = true;
        f.job = j;
        f.result = slice.evaluate(vals);
        f.done_cycle = cycle + slice.n_alu_ops + 1;
    }
    if (!ready_.empty()) counters_.fsm_waits += ready_.size();
}

FetchLookup FetchBlock::predict(Addr branch_pc) {
    FetchLookup r;
    auto it = by_pc_.find(branch_pc);
    if (it == by_pc_.end()) return r;
    auto& e = bot_[it->second];
    r.tag_hit = true;
    if (e.ahead < cfg_.queue_n) {
        auto slot = e.outcome_ptr();
        if (e.outcome_valid[slot]) r.outcome = e.outcome[slot] != 0;
    }
    ++e.ahead;
    return r;
}

void FetchBlock::flush_mispredict() {
    for (auto& e : bot_) e.ahead = 0;
}

void FetchBlock::flush_chain(Addr branch_pc) {
    if (auto it = by_pc_.find(branch_pc); it != by_pc_.end()) release(it->second);
}

void FetchBlock::set_priority(Addr branch_pc, int priority) {
    if (auto* e = find(branch_pc)) e->priority = priority;
}

bool FetchBlock::covers(Addr addr) const {
    for (const auto& l : lor_) {
        if (!l.valid) continue;
        if (l.delta == 0 ? addr == l.ldstart : lot_id_for(addr, l.ldstart, l.delta, cfg_.queue_n).has_value())
            return true;
    }
    return false;
}

std::uint32_t FetchBlock::busy_fsms() const {
    return static_cast<std::uint32_t>(std::count_if(fsms_.begin(), fsms_.end(), [](const Fsm& f) { return f.busy; }));
}

std::vector<Addr> FetchBlock::tracked_branches() const {
    std::vector<Addr> v;
    for (const auto& e : bot_)
        if (e.valid) v.push_back(e.pc);
    std::sort(v.begin(), v.end());
    return v;
}

void FetchBlock::digest(StateDigest& d, bool include_speculative) const {
    for (std::size_t i = 0; i < lor_.size(); ++i) {
        const auto& l = lor_[i];
        d.add(l.valid);
        if (!l.valid) continue;
        d.add(l.ptr.index).add(l.ptr.generation).add(l.ldstart).add(l.delta).add(l.lot_pos).add(l.owner);
        for (std::uint32_t s = 0; s < cfg_.queue_n; ++s) {
            d.add(lot_[i].valid[s]);
            if (lot_[i].valid[s]) d.add(lot_[i].ld_data[s]);
        }
    }
    for (std::size_t i = 0; i < bot_.size(); ++i) {
        const auto& e = bot_[i];
        d.add(e.valid);
        if (!e.valid) continue;
        d.add(e.pc).add(e.head).add(e.priority).add(e.alloc_seq).add(e.generation).add(e.warmed);
        if (include_speculative) d.add(e.ahead);
        for (std::uint32_t s = 0; s < cfg_.queue_n; ++s)
            d.add(e.outcome[s]).add(e.outcome_valid[s]).add(e.pending[s]).add(e.slot_gen[s]);
        for (int li : e.lors) d.add(li);
        const auto& c = cst_[i].slice;
        d.add(c.n_loads).add(c.n_alu_ops).add(c.cond).add(c.src1_ops.size()).add(c.src2_ops.size());
    }
    for (const auto& f : fsms_) {
        d.add(f.busy);
        if (f.busy) d.add(f.job.bot).add(f.job.slot).add(f.done_cycle).add(f.result);
    }
    d.add(ready_.size());
}

} // namespace ldbp
