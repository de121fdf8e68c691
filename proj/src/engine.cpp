#include "ldbp/engine.hpp"

#include <deque>
#include <memory>
#include <stdexcept>
#include <unordered_map>

#include "ldbp/baseline_predictor.hpp"
#include "ldbp/fetch_block.hpp"
#include "ldbp/memory_model.hpp"
#include "ldbp/retire_block.hpp"
#include "ldbp/rng.hpp"

namespace ldbp {

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::Allocate: return "allocate";
    case EventKind::Reallocate: return "reallocate";
    case EventKind::Deallocate: return "deallocate";
    case EventKind::Flush: return "flush";
    case EventKind::FetchEvict: return "fetch_evict";
    }
    return "?";
}

std::string_view to_string(FlushReason r) {
    switch (r) {
    case FlushReason::DeltaChange: return "delta_change";
    case FlushReason::SliceMismatch: return "slice_mismatch";
    case FlushReason::StrideEviction: return "stride_eviction";
    case FlushReason::BttReplacement: return "btt_replacement";
    }
    return "?";
}

std::uint64_t gated_cycles(const std::vector<std::uint64_t>& predict_cycles, std::uint64_t total_cycles,
                           std::uint64_t window) {
    if (window == 0) return 0;
    std::uint64_t gated = 0, start = 0;
    auto idle = [&](std::uint64_t from, std::uint64_t to) {
        if (to > from && to - from >= window) gated += to - from;
    };
    for (auto c : predict_cycles) {
        idle(start, c);
        start = c + 1;
    }
    idle(start, total_cycles);
    return gated;
}

namespace {

constexpr std::uint64_t kWrongPathSalt = 0x5eedc0de5eedc0deULL;

struct InFlight {
    std::size_t idx = 0;
    std::uint64_t retire_cycle = 0;
    BaselinePrediction bp;
    bool ldbp_used = false;
    bool ldbp_taken = false;
    bool mispredicted = false;
};

class Engine {
public:
    Engine(const SimConfig& cfg, const Trace& trace, const RunOptions& opts)
        : cfg_(cfg), trace_(trace), opts_(opts), rb_(cfg.rb, cfg.sp), fb_(cfg.fb), mem_(cfg.mem),
          baseline_(make_baseline(cfg.baseline)), wrong_path_rng_(cfg.engine.seed ^ kWrongPathSalt) {
        mem_.populate(trace);
    }

    SimResult run() {
        const auto n = trace_.instrs.size();
        const auto depth = cfg_.engine.pipeline_depth;
        std::size_t next = 0;
        std::uint64_t cycle = 0, next_fetch = 0;
        while (next < n || !window_.empty()) {
            if (!window_.empty() && window_.front().retire_cycle == cycle) {
                retire(window_.front(), cycle);
                window_.pop_front();
            }
            if (ldbp()) {
                for (const auto& c : mem_.drain(cycle)) {
                    ++st_.triggers_completed;
                    if (fb_.complete_trigger(c.addr, c.data) == 0) ++st_.triggers_stale;
                }
                fb_.compute_outcomes(cycle);
            }
            if (next < n && cycle >= next_fetch) {
                const bool miss = fetch(next++, cycle);
                next_fetch = cycle + 1 + (miss ? depth : 0);
            }
            ++cycle;
        }
        st_.cycles = cycle;
        account_idle(cycle);
        st_.outcomes_computed = fb_.counters().outcomes_computed;
        st_.fsm_waits = fb_.counters().fsm_waits;
        st_.fetch_evictions = fb_.counters().capacity_evictions;
        st_.plq_full = rb_.counters().plq_full;
        st_.extra_memory_accesses = st_.triggers_issued;
        st_.unmapped_reads = mem_.unmapped_reads();
        for (std::size_t b = 0; b < fb_.bot().size(); ++b)
            if (fb_.bot()[b].valid) res_.chains[fb_.bot()[b].pc] = fb_.cst()[b].slice;
        res_.stats = std::move(st_);
        return std::move(res_);
    }

private:
    bool ldbp() const { return cfg_.engine.ldbp_enabled; }

    void account_idle(std::uint64_t upto) {
        const auto w = cfg_.engine.gating_window;
        if (w == 0) return;
        if (upto > idle_start_ && upto - idle_start_ >= w) st_.low_power_cycles += upto - idle_start_;
    }

    bool fetch(std::size_t idx, std::uint64_t cycle) {
        const auto& in = trace_.instrs[idx];
        ++st_.instructions;
        if (in.kind == InstrKind::Load) ++st_.loads;
        InFlight f;
        f.idx = idx;
        f.retire_cycle = cycle + cfg_.engine.pipeline_depth;
        if (in.kind != InstrKind::CondBranch) {
            window_.push_back(std::move(f));
            return false;
        }

        const bool taken = *in.taken;
        f.bp = baseline_->predict(in.pc);
        FetchLookup lk;
        if (ldbp()) {
            lk = fb_.predict(in.pc);
            if (lk.tag_hit) ++st_.bot_tag_hits;
            ++inflight_[in.pc];
        }
        bool use_ldbp = lk.outcome.has_value();
        if (cfg_.engine.chooser == Chooser::ConfidenceGated) use_ldbp = use_ldbp && f.bp.low_confidence;
        f.ldbp_used = use_ldbp;
        f.ldbp_taken = use_ldbp && *lk.outcome;
        const bool used = use_ldbp ? f.ldbp_taken : f.bp.taken;
        f.mispredicted = used != taken;
        baseline_->update_history(in.pc, taken);

        ++st_.cond_branches;
        auto& pcs = st_.per_pc[in.pc];
        const bool post = pcs.all.executed >= cfg_.engine.warmup_branches;
        auto tally = [&](Counts& c) {
            ++c.executed;
            if (f.mispredicted) ++c.mispredicted;
            if (use_ldbp) ++c.ldbp_predicted;
            if (use_ldbp && f.ldbp_taken == taken) ++c.ldbp_correct;
            if (f.bp.taken == taken) ++c.baseline_correct;
        };
        tally(pcs.all);
        if (post) tally(pcs.post_warmup);
        if (f.mispredicted) ++st_.mispredictions;
        if (use_ldbp) {
            ++st_.ldbp_predicted;
            if (f.ldbp_taken == taken) ++st_.ldbp_correct;
            if (f.bp.taken == taken) ++st_.baseline_correct_when_ldbp_used;
            account_idle(cycle);
            idle_start_ = cycle + 1;
        } else {
            ++st_.baseline_predicted;
        }

        if (f.mispredicted && cfg_.engine.wrong_path_fetches > 0 && ldbp()) {
            const auto tracked = fb_.tracked_branches();
            if (!tracked.empty())
                for (std::uint32_t k = 0; k < cfg_.engine.wrong_path_fetches; ++k) {
                    fb_.predict(tracked[wrong_path_rng_.uniform(tracked.size())]);
                    ++res_.wrong_path_lookups;
                }
        }
        window_.push_back(std::move(f));
        return window_.back().mispredicted;
    }

    void event(EventKind k, Addr pc, FlushReason r = FlushReason::DeltaChange) {
        if (opts_.record_events) res_.events.push_back({seq_, cycle_, pc, k, r});
    }

    void drop_chain(Addr pc) {
        fb_.flush_chain(pc);
        retry_.erase(pc);
    }

    void count_flush(FlushReason r) {
        switch (r) {
        case FlushReason::DeltaChange: ++st_.flush_delta_change; break;
        case FlushReason::SliceMismatch: ++st_.flush_slice_mismatch; break;
        case FlushReason::StrideEviction: ++st_.flush_stride_eviction; break;
        case FlushReason::BttReplacement: ++st_.flush_btt_replacement; break;
        }
    }

    void allocate_fetch(Addr pc, const ChainSlice& slice, const std::vector<StridePtr>& ptrs,
                        const std::vector<LoadSnapshot>& loads, int accuracy) {
        FetchAllocRequest req;
        req.branch_pc = pc;
        req.ptrs = ptrs;
        req.loads = loads;
        req.slice = slice;
        req.inflight = inflight_[pc];
        req.priority = accuracy;
        auto r = fb_.allocate(req);
        for (Addr v : r.evicted) {
            retry_.erase(v);
            event(EventKind::FetchEvict, v);
        }
        if (r.ok) ++st_.fetch_allocations;
    }

    void issue_triggers(Addr pc, const std::vector<TriggerLoadReq>& reqs, std::uint64_t cycle) {
        auto& q = retry_[pc];
        std::deque<Addr> keep;
        bool blocked = false;
        for (Addr a : q) {
            if (!fb_.covers(a)) {
                ++st_.triggers_dropped;
                continue;
            }
            if (!blocked && mem_.issue(a, cycle)) {
                ++st_.triggers_issued;
                continue;
            }
            if (!blocked) ++st_.triggers_rejected;
            blocked = true;
            keep.push_back(a);
        }
        for (const auto& r : reqs) {
            if (!blocked && mem_.issue(r.addr, cycle)) {
                ++st_.triggers_issued;
                continue;
            }
            if (!blocked) ++st_.triggers_rejected;
            ++st_.triggers_delayed;
            blocked = true;
            keep.push_back(r.addr);
        }
        if (keep.empty()) retry_.erase(pc);
        else q = std::move(keep);
    }

    void retire_branch(const RetiredInstr& in, const InFlight& f, std::uint64_t cycle) {
        const bool taken = *in.taken;
        BranchFlags flags;
        flags.baseline_low_conf = f.bp.low_confidence;
        flags.ldbp_used = f.ldbp_used;
        flags.ldbp_correct = f.ldbp_used && f.ldbp_taken == taken;
        flags.baseline_correct = f.bp.taken == taken;
        auto& cnt = inflight_[in.pc];
        if (cnt == 0) throw std::logic_error("engine: in-flight count underflow");
        --cnt;

        const auto act = rb_.retire_branch(in, flags);
        if (const auto* a = std::get_if<action::AllocateBtt>(&act)) {
            if (a->victim_pc) {
                drop_chain(*a->victim_pc);
                ++st_.flush_btt_replacement;
                event(EventKind::Flush, *a->victim_pc, FlushReason::BttReplacement);
            }
            ++st_.btt_allocations;
            event(EventKind::Allocate, in.pc);
            allocate_fetch(in.pc, a->slice, a->ptrs, a->loads, cfg_.rb.accuracy_init);
        } else if (const auto* h = std::get_if<action::BttHit>(&act)) {
            auto* bot = fb_.find(in.pc);
            if (!bot) {
                const auto* btt = rb_.find_btt(in.pc);
                if (!btt) throw std::logic_error("engine: BTT hit without a BTT entry");
                event(EventKind::Reallocate, in.pc);
                allocate_fetch(in.pc, btt->slice, btt->ptrs, rb_.snapshot(btt->ptrs), h->accuracy);
            } else {
                bot->priority = h->accuracy;
                const auto tl = cfg_.engine.tl_dist;
                const std::uint32_t n = bot->warmed ? 1 : tl;
                bot->warmed = true;
                issue_triggers(in.pc, fb_.trigger_loads(in.pc, tl, n), cycle);
            }
        } else if (const auto* fl = std::get_if<action::Flush>(&act)) {
            drop_chain(fl->branch_pc);
            count_flush(fl->reason);
            event(EventKind::Flush, fl->branch_pc, fl->reason);
        } else if (const auto* d = std::get_if<action::DeallocateBtt>(&act)) {
            drop_chain(d->branch_pc);
            ++st_.btt_deallocations;
            event(EventKind::Deallocate, d->branch_pc);
        } else if (fb_.find(in.pc) && !rb_.find_btt(in.pc)) {
            drop_chain(in.pc);
        }

        if (f.mispredicted) {
            fb_.flush_mispredict();
            ++st_.flush_mispredict;
        }
    }

    void retire(const InFlight& f, std::uint64_t cycle) {
        const auto& in = trace_.instrs[f.idx];
        seq_ = f.idx;
        cycle_ = cycle;
        if (in.kind == InstrKind::CondBranch) baseline_->commit(f.bp, *in.taken);
        if (!ldbp()) return;
        switch (in.kind) {
        case InstrKind::Load:
            for (Addr pc : rb_.retire_load(in)) {
                drop_chain(pc);
                ++st_.flush_stride_eviction;
                event(EventKind::Flush, pc, FlushReason::StrideEviction);
            }
            break;
        case InstrKind::Store: break;
        case InstrKind::SimpleAlu: rb_.retire_alu(in); break;
        case InstrKind::CondBranch: retire_branch(in, f, cycle); break;
        default: rb_.retire_other(in); break;
        }
        if (opts_.record_digests) {
            StateDigest d;
            rb_.digest(d);
            fb_.digest(d, false);
            res_.digests.push_back(d.value());
        }
    }

    const SimConfig& cfg_;
    const Trace& trace_;
    RunOptions opts_;
    RetireBlock rb_;
    FetchBlock fb_;
    MemoryModel mem_;
    std::unique_ptr<BaselinePredictor> baseline_;
    SplitMix64 wrong_path_rng_;
    std::deque<InFlight> window_;
    std::unordered_map<Addr, std::uint32_t> inflight_;
    std::unordered_map<Addr, std::deque<Addr>> retry_;
    std::uint64_t idle_start_ = 0;
    std::uint64_t seq_ = 0, cycle_ = 0;
    SimStats st_;
    SimResult res_;
};

} // namespace

SimResult run(const SimConfig& cfg, const Trace& trace, const RunOptions& opts) {
    cfg.validate();
    Engine e(cfg, trace, opts);
    return e.run();
}

} // namespace ldbp
