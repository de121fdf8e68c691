#include <doctest.h>

#include <algorithm>

#include "ldbp/engine.hpp"
#include "ldbp/kernels.hpp"
#include "scenarios.hpp"

using namespace ldbp;

namespace {

SimConfig quick() {
    SimConfig c;
    c.engine.warmup_branches = 1000;
    return c;
}

std::vector<Trace> small_suite() {
    return {gen_vec_scan(3000, 0.5, 4, 1), gen_bfs_parent(2000, 0.5, 2), gen_hmmer4(2000, 3), gen_load_load(2000, 4)};
}

SimStats without_gating(SimStats s) {
    s.low_power_cycles = 0;
    return s;
}

} // namespace

TEST_CASE("empty trace") {
    auto s = simulate(SimConfig{}, Trace{});
    CHECK(s == SimStats{});
}

TEST_CASE("conservation and bookkeeping") {
    for (const auto& t : small_suite()) {
        CAPTURE(t.header.kernel);
        auto s = simulate(quick(), t);
        CHECK(s.instructions == t.instrs.size());
        const auto branches = std::count_if(t.instrs.begin(), t.instrs.end(),
                                            [](const RetiredInstr& i) { return i.kind == InstrKind::CondBranch; });
        CHECK(s.cond_branches == static_cast<std::uint64_t>(branches));
        CHECK(s.ldbp_predicted + s.baseline_predicted == s.cond_branches);
        CHECK(s.ldbp_correct <= s.ldbp_predicted);
        CHECK(s.ldbp_predicted <= s.bot_tag_hits);
        CHECK(s.extra_memory_accesses == s.triggers_issued);
        CHECK(s.triggers_completed <= s.triggers_issued);
        CHECK(s.triggers_stale <= s.triggers_completed);
        CHECK(s.flush_mispredict == s.mispredictions);
        CHECK(s.cycles >= s.instructions + quick().engine.pipeline_depth);
        CHECK(s.unmapped_reads <= s.triggers_completed);
        Counts sum;
        for (const auto& [pc, p] : s.per_pc) {
            sum.executed += p.all.executed;
            sum.mispredicted += p.all.mispredicted;
            sum.ldbp_predicted += p.all.ldbp_predicted;
            CHECK(p.post_warmup.executed == (p.all.executed > 1000 ? p.all.executed - 1000 : 0));
        }
        CHECK(sum.executed == s.cond_branches);
        CHECK(sum.mispredicted == s.mispredictions);
        CHECK(sum.ldbp_predicted == s.ldbp_predicted);
    }
}

TEST_CASE("cycle count follows the stall rule") {
    // no branches: one fetch per cycle, then drain the pipeline
    std::vector<RetiredInstr> v(100, RetiredInstr::other(0x10));
    Trace t;
    t.instrs = v;
    auto s = simulate(SimConfig::preset("baseline"), t);
    CHECK(s.cycles == 100 + 32);
    // every mispredict costs a full pipeline refill
    auto vs = simulate(SimConfig::preset("baseline"), gen_vec_scan(500, 0.5, 4, 9));
    CHECK(vs.cycles == vs.instructions + 32 + 32 * vs.mispredictions);
}

TEST_CASE("vec_scan is predicted by LDBP") {
    auto t = gen_vec_scan(20000, 0.5, 4, 42);
    auto on = simulate(quick(), t);
    auto off = simulate(SimConfig::preset("baseline"), t);
    CHECK(off.ldbp_predicted == 0);
    CHECK(off.triggers_issued == 0);
    CHECK(on.coverage() > 0.2);
    CHECK(pc_accuracy(on, kernel_pc::kVecScanBranch) > 0.99);
    CHECK(pc_accuracy(off, kernel_pc::kVecScanBranch) < 0.6);
    CHECK(on.mpki() < off.mpki());
}

TEST_CASE("load-load chains leave the baseline untouched") {
    for (std::uint64_t seed : {1, 2, 3}) {
        auto t = gen_load_load(5000, seed);
        auto on = simulate(quick(), t);
        auto off = simulate(SimConfig::preset("baseline"), t);
        CHECK(on.ldbp_predicted == 0);
        CHECK(on.mispredictions == off.mispredictions);
    }
}

TEST_CASE("wrong-path lookups never reach committed state") {
    for (const auto& t : small_suite()) {
        CAPTURE(t.header.kernel);
        RunOptions o{true, false};
        auto a = run(quick(), t, o);
        auto c = quick();
        c.engine.wrong_path_fetches = 8;
        auto b = run(c, t, o);
        REQUIRE(a.digests.size() == b.digests.size());
        CHECK(a.digests == b.digests);
        CHECK(a.stats == b.stats);
        CHECK(a.wrong_path_lookups == 0);
        if (t.header.kernel != "load_load") CHECK(b.wrong_path_lookups > 0);
    }
}

TEST_CASE("the digest notices real state changes") {
    auto t = gen_vec_scan(2000, 0.5, 4, 1);
    RunOptions o{true, false};
    auto a = run(quick(), t, o);
    auto c = quick();
    c.engine.tl_dist = 8;
    auto b = run(c, t, o);
    CHECK(a.digests != b.digests);
}

TEST_CASE("determinism") {
    for (const auto& t : small_suite()) {
        auto c = quick();
        c.mem.jitter = 7;
        auto a = simulate(c, t);
        auto b = simulate(c, t);
        CHECK(a == b);
        CHECK(stats_to_json(a).dump() == stats_to_json(b).dump());
    }
}

TEST_CASE("gating arithmetic") {
    CHECK(gated_cycles({}, 500, 100) == 500);
    CHECK(gated_cycles({}, 50, 100) == 0);
    CHECK(gated_cycles({0, 1, 2}, 3, 1) == 0);
    CHECK(gated_cycles({10}, 20, 5) == 10 + 9);
    CHECK(gated_cycles({100000, 350000}, 500000, 100000) == 100000 + 249999 + 149999);
    CHECK(gated_cycles({10}, 20, 0) == 0);
}

TEST_CASE("gating is accounting only") {
    auto t = scenario::idle_gap(2000, 30000, 2000, 5);
    auto c = quick();
    c.engine.gating_window = 10000;
    auto g = simulate(c, t);
    c.engine.gating_window = 0;
    auto n = simulate(c, t);
    CHECK(n.low_power_cycles == 0);
    CHECK(without_gating(g) == n);
    CHECK(g.low_power_cycles >= 30000);
    CHECK(g.low_power_cycles < 31000);

    // with a one-cycle window every cycle without a prediction counts
    c.engine.gating_window = 1;
    auto w1 = simulate(c, t);
    CHECK(w1.low_power_cycles == w1.cycles - w1.ldbp_predicted);

    auto off = simulate(SimConfig::preset("baseline"), gen_vec_scan(1000, 0.5, 4, 1));
    auto cfg = SimConfig::preset("baseline");
    cfg.engine.gating_window = 100;
    off = simulate(cfg, gen_vec_scan(1000, 0.5, 4, 1));
    CHECK(off.low_power_cycles == off.cycles);
}

TEST_CASE("confidence-gated chooser defers to a confident baseline") {
    auto t = gen_vec_scan(5000, 0.95, 4, 3);
    auto c = quick();
    auto first = simulate(c, t);
    c.engine.chooser = Chooser::ConfidenceGated;
    auto gated = simulate(c, t);
    CHECK(gated.ldbp_predicted < first.ldbp_predicted);
    CHECK(gated.ldbp_predicted + gated.baseline_predicted == gated.cond_branches);
}

TEST_CASE("event log") {
    auto t = gen_vec_scan(2000, 0.5, 4, 1);
    CHECK(run(quick(), t).events.empty());
    auto r = run(quick(), t, RunOptions{false, true});
    REQUIRE_FALSE(r.events.empty());
    CHECK(r.events.front().kind == EventKind::Allocate);
    CHECK(r.events.front().pc == kernel_pc::kVecScanBranch);
    CHECK(std::is_sorted(r.events.begin(), r.events.end(),
                         [](const SimEvent& a, const SimEvent& b) { return a.seq < b.seq; }));
    CHECK(to_string(EventKind::FetchEvict) == "fetch_evict");
    CHECK(to_string(FlushReason::SliceMismatch) == "slice_mismatch");
}

TEST_CASE("a stride change flushes the chain until the load relearns") {
    auto t = scenario::delta_change(1000, 4, 1000, 8, 3);
    auto r = run(quick(), t, RunOptions{false, true});
    auto flush = std::find_if(r.events.begin(), r.events.end(), [](const SimEvent& e) {
        return e.kind == EventKind::Flush && e.reason == FlushReason::DeltaChange;
    });
    REQUIRE(flush != r.events.end());
    CHECK(flush->pc == kernel_pc::kVecScanBranch);
    auto again = std::find_if(flush, r.events.end(), [](const SimEvent& e) { return e.kind == EventKind::Allocate; });
    REQUIRE(again != r.events.end());
    std::uint64_t loads = 0;
    for (auto i = flush->seq; i < again->seq; ++i)
        loads += t.instrs[i].kind == InstrKind::Load && t.instrs[i].pc == kernel_pc::kVecScanLoad;
    CHECK(loads >= 15);
    CHECK(r.stats.flush_delta_change == 1);
}

TEST_CASE("small tables and tiny queues still run cleanly") {
    auto c = quick();
    c.fb.bot_entries = 1;
    c.rb.btt_entries = 1;
    c.fb.lor_entries = 2;
    c.fb.queue_n = 4;
    c.engine.tl_dist = 3;
    c.mem.max_inflight = 1;
    for (const auto& t : small_suite()) {
        auto s = simulate(c, t);
        CHECK(s.ldbp_predicted + s.baseline_predicted == s.cond_branches);
    }
}

TEST_CASE("invalid configs are refused") {
    auto c = quick();
    c.engine.tl_dist = 64;
    CHECK_THROWS_AS(simulate(c, gen_vec_scan(10, 0.5, 4, 1)), ConfigError);
}
