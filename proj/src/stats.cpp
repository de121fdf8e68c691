#include "ldbp/stats.hpp"

#include <cstdio>

namespace ldbp {

std::string hex_pc(Addr pc) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(pc));
    return buf;
}

double pc_accuracy(const SimStats& s, Addr pc, bool post_warmup) {
    auto it = s.per_pc.find(pc);
    if (it == s.per_pc.end()) return 0.0;
    const auto& c = post_warmup ? it->second.post_warmup : it->second.all;
    return c.executed ? 1.0 - static_cast<double>(c.mispredicted) / c.executed : 0.0;
}

namespace {

nlohmann::ordered_json counts_json(const Counts& c) {
    return {{"executed", c.executed},
            {"mispredicted", c.mispredicted},
            {"ldbp_predicted", c.ldbp_predicted},
            {"ldbp_correct", c.ldbp_correct},
            {"baseline_correct", c.baseline_correct}};
}

} // namespace

nlohmann::ordered_json stats_to_json(const SimStats& s) {
    nlohmann::ordered_json j;
    j["schema"] = kStatsSchema;
    j["instructions"] = s.instructions;
    j["loads"] = s.loads;
    j["cycles"] = s.cycles;
    j["cond_branches"] = s.cond_branches;
    j["mispredictions"] = s.mispredictions;
    j["mpki"] = s.mpki();
    j["ldbp_predicted"] = s.ldbp_predicted;
    j["ldbp_correct"] = s.ldbp_correct;
    j["baseline_predicted"] = s.baseline_predicted;
    j["baseline_correct_when_ldbp_used"] = s.baseline_correct_when_ldbp_used;
    j["coverage"] = s.coverage();
    j["ldbp_accuracy"] = s.ldbp_accuracy();
    j["bot_tag_hits"] = s.bot_tag_hits;
    j["valid_slot_rate"] = s.valid_slot_rate();
    j["triggers"] = {{"issued", s.triggers_issued},   {"completed", s.triggers_completed},
                     {"stale", s.triggers_stale},     {"rejected", s.triggers_rejected},
                     {"delayed", s.triggers_delayed}, {"dropped", s.triggers_dropped}};
    j["flushes"] = {{"mispredict", s.flush_mispredict},
                    {"delta_change", s.flush_delta_change},
                    {"slice_mismatch", s.flush_slice_mismatch},
                    {"stride_eviction", s.flush_stride_eviction},
                    {"btt_replacement", s.flush_btt_replacement}};
    j["btt_allocations"] = s.btt_allocations;
    j["btt_deallocations"] = s.btt_deallocations;
    j["fetch_allocations"] = s.fetch_allocations;
    j["fetch_evictions"] = s.fetch_evictions;
    j["plq_full"] = s.plq_full;
    j["outcomes_computed"] = s.outcomes_computed;
    j["fsm_waits"] = s.fsm_waits;
    j["low_power_cycles"] = s.low_power_cycles;
    j["low_power_fraction"] = s.low_power_fraction();
    j["extra_memory_accesses"] = s.extra_memory_accesses;
    j["extra_memory_access_pct"] =
        s.loads ? 100.0 * static_cast<double>(s.extra_memory_accesses) / s.loads : 0.0;
    j["unmapped_reads"] = s.unmapped_reads;
    auto& pcs = j["per_pc"] = nlohmann::ordered_json::object();
    for (const auto& [pc, p] : s.per_pc)
        pcs[hex_pc(pc)] = {{"all", counts_json(p.all)}, {"post_warmup", counts_json(p.post_warmup)}};
    return j;
}

} // namespace ldbp
