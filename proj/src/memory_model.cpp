#include "ldbp/memory_model.hpp"

#include <stdexcept>
#include <string>

namespace ldbp {

MemoryModel::MemoryModel(MemoryConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg_.max_inflight == 0) throw std::invalid_argument("memory.max_inflight: must be positive");
}

void MemoryModel::populate(const Trace& trace) {
    for (const auto& in : trace.instrs) {
        if (in.kind != InstrKind::Load) continue;
        auto [it, fresh] = store_.emplace(*in.load_addr, *in.load_data);
        if (!fresh && it->second != *in.load_data)
            throw std::invalid_argument("memory: address " + std::to_string(*in.load_addr) +
                                        " loaded with two different values");
    }
}

void MemoryModel::poke(Addr addr, std::int64_t value) { store_[addr] = value; }

std::optional<MemAccepted> MemoryModel::issue(Addr addr, std::uint64_t cycle) {
    if (pending_.size() >= cfg_.max_inflight) {
        ++rejected_;
        return std::nullopt;
    }
    std::uint64_t done = cycle + cfg_.base_latency;
    if (cfg_.jitter) done += rng_.uniform(static_cast<std::uint64_t>(cfg_.jitter) + 1);
    pending_.push({done, seq_++, addr, cycle});
    ++accepted_;
    return MemAccepted{done};
}

std::vector<MemCompletion> MemoryModel::drain(std::uint64_t cycle) {
    std::vector<MemCompletion> out;
    while (!pending_.empty() && pending_.top().completion <= cycle) {
        const auto r = pending_.top();
        pending_.pop();
        out.push_back({r.addr, read(r.addr), r.issue, r.completion});
    }
    return out;
}

std::int64_t MemoryModel::read(Addr addr) {
    auto it = store_.find(addr);
    if (it == store_.end()) {
        ++unmapped_reads_;
        return 0;
    }
    return it->second;
}

} // namespace ldbp
