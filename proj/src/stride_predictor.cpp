#include "ldbp/stride_predictor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ldbp {

StridePredictor::StridePredictor(StrideConfig cfg) : cfg_(cfg), table_(cfg.entries) {
    if (cfg_.entries == 0) throw std::invalid_argument("stride predictor needs at least one entry");
    if (cfg_.conf_max <= 0 || cfg_.conf_penalty <= 0)
        throw std::invalid_argument("stride confidence parameters must be positive");
}

std::uint32_t StridePredictor::index_of(Addr pc) const {
    return static_cast<std::uint32_t>((pc >> 2) % cfg_.entries);
}

std::uint64_t StridePredictor::tag_of(Addr pc) const {
    const std::uint64_t upper = (pc >> 2) / cfg_.entries;
    return cfg_.tag_bits >= 64 ? upper : upper & ((std::uint64_t{1} << cfg_.tag_bits) - 1);
}

std::optional<StridePtr> StridePredictor::lookup(Addr pc) const {
    const auto idx = index_of(pc);
    const auto& e = table_[idx];
    if (!e.valid || e.pctag != tag_of(pc)) return std::nullopt;
    return StridePtr{idx, e.generation};
}

StrideUpdate StridePredictor::update(Addr pc, Addr addr) {
    const auto idx = index_of(pc);
    const auto tag = tag_of(pc);
    auto& e = table_[idx];
    StrideUpdate out;
    if (!e.valid || e.pctag != tag) {
        if (e.valid && e.tracking) out.evicted_tracked = StridePtr{idx, e.generation};
        const std::uint32_t gen = e.generation + 1;
        e = StrideEntry{};
        e.valid = true;
        e.pctag = tag;
        e.lastaddr = addr;
        e.generation = gen;
        out.installed = true;
        out.ptr = StridePtr{idx, gen};
        return out;
    }
    const auto seen = static_cast<std::int64_t>(addr - e.lastaddr);
    if (seen == e.delta) {
        e.confidence = std::min(e.confidence + 1, cfg_.conf_max);
        out.delta_matched = true;
    } else {
        e.confidence = std::max(e.confidence - cfg_.conf_penalty, 0);
        if (e.confidence == 0) e.delta = seen;
    }
    e.lastaddr = addr;
    out.ptr = StridePtr{idx, e.generation};
    return out;
}

bool StridePredictor::is_live(StridePtr p) const {
    return p.index < table_.size() && table_[p.index].valid && table_[p.index].generation == p.generation;
}

void StridePredictor::check_live(StridePtr p) const {
    if (!is_live(p))
        throw std::logic_error("stale stride predictor pointer to slot " + std::to_string(p.index));
}

bool StridePredictor::is_predictable(StridePtr p) const {
    check_live(p);
    return table_[p.index].confidence == cfg_.conf_max;
}

void StridePredictor::set_tracking(StridePtr p, bool on) {
    check_live(p);
    table_[p.index].tracking = on;
}

const StrideEntry& StridePredictor::entry(StridePtr p) const {
    check_live(p);
    return table_[p.index];
}

} // namespace ldbp
