#include "ldbp/baseline_predictor.hpp"

#include <bit>
#include <stdexcept>

namespace ldbp {

namespace {

bool pow2(std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

void fail(const std::string& field, const std::string& what) {
    throw std::invalid_argument("baseline." + field + ": " + what);
}

} // namespace

void TageConfig::validate() const {
    if (!pow2(base_entries)) fail("base_entries", "must be a power of two");
    if (base_ctr_bits < 1 || base_ctr_bits > 7) fail("base_ctr_bits", "must be in [1,7]");
    const auto n = table_entries.size();
    if (n == 0) fail("table_entries", "at least one tagged table is required");
    if (history_lengths.size() != n) fail("history_lengths", "needs one length per tagged table");
    if (tag_bits.size() != n) fail("tag_bits", "needs one width per tagged table");
    for (std::size_t i = 0; i < n; ++i) {
        if (!pow2(table_entries[i])) fail("table_entries", "must be powers of two");
        if (table_entries[i] > (1u << 20)) fail("table_entries", "at most 2^20 entries per table");
        if (tag_bits[i] < 1 || tag_bits[i] > 16) fail("tag_bits", "must be in [1,16]");
        if (history_lengths[i] < 1 || history_lengths[i] > 1000) fail("history_lengths", "must be in [1,1000]");
        if (i > 0 && history_lengths[i] <= history_lengths[i - 1]) fail("history_lengths", "must be strictly increasing");
    }
    if (ctr_bits < 2 || ctr_bits > 7) fail("ctr_bits", "must be in [2,7]");
    if (u_bits < 1 || u_bits > 7) fail("u_bits", "must be in [1,7]");
    if (u_reset_period == 0) fail("u_reset_period", "must be positive");
}

std::uint64_t TageConfig::budget_bits() const {
    std::uint64_t bits = static_cast<std::uint64_t>(base_entries) * base_ctr_bits;
    for (std::size_t i = 0; i < table_entries.size(); ++i)
        bits += static_cast<std::uint64_t>(table_entries[i]) * (ctr_bits + tag_bits[i] + u_bits);
    return bits;
}

TageConfig TageConfig::preset(std::string_view name) {
    TageConfig c;
    if (name == "default") return c;
    if (name == "150K") {
        c.base_entries = 16384;
        c.tag_bits = {11, 12, 13, 14, 15, 16};
        return c;
    }
    if (name == "256K") {
        c.base_entries = 16384;
        c.table_entries.assign(6, 2048);
        c.tag_bits = {11, 12, 13, 14, 15, 16};
        return c;
    }
    throw std::invalid_argument("baseline.preset: unknown preset '" + std::string(name) + "'");
}

TagePredictor::TagePredictor(TageConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
    base_max_ = static_cast<std::uint8_t>((1u << cfg_.base_ctr_bits) - 1);
    base_.assign(cfg_.base_entries, static_cast<std::uint8_t>(1u << (cfg_.base_ctr_bits - 1)));
    ctr_max_ = static_cast<std::int8_t>((1 << (cfg_.ctr_bits - 1)) - 1);
    ctr_min_ = static_cast<std::int8_t>(-(1 << (cfg_.ctr_bits - 1)));
    u_max_ = static_cast<std::uint8_t>((1u << cfg_.u_bits) - 1);
    const auto n = cfg_.table_entries.size();
    tables_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tables_[i].assign(cfg_.table_entries[i], Entry{});
        auto lg = static_cast<std::uint32_t>(std::countr_zero(cfg_.table_entries[i]));
        log_entries_.push_back(lg);
        fold_idx_.push_back({0, lg, cfg_.history_lengths[i]});
        fold_tag0_.push_back({0, cfg_.tag_bits[i], cfg_.history_lengths[i]});
        fold_tag1_.push_back({0, std::max(1u, cfg_.tag_bits[i] - 1), cfg_.history_lengths[i]});
    }
    ghist_.assign(kHistSize, 0);
}

BaselinePrediction TagePredictor::predict(Addr pc) {
    BaselinePrediction p;
    const auto n = tables_.size();
    p.indices.resize(n);
    p.tags.resize(n);
    const std::uint64_t a = pc >> 2;
    for (std::size_t i = 0; i < n; ++i) {
        const auto lg = log_entries_[i];
        const std::uint64_t path = path_ & ((1u << std::min<std::uint32_t>(16, cfg_.history_lengths[i])) - 1);
        std::uint64_t idx = a ^ (a >> (lg - (i % lg))) ^ fold_idx_[i].comp ^ (path >> (i % 4)) ^ (path << 3);
        p.indices[i] = static_cast<std::uint32_t>(idx & ((1u << lg) - 1));
        std::uint64_t tag = a ^ fold_tag0_[i].comp ^ (static_cast<std::uint64_t>(fold_tag1_[i].comp) << 1);
        p.tags[i] = static_cast<std::uint32_t>(tag & ((1u << cfg_.tag_bits[i]) - 1));
    }
    p.base_index = static_cast<std::uint32_t>(a & (cfg_.base_entries - 1));
    const bool base_taken = base_[p.base_index] >= (1u << (cfg_.base_ctr_bits - 1));
    const bool base_sat = base_[p.base_index] == 0 || base_[p.base_index] == base_max_;

    int provider = -1, alt = -1;
    for (int i = static_cast<int>(n) - 1; i >= 0; --i) {
        if (tables_[i][p.indices[i]].tag == p.tags[i]) {
            if (provider < 0) provider = i;
            else {
                alt = i;
                break;
            }
        }
    }
    p.provider = provider;
    p.alt_taken = alt >= 0 ? tables_[alt][p.indices[alt]].ctr >= 0 : base_taken;
    if (provider >= 0) {
        const auto& e = tables_[provider][p.indices[provider]];
        p.taken = e.ctr >= 0;
        p.low_confidence = !saturated(e.ctr);
    } else {
        p.taken = base_taken;
        p.low_confidence = !base_sat;
    }
    return p;
}

void TagePredictor::update_history(Addr pc, bool taken) {
    for (std::size_t i = 0; i < tables_.size(); ++i) {
        const auto len = cfg_.history_lengths[i];
        // hist_bit(len - 1) is the bit leaving a window of `len` once the new one lands
        const bool out = hist_bit(len - 1);
        fold_idx_[i].update(taken, out);
        fold_tag0_[i].update(taken, out);
        fold_tag1_[i].update(taken, out);
    }
    ghead_ = (ghead_ - 1) & kHistMask;
    ghist_[ghead_] = taken ? 1 : 0;
    path_ = ((path_ << 1) | static_cast<std::uint32_t>((pc >> 2) & 1)) & 0xFFFF;
}

void TagePredictor::commit(const BaselinePrediction& p, bool taken) {
    const auto n = static_cast<int>(tables_.size());
    if (p.indices.size() != tables_.size()) throw std::logic_error("tage: prediction from a different geometry");

    auto bump = [&](std::int8_t& c) {
        if (taken) { if (c < ctr_max_) ++c; }
        else if (c > ctr_min_) --c;
    };

    bool provider_live = p.provider >= 0 && tables_[p.provider][p.indices[p.provider]].tag == p.tags[p.provider];
    if (provider_live) {
        auto& e = tables_[p.provider][p.indices[p.provider]];
        const bool pred = e.ctr >= 0;
        if (pred != p.alt_taken) {
            if (pred == taken) { if (e.u < u_max_) ++e.u; }
            else if (e.u > 0) --e.u;
        }
        bump(e.ctr);
    } else {
        auto& b = base_[p.base_index];
        if (taken) { if (b < base_max_) ++b; }
        else if (b > 0) --b;
    }

    if (p.taken != taken && p.provider < n - 1) {
        int start = p.provider + 1;
        // skip one candidate at random so allocations spread across tables
        if (start < n - 1 && rng_.bernoulli(0.5)) ++start;
        bool allocated = false;
        for (int i = start; i < n; ++i) {
            auto& e = tables_[i][p.indices[i]];
            if (e.u == 0) {
                e.tag = static_cast<std::uint16_t>(p.tags[i]);
                e.ctr = taken ? 0 : -1;
                allocated = true;
                break;
            }
        }
        if (!allocated)
            for (int i = p.provider + 1; i < n; ++i) {
                auto& e = tables_[i][p.indices[i]];
                if (e.u > 0) --e.u;
            }
    }

    if (++commits_ % cfg_.u_reset_period == 0)
        for (auto& t : tables_)
            for (auto& e : t) e.u >>= 1;
}

void TagePredictor::digest(StateDigest& d) const {
    for (auto b : base_) d.add(b);
    for (const auto& t : tables_)
        for (const auto& e : t) d.add(e.ctr).add(e.tag).add(e.u);
    d.add(ghead_).add(path_).add(commits_);
    for (auto h : ghist_) d.add(h);
}

void BimodalConfig::validate() const {
    if (!pow2(entries)) fail("bimodal_entries", "must be a power of two");
    if (ctr_bits < 1 || ctr_bits > 7) fail("bimodal_ctr_bits", "must be in [1,7]");
}

BimodalPredictor::BimodalPredictor(BimodalConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    max_ = static_cast<std::uint8_t>((1u << cfg_.ctr_bits) - 1);
    table_.assign(cfg_.entries, static_cast<std::uint8_t>(1u << (cfg_.ctr_bits - 1)));
}

BaselinePrediction BimodalPredictor::predict(Addr pc) {
    BaselinePrediction p;
    p.base_index = static_cast<std::uint32_t>((pc >> 2) & (cfg_.entries - 1));
    const auto c = table_[p.base_index];
    p.taken = c >= (1u << (cfg_.ctr_bits - 1));
    p.low_confidence = !(c == 0 || c == max_);
    p.alt_taken = p.taken;
    return p;
}

void BimodalPredictor::commit(const BaselinePrediction& p, bool taken) {
    auto& c = table_[p.base_index];
    if (taken) { if (c < max_) ++c; }
    else if (c > 0) --c;
}

void BimodalPredictor::digest(StateDigest& d) const {
    for (auto c : table_) d.add(c);
}

} // namespace ldbp
