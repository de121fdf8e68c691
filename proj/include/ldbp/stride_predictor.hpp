#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ldbp/trace.hpp"

namespace ldbp {

struct StrideConfig {
    std::uint32_t entries = 48;
    std::uint32_t tag_bits = 10;
    int conf_max = 15;
    int conf_penalty = 4;
};

/// Handle to a stride-predictor entry. The generation changes whenever the
/// slot is reinstalled, so a pointer held across an eviction is detectably
/// stale.
struct StridePtr {
    std::uint32_t index = 0;
    std::uint32_t generation = 0;

    bool operator==(const StridePtr&) const = default;
};

struct StrideEntry {
    bool valid = false;
    std::uint64_t pctag = 0;
    Addr lastaddr = 0;
    std::int64_t delta = 0;
    int confidence = 0;
    bool tracking = false;
    std::uint32_t generation = 0;
};

struct StrideUpdate {
    StridePtr ptr;
    bool installed = false;       // tag miss, fresh entry
    bool delta_matched = false;   // tag hit and addr - lastaddr == delta
    /// Set when the install evicted an entry whose tracking bit was on.
    std::optional<StridePtr> evicted_tracked;
};

/// Direct-mapped per-load-PC stride table with a 1-up / N-down confidence
/// counter. Only a saturated entry is predictable.
class StridePredictor {
public:
    explicit StridePredictor(StrideConfig cfg = {});

    StrideUpdate update(Addr pc, Addr addr);

    bool is_live(StridePtr p) const;
    /// Throws std::logic_error on a stale pointer.
    bool is_predictable(StridePtr p) const;
    void set_tracking(StridePtr p, bool on);
    const StrideEntry& entry(StridePtr p) const;

    std::uint32_t index_of(Addr pc) const;
    std::uint64_t tag_of(Addr pc) const;
    std::optional<StridePtr> lookup(Addr pc) const;

    const StrideConfig& config() const { return cfg_; }
    const std::vector<StrideEntry>& entries() const { return table_; }

private:
    void check_live(StridePtr p) const;

    StrideConfig cfg_;
    std::vector<StrideEntry> table_;
};

} // namespace ldbp
