#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "ldbp/rng.hpp"
#include "ldbp/trace.hpp"

namespace ldbp {

struct MemoryConfig {
    std::uint32_t base_latency = 20;
    std::uint32_t jitter = 0;          // completion += uniform[0, jitter]
    std::uint32_t max_inflight = 16;
    std::uint64_t seed = 7;
};

struct MemAccepted {
    std::uint64_t completion = 0;
};

struct MemCompletion {
    Addr addr = 0;
    std::int64_t data = 0;
    std::uint64_t issue = 0;
    std::uint64_t completion = 0;
};

/// Flat-latency memory for trigger loads. Contents are immutable and come
/// from the loads recorded in the trace.
class MemoryModel {
public:
    explicit MemoryModel(MemoryConfig cfg = {});

    /// Records the value of every load in the trace. Throws
    /// std::invalid_argument if one address is seen with two values.
    void populate(const Trace& trace);
    void poke(Addr addr, std::int64_t value);

    /// Returns the completion cycle, or nullopt when max_inflight requests
    /// are already outstanding.
    std::optional<MemAccepted> issue(Addr addr, std::uint64_t cycle);

    /// Removes and returns requests whose completion cycle is <= cycle,
    /// ordered by (completion, issue order).
    std::vector<MemCompletion> drain(std::uint64_t cycle);

    std::int64_t read(Addr addr);

    std::uint32_t inflight() const { return static_cast<std::uint32_t>(pending_.size()); }
    std::uint64_t unmapped_reads() const { return unmapped_reads_; }
    std::uint64_t accepted() const { return accepted_; }
    std::uint64_t rejected() const { return rejected_; }
    const MemoryConfig& config() const { return cfg_; }

private:
    struct Req {
        std::uint64_t completion;
        std::uint64_t seq;
        Addr addr;
        std::uint64_t issue;
        bool operator>(const Req& o) const {
            return completion != o.completion ? completion > o.completion : seq > o.seq;
        }
    };

    MemoryConfig cfg_;
    std::unordered_map<Addr, std::int64_t> store_;
    std::priority_queue<Req, std::vector<Req>, std::greater<Req>> pending_;
    SplitMix64 rng_;
    std::uint64_t seq_ = 0;
    std::uint64_t unmapped_reads_ = 0;
    std::uint64_t accepted_ = 0;
    std::uint64_t rejected_ = 0;
};

} // namespace ldbp
