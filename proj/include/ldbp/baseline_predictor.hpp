#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ldbp/digest.hpp"
#include "ldbp/rng.hpp"
#include "ldbp/trace.hpp"

namespace ldbp {

/// Prediction plus the lookup state needed to train at retirement.
struct BaselinePrediction {
    bool taken = false;
    bool low_confidence = true;
    int provider = -1;  // tagged table id, -1 for the base table
    bool alt_taken = false;
    std::uint32_t base_index = 0;
    std::vector<std::uint32_t> indices;
    std::vector<std::uint32_t> tags;
};

class BaselinePredictor {
public:
    virtual ~BaselinePredictor() = default;

    virtual BaselinePrediction predict(Addr pc) = 0;
    /// Shifts the global history. Called at fetch with the resolved outcome.
    virtual void update_history(Addr pc, bool taken) = 0;
    /// Trains the tables. Called at retirement in program order.
    virtual void commit(const BaselinePrediction& pred, bool taken) = 0;

    virtual void digest(StateDigest& d) const = 0;
    virtual std::string name() const = 0;
    virtual std::uint64_t budget_bits() const = 0;
};

struct TageConfig {
    std::uint32_t base_entries = 8192;
    std::uint32_t base_ctr_bits = 2;
    std::vector<std::uint32_t> table_entries{1024, 1024, 1024, 1024, 1024, 1024};
    std::vector<std::uint32_t> history_lengths{4, 9, 18, 36, 72, 144};
    std::vector<std::uint32_t> tag_bits{8, 9, 10, 10, 11, 12};
    std::uint32_t ctr_bits = 3;
    std::uint32_t u_bits = 2;
    std::uint64_t seed = 1;
    std::uint64_t u_reset_period = 1u << 18;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    /// Σ entries·(ctr + tag + u) + base entries·base_ctr_bits
    std::uint64_t budget_bits() const;
    double budget_kbit() const { return static_cast<double>(budget_bits()) / 1024.0; }

    /// "default", "150K" or "256K".
    static TageConfig preset(std::string_view name);
};

class TagePredictor final : public BaselinePredictor {
public:
    explicit TagePredictor(TageConfig cfg = {});

    BaselinePrediction predict(Addr pc) override;
    void update_history(Addr pc, bool taken) override;
    void commit(const BaselinePrediction& pred, bool taken) override;

    void digest(StateDigest& d) const override;
    std::string name() const override { return "tage"; }
    std::uint64_t budget_bits() const override { return cfg_.budget_bits(); }
    const TageConfig& config() const { return cfg_; }

private:
    struct Folded {
        std::uint32_t comp = 0;
        std::uint32_t clen = 0;  // compressed length
        std::uint32_t olen = 0;  // original length
        void update(bool in, bool out) {
            comp = (comp << 1) | (in ? 1u : 0u);
            comp ^= (out ? 1u : 0u) << (olen % clen);
            comp ^= comp >> clen;
            comp &= (1u << clen) - 1;
        }
    };
    struct Entry {
        std::int8_t ctr = 0;
        std::uint16_t tag = 0;
        std::uint8_t u = 0;
    };

    bool hist_bit(std::uint32_t i) const { return ghist_[(ghead_ + i) & kHistMask] != 0; }
    bool saturated(std::int8_t ctr) const { return ctr == ctr_max_ || ctr == ctr_min_; }

    static constexpr std::uint32_t kHistSize = 1024;
    static constexpr std::uint32_t kHistMask = kHistSize - 1;

    TageConfig cfg_;
    std::vector<std::uint8_t> base_;
    std::vector<std::vector<Entry>> tables_;
    std::vector<std::uint32_t> log_entries_;
    std::vector<Folded> fold_idx_, fold_tag0_, fold_tag1_;
    std::vector<std::uint8_t> ghist_;
    std::uint32_t ghead_ = 0;
    std::uint32_t path_ = 0;
    std::int8_t ctr_max_ = 3, ctr_min_ = -4;
    std::uint8_t u_max_ = 3;
    std::uint8_t base_max_ = 3;
    std::uint64_t commits_ = 0;
    SplitMix64 rng_;
};

struct BimodalConfig {
    std::uint32_t entries = 8192;
    std::uint32_t ctr_bits = 2;
    void validate() const;
};

class BimodalPredictor final : public BaselinePredictor {
public:
    explicit BimodalPredictor(BimodalConfig cfg = {});

    BaselinePrediction predict(Addr pc) override;
    void update_history(Addr, bool) override {}
    void commit(const BaselinePrediction& pred, bool taken) override;

    void digest(StateDigest& d) const override;
    std::string name() const override { return "bimodal"; }
    std::uint64_t budget_bits() const override {
        return static_cast<std::uint64_t>(cfg_.entries) * cfg_.ctr_bits;
    }

private:
    BimodalConfig cfg_;
    std::vector<std::uint8_t> table_;
    std::uint8_t max_;
};

} // namespace ldbp
