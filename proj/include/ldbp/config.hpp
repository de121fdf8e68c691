#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ldbp/baseline_predictor.hpp"
#include "ldbp/fetch_block.hpp"
#include "ldbp/memory_model.hpp"
#include "ldbp/retire_block.hpp"
#include "ldbp/stride_predictor.hpp"

namespace ldbp {

class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class Chooser : std::uint8_t { LdbpFirst, ConfidenceGated };
enum class BaselineKind : std::uint8_t { Tage, Bimodal };

struct BaselineConfig {
    BaselineKind kind = BaselineKind::Tage;
    std::string preset = "default";
    TageConfig tage;
    BimodalConfig bimodal;
};

struct EngineConfig {
    bool ldbp_enabled = true;
    std::uint32_t pipeline_depth = 32;   // fetch-to-retire, one instruction per cycle
    std::uint32_t tl_dist = 16;
    std::uint64_t gating_window = 100000;  // 0 disables low-power accounting
    Chooser chooser = Chooser::LdbpFirst;
    std::uint64_t warmup_branches = 10000;  // per-PC instances excluded from post-warmup counts
    std::uint64_t seed = 1;
    std::uint32_t wrong_path_fetches = 0;  // test hook, see run()
};

struct SimConfig {
    StrideConfig sp;
    RetireConfig rb;
    FetchConfig fb;
    BaselineConfig baseline;
    MemoryConfig mem;
    EngineConfig engine;

    /// Throws ConfigError naming the first bad field.
    void validate() const;

    /// "ldbp" (table defaults), "baseline" (LDBP disabled) or "infinite"
    /// (512 entries in every table and threshold).
    static SimConfig preset(std::string_view name);
};

/// Sets every LDBP table and threshold to n.
void make_infinite(SimConfig& c, std::uint32_t n = 512);

/// Overlays a JSON document onto base. Unknown sections or keys and type
/// mismatches raise ConfigError.
SimConfig config_from_json(const nlohmann::json& j, SimConfig base = {});
nlohmann::ordered_json config_to_json(const SimConfig& c);

/// Parses JSON with // and /* */ comments.
SimConfig parse_config(std::string_view text, SimConfig base = {});
SimConfig load_config(const std::string& path, SimConfig base = {});

/// Path from $LDBP_CONFIG, or empty.
std::string default_config_path();

std::unique_ptr<BaselinePredictor> make_baseline(const BaselineConfig& c);

} // namespace ldbp
