#include "ldbp/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace ldbp {

using nlohmann::json;

namespace {

template <class T>
T get_num(const json& v, const std::string& field) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
        return v.get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(field, "expected a number");
        return v.get<T>();
    } else if constexpr (std::is_signed_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
        auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max())
            throw ConfigError(field, "out of range");
        return static_cast<T>(x);
    } else {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(field, "expected a non-negative integer");
        auto x = v.get<std::uint64_t>();
        if (x > std::numeric_limits<T>::max()) throw ConfigError(field, "out of range");
        return static_cast<T>(x);
    }
}

std::vector<std::uint32_t> get_list(const json& v, const std::string& field) {
    if (!v.is_array()) throw ConfigError(field, "expected an array of integers");
    std::vector<std::uint32_t> out;
    for (const auto& x : v) out.push_back(get_num<std::uint32_t>(x, field));
    return out;
}

std::string get_str(const json& v, const std::string& field) {
    if (!v.is_string()) throw ConfigError(field, "expected a string");
    return v.get<std::string>();
}

using Setter = std::function<void(const json&, const std::string&)>;

void apply(const json& section, const std::string& name, const std::map<std::string, Setter>& setters) {
    if (!section.is_object()) throw ConfigError(name, "expected an object");
    for (auto it = section.begin(); it != section.end(); ++it) {
        const std::string field = name + "." + it.key();
        auto s = setters.find(it.key());
        if (s == setters.end()) throw ConfigError(field, "unknown key");
        s->second(it.value(), field);
    }
}

template <class T>
Setter num(T& dst) {
    return [&dst](const json& v, const std::string& f) { dst = get_num<T>(v, f); };
}

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

} // namespace

void SimConfig::validate() const {
    require(sp.entries > 0, "stride_predictor.entries", "must be positive");
    require(sp.tag_bits <= 32, "stride_predictor.tag_bits", "must be <= 32");
    require(sp.conf_max >= 1 && sp.conf_max <= 255, "stride_predictor.conf_max", "must be in [1,255]");
    require(sp.conf_penalty >= 1, "stride_predictor.conf_penalty", "must be positive");

    require(rb.nops_max >= 1, "retire_block.nops_max", "must be positive");
    require(rb.max_loads >= 1, "retire_block.max_loads", "must be positive");
    require(rb.btt_entries > 0, "retire_block.btt_entries", "must be positive");
    require(rb.btt_tag_bits <= 32, "retire_block.btt_tag_bits", "must be <= 32");
    require(rb.csb_subentries >= 1, "retire_block.csb_subentries", "must be positive");
    require(rb.plq_entries > 0, "retire_block.plq_entries", "must be positive");
    require(rb.accuracy_max >= 1, "retire_block.accuracy_max", "must be positive");
    require(rb.accuracy_init >= 1 && rb.accuracy_init <= rb.accuracy_max, "retire_block.accuracy_init",
            "must be in [1, accuracy_max]");

    require(fb.lor_entries > 0, "fetch_block.lor_entries", "must be positive");
    require(fb.bot_entries > 0, "fetch_block.bot_entries", "must be positive");
    require(fb.queue_n > 0, "fetch_block.queue_n", "must be positive");
    require(fb.fsm_count > 0, "fetch_block.fsm_count", "must be positive");

    try {
        if (baseline.kind == BaselineKind::Tage) baseline.tage.validate();
        else baseline.bimodal.validate();
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        auto colon = msg.find(':');
        throw ConfigError(msg.substr(0, colon), colon == std::string::npos ? msg : msg.substr(colon + 2));
    }

    require(mem.max_inflight > 0, "memory.max_inflight", "must be positive");

    require(engine.pipeline_depth >= 1, "engine.pipeline_depth", "must be positive");
    require(engine.tl_dist >= 1, "engine.tl_dist", "must be positive");
    require(engine.tl_dist < fb.queue_n, "engine.tl_dist", "must be smaller than fetch_block.queue_n");
}

void make_infinite(SimConfig& c, std::uint32_t n) {
    c.sp.entries = n;
    c.rb.nops_max = n;
    c.rb.max_loads = n;
    c.rb.max_alu_ops = n;
    c.rb.btt_entries = n;
    c.rb.csb_subentries = n;
    c.rb.plq_entries = n;
    c.fb.lor_entries = n;
    c.fb.bot_entries = n;
    c.fb.queue_n = n;
}

SimConfig SimConfig::preset(std::string_view name) {
    SimConfig c;
    if (name == "ldbp") return c;
    if (name == "baseline") {
        c.engine.ldbp_enabled = false;
        return c;
    }
    if (name == "infinite") {
        make_infinite(c);
        return c;
    }
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (expected ldbp, baseline or infinite)");
}

SimConfig config_from_json(const json& j, SimConfig c) {
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& key = it.key();
        const auto& v = it.value();
        if (key == "stride_predictor") {
            apply(v, key, {{"entries", num(c.sp.entries)},
                           {"tag_bits", num(c.sp.tag_bits)},
                           {"conf_max", num(c.sp.conf_max)},
                           {"conf_penalty", num(c.sp.conf_penalty)}});
        } else if (key == "retire_block") {
            apply(v, key, {{"nops_max", num(c.rb.nops_max)},
                           {"max_loads", num(c.rb.max_loads)},
                           {"max_alu_ops", num(c.rb.max_alu_ops)},
                           {"btt_entries", num(c.rb.btt_entries)},
                           {"btt_tag_bits", num(c.rb.btt_tag_bits)},
                           {"csb_subentries", num(c.rb.csb_subentries)},
                           {"plq_entries", num(c.rb.plq_entries)},
                           {"accuracy_max", num(c.rb.accuracy_max)},
                           {"accuracy_init", num(c.rb.accuracy_init)}});
        } else if (key == "fetch_block") {
            apply(v, key, {{"lor_entries", num(c.fb.lor_entries)},
                           {"bot_entries", num(c.fb.bot_entries)},
                           {"queue_n", num(c.fb.queue_n)},
                           {"fsm_count", num(c.fb.fsm_count)}});
        } else if (key == "baseline") {
            // the preset is applied before any explicit geometry key
            if (v.is_object() && v.contains("preset")) {
                c.baseline.preset = get_str(v["preset"], "baseline.preset");
                try {
                    c.baseline.tage = TageConfig::preset(c.baseline.preset);
                } catch (const std::invalid_argument&) {
                    throw ConfigError("baseline.preset", "unknown preset '" + c.baseline.preset +
                                                             "' (expected default, 150K or 256K)");
                }
            }
            auto& t = c.baseline.tage;
            apply(v, key,
                  {{"kind",
                    [&](const json& x, const std::string& f) {
                        auto s = get_str(x, f);
                        if (s == "tage") c.baseline.kind = BaselineKind::Tage;
                        else if (s == "bimodal") c.baseline.kind = BaselineKind::Bimodal;
                        else throw ConfigError(f, "expected 'tage' or 'bimodal'");
                    }},
                   {"preset", [](const json&, const std::string&) {}},
                   {"base_entries", num(t.base_entries)},
                   {"base_ctr_bits", num(t.base_ctr_bits)},
                   {"table_entries", [&](const json& x, const std::string& f) { t.table_entries = get_list(x, f); }},
                   {"history_lengths", [&](const json& x, const std::string& f) { t.history_lengths = get_list(x, f); }},
                   {"tag_bits", [&](const json& x, const std::string& f) { t.tag_bits = get_list(x, f); }},
                   {"ctr_bits", num(t.ctr_bits)},
                   {"u_bits", num(t.u_bits)},
                   {"seed", num(t.seed)},
                   {"u_reset_period", num(t.u_reset_period)},
                   {"bimodal_entries", num(c.baseline.bimodal.entries)},
                   {"bimodal_ctr_bits", num(c.baseline.bimodal.ctr_bits)}});
        } else if (key == "memory") {
            apply(v, key, {{"base_latency", num(c.mem.base_latency)},
                           {"jitter", num(c.mem.jitter)},
                           {"max_inflight", num(c.mem.max_inflight)},
                           {"seed", num(c.mem.seed)}});
        } else if (key == "engine") {
            auto& e = c.engine;
            apply(v, key,
                  {{"ldbp_enabled", num(e.ldbp_enabled)},
                   {"pipeline_depth", num(e.pipeline_depth)},
                   {"tl_dist", num(e.tl_dist)},
                   {"gating_window", num(e.gating_window)},
                   {"chooser",
                    [&](const json& x, const std::string& f) {
                        auto s = get_str(x, f);
                        if (s == "ldbp_first") e.chooser = Chooser::LdbpFirst;
                        else if (s == "confidence_gated") e.chooser = Chooser::ConfidenceGated;
                        else throw ConfigError(f, "expected 'ldbp_first' or 'confidence_gated'");
                    }},
                   {"warmup_branches", num(e.warmup_branches)},
                   {"seed", num(e.seed)},
                   {"wrong_path_fetches", num(e.wrong_path_fetches)}});
        } else {
            throw ConfigError(key, "unknown section");
        }
    }
    c.validate();
    return c;
}

nlohmann::ordered_json config_to_json(const SimConfig& c) {
    nlohmann::ordered_json j;
    j["stride_predictor"] = {{"entries", c.sp.entries},
                             {"tag_bits", c.sp.tag_bits},
                             {"conf_max", c.sp.conf_max},
                             {"conf_penalty", c.sp.conf_penalty}};
    j["retire_block"] = {{"nops_max", c.rb.nops_max},
                         {"max_loads", c.rb.max_loads},
                         {"max_alu_ops", c.rb.max_alu_ops},
                         {"btt_entries", c.rb.btt_entries},
                         {"btt_tag_bits", c.rb.btt_tag_bits},
                         {"csb_subentries", c.rb.csb_subentries},
                         {"plq_entries", c.rb.plq_entries},
                         {"accuracy_max", c.rb.accuracy_max},
                         {"accuracy_init", c.rb.accuracy_init}};
    j["fetch_block"] = {{"lor_entries", c.fb.lor_entries},
                        {"bot_entries", c.fb.bot_entries},
                        {"queue_n", c.fb.queue_n},
                        {"fsm_count", c.fb.fsm_count}};
    const auto& t = c.baseline.tage;
    j["baseline"] = {{"kind", c.baseline.kind == BaselineKind::Tage ? "tage" : "bimodal"},
                     {"preset", c.baseline.preset},
                     {"base_entries", t.base_entries},
                     {"base_ctr_bits", t.base_ctr_bits},
                     {"table_entries", t.table_entries},
                     {"history_lengths", t.history_lengths},
                     {"tag_bits", t.tag_bits},
                     {"ctr_bits", t.ctr_bits},
                     {"u_bits", t.u_bits},
                     {"seed", t.seed},
                     {"u_reset_period", t.u_reset_period},
                     {"bimodal_entries", c.baseline.bimodal.entries},
                     {"bimodal_ctr_bits", c.baseline.bimodal.ctr_bits}};
    j["memory"] = {{"base_latency", c.mem.base_latency},
                   {"jitter", c.mem.jitter},
                   {"max_inflight", c.mem.max_inflight},
                   {"seed", c.mem.seed}};
    j["engine"] = {{"ldbp_enabled", c.engine.ldbp_enabled},
                   {"pipeline_depth", c.engine.pipeline_depth},
                   {"tl_dist", c.engine.tl_dist},
                   {"gating_window", c.engine.gating_window},
                   {"chooser", c.engine.chooser == Chooser::LdbpFirst ? "ldbp_first" : "confidence_gated"},
                   {"warmup_branches", c.engine.warmup_branches},
                   {"seed", c.engine.seed},
                   {"wrong_path_fetches", c.engine.wrong_path_fetches}};
    return j;
}

SimConfig parse_config(std::string_view text, SimConfig base) {
    json j;
    try {
        j = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("<syntax>", e.what());
    }
    return config_from_json(j, std::move(base));
}

SimConfig load_config(const std::string& path, SimConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string default_config_path() {
    const char* p = std::getenv("LDBP_CONFIG");
    return p ? std::string(p) : std::string();
}

std::unique_ptr<BaselinePredictor> make_baseline(const BaselineConfig& c) {
    if (c.kind == BaselineKind::Bimodal) return std::make_unique<BimodalPredictor>(c.bimodal);
    return std::make_unique<TagePredictor>(c.tage);
}

} // namespace ldbp
