#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "ldbp/config.hpp"

using namespace ldbp;

namespace {

std::string field_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST_CASE("defaults") {
    SimConfig c;
    CHECK(c.sp.entries == 48);
    CHECK(c.rb.btt_entries == 8);
    CHECK(c.fb.queue_n == 64);
    CHECK(c.engine.tl_dist == 16);
    CHECK(c.engine.ldbp_enabled);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("comments are accepted and keys overlay the base") {
    const char* text = R"(
        // table sizes
        {
          "fetch_block": { "queue_n": 32 /* deeper queues cost area */ },
          "engine": { "tl_dist": 8, "chooser": "confidence_gated" },
          "baseline": { "preset": "150K", "kind": "tage" }
        }
    )";
    auto c = parse_config(text);
    CHECK(c.fb.queue_n == 32);
    CHECK(c.engine.tl_dist == 8);
    CHECK(c.engine.chooser == Chooser::ConfidenceGated);
    CHECK(c.baseline.tage.budget_bits() == TageConfig::preset("150K").budget_bits());
    CHECK(c.fb.lor_entries == 16);

    SimConfig base;
    base.mem.base_latency = 99;
    auto d = parse_config(R"({"memory": {"jitter": 3}})", base);
    CHECK(d.mem.base_latency == 99);
    CHECK(d.mem.jitter == 3);
}

TEST_CASE("errors name the offending field") {
    CHECK(field_of(R"({"engine": {"tl_distance": 4}})") == "engine.tl_distance");
    CHECK(field_of(R"({"engines": {}})") == "engines");
    CHECK(field_of(R"({"engine": {"tl_dist": "four"}})") == "engine.tl_dist");
    CHECK(field_of(R"({"engine": {"tl_dist": -1}})") == "engine.tl_dist");
    CHECK(field_of(R"({"engine": {"tl_dist": 64}})") == "engine.tl_dist");
    CHECK(field_of(R"({"engine": {"chooser": "coin"}})") == "engine.chooser");
    CHECK(field_of(R"({"fetch_block": {"fsm_count": 0}})") == "fetch_block.fsm_count");
    CHECK(field_of(R"({"baseline": {"preset": "1M"}})") == "baseline.preset");
    CHECK(field_of(R"({"baseline": {"tag_bits": [8, 9]}})") == "baseline.tag_bits");
    CHECK(field_of(R"({"stride_predictor": {"entries": 1.5}})") == "stride_predictor.entries");
    CHECK(field_of(R"({"memory": {"max_inflight": 0}})") == "memory.max_inflight");
    CHECK(field_of("[1, 2]") == "<root>");
    CHECK(field_of("{ nope ") == "<syntax>");
    CHECK_THROWS_AS(load_config("/nonexistent/ldbp.jsonc"), ConfigError);
}

TEST_CASE("presets") {
    CHECK_FALSE(SimConfig::preset("baseline").engine.ldbp_enabled);
    auto inf = SimConfig::preset("infinite");
    CHECK(inf.fb.bot_entries == 512);
    CHECK(inf.rb.btt_entries == 512);
    CHECK(inf.sp.entries == 512);
    CHECK(inf.fb.queue_n == 512);
    CHECK_NOTHROW(inf.validate());
    CHECK_THROWS_AS(SimConfig::preset("huge"), ConfigError);
}

TEST_CASE("json round trip") {
    SimConfig c = SimConfig::preset("infinite");
    c.engine.chooser = Chooser::ConfidenceGated;
    c.baseline.kind = BaselineKind::Bimodal;
    c.mem.jitter = 4;
    auto back = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
    CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("file loading and the environment path") {
    const std::string path = "ldbp_test_config.jsonc";
    {
        std::ofstream f(path);
        f << "{ // one key\n \"engine\": {\"pipeline_depth\": 12} }\n";
    }
    CHECK(load_config(path).engine.pipeline_depth == 12);
    std::remove(path.c_str());

    setenv("LDBP_CONFIG", "/tmp/x.jsonc", 1);
    CHECK(default_config_path() == "/tmp/x.jsonc");
    unsetenv("LDBP_CONFIG");
    CHECK(default_config_path().empty());
}

TEST_CASE("baseline factory") {
    BaselineConfig b;
    CHECK(make_baseline(b)->name() == "tage");
    b.kind = BaselineKind::Bimodal;
    CHECK(make_baseline(b)->name() == "bimodal");
}

TEST_CASE("the shipped config spells out the defaults") {
    auto c = load_config(std::string(LDBP_SOURCE_DIR) + "/configs/default.jsonc");
    CHECK(config_to_json(c) == config_to_json(SimConfig{}));
}
