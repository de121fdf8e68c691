#include <doctest.h>

#include <sstream>

#include "ldbp/rng.hpp"
#include "ldbp/trace.hpp"

using namespace ldbp;

namespace {

RetiredInstr random_instr(SplitMix64& rng) {
    const Addr pc = 0x1000 + 4 * rng.uniform(1 << 16);
    auto reg = [&] { return static_cast<RegId>(1 + rng.uniform(31)); };
    switch (rng.uniform(6)) {
    case 0: return RetiredInstr::load(pc, reg(), reg(), rng.next_u64(), static_cast<std::int64_t>(rng.next_u64()),
                                      static_cast<std::int64_t>(rng.uniform(4096)) - 2048);
    case 1: return RetiredInstr::store(pc, reg(), reg(), rng.next_u64(), static_cast<std::int64_t>(rng.uniform(64)));
    case 2: {
        auto op = static_cast<AluOp>(rng.uniform(8));
        if (is_unary(op)) return RetiredInstr::alu(pc, op, reg(), reg(), std::nullopt, static_cast<std::int64_t>(rng.uniform(64)));
        return RetiredInstr::alu(pc, op, reg(), reg(), reg());
    }
    case 3: return RetiredInstr::complex_alu(pc, reg(), reg(), rng.bernoulli(0.5) ? std::optional<RegId>(reg()) : std::nullopt);
    case 4: return RetiredInstr::branch(pc, static_cast<BranchCond>(rng.uniform(6)), reg(),
                                        rng.bernoulli(0.5) ? std::optional<RegId>(reg()) : std::nullopt, rng.bernoulli(0.5));
    default: return RetiredInstr::other(pc, rng.bernoulli(0.5) ? std::optional<RegId>(reg()) : std::nullopt);
    }
}

std::size_t header_bytes(const std::string& name) { return 8 + 2 + name.size() + 8 + 8; }

template <class F>
std::uint64_t error_offset(const std::vector<std::uint8_t>& bytes, F&& check_msg) {
    try {
        decode_trace(bytes);
    } catch (const TraceFormatError& e) {
        check_msg(std::string(e.what()));
        return e.offset();
    }
    FAIL("no error raised");
    return ~0ULL;
}

} // namespace

TEST_CASE("empty trace round-trips") {
    Trace t{{"empty", 0, 0}, {}};
    auto bytes = encode_trace(t);
    CHECK(bytes.size() == header_bytes("empty"));
    CHECK(decode_trace(bytes) == t);
}

TEST_CASE("single load round-trips field by field") {
    Trace t{{"one", 9, 1}, {RetiredInstr::load(0x400, 5, 6, 0x1000, 1)}};
    auto back = decode_trace(encode_trace(t));
    REQUIRE(back.instrs.size() == 1);
    const auto& r = back.instrs[0];
    CHECK(r.kind == InstrKind::Load);
    CHECK(r.pc == 0x400);
    CHECK(*r.dst == 5);
    CHECK(*r.src1 == 6);
    CHECK_FALSE(r.src2.has_value());
    CHECK(*r.load_addr == 0x1000);
    CHECK(*r.load_data == 1);
    CHECK(back == t);
}

TEST_CASE("10^4 random records round-trip with identical hash") {
    SplitMix64 rng(77);
    Trace t{{"random", 77, 0}, {}};
    for (int i = 0; i < 10000; ++i) t.instrs.push_back(random_instr(rng));
    t.header.count = t.instrs.size();
    auto bytes = encode_trace(t);
    CHECK(bytes.size() == header_bytes("random") + 10000 * kRecordBytes);
    auto back = decode_trace(bytes);
    CHECK(back == t);
    auto bytes2 = encode_trace(back);
    CHECK(fnv1a(bytes.data(), bytes.size()) == fnv1a(bytes2.data(), bytes2.size()));

    std::stringstream ss;
    write_trace(t.header, t.instrs, ss);
    CHECK(read_trace(ss) == t);
}

TEST_CASE("malformed input reports the byte offset") {
    Trace t{{"k", 1, 2}, {RetiredInstr::load(0x400, 5, 6, 0x1000, 1), RetiredInstr::other(0x404)}};
    const auto good = encode_trace(t);
    const auto hdr = header_bytes("k");

    SUBCASE("bad magic") {
        auto b = good;
        b[3] = 'X';
        CHECK(error_offset(b, [](const std::string& m) { CHECK(m.find("magic") != std::string::npos); }) == 0);
    }
    SUBCASE("truncated header") {
        std::vector<std::uint8_t> b(good.begin(), good.begin() + 12);
        error_offset(b, [](const std::string& m) { CHECK(m.find("truncated") != std::string::npos); });
    }
    SUBCASE("truncated record") {
        std::vector<std::uint8_t> b(good.begin(), good.end() - 5);
        auto off = error_offset(b, [](const std::string& m) { CHECK(m.find("truncated") != std::string::npos); });
        CHECK(off >= hdr + kRecordBytes);
        CHECK(off <= good.size());
    }
    SUBCASE("unknown kind code") {
        auto b = good;
        b[hdr + kRecordBytes] = 42;
        CHECK(error_offset(b, [](const std::string& m) { CHECK(m.find("kind") != std::string::npos); }) ==
              hdr + kRecordBytes);
    }
    SUBCASE("register out of range") {
        auto b = good;
        b[hdr + 1] = 40;
        CHECK(error_offset(b, [](const std::string&) {}) == hdr + 1);
    }
    SUBCASE("reserved flag bits") {
        auto b = good;
        b[hdr + 7] |= 0x80;
        CHECK(error_offset(b, [](const std::string&) {}) == hdr + 7);
    }
    SUBCASE("trailing bytes") {
        auto b = good;
        b.push_back(0);
        CHECK(error_offset(b, [](const std::string& m) { CHECK(m.find("trailing") != std::string::npos); }) ==
              good.size());
    }
    SUBCASE("record violating its invariants") {
        auto b = good;
        b[hdr + 7] &= ~0x4u;  // load without data
        CHECK(error_offset(b, [](const std::string& m) { CHECK(m.find("invalid") != std::string::npos); }) == hdr);
    }
}

TEST_CASE("validate rejects inconsistent records") {
    auto ld = RetiredInstr::load(0x400, 5, 6, 0x1000, 1);
    CHECK_NOTHROW(validate(ld));
    ld.dst = 0;
    CHECK_THROWS_AS(validate(ld), std::invalid_argument);

    auto br = RetiredInstr::branch(0x400, BranchCond::Eq, 1, 2, true);
    br.taken.reset();
    CHECK_THROWS_AS(validate(br), std::invalid_argument);

    auto add = RetiredInstr::alu(0x400, AluOp::Add, 3, 1, 2);
    add.src2.reset();
    CHECK_THROWS_AS(validate(add), std::invalid_argument);

    auto st = RetiredInstr::store(0x400, 1, 2, 0x10);
    st.load_data = 3;
    CHECK_THROWS_AS(validate(st), std::invalid_argument);
}

TEST_CASE("file save and load") {
    Trace t{{"file", 3, 1}, {RetiredInstr::branch(0x400, BranchCond::Ne, 4, std::nullopt, true)}};
    const std::string path = "test_trace_roundtrip.bin";
    save_trace(t, path);
    CHECK(load_trace(path) == t);
    std::remove(path.c_str());
    CHECK_THROWS(load_trace("/nonexistent/dir/x.bin"));
}
