#include <doctest.h>

#include <cmath>
#include <set>

#include "ldbp/kernels.hpp"
#include "oracles.hpp"

using namespace ldbp;
using namespace ldbp::kernel_pc;

namespace {

std::uint64_t count_pc(const Trace& t, Addr pc) {
    std::uint64_t n = 0;
    for (const auto& in : t.instrs) n += in.pc == pc;
    return n;
}

void self_consistent(const Trace& t) {
    auto r = oracle::interpret(t.instrs);
    INFO(t.header.kernel << ": " << r.message << " at " << r.first_error.value_or(0));
    CHECK_FALSE(r.first_error.has_value());
    CHECK(r.checked_branches > 0);
    for (const auto& in : t.instrs) CHECK_NOTHROW(validate(in));
}

} // namespace

TEST_CASE("vec_scan shape and tallies") {
    auto t = gen_vec_scan(1000, 0.5, 4, 42);
    CHECK(t.header.kernel == "vec_scan");
    CHECK(t.header.seed == 42);
    CHECK(t.header.count == t.instrs.size());
    CHECK(count_pc(t, kVecScanBranch) == 1000);
    CHECK(count_pc(t, kVecScanLoad) == 1000);
    self_consistent(t);

    // loads walk a constant stride
    std::vector<Addr> addrs;
    for (const auto& in : t.instrs)
        if (in.pc == kVecScanLoad) addrs.push_back(*in.load_addr);
    for (std::size_t i = 1; i < addrs.size(); ++i) CHECK(addrs[i] - addrs[i - 1] == 4);

    auto big = gen_vec_scan(100000, 0.3, 8, 1);
    CHECK(std::abs(taken_fraction(big, kVecScanBranch) - 0.3) < 0.01);
    CHECK(taken_fraction(gen_vec_scan(500, 0.0, 4, 3), kVecScanBranch) == 0.0);
    CHECK(taken_fraction(gen_vec_scan(500, 1.0, 4, 3), kVecScanBranch) == 1.0);
}

TEST_CASE("generators are pure functions of their arguments") {
    CHECK(gen_vec_scan(300, 0.5, 4, 9) == gen_vec_scan(300, 0.5, 4, 9));
    CHECK_FALSE(gen_vec_scan(300, 0.5, 4, 9) == gen_vec_scan(300, 0.5, 4, 10));
    CHECK(gen_bfs_parent(300, 0.5, 9) == gen_bfs_parent(300, 0.5, 9));
    CHECK(gen_hmmer4(300, 9) == gen_hmmer4(300, 9));
    CHECK(gen_load_load(300, 9) == gen_load_load(300, 9));
}

TEST_CASE("bfs_parent") {
    auto t = gen_bfs_parent(2000, 0.25, 5);
    self_consistent(t);
    CHECK(count_pc(t, kBfsInnerBranch) == 2000);
    CHECK(count_pc(t, kBfsParentLoad) == 2000);
    // one exit-check per iteration plus the final failing check
    CHECK(count_pc(t, kBfsExitBranch) == 2001);
    auto big = gen_bfs_parent(50000, 0.25, 5);
    // inner branch is taken when parent[u] >= 0, i.e. with probability 1 - neg_prob
    CHECK(std::abs(taken_fraction(big, kBfsInnerBranch) - 0.75) < 0.01);
}

TEST_CASE("hmmer4 operands") {
    auto t = gen_hmmer4(2000, 5);
    self_consistent(t);
    CHECK(count_pc(t, kHmmerBranch) == 2000);
    std::uint64_t loads = 0, stores = 0;
    for (const auto& in : t.instrs) {
        loads += in.kind == InstrKind::Load;
        stores += in.kind == InstrKind::Store;
    }
    CHECK(loads == 4 * 2000);
    CHECK(stores == 2000);

    // a + b >= c + d with explicit values
    auto v = gen_hmmer4_values({{1, 2, 3, 0}, {0, 0, 1, 0}, {-5, 5, 0, 0}});
    std::vector<bool> outcomes;
    for (const auto& in : v.instrs)
        if (in.pc == kHmmerBranch) outcomes.push_back(*in.taken);
    CHECK(outcomes == std::vector<bool>{true, false, true});
    self_consistent(v);
}

TEST_CASE("load_load") {
    auto t = gen_load_load(3000, 11);
    self_consistent(t);
    std::set<Addr> recipient_addrs;
    for (const auto& in : t.instrs)
        if (in.pc == kLoadLoadRecipient) recipient_addrs.insert(*in.load_addr);
    CHECK(recipient_addrs.size() > 1000);  // data-dependent addresses

    auto degenerate = gen_load_load(100, 11, 1);
    self_consistent(degenerate);
    recipient_addrs.clear();
    for (const auto& in : degenerate.instrs)
        if (in.pc == kLoadLoadRecipient) recipient_addrs.insert(*in.load_addr);
    CHECK(recipient_addrs.size() == 1);
}

TEST_CASE("kernel specs") {
    CHECK(make_kernel_from_spec("vec_scan:n=100,p=0.5,seed=42") == gen_vec_scan(100, 0.5, 4, 42));
    CHECK(make_kernel_from_spec("hmmer4:n=10") == gen_hmmer4(10, 1));
    auto k = parse_kernel_spec("bfs_parent:neg_prob=0.1,seed=3");
    CHECK(k.name == "bfs_parent");
    CHECK(k.params.neg_prob == 0.1);
    CHECK(k.params.seed == 3);
    CHECK_THROWS_AS(make_kernel_from_spec("nope:n=1"), std::invalid_argument);
    CHECK_THROWS_AS(make_kernel_from_spec("vec_scan:n=abc"), std::invalid_argument);
    CHECK_THROWS_AS(make_kernel_from_spec("vec_scan:bogus=1"), std::invalid_argument);
    CHECK_THROWS_AS(make_kernel_from_spec("vec_scan:p=1.5"), std::invalid_argument);
    CHECK_THROWS_AS(make_kernel_from_spec("vec_scan:n=0"), std::invalid_argument);
}
