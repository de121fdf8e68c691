#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ldbp/trace.hpp"

namespace ldbp {

// Synthetic kernels modelled on the load-dependent branches that dominate
// mispredictions in vector scans, graph traversal and matrix codes. Each
// generator is a pure function of its arguments.

// Fixed PCs of the interesting branches, so tests and reports can find them.
namespace kernel_pc {
inline constexpr Addr kVecScanBranch = 0x10408;
inline constexpr Addr kVecScanLoad = 0x10404;
inline constexpr Addr kBfsExitBranch = 0x20408;
inline constexpr Addr kBfsParentLoad = 0x2041c;
inline constexpr Addr kBfsInnerBranch = 0x20420;
inline constexpr Addr kHmmerBranch = 0x3041c;
inline constexpr Addr kLoadLoadDonor = 0x40400;
inline constexpr Addr kLoadLoadRecipient = 0x4040c;
inline constexpr Addr kLoadLoadBranch = 0x40410;
} // namespace kernel_pc

/// for (i) { addi a5,a5,stride; lw a4,0(a5); bnez a4; j loop }
/// data[i] ~ Bernoulli(taken_prob) over {0,1}.
Trace gen_vec_scan(std::uint64_t n_elems, double taken_prob, std::uint64_t stride, std::uint64_t seed);

/// The GAP bfs parent scan: a loop-bound check and an `if (parent[u] < 0)`
/// test on a strided array whose sign is Bernoulli(neg_prob).
Trace gen_bfs_parent(std::uint64_t n_nodes, double neg_prob, std::uint64_t seed);

/// hmmer-style `bge (a+b), (c+d)` over four strided arrays with a store in
/// the middle of the slice.
Trace gen_hmmer4(std::uint64_t n_iters, std::uint64_t seed);

/// Explicit operand values for a single hmmer4 iteration (a, b, c, d).
struct Hmmer4Values {
    std::int64_t a, b, c, d;
};
Trace gen_hmmer4_values(const std::vector<Hmmer4Values>& iterations);

/// cc-style load-load chain: a strided donor load yields an index used to
/// address the recipient load. index_range = 1 gives the degenerate case
/// where every index is 0 and the recipient address is constant.
Trace gen_load_load(std::uint64_t n_iters, std::uint64_t seed, std::uint64_t index_range = 1u << 16);

struct KernelParams {
    std::uint64_t n = 1000;
    double p = 0.5;
    std::uint64_t stride = 4;
    std::uint64_t seed = 1;
    double neg_prob = 0.5;
    std::uint64_t index_range = 1u << 16;
};

inline constexpr std::string_view kKernelNames[] = {"vec_scan", "bfs_parent", "hmmer4", "load_load"};

bool is_known_kernel(std::string_view name);

/// Throws std::invalid_argument for unknown kernels or bad parameters.
Trace make_kernel(std::string_view name, const KernelParams& params);

struct KernelSpec {
    std::string name;
    KernelParams params;
};

/// Parses "name:key=value,key=value" (keys: n, p, stride, seed, neg_prob,
/// index_range). Throws std::invalid_argument on unknown kernels or keys.
KernelSpec parse_kernel_spec(std::string_view spec);

/// Parses "name:key=value,key=value" (keys: n, p, stride, seed, neg_prob,
/// index_range) and generates the kernel.
Trace make_kernel_from_spec(std::string_view spec);

/// Fraction of conditional branches at `pc` that were taken.
double taken_fraction(const Trace& trace, Addr pc);

} // namespace ldbp
