#include "ldbp/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "ldbp/rng.hpp"

namespace ldbp {

namespace {

// RISC-V ABI register numbers.
constexpr RegId kT1 = 6, kS10 = 26, kS11 = 27, kA0 = 10, kA1 = 11, kA3 = 13, kA4 = 14, kA5 = 15,
                kA6 = 16, kA7 = 17, kT5 = 30, kT6 = 31, kS1 = 9;

RetiredInstr li(Addr pc, RegId dst, std::int64_t value) {
    return RetiredInstr::alu(pc, AluOp::AddImm, dst, kZeroReg, std::nullopt, value);
}

Trace finish(std::string name, std::uint64_t seed, std::vector<RetiredInstr> instrs) {
    Trace t;
    t.header.kernel = std::move(name);
    t.header.seed = seed;
    t.header.count = instrs.size();
    t.instrs = std::move(instrs);
    return t;
}

void require_positive(std::uint64_t v, const char* what) {
    if (v == 0) throw std::invalid_argument(std::string(what) + " must be >= 1");
}

} // namespace

Trace gen_vec_scan(std::uint64_t n_elems, double taken_prob, std::uint64_t stride, std::uint64_t seed) {
    require_positive(n_elems, "n_elems");
    require_positive(stride, "stride");
    check_probability(taken_prob, "taken_prob");
    constexpr Addr kBase = 0x1000000;
    SplitMix64 rng(seed);
    std::vector<RetiredInstr> out;
    out.reserve(4 * n_elems + 1);
    out.push_back(li(0x103fc, kA5, static_cast<std::int64_t>(kBase - stride)));
    for (std::uint64_t i = 0; i < n_elems; ++i) {
        const std::int64_t data = rng.bernoulli(taken_prob) ? 1 : 0;
        out.push_back(RetiredInstr::alu(0x10400, AluOp::AddImm, kA5, kA5, std::nullopt,
                                        static_cast<std::int64_t>(stride)));
        out.push_back(RetiredInstr::load(kernel_pc::kVecScanLoad, kA4, kA5, kBase + i * stride, data));
        out.push_back(RetiredInstr::branch(kernel_pc::kVecScanBranch, BranchCond::Ne, kA4, std::nullopt,
                                           data != 0));
        out.push_back(RetiredInstr::other(0x1040c));
    }
    return finish("vec_scan", seed, std::move(out));
}

Trace gen_bfs_parent(std::uint64_t n_nodes, double neg_prob, std::uint64_t seed) {
    require_positive(n_nodes, "n_nodes");
    check_probability(neg_prob, "neg_prob");
    constexpr Addr kGraph = 0x2800000;  // g.num_nodes() lives at +8
    constexpr Addr kParentPtr = 0x2800100;
    constexpr Addr kParent = 0x3000000;
    SplitMix64 rng(seed);
    std::vector<RetiredInstr> out;
    out.reserve(9 * n_nodes + 8);
    out.push_back(li(0x203f0, kA7, -1));
    out.push_back(li(0x203f4, kT5, static_cast<std::int64_t>(kGraph)));
    out.push_back(li(0x203f8, kA1, static_cast<std::int64_t>(kParentPtr)));
    const auto n = static_cast<std::int64_t>(n_nodes);
    for (std::uint64_t u = 0;; ++u) {
        const bool exit = u >= n_nodes;
        out.push_back(RetiredInstr::alu(0x20400, AluOp::AddImm, kA7, kA7, std::nullopt, 1));
        out.push_back(RetiredInstr::load(0x20404, kA5, kT5, kGraph + 8, n, 8));
        out.push_back(RetiredInstr::branch(kernel_pc::kBfsExitBranch, BranchCond::GeSigned, kA7, kA5, exit));
        if (exit) break;
        const std::int64_t parent =
            rng.bernoulli(neg_prob) ? -1 : static_cast<std::int64_t>(rng.uniform(n_nodes));
        out.push_back(RetiredInstr::alu(0x2040c, AluOp::SignExtendWord, kT6, kA7));
        out.push_back(RetiredInstr::alu(0x20410, AluOp::ShiftLeftImm, kT1, kA7, std::nullopt, 2));
        out.push_back(RetiredInstr::load(0x20414, kA5, kA1, kParentPtr, static_cast<std::int64_t>(kParent)));
        out.push_back(RetiredInstr::alu(0x20418, AluOp::Add, kT1, kT1, kA5));
        out.push_back(RetiredInstr::load(kernel_pc::kBfsParentLoad, kA5, kT1, kParent + 4 * u, parent));
        out.push_back(RetiredInstr::branch(kernel_pc::kBfsInnerBranch, BranchCond::GeSigned, kA5,
                                           std::nullopt, parent >= 0));
    }
    return finish("bfs_parent", seed, std::move(out));
}

namespace {

constexpr Addr kHmmerA = 0x4000000, kHmmerB = 0x4400000, kHmmerC = 0x4800000, kHmmerD = 0x4c00000,
               kHmmerE = 0x5000000;

void emit_hmmer_iteration(std::vector<RetiredInstr>& out, std::uint64_t i, const Hmmer4Values& v) {
    const Addr off = 4 * i;
    const auto imm = [](Addr base) { return static_cast<std::int64_t>(base); };
    out.push_back(RetiredInstr::load(0x30400, kS11, kS1, kHmmerA + off, v.a, imm(kHmmerA)));
    out.push_back(RetiredInstr::load(0x30404, kA3, kS1, kHmmerB + off, v.b, imm(kHmmerB)));
    out.push_back(RetiredInstr::alu(0x30408, AluOp::Add, kA3, kS11, kA3));
    out.push_back(RetiredInstr::store(0x3040c, kA3, kS1, kHmmerC + off, imm(kHmmerC)));
    out.push_back(RetiredInstr::load(0x30410, kS10, kS1, kHmmerD + off, v.c, imm(kHmmerD)));
    out.push_back(RetiredInstr::load(0x30414, kS11, kS1, kHmmerE + off, v.d, imm(kHmmerE)));
    out.push_back(RetiredInstr::alu(0x30418, AluOp::Add, kS11, kS10, kS11));
    const std::int64_t lhs = apply_alu(AluOp::Add, v.a, v.b, 0);
    const std::int64_t rhs = apply_alu(AluOp::Add, v.c, v.d, 0);
    out.push_back(RetiredInstr::branch(kernel_pc::kHmmerBranch, BranchCond::GeSigned, kA3, kS11, lhs >= rhs));
    out.push_back(RetiredInstr::alu(0x30420, AluOp::AddImm, kS1, kS1, std::nullopt, 4));
    out.push_back(RetiredInstr::other(0x30424));
}

} // namespace

Trace gen_hmmer4(std::uint64_t n_iters, std::uint64_t seed) {
    require_positive(n_iters, "n_iters");
    SplitMix64 rng(seed);
    std::vector<RetiredInstr> out;
    out.reserve(10 * n_iters + 1);
    out.push_back(li(0x303fc, kS1, 0));
    for (std::uint64_t i = 0; i < n_iters; ++i) {
        Hmmer4Values v{};
        v.a = static_cast<std::int64_t>(rng.uniform(1u << 16));
        v.b = static_cast<std::int64_t>(rng.uniform(1u << 16));
        v.c = static_cast<std::int64_t>(rng.uniform(1u << 16));
        v.d = static_cast<std::int64_t>(rng.uniform(1u << 16));
        emit_hmmer_iteration(out, i, v);
    }
    return finish("hmmer4", seed, std::move(out));
}

Trace gen_hmmer4_values(const std::vector<Hmmer4Values>& iterations) {
    if (iterations.empty()) throw std::invalid_argument("n_iters must be >= 1");
    std::vector<RetiredInstr> out;
    out.push_back(li(0x303fc, kS1, 0));
    for (std::uint64_t i = 0; i < iterations.size(); ++i) emit_hmmer_iteration(out, i, iterations[i]);
    return finish("hmmer4", 0, std::move(out));
}

Trace gen_load_load(std::uint64_t n_iters, std::uint64_t seed, std::uint64_t index_range) {
    require_positive(n_iters, "n_iters");
    require_positive(index_range, "index_range");
    constexpr Addr kDonor = 0x6000000;
    constexpr Addr kTable = 0x7000000;
    SplitMix64 rng(seed);
    std::vector<RetiredInstr> out;
    out.reserve(7 * n_iters + 2);
    out.push_back(li(0x403f8, kA4, static_cast<std::int64_t>(kDonor)));
    out.push_back(li(0x403fc, kA0, static_cast<std::int64_t>(kTable)));
    for (std::uint64_t i = 0; i < n_iters; ++i) {
        const auto idx = static_cast<std::int64_t>(rng.uniform(index_range));
        // table[idx] is a fixed function of idx: equal to idx half the time.
        const std::int64_t value = (hash_key(seed, static_cast<std::uint64_t>(idx)) & 1) ? idx : idx + 1;
        out.push_back(RetiredInstr::load(kernel_pc::kLoadLoadDonor, kA6, kA4, kDonor + 4 * i, idx));
        out.push_back(RetiredInstr::alu(0x40404, AluOp::ShiftLeftImm, kA5, kA6, std::nullopt, 2));
        out.push_back(RetiredInstr::alu(0x40408, AluOp::Add, kA5, kA5, kA0));
        out.push_back(RetiredInstr::load(kernel_pc::kLoadLoadRecipient, kA5, kA5,
                                         kTable + 4 * static_cast<Addr>(idx), value));
        out.push_back(RetiredInstr::branch(kernel_pc::kLoadLoadBranch, BranchCond::Eq, kA6, kA5, value == idx));
        out.push_back(RetiredInstr::alu(0x40414, AluOp::AddImm, kA4, kA4, std::nullopt, 4));
        out.push_back(RetiredInstr::other(0x40418));
    }
    return finish("load_load", seed, std::move(out));
}

bool is_known_kernel(std::string_view name) {
    return std::find(std::begin(kKernelNames), std::end(kKernelNames), name) != std::end(kKernelNames);
}

Trace make_kernel(std::string_view name, const KernelParams& p) {
    if (name == "vec_scan") return gen_vec_scan(p.n, p.p, p.stride, p.seed);
    if (name == "bfs_parent") return gen_bfs_parent(p.n, p.neg_prob, p.seed);
    if (name == "hmmer4") return gen_hmmer4(p.n, p.seed);
    if (name == "load_load") return gen_load_load(p.n, p.seed, p.index_range);
    throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

namespace {

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
    return out;
}

double parse_double(std::string_view key, std::string_view v) {
    try {
        std::size_t used = 0;
        const std::string s(v);
        const double d = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number for " + std::string(key) + ": '" + std::string(v) + "'");
    }
}

} // namespace

KernelSpec parse_kernel_spec(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string_view name = spec.substr(0, colon);
    if (!is_known_kernel(name)) throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
    KernelParams p;
    if (colon != std::string_view::npos) {
        std::string_view rest = spec.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view kv = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            const auto eq = kv.find('=');
            if (eq == std::string_view::npos)
                throw std::invalid_argument("expected key=value in kernel spec, got '" + std::string(kv) + "'");
            const auto key = kv.substr(0, eq);
            const auto val = kv.substr(eq + 1);
            if (key == "n") p.n = parse_u64(key, val);
            else if (key == "p") p.p = parse_double(key, val);
            else if (key == "stride") p.stride = parse_u64(key, val);
            else if (key == "seed") p.seed = parse_u64(key, val);
            else if (key == "neg_prob") p.neg_prob = parse_double(key, val);
            else if (key == "index_range") p.index_range = parse_u64(key, val);
            else throw std::invalid_argument("unknown kernel parameter '" + std::string(key) + "'");
        }
    }
    return {std::string(name), p};
}

Trace make_kernel_from_spec(std::string_view spec) {
    const auto k = parse_kernel_spec(spec);
    return make_kernel(k.name, k.params);
}

double taken_fraction(const Trace& trace, Addr pc) {
    std::uint64_t n = 0, taken = 0;
    for (const auto& in : trace.instrs) {
        if (in.kind != InstrKind::CondBranch || in.pc != pc) continue;
        ++n;
        taken += *in.taken ? 1 : 0;
    }
    return n == 0 ? 0.0 : static_cast<double>(taken) / static_cast<double>(n);
}

} // namespace ldbp
