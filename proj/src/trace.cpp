#include "ldbp/trace.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace ldbp {

std::string_view to_string(InstrKind k) {
    switch (k) {
    case InstrKind::Load: return "load";
    case InstrKind::Store: return "store";
    case InstrKind::SimpleAlu: return "alu";
    case InstrKind::ComplexAlu: return "complex_alu";
    case InstrKind::CondBranch: return "cond_branch";
    case InstrKind::Other: return "other";
    }
    return "?";
}

std::string_view to_string(AluOp op) {
    switch (op) {
    case AluOp::Add: return "add";
    case AluOp::Sub: return "sub";
    case AluOp::And: return "and";
    case AluOp::Or: return "or";
    case AluOp::Xor: return "xor";
    case AluOp::ShiftLeftImm: return "slli";
    case AluOp::SignExtendWord: return "sext.w";
    case AluOp::AddImm: return "addi";
    }
    return "?";
}

std::string_view to_string(BranchCond c) {
    switch (c) {
    case BranchCond::Eq: return "eq";
    case BranchCond::Ne: return "ne";
    case BranchCond::LtSigned: return "lt";
    case BranchCond::GeSigned: return "ge";
    case BranchCond::LtUnsigned: return "ltu";
    case BranchCond::GeUnsigned: return "geu";
    }
    return "?";
}

std::int64_t apply_alu(AluOp op, std::int64_t a, std::int64_t b, std::int64_t imm) {
    const auto ua = static_cast<std::uint64_t>(a);
    const auto ub = static_cast<std::uint64_t>(b);
    switch (op) {
    case AluOp::Add: return static_cast<std::int64_t>(ua + ub);
    case AluOp::Sub: return static_cast<std::int64_t>(ua - ub);
    case AluOp::And: return a & b;
    case AluOp::Or: return a | b;
    case AluOp::Xor: return a ^ b;
    case AluOp::ShiftLeftImm: return static_cast<std::int64_t>(ua << (imm & 63));
    case AluOp::SignExtendWord: return static_cast<std::int32_t>(static_cast<std::uint32_t>(ua));
    case AluOp::AddImm: return static_cast<std::int64_t>(ua + static_cast<std::uint64_t>(imm));
    }
    return 0;
}

bool eval_branch(BranchCond c, std::int64_t a, std::int64_t b) {
    switch (c) {
    case BranchCond::Eq: return a == b;
    case BranchCond::Ne: return a != b;
    case BranchCond::LtSigned: return a < b;
    case BranchCond::GeSigned: return a >= b;
    case BranchCond::LtUnsigned: return static_cast<std::uint64_t>(a) < static_cast<std::uint64_t>(b);
    case BranchCond::GeUnsigned: return static_cast<std::uint64_t>(a) >= static_cast<std::uint64_t>(b);
    }
    return false;
}

RetiredInstr RetiredInstr::load(Addr pc, RegId dst, RegId base, Addr addr, std::int64_t data,
                               std::int64_t imm) {
    RetiredInstr r;
    r.pc = pc;
    r.kind = InstrKind::Load;
    r.dst = dst;
    r.src1 = base;
    r.imm = imm;
    r.load_addr = addr;
    r.load_data = data;
    return r;
}

RetiredInstr RetiredInstr::store(Addr pc, RegId value, RegId base, Addr addr, std::int64_t imm) {
    RetiredInstr r;
    r.pc = pc;
    r.kind = InstrKind::Store;
    r.src1 = base;
    r.src2 = value;
    r.imm = imm;
    r.load_addr = addr;
    return r;
}

RetiredInstr RetiredInstr::alu(Addr pc, AluOp op, RegId dst, RegId src1, std::optional<RegId> src2,
                               std::optional<std::int64_t> imm) {
    RetiredInstr r;
    r.pc = pc;
    r.kind = InstrKind::SimpleAlu;
    r.alu_op = op;
    r.dst = dst;
    r.src1 = src1;
    r.src2 = src2;
    r.imm = imm;
    return r;
}

RetiredInstr RetiredInstr::complex_alu(Addr pc, RegId dst, RegId src1, std::optional<RegId> src2) {
    RetiredInstr r;
    r.pc = pc;
    r.kind = InstrKind::ComplexAlu;
    r.dst = dst;
    r.src1 = src1;
    r.src2 = src2;
    return r;
}

RetiredInstr RetiredInstr::branch(Addr pc, BranchCond cond, RegId src1, std::optional<RegId> src2,
                                  bool taken) {
    RetiredInstr r;
    r.pc = pc;
    r.kind = InstrKind::CondBranch;
    r.br_cond = cond;
    r.src1 = src1;
    r.src2 = src2;
    r.taken = taken;
    return r;
}

RetiredInstr RetiredInstr::other(Addr pc, std::optional<RegId> dst) {
    RetiredInstr r;
    r.pc = pc;
    r.kind = InstrKind::Other;
    r.dst = dst;
    return r;
}

void validate(const RetiredInstr& in) {
    auto reg_ok = [](const std::optional<RegId>& r) { return !r || *r < kNumRegs; };
    if (!reg_ok(in.dst) || !reg_ok(in.src1) || !reg_ok(in.src2))
        throw std::invalid_argument("register id out of range");
    if (in.dst && *in.dst == kZeroReg)
        throw std::invalid_argument("register 0 cannot be a destination");
    switch (in.kind) {
    case InstrKind::Load:
        if (!in.load_addr || !in.load_data || !in.dst)
            throw std::invalid_argument("load requires address, data and destination");
        break;
    case InstrKind::Store:
        if (!in.load_addr || in.load_data || in.dst)
            throw std::invalid_argument("store requires an address, no data and no destination");
        break;
    case InstrKind::CondBranch:
        if (!in.taken || !in.br_cond || in.dst)
            throw std::invalid_argument("branch requires outcome and condition, no destination");
        break;
    case InstrKind::SimpleAlu:
        if (!in.alu_op || !in.dst || !in.src1)
            throw std::invalid_argument("simple ALU op requires opcode, destination and src1");
        if (!is_unary(*in.alu_op) && !in.src2)
            throw std::invalid_argument("binary ALU op requires src2");
        if ((*in.alu_op == AluOp::AddImm || *in.alu_op == AluOp::ShiftLeftImm) && !in.imm)
            throw std::invalid_argument("immediate ALU op requires imm");
        break;
    case InstrKind::ComplexAlu:
    case InstrKind::Other:
        break;
    }
    if (in.kind != InstrKind::SimpleAlu && in.alu_op)
        throw std::invalid_argument("alu_op only valid on simple ALU records");
    if (in.kind != InstrKind::CondBranch && (in.br_cond || in.taken))
        throw std::invalid_argument("branch fields only valid on branch records");
    if (in.kind != InstrKind::Load && in.load_data)
        throw std::invalid_argument("load_data only valid on load records");
    if (in.kind != InstrKind::Load && in.kind != InstrKind::Store && in.load_addr)
        throw std::invalid_argument("load_addr only valid on memory records");
}

TraceFormatError::TraceFormatError(const std::string& what, std::uint64_t offset)
    : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n, std::uint64_t h) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

void put_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::uint8_t opt_byte(const std::optional<std::uint8_t>& v) { return v ? *v : kAbsent; }

template <class E>
std::uint8_t opt_enum(const std::optional<E>& v) {
    return v ? static_cast<std::uint8_t>(*v) : kAbsent;
}

std::array<std::uint8_t, kRecordBytes> encode_record(const RetiredInstr& in) {
    std::array<std::uint8_t, kRecordBytes> b{};
    b[0] = static_cast<std::uint8_t>(in.kind);
    b[1] = opt_byte(in.dst);
    b[2] = opt_byte(in.src1);
    b[3] = opt_byte(in.src2);
    b[4] = opt_enum(in.alu_op);
    b[5] = opt_enum(in.br_cond);
    b[6] = in.taken ? static_cast<std::uint8_t>(*in.taken) : kAbsent;
    b[7] = static_cast<std::uint8_t>((in.imm ? 1 : 0) | (in.load_addr ? 2 : 0) | (in.load_data ? 4 : 0));
    put_u64(&b[8], in.pc);
    put_u64(&b[16], static_cast<std::uint64_t>(in.imm.value_or(0)));
    put_u64(&b[24], in.load_addr.value_or(0));
    put_u64(&b[32], static_cast<std::uint64_t>(in.load_data.value_or(0)));
    return b;
}

RetiredInstr decode_record(const std::uint8_t* b, std::uint64_t offset) {
    RetiredInstr in;
    if (b[0] > static_cast<std::uint8_t>(InstrKind::Other))
        throw TraceFormatError("unknown instruction kind code " + std::to_string(b[0]), offset);
    in.kind = static_cast<InstrKind>(b[0]);
    auto reg = [&](std::uint8_t v, std::uint64_t at) -> std::optional<RegId> {
        if (v == kAbsent) return std::nullopt;
        if (v >= kNumRegs) throw TraceFormatError("register id " + std::to_string(v) + " out of range", at);
        return v;
    };
    in.dst = reg(b[1], offset + 1);
    in.src1 = reg(b[2], offset + 2);
    in.src2 = reg(b[3], offset + 3);
    if (b[4] != kAbsent) {
        if (b[4] > static_cast<std::uint8_t>(AluOp::AddImm))
            throw TraceFormatError("unknown ALU op code " + std::to_string(b[4]), offset + 4);
        in.alu_op = static_cast<AluOp>(b[4]);
    }
    if (b[5] != kAbsent) {
        if (b[5] > static_cast<std::uint8_t>(BranchCond::GeUnsigned))
            throw TraceFormatError("unknown branch condition code " + std::to_string(b[5]), offset + 5);
        in.br_cond = static_cast<BranchCond>(b[5]);
    }
    if (b[6] != kAbsent) {
        if (b[6] > 1) throw TraceFormatError("bad taken byte", offset + 6);
        in.taken = b[6] == 1;
    }
    if (b[7] & ~0x7u) throw TraceFormatError("reserved flag bits set", offset + 7);
    in.pc = get_u64(&b[8]);
    if (b[7] & 1) in.imm = static_cast<std::int64_t>(get_u64(&b[16]));
    if (b[7] & 2) in.load_addr = get_u64(&b[24]);
    if (b[7] & 4) in.load_data = static_cast<std::int64_t>(get_u64(&b[32]));
    try {
        validate(in);
    } catch (const std::invalid_argument& e) {
        throw TraceFormatError(std::string("invalid record: ") + e.what(), offset);
    }
    return in;
}

} // namespace

void write_trace(const TraceHeader& header, const std::vector<RetiredInstr>& instrs, std::ostream& out) {
    if (header.count != instrs.size())
        throw std::invalid_argument("trace header count does not match record count");
    if (header.kernel.size() > 0xFFFF) throw std::invalid_argument("kernel name too long");
    out.write(kTraceMagic, sizeof kTraceMagic);
    std::uint8_t len[2] = {static_cast<std::uint8_t>(header.kernel.size()),
                           static_cast<std::uint8_t>(header.kernel.size() >> 8)};
    out.write(reinterpret_cast<const char*>(len), 2);
    out.write(header.kernel.data(), static_cast<std::streamsize>(header.kernel.size()));
    std::uint8_t tail[16];
    put_u64(tail, header.seed);
    put_u64(tail + 8, header.count);
    out.write(reinterpret_cast<const char*>(tail), 16);
    for (const auto& in : instrs) {
        validate(in);
        const auto rec = encode_record(in);
        out.write(reinterpret_cast<const char*>(rec.data()), kRecordBytes);
    }
    if (!out) throw std::runtime_error("trace write failed");
}

Trace read_trace(std::istream& in) {
    std::uint64_t offset = 0;
    auto read_exact = [&](void* dst, std::size_t n, const char* what) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw TraceFormatError(std::string("truncated ") + what, offset + static_cast<std::uint64_t>(in.gcount()));
        offset += n;
    };
    Trace t;
    char magic[8];
    read_exact(magic, 8, "magic");
    if (std::memcmp(magic, kTraceMagic, 8) != 0) throw TraceFormatError("bad magic", 0);
    std::uint8_t len[2];
    read_exact(len, 2, "header");
    t.header.kernel.resize(len[0] | (len[1] << 8));
    if (!t.header.kernel.empty()) read_exact(t.header.kernel.data(), t.header.kernel.size(), "kernel name");
    std::uint8_t tail[16];
    read_exact(tail, 16, "header");
    t.header.seed = get_u64(tail);
    t.header.count = get_u64(tail + 8);
    // The count is untrusted; grow as records actually arrive.
    t.instrs.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(t.header.count, 1u << 20)));
    std::array<std::uint8_t, kRecordBytes> rec{};
    for (std::uint64_t i = 0; i < t.header.count; ++i) {
        const std::uint64_t at = offset;
        read_exact(rec.data(), kRecordBytes, "record");
        t.instrs.push_back(decode_record(rec.data(), at));
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw TraceFormatError("trailing bytes after last record", offset);
    return t;
}

std::vector<std::uint8_t> encode_trace(const Trace& trace) {
    std::ostringstream os(std::ios::binary);
    write_trace(trace.header, trace.instrs, os);
    const std::string s = std::move(os).str();
    return {s.begin(), s.end()};
}

Trace decode_trace(const std::vector<std::uint8_t>& bytes) {
    std::istringstream is(std::string(bytes.begin(), bytes.end()), std::ios::binary);
    return read_trace(is);
}

void save_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_trace(trace.header, trace.instrs, out);
}

Trace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace " + path);
    return read_trace(in);
}

} // namespace ldbp
