#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ldbp {

using Addr = std::uint64_t;
using RegId = std::uint8_t;

inline constexpr RegId kNumRegs = 32;
inline constexpr RegId kZeroReg = 0;

enum class InstrKind : std::uint8_t { Load = 0, Store, SimpleAlu, ComplexAlu, CondBranch, Other };

enum class AluOp : std::uint8_t {
    Add = 0,
    Sub,
    And,
    Or,
    Xor,
    ShiftLeftImm,
    SignExtendWord,
    AddImm,
};

enum class BranchCond : std::uint8_t { Eq = 0, Ne, LtSigned, GeSigned, LtUnsigned, GeUnsigned };

std::string_view to_string(InstrKind k);
std::string_view to_string(AluOp op);
std::string_view to_string(BranchCond c);

// Unary ops read src1 only; the rest read src1 and src2.
constexpr bool is_unary(AluOp op) {
    return op == AluOp::ShiftLeftImm || op == AluOp::SignExtendWord || op == AluOp::AddImm;
}

// Shared ALU/branch semantics (wrapping 64-bit arithmetic).
std::int64_t apply_alu(AluOp op, std::int64_t a, std::int64_t b, std::int64_t imm);
bool eval_branch(BranchCond c, std::int64_t a, std::int64_t b);

/// One retired instruction of the correct path.
struct RetiredInstr {
    Addr pc = 0;
    InstrKind kind = InstrKind::Other;
    std::optional<RegId> dst;
    std::optional<RegId> src1;
    std::optional<RegId> src2;
    std::optional<std::int64_t> imm;
    std::optional<AluOp> alu_op;
    std::optional<Addr> load_addr;
    std::optional<std::int64_t> load_data;
    std::optional<BranchCond> br_cond;
    std::optional<bool> taken;

    bool operator==(const RetiredInstr&) const = default;

    static RetiredInstr load(Addr pc, RegId dst, RegId base, Addr addr, std::int64_t data,
                             std::int64_t imm = 0);
    static RetiredInstr store(Addr pc, RegId value, RegId base, Addr addr, std::int64_t imm = 0);
    static RetiredInstr alu(Addr pc, AluOp op, RegId dst, RegId src1,
                            std::optional<RegId> src2 = std::nullopt,
                            std::optional<std::int64_t> imm = std::nullopt);
    static RetiredInstr complex_alu(Addr pc, RegId dst, RegId src1, std::optional<RegId> src2);
    static RetiredInstr branch(Addr pc, BranchCond cond, RegId src1, std::optional<RegId> src2,
                               bool taken);
    static RetiredInstr other(Addr pc, std::optional<RegId> dst = std::nullopt);
};

/// Throws std::invalid_argument naming the violated record invariant.
void validate(const RetiredInstr& in);

struct TraceHeader {
    std::string kernel;
    std::uint64_t seed = 0;
    std::uint64_t count = 0;

    bool operator==(const TraceHeader&) const = default;
};

struct Trace {
    TraceHeader header;
    std::vector<RetiredInstr> instrs;

    bool operator==(const Trace&) const = default;
};

class TraceFormatError : public std::runtime_error {
public:
    TraceFormatError(const std::string& what, std::uint64_t offset);
    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_;
};

// Binary trace layout, all integers little-endian:
//
//   header:  magic "LDBPTR1\0" (8 bytes)
//            u16 kernel name length, name bytes (no terminator)
//            u64 generator seed
//            u64 record count
//   record (40 bytes):
//            u8 kind, u8 dst, u8 src1, u8 src2, u8 alu_op, u8 br_cond,
//            u8 taken, u8 flags,
//            u64 pc, i64 imm, u64 addr, i64 data
//
// Absent single-byte fields are 0xFF. flags bit 0: imm present, bit 1: addr
// present, bit 2: data present. Absent wide fields are written as zero.
inline constexpr char kTraceMagic[8] = {'L', 'D', 'B', 'P', 'T', 'R', '1', '\0'};
inline constexpr std::size_t kRecordBytes = 40;
inline constexpr std::uint8_t kAbsent = 0xFF;

void write_trace(const TraceHeader& header, const std::vector<RetiredInstr>& instrs, std::ostream& out);
Trace read_trace(std::istream& in);

std::vector<std::uint8_t> encode_trace(const Trace& trace);
Trace decode_trace(const std::vector<std::uint8_t>& bytes);

void save_trace(const Trace& trace, const std::string& path);
Trace load_trace(const std::string& path);

/// FNV-1a over a byte range.
std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);

} // namespace ldbp
