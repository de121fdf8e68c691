#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldbp/trace.hpp"

namespace ldbp {

enum class SliceOpcode : std::uint8_t {
    Add,
    Sub,
    And,
    Or,
    Xor,
    ShiftLeftImm,
    SignExtendWord,
    AddImm,
    LoadSlot,  // push the value of load `slot`
    Zero,      // push the zero register
};

/// One snippet operation. Operand lists are postfix: the left operand's ops
/// come first, then the right operand's, then the operator.
struct SliceOp {
    SliceOpcode op = SliceOpcode::Zero;
    std::int64_t imm = 0;
    std::uint16_t slot = 0;

    bool operator==(const SliceOp&) const = default;

    static SliceOp load(std::uint16_t slot) { return {SliceOpcode::LoadSlot, 0, slot}; }
    static SliceOp zero() { return {SliceOpcode::Zero, 0, 0}; }
    static SliceOp alu(AluOp op, std::int64_t imm);
};

bool is_alu(SliceOpcode op);

/// Evaluates one operand's postfix list. An empty list is the constant 0
/// (a branch compared against the zero register). Throws std::logic_error
/// on a malformed list.
std::int64_t evaluate_operand(std::span<const SliceOp> ops, std::span<const std::int64_t> load_values);

/// Backward slice from a set of loads to a branch, one op list per branch
/// source operand.
struct ChainSlice {
    std::vector<SliceOp> src1_ops;
    std::vector<SliceOp> src2_ops;
    BranchCond cond = BranchCond::Ne;
    std::uint32_t n_loads = 0;
    std::uint32_t n_alu_ops = 0;

    bool operator==(const ChainSlice&) const = default;

    bool evaluate(std::span<const std::int64_t> load_values) const;
};

std::string describe(const ChainSlice& s);

} // namespace ldbp
