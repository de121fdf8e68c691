#include "ldbp/slice.hpp"

#include <sstream>
#include <stdexcept>

namespace ldbp {

SliceOp SliceOp::alu(AluOp op, std::int64_t imm) {
    SliceOp s;
    s.op = static_cast<SliceOpcode>(static_cast<std::uint8_t>(op));
    s.imm = imm;
    return s;
}

bool is_alu(SliceOpcode op) { return op != SliceOpcode::LoadSlot && op != SliceOpcode::Zero; }

std::int64_t evaluate_operand(std::span<const SliceOp> ops, std::span<const std::int64_t> load_values) {
    if (ops.empty()) return 0;
    // Snippets are tiny; a fixed stack keeps this allocation-free.
    std::int64_t stack[64];
    std::size_t sp = 0;
    auto pop = [&]() {
        if (sp == 0) throw std::logic_error("slice operand stack underflow");
        return stack[--sp];
    };
    for (const auto& op : ops) {
        if (sp >= std::size(stack)) throw std::logic_error("slice operand stack overflow");
        switch (op.op) {
        case SliceOpcode::LoadSlot:
            if (op.slot >= load_values.size()) throw std::logic_error("slice load slot out of range");
            stack[sp++] = load_values[op.slot];
            break;
        case SliceOpcode::Zero: stack[sp++] = 0; break;
        default: {
            const auto alu = static_cast<AluOp>(static_cast<std::uint8_t>(op.op));
            std::int64_t rhs = 0;
            if (!is_unary(alu)) rhs = pop();
            const std::int64_t lhs = pop();
            stack[sp++] = apply_alu(alu, lhs, rhs, op.imm);
        }
        }
    }
    if (sp != 1) throw std::logic_error("slice operand leaves " + std::to_string(sp) + " values");
    return stack[0];
}

bool ChainSlice::evaluate(std::span<const std::int64_t> load_values) const {
    return eval_branch(cond, evaluate_operand(src1_ops, load_values), evaluate_operand(src2_ops, load_values));
}

namespace {

void describe_ops(std::ostream& os, const std::vector<SliceOp>& ops) {
    os << '[';
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i) os << ' ';
        const auto& op = ops[i];
        if (op.op == SliceOpcode::LoadSlot) os << 'L' << op.slot;
        else if (op.op == SliceOpcode::Zero) os << "x0";
        else os << to_string(static_cast<AluOp>(static_cast<std::uint8_t>(op.op)));
    }
    os << ']';
}

} // namespace

std::string describe(const ChainSlice& s) {
    std::ostringstream os;
    os << to_string(s.cond) << ' ';
    describe_ops(os, s.src1_ops);
    os << ' ';
    describe_ops(os, s.src2_ops);
    os << " loads=" << s.n_loads << " alu=" << s.n_alu_ops;
    return os.str();
}

} // namespace ldbp
