// Copyright 2026 The hpra-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// RV32IM subset used by the programming element: decode, encode, and a
// macro-cycle stepping function that runs against an abstract memory port.
// FENCE, ECALL, EBREAK and the CSR instructions are not part of the subset;
// system services are reached through memory-mapped SFRs instead.

#include <array>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hpra::core {

/// Macro-cycles from issue of DIV/DIVU/REM/REMU to its register write.
inline constexpr unsigned kDivLatency = 32;
inline constexpr unsigned kBranchPenalty = 2;
inline constexpr unsigned kLoadUsePenalty = 1;

enum class Op : std::uint8_t {
  Illegal,
  Lui, Auipc, Jal, Jalr,
  Beq, Bne, Blt, Bge, Bltu, Bgeu,
  Lb, Lh, Lw, Lbu, Lhu,
  Sb, Sh, Sw,
  Addi, Slti, Sltiu, Xori, Ori, Andi, Slli, Srli, Srai,
  Add, Sub, Sll, Slt, Sltu, Xor, Srl, Sra, Or, And,
  Mul, Mulh, Mulhsu, Mulhu, Div, Divu, Rem, Remu,
};

enum class OpClass : std::uint8_t {
  Illegal, Lui, Auipc, Jal, Jalr, Branch, Load, Store, OpImm, Op, MulDiv,
};

constexpr OpClass op_class(Op op) {
  switch (op) {
    case Op::Illegal: return OpClass::Illegal;
    case Op::Lui: return OpClass::Lui;
    case Op::Auipc: return OpClass::Auipc;
    case Op::Jal: return OpClass::Jal;
    case Op::Jalr: return OpClass::Jalr;
    case Op::Beq: case Op::Bne: case Op::Blt: case Op::Bge: case Op::Bltu:
    case Op::Bgeu:
      return OpClass::Branch;
    case Op::Lb: case Op::Lh: case Op::Lw: case Op::Lbu: case Op::Lhu:
      return OpClass::Load;
    case Op::Sb: case Op::Sh: case Op::Sw:
      return OpClass::Store;
    case Op::Addi: case Op::Slti: case Op::Sltiu: case Op::Xori: case Op::Ori:
    case Op::Andi: case Op::Slli: case Op::Srli: case Op::Srai:
      return OpClass::OpImm;
    case Op::Add: case Op::Sub: case Op::Sll: case Op::Slt: case Op::Sltu:
    case Op::Xor: case Op::Srl: case Op::Sra: case Op::Or: case Op::And:
      return OpClass::Op;
    default:
      return OpClass::MulDiv;
  }
}

constexpr bool is_division(Op op) {
  return op == Op::Div || op == Op::Divu || op == Op::Rem || op == Op::Remu;
}

constexpr std::string_view mnemonic(Op op) {
  constexpr std::array<std::string_view, 46> kNames = {
      "illegal", "lui", "auipc", "jal", "jalr", "beq", "bne", "blt", "bge",
      "bltu", "bgeu", "lb", "lh", "lw", "lbu", "lhu", "sb", "sh", "sw",
      "addi", "slti", "sltiu", "xori", "ori", "andi", "slli", "srli", "srai",
      "add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and",
      "mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu"};
  return kNames[static_cast<std::size_t>(op)];
}

/// A decoded instruction. `imm` is the sign-extended immediate for the
/// formats that carry one (for LUI/AUIPC it is the already shifted value).
struct Instruction {
  Op op = Op::Illegal;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::int32_t imm = 0;

  constexpr bool legal() const { return op != Op::Illegal; }
  constexpr OpClass cls() const { return op_class(op); }
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

namespace detail {

constexpr std::uint32_t bits(std::uint32_t w, unsigned hi, unsigned lo) {
  return (w >> lo) & ((1u << (hi - lo + 1)) - 1u);
}

constexpr std::int32_t sext(std::uint32_t v, unsigned width) {
  const std::uint32_t m = 1u << (width - 1);
  return static_cast<std::int32_t>((v ^ m) - m);
}

constexpr std::int32_t imm_i(std::uint32_t w) { return sext(w >> 20, 12); }
constexpr std::int32_t imm_s(std::uint32_t w) {
  return sext((bits(w, 31, 25) << 5) | bits(w, 11, 7), 12);
}
constexpr std::int32_t imm_b(std::uint32_t w) {
  return sext((bits(w, 31, 31) << 12) | (bits(w, 7, 7) << 11) |
                  (bits(w, 30, 25) << 5) | (bits(w, 11, 8) << 1),
              13);
}
constexpr std::int32_t imm_j(std::uint32_t w) {
  return sext((bits(w, 31, 31) << 20) | (bits(w, 19, 12) << 12) |
                  (bits(w, 20, 20) << 11) | (bits(w, 30, 21) << 1),
              21);
}

}  // namespace detail

/// Decodes one instruction word. Words outside the supported subset yield
/// an Instruction with op == Op::Illegal.
constexpr Instruction decode(std::uint32_t w) {
  using detail::bits;
  Instruction in;
  in.rd = static_cast<std::uint8_t>(bits(w, 11, 7));
  in.rs1 = static_cast<std::uint8_t>(bits(w, 19, 15));
  in.rs2 = static_cast<std::uint8_t>(bits(w, 24, 20));
  const std::uint32_t f3 = bits(w, 14, 12);
  const std::uint32_t f7 = bits(w, 31, 25);
  const auto illegal = [] { return Instruction{}; };

  switch (bits(w, 6, 0)) {
    case 0x37:
      in.op = Op::Lui;
      in.imm = static_cast<std::int32_t>(w & 0xFFFFF000u);
      in.rs1 = in.rs2 = 0;
      return in;
    case 0x17:
      in.op = Op::Auipc;
      in.imm = static_cast<std::int32_t>(w & 0xFFFFF000u);
      in.rs1 = in.rs2 = 0;
      return in;
    case 0x6F:
      in.op = Op::Jal;
      in.imm = detail::imm_j(w);
      in.rs1 = in.rs2 = 0;
      return in;
    case 0x67:
      if (f3 != 0) return illegal();
      in.op = Op::Jalr;
      in.imm = detail::imm_i(w);
      in.rs2 = 0;
      return in;
    case 0x63: {
      constexpr std::array<Op, 8> kBr = {Op::Beq, Op::Bne, Op::Illegal,
                                         Op::Illegal, Op::Blt, Op::Bge,
                                         Op::Bltu, Op::Bgeu};
      in.op = kBr[f3];
      if (!in.legal()) return illegal();
      in.imm = detail::imm_b(w);
      in.rd = 0;
      return in;
    }
    case 0x03: {
      constexpr std::array<Op, 8> kLd = {Op::Lb, Op::Lh, Op::Lw,
                                         Op::Illegal, Op::Lbu, Op::Lhu,
                                         Op::Illegal, Op::Illegal};
      in.op = kLd[f3];
      if (!in.legal()) return illegal();
      in.imm = detail::imm_i(w);
      in.rs2 = 0;
      return in;
    }
    case 0x23: {
      constexpr std::array<Op, 8> kSt = {Op::Sb, Op::Sh, Op::Sw, Op::Illegal,
                                         Op::Illegal, Op::Illegal,
                                         Op::Illegal, Op::Illegal};
      in.op = kSt[f3];
      if (!in.legal()) return illegal();
      in.imm = detail::imm_s(w);
      in.rd = 0;
      return in;
    }
    case 0x13: {
      in.rs2 = 0;
      switch (f3) {
        case 0: in.op = Op::Addi; break;
        case 2: in.op = Op::Slti; break;
        case 3: in.op = Op::Sltiu; break;
        case 4: in.op = Op::Xori; break;
        case 6: in.op = Op::Ori; break;
        case 7: in.op = Op::Andi; break;
        case 1:
          if (f7 != 0x00) return illegal();
          in.op = Op::Slli;
          in.imm = static_cast<std::int32_t>(bits(w, 24, 20));
          return in;
        case 5:
          if (f7 == 0x00) {
            in.op = Op::Srli;
          } else if (f7 == 0x20) {
            in.op = Op::Srai;
          } else {
            return illegal();
          }
          in.imm = static_cast<std::int32_t>(bits(w, 24, 20));
          return in;
      }
      in.imm = detail::imm_i(w);
      return in;
    }
    case 0x33: {
      if (f7 == 0x00) {
        constexpr std::array<Op, 8> kR = {Op::Add, Op::Sll, Op::Slt, Op::Sltu,
                                          Op::Xor, Op::Srl, Op::Or, Op::And};
        in.op = kR[f3];
      } else if (f7 == 0x20) {
        if (f3 == 0) {
          in.op = Op::Sub;
        } else if (f3 == 5) {
          in.op = Op::Sra;
        } else {
          return illegal();
        }
      } else if (f7 == 0x01) {
        constexpr std::array<Op, 8> kM = {Op::Mul, Op::Mulh, Op::Mulhsu,
                                          Op::Mulhu, Op::Div, Op::Divu,
                                          Op::Rem, Op::Remu};
        in.op = kM[f3];
      } else {
        return illegal();
      }
      return in;
    }
    default:
      return illegal();
  }
}

/// Re-encodes a legal instruction. encode(decode(w)) == w for every word in
/// the supported subset.
constexpr std::uint32_t encode(const Instruction& in) {
  const std::uint32_t rd = in.rd & 31u;
  const std::uint32_t rs1 = in.rs1 & 31u;
  const std::uint32_t rs2 = in.rs2 & 31u;
  const auto imm = static_cast<std::uint32_t>(in.imm);
  const auto r_type = [&](std::uint32_t f7, std::uint32_t f3) {
    return (f7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) |
           0x33u;
  };
  const auto i_type = [&](std::uint32_t f3, std::uint32_t opc) {
    return ((imm & 0xFFFu) << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opc;
  };
  const auto shift = [&](std::uint32_t f7, std::uint32_t f3) {
    return (f7 << 25) | ((imm & 31u) << 20) | (rs1 << 15) | (f3 << 12) |
           (rd << 7) | 0x13u;
  };
  const auto s_type = [&](std::uint32_t f3) {
    return (((imm >> 5) & 0x7Fu) << 25) | (rs2 << 20) | (rs1 << 15) |
           (f3 << 12) | ((imm & 31u) << 7) | 0x23u;
  };
  const auto b_type = [&](std::uint32_t f3) {
    return (((imm >> 12) & 1u) << 31) | (((imm >> 5) & 0x3Fu) << 25) |
           (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (((imm >> 1) & 0xFu) << 8) |
           (((imm >> 11) & 1u) << 7) | 0x63u;
  };

  switch (in.op) {
    case Op::Lui: return (imm & 0xFFFFF000u) | (rd << 7) | 0x37u;
    case Op::Auipc: return (imm & 0xFFFFF000u) | (rd << 7) | 0x17u;
    case Op::Jal:
      return (((imm >> 20) & 1u) << 31) | (((imm >> 1) & 0x3FFu) << 21) |
             (((imm >> 11) & 1u) << 20) | (((imm >> 12) & 0xFFu) << 12) |
             (rd << 7) | 0x6Fu;
    case Op::Jalr: return i_type(0, 0x67);
    case Op::Beq: return b_type(0);
    case Op::Bne: return b_type(1);
    case Op::Blt: return b_type(4);
    case Op::Bge: return b_type(5);
    case Op::Bltu: return b_type(6);
    case Op::Bgeu: return b_type(7);
    case Op::Lb: return i_type(0, 0x03);
    case Op::Lh: return i_type(1, 0x03);
    case Op::Lw: return i_type(2, 0x03);
    case Op::Lbu: return i_type(4, 0x03);
    case Op::Lhu: return i_type(5, 0x03);
    case Op::Sb: return s_type(0);
    case Op::Sh: return s_type(1);
    case Op::Sw: return s_type(2);
    case Op::Addi: return i_type(0, 0x13);
    case Op::Slti: return i_type(2, 0x13);
    case Op::Sltiu: return i_type(3, 0x13);
    case Op::Xori: return i_type(4, 0x13);
    case Op::Ori: return i_type(6, 0x13);
    case Op::Andi: return i_type(7, 0x13);
    case Op::Slli: return shift(0x00, 1);
    case Op::Srli: return shift(0x00, 5);
    case Op::Srai: return shift(0x20, 5);
    case Op::Add: return r_type(0x00, 0);
    case Op::Sub: return r_type(0x20, 0);
    case Op::Sll: return r_type(0x00, 1);
    case Op::Slt: return r_type(0x00, 2);
    case Op::Sltu: return r_type(0x00, 3);
    case Op::Xor: return r_type(0x00, 4);
    case Op::Srl: return r_type(0x00, 5);
    case Op::Sra: return r_type(0x20, 5);
    case Op::Or: return r_type(0x00, 6);
    case Op::And: return r_type(0x00, 7);
    case Op::Mul: return r_type(0x01, 0);
    case Op::Mulh: return r_type(0x01, 1);
    case Op::Mulhsu: return r_type(0x01, 2);
    case Op::Mulhu: return r_type(0x01, 3);
    case Op::Div: return r_type(0x01, 4);
    case Op::Divu: return r_type(0x01, 5);
    case Op::Rem: return r_type(0x01, 6);
    case Op::Remu: return r_type(0x01, 7);
    case Op::Illegal: break;
  }
  return 0;
}

/// Which registers an instruction reads; used by the baseline hazard model.
constexpr bool reads_rs1(Op op) {
  const OpClass c = op_class(op);
  return c != OpClass::Lui && c != OpClass::Auipc && c != OpClass::Jal &&
         c != OpClass::Illegal;
}
constexpr bool reads_rs2(Op op) {
  const OpClass c = op_class(op);
  return c == OpClass::Branch || c == OpClass::Store || c == OpClass::Op ||
         c == OpClass::MulDiv;
}

// ---------------------------------------------------------------------------
// Architectural state and execution.

struct DivState {
  std::uint32_t dividend = 0;
  std::uint32_t divisor = 0;
  unsigned steps_remaining = 0;
  std::uint8_t dest_reg = 0;
  Op op_kind = Op::Div;
  friend bool operator==(const DivState&, const DivState&) = default;
};

class ArchState {
 public:
  std::uint32_t reg(unsigned i) const { return i == 0 ? 0 : regs_[i & 31u]; }
  void set_reg(unsigned i, std::uint32_t v) {
    if ((i & 31u) != 0) regs_[i & 31u] = v;
  }
  const std::array<std::uint32_t, 32>& regs() const { return regs_; }

  std::uint32_t pc = 0;
  std::optional<DivState> div;

  friend bool operator==(const ArchState&, const ArchState&) = default;

 private:
  std::array<std::uint32_t, 32> regs_{};
};

enum class MemStatus : std::uint8_t {
  Ok,
  Fault,  // unmapped or out-of-range; traps the thread
  Retry,  // resource temporarily unavailable; the instruction is re-attempted
};

struct MemResult {
  MemStatus status = MemStatus::Ok;
  std::uint32_t value = 0;

  static MemResult ok(std::uint32_t v = 0) { return {MemStatus::Ok, v}; }
  static MemResult fault() { return {MemStatus::Fault, 0}; }
  static MemResult retry() { return {MemStatus::Retry, 0}; }
};

/// Loads return the zero-extended `width`-byte value; sign extension is done
/// by the core. Addresses passed in are already aligned to `width`.
template <class M>
concept MemoryPort = requires(M& m, std::uint32_t addr, unsigned width,
                              std::uint32_t value) {
  { m.load(addr, width) } -> std::same_as<MemResult>;
  { m.store(addr, width, value) } -> std::same_as<MemResult>;
};

enum class Trap : std::uint8_t {
  IllegalInstruction,
  MisalignedAccess,
  AccessFault,
  MisalignedTarget,
  FetchFault,
};

constexpr std::string_view trap_name(Trap t) {
  switch (t) {
    case Trap::IllegalInstruction: return "illegal-instruction";
    case Trap::MisalignedAccess: return "misaligned-access";
    case Trap::AccessFault: return "access-fault";
    case Trap::MisalignedTarget: return "misaligned-target";
    case Trap::FetchFault: return "fetch-fault";
  }
  return "?";
}

enum class MemKind : std::uint8_t { Load, Store };

struct MemOp {
  MemKind kind = MemKind::Load;
  std::uint32_t address = 0;
  unsigned width = 4;
  std::uint32_t store_value = 0;
  std::uint8_t dest_reg = 0;
};

struct RegWrite {
  std::uint8_t index = 0;
  std::uint32_t value = 0;
};

struct ExecEffect {
  std::uint32_t next_pc = 0;
  std::optional<RegWrite> reg_write;
  std::optional<MemOp> mem_op;
  bool completed = true;
  // The memory port asked for a retry; no architectural state changed.
  bool retry = false;
  std::optional<Trap> trap;
};

namespace detail {

inline std::uint32_t divide(Op op, std::uint32_t a, std::uint32_t b) {
  const auto sa = static_cast<std::int32_t>(a);
  const auto sb = static_cast<std::int32_t>(b);
  constexpr std::int32_t kMin = INT32_MIN;
  switch (op) {
    case Op::Div:
      if (b == 0) return 0xFFFFFFFFu;
      if (sa == kMin && sb == -1) return a;
      return static_cast<std::uint32_t>(sa / sb);
    case Op::Divu:
      return b == 0 ? 0xFFFFFFFFu : a / b;
    case Op::Rem:
      if (b == 0) return a;
      if (sa == kMin && sb == -1) return 0;
      return static_cast<std::uint32_t>(sa % sb);
    case Op::Remu:
      return b == 0 ? a : a % b;
    default:
      return 0;
  }
}

inline std::uint32_t alu(Op op, std::uint32_t a, std::uint32_t b) {
  const auto sa = static_cast<std::int32_t>(a);
  const auto sb = static_cast<std::int32_t>(b);
  switch (op) {
    case Op::Add: case Op::Addi: return a + b;
    case Op::Sub: return a - b;
    case Op::Sll: case Op::Slli: return a << (b & 31u);
    case Op::Slt: case Op::Slti: return sa < sb ? 1u : 0u;
    case Op::Sltu: case Op::Sltiu: return a < b ? 1u : 0u;
    case Op::Xor: case Op::Xori: return a ^ b;
    case Op::Srl: case Op::Srli: return a >> (b & 31u);
    case Op::Sra: case Op::Srai:
      return static_cast<std::uint32_t>(sa >> (b & 31u));
    case Op::Or: case Op::Ori: return a | b;
    case Op::And: case Op::Andi: return a & b;
    case Op::Mul: return a * b;
    case Op::Mulh:
      return static_cast<std::uint32_t>(
          (static_cast<std::int64_t>(sa) * static_cast<std::int64_t>(sb)) >> 32);
    case Op::Mulhsu:
      return static_cast<std::uint32_t>(
          (static_cast<std::int64_t>(sa) * static_cast<std::int64_t>(b)) >> 32);
    case Op::Mulhu:
      return static_cast<std::uint32_t>(
          (static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b)) >> 32);
    default:
      return 0;
  }
}

inline bool branch_taken(Op op, std::uint32_t a, std::uint32_t b) {
  const auto sa = static_cast<std::int32_t>(a);
  const auto sb = static_cast<std::int32_t>(b);
  switch (op) {
    case Op::Beq: return a == b;
    case Op::Bne: return a != b;
    case Op::Blt: return sa < sb;
    case Op::Bge: return sa >= sb;
    case Op::Bltu: return a < b;
    case Op::Bgeu: return a >= b;
    default: return false;
  }
}

inline unsigned access_width(Op op) {
  switch (op) {
    case Op::Lb: case Op::Lbu: case Op::Sb: return 1;
    case Op::Lh: case Op::Lhu: case Op::Sh: return 2;
    default: return 4;
  }
}

}  // namespace detail

/// Applies one macro-cycle of architectural progress for `in` to `st`.
///
/// A pending division ignores `in` and advances the divider by one step; the
/// quotient/remainder lands exactly kDivLatency macro-cycles after issue.
/// When the memory port answers Retry the state is left untouched and the
/// effect is flagged `retry` so the caller can re-run the same instruction.
template <MemoryPort Mem>
ExecEffect step_macro(ArchState& st, const Instruction& in, Mem& mem) {
  ExecEffect fx;
  fx.next_pc = st.pc;

  if (st.div) {
    DivState& d = *st.div;
    if (--d.steps_remaining == 0) {
      const std::uint32_t q = detail::divide(d.op_kind, d.dividend, d.divisor);
      st.set_reg(d.dest_reg, q);
      fx.reg_write = RegWrite{d.dest_reg, q};
      st.div.reset();
      st.pc += 4;
      fx.next_pc = st.pc;
    } else {
      fx.completed = false;
    }
    return fx;
  }

  const auto trap = [&](Trap t) {
    fx.trap = t;
    fx.completed = false;
    return fx;
  };
  if (!in.legal()) return trap(Trap::IllegalInstruction);

  const std::uint32_t a = st.reg(in.rs1);
  const std::uint32_t b = st.reg(in.rs2);
  const auto imm = static_cast<std::uint32_t>(in.imm);
  std::uint32_t next = st.pc + 4;
  std::optional<RegWrite> wr;

  switch (in.cls()) {
    case OpClass::Lui:
      wr = RegWrite{in.rd, imm};
      break;
    case OpClass::Auipc:
      wr = RegWrite{in.rd, st.pc + imm};
      break;
    case OpClass::Jal:
      next = st.pc + imm;
      if (next % 4 != 0) return trap(Trap::MisalignedTarget);
      wr = RegWrite{in.rd, st.pc + 4};
      break;
    case OpClass::Jalr:
      next = (a + imm) & ~1u;
      if (next % 4 != 0) return trap(Trap::MisalignedTarget);
      wr = RegWrite{in.rd, st.pc + 4};
      break;
    case OpClass::Branch:
      if (detail::branch_taken(in.op, a, b)) {
        next = st.pc + imm;
        if (next % 4 != 0) return trap(Trap::MisalignedTarget);
      }
      break;
    case OpClass::Load: {
      const unsigned w = detail::access_width(in.op);
      const std::uint32_t addr = a + imm;
      if (addr % w != 0) return trap(Trap::MisalignedAccess);
      fx.mem_op = MemOp{MemKind::Load, addr, w, 0, in.rd};
      const MemResult r = mem.load(addr, w);
      if (r.status == MemStatus::Fault) return trap(Trap::AccessFault);
      if (r.status == MemStatus::Retry) {
        fx.retry = true;
        fx.completed = false;
        return fx;
      }
      std::uint32_t v = r.value;
      if (in.op == Op::Lb) v = static_cast<std::uint32_t>(detail::sext(v & 0xFFu, 8));
      if (in.op == Op::Lh) v = static_cast<std::uint32_t>(detail::sext(v & 0xFFFFu, 16));
      wr = RegWrite{in.rd, v};
      break;
    }
    case OpClass::Store: {
      const unsigned w = detail::access_width(in.op);
      const std::uint32_t addr = a + imm;
      if (addr % w != 0) return trap(Trap::MisalignedAccess);
      const std::uint32_t v = w == 4 ? b : (b & ((1u << (8 * w)) - 1u));
      fx.mem_op = MemOp{MemKind::Store, addr, w, v, 0};
      const MemResult r = mem.store(addr, w, v);
      if (r.status == MemStatus::Fault) return trap(Trap::AccessFault);
      if (r.status == MemStatus::Retry) {
        fx.retry = true;
        fx.completed = false;
        return fx;
      }
      break;
    }
    case OpClass::OpImm:
      wr = RegWrite{in.rd, detail::alu(in.op, a, imm)};
      break;
    case OpClass::Op:
      wr = RegWrite{in.rd, detail::alu(in.op, a, b)};
      break;
    case OpClass::MulDiv:
      if (is_division(in.op)) {
        st.div = DivState{a, b, kDivLatency - 1, in.rd, in.op};
        fx.completed = false;
        return fx;
      }
      wr = RegWrite{in.rd, detail::alu(in.op, a, b)};
      break;
    case OpClass::Illegal:
      return trap(Trap::IllegalInstruction);
  }

  if (wr && wr->index != 0) {
    st.set_reg(wr->index, wr->value);
    fx.reg_write = wr;
  }
  st.pc = next;
  fx.next_pc = next;
  return fx;
}

/// Fetches the instruction word at `pc`. Instruction memory is whatever the
/// port maps at that address.
template <MemoryPort Mem>
MemResult fetch(Mem& mem, std::uint32_t pc) {
  if (pc % 4 != 0) return MemResult::fault();
  return mem.load(pc, 4);
}

struct StepResult {
  Instruction instr;
  ExecEffect effect;
};

/// Fetch, decode and step. A fetch fault surfaces as Trap::FetchFault.
template <MemoryPort Mem>
StepResult run_one(ArchState& st, Mem& mem) {
  StepResult r;
  if (st.div) {
    r.effect = step_macro(st, r.instr, mem);
    return r;
  }
  const MemResult f = fetch(mem, st.pc);
  if (f.status != MemStatus::Ok) {
    r.effect.next_pc = st.pc;
    r.effect.completed = false;
    if (f.status == MemStatus::Retry) {
      r.effect.retry = true;
    } else {
      r.effect.trap = Trap::FetchFault;
    }
    return r;
  }
  r.instr = decode(f.value);
  r.effect = step_macro(st, r.instr, mem);
  return r;
}

// ---------------------------------------------------------------------------
// Cost model of the original, non-hyper-pipelined 3-stage core.

struct HazardContext {
  bool branch_taken = false;
  bool load_use_hazard = false;
};

/// Cycles the original core spends on `in`. Control transfers that redirect
/// the fetch (taken branches and jumps) pay the flush penalty.
constexpr unsigned baseline_cost(const Instruction& in, HazardContext ctx) {
  if (is_division(in.op)) return kDivLatency;
  unsigned cycles = 1;
  if (ctx.branch_taken) cycles += kBranchPenalty;
  if (ctx.load_use_hazard) cycles += kLoadUsePenalty;
  return cycles;
}

/// True when `cur` consumes the destination of the load `prev`.
constexpr bool load_use(const Instruction& prev, const Instruction& cur) {
  if (prev.cls() != OpClass::Load || prev.rd == 0) return false;
  return (reads_rs1(cur.op) && cur.rs1 == prev.rd) ||
         (reads_rs2(cur.op) && cur.rs2 == prev.rd);
}

/// Canonical assembly text for a decoded instruction, accepted back by the
/// assembler.
inline std::string disassemble(const Instruction& in) {
  const auto x = [](unsigned r) { return "x" + std::to_string(r); };
  const std::string m(mnemonic(in.op));
  const std::string imm = std::to_string(in.imm);
  switch (in.cls()) {
    case OpClass::Illegal:
      return m;
    case OpClass::Lui:
    case OpClass::Auipc:
      return m + " " + x(in.rd) + ", " +
             std::to_string(static_cast<std::uint32_t>(in.imm) >> 12);
    case OpClass::Jal:
      return m + " " + x(in.rd) + ", " + imm;
    case OpClass::Jalr:
    case OpClass::Load:
      return m + " " + x(in.rd) + ", " + imm + "(" + x(in.rs1) + ")";
    case OpClass::Store:
      return m + " " + x(in.rs2) + ", " + imm + "(" + x(in.rs1) + ")";
    case OpClass::Branch:
      return m + " " + x(in.rs1) + ", " + x(in.rs2) + ", " + imm;
    case OpClass::OpImm:
      return m + " " + x(in.rd) + ", " + x(in.rs1) + ", " + imm;
    case OpClass::Op:
    case OpClass::MulDiv:
      return m + " " + x(in.rd) + ", " + x(in.rs1) + ", " + x(in.rs2);
  }
  return m;
}

}  // namespace hpra::core
