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

// Two-pass assembler for the RV32IM subset.
//
// Syntax summary:
//   label:            defines a symbol at the current location
//   .org ADDR         moves the location counter forward (zero fill)
//   .word E[, E...]   emits 32-bit words
//   .space N          emits N bytes of zeros (N multiple of 4)
//   .equ NAME, E      defines a constant (also .set)
//   # ; //            comments
//
// Expressions take decimal, hex (0x) and binary (0b) literals, symbols, `.`
// (address of the current statement), + - * << >> & |, parentheses, and
// %hi()/%lo() for lui/addi pairs. A branch or jump target written as a bare
// literal is a pc-relative byte offset (the disassembler's form); any target
// that mentions a symbol is an absolute address.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hpra/isa.hpp"

namespace hpra::assembler {

enum class ErrorKind : std::uint8_t { Syntax, UnknownMnemonic, Range };

class AsmError : public std::runtime_error {
 public:
  AsmError(ErrorKind kind, int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        kind_(kind), line_(line) {}
  ErrorKind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  ErrorKind kind_;
  int line_;
};

struct Program {
  std::uint32_t base = 0;
  std::vector<std::uint32_t> words;
  std::map<std::string, std::uint32_t, std::less<>> symbols;

  std::uint32_t symbol(std::string_view name) const {
    const auto it = symbols.find(name);
    if (it == symbols.end()) throw std::out_of_range("no symbol " + std::string(name));
    return it->second;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

inline std::optional<unsigned> parse_reg(std::string_view name) {
  static const std::map<std::string, unsigned, std::less<>> kAbi = {
      {"zero", 0}, {"ra", 1},  {"sp", 2},   {"gp", 3},   {"tp", 4},  {"t0", 5},
      {"t1", 6},   {"t2", 7},  {"s0", 8},   {"fp", 8},   {"s1", 9},  {"a0", 10},
      {"a1", 11},  {"a2", 12}, {"a3", 13},  {"a4", 14},  {"a5", 15}, {"a6", 16},
      {"a7", 17},  {"s2", 18}, {"s3", 19},  {"s4", 20},  {"s5", 21}, {"s6", 22},
      {"s7", 23},  {"s8", 24}, {"s9", 25},  {"s10", 26}, {"s11", 27}, {"t3", 28},
      {"t4", 29},  {"t5", 30}, {"t6", 31}};
  const std::string n = lower(trim(name));
  if (n.size() >= 2 && n[0] == 'x' &&
      std::all_of(n.begin() + 1, n.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    if (n.size() > 3) return std::nullopt;
    const unsigned v = static_cast<unsigned>(std::stoul(n.substr(1)));
    if (v < 32) return v;
    return std::nullopt;
  }
  const auto it = kAbi.find(n);
  if (it != kAbi.end()) return it->second;
  return std::nullopt;
}

/// Splits on commas outside parentheses.
inline std::vector<std::string> split_operands(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::string strip_comment(std::string_view line) {
  std::size_t cut = line.size();
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '#' || line[i] == ';' ||
        (line[i] == '/' && i + 1 < line.size() && line[i + 1] == '/')) {
      cut = i;
      break;
    }
  }
  return std::string(line.substr(0, cut));
}

using SymbolTable = std::map<std::string, std::int64_t, std::less<>>;

struct EvalResult {
  std::optional<std::int64_t> value;  // nullopt while a symbol is unresolved
  bool uses_symbol = false;
};

/// Recursive-descent evaluator. In lenient mode unknown symbols produce an
/// unresolved result instead of an error.
class ExprParser {
 public:
  ExprParser(std::string_view text, const SymbolTable& syms, std::int64_t dot,
             bool lenient, int line)
      : s_(text), syms_(syms), dot_(dot), lenient_(lenient), line_(line) {}

  EvalResult parse() {
    EvalResult r;
    auto v = bitor_();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_)) + "'");
    r.value = v;
    r.uses_symbol = uses_symbol_;
    return r;
  }

 private:
  using V = std::optional<std::int64_t>;

  [[noreturn]] void fail(const std::string& msg) const {
    throw AsmError(ErrorKind::Syntax, line_, msg);
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  template <class F>
  static V combine(V a, V b, F f) {
    if (!a || !b) return std::nullopt;
    return f(*a, *b);
  }

  V bitor_() {
    V v = bitand_();
    while (true) {
      if (eat("|")) {
        v = combine(v, bitand_(), [](auto a, auto b) { return a | b; });
      } else {
        return v;
      }
    }
  }
  V bitand_() {
    V v = shift();
    while (eat("&")) v = combine(v, shift(), [](auto a, auto b) { return a & b; });
    return v;
  }
  V shift() {
    V v = sum();
    while (true) {
      if (eat("<<")) {
        v = combine(v, sum(), [](auto a, auto b) { return a << (b & 63); });
      } else if (eat(">>")) {
        v = combine(v, sum(), [](auto a, auto b) { return a >> (b & 63); });
      } else {
        return v;
      }
    }
  }
  V sum() {
    V v = product();
    while (true) {
      if (eat("+")) {
        v = combine(v, product(), [](auto a, auto b) { return a + b; });
      } else if (eat("-")) {
        v = combine(v, product(), [](auto a, auto b) { return a - b; });
      } else {
        return v;
      }
    }
  }
  V product() {
    V v = unary();
    while (eat("*")) v = combine(v, unary(), [](auto a, auto b) { return a * b; });
    return v;
  }
  V unary() {
    if (eat("-")) {
      V v = unary();
      return v ? V(-*v) : v;
    }
    if (eat("~")) {
      V v = unary();
      return v ? V(~*v) : v;
    }
    return primary();
  }
  V primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expression expected");
    if (eat("%hi(")) {
      V v = bitor_();
      if (!eat(")")) fail("missing ')'");
      return v ? V(((*v + 0x800) >> 12) & 0xFFFFF) : v;
    }
    if (eat("%lo(")) {
      V v = bitor_();
      if (!eat(")")) fail("missing ')'");
      if (!v) return v;
      const std::int64_t lo = *v & 0xFFF;
      return lo >= 0x800 ? lo - 0x1000 : lo;
    }
    if (eat("(")) {
      V v = bitor_();
      if (!eat(")")) fail("missing ')'");
      return v;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return number();
    if (ident_start(c)) {
      const std::size_t b = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      const std::string name(s_.substr(b, pos_ - b));
      uses_symbol_ = true;
      if (name == ".") return dot_;
      const auto it = syms_.find(name);
      if (it != syms_.end()) return it->second;
      if (lenient_) return std::nullopt;
      fail("undefined symbol '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
  V number() {
    int base = 10;
    if (s_.substr(pos_, 2) == "0x" || s_.substr(pos_, 2) == "0X") {
      base = 16;
      pos_ += 2;
    } else if (s_.substr(pos_, 2) == "0b" || s_.substr(pos_, 2) == "0B") {
      base = 2;
      pos_ += 2;
    }
    std::int64_t v = 0;
    std::size_t digits = 0;
    while (pos_ < s_.size()) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s_[pos_])));
      int d;
      if (c >= '0' && c <= '9') {
        d = c - '0';
      } else if (c >= 'a' && c <= 'f') {
        d = c - 'a' + 10;
      } else if (c == '_') {
        ++pos_;
        continue;
      } else {
        break;
      }
      if (d >= base) fail("bad digit in literal");
      v = v * base + d;
      if (v > 0xFFFFFFFFll) fail("literal too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) fail("malformed literal");
    return v;
  }

  std::string_view s_;
  const SymbolTable& syms_;
  std::int64_t dot_;
  bool lenient_;
  int line_;
  std::size_t pos_ = 0;
  bool uses_symbol_ = false;
};

struct Statement {
  int line = 0;
  std::uint32_t addr = 0;
  std::string mnemonic;
  std::vector<std::string> operands;
  unsigned words = 0;
};

inline bool fits_signed(std::int64_t v, unsigned bits) {
  const std::int64_t lim = std::int64_t{1} << (bits - 1);
  return v >= -lim && v < lim;
}

/// True when `v` can be a 32-bit register value (signed or unsigned reading).
inline bool fits_word(std::int64_t v) {
  return v >= -(std::int64_t{1} << 31) && v <= 0xFFFFFFFFll;
}

inline std::int32_t as_i32(std::int64_t v) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(v & 0xFFFFFFFFll));
}

/// Number of words `li` needs for a known value.
inline unsigned li_words(std::int64_t v) {
  const std::int32_t w = as_i32(v);
  if (fits_signed(w, 12)) return 1;
  if ((w & 0xFFF) == 0) return 1;
  return 2;
}

class Encoder {
 public:
  Encoder(const SymbolTable& syms, const Statement& st) : syms_(syms), st_(st) {}

  std::vector<std::uint32_t> run() {
    using core::Op;
    const std::string& m = st_.mnemonic;
    static const std::map<std::string, Op, std::less<>> kR = {
        {"add", Op::Add},   {"sub", Op::Sub},       {"sll", Op::Sll},     {"slt", Op::Slt},
        {"sltu", Op::Sltu}, {"xor", Op::Xor},       {"srl", Op::Srl},     {"sra", Op::Sra},
        {"or", Op::Or},     {"and", Op::And},       {"mul", Op::Mul},     {"mulh", Op::Mulh},
        {"mulhsu", Op::Mulhsu}, {"mulhu", Op::Mulhu}, {"div", Op::Div},   {"divu", Op::Divu},
        {"rem", Op::Rem},   {"remu", Op::Remu}};
    static const std::map<std::string, Op, std::less<>> kI = {
        {"addi", Op::Addi}, {"slti", Op::Slti}, {"sltiu", Op::Sltiu},
        {"xori", Op::Xori}, {"ori", Op::Ori},   {"andi", Op::Andi}};
    static const std::map<std::string, Op, std::less<>> kShift = {
        {"slli", Op::Slli}, {"srli", Op::Srli}, {"srai", Op::Srai}};
    static const std::map<std::string, Op, std::less<>> kLoad = {
        {"lb", Op::Lb}, {"lh", Op::Lh}, {"lw", Op::Lw}, {"lbu", Op::Lbu}, {"lhu", Op::Lhu}};
    static const std::map<std::string, Op, std::less<>> kStore = {
        {"sb", Op::Sb}, {"sh", Op::Sh}, {"sw", Op::Sw}};
    static const std::map<std::string, Op, std::less<>> kBranch = {
        {"beq", Op::Beq}, {"bne", Op::Bne},   {"blt", Op::Blt},
        {"bge", Op::Bge}, {"bltu", Op::Bltu}, {"bgeu", Op::Bgeu}};
    // Swapped-operand branch aliases.
    static const std::map<std::string, Op, std::less<>> kBranchSwap = {
        {"bgt", Op::Blt}, {"ble", Op::Bge}, {"bgtu", Op::Bltu}, {"bleu", Op::Bgeu}};

    if (auto it = kR.find(m); it != kR.end()) {
      want(3);
      return {r(it->second, reg(0), reg(1), reg(2))};
    }
    if (auto it = kI.find(m); it != kI.end()) {
      want(3);
      return {i(it->second, reg(0), reg(1), imm12(2))};
    }
    if (auto it = kShift.find(m); it != kShift.end()) {
      want(3);
      const std::int64_t sh = value(2);
      if (sh < 0 || sh > 31) range("shift amount out of range");
      return {i(it->second, reg(0), reg(1), static_cast<std::int32_t>(sh))};
    }
    if (auto it = kLoad.find(m); it != kLoad.end()) {
      want(2);
      const auto [off, base] = mem(1);
      return {i(it->second, reg(0), base, off)};
    }
    if (auto it = kStore.find(m); it != kStore.end()) {
      want(2);
      const auto [off, base] = mem(1);
      return {enc({it->second, 0, base, reg(0), off})};
    }
    if (auto it = kBranch.find(m); it != kBranch.end()) {
      want(3);
      return {branch(it->second, reg(0), reg(1), 2)};
    }
    if (auto it = kBranchSwap.find(m); it != kBranchSwap.end()) {
      want(3);
      return {branch(it->second, reg(1), reg(0), 2)};
    }
    if (m == "beqz" || m == "bnez" || m == "bgez" || m == "bltz") {
      want(2);
      const Op op = m == "beqz" ? Op::Beq : m == "bnez" ? Op::Bne : m == "bgez" ? Op::Bge : Op::Blt;
      return {branch(op, reg(0), 0, 1)};
    }
    if (m == "blez") {
      want(2);
      return {branch(Op::Bge, 0, reg(0), 1)};
    }
    if (m == "bgtz") {
      want(2);
      return {branch(Op::Blt, 0, reg(0), 1)};
    }
    if (m == "lui" || m == "auipc") {
      want(2);
      const std::int64_t v = value(1);
      if (v < 0 || v > 0xFFFFF) range("20-bit immediate out of range");
      return {enc({m == "lui" ? Op::Lui : Op::Auipc, reg(0), 0, 0,
                   static_cast<std::int32_t>(static_cast<std::uint32_t>(v) << 12)})};
    }
    if (m == "jal") {
      if (st_.operands.size() == 1) return {jal(1, 0)};
      want(2);
      return {jal(reg(0), 1)};
    }
    if (m == "jalr") {
      if (st_.operands.size() == 1) return {i(Op::Jalr, 1, reg(0), 0)};
      if (st_.operands.size() == 2) {
        const auto [off, base] = mem(1);
        return {i(Op::Jalr, reg(0), base, off)};
      }
      want(3);
      return {i(Op::Jalr, reg(0), reg(1), imm12(2))};
    }
    if (m == "nop") {
      want(0);
      return {i(Op::Addi, 0, 0, 0)};
    }
    if (m == "mv") {
      want(2);
      return {i(Op::Addi, reg(0), reg(1), 0)};
    }
    if (m == "not") {
      want(2);
      return {i(Op::Xori, reg(0), reg(1), -1)};
    }
    if (m == "neg") {
      want(2);
      return {r(Op::Sub, reg(0), 0, reg(1))};
    }
    if (m == "seqz") {
      want(2);
      return {i(Op::Sltiu, reg(0), reg(1), 1)};
    }
    if (m == "snez") {
      want(2);
      return {r(Op::Sltu, reg(0), 0, reg(1))};
    }
    if (m == "j") {
      want(1);
      return {jal(0, 0)};
    }
    if (m == "call") {
      want(1);
      return {jal(1, 0)};
    }
    if (m == "jr") {
      want(1);
      return {i(Op::Jalr, 0, reg(0), 0)};
    }
    if (m == "ret") {
      want(0);
      return {i(Op::Jalr, 0, 1, 0)};
    }
    if (m == "li" || m == "la") {
      want(2);
      const std::int64_t v = value(1);
      if (!fits_word(v)) range("value does not fit in 32 bits");
      return load_const(reg(0), as_i32(v), st_.words);
    }
    throw AsmError(ErrorKind::UnknownMnemonic, st_.line, "unknown mnemonic '" + m + "'");
  }

 private:
  [[noreturn]] void range(const std::string& msg) const {
    throw AsmError(ErrorKind::Range, st_.line, msg);
  }
  [[noreturn]] void syntax(const std::string& msg) const {
    throw AsmError(ErrorKind::Syntax, st_.line, msg);
  }
  void want(std::size_t n) const {
    if (st_.operands.size() != n) {
      syntax(st_.mnemonic + " expects " + std::to_string(n) + " operand(s)");
    }
  }
  std::uint8_t reg(std::size_t k) const {
    const auto r = parse_reg(st_.operands.at(k));
    if (!r) syntax("bad register '" + st_.operands[k] + "'");
    return static_cast<std::uint8_t>(*r);
  }
  EvalResult eval(const std::string& text) const {
    return ExprParser(text, syms_, st_.addr, false, st_.line).parse();
  }
  std::int64_t value(std::size_t k) const { return *eval(st_.operands.at(k)).value; }
  std::int32_t imm12(std::size_t k) const {
    const std::int64_t v = value(k);
    if (!fits_signed(v, 12)) range("12-bit immediate out of range");
    return static_cast<std::int32_t>(v);
  }
  std::pair<std::int32_t, std::uint8_t> mem(std::size_t k) const {
    const std::string& s = st_.operands.at(k);
    const std::size_t close = s.rfind(')');
    const std::size_t open = s.rfind('(');
    if (close != s.size() - 1 || open == std::string::npos) syntax("expected offset(reg)");
    const auto base = parse_reg(s.substr(open + 1, close - open - 1));
    if (!base) syntax("bad base register in '" + s + "'");
    const std::string off_text = trim(s.substr(0, open));
    std::int64_t off = 0;
    if (!off_text.empty()) off = *eval(off_text).value;
    if (!fits_signed(off, 12)) range("12-bit offset out of range");
    return {static_cast<std::int32_t>(off), static_cast<std::uint8_t>(*base)};
  }
  /// Bare literals are pc-relative; symbolic targets are absolute.
  std::int64_t target_offset(std::size_t k) const {
    const EvalResult e = eval(st_.operands.at(k));
    return e.uses_symbol ? *e.value - st_.addr : *e.value;
  }

  static std::uint32_t enc(const core::Instruction& in) { return core::encode(in); }
  static std::uint32_t r(core::Op op, std::uint8_t rd, std::uint8_t rs1, std::uint8_t rs2) {
    return enc({op, rd, rs1, rs2, 0});
  }
  static std::uint32_t i(core::Op op, std::uint8_t rd, std::uint8_t rs1, std::int32_t imm) {
    return enc({op, rd, rs1, 0, imm});
  }
  std::uint32_t branch(core::Op op, std::uint8_t rs1, std::uint8_t rs2, std::size_t k) const {
    const std::int64_t off = target_offset(k);
    if (off % 2 != 0 || !fits_signed(off, 13)) range("branch target out of range");
    return enc({op, 0, rs1, rs2, static_cast<std::int32_t>(off)});
  }
  std::uint32_t jal(std::uint8_t rd, std::size_t k) const {
    const std::int64_t off = target_offset(k);
    if (off % 2 != 0 || !fits_signed(off, 21)) range("jump target out of range");
    return enc({core::Op::Jal, rd, 0, 0, static_cast<std::int32_t>(off)});
  }
  static std::vector<std::uint32_t> load_const(std::uint8_t rd, std::int32_t v, unsigned words) {
    using core::Op;
    const std::int32_t lo = static_cast<std::int32_t>(static_cast<std::uint32_t>(v) << 20) >> 20;
    const std::uint32_t hi = static_cast<std::uint32_t>(v) - static_cast<std::uint32_t>(lo);
    if (words == 1) {
      if (fits_signed(v, 12)) return {i(Op::Addi, rd, 0, v)};
      return {enc({Op::Lui, rd, 0, 0, static_cast<std::int32_t>(hi)})};
    }
    return {enc({Op::Lui, rd, 0, 0, static_cast<std::int32_t>(hi)}), i(Op::Addi, rd, rd, lo)};
  }

  const SymbolTable& syms_;
  const Statement& st_;
};

}  // namespace detail

/// Assembles `source` into an image whose first word sits at `base`.
inline Program assemble(std::string_view source, std::uint32_t base = 0) {
  using namespace detail;
  SymbolTable syms;
  std::vector<Statement> stmts;
  std::vector<std::pair<int, std::uint32_t>> orgs;  // (statement index, target)
  std::int64_t lc = base;

  std::istringstream in{std::string(source)};
  std::string raw;
  int line = 0;
  const auto define = [&](const std::string& name, std::int64_t v) {
    if (name == "." || parse_reg(name)) {
      throw AsmError(ErrorKind::Syntax, line, "reserved name '" + name + "'");
    }
    if (!syms.emplace(name, v).second) {
      throw AsmError(ErrorKind::Syntax, line, "duplicate symbol '" + name + "'");
    }
  };

  // Pass 1: statements, sizes, label addresses.
  while (std::getline(in, raw)) {
    ++line;
    std::string text = trim(strip_comment(raw));
    while (true) {
      std::size_t n = 0;
      while (n < text.size() && ident_char(text[n])) ++n;
      if (n > 0 && n < text.size() && text[n] == ':' && ident_start(text[0])) {
        define(text.substr(0, n), lc);
        text = trim(text.substr(n + 1));
      } else {
        break;
      }
    }
    if (text.empty()) continue;

    std::size_t sp = 0;
    while (sp < text.size() && !std::isspace(static_cast<unsigned char>(text[sp]))) ++sp;
    Statement st;
    st.line = line;
    st.addr = static_cast<std::uint32_t>(lc);
    st.mnemonic = lower(text.substr(0, sp));
    st.operands = split_operands(text.substr(sp));
    for (const std::string& o : st.operands) {
      if (o.empty()) throw AsmError(ErrorKind::Syntax, line, "empty operand");
    }

    const auto lenient = [&](const std::string& e) {
      return ExprParser(e, syms, lc, true, line).parse();
    };
    const auto strict = [&](const std::string& e) {
      return *ExprParser(e, syms, lc, false, line).parse().value;
    };

    if (st.mnemonic == ".equ" || st.mnemonic == ".set") {
      if (st.operands.size() != 2) throw AsmError(ErrorKind::Syntax, line, ".equ NAME, VALUE");
      define(st.operands[0], strict(st.operands[1]));
      continue;
    }
    if (st.mnemonic == ".org") {
      if (st.operands.size() != 1) throw AsmError(ErrorKind::Syntax, line, ".org ADDR");
      const std::int64_t to = strict(st.operands[0]);
      if (to < lc || to % 4 != 0 || to > 0xFFFFFFFFll) {
        throw AsmError(ErrorKind::Range, line, ".org must move forward to an aligned address");
      }
      st.words = static_cast<unsigned>((to - lc) / 4);
      st.mnemonic = ".space";
      st.operands = {std::to_string(to - lc)};
    } else if (st.mnemonic == ".space" || st.mnemonic == ".zero") {
      if (st.operands.size() != 1) throw AsmError(ErrorKind::Syntax, line, ".space BYTES");
      const std::int64_t n = strict(st.operands[0]);
      if (n < 0 || n % 4 != 0 || n > (std::int64_t{1} << 26)) {
        throw AsmError(ErrorKind::Range, line, ".space needs a small multiple of 4");
      }
      st.mnemonic = ".space";
      st.operands = {std::to_string(n)};
      st.words = static_cast<unsigned>(n / 4);
    } else if (st.mnemonic == ".word") {
      if (st.operands.empty()) throw AsmError(ErrorKind::Syntax, line, ".word needs a value");
      st.words = static_cast<unsigned>(st.operands.size());
    } else if (st.mnemonic == "la") {
      st.words = 2;
    } else if (st.mnemonic == "li") {
      if (st.operands.size() != 2) throw AsmError(ErrorKind::Syntax, line, "li expects 2 operand(s)");
      const EvalResult e = lenient(st.operands[1]);
      st.words = e.value ? li_words(*e.value) : 2;
    } else if (!st.mnemonic.empty() && st.mnemonic[0] == '.') {
      throw AsmError(ErrorKind::UnknownMnemonic, line, "unknown directive '" + st.mnemonic + "'");
    } else {
      st.words = 1;
    }
    lc += 4ll * st.words;
    if (lc > 0x1'0000'0000ll) throw AsmError(ErrorKind::Range, line, "image exceeds address space");
    stmts.push_back(std::move(st));
  }

  // Pass 2: encoding.
  Program prog;
  prog.base = base;
  for (const auto& [name, v] : syms) prog.symbols[name] = static_cast<std::uint32_t>(v);
  for (const Statement& st : stmts) {
    if (st.mnemonic == ".space") {
      prog.words.insert(prog.words.end(), st.words, 0u);
      continue;
    }
    if (st.mnemonic == ".word") {
      for (const std::string& o : st.operands) {
        const std::int64_t v = *ExprParser(o, syms, st.addr, false, st.line).parse().value;
        if (!fits_word(v)) throw AsmError(ErrorKind::Range, st.line, ".word value out of range");
        prog.words.push_back(static_cast<std::uint32_t>(v));
      }
      continue;
    }
    const auto words = Encoder(syms, st).run();
    prog.words.insert(prog.words.end(), words.begin(), words.end());
  }
  return prog;
}

}  // namespace hpra::assembler
