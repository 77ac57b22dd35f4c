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

// Local matrix-multiplication benchmark.
//
// One generated program image serves both modes. It holds a row kernel
// (`child_main`, first row in a0, row stride in a1), one start stub per
// child that loads those two registers, a sequential stub, and the fork-join
// main thread.
//
//   sequential  the sequential stub on the unsliced core, cycles from the
//               baseline cost model, clocked at f_orig
//   forkjoin    the main thread on one sliced PE spawns the children through
//               ACTIVATE_COUNT, stalls itself, and exits once joined; micro-
//               cycles until every slot is Free, clocked at fcsr_eff
//
// The kernel accumulates straight into C[i][j] (C starts zeroed):
//
//   for k: C[i][j] += A[i][k] * B[k][j]

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpra/assembler.hpp"
#include "hpra/isa.hpp"
#include "hpra/memory_map.hpp"
#include "hpra/pe.hpp"
#include "hpra/perf.hpp"

namespace hpra::bench {

struct Matrices {
  unsigned n = 0;
  std::vector<std::int32_t> a;  // row-major n x n
  std::vector<std::int32_t> b;
};

inline Matrices make_matrices(unsigned n, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * n));
  std::uniform_int_distribution<std::int32_t> dist(-1000, 1000);
  Matrices m{n, std::vector<std::int32_t>(n * n), std::vector<std::int32_t>(n * n)};
  for (auto& v : m.a) v = dist(rng);
  for (auto& v : m.b) v = dist(rng);
  return m;
}

/// PE-RAM placement of the operands.
struct Layout {
  unsigned n = 0;
  std::uint32_t a = 0x1000;
  std::uint32_t b() const { return a + 4 * n * n; }
  std::uint32_t c() const { return b() + 4 * n * n; }
  std::uint32_t end() const { return c() + 4 * n * n; }
};

/// Assembly for an n x n product split over `children` row-strided threads.
inline std::string matmul_source(unsigned n, unsigned children) {
  if (n == 0 || children == 0) throw std::invalid_argument("matmul: n and children must be >= 1");
  const Layout L{n};
  std::ostringstream s;
  s << ".equ N, " << n << "\n"
    << ".equ ROWB, " << 4 * n << "\n"
    << ".equ MA, " << L.a << "\n"
    << ".equ MB, " << L.b() << "\n"
    << ".equ MC, " << L.c() << "\n"
    << ".equ TC, 0x80000000\n"
    << ".equ T, " << children << "\n"
    << "seq_main:\n  addi a0, x0, 0\n  addi a1, x0, 1\n  j child_main\n";
  for (unsigned i = 0; i < children; ++i) {
    s << "stub_" << i << ":\n  addi a0, x0, " << i << "\n  addi a1, x0, T\n  j child_main\n";
  }
  s << "mt_main:\n  lui s0, %hi(TC)\n";
  for (unsigned i = 0; i < children; ++i) {
    s << "  li t0, stub_" << i << "\n  sw t0, 0x10(s0)\n";
  }
  s << R"(  lw t1, 0x14(s0)
  addi t2, x0, 1
  sll t2, t2, t1
  lw t3, 0x10(s0)
  beqz t3, joined
  sw t2, 0x08(s0)
joined:
  sw x0, 0x04(s0)

child_main:
row_loop:
  addi t0, x0, N
  bge a0, t0, child_done
  addi t1, x0, ROWB
  mul s2, a0, t1
  li s3, MA
  add s3, s3, s2
  li s4, MC
  add s4, s4, s2
  li s6, MB
  addi s5, s4, ROWB
col_loop:
  mv s7, s3
  mv s8, s6
  addi s9, s3, ROWB
k_loop:
  lw t2, 0(s7)
  lw t3, 0(s8)
  mul t2, t2, t3
  lw t4, 0(s4)
  add t4, t4, t2
  sw t4, 0(s4)
  addi s7, s7, 4
  addi s8, s8, ROWB
  bne s7, s9, k_loop
  addi s4, s4, 4
  addi s6, s6, 4
  bne s4, s5, col_loop
  add a0, a0, a1
  j row_loop
child_done:
  lui t0, %hi(TC)
  sw x0, 0x04(t0)
)";
  return s.str();
}

/// Flat RAM for the unsliced core. A store to the EXIT SFR halts it.
class BaselineMemory {
 public:
  explicit BaselineMemory(std::uint32_t size) : ram_(size, 0) {}

  core::MemResult load(std::uint32_t addr, unsigned width) {
    if (addr >= ram_.size() || ram_.size() - addr < width) return core::MemResult::fault();
    std::uint32_t v = 0;
    std::memcpy(&v, ram_.data() + addr, width);
    return core::MemResult::ok(v);
  }
  core::MemResult store(std::uint32_t addr, unsigned width, std::uint32_t value) {
    if (addr == kSfrBase + sfr::kExit && width == 4) {
      halted_ = true;
      return core::MemResult::ok();
    }
    if (addr >= ram_.size() || ram_.size() - addr < width) return core::MemResult::fault();
    std::memcpy(ram_.data() + addr, &value, width);
    return core::MemResult::ok();
  }

  bool halted() const { return halted_; }
  std::span<std::uint8_t> bytes() { return ram_; }

  void write_words(std::uint32_t addr, std::span<const std::uint32_t> words) {
    if (addr > ram_.size() || words.size() > (ram_.size() - addr) / 4) {
      throw std::out_of_range("baseline image does not fit");
    }
    std::memcpy(ram_.data() + addr, words.data(), 4 * words.size());
  }
  std::uint32_t read_word(std::uint32_t addr) const {
    std::uint32_t v = 0;
    std::memcpy(&v, ram_.data() + addr, 4);
    return v;
  }

 private:
  std::vector<std::uint8_t> ram_;
  bool halted_ = false;
};

struct BaselineRun {
  std::uint64_t cycles = 0;
  std::uint64_t instructions = 0;
};

/// Runs one thread from `entry` to its EXIT store, charging the unsliced
/// core's cycle costs.
inline BaselineRun run_baseline(BaselineMemory& mem, std::uint32_t entry,
                                std::uint64_t max_instructions = 100'000'000) {
  core::ArchState st;
  st.pc = entry;
  BaselineRun out;
  core::Instruction prev;
  while (!mem.halted()) {
    if (out.instructions == max_instructions) {
      throw std::runtime_error("baseline run exceeded the instruction limit");
    }
    const std::uint32_t pc = st.pc;
    const core::StepResult r = core::run_one(st, mem);
    if (r.effect.trap) {
      throw std::runtime_error("baseline run trapped: " +
                               std::string(core::trap_name(*r.effect.trap)));
    }
    while (st.div) core::step_macro(st, core::Instruction{}, mem);
    const core::OpClass cls = r.instr.cls();
    const bool redirect = cls == core::OpClass::Jal || cls == core::OpClass::Jalr ||
                          (cls == core::OpClass::Branch && st.pc != pc + 4);
    out.cycles += core::baseline_cost(r.instr, {redirect, core::load_use(prev, r.instr)});
    ++out.instructions;
    prev = r.instr;
  }
  return out;
}

enum class Mode { Sequential, ForkJoin };

struct MatmulResult {
  unsigned n = 0;
  Mode mode = Mode::Sequential;
  unsigned children = 0;
  std::uint64_t cycles = 0;  // baseline cycles or micro-cycles
  std::uint64_t join_cycle = 0;  // forkjoin: micro-cycle the main thread resumed
  double ns = 0;
  std::vector<std::int32_t> c;
};

struct BenchConfig {
  PeConfig pe;
  perf::PerfParams perf{181.0, 4, 16, 0.93, 549.0};
  std::uint64_t seed = 1;
  std::uint64_t max_micro_cycles = 10'000'000;
};

inline unsigned children_for(unsigned n, unsigned threads, const PeConfig& pe) {
  return std::max(1u, std::min({threads, n, pe.d - 1}));
}

inline std::vector<std::uint32_t> as_words(std::span<const std::int32_t> v) {
  std::vector<std::uint32_t> w(v.size());
  std::memcpy(w.data(), v.data(), 4 * v.size());
  return w;
}

inline MatmulResult bench_matmul(unsigned n, Mode mode, unsigned threads, const BenchConfig& cfg) {
  if (n < 1 || n > 64) throw std::invalid_argument("matmul: n must be in 1..64");
  const Matrices m = make_matrices(n, cfg.seed);
  const Layout L{n};
  if (L.end() > cfg.pe.ram_size) throw std::invalid_argument("matmul: operands do not fit");
  MatmulResult res;
  res.n = n;
  res.mode = mode;
  res.children = mode == Mode::Sequential ? 1 : children_for(n, threads, cfg.pe);
  const assembler::Program prog = assembler::assemble(matmul_source(n, res.children));
  if (4 * prog.words.size() > L.a) throw std::logic_error("matmul: code overlaps data");
  const auto a = as_words(m.a);
  const auto b = as_words(m.b);
  res.c.resize(n * n);

  if (mode == Mode::Sequential) {
    BaselineMemory mem(cfg.pe.ram_size);
    mem.write_words(0, prog.words);
    mem.write_words(L.a, a);
    mem.write_words(L.b(), b);
    const BaselineRun run = run_baseline(mem, prog.symbol("seq_main"));
    res.cycles = run.cycles;
    res.ns = perf::wallclock_ns(run.cycles, cfg.perf.f_orig);
    for (unsigned i = 0; i < n * n; ++i) {
      res.c[i] = static_cast<std::int32_t>(mem.read_word(L.c() + 4 * i));
    }
    return res;
  }

  PeConfig pc = cfg.pe;
  Pe pe(pc, Geometry{});
  pe.load_image(0, prog.words);
  pe.load_image(L.a, a);
  pe.load_image(L.b(), b);
  const auto mt = pe.activate(prog.symbol("mt_main"));
  bool was_stalled = false;
  while (pe.tc().live_count() != 0) {
    if (pe.now() >= cfg.max_micro_cycles) throw std::runtime_error("matmul: micro-cycle limit");
    pe.tick();
    const bool stalled = pe.tc().slot(*mt).state == ThreadState::Stalled;
    if (was_stalled && !stalled && res.join_cycle == 0) res.join_cycle = pe.now() - 1;
    was_stalled = stalled;
  }
  for (const ThreadSlot& s : pe.tc().slots()) {
    if (s.state == ThreadState::Halted) throw std::runtime_error("matmul: a thread trapped");
  }
  res.cycles = pe.now();
  res.ns = perf::wallclock_ns(res.cycles, cfg.perf);
  for (unsigned i = 0; i < n * n; ++i) {
    res.c[i] = static_cast<std::int32_t>(pe.read_word(L.c() + 4 * i));
  }
  return res;
}

struct MatmulComparison {
  MatmulResult sequential;
  MatmulResult forkjoin;
  double speedup() const { return sequential.ns / forkjoin.ns; }
  perf::MatmulRow row() const {
    return {sequential.n, sequential.ns, forkjoin.ns, sequential.cycles, forkjoin.cycles};
  }
};

inline MatmulComparison compare_matmul(unsigned n, unsigned threads, const BenchConfig& cfg) {
  return {bench_matmul(n, Mode::Sequential, 1, cfg), bench_matmul(n, Mode::ForkJoin, threads, cfg)};
}

}  // namespace hpra::bench
