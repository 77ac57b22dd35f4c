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

// Acceptance runner. Prints one PASS/FAIL line per criterion.
//
//   acceptance                 run all criteria
//   acceptance --criterion N   run criterion N only
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hpra/hpra.hpp"
#include "support/isa_diff.hpp"
#include "support/reference_rv32.hpp"

namespace {

using namespace hpra;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Clock estimator and per-thread rate.

Outcome criterion_1() {
  Outcome o;
  perf::PerfParams p{181.0, 4, 16, 0.93, std::nullopt};
  const double est = perf::f_csr(p);
  o.require(std::fabs(est - 541.66) <= 0.01,
            "f_csr(181, 4, 0.93) = " + fmt("%.4f", est) + ", expected 541.66 +/- 0.01");
  p.f_csr_measured = 549.0;
  const double tr = perf::thread_rate(p, 4);
  o.require(perf::fixed(tr, 2) == "137.25", "thread_rate(T=4) = " + perf::fixed(tr, 4));
  o.require(perf::fixed(tr, 0) == "137", "thread_rate rounds to " + perf::fixed(tr, 0));
  if (o.pass) o.detail = "f_csr=" + fmt("%.4f", est) + " thread_rate=" + perf::fixed(tr, 2);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Area table arithmetic.

Outcome criterion_2() {
  Outcome o;
  const auto rows = perf::ppa_report(perf::reference_area_records());
  const auto check_pair = [&](const perf::PpaRow& r, const std::string& pa, const std::string& pb,
                              long d) {
    const std::string got_a = perf::fixed(*r.ppa_a, 2);
    const std::string got_b = perf::fixed(*r.ppa_b, 2);
    o.require(got_a == pa, r.a.name + " PpA " + got_a + " != " + pa);
    o.require(got_b == pb, r.b.name + " PpA " + got_b + " != " + pb);
    o.require(r.dppa && *r.dppa == d,
              r.a.name + "/" + r.b.name + " dPpA " + std::to_string(r.dppa.value_or(-1)) +
                  " != " + std::to_string(d));
  };
  check_pair(rows.at(0), "0.29", "0.78", 266);
  check_pair(rows.at(4), "0.23", "0.77", 303);
  if (o.pass) o.detail = "RV/SHP-RV and CGRA/HPRA rows match";
  return o;
}

// ---------------------------------------------------------------------------
// 3. Partitioning table from the default system.

Outcome criterion_3() {
  Outcome o;
  config::FullConfig cfg;
  cfg.finalize();
  const auto rows = perf::partition_table(cfg.perf, cli::pe_cluster_count(cfg.system));
  const auto text = cli::partition_text_table(rows, cfg.perf);
  o.require(rows.size() == 3, "expected 3 rows");
  o.require(text[1][1] == "15", "single RV threads " + text[1][1]);
  o.require(text[2][1] == "60 (C = 4)", "min threads " + text[2][1]);
  o.require(text[3][1] == "240 (D = 16)", "max threads " + text[3][1]);
  o.require(text[1][3] == "no" && text[2][3] == "yes" && text[3][3] == "yes", "data sharing flags");
  o.require(text[1][4] == "181 MHz", "single RV cluster " + text[1][4]);
  o.require(text[2][4] == "549 MHz" && text[3][4] == "549 MHz", "sliced cluster MHz");
  o.require(perf::fixed(rows[1].thread_mhz, 0) == "137", "per-thread MHz at C");
  if (o.pass) o.detail = "15 / 60 / 240 threads, 181 / 549 / 549 MHz";
  return o;
}

// ---------------------------------------------------------------------------
// 4. Matmul trend.

std::vector<std::int32_t> brute_force_product(const bench::Matrices& m) {
  const unsigned n = m.n;
  std::vector<std::int32_t> c(n * n);
  for (unsigned i = 0; i < n; ++i) {
    for (unsigned j = 0; j < n; ++j) {
      std::int64_t acc = 0;
      for (unsigned k = 0; k < n; ++k) acc += std::int64_t{m.a[i * n + k]} * m.b[k * n + j];
      c[i * n + j] = static_cast<std::int32_t>(acc);
    }
  }
  return c;
}

Outcome criterion_4() {
  Outcome o;
  bench::BenchConfig cfg;
  double prev = 0;
  std::string speeds;
  for (unsigned n = 4; n <= 10; ++n) {
    const auto cmp = bench::compare_matmul(n, 16, cfg);
    const auto ref = brute_force_product(bench::make_matrices(n, cfg.seed));
    o.require(cmp.sequential.c == ref, "baseline product wrong at n=" + std::to_string(n));
    o.require(cmp.forkjoin.c == ref, "fork-join product wrong at n=" + std::to_string(n));
    const double s = cmp.speedup();
    speeds += (speeds.empty() ? "" : " ") + std::to_string(n) + ":" + fmt("%.3f", s);
    o.require(s + 1e-12 >= prev, "speedup decreases at n=" + std::to_string(n));
    o.require(s >= 4.0 && s <= 12.0, "speedup " + fmt("%.3f", s) + " outside [4, 12] at n=" +
                                         std::to_string(n));
    prev = s;
  }
  o.detail = (o.pass ? "" : o.detail + " | ") + "speedups " + speeds;
  return o;
}

// ---------------------------------------------------------------------------
// 5. Issue period max(T, C) and density bound.

Outcome criterion_5() {
  Outcome o;
  const char* kLoop = "loop:\n addi t0, t0, 1\n addi t1, t1, 3\n xor t2, t0, t1\n j loop\n";
  const auto prog = assembler::assemble(kLoop);
  for (unsigned c : {4u, 3u, 6u}) {
    for (unsigned t = 1; t <= 16; ++t) {
      PeConfig pc;
      pc.c = c;
      pc.d = 16;
      Pe pe(pc, Geometry{});
      pe.load_image(0, prog.words);
      for (unsigned i = 0; i < t; ++i) pe.activate(0);
      for (int i = 0; i < 64; ++i) pe.tick();  // warm-up
      std::map<Sid, std::vector<std::uint64_t>> issues;
      pe.set_trace([&](const TraceRecord& r) {
        if (r.kind == TraceKind::Issue) issues[*r.sid].push_back(r.micro_cycle);
      });
      const std::uint64_t issued0 = pe.stats().issued;
      for (int i = 0; i < 10000; ++i) pe.tick();
      const unsigned period = std::max(t, c);
      bool exact = issues.size() == t;
      for (const auto& [sid, v] : issues) {
        for (std::size_t i = 1; i < v.size(); ++i) exact &= v[i] - v[i - 1] == period;
      }
      o.require(exact, "period != max(T, C) for C=" + std::to_string(c) + " T=" + std::to_string(t));
      const double density = static_cast<double>(pe.stats().issued - issued0) / 10000.0;
      o.require(density <= 1.0, "issue density above 1");
      perf::PerfParams pp{181.0, c, 16, 0.93, 549.0};
      std::vector<double> rates;
      for (const auto& [sid, v] : issues) {
        rates.push_back(549.0 * static_cast<double>(v.size()) / 10000.0);
      }
      o.require(!perf::aggregate_rate(pp, rates).violation, "aggregate rate above Fcsr");
    }
  }
  if (o.pass) o.detail = "C in {3,4,6}, T = 1..16: every interval equals max(T, C)";
  return o;
}

// ---------------------------------------------------------------------------
// 6. Thread independence.

/// Random straight-line-with-forward-branches program for thread `slot`.
/// Code lives at slot * 0x800, data at slot * 0x800 + 0x400 via s0.
std::vector<std::uint32_t> independent_program(std::mt19937_64& rng, unsigned slot) {
  auto u = [&](std::uint32_t lo, std::uint32_t hi) {
    return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
  };
  const auto rd = [&] {
    unsigned r;
    do r = u(0, 31); while (r == 8);
    return r;
  };
  const std::uint32_t data = slot * 0x800 + 0x400;
  std::vector<std::uint32_t> w;
  w.push_back(ref::lui(8, data >> 12));
  w.push_back(ref::addi(8, 8, static_cast<std::int32_t>(data & 0xFFF)));
  constexpr unsigned kBody = 60;
  const std::size_t body_start = w.size();
  for (unsigned i = 0; i < kBody; ++i) {
    const unsigned remaining = kBody - i;  // words up to and including the closing jump
    const std::uint32_t pick = u(0, 99);
    if (pick < 30) {
      static constexpr std::uint32_t kF7[] = {0x00, 0x20, 0x01};
      const std::uint32_t f7 = kF7[u(0, 2)];
      std::uint32_t f3 = u(0, 7);
      if (f7 == 0x20) f3 = u(0, 1) ? 0 : 5;
      w.push_back(ref::r_type(f7, f3, rd(), u(0, 31), u(0, 31)));
    } else if (pick < 55) {
      const std::uint32_t f3 = u(0, 7);
      std::int32_t imm = static_cast<std::int32_t>(u(0, 4095)) - 2048;
      if (f3 == 1 || f3 == 5) imm = static_cast<std::int32_t>(u(0, 31) | (f3 == 5 && u(0, 1) ? 0x400 : 0));
      w.push_back(ref::i_type(0x13, f3, rd(), u(0, 31), imm));
    } else if (pick < 70) {
      static constexpr std::uint32_t kF3[] = {0, 1, 2, 4, 5};
      const std::uint32_t f3 = kF3[u(0, 4)];
      const unsigned width = f3 == 2 ? 4 : (f3 & 3) == 1 ? 2 : 1;
      w.push_back(ref::i_type(0x03, f3, rd(), 8, static_cast<std::int32_t>(u(0, 1020 / width) * width)));
    } else if (pick < 85) {
      const std::uint32_t f3 = u(0, 2);
      const unsigned width = 1u << f3;
      w.push_back(ref::s_type(f3, 8, u(0, 31), static_cast<std::int32_t>(u(0, 1020 / width) * width)));
    } else if (pick < 95) {
      static constexpr std::uint32_t kF3[] = {0, 1, 4, 5, 6, 7};
      const std::int32_t off = 4 * static_cast<std::int32_t>(u(1, remaining));
      w.push_back(ref::b_type(kF3[u(0, 5)], u(0, 31), u(0, 31), off));
    } else {
      w.push_back(ref::u_type(u(0, 1) ? 0x37 : 0x17, rd(), u(0, 0xFFFFF)));
    }
  }
  const auto back = -4 * static_cast<std::int32_t>(w.size() - body_start);
  w.push_back(ref::jal(0, back));
  return w;
}

std::vector<core::ArchState> designated_trace(const std::vector<std::vector<std::uint32_t>>& progs,
                                              bool with_others, std::size_t passes,
                                              std::uint64_t* other_passes = nullptr) {
  PeConfig pc;
  Pe pe(pc, Geometry{});
  for (unsigned s = 0; s < progs.size(); ++s) pe.load_image(s * 0x800, progs[s]);
  std::vector<core::ArchState> trace;
  pe.set_retire_observer([&](Sid sid, const core::ArchState& st) {
    if (sid == 0) {
      trace.push_back(st);
    } else if (other_passes) {
      ++*other_passes;
    }
  });
  pe.activate(0);
  if (with_others) {
    for (unsigned s = 1; s < progs.size(); ++s) pe.activate(s * 0x800);
  }
  while (trace.size() < passes && pe.tc().slot(0).live()) pe.tick();
  return trace;
}

Outcome criterion_6() {
  Outcome o;
  std::mt19937_64 rng(0x5EED);
  unsigned divs = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<std::uint32_t>> progs;
    for (unsigned s = 0; s < 16; ++s) progs.push_back(independent_program(rng, s));
    for (std::uint32_t w : progs[0]) divs += core::is_division(core::decode(w).op);
    const auto alone = designated_trace(progs, false, 500);
    std::uint64_t others = 0;
    const auto shared = designated_trace(progs, true, 500, &others);
    o.require(others >= 500, "co-residents barely ran in trial " + std::to_string(trial));
    o.require(alone.size() == 500, "designated thread stopped early in trial " + std::to_string(trial));
    o.require(alone == shared, "trace differs in trial " + std::to_string(trial));
    if (!o.pass) break;
  }
  o.require(divs > 0, "no division exercised");
  if (o.pass) o.detail = "100 programs x 500 macro-cycles, alone == with 15 co-residents";
  return o;
}

// ---------------------------------------------------------------------------
// 7. Fork-join protocol.

std::string forkjoin_script(unsigned k) {
  std::ostringstream s;
  s << ".equ TC, 0x80000000\n.equ K, " << k << "\n" << R"(
mt:
  lui  s0, %hi(TC)
  li   s1, K
  li   t0, child
spawn:
  sw   t0, 0x10(s0)
  addi s1, s1, -1
  bnez s1, spawn
  lw   t1, 0x10(s0)
  sw   t1, 0x700(x0)
  lw   t2, 0x14(s0)
  li   t3, 1
  sll  t3, t3, t2
  beqz t1, joined
  sw   t3, 0x08(s0)
joined:
  lw   t1, 0x10(s0)
  sw   t1, 0x704(x0)
  li   t4, 0x600D
  sw   t4, 0x708(x0)
  sw   x0, 4(s0)
child:
  lui  s0, %hi(TC)
  lw   a0, 0x14(s0)
  slli t1, a0, 3
  addi t0, t1, 40
spin:
  addi t0, t0, -1
  bnez t0, spin
  sw   x0, 4(s0)
)";
  return s.str();
}

Outcome criterion_7() {
  Outcome o;
  for (unsigned k = 1; k <= 15; ++k) {
    const std::string tag = " (k=" + std::to_string(k) + ")";
    PeConfig pc;
    Pe pe(pc, Geometry{});
    const auto prog = assembler::assemble(forkjoin_script(k));
    pe.load_image(0, prog.words);
    std::vector<std::uint64_t> exits;
    const Sid mt = *pe.activate(0);
    pe.set_trace([&](const TraceRecord& r) {
      if (r.kind == TraceKind::Exit && r.sid != mt) exits.push_back(r.micro_cycle);
    });
    NullInjector none;
    std::vector<std::uint32_t> ac_seq{0};
    bool was_stalled = false, ever_stalled = false;
    std::optional<std::uint64_t> resume;
    while (pe.tc().live_count() != 0 && pe.now() < 200000) {
      const std::uint64_t cycle = pe.now();
      pe.tick();
      if (!pe.tc().slot(mt).live()) continue;
      const MmioResult r = pe.mmio_access(mt, core::MemKind::Load, kSfrBase + sfr::kActivateCount, 4, 0, none);
      if (r.mem.value != ac_seq.back()) ac_seq.push_back(r.mem.value);
      const bool stalled = pe.tc().slot(mt).state == ThreadState::Stalled;
      ever_stalled |= stalled;
      if (was_stalled && !stalled && !resume) resume = cycle;
      was_stalled = stalled;
    }
    std::vector<std::uint32_t> expect;
    for (unsigned v = 0; v <= k; ++v) expect.push_back(v);
    for (unsigned v = k; v-- > 0;) expect.push_back(v);
    o.require(pe.tc().live_count() == 0, "did not finish" + tag);
    o.require(ever_stalled, "main thread never stalled" + tag);
    o.require(exits.size() == k, "exit count" + tag);
    o.require(ac_seq == expect, "AC sequence mismatch" + tag);
    o.require(pe.read_word(0x700) == k, "in-program AC read" + tag);
    o.require(pe.read_word(0x704) == 0 && pe.read_word(0x708) == 0x600D, "post-join state" + tag);
    o.require(resume && !exits.empty() && *resume == exits.back(),
              "resume cycle " + std::to_string(resume.value_or(0)) + " != last exit " +
                  std::to_string(exits.empty() ? 0 : exits.back()) + tag);
    if (!o.pass) break;
  }
  if (o.pass) o.detail = "k = 1..15: resume on the k-th exit, AC k..0 observed";
  return o;
}

// ---------------------------------------------------------------------------
// 8. Stack sharing and watchdog.

Outcome criterion_8() {
  Outcome o;
  {
    PeConfig pc;
    pc.d = 8;
    pc.stack = {2, 256};
    Pe pe(pc, Geometry{});
    const auto prog = assembler::assemble(R"(
      lui  s0, 0x80000
      lw   a0, 0x14(s0)
      lui  sp, 0x40000
      addi sp, sp, 256
      addi sp, sp, -8
      addi t0, a0, 100
      sw   t0, 4(sp)
      li   t1, 60
    spin:
      addi t1, t1, -1
      bnez t1, spin
      lw   t2, 4(sp)
      slli t3, a0, 2
      sw   t2, 0x600(t3)
      sw   x0, 4(s0)
    )");
    pe.load_image(0, prog.words);
    for (int i = 0; i < 6; ++i) pe.activate(0);
    bool invariant = true;
    std::size_t max_waiters = 0;
    while (pe.tc().live_count() != 0 && pe.now() < 100000) {
      pe.tick();
      invariant &= pe.stack().tlb().check_invariants(&pe.tc()).empty();
      max_waiters = std::max(max_waiters, pe.stack().tlb().wait_set().size());
    }
    o.require(pe.tc().live_count() == 0, "stack users did not all complete");
    o.require(invariant, "owner-exclusion invariant violated");
    o.require(max_waiters > 0, "no thread ever waited for a range");
    for (std::uint32_t s = 0; s < 6; ++s) {
      o.require(pe.read_word(0x600 + 4 * s) == 100 + s, "wrong value popped by SID " + std::to_string(s));
    }
  }
  {
    // Owners grab a range and stall forever; the rest wait for a range.
    PeConfig pc;
    pc.d = 8;
    pc.stack = {2, 256};
    pc.watchdog_window = 500;
    Pe pe(pc, Geometry{});
    const auto prog = assembler::assemble(R"(
      lui  s0, 0x80000
      lw   a0, 0x14(s0)
      lui  sp, 0x40000
      sw   a0, 0(sp)
      li   t0, 1
      sll  t0, t0, a0
      sw   t0, 0x08(s0)
    never:
      j    never
    )");
    pe.load_image(0, prog.words);
    for (int i = 0; i < 6; ++i) pe.activate(0);
    std::uint64_t last_issue = 0;
    while (pe.stats().watchdog_events == 0 && pe.now() < 100000) {
      if (pe.tick().issued) last_issue = pe.now() - 1;
    }
    o.require(pe.stats().watchdog_events == 1, "watchdog did not fire");
    o.require(pe.now() - 1 - last_issue <= 500,
              "watchdog fired " + std::to_string(pe.now() - 1 - last_issue) + " cycles after last issue");
  }
  if (o.pass) o.detail = "R=2, 6 threads complete; deadlock flagged within 500 micro-cycles";
  return o;
}

// ---------------------------------------------------------------------------
// 9. Fabric storm.

Outcome criterion_9() {
  Outcome o;
  System sys(SystemConfig{});
  const Geometry& g = sys.geometry();
  std::mt19937_64 rng(99);
  using Key = std::tuple<std::size_t, std::size_t, std::uint32_t>;  // src, dst, data
  std::vector<Key> sent, got;
  std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> next_seq, want_seq;
  bool fifo = true;
  sys.set_delivery_observer([&](Coord at, const Packet& p, std::uint64_t) {
    const auto s = g.index(p.src), d = g.index(at);
    got.emplace_back(s, d, p.data);
    fifo &= (p.data >> 8) == want_seq[{s, d}]++;
  });
  for (int i = 0; i < 10000; ++i) {
    const std::size_t s = rng() % 16, d = rng() % 16;
    const Coord dc = g.coord(d);
    const GlobalAddress ga = dc == g.support
                                 ? GlobalAddress{dc, Region::Support, 4 * static_cast<std::uint32_t>(rng() % 64)}
                                 : GlobalAddress{dc, Region::PeRam, 0x8000 + 4 * static_cast<std::uint32_t>(rng() % 64)};
    const std::uint32_t data = (next_seq[{s, d}]++ << 8) | static_cast<std::uint32_t>(s << 4 | d);
    sys.inject(g.coord(s), ga, data);
    sent.emplace_back(s, d, data);
  }
  std::uint64_t max_stagnant = 0, saturated_cycles = 0;
  while (!sys.network_idle() && sys.now() < 1'000'000) {
    sys.step();
    max_stagnant = std::max(max_stagnant, sys.stagnant_cycles());
    std::size_t occupied = 0;
    for (std::size_t i = 0; i < g.nx * g.ny; ++i) occupied += sys.re(g.coord(i)).occupancy();
    saturated_cycles += occupied >= 16 * 3;
  }
  std::sort(sent.begin(), sent.end());
  std::sort(got.begin(), got.end());
  o.require(sys.network_idle(), "network did not drain");
  o.require(got.size() == 10000, "delivered " + std::to_string(got.size()));
  o.require(sent == got, "delivered multiset differs from injected");
  o.require(fifo, "per-(src, dest) order violated");
  o.require(max_stagnant == 0, "no progress for " + std::to_string(max_stagnant) + " cycles");
  o.require(saturated_cycles > 0, "storm never saturated the mesh");
  if (o.pass) {
    o.detail = "10000 packets in " + std::to_string(sys.now()) + " micro-cycles, " +
               std::to_string(saturated_cycles) + " saturated cycles, no stagnation";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 10. DMA.

struct RandomInjector {
  std::mt19937_64* rng;
  std::vector<Packet> sent;
  bool try_inject(const Packet& p) {
    if ((*rng)() % 4 == 0) return false;
    sent.push_back(p);
    return true;
  }
};

Outcome criterion_10() {
  Outcome o;
  const Geometry geo;
  std::vector<std::uint8_t> ram(geo.ram_size);
  std::mt19937_64 rng(10);
  for (auto& b : ram) b = static_cast<std::uint8_t>(rng());
  for (int trial = 0; trial < 500; ++trial) {
    DmaEngine dma;
    const std::uint32_t len = 1 + static_cast<std::uint32_t>(rng() % 256);
    const std::uint32_t sa = 4 * static_cast<std::uint32_t>(rng() % (geo.ram_size / 4 - len));
    const std::uint32_t ta = 4 * static_cast<std::uint32_t>(rng() % (geo.ram_size / 4 - len));
    const Coord dst{1 + static_cast<unsigned>(rng() % 3), static_cast<unsigned>(rng() % 4)};
    dma.write_sfr(sfr::kDmaSa, sa, geo);
    dma.write_sfr(sfr::kDmaL, len, geo);
    if (dma.write_sfr(sfr::kDmaTa, encode_global({dst, Region::PeRam, ta}), geo) != DmaWrite::Accepted) {
      o.require(false, "valid transfer refused");
      break;
    }
    RandomInjector inj{&rng, {}};
    bool rejected_ok = true;
    while (dma.active()) {
      if (rng() % 16 == 0) {
        rejected_ok &= dma.write_sfr(sfr::kDmaSa, 0, geo) == DmaWrite::Rejected;
        rejected_ok &= (dma.read_sfr(sfr::kDmaStat) & 2u) != 0;
        rejected_ok &= dma.dmasa() == sa;
      }
      dma.step(ram, inj, {1, 0});
    }
    o.require(rejected_ok, "write while active not rejected");
    o.require(inj.sent.size() == len, "packet count != DMAL");
    for (std::uint32_t i = 0; i < inj.sent.size() && o.pass; ++i) {
      std::uint32_t w;
      std::memcpy(&w, &ram[sa + 4 * i], 4);
      o.require(inj.sent[i].dest == GlobalAddress{dst, Region::PeRam, ta + 4 * i} && inj.sent[i].data == w,
                "packet " + std::to_string(i) + " out of order or wrong data");
    }
    if (!o.pass) break;
  }
  // The same rule as seen by a thread through its SFR window.
  {
    SystemConfig sc;
    System sys(sc);
    Pe& pe = sys.pe({1, 0});
    const auto prog = assembler::assemble(R"(
      lui  s0, 0x80000
      li   t0, 0x1000
      sw   t0, 0x20(s0)
      li   t0, 64
      sw   t0, 0x24(s0)
      li   t0, 0xC8400000      # (2,1) PE-RAM 0
      sw   t0, 0x28(s0)
      li   t1, 0x2000
      sw   t1, 0x20(s0)        # rejected: transfer running
      lw   t2, 0x2C(s0)
      sw   t2, 0x600(x0)
      lw   t3, 0x20(s0)
      sw   t3, 0x604(x0)
    wait:
      lw   t2, 0x2C(s0)
      andi t2, t2, 1
      bnez t2, wait
      sw   x0, 4(s0)
    )");
    pe.load_image(0, prog.words);
    for (std::uint32_t i = 0; i < 64; ++i) pe.write_word(0x1000 + 4 * i, 0xD0000000u + i);
    pe.activate(0);
    while (!sys.quiescent() && sys.now() < 100000) sys.step();
    o.require((pe.read_word(0x600) & 3u) == 3u, "DMASTAT after rejected write = " + std::to_string(pe.read_word(0x600)));
    o.require(pe.read_word(0x604) == 0x1000, "DMASA changed while active");
    bool data_ok = true;
    for (std::uint32_t i = 0; i < 64; ++i) data_ok &= sys.pe({2, 1}).read_word(4 * i) == 0xD0000000u + i;
    o.require(data_ok, "mesh transfer data wrong");
  }
  if (o.pass) o.detail = "500 transfers under random backpressure; busy writes rejected with status bit";
  return o;
}

// ---------------------------------------------------------------------------
// 11. Runtime reconfiguration.

Outcome criterion_11() {
  Outcome o;
  const auto worker = assembler::assemble(R"(
    li   t0, 0
    li   t1, 3000
  loop:
    addi t0, t0, 1
    andi t2, t0, 0xff
    sw   t2, 0x600(x0)
    bne  t0, t1, loop
    lui  t3, 0x80000
    sw   x0, 4(t3)
  )");
  const auto old_prog = assembler::assemble("li t0, 1\nli t4, 0x2800\nsw t0, 0(t4)\nlui t3, 0x80000\nsw x0, 4(t3)\n", 0x2000);
  const auto new_prog = assembler::assemble(R"(
    li   t0, 0
    li   t1, 100
  sum:
    add  t0, t0, t1
    addi t1, t1, -1
    bnez t1, sum
    li   t4, 0x2800
    sw   t0, 0(t4)
    lui  t3, 0x80000
    sw   x0, 4(t3)
  )", 0x2000);

  const auto run = [&](bool reconfigure, std::uint32_t* result) {
    System sys(SystemConfig{});
    const Coord at{1, 0};
    sys.configure_stream({at, Region::PeRam, 0}, worker.words, 0);
    sys.configure_stream({at, Region::PeRam, 0x2000}, old_prog.words);
    std::vector<core::ArchState> trace;
    sys.pe(at).set_retire_observer([&](Sid sid, const core::ArchState& st) {
      if (sid == 0) trace.push_back(st);
    });
    while (sys.pe(at).stats().issued < 200) sys.step();
    if (reconfigure) sys.configure_stream({at, Region::PeRam, 0x2000}, new_prog.words, 0x2000);
    while (!sys.quiescent() && sys.now() < 1'000'000) sys.step();
    *result = sys.pe(at).read_word(0x2800);
    return trace;
  };
  std::uint32_t r_plain = 0, r_reconf = 0;
  const auto plain = run(false, &r_plain);
  const auto reconf = run(true, &r_reconf);
  o.require(plain.size() > 3000, "worker trace too short");
  o.require(plain == reconf, "worker trace changed by reconfiguration");
  o.require(r_reconf == 5050, "new program result " + std::to_string(r_reconf));
  o.require(r_plain == 0, "old program ran without being started");
  if (o.pass) o.detail = "worker trace identical over " + std::to_string(plain.size()) + " passes; new program result 5050";
  return o;
}

// ---------------------------------------------------------------------------
// 12. ISA conformance.

Outcome criterion_12() {
  Outcome o;
  const difftest::DiffResult r = difftest::run_differential(0xC0FFEE, 1'000'000);
  o.require(r.instructions == 1'000'000, "ran " + std::to_string(r.instructions) + " instructions");
  o.require(r.mismatches == 0, "mismatch: " + r.first_mismatch);
  if (o.pass) {
    o.detail = "1000000 instructions, " + std::to_string(r.faults) + " faults, " +
               std::to_string(r.divisions) + " divisions, 0 mismatches";
  }
  return o;
}

struct Criterion {
  int id;
  double budget_s;
  Outcome (*fn)();
};

constexpr Criterion kCriteria[] = {
    {1, 1, criterion_1},   {2, 1, criterion_2},    {3, 1, criterion_3},
    {4, 10, criterion_4},  {5, 5, criterion_5},    {6, 30, criterion_6},
    {7, 5, criterion_7},   {8, 5, criterion_8},    {9, 30, criterion_9},
    {10, 5, criterion_10}, {11, 5, criterion_11},  {12, 60, criterion_12},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  bool all_pass = true;
  bool ran = false;
  for (const Criterion& c : kCriteria) {
    if (only && c.id != only) continue;
    ran = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      out.pass = false;
      out.detail += " (took " + fmt("%.2f", secs) + " s, budget " + fmt("%.0f", c.budget_s) + " s)";
    }
    std::printf("%s criterion %d: %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", c.id, out.detail.c_str(), secs);
    all_pass &= out.pass;
  }
  if (!ran) {
    std::fprintf(stderr, "no such criterion\n");
    return 2;
  }
  return all_pass ? 0 : 1;
}
