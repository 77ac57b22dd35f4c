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

// Library side of the command-line tool: manifest runs and report rendering.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hpra/assembler.hpp"
#include "hpra/bench.hpp"
#include "hpra/config.hpp"
#include "hpra/fabric.hpp"
#include "hpra/perf.hpp"
#include "hpra/trace.hpp"

namespace hpra::cli {

enum ExitCode : int { kExitOk = 0, kExitProgramError = 1, kExitConfigError = 2 };

struct LoadedImage {
  std::vector<std::uint32_t> words;
  std::optional<std::uint32_t> start;
};

inline std::vector<std::uint32_t> words_from_bytes(const std::string& bytes, const std::string& what) {
  if (bytes.size() % 4 != 0) throw config::ConfigError(what + ": size is not a multiple of 4");
  std::vector<std::uint32_t> w(bytes.size() / 4);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 3])) << 24;
  }
  return w;
}

inline std::string bytes_from_words(std::span<const std::uint32_t> words) {
  std::string out(words.size() * 4, '\0');
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (unsigned b = 0; b < 4; ++b) out[4 * i + b] = static_cast<char>(words[i] >> (8 * b));
  }
  return out;
}

inline std::optional<std::uint32_t> parse_number(const std::string& s) {
  std::string v = s;
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    v = v.substr(2);
    base = 16;
  }
  std::uint32_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) return std::nullopt;
  return out;
}

/// Reads an image file. Assembly sources are assembled at the load offset
/// and may name their start symbol.
inline LoadedImage load_image(const config::ImageSpec& spec, std::uint32_t ram_size) {
  LoadedImage img;
  const std::string where = spec.file.string();
  const std::string text = config::read_file(spec.file);
  std::optional<assembler::Program> prog;
  if (spec.file.extension() == ".s" || spec.file.extension() == ".S") {
    prog = assembler::assemble(text, spec.offset);
    img.words = prog->words;
  } else {
    img.words = words_from_bytes(text, where);
  }
  if (img.words.size() > (ram_size - spec.offset) / 4) {
    throw config::ConfigError(where + ": image does not fit in PE-RAM");
  }
  if (spec.start) {
    img.start = parse_number(*spec.start);
    if (!img.start && prog) {
      const auto it = prog->symbols.find(*spec.start);
      if (it != prog->symbols.end()) img.start = it->second;
    }
    if (!img.start) throw config::ConfigError(where + ": unknown start '" + *spec.start + "'");
  }
  return img;
}

enum class RunStatus { Ok, Trap, Watchdog, LimitExceeded };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Trap: return "trap";
    case RunStatus::Watchdog: return "watchdog";
    case RunStatus::LimitExceeded: return "limit-exceeded";
  }
  return "?";
}

struct PeSummary {
  Coord at;
  PeStats stats;
};

struct RunResult {
  RunStatus status = RunStatus::Ok;
  std::uint64_t micro_cycles = 0;
  double wallclock_ns = 0;
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t support_faults = 0;
  std::vector<PeSummary> pes;
  std::unique_ptr<System> system;

  int exit_code() const { return status == RunStatus::Ok ? kExitOk : kExitProgramError; }
};

struct RunOptions {
  std::optional<std::uint64_t> limit;
  TraceSink trace;
  // Shuffle the cluster commit order every micro-cycle with this seed.
  std::optional<std::uint64_t> permute_seed;
  bool stop_on_watchdog = true;
};

inline constexpr std::uint64_t kDefaultLimit = 10'000'000;

/// Streams every image through the host bridge, starts the listed threads,
/// and steps until the system is quiescent or a stop condition hits.
inline RunResult run_manifest(const config::Manifest& m, const RunOptions& opt = {}) {
  RunResult res;
  res.system = std::make_unique<System>(m.config.system);
  System& sys = *res.system;
  if (opt.trace) sys.set_trace(opt.trace);

  for (const config::ImageSpec& spec : m.images) {
    const LoadedImage img = load_image(spec, m.config.system.pe.ram_size);
    sys.configure_stream({spec.cluster, Region::PeRam, spec.offset}, img.words);
    if (img.start) {
      for (unsigned t = 0; t < spec.threads; ++t) sys.start_thread(spec.cluster, *img.start);
    }
  }

  const std::uint64_t limit = opt.limit.value_or(m.max_cycles.value_or(kDefaultLimit));
  std::vector<std::size_t> order(sys.cluster_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(opt.permute_seed.value_or(0));
  const auto coords = sys.pe_coords();

  while (!sys.quiescent()) {
    if (sys.now() >= limit) {
      res.status = RunStatus::LimitExceeded;
      break;
    }
    if (opt.permute_seed) {
      std::shuffle(order.begin(), order.end(), rng);
      sys.step(order);
    } else {
      sys.step();
    }
    if (opt.stop_on_watchdog &&
        std::any_of(coords.begin(), coords.end(),
                    [&](Coord c) { return sys.pe(c).stats().watchdog_events > 0; })) {
      res.status = RunStatus::Watchdog;
      break;
    }
  }

  for (Coord c : coords) {
    const PeStats& st = sys.pe(c).stats();
    if (res.status == RunStatus::Ok && st.traps > 0) res.status = RunStatus::Trap;
    res.pes.push_back({c, st});
  }
  res.micro_cycles = sys.now();
  res.wallclock_ns = perf::wallclock_ns(res.micro_cycles, m.config.perf);
  res.injected = sys.injected_total();
  res.delivered = sys.delivered_total();
  res.support_faults = sys.support().faults();
  return res;
}

// ---------------------------------------------------------------------------
// Tables

using Table = std::vector<std::vector<std::string>>;

inline std::string render_text(const Table& t) {
  std::vector<std::size_t> w;
  for (const auto& row : t) {
    if (w.size() < row.size()) w.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::max(w[i], row[i].size());
  }
  std::ostringstream os;
  for (const auto& row : t) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "  ";
      line += row[i];
      if (i + 1 < row.size()) line.append(w[i] - row[i].size(), ' ');
    }
    os << line << '\n';
  }
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string render_csv(const Table& t) {
  std::ostringstream os;
  for (const auto& row : t) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << '\n';
  }
  return os.str();
}

inline std::string opt_fixed(const std::optional<double>& v, int d) {
  return v ? perf::fixed(*v, d) : std::string();
}

inline Table area_table(std::span<const perf::PpaRow> rows) {
  Table t{{"Module", "Size [occS]", "Perf. [MHz]", "PpA [MHz/occS]", "Module", "Size [occS]",
           "Perf. [MHz]", "PpA [MHz/occS]", "dPpA [%]"}};
  for (const perf::PpaRow& r : rows) {
    t.push_back({r.a.name, perf::fixed(r.a.size, 0), opt_fixed(r.a.perf, 0), opt_fixed(r.ppa_a, 2),
                 r.b.name, perf::fixed(r.b.size, 0), opt_fixed(r.b.perf, 0), opt_fixed(r.ppa_b, 2),
                 r.dppa ? std::to_string(*r.dppa) : std::string()});
  }
  return t;
}

/// Matmul timing, one column per matrix size as in the published layout.
inline Table matmul_table(std::span<const perf::MatmulRow> rows) {
  Table t{{"", "unit"}, {"RV", "ns"}, {"SHP", "ns"}, {"Diff.", "%"}};
  for (const perf::MatmulRow& r : rows) {
    t[0].push_back(std::to_string(r.n) + "x" + std::to_string(r.n));
    t[1].push_back(perf::fixed(r.baseline_ns, 0));
    t[2].push_back(perf::fixed(r.shp_ns, 0));
    t[3].push_back(perf::fixed(100.0 * r.speedup(), 0));
  }
  return t;
}

inline Table matmul_csv_table(std::span<const perf::MatmulRow> rows) {
  Table t{{"n", "baseline_cycles", "baseline_ns", "shp_micro_cycles", "shp_ns", "diff_pct"}};
  for (const perf::MatmulRow& r : rows) {
    t.push_back({std::to_string(r.n), std::to_string(r.baseline_cycles), perf::fixed(r.baseline_ns, 2),
                 std::to_string(r.shp_micro_cycles), perf::fixed(r.shp_ns, 2),
                 perf::fixed(100.0 * r.speedup(), 2)});
  }
  return t;
}

inline Table partition_text_table(std::span<const perf::PartitionRow> rows, const perf::PerfParams& p) {
  Table t{{"Implementation", "Threads per System", "Threads per Cluster", "Data Sharing per Cluster",
           "Performance per Cluster", "Performance per Thread", "Performance Penalties"}};
  for (const perf::PartitionRow& r : rows) {
    std::string threads = std::to_string(r.threads_per_system);
    if (r.implementation.find("min") != std::string::npos) threads += " (C = " + std::to_string(p.c) + ")";
    if (r.implementation.find("max") != std::string::npos) threads += " (D = " + std::to_string(p.d) + ")";
    t.push_back({r.implementation, threads, std::to_string(r.threads_per_cluster),
                 r.data_sharing ? "yes" : "no", perf::fixed(r.cluster_mhz, 0) + " MHz",
                 perf::fixed(r.thread_mhz, 2) + " MHz",
                 r.penalty ? (*r.penalty ? "yes" : "no") : ""});
  }
  return t;
}

inline Table partition_csv_table(std::span<const perf::PartitionRow> rows) {
  Table t{{"implementation", "threads_per_system", "threads_per_cluster", "data_sharing",
           "cluster_mhz", "thread_mhz", "penalty"}};
  for (const perf::PartitionRow& r : rows) {
    t.push_back({r.implementation, std::to_string(r.threads_per_system),
                 std::to_string(r.threads_per_cluster), r.data_sharing ? "yes" : "no",
                 perf::fixed(r.cluster_mhz, 2), perf::fixed(r.thread_mhz, 2),
                 r.penalty ? (*r.penalty ? "yes" : "no") : ""});
  }
  return t;
}

inline unsigned pe_cluster_count(const SystemConfig& s) { return s.geo.nx * s.geo.ny - 1; }

inline std::string render_summary(const RunResult& r, const perf::PerfParams& p) {
  std::ostringstream os;
  os << "status: " << to_string(r.status) << '\n'
     << "micro_cycles: " << r.micro_cycles << '\n'
     << "wallclock_ns: " << perf::fixed(r.wallclock_ns, 2) << " (at "
     << perf::fixed(perf::fcsr_eff(p), 2) << " MHz)\n"
     << "packets: injected " << r.injected << ", delivered " << r.delivered
     << ", support faults " << r.support_faults << '\n';
  Table t{{"pe", "issued", "bubbles", "density", "stalls", "stackwaits", "traps", "watchdog",
           "pkt_out", "pkt_in"}};
  for (const PeSummary& s : r.pes) {
    const PeStats& st = s.stats;
    if (st.issued == 0 && st.packets_in == 0 && st.packets_out == 0) continue;
    t.push_back({"(" + std::to_string(s.at.x) + "," + std::to_string(s.at.y) + ")",
                 std::to_string(st.issued), std::to_string(st.bubbles),
                 perf::fixed(st.issue_density(), 4), std::to_string(st.stall_events),
                 std::to_string(st.stackwait_events), std::to_string(st.traps),
                 std::to_string(st.watchdog_events), std::to_string(st.packets_out),
                 std::to_string(st.packets_in)});
  }
  if (t.size() > 1) os << render_text(t);
  return os.str();
}

}  // namespace hpra::cli
