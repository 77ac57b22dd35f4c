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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpra::perf {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Clock rates are in MHz throughout.
struct PerfParams {
  double f_orig = 181.0;
  unsigned c = 4;
  unsigned d = 16;
  double r = 0.93;
  std::optional<double> f_csr_measured;

  void validate() const {
    if (c < 1) throw DomainError("perf: c must be >= 1");
    if (d < c) throw DomainError("perf: d must be >= c");
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("perf: r must be in (0, 1]");
    if (!(f_orig > 0.0)) throw DomainError("perf: f_orig must be positive");
    if (f_csr_measured && !(*f_csr_measured > 0.0)) {
      throw DomainError("perf: measured clock must be positive");
    }
  }
};

/// Estimated clock of the sliced design: f_orig * c * r^c.
inline double f_csr(const PerfParams& p) {
  return p.f_orig * p.c * std::pow(p.r, static_cast<double>(p.c));
}

inline double fcsr_eff(const PerfParams& p) {
  return p.f_csr_measured ? *p.f_csr_measured : f_csr(p);
}

/// Share of the sliced clock one of `t_active` unstalled threads receives.
inline double thread_rate(const PerfParams& p, unsigned t_active) {
  if (t_active < 1 || t_active > p.d) {
    throw DomainError("thread_rate: t_active must be in 1..d");
  }
  return fcsr_eff(p) / std::max(t_active, p.c);
}

struct Aggregate {
  double total = 0.0;
  double bound = 0.0;
  bool violation = false;
};

/// Sums per-thread rates across `units` identical sliced cores and checks the
/// result against units * fcsr_eff.
inline Aggregate aggregate_rate(const PerfParams& p, std::span<const double> rates,
                                unsigned units = 1) {
  Aggregate a;
  a.total = std::accumulate(rates.begin(), rates.end(), 0.0);
  a.bound = units * fcsr_eff(p);
  a.violation = a.total > a.bound * (1.0 + 1e-9) + 1e-9;
  return a;
}

inline double wallclock_ns(std::uint64_t cycles, double mhz) {
  return static_cast<double>(cycles) * 1000.0 / mhz;
}
inline double wallclock_ns(std::uint64_t cycles, const PerfParams& p) {
  return wallclock_ns(cycles, fcsr_eff(p));
}

// ---------------------------------------------------------------------------
// Report shapes

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

struct AreaRecord {
  std::string name;
  double size = 0;  // occupied slices
  std::optional<double> perf;  // MHz
};

struct PpaRow {
  AreaRecord a;
  AreaRecord b;
  std::optional<double> ppa_a;
  std::optional<double> ppa_b;
  std::optional<long> dppa;  // percent, from unrounded PpA values
};

inline std::optional<double> ppa(const AreaRecord& r) {
  if (!(r.size > 0)) throw DomainError("ppa: size must be > 0");
  if (!r.perf) return std::nullopt;
  return *r.perf / r.size;
}

inline std::vector<PpaRow> ppa_report(std::span<const std::pair<AreaRecord, AreaRecord>> pairs) {
  std::vector<PpaRow> rows;
  for (const auto& [a, b] : pairs) {
    PpaRow row{a, b, ppa(a), ppa(b), std::nullopt};
    if (row.ppa_a && row.ppa_b) row.dppa = std::lround(100.0 * *row.ppa_b / *row.ppa_a);
    rows.push_back(row);
  }
  return rows;
}

/// The paired module rows of the area comparison, with sizes and clocks as
/// published for the 4x4 system.
inline std::vector<std::pair<AreaRecord, AreaRecord>> reference_area_records() {
  return {
      {{"RV", 617, 181}, {"SHP-RV", 703, 549}},
      {{"PE", 697, std::nullopt}, {"PE", 781, std::nullopt}},
      {{"RE", 103, std::nullopt}, {"RE", 103, std::nullopt}},
      {{"Support", 159, std::nullopt}, {"Support", 159, std::nullopt}},
      {{"CGRA", 11634, 2715}, {"HPRA", 11635, 8235}},
  };
}

struct PartitionRow {
  std::string implementation;
  unsigned threads_per_system = 0;
  unsigned threads_per_cluster = 0;
  bool data_sharing = false;
  double cluster_mhz = 0;
  double thread_mhz = 0;
  std::optional<bool> penalty;  // per-thread slowdown from co-residents
};

/// Threading options of an array with `clusters` PEs: unsliced core, sliced
/// with C threads, sliced with D threads.
inline std::vector<PartitionRow> partition_table(const PerfParams& p, unsigned clusters) {
  p.validate();
  const double fc = fcsr_eff(p);
  return {
      {"Single RV", clusters, 1, false, p.f_orig, p.f_orig, std::nullopt},
      {"SHP-ed RV min", clusters * p.c, p.c, true, fc, thread_rate(p, p.c),
       thread_rate(p, p.c) < fc / p.c},
      {"SHP-ed RV max", clusters * p.d, p.d, true, fc, thread_rate(p, p.d),
       thread_rate(p, p.d) < fc / p.c},
  };
}

struct MatmulRow {
  unsigned n = 0;
  double baseline_ns = 0;
  double shp_ns = 0;
  std::uint64_t baseline_cycles = 0;
  std::uint64_t shp_micro_cycles = 0;
  double speedup() const { return baseline_ns / shp_ns; }
};

}  // namespace hpra::perf
