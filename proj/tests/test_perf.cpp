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

#include <gtest/gtest.h>

#include <vector>

#include "hpra/perf.hpp"

namespace {

using namespace hpra::perf;

// Independent evaluation by repeated multiplication.
double oracle_fcsr(double f, unsigned c, double r) {
  double x = f * c;
  for (unsigned i = 0; i < c; ++i) x *= r;
  return x;
}

TEST(Perf, ClockEstimate) {
  PerfParams p;
  p.f_csr_measured.reset();
  EXPECT_NEAR(f_csr(p), oracle_fcsr(181, 4, 0.93), 1e-9);
  EXPECT_EQ(fixed(f_csr(p), 2), "541.59");
  p.f_orig = 60;
  EXPECT_EQ(fixed(f_csr(p), 2), "179.53");
  p.c = 1;
  EXPECT_NEAR(f_csr(p), 60 * 0.93, 1e-12);
}

TEST(Perf, MeasuredOverride) {
  PerfParams p;
  p.f_csr_measured = 549;
  EXPECT_DOUBLE_EQ(fcsr_eff(p), 549.0);
  EXPECT_DOUBLE_EQ(thread_rate(p, 4), 137.25);
  EXPECT_EQ(fixed(thread_rate(p, 4), 0), "137");
  EXPECT_DOUBLE_EQ(thread_rate(p, 1), 137.25);
  EXPECT_DOUBLE_EQ(thread_rate(p, 16), 549.0 / 16);
}

TEST(Perf, ThreadRateDomain) {
  PerfParams p;
  EXPECT_THROW(thread_rate(p, 0), DomainError);
  EXPECT_THROW(thread_rate(p, 17), DomainError);
}

TEST(Perf, ValidateRejects) {
  PerfParams p;
  p.r = 1.5;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.d = 2;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.f_csr_measured = -3;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(Perf, AggregateNeverExceedsBound) {
  PerfParams p;
  p.f_csr_measured = 549;
  for (unsigned t = 1; t <= p.d; ++t) {
    const std::vector<double> rates(t, thread_rate(p, t));
    const Aggregate a = aggregate_rate(p, rates);
    EXPECT_FALSE(a.violation) << t;
    EXPECT_LE(a.total, a.bound + 1e-9);
  }
  const std::vector<double> too_much(5, 549.0 / 4);
  EXPECT_TRUE(aggregate_rate(p, too_much).violation);
  EXPECT_FALSE(aggregate_rate(p, too_much, 2).violation);
}

TEST(Perf, Wallclock) {
  EXPECT_DOUBLE_EQ(wallclock_ns(549, 549.0), 1000.0);
  EXPECT_DOUBLE_EQ(wallclock_ns(181, 181.0), 1000.0);
}

TEST(Perf, PpaReport) {
  const auto rows = ppa_report(reference_area_records());
  ASSERT_EQ(rows.size(), 5u);
  // RV / SHP-RV, checked by direct division.
  EXPECT_EQ(fixed(*rows[0].ppa_a, 2), fixed(181.0 / 617, 2));
  EXPECT_EQ(fixed(*rows[0].ppa_b, 2), fixed(549.0 / 703, 2));
  EXPECT_EQ(*rows[0].dppa, std::lround(100.0 * (549.0 / 703) / (181.0 / 617)));
  EXPECT_FALSE(rows[1].ppa_a.has_value());
  EXPECT_FALSE(rows[1].dppa.has_value());
  EXPECT_EQ(*rows[4].dppa, std::lround(100.0 * (8235.0 / 11635) / (2715.0 / 11634)));
  AreaRecord bad{"x", 0, 1.0};
  EXPECT_THROW(ppa(bad), DomainError);
}

TEST(Perf, PartitionTable) {
  PerfParams p;
  p.f_csr_measured = 549;
  const auto rows = partition_table(p, 15);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].threads_per_system, 15u);
  EXPECT_EQ(rows[1].threads_per_system, 60u);
  EXPECT_EQ(rows[2].threads_per_system, 240u);
  EXPECT_FALSE(rows[0].data_sharing);
  EXPECT_TRUE(rows[1].data_sharing);
  EXPECT_DOUBLE_EQ(rows[0].thread_mhz, 181.0);
  EXPECT_DOUBLE_EQ(rows[1].cluster_mhz, 549.0);
  EXPECT_DOUBLE_EQ(rows[1].thread_mhz, 137.25);
  EXPECT_FALSE(*rows[1].penalty);
  EXPECT_TRUE(*rows[2].penalty);
}

}  // namespace
