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

#include <map>
#include <random>

#include "hpra/thread_controller.hpp"

namespace {

using namespace hpra;

const auto kContinue = [](Sid) { return PassOutcome::Continue; };

TEST(ThreadController, RejectsBadShape) {
  EXPECT_THROW(ThreadController(0, 4), std::invalid_argument);
  EXPECT_THROW(ThreadController(4, 3), std::invalid_argument);
  EXPECT_THROW(ThreadController(4, 33), std::invalid_argument);
}

TEST(ThreadController, ActivateUsesLowestFreeSlot) {
  ThreadController tc(4, 8);
  EXPECT_EQ(tc.activate(0x100), 0u);
  EXPECT_EQ(tc.activate(0x200), 1u);
  tc.exit_thread(0);
  EXPECT_EQ(tc.activate(0x300), 0u);
  EXPECT_EQ(tc.slot(0).context.pc, 0x300u);
  EXPECT_EQ(tc.slot(0).state, ThreadState::Active);
}

TEST(ThreadController, OverflowSetsStickyStatus) {
  ThreadController tc(2, 2);
  tc.activate(0);
  tc.activate(0);
  EXPECT_FALSE(tc.activate(0).has_value());
  EXPECT_EQ(tc.read_status(), 1u);
  EXPECT_EQ(tc.read_status(), 0u);
}

TEST(ThreadController, PassRetiresExactlyCMicroCyclesAfterIssue) {
  for (unsigned c = 2; c <= 8; ++c) {
    ThreadController tc(c, 8);
    tc.activate(0);
    std::vector<std::uint64_t> issue, retire;
    for (std::uint64_t t = 0; t < 10 * c; ++t) {
      const IssueRecord r = tc.step(kContinue);
      if (r.retired) retire.push_back(t);
      if (r.issued) issue.push_back(t);
      ASSERT_EQ(tc.check_invariants(), "");
    }
    ASSERT_GE(retire.size(), 3u);
    for (std::size_t i = 0; i < retire.size(); ++i) EXPECT_EQ(retire[i], issue[i] + c);
  }
}

TEST(ThreadController, IssuePeriodIsMaxOfTAndC) {
  constexpr unsigned kC = 4;
  for (unsigned t = 1; t <= 16; ++t) {
    ThreadController tc(kC, 16);
    for (unsigned i = 0; i < t; ++i) tc.activate(0);
    std::map<Sid, std::vector<std::uint64_t>> issues;
    for (std::uint64_t cyc = 0; cyc < 2000; ++cyc) {
      const IssueRecord r = tc.step(kContinue);
      if (r.issued) issues[*r.issued].push_back(cyc);
    }
    ASSERT_EQ(issues.size(), t);
    for (const auto& [sid, v] : issues) {
      for (std::size_t i = 2; i < v.size(); ++i) {
        EXPECT_EQ(v[i] - v[i - 1], std::max(t, kC)) << "T=" << t << " sid=" << sid;
      }
    }
  }
}

TEST(ThreadController, ForkJoinCounterAndStallClear) {
  ThreadController tc(4, 16);
  const Sid mt = *tc.activate(0);
  std::vector<Sid> kids;
  for (int i = 0; i < 3; ++i) kids.push_back(*tc.activate_and_count(mt, 0x40));
  EXPECT_EQ(tc.slot(mt).ac, 3u);
  for (Sid k : kids) EXPECT_EQ(tc.slot(k).ft, mt);
  tc.set_stall(1u << mt);
  EXPECT_EQ(tc.slot(mt).state, ThreadState::Stalled);
  tc.exit_thread(kids[0]);
  tc.exit_thread(kids[1]);
  EXPECT_EQ(tc.slot(mt).ac, 1u);
  EXPECT_EQ(tc.slot(mt).state, ThreadState::Stalled);
  tc.exit_thread(kids[2]);
  EXPECT_EQ(tc.slot(mt).ac, 0u);
  EXPECT_EQ(tc.slot(mt).state, ThreadState::Active);
  EXPECT_EQ(tc.check_invariants(), "");
}

TEST(ThreadController, ParentExitOrphansChildren) {
  ThreadController tc(4, 8);
  const Sid mt = *tc.activate(0);
  const Sid kid = *tc.activate_and_count(mt, 0);
  tc.exit_thread(mt);
  EXPECT_FALSE(tc.slot(kid).ft.has_value());
  EXPECT_EQ(tc.check_invariants(), "");
  tc.exit_thread(kid);
  EXPECT_EQ(tc.live_count(), 0u);
}

TEST(ThreadController, StalledThreadsAreNeverIssued) {
  ThreadController tc(4, 8);
  tc.activate(0);
  tc.activate(0);
  tc.set_stall(0b01);
  for (int i = 0; i < 50; ++i) {
    const IssueRecord r = tc.step(kContinue);
    if (r.issued) {
      EXPECT_NE(*r.issued, 0u);
    }
  }
  tc.clear_stall(0b01);
  bool saw0 = false;
  for (int i = 0; i < 50; ++i) saw0 |= tc.step(kContinue).issued == Sid{0};
  EXPECT_TRUE(saw0);
}

TEST(ThreadController, RandomOperationsKeepInvariants) {
  std::mt19937_64 rng(5);
  ThreadController tc(4, 16);
  for (int i = 0; i < 20000; ++i) {
    const unsigned op = rng() % 6;
    const Sid s = static_cast<Sid>(rng() % 16);
    switch (op) {
      case 0: tc.activate(0); break;
      case 1:
        if (tc.slot(s).live() && tc.slot(s).state != ThreadState::InFlight) tc.exit_thread(s);
        break;
      case 2: tc.set_stall(static_cast<std::uint32_t>(rng())); break;
      case 3: tc.clear_stall(static_cast<std::uint32_t>(rng())); break;
      case 4:
        if (tc.slot(s).live()) tc.activate_and_count(s, 0);
        break;
      default:
        tc.step([&](Sid sid) {
          if (rng() % 20 == 0) {
            tc.exit_thread(sid);
            return PassOutcome::Exited;
          }
          return PassOutcome::Continue;
        });
    }
    ASSERT_EQ(tc.check_invariants(), "") << "op " << i;
  }
}

}  // namespace
