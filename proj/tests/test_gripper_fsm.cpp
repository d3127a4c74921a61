// Copyright 2026 The Handover VMC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hvmc/common.hpp"
#include "hvmc/gripper_control.hpp"

namespace hvmc {
namespace {

constexpr double kDt = 0.001;

// Random observation streams built from regimes held for random spans, so
// that long near-and-still stretches (and therefore grasps) do occur.
std::vector<FsmObservation> random_stream(std::mt19937_64& rng, int ticks) {
  std::uniform_int_distribution<int> regime(0, 5), span(1, 1600);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FsmObservation> out;
  while (static_cast<int>(out.size()) < ticks) {
    const int r = regime(rng);
    const int n = span(rng);
    for (int k = 0; k < n && static_cast<int>(out.size()) < ticks; ++k) {
      FsmObservation o;
      for (double& d : o.pair_distances) {
        switch (r) {
          case 0:  // far
            d = 0.10 + 0.3 * u(rng);
            break;
          case 1:  // between grasp and activation radii
            d = 0.05 + 0.0499 * u(rng);
            break;
          case 2:
          case 3:  // inside the grasp radius
            d = 0.0499 * u(rng);
            break;
          case 4:  // right on the thresholds
            d = u(rng) < 0.5 ? 0.05 : 0.0999;
            break;
          default:
            d = 0.12 * u(rng);
        }
      }
      o.hand_speed = (r == 5 || u(rng) < 0.002) ? 0.03 + 0.2 * u(rng)
                                                 : 0.0299 * u(rng);
      o.fingers_closed = u(rng) < 0.3;
      out.push_back(o);
    }
  }
  return out;
}

bool all_lt(const std::array<double, 3>& d, double x) {
  return std::all_of(d.begin(), d.end(), [&](double v) { return v < x; });
}

// Reference automaton written directly from the protocol: activation at
// 10 cm with a still hand, grasp after one second below 5 cm, reset to
// TRACKING with a 10 cm offset otherwise.
struct Reference {
  GripperPhase phase = GripperPhase::kTracking;
  double alpha = 0.10;
  int dwell_ticks = 0;

  GripperCommand step(const FsmObservation& o) {
    if (phase == GripperPhase::kDone) return GripperCommand::kNone;
    if (o.hand_speed >= 0.03 || !all_lt(o.pair_distances, 0.10)) {
      const bool was_tracking = phase == GripperPhase::kTracking;
      phase = GripperPhase::kTracking;
      alpha = 0.10;
      dwell_ticks = 0;
      return was_tracking ? GripperCommand::kNone : GripperCommand::kOpenFingers;
    }
    if (phase == GripperPhase::kTracking) {
      phase = GripperPhase::kFinalApproach;
      dwell_ticks = 0;
      return GripperCommand::kNone;
    }
    if (phase == GripperPhase::kFinalApproach) {
      alpha = std::max(0.0, alpha - 0.2 * kDt);
      dwell_ticks = all_lt(o.pair_distances, 0.05) ? dwell_ticks + 1 : 0;
      if (dwell_ticks >= 1000) {
        phase = GripperPhase::kGrasping;
        return GripperCommand::kCloseFingers;
      }
      return GripperCommand::kNone;
    }
    if (o.fingers_closed) phase = GripperPhase::kDone;
    return GripperCommand::kNone;
  }
};

TEST(GripperFsmProperty, MatchesReferenceOnRandomStreams) {
  std::mt19937_64 rng(31);
  int grasps = 0, dones = 0, resets = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const FsmThresholds th;
    GripperFsm fsm = GripperFsm::Initial(th);
    Reference ref;
    for (const FsmObservation& o : random_stream(rng, 8000)) {
      const GripperPhase before = fsm.phase;
      auto [next, cmd] = step_fsm(fsm, o, kDt);
      const GripperCommand want = ref.step(o);
      ASSERT_EQ(next.phase, ref.phase);
      ASSERT_EQ(cmd, want);
      ASSERT_NEAR(next.alpha, ref.alpha, 1e-12);
      if (cmd == GripperCommand::kCloseFingers) ++grasps;
      if (cmd == GripperCommand::kOpenFingers) ++resets;
      if (next.phase == GripperPhase::kDone && before != GripperPhase::kDone) {
        ++dones;
      }
      fsm = next;
    }
  }
  // The generator must actually exercise every transition.
  EXPECT_GT(grasps, 20);
  EXPECT_GT(dones, 10);
  EXPECT_GT(resets, 20);
}

TEST(GripperFsmProperty, InvariantsHoldOnRandomStreams) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    GripperFsm fsm = GripperFsm::Initial(FsmThresholds{});
    int below_streak = 0;
    for (const FsmObservation& o : random_stream(rng, 6000)) {
      auto [next, cmd] = step_fsm(fsm, o, kDt);
      ASSERT_GE(next.alpha, 0.0);
      ASSERT_LE(next.alpha, 0.10);
      if (fsm.phase == GripperPhase::kDone) {
        ASSERT_EQ(next.phase, GripperPhase::kDone);
      }
      // Any far pair or a moving hand resets to TRACKING with alpha = 10 cm.
      if (fsm.phase != GripperPhase::kDone &&
          (!all_lt(o.pair_distances, 0.10) || o.hand_speed >= 0.03)) {
        ASSERT_EQ(next.phase, GripperPhase::kTracking);
        ASSERT_EQ(next.alpha, 0.10);
      }
      // Activation never happens with a pair at or above 10 cm.
      if (next.phase == GripperPhase::kFinalApproach &&
          fsm.phase == GripperPhase::kTracking) {
        ASSERT_TRUE(all_lt(o.pair_distances, 0.10));
      }
      // Closure is commanded only after a full second below 5 cm.
      const bool counting = fsm.phase == GripperPhase::kFinalApproach &&
                            next.phase != GripperPhase::kTracking &&
                            all_lt(o.pair_distances, 0.05);
      below_streak = counting ? below_streak + 1 : 0;
      if (cmd == GripperCommand::kCloseFingers) {
        ASSERT_EQ(below_streak, 1000);
        ASSERT_EQ(next.phase, GripperPhase::kGrasping);
      }
      if (fsm.phase == GripperPhase::kFinalApproach &&
          next.phase == GripperPhase::kFinalApproach) {
        ASSERT_LT(below_streak, 1000);
      }
      fsm = next;
    }
  }
}

TEST(GripperFsm, ExactDwellBoundary) {
  GripperFsm fsm = GripperFsm::Initial(FsmThresholds{});
  FsmObservation near;
  near.pair_distances = {0.04, 0.04, 0.04};
  fsm = step_fsm(fsm, near, kDt).first;
  ASSERT_EQ(fsm.phase, GripperPhase::kFinalApproach);
  for (int k = 1; k < 1000; ++k) {
    auto [next, cmd] = step_fsm(fsm, near, kDt);
    ASSERT_EQ(next.phase, GripperPhase::kFinalApproach) << k;
    ASSERT_EQ(cmd, GripperCommand::kNone);
    fsm = next;
  }
  auto [next, cmd] = step_fsm(fsm, near, kDt);
  EXPECT_EQ(next.phase, GripperPhase::kGrasping);
  EXPECT_EQ(cmd, GripperCommand::kCloseFingers);
}

TEST(GripperFsm, OneTickOutsideRestartsDwell) {
  GripperFsm fsm = GripperFsm::Initial(FsmThresholds{});
  FsmObservation near, mid;
  near.pair_distances = {0.04, 0.04, 0.04};
  mid.pair_distances = {0.04, 0.06, 0.04};
  fsm = step_fsm(fsm, near, kDt).first;
  for (int k = 0; k < 900; ++k) fsm = step_fsm(fsm, near, kDt).first;
  fsm = step_fsm(fsm, mid, kDt).first;
  EXPECT_EQ(fsm.phase, GripperPhase::kFinalApproach);
  EXPECT_EQ(fsm.dwell_clock, 0.0);
  for (int k = 0; k < 999; ++k) fsm = step_fsm(fsm, near, kDt).first;
  EXPECT_EQ(fsm.phase, GripperPhase::kFinalApproach);
  fsm = step_fsm(fsm, near, kDt).first;
  EXPECT_EQ(fsm.phase, GripperPhase::kGrasping);
}

TEST(GripperFsm, OffsetRampsAtConfiguredRate) {
  GripperFsm fsm = GripperFsm::Initial(FsmThresholds{});
  FsmObservation o;
  o.pair_distances = {0.08, 0.08, 0.08};
  fsm = step_fsm(fsm, o, kDt).first;
  EXPECT_DOUBLE_EQ(fsm.alpha, 0.10);
  for (int k = 0; k < 250; ++k) fsm = step_fsm(fsm, o, kDt).first;
  EXPECT_NEAR(fsm.alpha, 0.10 - 0.2 * 0.25, 1e-12);
  for (int k = 0; k < 1000; ++k) fsm = step_fsm(fsm, o, kDt).first;
  EXPECT_EQ(fsm.alpha, 0.0);
}

TEST(GripperFsm, MovingHandDuringGraspReopens) {
  GripperFsm fsm = GripperFsm::Initial(FsmThresholds{});
  fsm.phase = GripperPhase::kGrasping;
  fsm.alpha = 0.0;
  FsmObservation o;
  o.pair_distances = {0.01, 0.01, 0.01};
  o.hand_speed = 0.5;
  auto [next, cmd] = step_fsm(fsm, o, kDt);
  EXPECT_EQ(next.phase, GripperPhase::kTracking);
  EXPECT_EQ(next.alpha, 0.10);
  EXPECT_EQ(cmd, GripperCommand::kOpenFingers);
}

TEST(GripperFsm, RejectsNonPositiveDt) {
  const GripperFsm fsm = GripperFsm::Initial(FsmThresholds{});
  EXPECT_THROW(step_fsm(fsm, FsmObservation{}, 0.0), Error);
  EXPECT_THROW(step_fsm(fsm, FsmObservation{}, -1e-3), Error);
}

TEST(GripperFsm, ThresholdValidation) {
  FsmThresholds th;
  th.d_grasp = 0.2;  // above d_activate
  EXPECT_THROW(th.validate(), Error);
  th = FsmThresholds{};
  th.t_dwell = 0.0;
  EXPECT_THROW(th.validate(), Error);
}

}  // namespace
}  // namespace hvmc
