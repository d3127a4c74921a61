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

#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hvmc/config_bundle.hpp"
#include "hvmc/virtual_mechanisms.hpp"

namespace hvmc {
namespace {

double rel_err(const Vec3& got, const Vec3& want) {
  const double scale = std::max(want.norm(), 1e-300);
  return (got - want).norm() / scale;
}

// Scalar re-derivations of the force laws, written component by component.
struct ScalarOracle {
  static void spring(double fm, double k, double x, double y, double z,
                     double out[3]) {
    const double r = std::sqrt(x * x + y * y + z * z);
    const double mag = fm * std::tanh(k * r / fm);
    out[0] = mag * x / r;
    out[1] = mag * y / r;
    out[2] = mag * z / r;
  }
  static void damper(double c1, double c2, double b, double r, double vx,
                     double vy, double vz, double out[3]) {
    const double c = c1 + c2 * std::tanh(b * r);
    out[0] = c * vx;
    out[1] = c * vy;
    out[2] = c * vz;
  }
  static void repulsive(double fm, double s, double x, double y, double z,
                        double out[3]) {
    const double kr = fm / s * std::exp(0.5);
    const double g = std::exp(-(x * x + y * y + z * z) / (2 * s * s));
    out[0] = kr * g * x;
    out[1] = kr * g * y;
    out[2] = kr * g * z;
  }
};

TEST(ForceLaws, MatchScalarOracleOnRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> fm(0.5, 50.0), k(10.0, 5000.0),
      c(0.0, 50.0), b(0.1, 30.0), sig(0.01, 0.3), x(-1.0, 1.0), v(-2.0, 2.0);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p(x(rng), x(rng), x(rng));
    double o[3];

    const SaturatedSpringParams sp{fm(rng), k(rng)};
    ScalarOracle::spring(sp.f_max, sp.stiffness, p.x(), p.y(), p.z(), o);
    worst = std::max(worst,
                     rel_err(saturated_spring_force(sp, p), Vec3(o[0], o[1], o[2])));

    const double c1 = c(rng);
    const VariableDamperParams dp{c1, c(rng), b(rng)};
    const Vec3 pd(v(rng), v(rng), v(rng));
    ScalarOracle::damper(dp.c1, dp.c2, dp.beta_d, p.norm(), pd.x(), pd.y(),
                         pd.z(), o);
    worst = std::max(worst, rel_err(damper_force(dp, p, pd), Vec3(o[0], o[1], o[2])));

    const RepulsiveRegionParams rp(fm(rng), sig(rng));
    const Vec3 pr = p * rp.sigma() * 3.0;  // keep the Gaussian out of underflow
    ScalarOracle::repulsive(rp.f_max(), rp.sigma(), pr.x(), pr.y(), pr.z(), o);
    worst = std::max(worst, rel_err(repulsive_force(rp, pr), Vec3(o[0], o[1], o[2])));
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  EXPECT_LT(worst, 1e-9);
  EXPECT_LT(secs, 1.0);
}

TEST(ForceLaws, SpringIsBoundedAndLinearNearZero) {
  const SaturatedSpringParams sp{8.0, 800.0};
  EXPECT_EQ(saturated_spring_force(sp, Vec3::Zero()).norm(), 0.0);
  EXPECT_LT(saturated_spring_force(sp, Vec3(100, 0, 0)).norm(), 8.0 + 1e-12);
  // Small displacement: tanh(u) ~ u, so F ~ k p.
  const Vec3 p(1e-9, -2e-9, 0.5e-9);
  EXPECT_LT(rel_err(saturated_spring_force(sp, p), 800.0 * p), 1e-9);
}

TEST(ForceLaws, ZeroFmaxSpringIsDisabled) {
  const SaturatedSpringParams off{0.0, 800.0};
  EXPECT_NO_THROW(off.validate("spring2"));
  EXPECT_EQ(saturated_spring_force(off, Vec3(0.3, 0, 0)).norm(), 0.0);
  EXPECT_EQ(saturated_spring_potential(off, Vec3(0.3, 0, 0)), 0.0);
}

TEST(ForceLaws, InvalidParamsRejected) {
  EXPECT_THROW((SaturatedSpringParams{-1.0, 10.0}.validate("s")), Error);
  EXPECT_THROW((SaturatedSpringParams{1.0, 0.0}.validate("s")), Error);
  EXPECT_THROW((VariableDamperParams{-1.0, 0.0, 1.0}.validate("d")), Error);
  EXPECT_THROW((VariableDamperParams{1.0, -2.0, 1.0}.validate("d")), Error);
  EXPECT_THROW(RepulsiveRegionParams(10.0, 0.0), Error);
  EXPECT_THROW(RepulsiveRegionParams(-1.0, 0.1), Error);
}

TEST(ForceLaws, DamperCoefficientLimits) {
  const VariableDamperParams dp{5.0, 25.0, 10.0};
  EXPECT_DOUBLE_EQ(damping_coefficient(dp, 0.0), 5.0);
  EXPECT_NEAR(damping_coefficient(dp, 10.0), 30.0, 1e-12);
  // Negative c2 with c1 + c2 >= 0: heavy damping near the target.
  const VariableDamperParams near_heavy{80.0, -60.0, 10.0};
  EXPECT_NO_THROW(near_heavy.validate("d"));
  EXPECT_DOUBLE_EQ(damping_coefficient(near_heavy, 0.0), 80.0);
  EXPECT_NEAR(damping_coefficient(near_heavy, 10.0), 20.0, 1e-12);
}

TEST(ConservativeForces, SpringIsNegativeGradientOfPotential) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> x(-0.5, 0.5), fm(1.0, 30.0),
      k(50.0, 1000.0);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const SaturatedSpringParams sp{fm(rng), k(rng)};
    const Vec3 target(x(rng), x(rng), x(rng));
    const Vec3 gripper(x(rng), x(rng), x(rng));
    // U as a function of the gripper position; the force acts on it.
    auto u = [&](const Vec3& g) {
      return saturated_spring_potential(sp, target - g);
    };
    Vec3 grad;
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      grad[a] = (u(gripper + e) - u(gripper - e)) / (2 * h);
    }
    const Vec3 f = saturated_spring_force(sp, target - gripper);
    worst = std::max(worst, (f + grad).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(ConservativeForces, RepulsionIsNegativeGradientOfEnergy) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> x(-0.3, 0.3), fm(1.0, 100.0),
      sig(0.03, 0.2);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const RepulsiveRegionParams rp(fm(rng), sig(rng));
    const Vec3 pr(x(rng), x(rng), x(rng));
    Vec3 grad;
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      grad[a] = (repulsive_energy(rp, pr + e) - repulsive_energy(rp, pr - e)) /
                (2 * h);
    }
    worst = std::max(worst, (repulsive_force(rp, pr) + grad).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-6);
}

// Golden-section maximisation of a unimodal scalar function on [a, b].
double golden_argmax(const std::function<double(double)>& f, double a,
                     double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  while (b - a > 1e-12) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

TEST(RepulsiveRegion, PeakForceAtSigma) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> fm(1.0, 200.0), sig(0.01, 0.5);
  for (int i = 0; i < 200; ++i) {
    const RepulsiveRegionParams rp(fm(rng), sig(rng));
    const Vec3 dir = Vec3(0.3, -0.5, 0.8).normalized();
    auto mag = [&](double r) { return repulsive_force(rp, r * dir).norm(); };
    const double r_star = golden_argmax(mag, 0.0, 5.0 * rp.sigma());
    EXPECT_LT(std::abs(r_star - rp.sigma()) / rp.sigma(), 1e-3);
    EXPECT_LT(std::abs(mag(r_star) - rp.f_max()) / rp.f_max(), 1e-3);
    EXPECT_NEAR(mag(rp.sigma()), rp.f_max(), 1e-9 * rp.f_max());
  }
}

TEST(RepulsiveRegion, PointsAwayFromCenter) {
  const RepulsiveRegionParams rp(30.0, 0.1);
  const Vec3 pr(0.05, 0.02, -0.01);
  EXPECT_GT(repulsive_force(rp, pr).dot(pr), 0.0);
  EXPECT_EQ(repulsive_force(rp, Vec3::Zero()).norm(), 0.0);
}

TEST(PairedPoints, OffsetDirectionPointsToGripperBase) {
  OffsetDirectionCache cache;
  const Vec3 d = offset_direction(Vec3(0, 0, 0), Vec3(0, 0, 2), cache);
  EXPECT_LT((d - Vec3::UnitZ()).norm(), 1e-15);
  const Vec3 d2 = offset_direction(Vec3(1, 0, 0), Vec3(4, 4, 0), cache);
  EXPECT_LT((d2 - Vec3(0.6, 0.8, 0)).norm(), 1e-15);
  // Coincident points fall back to the last valid direction.
  const Vec3 d3 = offset_direction(Vec3(1, 1, 1), Vec3(1, 1, 1), cache);
  EXPECT_LT((d3 - d2).norm(), 1e-15);
  OffsetDirectionCache fresh;
  EXPECT_LT((offset_direction(Vec3::Ones(), Vec3::Ones(), fresh) -
             Vec3::UnitZ())
                .norm(),
            1e-15);
}

TEST(PairedPoints, OffsetShiftsEveryTargetEqually) {
  const KinematicChain base =
      load_chain_file(data_dir() / "chains" / "panda7.json");
  const GraspSpec grasp;
  const KinematicChain chain = with_grasp_links(base, grasp);
  JointState s = JointState::Zero(7);
  s.q << 0, -0.78, 0, -2.35, 0, 1.57, 0.78;
  const Pose object = Pose::FromRpy(Vec3(0.5, 0.1, 0.2), Vec3(0, 0, 0.3));
  const Vec3 gbase = point_position(chain, s, "gripper_base");
  OffsetDirectionCache c0, c1;
  const auto p0 = paired_points(chain, s, object, grasp, 0.0, gbase, c0);
  const auto p1 = paired_points(chain, s, object, grasp, 0.1, gbase, c1);
  const auto g = grasp_points(object, grasp);
  const Vec3 centroid = (g[0] + g[1] + g[2]) / 3.0;
  const Vec3 u = (gbase - centroid).normalized();
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((p0[i].target_point - g[i]).norm(), 1e-14);
    EXPECT_LT((p1[i].target_point - (g[i] + 0.1 * u)).norm(), 1e-14);
    EXPECT_LT((p1[i].p - (p1[i].target_point - p1[i].gripper_point)).norm(),
              1e-15);
  }
  // Gripper-side points: the wrist-back point is the link behind the tcp.
  const Pose tcp = ChainFrames(chain, s.q).attachment_pose("tcp");
  EXPECT_NEAR((p0[kWristBack].gripper_point - tcp.position).norm(),
              grasp.link_length, 1e-12);
}

TEST(PairedPoints, GraspSpecFromFingersPlacesBackTarget) {
  const GraspSpec g = GraspSpec::FromFingers(Vec3(0, 0.03, 0), Vec3(0, -0.03, 0),
                                             -Vec3::UnitZ(), 0.45);
  EXPECT_LT((g.target_points[kWristBack] - Vec3(0, 0, 0.45)).norm(), 1e-15);
  EXPECT_NO_THROW(g.validate());
  EXPECT_THROW(GraspSpec::FromFingers(Vec3::Zero(), Vec3::Zero(),
                                      -Vec3::UnitZ(), 0.45)
                   .validate(),
               Error);
}

}  // namespace
}  // namespace hvmc
