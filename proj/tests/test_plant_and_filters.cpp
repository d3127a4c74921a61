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

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "hvmc/config_bundle.hpp"
#include "hvmc/hand_signal.hpp"
#include "hvmc/plant_sim.hpp"

namespace hvmc {
namespace {

PlantParams single_joint(double m, double b, double dt) {
  PlantParams p;
  p.inertia = Eigen::VectorXd::Constant(1, m);
  p.friction = Eigen::VectorXd::Constant(1, b);
  p.dt = dt;
  p.limits = {std::nullopt};
  return p;
}

SimState at_rest(int n) {
  SimState s;
  s.joints = JointState::Zero(n);
  return s;
}

// Semi-implicit Euler with constant torque has the closed form
//   v_n = v_inf + (v_0 - v_inf) r^n,  r = 1 - dt b / m,  v_inf = tau / b
//   q_n = q_0 + dt sum_{k=1..n} v_k.
TEST(Plant, ConstantTorqueMatchesDiscreteClosedForm) {
  const double m = 1.5, b = 2.0, dt = 0.001, tau = 3.0, v0 = -0.4;
  const PlantParams p = single_joint(m, b, dt);
  SimState s = at_rest(1);
  s.joints.qdot[0] = v0;
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, tau);
  const double r = 1.0 - dt * b / m, vinf = tau / b;
  double q_expected = 0.0;
  for (int n = 1; n <= 5000; ++n) {
    s = step(s, t, p);
    const double v = vinf + (v0 - vinf) * std::pow(r, n);
    q_expected += dt * v;
    ASSERT_NEAR(s.joints.qdot[0], v, 1e-12);
    ASSERT_NEAR(s.joints.q[0], q_expected, 1e-10);
  }
  EXPECT_NEAR(s.t, 5.0, 1e-9);
}

TEST(Plant, ApproachesContinuousSolution) {
  // Continuous: v(t) = vinf (1 - exp(-b t / m)); first-order convergence.
  const double m = 1.0, b = 2.0, tau = 1.0;
  auto error_at = [&](double dt) {
    const PlantParams p = single_joint(m, b, dt);
    SimState s = at_rest(1);
    const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, tau);
    const int n = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < n; ++k) s = step(s, t, p);
    return std::abs(s.joints.qdot[0] - tau / b * (1.0 - std::exp(-b / m)));
  };
  const double e1 = error_at(0.002), e2 = error_at(0.001);
  EXPECT_LT(e2, 1e-3);
  EXPECT_NEAR(e1 / e2, 2.0, 0.05);
}

TEST(Plant, FrictionOnlyDissipates) {
  const PlantParams p = single_joint(1.0, 2.0, 0.001);
  SimState s = at_rest(1);
  s.joints.qdot[0] = 1.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  double e = kinetic_energy(s.joints.qdot, p);
  for (int k = 0; k < 2000; ++k) {
    s = step(s, zero, p);
    const double e2 = kinetic_energy(s.joints.qdot, p);
    ASSERT_LT(e2, e);
    e = e2;
  }
}

TEST(Plant, JointLimitsClampAndStop) {
  PlantParams p = single_joint(1.0, 0.0, 0.01);
  p.limits = {JointLimits{-0.1, 0.1}};
  SimState s = at_rest(1);
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, 50.0);
  for (int k = 0; k < 100; ++k) s = step(s, t, p);
  EXPECT_EQ(s.joints.q[0], 0.1);
  EXPECT_EQ(s.joints.qdot[0], 0.0);
}

TEST(Plant, NonFiniteTorqueNamesJoint) {
  const PlantParams p = single_joint(1.0, 1.0, 0.001);
  const Eigen::VectorXd t =
      Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN());
  try {
    step(at_rest(1), t, p);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    EXPECT_EQ(e.where(), "joint 0");
  }
}

TEST(Plant, SizeMismatchRejected) {
  const PlantParams p = single_joint(1.0, 1.0, 0.001);
  EXPECT_THROW(step(at_rest(1), Eigen::VectorXd::Zero(2), p), Error);
}

TEST(Plant, DefaultsFromChain) {
  const KinematicChain chain =
      load_chain_file(data_dir() / "chains" / "panda7.json");
  const PlantParams p = PlantParams::Default(chain);
  EXPECT_EQ(p.inertia.size(), 7);
  EXPECT_EQ(p.inertia[3], 1.0);
  EXPECT_EQ(p.friction[3], 2.0);
  EXPECT_EQ(p.dt, 0.001);
  ASSERT_TRUE(p.limits[3].has_value());
  EXPECT_DOUBLE_EQ(p.limits[3]->upper, -0.0698);
}

TEST(LowPass, CoefficientAndStepResponse) {
  const double dt = 0.001, fc = 8.0;
  const double a = lowpass_coefficient(fc, dt);
  EXPECT_NEAR(a, dt / (dt + 1.0 / (2.0 * M_PI * fc)), 1e-15);
  LowPassState s;
  s.cutoff = fc;
  const Pose target = Pose::FromRpy(Vec3(1, 0, 0), Vec3::Zero());
  Pose out;
  for (int n = 1; n <= 100; ++n) {
    std::tie(s, out) = lowpass_update(s, target, dt);
    ASSERT_NEAR(out.position.x(), 1.0 - std::pow(1.0 - a, n), 1e-12);
  }
}

TEST(LowPass, OrientationSlerpsAboutFixedAxis) {
  LowPassState s;
  s.cutoff = 8.0;
  const double dt = 0.001, a = lowpass_coefficient(8.0, dt);
  const Vec3 axis = Vec3(1, 2, -0.5).normalized();
  const Pose target{Vec3::Zero(),
                    Eigen::AngleAxisd(1.2, axis).toRotationMatrix()};
  Pose out;
  std::tie(s, out) = lowpass_update(s, target, dt);
  const Eigen::AngleAxisd got(out.orientation);
  EXPECT_NEAR(got.angle(), a * 1.2, 1e-12);
  EXPECT_LT((got.axis() - axis).norm(), 1e-9);
}

TEST(Kalman, RecoversConstantVelocity) {
  FilterParams fp;
  const double dt = 0.001;
  const Vec3 v(0.2, -0.1, 0.05);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> noise(0.0, 0.001);
  KalmanCvState s = KalmanCvState::Initial(Vec3::Zero(), fp);
  Vec3 est = Vec3::Zero();
  for (int k = 1; k <= 3000; ++k) {
    const Vec3 z = v * (k * dt) + Vec3(noise(rng), noise(rng), noise(rng));
    std::tie(s, est) = kalman_update(s, z, dt);
  }
  EXPECT_LT((est - v).norm(), 0.03);
  // Covariance stays symmetric positive semidefinite.
  EXPECT_LT((s.P - s.P.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(s.P);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(Kalman, StaticInputGivesZeroVelocity) {
  FilterParams fp;
  KalmanCvState s = KalmanCvState::Initial(Vec3(0.5, 0, 0.3), fp);
  Vec3 est;
  for (int k = 0; k < 500; ++k) {
    std::tie(s, est) = kalman_update(s, Vec3(0.5, 0, 0.3), 0.001);
  }
  EXPECT_LT(est.norm(), 1e-12);
}

TEST(Filters, ParamsValidated) {
  FilterParams fp;
  fp.cutoff_hz = 0.0;
  EXPECT_THROW(fp.validate(), Error);
  fp = FilterParams{};
  fp.r_meas = -1.0;
  EXPECT_THROW(fp.validate(), Error);
}

}  // namespace
}  // namespace hvmc
