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
#include <random>
#include <sstream>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "hvmc/metrics.hpp"

namespace hvmc {
namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

TEST(RelativeAngle, MatchesAngleAxisOracle) {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 a = random_rotation(rng), b = random_rotation(rng);
    const double want = Eigen::AngleAxisd(a.transpose() * b).angle() * 180.0 / M_PI;
    EXPECT_NEAR(relative_angle(a, b), want, 1e-6);
  }
  const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  EXPECT_NEAR(relative_angle(Mat3::Identity(), r), 0.7 * 180.0 / M_PI, 1e-9);
}

TEST(RelativeAngle, SymmetricExactly) {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 a = random_rotation(rng), b = random_rotation(rng);
    EXPECT_EQ(relative_angle(a, b), relative_angle(b, a));
  }
}

TEST(RelativeAngle, BiInvariantUnderCommonRotation) {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 a = random_rotation(rng), b = random_rotation(rng);
    const Mat3 q = random_rotation(rng);
    // Away from 0 and 180 degrees acos is well conditioned.
    const double base = relative_angle(a, b);
    if (base < 1.0 || base > 179.0) continue;
    EXPECT_NEAR(relative_angle(q * a, q * b), base, 1e-9);
    EXPECT_NEAR(std::cos(relative_angle(q * a, q * b) * M_PI / 180.0),
                std::cos(base * M_PI / 180.0), 1e-12);
  }
}

TEST(RelativeAngle, RejectsNonRotations) {
  EXPECT_THROW(relative_angle(2.0 * Mat3::Identity(), Mat3::Identity()), Error);
}

TEST(FrameFromPoints, OrthonormalAndRejectsCollinear) {
  const Mat3 f = frame_from_points(Vec3(0, 0.03, 0), Vec3(0, -0.03, 0),
                                   Vec3(0, 0, 0.45));
  EXPECT_TRUE(is_proper_rotation(f, 1e-12));
  EXPECT_LT((f.col(0) - Vec3(0, -1, 0)).norm(), 1e-15);
  EXPECT_THROW(frame_from_points(Vec3::Zero(), Vec3::UnitX(), 2 * Vec3::UnitX()),
               Error);
}

TEST(PathLength, AdditiveAndSubdivisionInvariant) {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> a, b;
  for (int i = 0; i < 50; ++i) a.emplace_back(u(rng), u(rng), u(rng));
  b.push_back(a.back());
  for (int i = 0; i < 50; ++i) b.emplace_back(u(rng), u(rng), u(rng));
  std::vector<Vec3> ab = a;
  ab.insert(ab.end(), b.begin() + 1, b.end());
  EXPECT_NEAR(path_length(ab), path_length(a) + path_length(b), 1e-12);

  std::vector<Vec3> fine;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    fine.push_back(a[i]);
    fine.push_back(0.5 * (a[i] + a[i + 1]));
  }
  fine.push_back(a.back());
  EXPECT_NEAR(path_length(fine), path_length(a), 1e-12);
  EXPECT_EQ(path_length({}), 0.0);
  EXPECT_EQ(path_length({Vec3::Ones()}), 0.0);
}

TickRecord record(double t, const std::array<Vec3, 3>& g,
                  const std::array<Vec3, 3>& o) {
  TickRecord r;
  r.t = t;
  r.gripper_points = g;
  r.object_points = o;
  r.target_points = o;
  return r;
}

TEST(ComputeMetrics, ZeroErrorWhenPointsCoincideAtClosure) {
  const std::array<Vec3, 3> obj = {Vec3(0.5, 0.03, 0.2), Vec3(0.5, -0.03, 0.2),
                                   Vec3(0.5, 0, 0.65)};
  std::array<Vec3, 3> start = obj;
  for (Vec3& p : start) p += Vec3(-0.2, 0.1, 0.1);
  TrajectoryLog log;
  log.records.push_back(record(0.0, start, obj));
  log.records.push_back(record(1.0, obj, obj));
  const RunMetrics m = compute_metrics(log);
  EXPECT_EQ(m.e_d, 0.0);
  EXPECT_NEAR(m.e_theta, 0.0, 1e-6);
  EXPECT_NEAR(m.d_i, std::sqrt(0.06) * 100.0, 1e-12);
  EXPECT_NEAR(m.L_r, std::sqrt(0.06) * 100.0, 1e-12);
  EXPECT_EQ(m.L_o, 0.0);
  EXPECT_EQ(m.t_a, 1.0);
  EXPECT_NEAR(m.theta_r, 0.0, 1e-6);
}

TEST(ComputeMetrics, RotatedObjectAngles) {
  const std::array<Vec3, 3> g = {Vec3(0, 0.03, 0), Vec3(0, -0.03, 0),
                                 Vec3(0, 0, 0.45)};
  const Mat3 rz = Eigen::AngleAxisd(0.5, Vec3::UnitZ()).toRotationMatrix();
  std::array<Vec3, 3> o;
  for (int i = 0; i < 3; ++i) o[i] = rz * g[i];
  TrajectoryLog log;
  log.records.push_back(record(0.0, g, g));
  log.records.push_back(record(2.0, g, o));
  const RunMetrics m = compute_metrics(log);
  EXPECT_NEAR(m.theta_o, 0.5 * 180 / M_PI, 1e-9);
  EXPECT_NEAR(m.e_theta, 0.5 * 180 / M_PI, 1e-9);
  EXPECT_NEAR(m.theta_i, 0.0, 1e-6);
  // Largest of the three point distances.
  EXPECT_NEAR(m.e_d, (o[0] - g[0]).norm() * 100.0, 1e-12);
  EXPECT_THROW(compute_metrics(TrajectoryLog{}), Error);
}

// Two-pass oracle in extended precision.
MeanStd oracle(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  const long double mean = s / v.size();
  long double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {static_cast<double>(mean),
          v.size() > 1 ? static_cast<double>(std::sqrt(ss / (v.size() - 1)))
                       : 0.0};
}

TEST(Aggregate, MeanStdMatchesTwoPassOracle) {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> n(12.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + trial);
    for (double& x : v) x = n(rng);
    const MeanStd got = mean_std(v), want = oracle(v);
    EXPECT_NEAR(got.mean, want.mean, 1e-12);
    EXPECT_NEAR(got.std, want.std, 1e-12);
  }
}

MetricSample sample(bool ok, bool system = false, double t_a = 3.0) {
  MetricSample s;
  s.group = "g";
  s.success = ok;
  s.system_failure = system;
  s.metrics.t_a = t_a;
  return s;
}

TEST(Aggregate, SuccessRateCountsAttemptsOnly) {
  std::vector<MetricSample> v(19, sample(true));
  v.push_back(sample(false));
  EXPECT_DOUBLE_EQ(aggregate(v)[0].success_rate, 95.0);
  v.push_back(sample(false, true));  // system failures leave the denominator
  const AggregateRow row = aggregate(v)[0];
  EXPECT_DOUBLE_EQ(row.success_rate, 95.0);
  EXPECT_EQ(row.attempts, 20);
  EXPECT_EQ(row.system_failures, 1);
}

TEST(Aggregate, IdenticalRunsHaveZeroStd) {
  const AggregateRow row = aggregate(std::vector<MetricSample>(20, sample(true)))[0];
  for (const MeanStd& s : row.stats) EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(row.stats[0].mean, 3.0);
}

TEST(Aggregate, StatsUseSuccessfulRunsOnly) {
  std::vector<MetricSample> v = {sample(true, false, 2.0),
                                 sample(true, false, 4.0),
                                 sample(false, false, 100.0)};
  EXPECT_DOUBLE_EQ(aggregate(v)[0].stats[0].mean, 3.0);
  EXPECT_THROW(aggregate({}), Error);
}

TEST(Aggregate, CsvLayout) {
  std::ostringstream out;
  write_aggregate_csv(aggregate(std::vector<MetricSample>(2, sample(true))), out);
  EXPECT_EQ(out.str(),
            "condition,runs,t_a,SR,d_i,L_r,L_o,e_d,theta_i,theta_r,theta_o,"
            "e_theta\n"
            "g,2,3.00 (0.00),100.0,0.00 (0.00),0.00 (0.00),0.00 (0.00),"
            "0.00 (0.00),0.00 (0.00),0.00 (0.00),0.00 (0.00),0.00 (0.00)\n");
}

}  // namespace
}  // namespace hvmc
