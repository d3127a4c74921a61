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

// Per-run handover metrics computed from trajectory logs, and aggregate
// tables over runs.
//
//   t_a      s    approach time, first to last logged tick
//   d_i      cm   largest gripper-target pair distance at the start
//   L_r      cm   longest gripper-point path
//   L_o      cm   longest target-point path
//   e_d      cm   largest pair distance at closure
//   theta_i  deg  gripper frame vs target frame at the start
//   theta_r  deg  gripper frame rotation, start to end
//   theta_o  deg  target frame rotation, start to end
//   e_theta  deg  gripper frame vs target frame at closure
//
// Target points are the object-fixed points without the approach offset.

#ifndef HVMC_METRICS_HPP_
#define HVMC_METRICS_HPP_

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hvmc/common.hpp"
#include "hvmc/trajectory_log.hpp"

namespace hvmc {

// x = unit(p2 - p1), z = unit(x cross (p3 - p1)), y = z cross x.
// Throws Error(kInvalidArgument) for collinear points (area <= 1e-9).
Mat3 frame_from_points(const Vec3& p1, const Vec3& p2, const Vec3& p3);

// Rotation angle of R1^T R2 in degrees.
double relative_angle(const Mat3& r1, const Mat3& r2);

double path_length(const std::vector<Vec3>& points);

inline constexpr std::array<std::string_view, 9> kMetricNames = {
    "t_a", "d_i", "L_r", "L_o", "e_d", "theta_i", "theta_r", "theta_o",
    "e_theta"};

struct RunMetrics {
  double t_a = 0.0;
  double d_i = 0.0;
  double L_r = 0.0;
  double L_o = 0.0;
  double e_d = 0.0;
  double theta_i = 0.0;
  double theta_r = 0.0;
  double theta_o = 0.0;
  double e_theta = 0.0;
  bool success = false;

  std::array<double, 9> values() const {
    return {t_a, d_i, L_r, L_o, e_d, theta_i, theta_r, theta_o, e_theta};
  }
};

// The log must start at robot start and end at closure or timeout.
// `success` is left false; the caller decides it.
RunMetrics compute_metrics(const TrajectoryLog& log);

struct MetricSample {
  std::string group;
  bool success = false;
  bool system_failure = false;  // excluded from the SR denominator
  RunMetrics metrics;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

MeanStd mean_std(const std::vector<double>& values);

struct AggregateRow {
  std::string group;
  int attempts = 0;  // system failures excluded
  int successes = 0;
  int system_failures = 0;
  double success_rate = 0.0;  // percent
  std::array<MeanStd, 9> stats;  // over successful runs, kMetricNames order
};

// One row per group, sorted by group name. Throws for an empty input.
std::vector<AggregateRow> aggregate(const std::vector<MetricSample>& samples);

// condition,runs,t_a,SR,d_i,L_r,L_o,e_d,theta_i,theta_r,theta_o,e_theta
// with "mean (std)" cells and SR in percent.
void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         std::ostream& out);

// Fixed-precision number formatting shared by every CSV writer here.
std::string format_fixed(double v, int digits);

}  // namespace hvmc

#endif  // HVMC_METRICS_HPP_
