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

#include "hvmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>

#include "hvmc/kinematics.hpp"

namespace hvmc {

namespace {

constexpr double kCm = 100.0;
constexpr double kDeg = 180.0 / std::numbers::pi;

Mat3 gripper_frame(const TickRecord& r) {
  return frame_from_points(r.gripper_points[0], r.gripper_points[1],
                           r.gripper_points[2]);
}

Mat3 target_frame(const TickRecord& r) {
  return frame_from_points(r.object_points[0], r.object_points[1],
                           r.object_points[2]);
}

double max_pair_distance(const TickRecord& r) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    d = std::max(d, (r.object_points[i] - r.gripper_points[i]).norm());
  }
  return d;
}

}  // namespace

Mat3 frame_from_points(const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  const Vec3 a = p2 - p1;
  const Vec3 b = p3 - p1;
  const Vec3 n = a.cross(b);
  if (0.5 * n.norm() <= 1e-9 || a.norm() < 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "collinear points",
                "frame_from_points");
  }
  Mat3 r;
  r.col(0) = a.normalized();
  r.col(2) = r.col(0).cross(b).normalized();
  r.col(1) = r.col(2).cross(r.col(0));
  return r;
}

double relative_angle(const Mat3& r1, const Mat3& r2) {
  if (!is_proper_rotation(r1, 1e-6) || !is_proper_rotation(r2, 1e-6)) {
    throw Error(ErrorCode::kInvalidArgument, "not a rotation",
                "relative_angle");
  }
  const double c = std::clamp(((r1.transpose() * r2).trace() - 1.0) / 2.0,
                              -1.0, 1.0);
  return std::acos(c) * kDeg;
}

double path_length(const std::vector<Vec3>& points) {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    len += (points[i] - points[i - 1]).norm();
  }
  return len;
}

RunMetrics compute_metrics(const TrajectoryLog& log) {
  if (log.records.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "log shorter than 2 ticks",
                "compute_metrics");
  }
  const TickRecord& first = log.records.front();
  const TickRecord& last = log.records.back();
  RunMetrics m;
  m.t_a = last.t - first.t;
  m.d_i = max_pair_distance(first) * kCm;
  m.e_d = max_pair_distance(last) * kCm;

  std::array<double, 3> grip_len{};
  std::array<double, 3> obj_len{};
  for (std::size_t k = 1; k < log.records.size(); ++k) {
    const TickRecord& a = log.records[k - 1];
    const TickRecord& b = log.records[k];
    for (int i = 0; i < 3; ++i) {
      grip_len[i] += (b.gripper_points[i] - a.gripper_points[i]).norm();
      obj_len[i] += (b.object_points[i] - a.object_points[i]).norm();
    }
  }
  m.L_r = *std::max_element(grip_len.begin(), grip_len.end()) * kCm;
  m.L_o = *std::max_element(obj_len.begin(), obj_len.end()) * kCm;

  const Mat3 g0 = gripper_frame(first);
  const Mat3 g1 = gripper_frame(last);
  const Mat3 o0 = target_frame(first);
  const Mat3 o1 = target_frame(last);
  m.theta_i = relative_angle(g0, o0);
  m.theta_r = relative_angle(g0, g1);
  m.theta_o = relative_angle(o0, o1);
  m.e_theta = relative_angle(g1, o1);
  return m;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd s;
  if (values.empty()) {
    s.mean = s.std = std::nan("");
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<AggregateRow> aggregate(const std::vector<MetricSample>& samples) {
  if (samples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty group", "aggregate");
  }
  std::map<std::string, std::vector<const MetricSample*>> groups;
  for (const MetricSample& s : samples) groups[s.group].push_back(&s);

  std::vector<AggregateRow> rows;
  for (const auto& [name, members] : groups) {
    AggregateRow row;
    row.group = name;
    std::array<std::vector<double>, 9> cols;
    for (const MetricSample* s : members) {
      if (s->system_failure) {
        ++row.system_failures;
        continue;
      }
      ++row.attempts;
      if (!s->success) continue;
      ++row.successes;
      const auto v = s->metrics.values();
      for (int k = 0; k < 9; ++k) cols[k].push_back(v[k]);
    }
    row.success_rate =
        row.attempts ? 100.0 * row.successes / row.attempts : 0.0;
    for (int k = 0; k < 9; ++k) row.stats[k] = mean_std(cols[k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  // Avoid "-0.00".
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') {
    s.erase(0, 1);
  }
  return s;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         std::ostream& out) {
  out << "condition,runs,t_a,SR,d_i,L_r,L_o,e_d,theta_i,theta_r,theta_o,"
         "e_theta\n";
  for (const AggregateRow& r : rows) {
    auto cell = [](const MeanStd& s) {
      return format_fixed(s.mean, 2) + " (" + format_fixed(s.std, 2) + ")";
    };
    out << r.group << ',' << r.attempts << ',' << cell(r.stats[0]) << ','
        << format_fixed(r.success_rate, 1);
    for (int k = 1; k < 9; ++k) out << ',' << cell(r.stats[k]);
    out << '\n';
  }
}

}  // namespace hvmc
