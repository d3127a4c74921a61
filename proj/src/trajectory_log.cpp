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

#include "hvmc/trajectory_log.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Geometry>

#include "hvmc/json_io.hpp"

namespace hvmc {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

const char* kAxes[3] = {"x", "y", "z"};

int dof_of(const TrajectoryLog& log) {
  return log.records.empty() ? 0 : static_cast<int>(log.records[0].q.size());
}

int regions_of(const TrajectoryLog& log) {
  return log.records.empty()
             ? 0
             : static_cast<int>(log.records[0].region_centers.size());
}

std::vector<std::string> header(int dof, int regions) {
  std::vector<std::string> h = {"t"};
  for (const char* prefix : {"q", "qd", "tau"}) {
    for (int k = 0; k < dof; ++k) h.push_back(prefix + std::to_string(k));
  }
  h.insert(h.end(), {"alpha", "phase", "command", "fingers_closed"});
  for (const char* prefix : {"grip", "tgt", "obj"}) {
    for (int i = 0; i < 3; ++i) {
      for (const char* a : kAxes) {
        h.push_back(prefix + std::to_string(i) + "_" + a);
      }
    }
  }
  for (int i = 0; i < 3; ++i) h.push_back("dist" + std::to_string(i));
  for (const char* a : kAxes) h.push_back(std::string("hand_") + a);
  for (const char* a : {"w", "x", "y", "z"}) h.push_back(std::string("hand_q") + a);
  for (const char* a : kAxes) h.push_back(std::string("raw_") + a);
  for (const char* a : kAxes) h.push_back(std::string("hand_v") + a);
  for (int r = 0; r < regions; ++r) {
    for (const char* a : kAxes) {
      h.push_back("region" + std::to_string(r) + "_" + a);
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (const char* a : kAxes) {
      h.push_back("force" + std::to_string(i) + "_" + a);
    }
  }
  for (int i = 0; i < 2; ++i) {
    for (const char* a : kAxes) {
      h.push_back("rep" + std::to_string(i) + "_" + a);
    }
  }
  h.insert(h.end(), {"kinetic", "spring_energy"});
  return h;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "bad number '" + s + "'", column);
  }
  return v;
}

GripperCommand parse_command(const std::string& s) {
  for (GripperCommand c : {GripperCommand::kNone, GripperCommand::kCloseFingers,
                           GripperCommand::kOpenFingers}) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::kParse, "unknown command '" + s + "'", "command");
}

}  // namespace

void write_csv(const TrajectoryLog& log, std::ostream& out) {
  const int dof = dof_of(log);
  const int regions = regions_of(log);
  out << "# config_hash=" << log.config_hash << "\n";
  out << "# dt=" << fmt(log.dt) << "\n";
  out << "# dof=" << dof << "\n";
  out << "# regions=" << regions << "\n";
  out << "# end_reason=" << log.end_reason << "\n";
  const std::vector<std::string> h = header(dof, regions);
  for (std::size_t i = 0; i < h.size(); ++i) {
    out << (i ? "," : "") << h[i];
  }
  out << "\n";
  std::string row;
  for (const TickRecord& r : log.records) {
    row.clear();
    auto put = [&](double v) {
      row += fmt(v);
      row += ',';
    };
    auto put3 = [&](const Vec3& v) {
      put(v.x());
      put(v.y());
      put(v.z());
    };
    put(r.t);
    for (const Eigen::VectorXd* v : {&r.q, &r.qdot, &r.tau}) {
      for (int k = 0; k < dof; ++k) put((*v)[k]);
    }
    put(r.alpha);
    row += to_string(r.phase);
    row += ',';
    row += to_string(r.command);
    row += ',';
    put(r.fingers_closed ? 1.0 : 0.0);
    for (const auto* pts : {&r.gripper_points, &r.target_points,
                            &r.object_points}) {
      for (const Vec3& p : *pts) put3(p);
    }
    for (double d : r.pair_distances) put(d);
    put3(r.hand_pose.position);
    const Eigen::Quaterniond q(r.hand_pose.orientation);
    put(q.w());
    put(q.x());
    put(q.y());
    put(q.z());
    put3(r.hand_raw);
    put3(r.hand_velocity);
    for (int k = 0; k < regions; ++k) put3(r.region_centers[k]);
    for (const Vec3& f : r.pair_forces) put3(f);
    for (const Vec3& f : r.repulsive_forces) put3(f);
    put(r.kinetic_energy);
    put(r.spring_energy);
    row.back() = '\n';
    out << row;
  }
}

void write_ndjson(const TrajectoryLog& log, std::ostream& out) {
  using json_io::json;
  out << json{{"config_hash", log.config_hash},
              {"dt", log.dt},
              {"end_reason", log.end_reason}}
             .dump()
      << "\n";
  auto pts = [](const auto& arr) {
    json a = json::array();
    for (const Vec3& p : arr) a.push_back(json_io::to_json(p));
    return a;
  };
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  for (const TickRecord& r : log.records) {
    const Eigen::Quaterniond q(r.hand_pose.orientation);
    json j = {{"t", r.t},
              {"q", vec(r.q)},
              {"qdot", vec(r.qdot)},
              {"tau", vec(r.tau)},
              {"alpha", r.alpha},
              {"phase", to_string(r.phase)},
              {"command", to_string(r.command)},
              {"fingers_closed", r.fingers_closed},
              {"gripper_points", pts(r.gripper_points)},
              {"target_points", pts(r.target_points)},
              {"object_points", pts(r.object_points)},
              {"pair_distances", r.pair_distances},
              {"hand_position", json_io::to_json(r.hand_pose.position)},
              {"hand_orientation", {q.w(), q.x(), q.y(), q.z()}},
              {"hand_raw", json_io::to_json(r.hand_raw)},
              {"hand_velocity", json_io::to_json(r.hand_velocity)},
              {"region_centers", pts(r.region_centers)},
              {"pair_forces", pts(r.pair_forces)},
              {"repulsive_forces", pts(r.repulsive_forces)},
              {"kinetic_energy", r.kinetic_energy},
              {"spring_energy", r.spring_energy}};
    out << j.dump() << "\n";
  }
}

void write_log_file(const TrajectoryLog& log,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kSystem, "cannot write log", path.string());
  }
  if (path.extension() == ".ndjson" || path.extension() == ".jsonl") {
    write_ndjson(log, out);
  } else {
    write_csv(log, out);
  }
}

TrajectoryLog read_csv(std::istream& in) {
  TrajectoryLog log;
  std::map<std::string, std::string> meta;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
  }
  log.config_hash = meta["config_hash"];
  log.end_reason = meta["end_reason"];
  if (meta.count("dt")) log.dt = parse_double(meta["dt"], "dt");
  if (!std::getline(in, line)) return log;
  const std::vector<std::string> cols = split(line, ',');
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    index[cols[i]] = static_cast<int>(i);
  }
  int dof = 0;
  while (index.count("q" + std::to_string(dof))) ++dof;
  int regions = 0;
  while (index.count("region" + std::to_string(regions) + "_x")) ++regions;

  auto col = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw Error(ErrorCode::kParse, "missing column", name);
    }
    return it->second;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != cols.size()) {
      throw Error(ErrorCode::kParse, "row has " + std::to_string(cells.size()) +
                  " cells, expected " + std::to_string(cols.size()), "log");
    }
    auto num = [&](const std::string& name) {
      return parse_double(cells[col(name)], name);
    };
    auto v3 = [&](const std::string& prefix) {
      return Vec3(num(prefix + "x"), num(prefix + "y"), num(prefix + "z"));
    };
    TickRecord r;
    r.t = num("t");
    r.q.resize(dof);
    r.qdot.resize(dof);
    r.tau.resize(dof);
    for (int k = 0; k < dof; ++k) {
      r.q[k] = num("q" + std::to_string(k));
      r.qdot[k] = num("qd" + std::to_string(k));
      r.tau[k] = num("tau" + std::to_string(k));
    }
    r.alpha = num("alpha");
    r.phase = parse_phase(cells[col("phase")]);
    r.command = parse_command(cells[col("command")]);
    r.fingers_closed = num("fingers_closed") != 0.0;
    for (int i = 0; i < 3; ++i) {
      const std::string s = std::to_string(i) + "_";
      r.gripper_points[i] = v3("grip" + s);
      r.target_points[i] = v3("tgt" + s);
      r.object_points[i] = v3("obj" + s);
      r.pair_distances[i] = num("dist" + std::to_string(i));
      r.pair_forces[i] = v3("force" + s);
    }
    for (int i = 0; i < 2; ++i) {
      r.repulsive_forces[i] = v3("rep" + std::to_string(i) + "_");
    }
    r.hand_pose.position = v3("hand_");
    r.hand_pose.orientation =
        Eigen::Quaterniond(num("hand_qw"), num("hand_qx"), num("hand_qy"),
                           num("hand_qz"))
            .normalized()
            .toRotationMatrix();
    r.hand_raw = v3("raw_");
    r.hand_velocity = v3("hand_v");
    for (int k = 0; k < regions; ++k) {
      r.region_centers.push_back(v3("region" + std::to_string(k) + "_"));
    }
    r.kinetic_energy = num("kinetic");
    r.spring_energy = num("spring_energy");
    log.records.push_back(std::move(r));
  }
  return log;
}

TrajectoryLog read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot open log", path.string());
  }
  return read_csv(in);
}

}  // namespace hvmc
