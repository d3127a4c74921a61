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

#include "hvmc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "hvmc/json_io.hpp"
#include "hvmc/session_server.hpp"

namespace hvmc::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

struct Common {
  std::string chain;
  std::string controller_config;
  std::string profile;
  std::optional<double> stream_hz;

  void add_to(CLI::App& app) {
    app.add_option("--chain", chain, "Kinematic chain JSON")
        ->envname("HVMC_CHAIN");
    app.add_option("--controller-config", controller_config,
                   "Configuration bundle JSON (default data/config/default.json)")
        ->envname("HVMC_CONTROLLER_CONFIG");
    app.add_option("--profile", profile, "authoritative | cooperative")
        ->envname("HVMC_PROFILE");
    app.add_option("--stream-hz", stream_hz, "Live stream rate, 1-120 Hz")
        ->envname("HVMC_STREAM_HZ");
  }

  ConfigBundle load() const {
    BundleOverrides o;
    if (!chain.empty()) {
      o.chain = fs::path(chain);
      if (!fs::exists(*o.chain)) {
        throw Error(ErrorCode::kNotFound, "chain file not found: " + chain,
                    "chain");
      }
    }
    if (!profile.empty()) o.profile = profile;
    o.stream_hz = stream_hz;
    std::optional<fs::path> cfg;
    if (!controller_config.empty()) {
      cfg = fs::path(controller_config);
      if (!fs::exists(*cfg)) {
        throw Error(ErrorCode::kNotFound,
                    "file not found: " + controller_config,
                    "controller_config");
      }
    }
    return load_config_bundle(cfg, o);
  }
};

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kParse:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kNotFound:
      return kExitInvalid;
    case ErrorCode::kNonFinite:
    case ErrorCode::kDiverged:
    case ErrorCode::kSystem:
      return kExitSystem;
  }
  return kExitSystem;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kSystem, "cannot create directory: " + ec.message(),
                dir.string());
  }
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::kSystem, "cannot write", p.string());
  return f;
}

void write_metrics_row(std::ostream& out, const std::string& label,
                       const RunMetrics& m, bool success) {
  const auto v = m.values();
  out << label << ',' << format_fixed(v[0], 3) << ','
      << (success ? "100" : "0");
  for (std::size_t k = 1; k < v.size(); ++k) out << ',' << format_fixed(v[k], 3);
  out << '\n';
}

void write_outcome_json(const RunOutcome& o, const fs::path& path) {
  nlohmann::json m;
  const auto v = o.metrics.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    m[std::string(kMetricNames[k])] = v[k];
  }
  nlohmann::json j = {{"id", o.id},
                      {"success", o.success},
                      {"failure_reason", o.failure_reason},
                      {"detail", o.detail},
                      {"metrics", m},
                      {"min_finger_hand_distance", o.min_finger_hand_distance}};
  open_out(path) << j.dump(2) << '\n';
}

// Runs every script, `jobs` at a time. Output order follows the input.
std::vector<RunOutcome> execute_all(const std::vector<ScenarioScript>& scripts,
                                    const ConfigBundle& config, int jobs,
                                    bool keep_logs) {
  std::vector<RunOutcome> outcomes(scripts.size());
  ExecuteOptions opts;
  opts.keep_log = keep_logs;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scripts.size(); i = next++) {
      outcomes[i] = execute(scripts[i], config, opts);
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(scripts.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return outcomes;
}

int cmd_run(const Common& common, const std::string& scenario,
            const fs::path& out_dir, std::ostream& out) {
  ConfigBundle config = common.load();
  const fs::path path = resolve_data_path(scenario, "");
  const nlohmann::json j = json_io::parse_file(path);
  if (j.is_object() && j.contains("timeout")) {
    config.scene.timeout = json_io::number_or(j, "timeout", 0.0, "scenario");
    config.scene.validate(config.chain.dof());
  }
  const ScenarioScript script = script_from_json(j, config);
  script.validate(config.chain.dof());

  const RunOutcome o = execute(script, config);
  ensure_dir(out_dir);
  write_log_file(o.log, out_dir / (script.id + ".csv"));
  {
    std::ofstream f = open_out(out_dir / "metrics.csv");
    f << "log,t_a,SR,d_i,L_r,L_o,e_d,theta_i,theta_r,theta_o,e_theta\n";
    write_metrics_row(f, script.id, o.metrics, o.success);
  }
  write_outcome_json(o, out_dir / "outcome.json");

  out << script.id << ": "
      << (o.success ? "success" : "failure (" + o.failure_reason + ")");
  if (!o.detail.empty()) out << ", " << o.detail;
  out << '\n';
  if (o.success) return kExitOk;
  return o.failure_reason == "system" ? kExitSystem : kExitTaskFailure;
}

struct BatchArgs {
  std::string experiment = "exp1";
  std::string motion = "translation";
  std::string object = "cardboard_box";
  int runs = 20;
  std::uint64_t seed = 7;
  int jobs = 1;
  bool save_logs = false;
};

int cmd_batch(const Common& common, const BatchArgs& a, const fs::path& out_dir,
              std::ostream& out) {
  if (a.runs <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "must be >= 1", "runs");
  }
  if (a.jobs <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "must be >= 1", "jobs");
  }
  const ConfigBundle config = common.load();
  std::vector<ScenarioScript> scripts;
  std::string group;
  if (a.experiment == "exp1") {
    const ObjectSpec object = load_object(a.object);
    const Motion motion = parse_motion(a.motion);
    scripts = generate_experiment1(a.seed, object, motion, a.runs, config);
    group = object.name + "/" + std::string(to_string(motion));
  } else if (a.experiment == "exp2") {
    scripts = generate_experiment2(a.seed, a.runs, config);
    group = "exp2";
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "expected exp1 or exp2, got '" + a.experiment + "'",
                "experiment");
  }

  const std::vector<RunOutcome> outcomes =
      execute_all(scripts, config, a.jobs, a.save_logs);

  ensure_dir(out_dir);
  if (a.save_logs) {
    ensure_dir(out_dir / "logs");
    for (const RunOutcome& o : outcomes) {
      write_log_file(o.log, out_dir / "logs" / (o.id + ".csv"));
    }
  }
  {
    std::ofstream f = open_out(out_dir / "outcomes.csv");
    write_outcomes_csv(outcomes, f);
  }
  std::vector<MetricSample> samples;
  for (const RunOutcome& o : outcomes) {
    samples.push_back({group, o.success, o.failure_reason == "system",
                       o.metrics});
  }
  const std::vector<AggregateRow> rows = aggregate(samples);
  {
    std::ofstream f = open_out(out_dir / "summary.csv");
    write_aggregate_csv(rows, f);
  }
  write_aggregate_csv(rows, out);
  return kExitOk;
}

int cmd_metrics(const Common& common, const std::vector<std::string>& logs,
                const std::string& out_path, std::ostream& out) {
  const ConfigBundle config = common.load();
  std::ofstream file;
  std::ostream* dst = &out;
  if (!out_path.empty()) {
    file = open_out(out_path);
    dst = &file;
  }
  *dst << "log,t_a,SR,d_i,L_r,L_o,e_d,theta_i,theta_r,theta_o,e_theta\n";
  for (const std::string& p : logs) {
    const TrajectoryLog log = read_log_file(p);
    const RunMetrics m = compute_metrics(log);
    const Judgement j = judge_grasp(log, m, config.scene);
    write_metrics_row(*dst, fs::path(p).stem().string(), m, j.success);
  }
  return kExitOk;
}

struct ServeArgs {
  unsigned short port = 8765;
  std::string address = "127.0.0.1";
  std::string object = "cardboard_box";
  bool autostart = false;
  double duration = 0.0;
};

int cmd_serve(const Common& common, const ServeArgs& a, std::ostream& out) {
  ConfigBundle config = common.load();
  ServerOptions opts;
  opts.address = a.address;
  opts.port = a.port;
  opts.object = a.object;
  opts.autostart = a.autostart;
  SessionServer server(std::move(config), opts);
  const unsigned short port = server.start();
  out << "listening on ws://" << a.address << ':' << port << " session "
      << server.session_id() << std::endl;

  g_interrupted = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto t0 = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (a.duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count() >= a.duration) {
      break;
    }
  }
  server.stop();
  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);
  return kExitOk;
}

}  // namespace

void write_outcomes_csv(const std::vector<RunOutcome>& outcomes,
                        std::ostream& out) {
  out << "id,success,failure_reason,t_a,d_i,L_r,L_o,e_d,theta_i,theta_r,"
         "theta_o,e_theta,min_finger_hand_cm\n";
  for (const RunOutcome& o : outcomes) {
    out << o.id << ',' << (o.success ? 1 : 0) << ',' << o.failure_reason;
    for (double v : o.metrics.values()) out << ',' << format_fixed(v, 3);
    out << ',' << format_fixed(o.min_finger_hand_distance * 100.0, 3) << '\n';
  }
}

int main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Handover controller simulation"};
  app.require_subcommand(1);
  Common common;

  CLI::App* run = app.add_subcommand("run", "Execute one scenario file");
  common.add_to(*run);
  std::string scenario;
  std::string out_dir = "out";
  run->add_option("--scenario", scenario, "Scenario JSON")
      ->required()
      ->envname("HVMC_SCENARIO");
  run->add_option("--out", out_dir, "Output directory")->envname("HVMC_OUT");

  CLI::App* batch = app.add_subcommand("batch", "Run a randomized experiment");
  common.add_to(*batch);
  BatchArgs ba;
  batch->add_option("--experiment", ba.experiment, "exp1 | exp2")
      ->envname("HVMC_EXPERIMENT");
  batch->add_option("--motion", ba.motion, "translation | rotation (exp1)")
      ->envname("HVMC_MOTION");
  batch->add_option("--object", ba.object, "Object name or JSON (exp1)")
      ->envname("HVMC_OBJECT");
  batch->add_option("--runs", ba.runs, "Number of runs")->envname("HVMC_RUNS");
  batch->add_option("--seed", ba.seed, "Master seed")->envname("HVMC_SEED");
  batch->add_option("--jobs", ba.jobs, "Parallel runs")->envname("HVMC_JOBS");
  batch->add_flag("--save-logs", ba.save_logs, "Write per-run logs")
      ->envname("HVMC_SAVE_LOGS");
  batch->add_option("--out", out_dir, "Output directory")->envname("HVMC_OUT");

  CLI::App* metrics = app.add_subcommand("metrics", "Metrics table from logs");
  common.add_to(*metrics);
  std::vector<std::string> logs;
  std::string metrics_out;
  metrics->add_option("logs", logs, "Log CSV files")->required();
  metrics->add_option("--out", metrics_out, "CSV file (default stdout)");

  CLI::App* serve = app.add_subcommand("serve", "Live WebSocket session");
  common.add_to(*serve);
  ServeArgs sa;
  serve->add_option("--port", sa.port, "TCP port, 0 picks a free one")
      ->envname("HVMC_PORT");
  serve->add_option("--address", sa.address, "Bind address")
      ->envname("HVMC_ADDRESS");
  serve->add_option("--object", sa.object, "Object name or JSON")
      ->envname("HVMC_OBJECT");
  serve->add_flag("--autostart", sa.autostart, "Start without lifecycle_cmd");
  serve->add_option("--duration", sa.duration, "Stop after N s (0 = signal)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (*run) return cmd_run(common, scenario, out_dir, out);
    if (*batch) return cmd_batch(common, ba, out_dir, out);
    if (*metrics) return cmd_metrics(common, logs, metrics_out, out);
    if (*serve) return cmd_serve(common, sa, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSystem;
  }
  return kExitInvalid;
}

}  // namespace hvmc::cli
