// Log-replay estimator CLI: run a configured pipeline over CSV logs, generate
// synthetic logs, evaluate trajectories, and benchmark the filter steps.
//
// Exit codes: 0 ok, 1 config error, 2 log parse error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "inekf/benchmark.hpp"
#include "inekf/io/replay.hpp"
#include "inekf/metrics/trajectory_metrics.hpp"
#include "inekf/sim/writer.hpp"

namespace {

namespace fs = std::filesystem;

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = inekf::io::Config::Load(config_path);
  const auto options = inekf::io::parse_pipeline_config(
      cfg, fs::absolute(fs::path(config_path)).parent_path().string());

  const auto result = inekf::io::run_replay(options);

  fs::create_directories(out_dir);
  const fs::path base(out_dir);
  inekf::io::write_trajectory((base / "trajectory.csv").string(), result.trajectory);

  std::ostringstream summary;
  const auto& s = result.summary;
  summary << "platform: " << options.platform << "\n"
          << "measurements: imu=" << s.imu_count << " velocity=" << s.velocity_count
          << " wheels=" << s.wheel_count << " kinematics=" << s.kinematics_count
          << " contact=" << s.contact_count << " grf=" << s.grf_count << "\n"
          << "time range: [" << s.first_stamp << ", " << s.last_stamp << "] s\n"
          << "clamped imu steps: " << s.clamped_steps << "\n"
          << "trajectory records: " << result.trajectory.size() << "\n";
  if (!result.trajectory.empty()) {
    const auto& last = result.trajectory.back();
    summary << "final position: " << last.position.transpose() << "\n"
            << "final velocity: " << last.velocity.transpose() << "\n";
  }
  if (options.files.count("groundtruth")) {
    const auto ref = inekf::io::read_trajectory(options.files.at("groundtruth"));
    try {
      const auto drift = inekf::metrics::final_drift(result.trajectory, ref);
      summary << "final drift vs groundtruth: " << drift.final_drift_m << " m ("
              << drift.percent << " % of path)\n";
    } catch (const inekf::InsufficientOverlap&) {
      summary << "final drift vs groundtruth: n/a (no overlap)\n";
    }
  }
  for (const auto& w : s.warnings) summary << "warning: " << w << "\n";

  std::ofstream(base / "summary.txt") << summary.str();
  std::cout << summary.str();
  return 0;
}

int cmd_rpe(const std::string& est_path, const std::string& ref_path, double delta) {
  const auto est = inekf::io::read_trajectory(est_path);
  const auto ref = inekf::io::read_trajectory(ref_path);
  const auto r = inekf::metrics::rpe(est, ref, delta);
  std::cout << "pairs: " << r.pairs << "\n"
            << "translational RPE: " << r.translational << " m/m\n"
            << "rotational RPE: " << r.rotational_deg << " deg/m\n";
  return 0;
}

int cmd_drift(const std::string& est_path, const std::string& ref_path) {
  const auto est = inekf::io::read_trajectory(est_path);
  const auto ref = inekf::io::read_trajectory(ref_path);
  const auto d = inekf::metrics::final_drift(est, ref);
  std::cout << "final drift: " << d.final_drift_m << " m\n"
            << "drift percentage: " << d.percent << " %\n";
  return 0;
}

int cmd_sim(const std::string& spec_path, const std::string& out_dir) {
  const auto cfg = inekf::io::Config::Load(spec_path);
  const auto job = inekf::sim::parse_sim_config(cfg);
  inekf::sim::write_logs(job, out_dir);
  std::cout << "wrote " << job.channels.size() << " channel(s) to " << out_dir << "\n";
  return 0;
}

int cmd_bench(long iterations, long warmup) {
  const auto rows = inekf::bench::run_all(iterations, warmup);
  std::printf("%-28s %10s %10s %12s\n", "operation", "mean [us]", "std [us]", "iterations");
  for (const auto& r : rows) {
    std::printf("%-28s %10.2f %10.2f %12ld\n", r.name.c_str(), r.mean_us, r.std_us,
                r.iterations);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant-filter proprioceptive state estimation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  auto* run = app.add_subcommand("run", "replay logs through the configured pipeline");
  run->add_option("--config", config_path, "pipeline config file")->required();
  run->add_option("--out", out_dir, "output directory");

  std::string est_path, ref_path;
  double delta = 1.0;
  auto* rpe = app.add_subcommand("rpe", "relative pose error between trajectories");
  rpe->add_option("--est", est_path, "estimated trajectory csv")->required();
  rpe->add_option("--ref", ref_path, "reference trajectory csv")->required();
  rpe->add_option("--delta", delta, "pair separation along the reference, meters");

  auto* drift = app.add_subcommand("drift", "final drift between trajectories");
  drift->add_option("--est", est_path, "estimated trajectory csv")->required();
  drift->add_option("--ref", ref_path, "reference trajectory csv")->required();

  std::string spec_path;
  auto* sim = app.add_subcommand("sim", "generate synthetic logs");
  sim->add_option("--spec", spec_path, "trajectory/noise spec file")->required();
  sim->add_option("--out", out_dir, "output directory");

  long iterations = 100000, warmup = 1000;
  auto* bench = app.add_subcommand("bench", "per-step latency of the filter operations");
  bench->add_option("--iterations", iterations, "timed iterations per operation");
  bench->add_option("--warmup", warmup, "untimed warmup iterations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (rpe->parsed()) return cmd_rpe(est_path, ref_path, delta);
    if (drift->parsed()) return cmd_drift(est_path, ref_path);
    if (sim->parsed()) return cmd_sim(spec_path, out_dir);
    if (bench->parsed()) return cmd_bench(iterations, warmup);
  } catch (const inekf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const inekf::LogParseError& e) {
    std::cerr << "log parse error: " << e.what() << "\n";
    return 2;
  } catch (const inekf::InsufficientOverlap& e) {
    std::cerr << "metric error: " << e.what() << "\n";
    return 2;
  } catch (const inekf::Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
