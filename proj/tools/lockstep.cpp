// Copyright 2026 The Lockstep Authors
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

// lockstep: roll out, benchmark, replay and serve batched environments.
//
//   lockstep list-tasks
//   lockstep config Velocity-Rough                    every override path with its default
//   lockstep run Velocity-Flat --policy random --steps 500 --env.scene.num-envs 256
//   lockstep benchmark Velocity-Flat --worlds 1,64,1024,4096 --duration 2
//   lockstep serve Velocity-Rough --port 8765
//   lockstep replay capture_Velocity-Flat_1234.lscap [--serve]
//
// Exit codes: 0 success, 1 runtime failure (I/O, corrupt dump, socket),
// 2 bad usage or config, 3 run finished but wrote a nonfinite capture dump.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lockstep/cli/runner.hpp"
#include "lockstep/config/overrides.hpp"
#include "lockstep/viewer/server.hpp"
#include "lockstep/viewer/session.hpp"

namespace {

using namespace lockstep;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::vector<std::pair<std::string, std::string>> collect_overrides(const CLI::App& sub) {
  return config::parse_override_args(sub.remaining());
}

// Runs the bridge until Ctrl-C, or for `duration` seconds when positive.
int serve_session(std::unique_ptr<viewer::Session> session, unsigned short port, double speed,
                  double duration, const std::string& static_dir) {
  viewer::BridgeCore core(std::move(session));
  viewer::BridgeServer server(core, {"127.0.0.1", port, static_dir});
  server.start();
  std::cerr << "viewer bridge on ws://127.0.0.1:" << server.port() << "/ws (" << core.mode()
            << "), health at http://127.0.0.1:" << server.port() << "/healthz\n";
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread timer;
  if (duration > 0.0) {
    timer = std::thread([duration] {
      const auto until = std::chrono::steady_clock::now() +
                         std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(duration));
      while (!g_stop && std::chrono::steady_clock::now() < until) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      g_stop = true;
    });
  }
  core.run(g_stop, speed);
  if (timer.joinable()) timer.join();
  server.stop();
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched manager-based RL environments: rollouts, benchmarks, replay and viewer."};
  app.require_subcommand(1);
  app.footer(
      "Any --env.* or --agent.* path may follow the task id, e.g. --env.scene.num-envs 4096.\n"
      "Run `lockstep config <task>` to list every path with its type and default.\n"
      "Exit codes: 0 ok, 1 runtime failure, 2 usage or config error, 3 nonfinite dump written.\n"
      "The viewer port defaults to $" + std::string(viewer::kPortEnvVar) + " or " +
      std::to_string(viewer::kDefaultPort) + ".");

  auto* list = app.add_subcommand("list-tasks", "List registered task ids");

  std::string task;
  auto* cfg_cmd = app.add_subcommand("config", "Print every override path for a task");
  cfg_cmd->add_option("task", task, "Task id")->required();
  bool as_json = false;
  cfg_cmd->add_flag("--json", as_json, "Print the resolved config tree as JSON instead");
  cfg_cmd->allow_extras();

  cli::AgentCfg agent;
  std::string policy = agent.policy, metrics_path = agent.metrics_path;
  std::int64_t steps = agent.steps, log_interval = agent.log_interval;
  auto* run = app.add_subcommand("run", "Roll a scripted policy and write a metrics log");
  run->add_option("task", task, "Task id")->required();
  run->add_option("--policy", policy, "zero | random | scripted-sine (agent.policy)");
  run->add_option("--steps", steps, "Control steps to run (agent.steps)");
  run->add_option("--log-interval", log_interval, "Steps per metrics record (agent.log-interval)");
  run->add_option("--metrics", metrics_path, "Metrics JSONL path, '-' for stdout (agent.metrics-path)");
  run->allow_extras();
  run->footer([] {
    return "Config paths (Velocity-Flat defaults; `lockstep config <task>` lists any task):\n" +
           config::help_text(cli::config_tree({tasks::velocity_flat_cfg(), cli::AgentCfg{}}));
  });

  std::vector<std::size_t> worlds{1, 64, 1024, 4096};
  double duration = 2.0;
  auto* bench = app.add_subcommand("benchmark", "Timed zero-policy stepping per world count");
  bench->add_option("task", task, "Task id")->required();
  bench->add_option("--worlds", worlds, "World counts")->delimiter(',');
  bench->add_option("--duration", duration, "Seconds of timed stepping per world count");
  bench->allow_extras();

  unsigned short port = viewer::default_port();
  double speed = 1.0, serve_for = 0.0;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Run a live env behind the viewer bridge");
  serve->add_option("task", task, "Task id")->required();
  serve->add_option("--policy", policy, "zero | random | scripted-sine");
  serve->add_option("--port", port, "Listen port (0 picks a free one)");
  serve->add_option("--speed", speed, "Sim speed relative to real time; 0 runs flat out");
  serve->add_option("--for", serve_for, "Stop after this many seconds (0: until Ctrl-C)");
  serve->add_option("--static-dir", static_dir, "Serve browser assets from this directory");
  serve->allow_extras();

  std::string dump_path;
  bool replay_serve = false;
  auto* replay = app.add_subcommand("replay", "Summarize a capture dump or serve it for scrubbing");
  replay->add_option("dump", dump_path, "Path to a .lscap file")->required();
  replay->add_flag("--serve", replay_serve, "Start the viewer bridge in replay mode");
  replay->add_option("--port", port, "Listen port (0 picks a free one)");
  replay->add_option("--for", serve_for, "Stop after this many seconds (0: until Ctrl-C)");
  replay->add_option("--static-dir", static_dir, "Serve browser assets from this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (*list) {
      for (const auto& id : tasks::task_ids()) std::cout << id << "\n";
      return cli::kExitOk;
    }
    if (*cfg_cmd) {
      const auto resolved = cli::resolve_config(task, collect_overrides(*cfg_cmd));
      const Json tree = cli::config_tree(resolved);
      std::cout << (as_json ? tree.dump(2) + "\n" : config::help_text(tree));
      return cli::kExitOk;
    }
    if (*run) {
      // Convenience flags first so explicit --agent.* paths win.
      std::vector<std::pair<std::string, std::string>> ov = {
          {"agent.policy", policy},
          {"agent.steps", std::to_string(steps)},
          {"agent.log_interval", std::to_string(log_interval)},
          {"agent.metrics_path", metrics_path}};
      for (auto& kv : collect_overrides(*run)) ov.push_back(std::move(kv));
      const auto cfg = cli::resolve_config(task, ov);
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (cfg.agent.metrics_path != "-") {
        file.open(cfg.agent.metrics_path, std::ios::trunc);
        if (!file) {
          std::cerr << "error: cannot write metrics to '" << cfg.agent.metrics_path << "'\n";
          return cli::kExitError;
        }
        out = &file;
      }
      const auto s = cli::run_rollout(cfg, *out);
      std::cerr << task << ": " << s.steps << " steps x " << cfg.env.scene.num_envs << " worlds in "
                << s.wall_seconds << " s ("
                << (s.wall_seconds > 0 ? static_cast<double>(s.steps) / s.wall_seconds : 0.0)
                << " steps/s)\n";
      for (const auto& d : s.dumps) std::cerr << "nonfinite state: capture written to " << d << "\n";
      return s.exit_code;
    }
    if (*bench) {
      const auto cfg = cli::resolve_config(task, collect_overrides(*bench));
      std::cout << cli::format_benchmark(cli::run_benchmark(cfg.env, worlds, duration));
      return cli::kExitOk;
    }
    if (*serve) {
      auto ov = collect_overrides(*serve);
      ov.insert(ov.begin(), {"agent.policy", policy});
      auto cfg = cli::resolve_config(task, ov);
      return serve_session(std::make_unique<viewer::LiveSession>(cfg.env, cfg.agent), port, speed,
                           serve_for, static_dir);
    }
    if (*replay) {
      const auto d = env::load_capture(dump_path);
      std::cout << cli::summarize_dump(d);
      if (!replay_serve) return cli::kExitOk;
      return serve_session(std::make_unique<viewer::ReplaySession>(d), port, 1.0, serve_for,
                           static_dir);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitError;
  }
  return cli::kExitUsage;
}
