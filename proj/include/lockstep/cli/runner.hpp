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

#ifndef LOCKSTEP_CLI_RUNNER_HPP_
#define LOCKSTEP_CLI_RUNNER_HPP_

// The pieces behind the command-line tool, kept in the library so tests can
// drive them without spawning processes: config resolution with overrides,
// scripted policies, the metrics log, benchmarking and dump summaries.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lockstep/config/overrides.hpp"
#include "lockstep/env/env.hpp"
#include "lockstep/tasks/velocity.hpp"

namespace lockstep::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;        // bad flags, config or task id
inline constexpr int kExitDumpWritten = 3;  // run finished but a world went nonfinite

struct AgentCfg {
  std::string policy = "zero";  // zero | random | scripted-sine
  std::int64_t steps = 1000;
  std::int64_t log_interval = 50;
  std::string metrics_path = "metrics.jsonl";
  double sine_amplitude = 0.5;  // action units
  double sine_frequency = 1.0;  // Hz
  // Wall-clock throughput varies run to run, so it is kept out of the log by
  // default to keep logs from identical configs byte-identical.
  bool log_timing = false;

  void validate() const {
    if (policy != "zero" && policy != "random" && policy != "scripted-sine") {
      std::string msg = "agent.policy: unknown policy '" + policy + "'";
      const auto close = nearest(policy, {"zero", "random", "scripted-sine"});
      if (!close.empty()) msg += "; did you mean " + join(close, " or ") + "?";
      throw ConfigError(msg);
    }
    if (steps < 0) throw ConfigError("agent.steps must be >= 0");
    if (log_interval < 1) throw ConfigError("agent.log_interval must be >= 1");
    if (!std::isfinite(sine_amplitude) || !std::isfinite(sine_frequency)) {
      throw ConfigError("agent.sine_*: must be finite");
    }
  }
};

inline Json to_json_value(const AgentCfg& a) {
  return {{"policy", a.policy},
          {"steps", a.steps},
          {"log_interval", a.log_interval},
          {"metrics_path", a.metrics_path},
          {"sine_amplitude", a.sine_amplitude},
          {"sine_frequency", a.sine_frequency},
          {"log_timing", a.log_timing}};
}

inline AgentCfg agent_cfg_from_json(const Json& j, const std::string& where = "agent") {
  AgentCfg a;
  ObjectReader r(j, where);
  r.get("policy", a.policy);
  r.get("steps", a.steps);
  r.get("log_interval", a.log_interval);
  r.get("metrics_path", a.metrics_path);
  r.get("sine_amplitude", a.sine_amplitude);
  r.get("sine_frequency", a.sine_frequency);
  r.get("log_timing", a.log_timing);
  r.finish();
  a.validate();
  return a;
}

struct RunConfig {
  env::EnvCfg env;
  AgentCfg agent;
};

inline Json config_tree(const RunConfig& c) {
  return {{"env", env::to_json_value(c.env)}, {"agent", to_json_value(c.agent)}};
}

// Task defaults, then overrides in order, then a full re-parse so every
// cross-field check runs on the final values.
inline RunConfig resolve_config(const std::string& task_id,
                                const std::vector<std::pair<std::string, std::string>>& overrides,
                                AgentCfg agent = {}) {
  RunConfig base{tasks::make_task_cfg(task_id), std::move(agent)};
  Json tree = config_tree(base);
  for (const auto& [path, value] : overrides) config::apply_override(tree, path, value);
  RunConfig out{env::env_cfg_from_json(tree["env"]), agent_cfg_from_json(tree["agent"])};
  out.env.validate();
  return out;
}

// Open-loop action sources. Draws come from per-world streams keyed by the
// env seed and global world id, like everything else in the batch.
class Policy {
 public:
  Policy(const AgentCfg& cfg, const env::ManagerBasedRlEnv& e)
      : cfg_(cfg), actions_(e.num_envs(), e.actions().dim()), step_dt_(e.step_dt()),
        rng_(e.cfg().seed, "policy", e.num_envs(), e.world_offset()) {}

  const WorldArray<double>& act(std::int64_t step) {
    const std::size_t a = actions_.cols();
    if (cfg_.policy == "random") {
      for (std::size_t w = 0; w < actions_.worlds(); ++w) {
        for (std::size_t i = 0; i < a; ++i) actions_(w, i) = rng_[w].uniform(-1.0, 1.0);
      }
    } else if (cfg_.policy == "scripted-sine") {
      const double t = static_cast<double>(step) * step_dt_;
      for (std::size_t i = 0; i < a; ++i) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(a);
        const double v =
            cfg_.sine_amplitude * std::sin(2.0 * std::numbers::pi * cfg_.sine_frequency * t + phase);
        for (std::size_t w = 0; w < actions_.worlds(); ++w) actions_(w, i) = v;
      }
    }
    return actions_;
  }

 private:
  AgentCfg cfg_;
  WorldArray<double> actions_;
  double step_dt_;
  WorldStreams rng_;
};

// Aggregates one logging interval into a JSON line. Every record has the
// same keys in the same order.
class MetricsLogger {
 public:
  MetricsLogger(const env::ManagerBasedRlEnv& e, bool log_timing) : log_timing_(log_timing) {
    for (const auto& [name, t] : e.rewards().terms()) episode_sum_.insert(name, 0.0);
    for (const auto& [name, t] : e.terminations().terms()) term_counts_.insert(name, 0);
    term_counts_.insert(managers::kNonfiniteTerm, 0);
    start_ = std::chrono::steady_clock::now();
  }

  void record(const env::ManagerBasedRlEnv& e, const env::StepResult& r) {
    ++steps_;
    for (double v : r.reward) reward_sum_ += v;
    reward_count_ += r.reward.size();
    const std::size_t resets = e.last_reset_ids().size();
    if (resets) {
      for (const auto& [name, t] : e.rewards().terms()) {
        episode_sum_.at(name) += t.last_episode_mean * static_cast<double>(resets);
      }
      episodes_ += resets;
    }
    for (const auto& [name, t] : e.terminations().terms()) term_counts_.at(name) += t.count;
    term_counts_.at(managers::kNonfiniteTerm) += e.terminations().nonfinite_count();
  }

  Json flush(const env::ManagerBasedRlEnv& e) {
    Json j;
    j["step"] = e.common_step();
    if (log_timing_) {
      const auto now = std::chrono::steady_clock::now();
      const double s = std::chrono::duration<double>(now - start_).count();
      j["steps_per_sec"] = s > 0.0 ? static_cast<double>(steps_) / s : 0.0;
      start_ = now;
    }
    j["mean_reward"] = reward_count_ ? reward_sum_ / static_cast<double>(reward_count_) : 0.0;
    j["episodes"] = episodes_;
    Json ep = Json::object();
    for (auto& [name, sum] : episode_sum_) {
      ep[name] = episodes_ ? sum / static_cast<double>(episodes_) : 0.0;
      sum = 0.0;
    }
    j["episode_reward"] = ep;
    Json tc = Json::object();
    for (auto& [name, count] : term_counts_) {
      tc[name] = count;
      count = 0;
    }
    j["terminations"] = tc;
    Json cur = Json::object();
    for (const auto& [name, t] : e.curriculum().terms()) cur[name] = e.curriculum().report(e, name);
    j["curriculum"] = cur;
    std::vector<std::size_t> hist(e.terrain_rows(), 0);
    for (std::size_t w = 0; w < e.num_envs(); ++w) {
      const std::size_t lvl = e.terrain_level(w);
      if (lvl < hist.size()) ++hist[lvl];
    }
    j["terrain_levels"] = hist;
    steps_ = 0;
    reward_sum_ = 0.0;
    reward_count_ = 0;
    episodes_ = 0;
    return j;
  }

 private:
  bool log_timing_;
  std::chrono::steady_clock::time_point start_;
  std::int64_t steps_ = 0;
  double reward_sum_ = 0.0;
  std::size_t reward_count_ = 0;
  std::size_t episodes_ = 0;
  OrderedMap<double> episode_sum_;
  OrderedMap<std::size_t> term_counts_;
};

struct RunSummary {
  std::int64_t steps = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> dumps;
  int exit_code = kExitOk;
};

// Rolls the configured policy and writes one metrics line per interval,
// plus a final partial interval if the step count is not a multiple.
inline RunSummary run_rollout(const RunConfig& cfg, std::ostream& metrics) {
  env::ManagerBasedRlEnv e(cfg.env);
  e.reset();
  Policy policy(cfg.agent, e);
  MetricsLogger log(e, cfg.agent.log_timing);
  const auto t0 = std::chrono::steady_clock::now();
  std::int64_t since_log = 0;
  for (std::int64_t t = 0; t < cfg.agent.steps; ++t) {
    const auto r = e.step(policy.act(t));
    log.record(e, r);
    if (++since_log == cfg.agent.log_interval) {
      metrics << log.flush(e).dump() << "\n";
      since_log = 0;
    }
  }
  if (since_log > 0) metrics << log.flush(e).dump() << "\n";
  metrics.flush();
  RunSummary s;
  s.steps = cfg.agent.steps;
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.dumps = e.dumps();
  s.exit_code = s.dumps.empty() ? kExitOk : kExitDumpWritten;
  return s;
}

struct BenchmarkRow {
  std::size_t worlds = 0;
  std::int64_t control_steps = 0;
  double seconds = 0.0;
  double control_steps_per_sec = 0.0;
  double world_steps_per_sec = 0.0;
  double world_substeps_per_sec = 0.0;
};

// Zero-policy stepping for at least `duration_s` per world count, after a
// short warmup. Captures stay on so the numbers include the ring cost.
inline std::vector<BenchmarkRow> run_benchmark(const env::EnvCfg& base,
                                               const std::vector<std::size_t>& world_counts,
                                               double duration_s, std::int64_t warmup = 5) {
  std::vector<BenchmarkRow> rows;
  for (std::size_t n : world_counts) {
    env::EnvCfg cfg = base;
    cfg.scene.num_envs = n;
    env::ManagerBasedRlEnv e(cfg);
    e.reset();
    const WorldArray<double> zeros(n, e.actions().dim());
    for (std::int64_t i = 0; i < warmup; ++i) e.step(zeros);
    BenchmarkRow row;
    row.worlds = n;
    const auto t0 = std::chrono::steady_clock::now();
    do {
      e.step(zeros);
      ++row.control_steps;
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } while (row.seconds < duration_s);
    row.control_steps_per_sec = static_cast<double>(row.control_steps) / row.seconds;
    row.world_steps_per_sec = row.control_steps_per_sec * static_cast<double>(n);
    row.world_substeps_per_sec = row.world_steps_per_sec * static_cast<double>(cfg.decimation);
    rows.push_back(row);
  }
  return rows;
}

inline std::string format_benchmark(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream os;
  os << "worlds\tcontrol_steps\tseconds\tsteps_per_sec\tworld_steps_per_sec\tworld_substeps_per_sec\n";
  os.setf(std::ios::fixed);
  for (const auto& r : rows) {
    os.precision(3);
    os << r.worlds << "\t" << r.control_steps << "\t" << r.seconds << "\t";
    os.precision(1);
    os << r.control_steps_per_sec << "\t" << r.world_steps_per_sec << "\t"
       << r.world_substeps_per_sec << "\n";
  }
  return os.str();
}

struct NonfiniteHit {
  std::size_t frame = 0;
  std::int64_t sim_step = 0;
  std::size_t world = 0;
  std::string array;  // q, qd or ctrl
  std::size_t index = 0;
};

inline std::optional<NonfiniteHit> first_nonfinite(const env::CaptureDump& d) {
  for (std::size_t k = 0; k < d.frames.size(); ++k) {
    const auto& f = d.frames[k];
    const std::pair<const char*, const WorldArray<double>*> arrays[] = {
        {"q", &f.q}, {"qd", &f.qd}, {"ctrl", &f.ctrl}};
    for (std::size_t w = 0; w < d.n_worlds; ++w) {
      for (const auto& [name, a] : arrays) {
        const auto row = a->row(w);
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (!std::isfinite(row[i])) return NonfiniteHit{k, f.sim_step, w, name, i};
        }
      }
    }
  }
  return std::nullopt;
}

inline std::string summarize_dump(const env::CaptureDump& d) {
  std::ostringstream os;
  os << "task: " << d.meta.value("task_id", std::string("?")) << "\n";
  os << "worlds: " << d.n_worlds << "  nq: " << d.nq << "  nu: " << d.nu << "\n";
  os << "frames: " << d.frames.size();
  if (!d.frames.empty()) {
    os << " (sim_step " << d.frames.front().sim_step << ".." << d.frames.back().sim_step << ")";
  }
  os << "\n";
  if (d.meta.contains("crash_sim_step")) os << "crash_sim_step: " << d.meta["crash_sim_step"] << "\n";
  if (d.meta.contains("flagged_worlds")) os << "flagged_worlds: " << d.meta["flagged_worlds"].dump() << "\n";
  if (d.meta.contains("offending_terms") && !d.meta["offending_terms"].empty()) {
    os << "offending_terms: " << d.meta["offending_terms"].dump() << "\n";
  }
  if (const auto hit = first_nonfinite(d)) {
    os << "first nonfinite: frame " << hit->frame << " (sim_step " << hit->sim_step << ") world "
       << hit->world << " array " << hit->array << "[" << hit->index << "]\n";
  } else {
    os << "first nonfinite: none in captured frames\n";
  }
  return os.str();
}

}  // namespace lockstep::cli

#endif  // LOCKSTEP_CLI_RUNNER_HPP_
