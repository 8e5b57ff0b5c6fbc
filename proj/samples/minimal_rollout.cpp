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

// Builds the flat velocity task for 32 worlds, drives it with random
// actions for five simulated seconds and prints what the reward manager
// tracked per episode.

#include <cstdio>
#include <numeric>

#include "lockstep/core/rng.hpp"
#include "lockstep/env/env.hpp"
#include "lockstep/tasks/velocity.hpp"

int main() {
  using namespace lockstep;

  env::EnvCfg cfg = tasks::velocity_flat_cfg();
  cfg.scene.num_envs = 32;
  cfg.episode_length_s = 2.0;
  cfg.capture_dir = "/tmp";
  env::ManagerBasedRlEnv e(cfg);
  e.reset(/*seed=*/7);

  std::printf("%zu worlds, %zu actions, policy obs %zu, dt %.3f s x %zu substeps\n", e.num_envs(),
              e.actions().dim(), e.observations().group("policy").cols(), e.physics_dt(),
              e.cfg().decimation);

  WorldStreams rng(7, "sample_policy", e.num_envs());
  WorldArray<double> actions(e.num_envs(), e.actions().dim());
  const auto steps = static_cast<int>(5.0 / e.step_dt());
  double reward = 0.0;
  for (int t = 0; t < steps; ++t) {
    for (std::size_t w = 0; w < actions.worlds(); ++w) {
      for (double& a : actions.row(w)) a = rng[w].uniform(-0.5, 0.5);
    }
    const auto r = e.step(actions);
    reward += std::accumulate(r.reward.begin(), r.reward.end(), 0.0);
    if (!e.last_reset_ids().empty()) {
      std::printf("step %4d: %zu worlds reset, mean episodic reward by term:\n", t + 1,
                  e.last_reset_ids().size());
      for (const auto& [name, term] : e.rewards().terms()) {
        std::printf("    %-20s % .4f\n", name.c_str(), term.last_episode_mean);
      }
    }
  }
  std::printf("mean per-step reward %.5f over %d steps; sim_step %lld\n",
              reward / static_cast<double>(steps * e.num_envs()), steps,
              static_cast<long long>(e.state().sim_step));
  return e.dumps().empty() ? 0 : 3;
}
