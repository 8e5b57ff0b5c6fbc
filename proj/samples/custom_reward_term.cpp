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

// Registers a new reward term and uses it from a config, the same way the
// built-in terms are wired. The term pays for keeping the base level with
// the local terrain under it.

#include <cmath>
#include <cstdio>

#include "lockstep/env/env.hpp"
#include "lockstep/tasks/velocity.hpp"

namespace {

using namespace lockstep;

void register_level_base() {
  managers::register_builtin_terms();
  managers::reward_terms().add(
      "level_base", [](const env::ManagerBasedRlEnv&, const Json& params, const std::string& where) {
        managers::Params p(params, where);
        const double sigma = p.get("sigma", 0.2);
        p.finish();
        if (!(sigma > 0.0)) throw ConfigError(p.path("sigma") + ": must be > 0");
        return managers::RewardTerm([sigma](const env::ManagerBasedRlEnv& e, std::span<double> out) {
          for (std::size_t w = 0; w < out.size(); ++w) {
            const double pitch = e.data().root_pitch[w];
            out[w] = std::exp(-(pitch * pitch) / (sigma * sigma));
          }
        });
      });
}

}  // namespace

int main() {
  register_level_base();

  env::EnvCfg cfg = tasks::velocity_rough_cfg();
  cfg.scene.num_envs = 16;
  cfg.capture_dir = "/tmp";
  cfg.rewards.insert("level_base", {"level_base", 0.5, Json{{"sigma", 0.15}}});
  env::ManagerBasedRlEnv e(cfg);
  e.reset();

  const WorldArray<double> zeros(e.num_envs(), e.actions().dim());
  for (int t = 0; t < 100; ++t) e.step(zeros);

  const auto& term = e.rewards().term("level_base");
  double mean_raw = 0.0;
  for (double v : term.raw) mean_raw += v;
  mean_raw /= static_cast<double>(term.raw.size());
  std::printf("level_base after %lld steps: mean raw %.4f, weight %.2f, per-step share %.6f\n",
              static_cast<long long>(e.common_step()), mean_raw, term.weight,
              term.weight * mean_raw * e.step_dt());
  std::printf("terrain rows in use:");
  for (std::size_t w = 0; w < e.num_envs(); ++w) std::printf(" %zu", e.terrain_level(w));
  std::printf("\n");
  return 0;
}
