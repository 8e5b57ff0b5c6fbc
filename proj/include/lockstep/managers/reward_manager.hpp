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

#ifndef LOCKSTEP_MANAGERS_REWARD_MANAGER_HPP_
#define LOCKSTEP_MANAGERS_REWARD_MANAGER_HPP_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lockstep/core/ordered_map.hpp"
#include "lockstep/managers/registry.hpp"
#include "lockstep/managers/term_cfg.hpp"

namespace lockstep::managers {

// total = sum_i w_i * r_i * dt. A term value that is not finite is named in
// nonfinite_terms() and contributes nothing to the total, so one broken term
// cannot poison the return of every world it touches.
class RewardManager {
 public:
  struct Term {
    std::string name;
    double weight = 0.0;
    RewardTerm fn;
    std::vector<double> raw;       // r_i per world, last step
    std::vector<double> step;      // w_i * r_i * dt per world, last step
    std::vector<double> episodic;  // running sum of step
    double last_episode_mean = 0.0;
  };

  RewardManager() = default;
  RewardManager(const OrderedMap<RewardTermCfg>& cfgs, const Env& env, std::size_t n_worlds)
      : n_worlds_(n_worlds), total_(n_worlds, 0.0) {
    for (const auto& [name, cfg] : cfgs) {
      if (!std::isfinite(cfg.weight)) throw ConfigError("rewards." + name + ".weight: not finite");
      Term t;
      t.name = name;
      t.weight = cfg.weight;
      t.fn = reward_terms().bind(cfg.func, env, cfg.params, "rewards." + name);
      t.raw.assign(n_worlds, 0.0);
      t.step.assign(n_worlds, 0.0);
      t.episodic.assign(n_worlds, 0.0);
      terms_.insert(name, std::move(t));
    }
  }

  const OrderedMap<Term>& terms() const { return terms_; }
  const Term& term(const std::string& name) const { return terms_.at(name); }
  void set_weight(const std::string& name, double w) { terms_.at(name).weight = w; }
  const std::vector<double>& total() const { return total_; }
  const std::vector<std::string>& nonfinite_terms() const { return nonfinite_; }

  const std::vector<double>& compute(const Env& env, double dt) {
    nonfinite_.clear();
    std::fill(total_.begin(), total_.end(), 0.0);
    for (auto& [name, t] : terms_) {
      t.fn(env, t.raw);
      bool bad = false;
      const double scale = t.weight * dt;
      for (std::size_t w = 0; w < n_worlds_; ++w) {
        double v = t.raw[w];
        if (!std::isfinite(v)) {
          bad = true;
          v = 0.0;
        }
        t.step[w] = scale * v;
        t.episodic[w] += t.step[w];
        total_[w] += t.step[w];
      }
      if (bad) nonfinite_.push_back(name);
    }
    return total_;
  }

  // Records the mean episodic sum over the listed worlds and clears them.
  void reset(std::span<const std::size_t> worlds) {
    for (auto& [name, t] : terms_) {
      if (worlds.empty()) {
        t.last_episode_mean = 0.0;
        continue;
      }
      double sum = 0.0;
      for (std::size_t w : worlds) {
        sum += t.episodic[w];
        t.episodic[w] = 0.0;
      }
      t.last_episode_mean = sum / static_cast<double>(worlds.size());
    }
  }

 private:
  std::size_t n_worlds_ = 0;
  OrderedMap<Term> terms_;
  std::vector<double> total_;
  std::vector<std::string> nonfinite_;
};

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_REWARD_MANAGER_HPP_
