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

#ifndef LOCKSTEP_MANAGERS_ACTION_MANAGER_HPP_
#define LOCKSTEP_MANAGERS_ACTION_MANAGER_HPP_

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/core/ordered_map.hpp"
#include "lockstep/core/world_array.hpp"
#include "lockstep/managers/registry.hpp"
#include "lockstep/managers/term_cfg.hpp"

namespace lockstep::managers {

// Splits the policy output into per-term slices and turns them into joint
// targets. Keeps the current and previous processed actions.
class ActionManager {
 public:
  struct Slice {
    std::string name;
    std::size_t offset = 0;
    std::size_t dim = 0;
    std::optional<double> clip;
    ActionTerm term;
  };

  ActionManager() = default;
  ActionManager(const OrderedMap<ActionTermCfg>& cfgs, const Env& env, std::size_t n_worlds,
                std::vector<double> default_targets)
      : n_worlds_(n_worlds), defaults_(std::move(default_targets)) {
    for (const auto& [name, cfg] : cfgs) {
      Slice s;
      s.name = name;
      s.offset = dim_;
      s.clip = cfg.clip;
      s.term = action_terms().bind(cfg.func, env, cfg.params, "actions." + name);
      s.dim = s.term.dim;
      dim_ += s.dim;
      slices_.push_back(std::move(s));
    }
    action_ = WorldArray<double>(n_worlds, dim_);
    prev_ = WorldArray<double>(n_worlds, dim_);
    targets_ = WorldArray<double>(n_worlds, defaults_.size());
    for (std::size_t w = 0; w < n_worlds; ++w) {
      std::copy(defaults_.begin(), defaults_.end(), targets_.row(w).begin());
    }
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Slice>& slices() const { return slices_; }
  const WorldArray<double>& action() const { return action_; }
  const WorldArray<double>& prev_action() const { return prev_; }
  const WorldArray<double>& targets() const { return targets_; }

  void process(const Env& env, const WorldArray<double>& raw) {
    if (raw.worlds() != n_worlds_ || raw.cols() != dim_) {
      throw std::invalid_argument("actions have shape " + std::to_string(raw.worlds()) + "x" +
                                  std::to_string(raw.cols()) + ", expected " +
                                  std::to_string(n_worlds_) + "x" + std::to_string(dim_));
    }
    prev_ = action_;
    action_ = raw;
    for (const Slice& s : slices_) {
      if (!s.clip) continue;
      const double c = *s.clip;
      for (std::size_t w = 0; w < n_worlds_; ++w) {
        for (std::size_t i = s.offset; i < s.offset + s.dim; ++i) {
          action_(w, i) = std::clamp(action_(w, i), -c, c);
        }
      }
    }
    map_targets(env);
  }

  // Zeroes both stored actions for the listed worlds and recomputes targets.
  void reset(const Env& env, std::span<const std::size_t> worlds) {
    for (std::size_t w : worlds) {
      action_.fill_row(w, 0.0);
      prev_.fill_row(w, 0.0);
    }
    map_targets(env);
  }

 private:
  void map_targets(const Env& env) {
    for (const Slice& s : slices_) s.term.fn(env, action_, s.offset, targets_);
  }

  std::size_t n_worlds_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> defaults_;
  std::vector<Slice> slices_;
  WorldArray<double> action_, prev_, targets_;
};

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_ACTION_MANAGER_HPP_
