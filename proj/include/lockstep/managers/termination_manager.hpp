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

#ifndef LOCKSTEP_MANAGERS_TERMINATION_MANAGER_HPP_
#define LOCKSTEP_MANAGERS_TERMINATION_MANAGER_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lockstep/core/ordered_map.hpp"
#include "lockstep/managers/registry.hpp"
#include "lockstep/managers/term_cfg.hpp"

namespace lockstep::managers {

inline constexpr const char* kNonfiniteTerm = "nonfinite";

class TerminationManager {
 public:
  struct Term {
    std::string name;
    bool time_out = false;
    TerminationTerm fn;
    std::vector<std::uint8_t> fired;
    std::size_t count = 0;  // worlds fired at the last compute
  };

  TerminationManager() = default;
  TerminationManager(const OrderedMap<TerminationTermCfg>& cfgs, const Env& env,
                     std::size_t n_worlds)
      : n_worlds_(n_worlds), terminated_(n_worlds, 0), truncated_(n_worlds, 0),
        reset_(n_worlds, 0) {
    std::size_t timeouts = 0;
    for (const auto& [name, cfg] : cfgs) {
      if (name == kNonfiniteTerm) throw ConfigError("terminations: 'nonfinite' is reserved");
      if (cfg.time_out && ++timeouts > 1) {
        throw ConfigError("terminations." + name + ": only one time_out term is allowed");
      }
      Term t;
      t.name = name;
      t.time_out = cfg.time_out;
      t.fn = termination_terms().bind(cfg.func, env, cfg.params, "terminations." + name);
      t.fired.assign(n_worlds, 0);
      terms_.insert(name, std::move(t));
    }
  }

  const OrderedMap<Term>& terms() const { return terms_; }
  const std::vector<std::uint8_t>& terminated() const { return terminated_; }
  const std::vector<std::uint8_t>& truncated() const { return truncated_; }
  const std::vector<std::uint8_t>& reset_flags() const { return reset_; }
  std::size_t nonfinite_count() const { return nonfinite_count_; }

  // `nonfinite` flags worlds whose state went bad during the substeps.
  void compute(const Env& env, std::span<const std::uint8_t> nonfinite) {
    std::fill(terminated_.begin(), terminated_.end(), 0);
    std::fill(truncated_.begin(), truncated_.end(), 0);
    for (auto& [name, t] : terms_) {
      std::fill(t.fired.begin(), t.fired.end(), 0);
      t.fn(env, t.fired);
      t.count = 0;
      auto& target = t.time_out ? truncated_ : terminated_;
      for (std::size_t w = 0; w < n_worlds_; ++w) {
        if (!t.fired[w]) continue;
        target[w] = 1;
        ++t.count;
      }
    }
    nonfinite_count_ = 0;
    for (std::size_t w = 0; w < n_worlds_; ++w) {
      if (nonfinite[w]) {
        terminated_[w] = 1;
        ++nonfinite_count_;
      }
      reset_[w] = terminated_[w] | truncated_[w];
    }
  }

 private:
  std::size_t n_worlds_ = 0;
  OrderedMap<Term> terms_;
  std::vector<std::uint8_t> terminated_, truncated_, reset_;
  std::size_t nonfinite_count_ = 0;
};

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_TERMINATION_MANAGER_HPP_
