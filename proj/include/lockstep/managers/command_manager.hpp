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

#ifndef LOCKSTEP_MANAGERS_COMMAND_MANAGER_HPP_
#define LOCKSTEP_MANAGERS_COMMAND_MANAGER_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lockstep/core/ordered_map.hpp"
#include "lockstep/core/rng.hpp"
#include "lockstep/core/world_array.hpp"
#include "lockstep/managers/term_cfg.hpp"

namespace lockstep::managers {

// Uniform goal commands per channel, redrawn every resample period and on
// reset. Ranges are mutable so curricula can widen them.
class CommandManager {
 public:
  CommandManager() = default;
  CommandManager(const CommandCfg& cfg, std::size_t n_worlds, double step_dt, std::uint64_t seed,
                 std::uint64_t world_offset)
      : ranges_(cfg.ranges), values_(n_worlds, cfg.ranges.size()), countdown_(n_worlds, 0),
        rng_(seed, "command", n_worlds, world_offset) {
    if (!(cfg.resample_period > 0.0)) throw ConfigError("commands.resample_period must be > 0");
    for (const auto& [name, r] : ranges_) {
      if (!(r.lo <= r.hi)) throw ConfigError("commands.ranges." + name + ": lo must be <= hi");
    }
    period_steps_ = std::max<std::int64_t>(1, std::llround(cfg.resample_period / step_dt));
  }

  std::size_t num_channels() const { return ranges_.size(); }
  std::int64_t period_steps() const { return period_steps_; }
  const OrderedMap<ChannelRange>& ranges() const { return ranges_; }
  const WorldArray<double>& values() const { return values_; }
  double value(std::size_t w, std::size_t channel) const { return values_(w, channel); }

  std::size_t channel(const std::string& name) const {
    std::size_t i = 0;
    for (const auto& [k, v] : ranges_) {
      if (k == name) return i;
      ++i;
    }
    throw std::invalid_argument("unknown command channel '" + name + "'");
  }

  void set_range(const std::string& name, ChannelRange r) { ranges_.at(name) = r; }

  void resample(std::span<const std::size_t> worlds) {
    for (std::size_t w : worlds) {
      std::size_t c = 0;
      for (const auto& [name, r] : ranges_) values_(w, c++) = rng_[w].uniform(r.lo, r.hi);
      countdown_[w] = period_steps_;
    }
  }

  // One control step elapsed.
  void update() {
    for (std::size_t w = 0; w < countdown_.size(); ++w) {
      if (--countdown_[w] > 0) continue;
      const std::size_t one[] = {w};
      resample(one);
    }
  }

  // Lets tests and scripted harnesses pin a command.
  void set_value(std::size_t w, std::size_t channel, double v) { values_(w, channel) = v; }

 private:
  OrderedMap<ChannelRange> ranges_;
  WorldArray<double> values_;
  std::vector<std::int64_t> countdown_;
  std::int64_t period_steps_ = 1;
  WorldStreams rng_;
};

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_COMMAND_MANAGER_HPP_
