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

#ifndef LOCKSTEP_MANAGERS_OBSERVATION_MANAGER_HPP_
#define LOCKSTEP_MANAGERS_OBSERVATION_MANAGER_HPP_

// Per term, every control step:
//   raw -> clip -> scale -> noise -> delay ring (D steps) -> history ring (H)
// and the group output concatenates, per term in registration order, the H
// history entries oldest first. Worlds flagged by reset() get both rings
// filled with their first post-reset value.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/config/suggest.hpp"
#include "lockstep/core/ordered_map.hpp"
#include "lockstep/core/rng.hpp"
#include "lockstep/core/world_array.hpp"
#include "lockstep/managers/registry.hpp"
#include "lockstep/managers/term_cfg.hpp"

namespace lockstep::managers {

class ObservationManager {
 public:
  struct Term {
    std::string name;
    ObsTermCfg cfg;
    ObsTerm bound;
    bool noisy = false;
    std::size_t offset = 0;  // in the group output
    WorldArray<double> raw;
    WorldArray<double> delay_ring;  // (D + 1) slots
    WorldArray<double> history;     // H slots
    std::size_t delay_head = 0;
    std::size_t history_head = 0;
    WorldStreams rng;
  };

  struct Group {
    std::string name;
    std::vector<Term> terms;
    std::size_t dim = 0;
    WorldArray<double> out;
  };

  ObservationManager() = default;
  ObservationManager(const OrderedMap<ObsGroupCfg>& cfgs, const Env& env, std::size_t n_worlds,
                     std::uint64_t seed, std::uint64_t world_offset)
      : n_worlds_(n_worlds), fill_(n_worlds, 1) {
    for (const auto& [gname, gcfg] : cfgs) {
      Group g;
      g.name = gname;
      for (const auto& [tname, tcfg] : gcfg.terms) {
        const std::string where = "observations." + gname + ".terms." + tname;
        if (tcfg.clip && !((*tcfg.clip)[0] < (*tcfg.clip)[1])) {
          throw ConfigError(where + ".clip: lo must be < hi");
        }
        if (tcfg.delay > kMaxObsDelay) {
          throw ConfigError(where + ".delay: at most " + std::to_string(kMaxObsDelay));
        }
        if (tcfg.history < 1 || tcfg.history > kMaxObsHistory) {
          throw ConfigError(where + ".history: must be in [1, " + std::to_string(kMaxObsHistory) +
                            "]");
        }
        if (!(tcfg.noise.magnitude >= 0.0)) throw ConfigError(where + ".noise: magnitude < 0");
        Term t;
        t.name = tname;
        t.cfg = tcfg;
        t.bound = observation_terms().bind(tcfg.func, env, tcfg.params, where);
        t.noisy = gcfg.enable_noise && tcfg.noise.kind != NoiseCfg::Kind::kNone;
        t.offset = g.dim;
        const std::size_t d = t.bound.dim;
        t.raw = WorldArray<double>(n_worlds, d);
        t.delay_ring = WorldArray<double>(n_worlds, (tcfg.delay + 1) * d);
        t.history = WorldArray<double>(n_worlds, tcfg.history * d);
        t.rng = WorldStreams(seed, "obs_noise/" + gname + "/" + tname, n_worlds, world_offset);
        g.dim += d * tcfg.history;
        g.terms.push_back(std::move(t));
      }
      g.out = WorldArray<double>(n_worlds, g.dim);
      groups_.insert(gname, std::move(g));
    }
  }

  const OrderedMap<Group>& groups() const { return groups_; }
  std::vector<std::string> group_names() const { return groups_.keys(); }

  const WorldArray<double>& group(const std::string& name) const {
    const Group* g = groups_.find(name);
    if (!g) {
      throw std::invalid_argument("unknown observation group '" + name + "' (available: " +
                                  join(groups_.keys()) + ")");
    }
    return g->out;
  }

  // "group/term" for each term that produced a NaN or infinity at the last compute.
  const std::vector<std::string>& nonfinite_terms() const { return nonfinite_; }

  void reset(std::span<const std::size_t> worlds) {
    for (std::size_t w : worlds) fill_[w] = 1;
  }

  void compute(const Env& env) {
    nonfinite_.clear();
    for (auto& [gname, g] : groups_) {
      for (Term& t : g.terms) compute_term(env, gname, g, t);
    }
    std::fill(fill_.begin(), fill_.end(), 0);
  }

 private:
  void compute_term(const Env& env, const std::string& gname, Group& g, Term& t) {
    const std::size_t d = t.bound.dim;
    const std::size_t slots = t.cfg.delay + 1;
    const std::size_t h_len = t.cfg.history;
    t.bound.fn(env, t.raw);
    const double lo = t.cfg.clip ? (*t.cfg.clip)[0] : 0.0;
    const double hi = t.cfg.clip ? (*t.cfg.clip)[1] : 0.0;
    const std::size_t next_delay = (t.delay_head + 1) % slots;
    const std::size_t read_delay = (next_delay + slots - t.cfg.delay) % slots;
    const std::size_t next_hist = (t.history_head + 1) % h_len;
    bool bad = false;
    for (std::size_t w = 0; w < n_worlds_; ++w) {
      double* ring = t.delay_ring.row(w).data();
      double* hist = t.history.row(w).data();
      for (std::size_t i = 0; i < d; ++i) {
        double v = t.raw(w, i);
        if (t.cfg.clip) v = std::clamp(v, lo, hi);
        v *= t.cfg.scale;
        if (t.noisy) {
          const double m = t.cfg.noise.magnitude;
          v += t.cfg.noise.kind == NoiseCfg::Kind::kUniform ? t.rng[w].uniform(-m, m)
                                                            : m * t.rng[w].normal();
        }
        if (!std::isfinite(v)) bad = true;
        if (fill_[w]) {
          for (std::size_t s = 0; s < slots; ++s) ring[s * d + i] = v;
        } else {
          ring[next_delay * d + i] = v;
        }
        const double delayed = ring[read_delay * d + i];
        if (fill_[w]) {
          for (std::size_t s = 0; s < h_len; ++s) hist[s * d + i] = delayed;
        } else {
          hist[next_hist * d + i] = delayed;
        }
      }
      double* out = g.out.row(w).data() + t.offset;
      for (std::size_t k = 0; k < h_len; ++k) {
        const std::size_t slot = (next_hist + 1 + k) % h_len;  // oldest first
        std::copy(hist + slot * d, hist + (slot + 1) * d, out + k * d);
      }
    }
    t.delay_head = next_delay;
    t.history_head = next_hist;
    if (bad) nonfinite_.push_back(gname + "/" + t.name);
  }

  std::size_t n_worlds_ = 0;
  OrderedMap<Group> groups_;
  std::vector<std::uint8_t> fill_;
  std::vector<std::string> nonfinite_;
};

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_OBSERVATION_MANAGER_HPP_
