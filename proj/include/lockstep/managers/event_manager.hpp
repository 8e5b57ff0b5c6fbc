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

#ifndef LOCKSTEP_MANAGERS_EVENT_MANAGER_HPP_
#define LOCKSTEP_MANAGERS_EVENT_MANAGER_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lockstep/core/ordered_map.hpp"
#include "lockstep/core/rng.hpp"
#include "lockstep/managers/registry.hpp"
#include "lockstep/managers/term_cfg.hpp"
#include "lockstep/sim/model.hpp"

namespace lockstep::managers {

enum class Distribution { kUniform, kGaussian };
enum class FieldOp { kSet, kScale, kAdd };

inline Distribution parse_distribution(const std::string& s, const std::string& where) {
  if (s == "uniform") return Distribution::kUniform;
  if (s == "gaussian") return Distribution::kGaussian;
  throw ConfigError(where + ": distribution must be 'uniform' or 'gaussian'");
}

inline FieldOp parse_field_op(const std::string& s, const std::string& where) {
  if (s == "set") return FieldOp::kSet;
  if (s == "scale") return FieldOp::kScale;
  if (s == "add") return FieldOp::kAdd;
  throw ConfigError(where + ": operation must be 'set', 'scale' or 'add'");
}

// Draws a new value for `field` in each listed world. The draw is combined
// with the field's compile-time base value, never the current value, so
// repeated scale or add events do not compound. `index` < 0 means every
// entry of the field row, each with its own draw.
inline void randomize_field(sim::Model& model, const std::string& field, Distribution dist,
                            double a, double b, FieldOp op, std::span<const std::size_t> worlds,
                            WorldStreams& rng, int index = -1) {
  if (!model.has_field(field)) {
    std::string names;
    for (const auto& k : model.fields().keys()) names += (names.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown model field '" + field + "' (available: " + names + ")");
  }
  model.expand_field(field);
  const sim::Field& f = model.field(field);
  const std::size_t lo = index < 0 ? 0 : static_cast<std::size_t>(index);
  const std::size_t hi = index < 0 ? f.width() : lo + 1;
  if (hi > f.width()) {
    throw std::out_of_range("field '" + field + "' has width " + std::to_string(f.width()));
  }
  for (std::size_t w : worlds) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double draw = dist == Distribution::kUniform ? rng[w].uniform(a, b)
                                                         : a + b * rng[w].normal();
      const double base = f.base(i);
      double v = draw;
      if (op == FieldOp::kScale) v = base * draw;
      if (op == FieldOp::kAdd) v = base + draw;
      model.set_field_value(field, w, i, v);
    }
  }
}

class EventManager {
 public:
  struct Term {
    std::string name;
    EventMode mode = EventMode::kReset;
    EventTerm fn;
    WorldStreams rng;
    // Interval mode: gap bounds in control steps and per-world countdown.
    std::int64_t gap_lo = 0, gap_hi = 0;
    std::vector<std::int64_t> countdown;
    WorldStreams gap_rng;
    std::size_t fire_count = 0;
  };

  EventManager() = default;
  EventManager(const OrderedMap<EventTermCfg>& cfgs, Env& env, std::size_t n_worlds,
               double step_dt, std::uint64_t seed, std::uint64_t world_offset)
      : n_worlds_(n_worlds) {
    firing_.reserve(n_worlds);
    for (const auto& [name, cfg] : cfgs) {
      const std::string where = "events." + name;
      Term t;
      t.name = name;
      t.mode = cfg.mode;
      t.fn = event_terms().bind(cfg.func, env, cfg.params, where);
      t.rng = WorldStreams(seed, "event/" + name, n_worlds, world_offset);
      if (cfg.mode == EventMode::kInterval) {
        const auto [lo, hi] = cfg.interval;
        if (!(lo > 0.0) || !(hi >= lo)) {
          throw ConfigError(where + ".interval: need 0 < lo <= hi");
        }
        t.gap_lo = static_cast<std::int64_t>(std::ceil(lo / step_dt - 1e-9));
        t.gap_hi = static_cast<std::int64_t>(std::floor(hi / step_dt + 1e-9));
        if (t.gap_lo < 1) t.gap_lo = 1;
        if (t.gap_hi < t.gap_lo) {
          throw ConfigError(where + ".interval: no whole control step lies in [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "] s");
        }
        t.countdown.assign(n_worlds, 0);
        t.gap_rng = WorldStreams(seed, "event_gap/" + name, n_worlds, world_offset);
        for (std::size_t w = 0; w < n_worlds; ++w) t.countdown[w] = draw_gap(t, w);
      }
      terms_.insert(name, std::move(t));
    }
  }

  const OrderedMap<Term>& terms() const { return terms_; }

  void apply_startup(Env& env) {
    std::vector<std::size_t> all(n_worlds_);
    for (std::size_t w = 0; w < n_worlds_; ++w) all[w] = w;
    for (auto& [name, t] : terms_) {
      if (t.mode != EventMode::kStartup) continue;
      t.fn(env, all, t.rng);
      ++t.fire_count;
    }
  }

  void apply_reset(Env& env, std::span<const std::size_t> worlds) {
    if (worlds.empty()) return;
    for (auto& [name, t] : terms_) {
      if (t.mode != EventMode::kReset) continue;
      t.fn(env, worlds, t.rng);
      ++t.fire_count;
    }
  }

  // One control step elapsed: fire every interval term whose per-world
  // countdown reached zero and draw that world's next gap.
  void apply_interval(Env& env) {
    for (auto& [name, t] : terms_) {
      if (t.mode != EventMode::kInterval) continue;
      firing_.clear();
      for (std::size_t w = 0; w < n_worlds_; ++w) {
        if (--t.countdown[w] > 0) continue;
        firing_.push_back(w);
        t.countdown[w] = draw_gap(t, w);
      }
      if (firing_.empty()) continue;
      t.fn(env, firing_, t.rng);
      ++t.fire_count;
    }
  }

 private:
  static std::int64_t draw_gap(Term& t, std::size_t w) {
    return t.gap_rng[w].uniform_int(t.gap_lo, t.gap_hi);
  }

  std::size_t n_worlds_ = 0;
  OrderedMap<Term> terms_;
  std::vector<std::size_t> firing_;
};

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_EVENT_MANAGER_HPP_
