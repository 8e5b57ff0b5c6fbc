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

#ifndef LOCKSTEP_MANAGERS_REGISTRY_HPP_
#define LOCKSTEP_MANAGERS_REGISTRY_HPP_

// Named term factories. A factory receives the environment, the term's
// parameter object and a location string for error messages, and returns a
// callable bound to those parameters. Binding happens once at environment
// construction; the hot path only invokes the bound callables.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/config/json_util.hpp"
#include "lockstep/config/suggest.hpp"
#include "lockstep/core/rng.hpp"
#include "lockstep/core/world_array.hpp"

namespace lockstep::env {
class ManagerBasedRlEnv;
}

namespace lockstep::managers {

using Env = env::ManagerBasedRlEnv;

// Writes N x dim values.
struct ObsTerm {
  std::size_t dim = 0;
  std::function<void(const Env&, WorldArray<double>&)> fn;
};

// Maps one action slice to joint position targets (N x nu).
struct ActionTerm {
  std::size_t dim = 0;
  std::function<void(const Env&, const WorldArray<double>& actions, std::size_t offset,
                     WorldArray<double>& targets)>
      fn;
};

using RewardTerm = std::function<void(const Env&, std::span<double>)>;
using TerminationTerm = std::function<void(const Env&, std::span<std::uint8_t>)>;
using EventTerm = std::function<void(Env&, std::span<const std::size_t>, WorldStreams&)>;

struct CurriculumTerm {
  // Called every control step with the worlds being reset (possibly none).
  std::function<void(Env&, std::span<const std::size_t>)> update;
  // Scalar summary for the metrics log.
  std::function<double(const Env&)> report;
};

template <class Bound, class EnvRef>
class Registry {
 public:
  using Factory = std::function<Bound(EnvRef, const Json& params, const std::string& where)>;

  explicit Registry(std::string kind) : kind_(std::move(kind)) {}

  void add(const std::string& name, Factory f) { factories_[name] = std::move(f); }
  bool contains(const std::string& name) const { return factories_.count(name) > 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : factories_) out.push_back(k);
    return out;
  }

  Bound bind(const std::string& name, EnvRef env, const Json& params,
             const std::string& where) const {
    auto it = factories_.find(name);
    if (it == factories_.end()) {
      std::string msg = where + ": unknown " + kind_ + " function '" + name + "'";
      const auto close = nearest(name, names());
      if (!close.empty()) msg += "; did you mean " + join(close, " or ") + "?";
      msg += " (registered: " + join(names()) + ")";
      throw ConfigError(msg);
    }
    return it->second(env, params, where);
  }

 private:
  std::string kind_;
  std::map<std::string, Factory> factories_;
};

using ObsRegistry = Registry<ObsTerm, const Env&>;
using ActionRegistry = Registry<ActionTerm, const Env&>;
using RewardRegistry = Registry<RewardTerm, const Env&>;
using TerminationRegistry = Registry<TerminationTerm, const Env&>;
using EventRegistry = Registry<EventTerm, Env&>;
using CurriculumRegistry = Registry<CurriculumTerm, Env&>;

// Process-wide registries. Built-in terms are added on first use; tasks and
// tests may add more before constructing an environment.
inline ObsRegistry& observation_terms() {
  static ObsRegistry r("observation");
  return r;
}
inline ActionRegistry& action_terms() {
  static ActionRegistry r("action");
  return r;
}
inline RewardRegistry& reward_terms() {
  static RewardRegistry r("reward");
  return r;
}
inline TerminationRegistry& termination_terms() {
  static TerminationRegistry r("termination");
  return r;
}
inline EventRegistry& event_terms() {
  static EventRegistry r("event");
  return r;
}
inline CurriculumRegistry& curriculum_terms() {
  static CurriculumRegistry r("curriculum");
  return r;
}

// Parameter helpers used by factories. Unknown keys are rejected so typos
// surface at construction.
class Params {
 public:
  // Null params behave like an empty object.
  Params(const Json& j, std::string where)
      : storage_(j.is_null() ? Json::object() : j), reader_(storage_, std::move(where)) {}
  template <class T>
  T get(const char* key, T fallback) {
    reader_.get(key, fallback);
    return fallback;
  }
  template <class T>
  T require(const char* key) {
    T v{};
    reader_.require(key, v);
    return v;
  }
  std::string path(const char* key) const { return reader_.path(key); }
  void finish() const { reader_.finish(); }

 private:
  Json storage_;
  ObjectReader reader_;
};

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_REGISTRY_HPP_
