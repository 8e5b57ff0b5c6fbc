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

#ifndef LOCKSTEP_MANAGERS_CURRICULUM_MANAGER_HPP_
#define LOCKSTEP_MANAGERS_CURRICULUM_MANAGER_HPP_

#include <span>
#include <string>

#include "lockstep/core/ordered_map.hpp"
#include "lockstep/managers/registry.hpp"
#include "lockstep/managers/term_cfg.hpp"

namespace lockstep::managers {

class CurriculumManager {
 public:
  CurriculumManager() = default;
  CurriculumManager(const OrderedMap<CurriculumTermCfg>& cfgs, Env& env) {
    for (const auto& [name, cfg] : cfgs) {
      terms_.insert(name, curriculum_terms().bind(cfg.func, env, cfg.params, "curriculum." + name));
    }
  }

  const OrderedMap<CurriculumTerm>& terms() const { return terms_; }

  void update(Env& env, std::span<const std::size_t> reset_worlds) {
    for (auto& [name, t] : terms_) t.update(env, reset_worlds);
  }

  double report(const Env& env, const std::string& name) const {
    const CurriculumTerm& t = terms_.at(name);
    return t.report ? t.report(env) : 0.0;
  }

 private:
  OrderedMap<CurriculumTerm> terms_;
};

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_CURRICULUM_MANAGER_HPP_
