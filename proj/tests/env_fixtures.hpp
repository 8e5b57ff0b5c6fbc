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

#ifndef LOCKSTEP_TESTS_ENV_FIXTURES_HPP_
#define LOCKSTEP_TESTS_ENV_FIXTURES_HPP_

// Small environments and probe terms shared by the manager and env tests.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <mutex>
#include <utility>
#include <vector>

#include "lockstep/env/env.hpp"
#include "lockstep/tasks/velocity.hpp"

namespace lockstep::testing {

using env::EnvCfg;
using env::ManagerBasedRlEnv;

// (world, common_step) for every firing of the "probe_record" event.
inline std::vector<std::pair<std::size_t, std::int64_t>>& event_log() {
  static std::vector<std::pair<std::size_t, std::int64_t>> log;
  return log;
}

inline void register_probe_terms() {
  static std::once_flag once;
  std::call_once(once, [] {
    managers::register_builtin_terms();
    using managers::Params;
    // raw(w) = common_step + 100 w + offset.
    managers::observation_terms().add(
        "probe_ramp", [](const env::ManagerBasedRlEnv&, const Json& p, const std::string& where) {
          Params ps(p, where);
          const double offset = ps.get("offset", 0.0);
          ps.finish();
          return managers::ObsTerm{1, [offset](const ManagerBasedRlEnv& e, WorldArray<double>& out) {
                                     for (std::size_t w = 0; w < out.worlds(); ++w) {
                                       out(w, 0) = static_cast<double>(e.common_step()) +
                                                   100.0 * static_cast<double>(w) + offset;
                                     }
                                   }};
        });
    managers::observation_terms().add(
        "probe_constant", [](const ManagerBasedRlEnv&, const Json& p, const std::string& where) {
          Params ps(p, where);
          const double v = ps.get("value", 0.0);
          ps.finish();
          return managers::ObsTerm{
              1, [v](const ManagerBasedRlEnv&, WorldArray<double>& out) { out.fill(v); }};
        });
    // NaN for world `world`, zero elsewhere.
    managers::observation_terms().add(
        "probe_nan", [](const ManagerBasedRlEnv&, const Json& p, const std::string& where) {
          Params ps(p, where);
          const auto bad = ps.get<std::size_t>("world", 0);
          ps.finish();
          return managers::ObsTerm{1, [bad](const ManagerBasedRlEnv&, WorldArray<double>& out) {
                                     out.fill(0.0);
                                     if (bad < out.worlds()) {
                                       out(bad, 0) = std::numeric_limits<double>::quiet_NaN();
                                     }
                                   }};
        });
    managers::reward_terms().add(
        "probe_nan", [](const ManagerBasedRlEnv&, const Json& p, const std::string& where) {
          Params ps(p, where);
          const auto bad = ps.get<std::size_t>("world", 0);
          ps.finish();
          return managers::RewardTerm([bad](const ManagerBasedRlEnv&, std::span<double> out) {
            std::fill(out.begin(), out.end(), 1.0);
            if (bad < out.size()) out[bad] = std::numeric_limits<double>::quiet_NaN();
          });
        });
    managers::reward_terms().add(
        "probe_base_z", [](const ManagerBasedRlEnv&, const Json& p, const std::string& where) {
          Params(p, where).finish();
          return managers::RewardTerm([](const ManagerBasedRlEnv& e, std::span<double> out) {
            for (std::size_t w = 0; w < out.size(); ++w) out[w] = e.state().q(w, 1);
          });
        });
    // Fires for world `world` (or every world when negative) once the
    // episode reaches `length` control steps.
    managers::termination_terms().add(
        "probe_at_length", [](const ManagerBasedRlEnv&, const Json& p, const std::string& where) {
          Params ps(p, where);
          const auto length = ps.require<std::int64_t>("length");
          const auto world = ps.get<std::int64_t>("world", -1);
          ps.finish();
          return managers::TerminationTerm(
              [length, world](const ManagerBasedRlEnv& e, std::span<std::uint8_t> out) {
                for (std::size_t w = 0; w < out.size(); ++w) {
                  const bool mine = world < 0 || static_cast<std::size_t>(world) == w;
                  out[w] = mine && e.episode_length(w) >= length;
                }
              });
        });
    managers::event_terms().add(
        "probe_record", [](ManagerBasedRlEnv&, const Json& p, const std::string& where) {
          Params(p, where).finish();
          return managers::EventTerm(
              [](ManagerBasedRlEnv& e, std::span<const std::size_t> worlds, WorldStreams&) {
                for (std::size_t w : worlds) event_log().emplace_back(w, e.common_step());
              });
        });
  });
}

// Walker on a plane, PD hold, one joint_position action term, a timeout
// and an observation group holding only the base height.
inline EnvCfg minimal_cfg(std::size_t n = 4) {
  register_probe_terms();
  EnvCfg c;
  c.task_id = "test";
  c.scene.num_envs = n;
  c.scene.robot = tasks::walker_spec();
  c.scene.default_state = tasks::walker_default_state();
  c.actuators = {actuation::ideal_pd({".*"}, 30.0, 0.5, 20.0)};
  c.actions.insert("joint_pos", {});
  managers::ObsGroupCfg g;
  g.terms.insert("height", {"base_height", Json::object(), std::nullopt, 1.0, {}, 0, 1});
  c.observations.insert("policy", g);
  c.terminations.insert("time_out", {"time_out", true, Json::object()});
  c.commands.ranges.insert("lin_vel_x", {-1.0, 1.0});
  c.capture_enabled = false;
  return c;
}

inline WorldArray<double> zero_actions(const ManagerBasedRlEnv& e) {
  return WorldArray<double>(e.num_envs(), e.actions().dim());
}

// Bitwise equality for double arrays (NaN payloads included).
inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace lockstep::testing

#endif  // LOCKSTEP_TESTS_ENV_FIXTURES_HPP_
