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

#ifndef LOCKSTEP_ENV_ENV_CFG_HPP_
#define LOCKSTEP_ENV_ENV_CFG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lockstep/actuation/actuator.hpp"
#include "lockstep/config/json_util.hpp"
#include "lockstep/core/ordered_map.hpp"
#include "lockstep/core/rng.hpp"
#include "lockstep/entity/entity.hpp"
#include "lockstep/managers/term_cfg.hpp"
#include "lockstep/sim/model_spec.hpp"
#include "lockstep/sim/spec_io.hpp"
#include "lockstep/terrain/terrain.hpp"
#include "lockstep/terrain/terrain_io.hpp"

namespace lockstep::env {

struct SceneCfg {
  std::size_t num_envs = 1;
  sim::ModelSpec robot;
  entity::DefaultState default_state;
  std::optional<terrain::TerrainGridCfg> terrain;  // none: flat plane
  std::size_t max_init_terrain_level = 0;
  std::vector<double> height_scan;  // probe offsets (m); empty: no scanner
  std::size_t contact_history = 3;
};

struct EnvCfg {
  std::string task_id;
  SceneCfg scene;
  double physics_dt = 0.005;
  std::size_t decimation = 4;
  double episode_length_s = 20.0;
  std::vector<actuation::ActuatorCfg> actuators;
  OrderedMap<managers::ActionTermCfg> actions;
  OrderedMap<managers::ObsGroupCfg> observations;
  OrderedMap<managers::RewardTermCfg> rewards;
  OrderedMap<managers::TerminationTermCfg> terminations;
  OrderedMap<managers::EventTermCfg> events;
  managers::CommandCfg commands;
  OrderedMap<managers::CurriculumTermCfg> curriculum;
  std::size_t capture_length = 200;
  bool capture_enabled = true;
  std::string capture_dir = ".";
  std::uint64_t seed = 0;
  // Global id of local world 0. A one-world env with offset w reproduces
  // world w of a larger batch.
  std::uint64_t world_offset = 0;
  std::size_t num_threads = 1;

  double step_dt() const { return physics_dt * static_cast<double>(decimation); }

  std::int64_t max_episode_steps() const {
    return static_cast<std::int64_t>(std::ceil(episode_length_s / step_dt() - 1e-9));
  }

  void validate() const {
    if (scene.num_envs < 1) throw ConfigError("scene.num_envs must be >= 1");
    if (!(physics_dt > 0.0)) throw ConfigError("physics_dt must be > 0");
    if (decimation < 1) throw ConfigError("decimation must be >= 1");
    if (!(episode_length_s > 0.0)) throw ConfigError("episode_length_s must be > 0");
    const double steps = episode_length_s / step_dt();
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
      throw ConfigError("episode_length_s must be a whole number of control steps (" +
                        std::to_string(step_dt()) + " s each)");
    }
    if (capture_length < 1) throw ConfigError("capture_length must be >= 1");
    if (num_threads < 1) throw ConfigError("num_threads must be >= 1");
    if (actions.empty()) throw ConfigError("actions: at least one action term is required");
  }
};

inline Json to_json_value(const entity::DefaultState& d) {
  return {{"base_pos", {d.base_pos.x, d.base_pos.z}},
          {"base_pitch", d.base_pitch},
          {"base_vel", {d.base_vel.x, d.base_vel.z}},
          {"base_ang_vel", d.base_ang_vel},
          {"joint_pos", d.joint_pos},
          {"joint_vel", d.joint_vel}};
}

inline entity::DefaultState default_state_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  entity::DefaultState d;
  std::array<double, 2> v{d.base_pos.x, d.base_pos.z};
  r.get("base_pos", v);
  d.base_pos = {v[0], v[1]};
  r.get("base_pitch", d.base_pitch);
  v = {d.base_vel.x, d.base_vel.z};
  r.get("base_vel", v);
  d.base_vel = {v[0], v[1]};
  r.get("base_ang_vel", d.base_ang_vel);
  r.get("joint_pos", d.joint_pos);
  r.get("joint_vel", d.joint_vel);
  r.finish();
  return d;
}

template <class V, class F>
Json map_to_json(const OrderedMap<V>& m, F&& conv) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[k] = conv(v);
  return j;
}

inline Json to_json_value(const EnvCfg& c) {
  using managers::to_json_value;
  Json scene;
  scene["num_envs"] = c.scene.num_envs;
  scene["robot"] = sim::to_json_value(c.scene.robot, false);
  scene["default_state"] = env::to_json_value(c.scene.default_state);
  scene["terrain"] = c.scene.terrain ? terrain::to_json_value(*c.scene.terrain) : Json();
  scene["max_init_terrain_level"] = c.scene.max_init_terrain_level;
  scene["height_scan"] = c.scene.height_scan;
  scene["contact_history"] = c.scene.contact_history;

  Json j;
  j["task_id"] = c.task_id;
  j["seed"] = c.seed;
  j["world_offset"] = c.world_offset;
  j["num_threads"] = c.num_threads;
  j["physics_dt"] = c.physics_dt;
  j["decimation"] = c.decimation;
  j["episode_length_s"] = c.episode_length_s;
  j["capture_length"] = c.capture_length;
  j["capture_enabled"] = c.capture_enabled;
  j["capture_dir"] = c.capture_dir;
  j["scene"] = scene;
  Json acts = Json::array();
  for (const auto& a : c.actuators) acts.push_back(actuation::to_json_value(a));
  j["actuators"] = acts;
  auto conv = [](const auto& t) { return to_json_value(t); };
  j["actions"] = map_to_json(c.actions, conv);
  j["observations"] = map_to_json(c.observations, conv);
  j["rewards"] = map_to_json(c.rewards, conv);
  j["terminations"] = map_to_json(c.terminations, conv);
  j["events"] = map_to_json(c.events, conv);
  j["commands"] = to_json_value(c.commands);
  j["curriculum"] = map_to_json(c.curriculum, conv);
  return j;
}

template <class V, class F>
OrderedMap<V> map_from_json(ObjectReader& r, const char* key, F&& parse) {
  OrderedMap<V> out;
  const Json* j = r.child(key);
  if (!j) return out;
  if (!j->is_object()) throw ConfigError(r.path(key) + ": expected an object");
  for (auto it = j->begin(); it != j->end(); ++it) {
    out.insert(it.key(), parse(it.value(), r.path(key) + "." + it.key()));
  }
  return out;
}

inline EnvCfg env_cfg_from_json(const Json& j, const std::string& where = "env") {
  ObjectReader r(j, where);
  EnvCfg c;
  r.get("task_id", c.task_id);
  r.get("seed", c.seed);
  r.get("world_offset", c.world_offset);
  r.get("num_threads", c.num_threads);
  r.get("physics_dt", c.physics_dt);
  r.get("decimation", c.decimation);
  r.get("episode_length_s", c.episode_length_s);
  r.get("capture_length", c.capture_length);
  r.get("capture_enabled", c.capture_enabled);
  r.get("capture_dir", c.capture_dir);
  if (const Json* s = r.child("scene")) {
    ObjectReader sr(*s, r.path("scene"));
    sr.get("num_envs", c.scene.num_envs);
    const Json* robot = sr.child("robot");
    if (!robot) throw ConfigError(sr.path("robot") + ": missing robot model");
    c.scene.robot = sim::model_spec_from_json(*robot, sr.path("robot"), false);
    if (const Json* d = sr.child("default_state")) {
      c.scene.default_state = default_state_from_json(*d, sr.path("default_state"));
    }
    if (const Json* t = sr.child("terrain")) {
      c.scene.terrain = terrain::terrain_cfg_from_json(*t, sr.path("terrain"));
    }
    sr.get("max_init_terrain_level", c.scene.max_init_terrain_level);
    sr.get("height_scan", c.scene.height_scan);
    sr.get("contact_history", c.scene.contact_history);
    sr.finish();
  } else {
    throw ConfigError(where + ": missing 'scene'");
  }
  if (const Json* acts = r.child("actuators")) {
    if (!acts->is_array()) throw ConfigError(r.path("actuators") + ": expected an array");
    for (std::size_t i = 0; i < acts->size(); ++i) {
      c.actuators.push_back(actuation::actuator_cfg_from_json(
          (*acts)[i], r.path("actuators") + "[" + std::to_string(i) + "]"));
    }
  }
  c.actions = map_from_json<managers::ActionTermCfg>(r, "actions", managers::action_term_from_json);
  c.observations = map_from_json<managers::ObsGroupCfg>(r, "observations", managers::obs_group_from_json);
  c.rewards = map_from_json<managers::RewardTermCfg>(r, "rewards", managers::reward_term_from_json);
  c.terminations =
      map_from_json<managers::TerminationTermCfg>(r, "terminations", managers::termination_term_from_json);
  c.events = map_from_json<managers::EventTermCfg>(r, "events", managers::event_term_from_json);
  if (const Json* cmd = r.child("commands")) {
    c.commands = managers::command_cfg_from_json(*cmd, r.path("commands"));
  }
  c.curriculum =
      map_from_json<managers::CurriculumTermCfg>(r, "curriculum", managers::curriculum_term_from_json);
  r.finish();
  return c;
}

// Stable identity of a configuration, stored in capture dumps.
inline std::uint64_t config_hash(const EnvCfg& c) { return fnv1a64(to_json_value(c).dump()); }

}  // namespace lockstep::env

#endif  // LOCKSTEP_ENV_ENV_CFG_HPP_
