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

#ifndef LOCKSTEP_TASKS_VELOCITY_HPP_
#define LOCKSTEP_TASKS_VELOCITY_HPP_

// Velocity tracking for the reference planar walker: a 6 kg base with a
// hind and a front leg, each a hip and a knee. "Velocity-Flat" runs on a
// plane; "Velocity-Rough" adds a 10 x 5 curriculum terrain grid, a height
// scan for the critic and the terrain_levels curriculum.
//
// Reward weights are engineering defaults and can all be overridden.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lockstep/config/json_util.hpp"
#include "lockstep/config/suggest.hpp"
#include "lockstep/env/env_cfg.hpp"
#include "lockstep/sim/model_spec.hpp"

namespace lockstep::tasks {

inline sim::ModelSpec walker_spec() {
  sim::ModelSpec s;
  s.name = "walker";
  s.base_mass = 6.0;
  // Inertias are sized so the explicit contact damping reflected onto each
  // DOF, c * J^2 * dt / I, stays well under the stability limit of 2.
  s.base_inertia = 0.25;
  s.contact = {5000.0, 100.0, 80.0, 1.0};
  // `bend` is +1 for the hind leg and -1 for the front leg, so the knees
  // point toward each other and the legs' slip forces cancel at rest.
  auto leg = [&](const std::string& side, double x, double bend) {
    sim::JointSpec hip;
    hip.name = side + "_hip";
    hip.attach_offset = {x, 0.0};
    hip.link_length = 0.2;
    hip.link_mass = 0.5;
    hip.rotor_inertia = 0.12;
    hip.damping = 0.05;
    hip.pos_lo = bend > 0 ? -1.2 : -1.6;
    hip.pos_hi = bend > 0 ? 1.6 : 1.2;
    sim::JointSpec knee = hip;
    knee.name = side + "_knee";
    knee.parent = static_cast<int>(s.joints.size());
    knee.attach_offset = {0.0, 0.0};
    knee.pos_lo = bend > 0 ? -2.2 : -0.2;
    knee.pos_hi = bend > 0 ? 0.2 : 2.2;
    s.joints.push_back(hip);
    s.joints.push_back(knee);
    s.feet.push_back(static_cast<int>(s.joints.size()) - 1);
  };
  leg("hind", -0.2, 1.0);
  leg("front", 0.2, -1.0);
  return s;
}

// Crouched stance: |hip| 0.4, |knee| 0.8 puts each foot 0.368 m below the base,
// so the walker spawns 12 mm above the ground and settles onto its feet.
inline entity::DefaultState walker_default_state() {
  entity::DefaultState d;
  d.base_pos = {0.0, 0.38};
  d.joint_pos = {0.4, -0.8, -0.4, 0.8};
  d.joint_vel = {0.0, 0.0, 0.0, 0.0};
  return d;
}

namespace detail {

inline managers::ObsTermCfg obs(const std::string& func, double noise = 0.0, double scale = 1.0) {
  managers::ObsTermCfg t;
  t.func = func;
  t.scale = scale;
  if (noise > 0.0) t.noise = {managers::NoiseCfg::Kind::kUniform, noise};
  return t;
}

inline managers::RewardTermCfg reward(const std::string& func, double weight,
                                      Json params = Json::object()) {
  return {func, weight, std::move(params)};
}

}  // namespace detail

inline env::EnvCfg velocity_flat_cfg() {
  using managers::EventMode;
  env::EnvCfg c;
  c.task_id = "Velocity-Flat";
  c.scene.num_envs = 64;
  c.scene.robot = walker_spec();
  c.scene.default_state = walker_default_state();
  c.physics_dt = 0.005;
  c.decimation = 4;
  c.episode_length_s = 20.0;

  c.actuators = {actuation::ideal_pd({".*_hip"}, 25.0, 0.5, 20.0),
                 actuation::ideal_pd({".*_knee"}, 35.0, 0.5, 20.0)};
  c.actions.insert("joint_pos", {"joint_position", {{"scale", 0.25}}, std::nullopt});

  managers::ObsGroupCfg policy;
  policy.terms.insert("base_lin_vel", detail::obs("base_lin_vel", 0.1));
  policy.terms.insert("base_ang_vel", detail::obs("base_ang_vel", 0.2, 0.25));
  policy.terms.insert("projected_gravity", detail::obs("projected_gravity", 0.05));
  policy.terms.insert("joint_pos", detail::obs("joint_pos_rel", 0.01));
  policy.terms.insert("joint_vel", detail::obs("joint_vel_rel", 1.5, 0.05));
  policy.terms.insert("last_action", detail::obs("last_action"));
  policy.terms.insert("command", detail::obs("velocity_command"));
  // The critic sees the same signals without noise, plus privileged ones.
  managers::ObsGroupCfg critic;
  critic.enable_noise = false;
  critic.terms = policy.terms;
  critic.terms.insert("imu", detail::obs("imu"));
  critic.terms.insert("foot_forces", detail::obs("foot_contact_forces", 0.0, 0.01));
  c.observations.insert("policy", policy);
  c.observations.insert("critic", critic);

  c.rewards.insert("track_lin_vel_x", detail::reward("track_lin_vel_x_exp", 1.0, {{"std", 0.25}}));
  c.rewards.insert("pitch_rate", detail::reward("pitch_rate_l2", -0.05));
  c.rewards.insert("angular_momentum", detail::reward("angular_momentum_l2", -0.1));
  c.rewards.insert("action_rate", detail::reward("action_rate_l2", -0.01));
  c.rewards.insert("joint_limit", detail::reward("joint_limit", -1.0));
  c.rewards.insert("foot_slip", detail::reward("foot_slip", -0.1));
  c.rewards.insert("feet_air_time", detail::reward("feet_air_time", 0.5, {{"target", 0.3}}));

  c.terminations.insert("time_out", {"time_out", true, Json::object()});
  c.terminations.insert("base_height", {"base_height_below", false, {{"min_height", 0.12}}});
  c.terminations.insert("pitch", {"pitch_beyond", false, {{"limit", 1.0}}});

  c.events.insert("scale_mass", {"randomize_field",
                                 EventMode::kStartup,
                                 {0.0, 0.0},
                                 {{"field", "base_mass"},
                                  {"distribution", "uniform"},
                                  {"range", {0.8, 1.2}},
                                  {"operation", "scale"}}});
  c.events.insert("jitter_joints",
                  {"reset_joints_offset", EventMode::kReset, {0.0, 0.0}, {{"range", {-0.1, 0.1}}}});
  c.events.insert("push", {"push_base",
                           EventMode::kInterval,
                           {10.0, 15.0},
                           {{"force_x", {-200.0, 200.0}}, {"force_z", {0.0, 0.0}}}});

  c.commands.resample_period = 10.0;
  c.commands.ranges.insert("lin_vel_x", {-1.0, 1.0});
  // Kept for the two-channel twist shape; zero range by default.
  c.commands.ranges.insert("ang_vel", {0.0, 0.0});

  c.curriculum.insert("command_widen", {"command_widen",
                                        {{"channel", "lin_vel_x"},
                                         {"reward_term", "track_lin_vel_x"},
                                         {"threshold", 0.8},
                                         {"factor", 1.2},
                                         {"limit", 2.0}}});
  return c;
}

inline env::EnvCfg velocity_rough_cfg() {
  env::EnvCfg c = velocity_flat_cfg();
  c.task_id = "Velocity-Rough";
  terrain::TerrainGridCfg grid;
  grid.rows = 10;
  grid.cols = 5;
  grid.patch_length = 8.0;
  grid.spacing = 0.05;
  grid.mode = terrain::GridMode::kCurriculum;
  grid.sub_terrains.insert("flat", {terrain::Flat{}, 0.1});
  grid.sub_terrains.insert("stairs", {terrain::PyramidStairs{0.3, {0.02, 0.12}}, 0.2});
  grid.sub_terrains.insert("boxes", {terrain::RandomGrid{0.4, {0.0, 0.08}}, 0.2});
  grid.sub_terrains.insert("slope", {terrain::Slope{0.3}, 0.2});
  grid.sub_terrains.insert("noise", {terrain::UniformNoise{{0.005, 0.04}}, 0.15});
  grid.sub_terrains.insert("wave", {terrain::Wave{{0.01, 0.1}, 2.0}, 0.15});
  c.scene.terrain = grid;
  c.scene.max_init_terrain_level = 4;
  for (int i = -5; i <= 5; ++i) c.scene.height_scan.push_back(0.1 * i);
  c.observations.at("critic").terms.insert("height_scan", detail::obs("height_scan"));
  c.curriculum.insert("terrain_levels",
                      {"terrain_levels", {{"promote", 0.8}, {"demote", 0.4}}});
  return c;
}

// Task ids known to the CLI and the viewer.
inline const std::map<std::string, std::function<env::EnvCfg()>>& task_registry() {
  static const std::map<std::string, std::function<env::EnvCfg()>> r = {
      {"Velocity-Flat", velocity_flat_cfg},
      {"Velocity-Rough", velocity_rough_cfg},
  };
  return r;
}

inline std::vector<std::string> task_ids() {
  std::vector<std::string> out;
  for (const auto& [k, v] : task_registry()) out.push_back(k);
  return out;
}

inline env::EnvCfg make_task_cfg(const std::string& id) {
  auto it = task_registry().find(id);
  if (it == task_registry().end()) {
    std::string msg = "unknown task '" + id + "'";
    const auto close = nearest(id, task_ids());
    if (!close.empty()) msg += "; did you mean " + join(close, " or ") + "?";
    msg += " (known: " + join(task_ids()) + ")";
    throw ConfigError(msg);
  }
  return it->second();
}

}  // namespace lockstep::tasks

#endif  // LOCKSTEP_TASKS_VELOCITY_HPP_
