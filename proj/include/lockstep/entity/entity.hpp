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

#ifndef LOCKSTEP_ENTITY_ENTITY_HPP_
#define LOCKSTEP_ENTITY_ENTITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <regex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/core/world_array.hpp"
#include "lockstep/sim/kinematics.hpp"
#include "lockstep/sim/model.hpp"
#include "lockstep/sim/state.hpp"

namespace lockstep::entity {

using sim::Vec2;

enum class BaseType { kFixed, kFloating };

struct DefaultState {
  Vec2 base_pos{0.0, 0.4};
  double base_pitch = 0.0;
  Vec2 base_vel{0.0, 0.0};
  double base_ang_vel = 0.0;
  std::vector<double> joint_pos;
  std::vector<double> joint_vel;
};

// One class for every physical object. Capability queries replace a type
// hierarchy: a terrain fixture is fixed-base with no joints, a robot is
// floating and articulated.
class Entity {
 public:
  Entity(std::string name, BaseType base, std::vector<std::string> joint_names,
         std::vector<std::string> body_names, DefaultState defaults,
         std::vector<std::pair<double, double>> limits = {})
      : name_(std::move(name)),
        base_(base),
        joint_names_(std::move(joint_names)),
        body_names_(std::move(body_names)),
        defaults_(std::move(defaults)),
        limits_(std::move(limits)) {
    const std::size_t k = joint_names_.size();
    if (defaults_.joint_pos.empty()) defaults_.joint_pos.assign(k, 0.0);
    if (defaults_.joint_vel.empty()) defaults_.joint_vel.assign(k, 0.0);
    if (defaults_.joint_pos.size() != k || defaults_.joint_vel.size() != k) {
      throw std::invalid_argument("entity '" + name_ + "': default state has " +
                                  std::to_string(defaults_.joint_pos.size()) +
                                  " joint positions for " + std::to_string(k) + " joints");
    }
    for (std::size_t j = 0; j < limits_.size() && j < k; ++j) {
      const double v = defaults_.joint_pos[j];
      if (v < limits_[j].first || v > limits_[j].second) {
        throw std::invalid_argument("entity '" + name_ + "': default position of joint '" +
                                    joint_names_[j] + "' outside its limits");
      }
    }
  }

  static Entity articulated(const sim::ModelSpec& spec, DefaultState defaults) {
    std::vector<std::string> joints, bodies{"base"};
    std::vector<std::pair<double, double>> limits;
    for (const auto& j : spec.joints) {
      joints.push_back(j.name);
      bodies.push_back(j.name + "_tip");
      limits.emplace_back(j.pos_lo, j.pos_hi);
    }
    return Entity(spec.name, BaseType::kFloating, std::move(joints), std::move(bodies),
                  std::move(defaults), std::move(limits));
  }

  static Entity fixture(std::string name) {
    return Entity(std::move(name), BaseType::kFixed, {}, {"root"}, DefaultState{{0, 0}, 0.0, {0, 0}, 0.0, {}, {}});
  }

  const std::string& name() const { return name_; }
  bool is_fixed_base() const { return base_ == BaseType::kFixed; }
  bool is_articulated() const { return !joint_names_.empty(); }
  std::size_t num_joints() const { return joint_names_.size(); }
  const std::vector<std::string>& joint_names() const { return joint_names_; }
  const std::vector<std::string>& body_names() const { return body_names_; }
  const DefaultState& default_state() const { return defaults_; }

  std::vector<std::size_t> find_joints(const std::vector<std::string>& patterns) const {
    return find(patterns, joint_names_, "joints");
  }
  std::vector<std::size_t> find_bodies(const std::vector<std::string>& patterns) const {
    return find(patterns, body_names_, "bodies");
  }

  // Resets the listed worlds' generalized state to the defaults.
  void write_default_state(sim::BatchState& s, std::span<const std::size_t> worlds) const {
    if (is_fixed_base()) return;
    for (std::size_t w : worlds) {
      if (w >= s.n_worlds) {
        throw std::out_of_range("world id " + std::to_string(w) + " outside [0, " +
                                std::to_string(s.n_worlds) + ")");
      }
    }
    for (std::size_t w : worlds) {
      s.q(w, 0) = defaults_.base_pos.x;
      s.q(w, 1) = defaults_.base_pos.z;
      s.q(w, 2) = defaults_.base_pitch;
      s.qd(w, 0) = defaults_.base_vel.x;
      s.qd(w, 1) = defaults_.base_vel.z;
      s.qd(w, 2) = defaults_.base_ang_vel;
      for (std::size_t j = 0; j < num_joints(); ++j) {
        s.q(w, 3 + j) = defaults_.joint_pos[j];
        s.qd(w, 3 + j) = defaults_.joint_vel[j];
      }
      s.ctrl.fill_row(w, 0.0);
      s.ext_force.fill_row(w, 0.0);
      s.time[w] = 0.0;
      s.contact.clear_world(w);
    }
  }

 private:
  std::vector<std::size_t> find(const std::vector<std::string>& patterns,
                                const std::vector<std::string>& names, const char* what) const {
    std::vector<std::size_t> out;
    for (const auto& pattern : patterns) {
      const std::regex re(pattern);
      bool matched = false;
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (!std::regex_match(names[i], re)) continue;
        matched = true;
        out.push_back(i);
      }
      if (!matched) {
        std::string avail;
        for (const auto& n : names) avail += (avail.empty() ? "" : ", ") + n;
        throw std::invalid_argument("pattern '" + pattern + "' matched no " + what +
                                    " of entity '" + name_ + "'; available: [" + avail + "]");
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::string name_;
  BaseType base_;
  std::vector<std::string> joint_names_;
  std::vector<std::string> body_names_;
  DefaultState defaults_;
  std::vector<std::pair<double, double>> limits_;
};

// Derived kinematics per world, refreshed after every physics step.
struct EntityData {
  std::size_t n_worlds = 0, n_joints = 0, n_feet = 0;
  WorldArray<double> root_pos;        // (x, z)
  std::vector<double> root_pitch;
  WorldArray<double> root_lin_vel_w;  // world frame
  WorldArray<double> root_lin_vel_b;  // base frame
  std::vector<double> root_ang_vel;   // pitch rate
  WorldArray<double> root_lin_acc_b;  // finite difference over one physics step
  WorldArray<double> joint_pos, joint_vel;
  WorldArray<Vec2> body_pos;          // base, then each link tip
  WorldArray<double> projected_gravity;
  WorldArray<Vec2> foot_pos, foot_vel;
  WorldArray<std::uint8_t> foot_contact;
  WorldArray<double> foot_normal_force, foot_tangential_force;

  EntityData() = default;
  EntityData(std::size_t n, std::size_t k, std::size_t feet)
      : n_worlds(n), n_joints(k), n_feet(feet), root_pos(n, 2), root_pitch(n),
        root_lin_vel_w(n, 2), root_lin_vel_b(n, 2), root_ang_vel(n), root_lin_acc_b(n, 2),
        joint_pos(n, k), joint_vel(n, k), body_pos(n, k + 1), projected_gravity(n, 2),
        foot_pos(n, feet), foot_vel(n, feet), foot_contact(n, feet),
        foot_normal_force(n, feet), foot_tangential_force(n, feet), frames_(k) {}

  // Recomputes everything for worlds [begin, end). `dt` is the time since
  // the previous refresh; pass 0 to zero the acceleration estimate.
  void refresh(const sim::Model& model, const sim::BatchState& s, double dt,
               std::size_t begin = 0, std::size_t end = SIZE_MAX) {
    end = std::min(end, n_worlds);
    for (std::size_t w = begin; w < end; ++w) refresh_world(model, s, w, dt);
  }

  void refresh(const sim::Model& model, const sim::BatchState& s, double dt,
               std::span<const std::size_t> worlds) {
    for (std::size_t w : worlds) refresh_world(model, s, w, dt);
  }

  void refresh_world(const sim::Model& model, const sim::BatchState& s, std::size_t w,
                     double dt) {
    const sim::Topology& topo = model.topology();
    const double* q = s.q.row(w).data();
    const double* qd = s.qd.row(w).data();
    sim::forward_kinematics(topo, q, frames_.pivot.data(), frames_.tip.data(),
                            frames_.angle.data(), frames_.sin_angle.data(),
                            frames_.cos_angle.data());
    const double th = q[2];
    const double sn = std::sin(th);
    const double cs = std::cos(th);
    root_pos(w, 0) = q[0];
    root_pos(w, 1) = q[1];
    root_pitch[w] = th;
    root_lin_vel_w(w, 0) = qd[0];
    root_lin_vel_w(w, 1) = qd[1];
    const double vbx = cs * qd[0] + sn * qd[1];
    const double vbz = -sn * qd[0] + cs * qd[1];
    if (dt > 0.0) {
      root_lin_acc_b(w, 0) = (vbx - root_lin_vel_b(w, 0)) / dt;
      root_lin_acc_b(w, 1) = (vbz - root_lin_vel_b(w, 1)) / dt;
    } else {
      root_lin_acc_b(w, 0) = 0.0;
      root_lin_acc_b(w, 1) = 0.0;
    }
    root_lin_vel_b(w, 0) = vbx;
    root_lin_vel_b(w, 1) = vbz;
    root_ang_vel[w] = qd[2];
    projected_gravity(w, 0) = -sn;
    projected_gravity(w, 1) = -cs;
    for (std::size_t j = 0; j < n_joints; ++j) {
      joint_pos(w, j) = q[3 + j];
      joint_vel(w, j) = qd[3 + j];
    }
    body_pos(w, 0) = {q[0], q[1]};
    for (std::size_t j = 0; j < n_joints; ++j) body_pos(w, 1 + j) = frames_.tip[j];
    const Vec2 base{q[0], q[1]};
    for (std::size_t f = 0; f < n_feet; ++f) {
      const Vec2 p = frames_.tip[static_cast<std::size_t>(topo.feet[f])];
      const Vec2 lb = sim::lever(p, base);
      Vec2 v{qd[0] + lb.x * qd[2], qd[1] + lb.z * qd[2]};
      for (int j : topo.foot_chain[f]) {
        const Vec2 l = sim::lever(p, frames_.pivot[static_cast<std::size_t>(j)]);
        v.x += l.x * qd[3 + static_cast<std::size_t>(j)];
        v.z += l.z * qd[3 + static_cast<std::size_t>(j)];
      }
      foot_pos(w, f) = p;
      foot_vel(w, f) = v;
      foot_contact(w, f) = s.contact.in_contact(w, f);
      foot_normal_force(w, f) = s.contact.normal_force(w, f);
      foot_tangential_force(w, f) = s.contact.tangential_force(w, f);
    }
  }

 private:
  sim::LinkFrames frames_;
};

}  // namespace lockstep::entity

#endif  // LOCKSTEP_ENTITY_ENTITY_HPP_
