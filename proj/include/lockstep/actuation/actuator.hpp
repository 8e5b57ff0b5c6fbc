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

#ifndef LOCKSTEP_ACTUATION_ACTUATOR_HPP_
#define LOCKSTEP_ACTUATION_ACTUATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lockstep/actuation/mlp.hpp"
#include "lockstep/config/json_util.hpp"
#include "lockstep/core/rng.hpp"
#include "lockstep/core/world_array.hpp"
#include "lockstep/entity/entity.hpp"
#include "lockstep/sim/model.hpp"

namespace lockstep::actuation {

struct IdealPdCfg {
  double kp = 0.0;  // N·m/rad
  double kd = 0.0;  // N·m·s/rad
  double effort_limit = 0.0;
};

struct DcMotorCfg {
  double kp = 0.0;
  double kd = 0.0;
  double saturation_effort = 0.0;
  double velocity_limit = 0.0;  // rad/s
  double effort_limit = 0.0;
};

// Learned torque model. Each joint is evaluated independently on a window of
// its own position errors followed by its own velocities, newest first.
struct MlpCfg {
  std::string weights_path;
  std::size_t pos_history = 1;
  std::size_t vel_history = 1;
  double effort_limit = 0.0;
};

struct ActuatorModel;

struct DelayedCfg {
  std::shared_ptr<const ActuatorModel> inner;
  double latency_lo = 0.0;  // s
  double latency_hi = 0.0;
  bool resample_on_reset = true;
};

struct ActuatorModel {
  std::variant<IdealPdCfg, DcMotorCfg, MlpCfg, DelayedCfg> v;
};

struct ActuatorCfg {
  std::vector<std::string> joints;  // regex patterns
  ActuatorModel model;
};

inline ActuatorCfg ideal_pd(std::vector<std::string> joints, double kp, double kd,
                            double effort_limit) {
  return {std::move(joints), {IdealPdCfg{kp, kd, effort_limit}}};
}

inline ActuatorCfg delayed(ActuatorCfg inner, double lo, double hi, bool resample = true) {
  auto m = std::make_shared<const ActuatorModel>(std::move(inner.model));
  return {std::move(inner.joints), {DelayedCfg{std::move(m), lo, hi, resample}}};
}

inline void validate(const ActuatorModel& m, const std::string& where) {
  auto fail = [&](const std::string& msg) { throw ConfigError(where + ": " + msg); };
  if (const auto* pd = std::get_if<IdealPdCfg>(&m.v)) {
    if (!(pd->effort_limit > 0.0)) fail("effort_limit must be > 0");
    if (pd->kp < 0.0 || pd->kd < 0.0) fail("gains must be >= 0");
  } else if (const auto* dc = std::get_if<DcMotorCfg>(&m.v)) {
    if (!(dc->effort_limit > 0.0)) fail("effort_limit must be > 0");
    if (dc->effort_limit > dc->saturation_effort) fail("effort_limit exceeds saturation_effort");
    if (!(dc->velocity_limit > 0.0)) fail("velocity_limit must be > 0");
    if (dc->kp < 0.0 || dc->kd < 0.0) fail("gains must be >= 0");
  } else if (const auto* mlp = std::get_if<MlpCfg>(&m.v)) {
    if (!(mlp->effort_limit > 0.0)) fail("effort_limit must be > 0");
    if (mlp->pos_history == 0 || mlp->vel_history == 0) fail("history lengths must be >= 1");
  } else {
    const auto& d = std::get<DelayedCfg>(m.v);
    if (!d.inner) fail("delayed actuator without an inner model");
    if (!(d.latency_lo >= 0.0) || !(d.latency_hi >= d.latency_lo)) {
      fail("latency range must satisfy 0 <= lo <= hi");
    }
    validate(*d.inner, where + ".inner");
  }
}

inline double pd_torque(double kp, double kd, double effort_limit, double q_des, double qd_des,
                        double q, double qd) {
  return std::clamp(kp * (q_des - q) + kd * (qd_des - qd), -effort_limit, effort_limit);
}

inline double pd_torque(const IdealPdCfg& c, double q_des, double qd_des, double q, double qd) {
  return pd_torque(c.kp, c.kd, c.effort_limit, q_des, qd_des, q, qd);
}

// Linear back-EMF envelope: available torque shrinks with speed in the
// direction of motion and grows (up to effort_limit) against it.
inline double dc_torque_hi(double saturation, double velocity_limit, double effort_limit,
                           double qd) {
  return std::clamp(saturation * (1.0 - qd / velocity_limit), 0.0, effort_limit);
}
inline double dc_torque_lo(double saturation, double velocity_limit, double effort_limit,
                           double qd) {
  return std::clamp(saturation * (-1.0 - qd / velocity_limit), -effort_limit, 0.0);
}

inline double dc_motor_torque(double kp, double kd, const DcMotorCfg& c, double q_des,
                              double qd_des, double q, double qd) {
  const double raw = kp * (q_des - q) + kd * (qd_des - qd);
  const double hi = dc_torque_hi(c.saturation_effort, c.velocity_limit, c.effort_limit, qd);
  const double lo = dc_torque_lo(c.saturation_effort, c.velocity_limit, c.effort_limit, qd);
  return std::clamp(raw, lo, hi);
}

inline double dc_motor_torque(const DcMotorCfg& c, double q_des, double qd_des, double q,
                              double qd) {
  return dc_motor_torque(c.kp, c.kd, c, q_des, qd_des, q, qd);
}

inline std::size_t delay_steps(double latency, double dt) {
  return static_cast<std::size_t>(std::llround(latency / dt));
}

// Ring of past targets, one row per world. Every push advances all worlds;
// each world reads back through its own delay.
class DelayBuffer {
 public:
  DelayBuffer() = default;
  DelayBuffer(std::size_t n_worlds, std::size_t width, std::size_t capacity)
      : width_(width), capacity_(std::max<std::size_t>(capacity, 1)),
        ring_(n_worlds, capacity_ * width), delay_(n_worlds, 0) {}

  static std::size_t capacity_for(double latency_max, double dt) {
    return static_cast<std::size_t>(std::ceil(latency_max / dt - 1e-9)) + 1;
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t width() const { return width_; }
  std::size_t delay(std::size_t w) const { return delay_[w]; }
  void set_delay(std::size_t w, std::size_t n) {
    if (n >= capacity_) {
      throw std::out_of_range("delay " + std::to_string(n) + " exceeds buffer capacity " +
                              std::to_string(capacity_));
    }
    delay_[w] = n;
  }

  // Fills every slot of world w with `target`, as if it had been held forever.
  void fill(std::size_t w, std::span<const double> target) {
    double* row = ring_.row(w).data();
    for (std::size_t s = 0; s < capacity_; ++s) {
      std::copy(target.begin(), target.end(), row + s * width_);
    }
  }

  void push(std::size_t w, std::span<const double> target) {
    std::copy(target.begin(), target.end(), ring_.row(w).data() + next_ * width_);
  }
  // Call once after pushing every world for this substep.
  void advance() {
    head_ = next_;
    next_ = (next_ + 1) % capacity_;
  }

  std::span<const double> delayed(std::size_t w) const {
    const std::size_t slot = (head_ + capacity_ - delay_[w]) % capacity_;
    return {ring_.row(w).data() + slot * width_, width_};
  }

 private:
  std::size_t width_ = 0;
  std::size_t capacity_ = 1;
  WorldArray<double> ring_;
  std::vector<std::size_t> delay_;
  std::size_t head_ = 0;
  std::size_t next_ = 0;
};

// Registered model fields holding per-joint gains, so they can be randomized
// like any physical parameter.
inline constexpr const char* kKpField = "kp";
inline constexpr const char* kKdField = "kd";

// Resolves actuator configs against an entity and writes joint torques into
// BatchState::ctrl once per physics substep.
class ActuatorSet {
 public:
  enum class Kind { kIdealPd, kDcMotor, kMlp };

  struct DelayStage {
    DelayBuffer buffer;
    std::size_t lo_steps = 0, hi_steps = 0;
    bool resample = true;
  };

  struct Group {
    std::vector<std::size_t> joints;
    Kind kind = Kind::kIdealPd;
    double effort_limit = 0.0;
    DcMotorCfg dc;
    std::vector<DelayStage> delays;  // outermost first
    std::shared_ptr<Mlp> mlp;
    std::size_t pos_history = 0, vel_history = 0;
    WorldArray<double> perr_hist, vel_hist;  // newest first, joint-major
    WorldArray<double> target;               // scratch, N x joints
    std::vector<double> input;
  };

  ActuatorSet() = default;
  ActuatorSet(const std::vector<ActuatorCfg>& cfgs, const entity::Entity& robot,
              sim::Model& model, std::uint64_t seed, std::uint64_t world_offset = 0)
      : n_worlds_(model.n_worlds()), nu_(model.nu()),
        rng_(seed, "actuator_delay", model.n_worlds(), world_offset) {
    std::vector<double> kp(nu_, 0.0), kd(nu_, 0.0);
    std::vector<int> owner(nu_, -1);
    effort_limits_.assign(nu_, 0.0);
    const double dt = model.physics_dt();
    for (std::size_t a = 0; a < cfgs.size(); ++a) {
      const std::string where = "actuators[" + std::to_string(a) + "]";
      validate(cfgs[a].model, where);
      Group g;
      g.joints = robot.find_joints(cfgs[a].joints);
      for (std::size_t j : g.joints) {
        if (owner[j] >= 0) {
          throw ConfigError(where + ": joint '" + robot.joint_names()[j] +
                            "' already driven by actuators[" + std::to_string(owner[j]) + "]");
        }
        owner[j] = static_cast<int>(a);
      }
      const ActuatorModel* m = &cfgs[a].model;
      while (const auto* d = std::get_if<DelayedCfg>(&m->v)) {
        DelayStage st;
        st.lo_steps = delay_steps(d->latency_lo, dt);
        st.hi_steps = delay_steps(d->latency_hi, dt);
        st.resample = d->resample_on_reset;
        st.buffer = DelayBuffer(n_worlds_, g.joints.size(),
                                DelayBuffer::capacity_for(d->latency_hi, dt));
        g.delays.push_back(std::move(st));
        m = d->inner.get();
      }
      if (const auto* pd = std::get_if<IdealPdCfg>(&m->v)) {
        g.kind = Kind::kIdealPd;
        g.effort_limit = pd->effort_limit;
        for (std::size_t j : g.joints) kp[j] = pd->kp, kd[j] = pd->kd;
      } else if (const auto* dc = std::get_if<DcMotorCfg>(&m->v)) {
        g.kind = Kind::kDcMotor;
        g.effort_limit = dc->effort_limit;
        g.dc = *dc;
        for (std::size_t j : g.joints) kp[j] = dc->kp, kd[j] = dc->kd;
      } else {
        const auto& mc = std::get<MlpCfg>(m->v);
        g.kind = Kind::kMlp;
        g.effort_limit = mc.effort_limit;
        g.mlp = std::make_shared<Mlp>(load_mlp(mc.weights_path));
        g.pos_history = mc.pos_history;
        g.vel_history = mc.vel_history;
        if (g.mlp->input_size() != mc.pos_history + mc.vel_history || g.mlp->output_size() != 1) {
          throw ConfigError(where + ": network shape " + std::to_string(g.mlp->input_size()) +
                            "->" + std::to_string(g.mlp->output_size()) +
                            " does not match input layout of " +
                            std::to_string(mc.pos_history + mc.vel_history) + "->1");
        }
        g.perr_hist = WorldArray<double>(n_worlds_, g.joints.size() * g.pos_history);
        g.vel_hist = WorldArray<double>(n_worlds_, g.joints.size() * g.vel_history);
        g.input.resize(g.mlp->input_size());
      }
      for (std::size_t j : g.joints) effort_limits_[j] = g.effort_limit;
      g.target = WorldArray<double>(n_worlds_, g.joints.size());
      groups_.push_back(std::move(g));
    }
    if (!model.has_field(kKpField)) model.add_field(kKpField, kp);
    if (!model.has_field(kKdField)) model.add_field(kKdField, kd);
    reset_row_.reserve(nu_);
  }

  const std::vector<Group>& groups() const { return groups_; }
  double effort_limit(std::size_t joint) const { return effort_limits_[joint]; }
  const std::vector<double>& effort_limits() const { return effort_limits_; }

  // Prepares listed worlds for a new episode: delay rings hold the reset
  // target and, when configured, latencies are redrawn.
  void reset(std::span<const std::size_t> worlds, const WorldArray<double>& targets,
             const sim::BatchState& s) {
    std::vector<double>& row = reset_row_;
    for (Group& g : groups_) {
      row.resize(g.joints.size());  // capacity reserved at construction
      for (std::size_t w : worlds) {
        for (std::size_t i = 0; i < g.joints.size(); ++i) row[i] = targets(w, g.joints[i]);
        for (DelayStage& st : g.delays) {
          if (st.resample || !initialized_) {
            st.buffer.set_delay(w, static_cast<std::size_t>(rng_[w].uniform_int(
                                       static_cast<std::int64_t>(st.lo_steps),
                                       static_cast<std::int64_t>(st.hi_steps))));
          }
          st.buffer.fill(w, row);
        }
        if (g.kind == Kind::kMlp) {
          for (std::size_t i = 0; i < g.joints.size(); ++i) {
            const std::size_t j = g.joints[i];
            const double e = row[i] - s.q(w, 3 + j);
            const double v = s.qd(w, 3 + j);
            for (std::size_t h = 0; h < g.pos_history; ++h) g.perr_hist(w, i * g.pos_history + h) = e;
            for (std::size_t h = 0; h < g.vel_history; ++h) g.vel_hist(w, i * g.vel_history + h) = v;
          }
        }
      }
    }
    if (worlds.size() == n_worlds_) initialized_ = true;
  }

  // One physics substep: route targets through delays, compute torques.
  void apply(const WorldArray<double>& targets, sim::BatchState& s, const sim::Model& model) {
    const sim::FieldView kp = model.field(kKpField).view();
    const sim::FieldView kd = model.field(kKdField).view();
    for (Group& g : groups_) {
      const std::size_t k = g.joints.size();
      for (std::size_t w = 0; w < n_worlds_; ++w) {
        for (std::size_t i = 0; i < k; ++i) g.target(w, i) = targets(w, g.joints[i]);
      }
      for (DelayStage& st : g.delays) {
        for (std::size_t w = 0; w < n_worlds_; ++w) st.buffer.push(w, g.target.row(w));
        st.buffer.advance();
        for (std::size_t w = 0; w < n_worlds_; ++w) {
          const auto out = st.buffer.delayed(w);
          std::copy(out.begin(), out.end(), g.target.row(w).begin());
        }
      }
      for (std::size_t w = 0; w < n_worlds_; ++w) {
        for (std::size_t i = 0; i < k; ++i) {
          const std::size_t j = g.joints[i];
          const double q = s.q(w, 3 + j);
          const double qd = s.qd(w, 3 + j);
          const double q_des = g.target(w, i);
          double tau = 0.0;
          switch (g.kind) {
            case Kind::kIdealPd:
              tau = pd_torque(kp(w, j), kd(w, j), g.effort_limit, q_des, 0.0, q, qd);
              break;
            case Kind::kDcMotor:
              tau = dc_motor_torque(kp(w, j), kd(w, j), g.dc, q_des, 0.0, q, qd);
              break;
            case Kind::kMlp:
              tau = mlp_step(g, w, i, q_des - q, qd);
              break;
          }
          s.ctrl(w, j) = tau;
        }
      }
    }
  }

 private:
  static double mlp_step(Group& g, std::size_t w, std::size_t i, double err, double vel) {
    double* ph = &g.perr_hist(w, i * g.pos_history);
    double* vh = &g.vel_hist(w, i * g.vel_history);
    std::copy_backward(ph, ph + g.pos_history - 1, ph + g.pos_history);
    std::copy_backward(vh, vh + g.vel_history - 1, vh + g.vel_history);
    ph[0] = err;
    vh[0] = vel;
    std::copy(ph, ph + g.pos_history, g.input.begin());
    std::copy(vh, vh + g.vel_history, g.input.begin() + static_cast<std::ptrdiff_t>(g.pos_history));
    return std::clamp(g.mlp->forward_scalar(g.input), -g.effort_limit, g.effort_limit);
  }

  std::size_t n_worlds_ = 0, nu_ = 0;
  std::vector<Group> groups_;
  std::vector<double> effort_limits_;
  WorldStreams rng_;
  std::vector<double> reset_row_;
  bool initialized_ = false;
};

// JSON form: {"joints": [...], "type": "ideal_pd" | "dc_motor" | "mlp" | "delayed", ...}.
inline Json model_to_json(const ActuatorModel& m) {
  Json j = Json::object();
  if (const auto* pd = std::get_if<IdealPdCfg>(&m.v)) {
    j["type"] = "ideal_pd";
    j["kp"] = pd->kp;
    j["kd"] = pd->kd;
    j["effort_limit"] = pd->effort_limit;
  } else if (const auto* dc = std::get_if<DcMotorCfg>(&m.v)) {
    j["type"] = "dc_motor";
    j["kp"] = dc->kp;
    j["kd"] = dc->kd;
    j["saturation_effort"] = dc->saturation_effort;
    j["velocity_limit"] = dc->velocity_limit;
    j["effort_limit"] = dc->effort_limit;
  } else if (const auto* mlp = std::get_if<MlpCfg>(&m.v)) {
    j["type"] = "mlp";
    j["weights_path"] = mlp->weights_path;
    j["pos_history"] = mlp->pos_history;
    j["vel_history"] = mlp->vel_history;
    j["effort_limit"] = mlp->effort_limit;
  } else {
    const auto& d = std::get<DelayedCfg>(m.v);
    j["type"] = "delayed";
    j["latency_lo"] = d.latency_lo;
    j["latency_hi"] = d.latency_hi;
    j["resample_on_reset"] = d.resample_on_reset;
    j["inner"] = model_to_json(*d.inner);
  }
  return j;
}

inline Json to_json_value(const ActuatorCfg& c) {
  Json j = model_to_json(c.model);
  Json out = Json::object();
  out["joints"] = c.joints;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value();
  return out;
}

inline ActuatorModel model_from_json(const std::string& where, ObjectReader& r) {
  std::string type;
  r.require("type", type);
  ActuatorModel m;
  if (type == "ideal_pd") {
    IdealPdCfg c;
    r.require("kp", c.kp);
    r.require("kd", c.kd);
    r.require("effort_limit", c.effort_limit);
    m.v = c;
  } else if (type == "dc_motor") {
    DcMotorCfg c;
    r.require("kp", c.kp);
    r.require("kd", c.kd);
    r.require("saturation_effort", c.saturation_effort);
    r.require("velocity_limit", c.velocity_limit);
    r.require("effort_limit", c.effort_limit);
    m.v = c;
  } else if (type == "mlp") {
    MlpCfg c;
    r.require("weights_path", c.weights_path);
    r.get("pos_history", c.pos_history);
    r.get("vel_history", c.vel_history);
    r.require("effort_limit", c.effort_limit);
    m.v = c;
  } else if (type == "delayed") {
    DelayedCfg c;
    r.require("latency_lo", c.latency_lo);
    r.require("latency_hi", c.latency_hi);
    r.get("resample_on_reset", c.resample_on_reset);
    const Json* inner = r.child("inner");
    if (!inner) throw ConfigError(where + ": delayed actuator needs 'inner'");
    ObjectReader ir(*inner, where + ".inner");
    c.inner = std::make_shared<const ActuatorModel>(model_from_json(where + ".inner", ir));
    ir.finish();
    m.v = c;
  } else {
    throw ConfigError(where + ".type: unknown actuator type '" + type +
                      "' (expected ideal_pd, dc_motor, mlp or delayed)");
  }
  return m;
}

inline ActuatorCfg actuator_cfg_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  ActuatorCfg c;
  r.require("joints", c.joints);
  c.model = model_from_json(where, r);
  r.finish();
  validate(c.model, where);
  return c;
}

}  // namespace lockstep::actuation

#endif  // LOCKSTEP_ACTUATION_ACTUATOR_HPP_
