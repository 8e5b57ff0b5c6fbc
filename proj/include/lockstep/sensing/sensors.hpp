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

#ifndef LOCKSTEP_SENSING_SENSORS_HPP_
#define LOCKSTEP_SENSING_SENSORS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/core/world_array.hpp"
#include "lockstep/entity/entity.hpp"
#include "lockstep/sim/model.hpp"
#include "lockstep/sim/state.hpp"

namespace lockstep::sensing {

struct SensorContext {
  const sim::Model& model;
  const sim::BatchState& state;
  const entity::EntityData& data;
};

// Common interface. Substep bookkeeping goes in update(); read() returns an
// N x dim array computed at most once per sim_step.
class Sensor {
 public:
  Sensor(std::string name, std::size_t n_worlds, std::size_t dim)
      : name_(std::move(name)), out_(n_worlds, dim) {}
  virtual ~Sensor() = default;
  Sensor(const Sensor&) = delete;
  Sensor& operator=(const Sensor&) = delete;

  const std::string& name() const { return name_; }
  std::size_t dim() const { return out_.cols(); }

  virtual void update(const SensorContext& /*ctx*/, double /*dt*/) {}
  virtual void reset(std::span<const std::size_t> /*worlds*/) {}

  const WorldArray<double>& read(const SensorContext& ctx) {
    if (ctx.state.sim_step != last_step_) {
      compute(ctx, out_);
      last_step_ = ctx.state.sim_step;
      ++computes_;
    }
    return out_;
  }

  // Reset changes state without advancing sim_step, so the env drops caches.
  void invalidate() { last_step_ = -1; }
  std::size_t compute_count() const { return computes_; }

 protected:
  virtual void compute(const SensorContext& ctx, WorldArray<double>& out) = 0;

 private:
  std::string name_;
  WorldArray<double> out_;
  std::int64_t last_step_ = -1;
  std::size_t computes_ = 0;
};

// Vertical height probes at fixed horizontal offsets from the base.
class HeightScanner final : public Sensor {
 public:
  HeightScanner(std::string name, std::size_t n_worlds, std::vector<double> offsets)
      : Sensor(std::move(name), n_worlds, offsets.size()), offsets_(std::move(offsets)) {
    if (offsets_.empty()) throw std::invalid_argument("height scanner needs at least one offset");
    for (double o : offsets_) {
      if (!std::isfinite(o)) throw std::invalid_argument("height scanner offsets must be finite");
    }
  }

  const std::vector<double>& offsets() const { return offsets_; }

  static void scan(const terrain::Heightfield& ground, std::span<const double> offsets,
                   const entity::EntityData& d, WorldArray<double>& out) {
    for (std::size_t w = 0; w < d.n_worlds; ++w) {
      const double x = d.root_pos(w, 0);
      const double z = d.root_pos(w, 1);
      for (std::size_t p = 0; p < offsets.size(); ++p) {
        out(w, p) = ground.height_at(x + offsets[p]) - z;
      }
    }
  }

 protected:
  void compute(const SensorContext& ctx, WorldArray<double>& out) override {
    scan(ctx.model.terrain(), offsets_, ctx.data, out);
  }

 private:
  std::vector<double> offsets_;
};

// Foot-vs-terrain contact with phase timers and a short force history.
// read() returns the newest normal force per foot.
class ContactSensor final : public Sensor {
 public:
  ContactSensor(std::string name, std::size_t n_worlds, std::size_t n_feet,
                std::size_t history = 3)
      : Sensor(std::move(name), n_worlds, n_feet), n_feet_(n_feet),
        history_len_(std::max<std::size_t>(history, 1)), in_contact_(n_worlds, n_feet),
        touchdown_(n_worlds, n_feet), normal_(n_worlds, n_feet), tangential_(n_worlds, n_feet),
        history_(n_worlds, n_feet * history_len_), air_time_(n_worlds, n_feet),
        last_air_time_(n_worlds, n_feet), contact_time_(n_worlds, n_feet),
        last_contact_time_(n_worlds, n_feet) {}

  std::size_t n_feet() const { return n_feet_; }
  std::size_t history_length() const { return history_len_; }

  bool in_contact(std::size_t w, std::size_t f) const { return in_contact_(w, f) != 0; }
  // True if the foot touched down during the current control step.
  bool touchdown(std::size_t w, std::size_t f) const { return touchdown_(w, f) != 0; }
  double normal_force(std::size_t w, std::size_t f) const { return normal_(w, f); }
  double tangential_force(std::size_t w, std::size_t f) const { return tangential_(w, f); }
  // i = 0 is the newest substep.
  double force_history(std::size_t w, std::size_t f, std::size_t i) const {
    return history_(w, f * history_len_ + i);
  }
  double air_time(std::size_t w, std::size_t f) const { return air_time_(w, f); }
  double last_air_time(std::size_t w, std::size_t f) const { return last_air_time_(w, f); }
  double contact_time(std::size_t w, std::size_t f) const { return contact_time_(w, f); }
  double last_contact_time(std::size_t w, std::size_t f) const { return last_contact_time_(w, f); }

  void begin_control_step() { touchdown_.fill(0); }

  // Consumes one substep of contact results.
  void update_from(const sim::ContactCache& c, double dt, std::size_t begin = 0,
                   std::size_t end = SIZE_MAX) {
    end = std::min(end, in_contact_.worlds());
    for (std::size_t w = begin; w < end; ++w) {
      for (std::size_t f = 0; f < n_feet_; ++f) {
        const bool now = c.in_contact(w, f) != 0;
        const bool was = in_contact_(w, f) != 0;
        if (now) {
          if (!was) {
            last_air_time_(w, f) = air_time_(w, f);
            air_time_(w, f) = 0.0;
            contact_time_(w, f) = dt;
            touchdown_(w, f) = 1;
          } else {
            contact_time_(w, f) += dt;
          }
        } else {
          if (was) {
            last_contact_time_(w, f) = contact_time_(w, f);
            contact_time_(w, f) = 0.0;
            air_time_(w, f) = dt;
          } else {
            air_time_(w, f) += dt;
          }
        }
        in_contact_(w, f) = now ? 1 : 0;
        normal_(w, f) = c.normal_force(w, f);
        tangential_(w, f) = c.tangential_force(w, f);
        double* h = &history_(w, f * history_len_);
        std::copy_backward(h, h + history_len_ - 1, h + history_len_);
        h[0] = normal_(w, f);
      }
    }
  }

  void update(const SensorContext& ctx, double dt) override { update_from(ctx.state.contact, dt); }

  void reset(std::span<const std::size_t> worlds) override {
    for (std::size_t w : worlds) {
      in_contact_.fill_row(w, 0);
      touchdown_.fill_row(w, 0);
      normal_.fill_row(w, 0.0);
      tangential_.fill_row(w, 0.0);
      history_.fill_row(w, 0.0);
      air_time_.fill_row(w, 0.0);
      last_air_time_.fill_row(w, 0.0);
      contact_time_.fill_row(w, 0.0);
      last_contact_time_.fill_row(w, 0.0);
    }
  }

 protected:
  void compute(const SensorContext& /*ctx*/, WorldArray<double>& out) override {
    std::copy(normal_.data(), normal_.data() + normal_.size(), out.data());
  }

 private:
  std::size_t n_feet_;
  std::size_t history_len_;
  WorldArray<std::uint8_t> in_contact_, touchdown_;
  WorldArray<double> normal_, tangential_, history_;
  WorldArray<double> air_time_, last_air_time_, contact_time_, last_contact_time_;
};

}  // namespace lockstep::sensing

#endif  // LOCKSTEP_SENSING_SENSORS_HPP_
