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

#ifndef LOCKSTEP_SIM_STATE_HPP_
#define LOCKSTEP_SIM_STATE_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/core/world_array.hpp"
#include "lockstep/sim/kinematics.hpp"

namespace lockstep::sim {

// Per-foot contact quantities, recomputed every physics step.
struct ContactCache {
  WorldArray<double> normal_force;
  WorldArray<double> tangential_force;
  WorldArray<double> pos_x, pos_z;
  WorldArray<double> vel_x, vel_z;
  WorldArray<std::uint8_t> in_contact;

  ContactCache() = default;
  ContactCache(std::size_t n, std::size_t feet)
      : normal_force(n, feet), tangential_force(n, feet), pos_x(n, feet), pos_z(n, feet),
        vel_x(n, feet), vel_z(n, feet), in_contact(n, feet) {}

  void clear_world(std::size_t w) {
    normal_force.fill_row(w, 0.0);
    tangential_force.fill_row(w, 0.0);
    pos_x.fill_row(w, 0.0);
    pos_z.fill_row(w, 0.0);
    vel_x.fill_row(w, 0.0);
    vel_z.fill_row(w, 0.0);
    in_contact.fill_row(w, 0);
  }
};

// Structure-of-arrays state for N worlds.
struct BatchState {
  std::size_t n_worlds = 0;
  std::size_t nq = 0;
  std::size_t nu = 0;
  std::size_t n_feet = 0;

  WorldArray<double> q;          // N x nq
  WorldArray<double> qd;         // N x nq
  WorldArray<double> ctrl;       // N x nu, joint torques
  WorldArray<double> ext_force;  // N x 2, consumed by the next physics step
  WorldArray<double> applied_force;  // N x 2, what the last physics step consumed
  std::vector<double> time;      // simulated seconds since each world's reset
  std::int64_t sim_step = 0;
  ContactCache contact;

  // Pipeline scratch; not part of the snapshot.
  struct Scratch {
    WorldArray<Vec2> pivot, tip;
    WorldArray<double> angle, sin_angle, cos_angle;
    WorldArray<double> tau;
  } scratch;

  BatchState() = default;
  BatchState(std::size_t n, std::size_t nq_, std::size_t nu_, std::size_t feet)
      : n_worlds(n), nq(nq_), nu(nu_), n_feet(feet), q(n, nq_), qd(n, nq_), ctrl(n, nu_),
        ext_force(n, 2), applied_force(n, 2), time(n, 0.0), contact(n, feet) {
    scratch.pivot = WorldArray<Vec2>(n, nu_);
    scratch.tip = WorldArray<Vec2>(n, nu_);
    scratch.angle = WorldArray<double>(n, nu_);
    scratch.sin_angle = WorldArray<double>(n, nu_);
    scratch.cos_angle = WorldArray<double>(n, nu_);
    scratch.tau = WorldArray<double>(n, nq_);
  }
};

// Copy of the replayable part of a BatchState.
struct StateFrame {
  std::int64_t sim_step = 0;
  WorldArray<double> q, qd, ctrl;
  WorldArray<double> ext_force;      // pending at snapshot time
  WorldArray<double> applied_force;  // consumed by the step that produced this frame

  friend bool operator==(const StateFrame&, const StateFrame&) = default;
};

inline StateFrame snapshot(const BatchState& s) {
  return {s.sim_step, s.q, s.qd, s.ctrl, s.ext_force, s.applied_force};
}

// Like snapshot() but reuses the frame's buffers.
inline void snapshot_into(const BatchState& s, StateFrame& f) {
  f.sim_step = s.sim_step;
  f.q = s.q;
  f.qd = s.qd;
  f.ctrl = s.ctrl;
  f.ext_force = s.ext_force;
  f.applied_force = s.applied_force;
}

inline void restore(BatchState& s, const StateFrame& f) {
  auto check = [](const WorldArray<double>& a, std::size_t n, std::size_t cols,
                  const char* what) {
    if (a.worlds() != n || a.cols() != cols) {
      throw std::invalid_argument(std::string("frame ") + what + " is " +
                                  std::to_string(a.worlds()) + "x" + std::to_string(a.cols()) +
                                  ", state expects " + std::to_string(n) + "x" +
                                  std::to_string(cols));
    }
  };
  check(f.q, s.n_worlds, s.nq, "q");
  check(f.qd, s.n_worlds, s.nq, "qd");
  check(f.ctrl, s.n_worlds, s.nu, "ctrl");
  check(f.ext_force, s.n_worlds, 2, "ext_force");
  s.sim_step = f.sim_step;
  s.q = f.q;
  s.qd = f.qd;
  s.ctrl = f.ctrl;
  s.ext_force = f.ext_force;
  if (f.applied_force.worlds() == s.n_worlds) s.applied_force = f.applied_force;
}

inline bool row_finite(std::span<const double> r) {
  for (double v : r) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// Flags each world whose q, qd or ctrl holds a NaN or infinity.
inline std::vector<std::uint8_t> detect_nonfinite(const BatchState& s) {
  std::vector<std::uint8_t> flags(s.n_worlds, 0);
  for (std::size_t w = 0; w < s.n_worlds; ++w) {
    flags[w] = !(row_finite(s.q.row(w)) && row_finite(s.qd.row(w)) && row_finite(s.ctrl.row(w)));
  }
  return flags;
}

}  // namespace lockstep::sim

#endif  // LOCKSTEP_SIM_STATE_HPP_
