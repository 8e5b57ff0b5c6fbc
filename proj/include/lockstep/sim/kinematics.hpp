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

#ifndef LOCKSTEP_SIM_KINEMATICS_HPP_
#define LOCKSTEP_SIM_KINEMATICS_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lockstep/sim/model_spec.hpp"

namespace lockstep::sim {

// Flattened joint tree used by the hot loops.
struct Topology {
  std::size_t n_joints = 0;
  std::vector<int> parent;
  std::vector<double> offset_x, offset_z, length;
  std::vector<int> feet;
  // For foot f, joints on the path from the foot up to the base.
  std::vector<std::vector<int>> foot_chain;

  static Topology from(const ModelSpec& spec) {
    Topology t;
    t.n_joints = spec.joints.size();
    for (const auto& j : spec.joints) {
      t.parent.push_back(j.parent);
      t.offset_x.push_back(j.attach_offset.x);
      t.offset_z.push_back(j.attach_offset.z);
      t.length.push_back(j.link_length);
    }
    t.feet = spec.feet;
    for (int f : spec.feet) {
      std::vector<int> chain;
      for (int j = f; j >= 0; j = spec.joints[static_cast<std::size_t>(j)].parent) {
        chain.push_back(j);
      }
      t.foot_chain.push_back(std::move(chain));
    }
    return t;
  }
};

// Scratch for one world's kinematics; arrays sized by joint count.
struct LinkFrames {
  std::vector<Vec2> pivot;  // joint attach points (world)
  std::vector<Vec2> tip;    // link tips (world)
  std::vector<double> angle, sin_angle, cos_angle;

  explicit LinkFrames(std::size_t n = 0)
      : pivot(n), tip(n), angle(n), sin_angle(n), cos_angle(n) {}
};

// q = (x, z, pitch, joint angles...). Writes pivots and tips in world frame.
inline void forward_kinematics(const Topology& topo, const double* q, Vec2* pivot, Vec2* tip,
                               double* angle, double* sin_a, double* cos_a) {
  const double bx = q[0];
  const double bz = q[1];
  const double pitch = q[2];
  const double sb = std::sin(pitch);
  const double cb = std::cos(pitch);
  for (std::size_t j = 0; j < topo.n_joints; ++j) {
    const int p = topo.parent[j];
    double ox, oz, s, c, a;
    if (p < 0) {
      ox = bx;
      oz = bz;
      s = sb;
      c = cb;
      a = pitch;
    } else {
      const auto pi = static_cast<std::size_t>(p);
      ox = tip[pi].x;
      oz = tip[pi].z;
      s = sin_a[pi];
      c = cos_a[pi];
      a = angle[pi];
    }
    const double ax = ox + c * topo.offset_x[j] - s * topo.offset_z[j];
    const double az = oz + s * topo.offset_x[j] + c * topo.offset_z[j];
    const double th = a + q[3 + j];
    const double st = std::sin(th);
    const double ct = std::cos(th);
    pivot[j] = {ax, az};
    angle[j] = th;
    sin_a[j] = st;
    cos_a[j] = ct;
    tip[j] = {ax + topo.length[j] * st, az - topo.length[j] * ct};
  }
}

inline void forward_kinematics(const Topology& topo, std::span<const double> q,
                               LinkFrames& out) {
  out = LinkFrames(topo.n_joints);
  forward_kinematics(topo, q.data(), out.pivot.data(), out.tip.data(), out.angle.data(),
                     out.sin_angle.data(), out.cos_angle.data());
}

struct BodyPoses {
  Vec2 base;
  double pitch = 0.0;
  std::vector<Vec2> tips;
};

inline BodyPoses forward_kinematics(const ModelSpec& spec, std::span<const double> q) {
  const Topology topo = Topology::from(spec);
  LinkFrames frames;
  forward_kinematics(topo, q, frames);
  return {{q[0], q[1]}, q[2], frames.tip};
}

// Planar cross-product helper: d(point)/d(angle) for rotation about `pivot`.
inline Vec2 lever(const Vec2& point, const Vec2& pivot) {
  return {-(point.z - pivot.z), point.x - pivot.x};
}

}  // namespace lockstep::sim

#endif  // LOCKSTEP_SIM_KINEMATICS_HPP_
