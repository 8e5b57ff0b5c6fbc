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


#include "lockstep/entity/entity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "lockstep/core/rng.hpp"
#include "lockstep/sim/model.hpp"
#include "test_models.hpp"

namespace lockstep::entity {
namespace {

sim::ModelSpec three_joint_spec() {
  sim::ModelSpec s = testing::two_joint_spec();
  sim::JointSpec r_hip;
  r_hip.name = "r_hip";
  r_hip.attach_offset = {-0.1, -0.05};
  s.joints.push_back(r_hip);
  return s;
}

TEST(Entity, CapabilityFlags) {
  Entity robot = Entity::articulated(three_joint_spec(), {});
  EXPECT_FALSE(robot.is_fixed_base());
  EXPECT_TRUE(robot.is_articulated());
  EXPECT_EQ(robot.body_names().size(), 4u);
  Entity ground = Entity::fixture("terrain");
  EXPECT_TRUE(ground.is_fixed_base());
  EXPECT_FALSE(ground.is_articulated());
}

TEST(Entity, FindJointsMatchesFullNamesInModelOrder) {
  Entity e = Entity::articulated(three_joint_spec(), {});
  EXPECT_EQ(e.find_joints({".*_hip"}), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(e.find_joints({".*"}), (std::vector<std::size_t>{0, 1, 2}));
  // Partial matches do not count and overlapping patterns deduplicate.
  EXPECT_EQ(e.find_joints({"r_hip", ".*hip", "l_.*"}), (std::vector<std::size_t>{0, 1, 2}));
  try {
    e.find_joints({"hip"});
    FAIL();
  } catch (const std::invalid_argument& err) {
    EXPECT_NE(std::string(err.what()).find("l_knee"), std::string::npos);
  }
  EXPECT_THROW(e.find_joints({"elbow"}), std::invalid_argument);
}

TEST(Entity, RejectsDefaultOutsideLimits) {
  DefaultState d;
  d.joint_pos = {0.0, 5.0, 0.0};
  EXPECT_THROW(Entity::articulated(three_joint_spec(), d), std::invalid_argument);
  d.joint_pos = {0.0, 0.0};
  EXPECT_THROW(Entity::articulated(three_joint_spec(), d), std::invalid_argument);
}

TEST(Entity, WriteDefaultStateTouchesOnlyListedWorlds) {
  sim::Model m = sim::Model::compile(three_joint_spec(), 4);
  sim::BatchState s = sim::make_state(m);
  RngStream rng(9, fnv1a64("fill"), 0);
  for (double& v : s.q.flat()) v = rng.uniform(-1, 1);
  for (double& v : s.qd.flat()) v = rng.uniform(-1, 1);
  const sim::BatchState before = s;
  DefaultState d;
  d.base_pos = {0.5, 0.7};
  d.joint_pos = {0.1, -0.2, 0.3};
  Entity e = Entity::articulated(three_joint_spec(), d);
  const std::size_t two[] = {2};
  e.write_default_state(s, two);
  for (std::size_t w : {0u, 1u, 3u}) {
    EXPECT_EQ(std::memcmp(s.q.row(w).data(), before.q.row(w).data(), m.nq() * 8), 0);
    EXPECT_EQ(std::memcmp(s.qd.row(w).data(), before.qd.row(w).data(), m.nq() * 8), 0);
  }
  EXPECT_EQ(s.q(2, 0), 0.5);
  EXPECT_EQ(s.q(2, 1), 0.7);
  EXPECT_EQ(s.q(2, 5), 0.3);
  EXPECT_EQ(s.qd(2, 4), 0.0);

  const std::size_t all[] = {0, 1, 2, 3};
  e.write_default_state(s, all);
  for (std::size_t w = 1; w < 4; ++w) {
    EXPECT_EQ(std::memcmp(s.q.row(w).data(), s.q.row(0).data(), m.nq() * 8), 0);
  }
  const std::size_t bad[] = {1, 4};
  EXPECT_THROW(e.write_default_state(s, bad), std::out_of_range);
}

TEST(Entity, DefaultStateDivergesUnderRandomizedMass) {
  sim::Model m = sim::Model::compile(three_joint_spec(), 2);
  m.expand_field(sim::fields::kLinkMass);
  m.set_field_value(sim::fields::kLinkMass, 1, 0, 3.0);
  sim::BatchState s = sim::make_state(m);
  DefaultState d;
  d.joint_pos = {0.3, -0.4, 0.2};
  Entity e = Entity::articulated(three_joint_spec(), d);
  const std::size_t all[] = {0, 1};
  e.write_default_state(s, all);
  sim::physics_step(m, s);
  EXPECT_NE(s.qd(0, 3), s.qd(1, 3));
}

TEST(EntityData, ProjectedGravityCardinalAngles) {
  sim::Model m = sim::Model::compile(testing::one_leg_spec(), 2);
  sim::BatchState s = sim::make_state(m);
  s.q(1, 2) = std::numbers::pi / 2;
  EntityData d(2, 1, 1);
  d.refresh(m, s, 0.0);
  EXPECT_EQ(d.projected_gravity(0, 0), -0.0);
  EXPECT_EQ(d.projected_gravity(0, 1), -1.0);
  EXPECT_NEAR(d.projected_gravity(1, 0), -1.0, 1e-15);
  EXPECT_NEAR(d.projected_gravity(1, 1), 0.0, 1e-15);
}

TEST(EntityData, BaseFrameQuantitiesMatchRotationOracle) {
  constexpr std::size_t kN = 64;
  sim::Model m = sim::Model::compile(testing::one_leg_spec(), kN);
  sim::BatchState s = sim::make_state(m);
  RngStream rng(3, fnv1a64("theta"), 0);
  for (std::size_t w = 0; w < kN; ++w) {
    s.q(w, 2) = rng.uniform(-4.0, 4.0);
    s.qd(w, 0) = rng.uniform(-2.0, 2.0);
    s.qd(w, 1) = rng.uniform(-2.0, 2.0);
  }
  EntityData d(kN, 1, 1);
  d.refresh(m, s, 0.0);
  for (std::size_t w = 0; w < kN; ++w) {
    // World-from-body rotation; gravity and velocity are mapped by its
    // transpose, here written out as an explicit matrix product.
    const double th = s.q(w, 2);
    const double r[2][2] = {{std::cos(th), -std::sin(th)}, {std::sin(th), std::cos(th)}};
    const double g[2] = {0.0, -1.0};
    const double v[2] = {s.qd(w, 0), s.qd(w, 1)};
    for (int i = 0; i < 2; ++i) {
      const double pg = r[0][i] * g[0] + r[1][i] * g[1];
      const double vb = r[0][i] * v[0] + r[1][i] * v[1];
      EXPECT_NEAR(d.projected_gravity(w, i), pg, 1e-15);
      EXPECT_NEAR(d.root_lin_vel_b(w, i), vb, 1e-15);
    }
    const double norm = std::hypot(d.projected_gravity(w, 0), d.projected_gravity(w, 1));
    EXPECT_NEAR(norm, 1.0, 2e-16);
  }
}

TEST(EntityData, RefreshDoesNotMutateStateAndTracksFeet) {
  sim::Model m = sim::Model::compile(testing::one_leg_spec(), 1);
  sim::BatchState s = sim::make_state(m);
  s.q(0, 1) = 0.45;
  for (int i = 0; i < 400; ++i) sim::physics_step(m, s);
  const sim::BatchState before = s;
  EntityData d(1, 1, 1);
  d.refresh(m, s, m.physics_dt());
  EXPECT_EQ(std::memcmp(before.q.data(), s.q.data(), s.q.size() * 8), 0);
  EXPECT_EQ(d.foot_contact(0, 0), 1);
  EXPECT_GT(d.foot_normal_force(0, 0), 0.0);
  EXPECT_NEAR(d.foot_pos(0, 0).z, s.q(0, 1) - 0.5, 1e-12);
}

TEST(EntityData, AccelerationIsFiniteDifferenceOfBaseVelocity) {
  sim::Model m = sim::Model::compile(testing::one_leg_spec(), 1);
  sim::BatchState s = sim::make_state(m);
  s.q(0, 1) = 5.0;
  EntityData d(1, 1, 1);
  d.refresh(m, s, 0.0);
  EXPECT_EQ(d.root_lin_acc_b(0, 1), 0.0);
  sim::physics_step(m, s);
  d.refresh(m, s, m.physics_dt());
  EXPECT_NEAR(d.root_lin_acc_b(0, 1), -m.spec().gravity, 1e-9);
}

}  // namespace
}  // namespace lockstep::entity
