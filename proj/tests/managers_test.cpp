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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "env_fixtures.hpp"
#include "lockstep/env/env.hpp"

namespace lockstep::testing {
namespace {

using managers::ObsTermCfg;

ObsTermCfg probe(const std::string& func, Json params = Json::object()) {
  ObsTermCfg t;
  t.func = func;
  t.params = std::move(params);
  return t;
}

// Actions --------------------------------------------------------------------

TEST(ActionManager, SlicesFollowRegistrationOrder) {
  auto cfg = minimal_cfg(2);
  cfg.actions.clear();
  cfg.actions.insert("hind", {"joint_position", {{"joints", {"hind_.*"}}}, std::nullopt});
  cfg.actions.insert("front", {"joint_position", {{"joints", {"front_.*"}}, {"scale", 1.0}}, 1.0});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  const auto& s = e.actions().slices();
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].offset, 0u);
  EXPECT_EQ(s[0].dim, 2u);
  EXPECT_EQ(s[1].offset, 2u);
  EXPECT_EQ(s[1].dim, 2u);
  EXPECT_EQ(e.actions().dim(), 4u);

  WorldArray<double> a(2, 4);
  a(1, 0) = 0.5;
  a(1, 2) = 2.5;  // clipped to 1 by the front term
  e.step(a);
  const auto& def = e.robot().default_state().joint_pos;
  EXPECT_DOUBLE_EQ(e.actions().action()(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(e.actions().targets()(1, 0), def[0] + 0.25 * 0.5);
  EXPECT_DOUBLE_EQ(e.actions().targets()(1, 2), def[2] + 1.0);
  EXPECT_DOUBLE_EQ(e.actions().targets()(0, 3), def[3]);
}

TEST(ActionManager, ShapeMismatchNamesBothShapes) {
  ManagerBasedRlEnv e(minimal_cfg(2));
  e.reset();
  WorldArray<double> bad(2, 3);
  try {
    e.step(bad);
    FAIL() << "expected a shape error";
  } catch (const std::invalid_argument& ex) {
    EXPECT_NE(std::string(ex.what()).find("2x3"), std::string::npos) << ex.what();
    EXPECT_NE(std::string(ex.what()).find("expected 2x4"), std::string::npos) << ex.what();
  }
}

TEST(ActionManager, KeepsTheTwoMostRecentActions) {
  ManagerBasedRlEnv e(minimal_cfg(1));
  e.reset();
  WorldArray<double> a(1, 4);
  a(0, 0) = 1.0;
  e.step(a);
  a(0, 0) = 3.0;
  e.step(a);
  EXPECT_EQ(e.actions().action()(0, 0), 3.0);
  EXPECT_EQ(e.actions().prev_action()(0, 0), 1.0);
}

TEST(ActionManager, UnknownJointPatternIsConfigError) {
  auto cfg = minimal_cfg(1);
  cfg.actions.at("joint_pos").params = {{"joints", {"elbow"}}};
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
}

// Rewards ---------------------------------------------------------------------

TEST(RewardManager, ScalesByControlTimestep) {
  auto run = [](double physics_dt) {
    auto cfg = minimal_cfg(2);
    cfg.physics_dt = physics_dt;
    cfg.rewards.insert("alive", {"constant", 2.0, {{"value", 1.0}}});
    ManagerBasedRlEnv e(cfg);
    e.reset();
    return e.step(zero_actions(e)).reward[0];
  };
  const double r20 = run(0.005);    // dt_control = 0.02
  const double r10 = run(0.0025);   // dt_control = 0.01
  EXPECT_EQ(r20, 2.0 * 1.0 * 0.02);
  EXPECT_EQ(r10 * 2.0, r20);
}

TEST(RewardManager, EpisodicSumsAndDtInvariantReturn) {
  auto episode_return = [](double physics_dt) {
    auto cfg = minimal_cfg(1);
    cfg.physics_dt = physics_dt;
    cfg.episode_length_s = 1.0;
    cfg.rewards.insert("alive", {"constant", 1.0, {{"value", 3.0}}});
    ManagerBasedRlEnv e(cfg);
    e.reset();
    double ret = 0.0;
    const auto steps = e.max_episode_steps();
    for (std::int64_t t = 0; t < steps; ++t) ret += e.step(zero_actions(e)).reward[0];
    EXPECT_EQ(e.last_reset_ids().size(), 1u);
    EXPECT_NEAR(e.extras().at("episode_reward/alive")[0], ret, 1e-12);
    return ret;
  };
  EXPECT_NEAR(episode_return(0.005), 3.0, 1e-12);
  EXPECT_NEAR(episode_return(0.0025), 3.0, 1e-12);
}

TEST(RewardManager, NonfiniteTermIsNamedAndZeroed) {
  auto cfg = minimal_cfg(3);
  cfg.rewards.insert("fine", {"constant", 1.0, Json::object()});
  cfg.rewards.insert("broken", {"probe_nan", 1.0, {{"world", 1}}});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  const auto r = e.step(zero_actions(e));
  ASSERT_EQ(e.rewards().nonfinite_terms().size(), 1u);
  EXPECT_EQ(e.rewards().nonfinite_terms()[0], "broken");
  EXPECT_TRUE(std::isfinite(r.reward[1]));
  EXPECT_EQ(r.reward[1], 1.0 * e.step_dt());
  EXPECT_EQ(r.reward[0], 2.0 * e.step_dt());
}

// Terminations ----------------------------------------------------------------

TEST(TerminationManager, TimeoutTruncatesOnly) {
  auto cfg = minimal_cfg(2);
  cfg.episode_length_s = 0.2;  // 10 control steps
  ManagerBasedRlEnv e(cfg);
  e.reset();
  for (int t = 1; t < 10; ++t) {
    const auto r = e.step(zero_actions(e));
    EXPECT_EQ(r.truncated[0], 0) << t;
  }
  const auto r = e.step(zero_actions(e));
  EXPECT_EQ(r.truncated[0], 1);
  EXPECT_EQ(r.terminated[0], 0);
  EXPECT_EQ(r.extras.at("episode_termination/time_out")[0], 2.0);
  EXPECT_EQ(e.episode_length(0), 0);
}

TEST(TerminationManager, PitchBeyondLimitTerminates) {
  auto cfg = minimal_cfg(2);
  cfg.terminations.insert("pitch", {"pitch_beyond", false, {{"limit", 1.0}}});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  e.state_mut().q(1, 2) = 1.5;
  const auto r = e.step(zero_actions(e));
  EXPECT_EQ(r.terminated[0], 0);
  EXPECT_EQ(r.terminated[1], 1);
  EXPECT_EQ(r.truncated[1], 0);
  EXPECT_EQ(r.extras.at("episode_termination/pitch")[0], 1.0);
}

TEST(TerminationManager, DefaultStanceDoesNotTerminate) {
  auto cfg = tasks::velocity_flat_cfg();
  cfg.scene.num_envs = 8;
  cfg.events.clear();
  ManagerBasedRlEnv e(cfg);
  e.reset();
  for (int t = 0; t < 200; ++t) {
    const auto r = e.step(zero_actions(e));
    ASSERT_EQ(r.extras.at("reset_count")[0], 0.0) << "step " << t;
  }
}

TEST(TerminationManager, RejectsReservedNameAndSecondTimeout) {
  auto cfg = minimal_cfg(1);
  cfg.terminations.insert("nonfinite", {"time_out", false, Json::object()});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
  cfg = minimal_cfg(1);
  cfg.terminations.insert("time_out_2", {"time_out", true, Json::object()});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
}

// Observations ----------------------------------------------------------------

TEST(ObservationManager, ClipThenScale) {
  auto cfg = minimal_cfg(1);
  auto t = probe("probe_constant", {{"value", 3.0}});
  t.clip = std::array<double, 2>{-1.0, 1.0};
  t.scale = 2.0;
  cfg.observations.at("policy").terms.insert("c", t);
  ManagerBasedRlEnv e(cfg);
  const auto& obs = e.reset().group("policy");
  EXPECT_EQ(obs(0, 1), 2.0);
}

TEST(ObservationManager, DelayAndHistoryContract) {
  constexpr std::size_t kD = 3, kH = 4;
  constexpr double kScale = 0.5;
  auto cfg = minimal_cfg(2);
  managers::ObsGroupCfg g;
  auto delayed = probe("probe_ramp");
  delayed.scale = kScale;
  delayed.clip = std::array<double, 2>{-1e6, 110.0};
  delayed.delay = kD;
  auto hist = probe("probe_ramp", {{"offset", 0.25}});
  hist.history = kH;
  g.terms.insert("delayed", delayed);
  g.terms.insert("hist", hist);
  cfg.observations.insert("probe", g);
  ManagerBasedRlEnv e(cfg);
  auto raw = [](std::int64_t t, std::size_t w) { return double(t) + 100.0 * double(w); };
  for (std::int64_t t = 0; t <= 20; ++t) {
    if (t == 0) {
      e.reset();
    } else {
      e.step(zero_actions(e));
    }
    const auto& o = e.observations().group("probe");
    ASSERT_EQ(o.cols(), 1u + kH);
    for (std::size_t w = 0; w < 2; ++w) {
      const std::int64_t src = std::max<std::int64_t>(t - std::int64_t{kD}, 0);
      EXPECT_EQ(o(w, 0), kScale * std::min(raw(src, w), 110.0)) << "t=" << t << " w=" << w;
      for (std::size_t k = 0; k < kH; ++k) {
        // Oldest first; before enough steps exist the reset value repeats.
        const std::int64_t at = std::max<std::int64_t>(t - std::int64_t(kH - 1 - k), 0);
        EXPECT_EQ(o(w, 1 + k), raw(at, w) + 0.25) << "t=" << t << " k=" << k;
      }
    }
  }
}

TEST(ObservationManager, ResetRefillsRings) {
  auto cfg = minimal_cfg(2);
  cfg.terminations.insert("probe", {"probe_at_length", false, {{"length", 5}, {"world", 1}}});
  auto hist = probe("probe_ramp");
  hist.history = 3;
  cfg.observations.at("policy").terms.insert("hist", hist);
  ManagerBasedRlEnv e(cfg);
  e.reset();
  for (int t = 1; t <= 5; ++t) e.step(zero_actions(e));
  const auto& o = e.observations().group("policy");
  // World 1 was reset at step 5: its history holds the reset value 3 times.
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(o(1, 1 + k), 5.0 + 100.0);
  EXPECT_EQ(o(0, 1), 3.0);
  EXPECT_EQ(o(0, 3), 5.0);
}

TEST(ObservationManager, NoiseUsesPerWorldStreamsAndIsBounded) {
  auto make = [](bool enable) {
    auto cfg = minimal_cfg(4);
    auto t = probe("probe_constant", {{"value", 1.0}});
    t.noise = {managers::NoiseCfg::Kind::kUniform, 0.1};
    cfg.observations.at("policy").terms.insert("noisy", t);
    cfg.observations.at("policy").enable_noise = enable;
    return cfg;
  };
  ManagerBasedRlEnv e(make(true));
  const auto& o = e.reset().group("policy");
  std::set<double> seen;
  for (std::size_t w = 0; w < 4; ++w) {
    EXPECT_LE(std::abs(o(w, 1) - 1.0), 0.1);
    seen.insert(o(w, 1));
  }
  EXPECT_EQ(seen.size(), 4u);

  auto one = make(true);
  one.scene.num_envs = 1;
  one.world_offset = 2;
  ManagerBasedRlEnv solo(one);
  EXPECT_EQ(solo.reset().group("policy")(0, 1), o(2, 1));

  ManagerBasedRlEnv quiet(make(false));
  EXPECT_EQ(quiet.reset().group("policy")(3, 1), 1.0);
}

TEST(ObservationManager, NonfiniteAttributionNamesOnlyTheBadTerm) {
  auto cfg = minimal_cfg(3);
  cfg.observations.at("policy").terms.insert("good", probe("probe_constant"));
  cfg.observations.at("policy").terms.insert("bad", probe("probe_nan", {{"world", 2}}));
  ManagerBasedRlEnv e(cfg);
  e.reset();
  ASSERT_EQ(e.observations().nonfinite_terms().size(), 1u);
  EXPECT_EQ(e.observations().nonfinite_terms()[0], "policy/bad");
}

TEST(ObservationManager, UnknownGroupAndFunctionErrors) {
  ManagerBasedRlEnv e(minimal_cfg(1));
  e.reset();
  EXPECT_THROW(e.observations().group("actor"), std::invalid_argument);

  auto cfg = minimal_cfg(1);
  cfg.observations.at("policy").terms.insert("v", probe("base_lin_vell"));
  try {
    ManagerBasedRlEnv bad(cfg);
    FAIL();
  } catch (const ConfigError& ex) {
    EXPECT_NE(std::string(ex.what()).find("did you mean base_lin_vel"), std::string::npos)
        << ex.what();
  }
}

TEST(ObservationManager, LayoutFollowsRegistrationOrder) {
  auto cfg = tasks::velocity_flat_cfg();
  cfg.scene.num_envs = 2;
  ManagerBasedRlEnv a(cfg);
  ManagerBasedRlEnv b(cfg);
  std::vector<std::string> names_a, names_b;
  for (const auto& t : a.observations().groups().at("policy").terms) names_a.push_back(t.name);
  for (const auto& t : b.observations().groups().at("policy").terms) names_b.push_back(t.name);
  EXPECT_EQ(names_a, names_b);
  EXPECT_EQ(names_a.front(), "base_lin_vel");
  EXPECT_EQ(names_a.back(), "command");
  // 2 + 1 + 2 + 4 + 4 + 4 + 2
  EXPECT_EQ(a.observations().group("policy").cols(), 19u);
}

// Events ----------------------------------------------------------------------

TEST(EventManager, IntervalGapsStayInRange) {
  event_log().clear();
  auto cfg = minimal_cfg(3);
  cfg.events.insert("rec", {"probe_record", managers::EventMode::kInterval, {0.5, 0.8}, {}});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  for (int t = 0; t < 2000; ++t) e.step(zero_actions(e));
  std::map<std::size_t, std::vector<std::int64_t>> by_world;
  for (auto [w, s] : event_log()) by_world[w].push_back(s);
  ASSERT_EQ(by_world.size(), 3u);
  for (const auto& [w, steps] : by_world) {
    ASSERT_GT(steps.size(), 30u);
    EXPECT_GE(steps.front(), 25);  // first firing is one gap after start
    for (std::size_t i = 1; i < steps.size(); ++i) {
      const double gap = double(steps[i] - steps[i - 1]) * e.step_dt();
      EXPECT_GE(gap, 0.5 - 1e-12);
      EXPECT_LE(gap, 0.8 + 1e-12);
    }
  }
}

TEST(EventManager, ResetModeFiresOnlyForResetWorlds) {
  event_log().clear();
  auto cfg = minimal_cfg(4);
  cfg.terminations.insert("probe", {"probe_at_length", false, {{"length", 3}, {"world", 2}}});
  cfg.events.insert("rec", {"probe_record", managers::EventMode::kReset, {0, 0}, {}});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  EXPECT_EQ(event_log().size(), 4u);  // initial reset touches every world
  event_log().clear();
  for (int t = 0; t < 9; ++t) e.step(zero_actions(e));
  ASSERT_EQ(event_log().size(), 3u);
  for (auto [w, s] : event_log()) EXPECT_EQ(w, 2u);
}

TEST(EventManager, StartupMassScalingExpandsOnce) {
  auto cfg = minimal_cfg(16);
  cfg.events.insert("mass", {"randomize_field",
                             managers::EventMode::kStartup,
                             {0, 0},
                             {{"field", "base_mass"}, {"range", {0.8, 1.2}}}});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  const auto& f = e.model().field(sim::fields::kBaseMass);
  EXPECT_TRUE(f.expanded());
  EXPECT_EQ(e.model().generation(), 1u);
  std::set<double> distinct;
  for (std::size_t w = 0; w < 16; ++w) {
    EXPECT_GE(f.value(w), 0.8 * 6.0);
    EXPECT_LE(f.value(w), 1.2 * 6.0);
    distinct.insert(f.value(w));
  }
  EXPECT_EQ(distinct.size(), 16u);
}

TEST(RandomizeField, ScaleIsRelativeToBaseAndLeavesOtherWorlds) {
  auto spec = tasks::walker_spec();
  auto m = sim::Model::compile(spec, 6);
  WorldStreams rng(5, "test", 6);
  const std::size_t some[] = {0, 1};
  for (int rep = 0; rep < 5; ++rep) {
    managers::randomize_field(m, "friction", managers::Distribution::kUniform, 0.5, 1.5,
                              managers::FieldOp::kScale, some, rng);
  }
  const auto& f = m.field("friction");
  for (std::size_t w : {0u, 1u}) {
    EXPECT_GE(f.value(w), 0.5 * f.base(0));
    EXPECT_LE(f.value(w), 1.5 * f.base(0));
  }
  for (std::size_t w = 2; w < 6; ++w) EXPECT_EQ(f.value(w), f.base(0));
  EXPECT_EQ(m.generation(), 1u);

  // Same seed, same draws.
  auto m2 = sim::Model::compile(spec, 6);
  WorldStreams rng2(5, "test", 6);
  for (int rep = 0; rep < 5; ++rep) {
    managers::randomize_field(m2, "friction", managers::Distribution::kUniform, 0.5, 1.5,
                              managers::FieldOp::kScale, some, rng2);
  }
  EXPECT_EQ(m2.field("friction").value(1), f.value(1));

  EXPECT_THROW(managers::randomize_field(m, "frcition", managers::Distribution::kUniform, 0, 1,
                                         managers::FieldOp::kSet, some, rng),
               std::invalid_argument);
}

TEST(RandomizeField, SetAndAddOperations) {
  auto m = sim::Model::compile(tasks::walker_spec(), 2);
  WorldStreams rng(1, "ops", 2);
  const std::size_t w0[] = {0};
  managers::randomize_field(m, "link_mass", managers::Distribution::kUniform, 2.0, 2.0,
                            managers::FieldOp::kSet, w0, rng, 1);
  EXPECT_EQ(m.field("link_mass").value(0, 1), 2.0);
  EXPECT_EQ(m.field("link_mass").value(0, 0), 0.5);
  managers::randomize_field(m, "link_mass", managers::Distribution::kUniform, 0.25, 0.25,
                            managers::FieldOp::kAdd, w0, rng, 1);
  EXPECT_EQ(m.field("link_mass").value(0, 1), 0.75);
  EXPECT_THROW(managers::randomize_field(m, "link_mass", managers::Distribution::kUniform, 0, 1,
                                         managers::FieldOp::kSet, w0, rng, 9),
               std::out_of_range);
}

TEST(EventManager, RejectsBadIntervalsAndParams) {
  auto cfg = minimal_cfg(1);
  cfg.events.insert("rec", {"probe_record", managers::EventMode::kInterval, {2.0, 1.0}, {}});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
  cfg = minimal_cfg(1);
  cfg.events.insert("rec", {"probe_record", managers::EventMode::kInterval, {0.001, 0.002}, {}});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
  cfg = minimal_cfg(1);
  cfg.events.insert("m", {"randomize_field", managers::EventMode::kReset, {0, 0},
                          {{"field", "mass"}, {"range", {0.8, 1.2}}}});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
  cfg = minimal_cfg(1);
  cfg.events.insert("p", {"push_base", managers::EventMode::kReset, {0, 0}, {{"force", 1}}});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
}

TEST(EventManager, JointJitterStaysInLimits) {
  auto cfg = minimal_cfg(32);
  cfg.events.insert("jit", {"reset_joints_offset", managers::EventMode::kReset, {0, 0},
                            {{"range", {-3.0, 3.0}}}});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  const auto& joints = e.model().spec().joints;
  bool moved = false;
  for (std::size_t w = 0; w < 32; ++w) {
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const double q = e.state().q(w, sim::kBaseDofs + j);
      EXPECT_GE(q, joints[j].pos_lo);
      EXPECT_LE(q, joints[j].pos_hi);
      moved |= q != e.robot().default_state().joint_pos[j];
    }
  }
  EXPECT_TRUE(moved);
}

// Commands --------------------------------------------------------------------

TEST(CommandManager, ResamplesOnPeriod) {
  managers::CommandCfg c;
  c.resample_period = 10.0;
  c.ranges.insert("vx", {-1.0, 1.0});
  managers::CommandManager m(c, 3, 0.02, 7, 0);
  EXPECT_EQ(m.period_steps(), 500);
  const std::size_t all[] = {0, 1, 2};
  m.resample(all);
  const double v0 = m.value(0, 0);
  for (int t = 1; t < 500; ++t) {
    m.update();
    ASSERT_EQ(m.value(0, 0), v0) << t;
  }
  m.update();
  EXPECT_NE(m.value(0, 0), v0);
}

TEST(CommandManager, DrawsStayInRangeAndWidenStatistically) {
  managers::CommandCfg c;
  c.resample_period = 0.02;
  c.ranges.insert("vx", {-1.0, 1.0});
  managers::CommandManager m(c, 64, 0.02, 3, 0);
  double max_abs = 0.0;
  for (int t = 0; t < 100; ++t) {
    m.update();
    for (std::size_t w = 0; w < 64; ++w) {
      ASSERT_LE(std::abs(m.value(w, 0)), 1.0);
      max_abs = std::max(max_abs, std::abs(m.value(w, 0)));
    }
  }
  EXPECT_GT(max_abs, 0.99);
  m.set_range("vx", {-2.0, 2.0});
  std::size_t beyond = 0, total = 0;
  for (int t = 0; t < 100; ++t) {
    m.update();
    for (std::size_t w = 0; w < 64; ++w, ++total) beyond += std::abs(m.value(w, 0)) > 1.0;
  }
  // Half of U[-2, 2] lies beyond 1; 6400 draws put the share near 0.5.
  EXPECT_NEAR(double(beyond) / double(total), 0.5, 0.05);
  EXPECT_THROW(m.channel("vy"), std::invalid_argument);
}

TEST(CommandManager, RejectsBadConfig) {
  managers::CommandCfg c;
  c.resample_period = 0.0;
  EXPECT_THROW(managers::CommandManager(c, 1, 0.02, 0, 0), ConfigError);
  c.resample_period = 1.0;
  c.ranges.insert("vx", {1.0, -1.0});
  EXPECT_THROW(managers::CommandManager(c, 1, 0.02, 0, 0), ConfigError);
}

// Curricula -------------------------------------------------------------------

EnvCfg rough_probe_cfg(std::size_t n) {
  auto cfg = tasks::velocity_rough_cfg();
  cfg.scene.num_envs = n;
  cfg.events.clear();
  cfg.curriculum.erase("command_widen");
  cfg.episode_length_s = 2.0;
  cfg.commands.ranges.at("lin_vel_x") = {0.5, 1.0};
  return cfg;
}

TEST(Curriculum, StationaryRobotDemotesToRowZero) {
  auto cfg = rough_probe_cfg(8);
  cfg.scene.max_init_terrain_level = 9;
  ManagerBasedRlEnv e(cfg);
  e.reset();
  std::size_t start_max = 0;
  for (std::size_t w = 0; w < 8; ++w) start_max = std::max(start_max, e.terrain_level(w));
  ASSERT_GT(start_max, 0u);
  for (int t = 0; t < 100 * 11; ++t) e.step(zero_actions(e));
  for (std::size_t w = 0; w < 8; ++w) EXPECT_EQ(e.terrain_level(w), 0u) << w;
  EXPECT_EQ(e.extras().at("curriculum/terrain_levels")[0], 0.0);
}

TEST(Curriculum, PerfectTrackerPromotesMonotonically) {
  auto cfg = rough_probe_cfg(4);
  cfg.scene.max_init_terrain_level = 0;
  cfg.terminations.clear();
  cfg.terminations.insert("time_out", {"time_out", true, Json::object()});
  ManagerBasedRlEnv e(cfg);
  // Scripted motion: after every physics step move each base along its
  // command exactly and hold it at the nominal height above the ground.
  e.set_substep_hook([&e](sim::BatchState& s, std::int64_t) {
    for (std::size_t w = 0; w < s.n_worlds; ++w) {
      s.q(w, 0) += e.commands().value(w, 0) * e.physics_dt();
    }
  });
  e.reset();
  std::vector<std::size_t> last(4, 0);
  for (int ep = 0; ep < 12; ++ep) {
    for (std::int64_t t = 0; t < e.max_episode_steps(); ++t) e.step(zero_actions(e));
    for (std::size_t w = 0; w < 4; ++w) {
      EXPECT_GE(e.terrain_level(w), last[w]);
      last[w] = e.terrain_level(w);
    }
  }
  for (std::size_t w = 0; w < 4; ++w) EXPECT_EQ(e.terrain_level(w), e.terrain_rows() - 1);
}

TEST(Curriculum, RewardWeightScheduleIsLinear) {
  auto cfg = minimal_cfg(1);
  cfg.rewards.insert("slip", {"foot_slip", 1.0, Json::object()});
  cfg.curriculum.insert("sched", {"reward_weight_schedule",
                                  {{"term", "slip"}, {"from", 1.0}, {"to", 0.0},
                                   {"start_step", 0}, {"end_step", 1000}}});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  for (int t = 0; t < 500; ++t) e.step(zero_actions(e));
  EXPECT_DOUBLE_EQ(e.rewards().term("slip").weight, 0.5);
  EXPECT_DOUBLE_EQ(e.extras().at("curriculum/sched")[0], 0.5);
  for (int t = 0; t < 600; ++t) e.step(zero_actions(e));
  EXPECT_EQ(e.rewards().term("slip").weight, 0.0);
}

TEST(Curriculum, CommandWidenGrowsRangeForGoodTrackers) {
  auto cfg = minimal_cfg(4);
  cfg.episode_length_s = 1.0;
  cfg.commands.ranges.at("lin_vel_x") = {-0.5, 0.5};
  cfg.rewards.insert("track", {"track_lin_vel_x_exp", 1.0, {{"std", 0.25}}});
  cfg.curriculum.insert("widen", {"command_widen", {{"reward_term", "track"},
                                                   {"threshold", 0.5},
                                                   {"factor", 1.5},
                                                   {"limit", 1.0}}});
  ManagerBasedRlEnv e(cfg);
  e.reset();
  // A zero command is tracked perfectly by a robot standing still.
  auto pin = [&e] {
    for (std::size_t w = 0; w < 4; ++w) e.commands_mut().set_value(w, 0, 0.0);
  };
  pin();
  for (std::int64_t t = 0; t < e.max_episode_steps(); ++t) {
    e.step(zero_actions(e));
    pin();
  }
  EXPECT_DOUBLE_EQ(e.commands().ranges().at("lin_vel_x").hi, 0.75);
  for (int ep = 0; ep < 3; ++ep) {
    for (std::int64_t t = 0; t < e.max_episode_steps(); ++t) {
      e.step(zero_actions(e));
      pin();
    }
  }
  EXPECT_DOUBLE_EQ(e.commands().ranges().at("lin_vel_x").hi, 1.0);
  EXPECT_DOUBLE_EQ(e.commands().ranges().at("lin_vel_x").lo, -1.0);
}

TEST(Curriculum, ConfigErrors) {
  auto cfg = minimal_cfg(1);
  cfg.curriculum.insert("w", {"command_widen", {{"reward_term", "missing"}}});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
  cfg = minimal_cfg(1);
  cfg.curriculum.insert("s", {"reward_weight_schedule",
                              {{"term", "x"}, {"from", 1}, {"to", 0}, {"end_step", 10}}});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
  cfg = minimal_cfg(1);
  cfg.curriculum.insert("t", {"terrain_levels", {{"promote", 0.2}, {"demote", 0.4}}});
  EXPECT_THROW(ManagerBasedRlEnv e(cfg), ConfigError);
}

}  // namespace
}  // namespace lockstep::testing
