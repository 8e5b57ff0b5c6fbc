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


#include "lockstep/actuation/actuator.hpp"

#include <gtest/gtest.h>

#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "lockstep/core/rng.hpp"
#include "test_models.hpp"

namespace lockstep::actuation {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lockstep_" + name)).string();
}

TEST(IdealPd, SpecExamples) {
  EXPECT_EQ(pd_torque(IdealPdCfg{10, 1, 100}, 0.3, 0.2, 0.3, 0.2), 0.0);
  EXPECT_EQ(pd_torque(IdealPdCfg{10, 0, 100}, 0.5, 0.0, 0.0, 0.0), 5.0);
  EXPECT_EQ(pd_torque(IdealPdCfg{1000, 0, 20}, 1.0, 0.0, 0.0, 0.0), 20.0);
  EXPECT_EQ(pd_torque(IdealPdCfg{1000, 0, 20}, -1.0, 0.0, 0.0, 0.0), -20.0);
}

TEST(IdealPd, MatchesOracleAtRandomPoints) {
  RngStream rng(1, fnv1a64("pd"), 0);
  for (int i = 0; i < 20; ++i) {
    const IdealPdCfg c{rng.uniform(0, 80), rng.uniform(0, 3), rng.uniform(1, 30)};
    const double qdes = rng.uniform(-2, 2), qddes = rng.uniform(-5, 5);
    const double q = rng.uniform(-2, 2), qd = rng.uniform(-5, 5);
    double expect = c.kp * (qdes - q) + c.kd * (qddes - qd);
    if (expect > c.effort_limit) expect = c.effort_limit;
    if (expect < -c.effort_limit) expect = -c.effort_limit;
    EXPECT_NEAR(pd_torque(c, qdes, qddes, q, qd), expect, 1e-12);
  }
}

TEST(DcMotor, EnvelopeExamples) {
  EXPECT_EQ(dc_torque_hi(30, 10, 20, 0.0), 20.0);
  EXPECT_EQ(dc_torque_lo(30, 10, 20, 0.0), -20.0);
  EXPECT_EQ(dc_torque_hi(30, 10, 20, 10.0), 0.0);
  // Hand evaluation: 30 * (1 - 5/10) = 15, below the 20 limit.
  EXPECT_DOUBLE_EQ(dc_torque_hi(30, 10, 20, 5.0), 15.0);
  const DcMotorCfg strong{1000, 0, 30, 10, 20};
  EXPECT_DOUBLE_EQ(dc_motor_torque(strong, 1.0, 0.0, 0.0, 5.0), 15.0);
}

TEST(DcMotor, MatchesOracleAtRandomPoints) {
  RngStream rng(2, fnv1a64("dc"), 0);
  for (int i = 0; i < 20; ++i) {
    DcMotorCfg c;
    c.kp = rng.uniform(0, 80);
    c.kd = rng.uniform(0, 3);
    c.effort_limit = rng.uniform(1, 30);
    c.saturation_effort = c.effort_limit * rng.uniform(1, 2);
    c.velocity_limit = rng.uniform(1, 20);
    const double qdes = rng.uniform(-2, 2), q = rng.uniform(-2, 2);
    const double qd = rng.uniform(-25, 25);
    // Envelope written as min/max of the motor line, independent of std::clamp.
    const double top = std::min(c.effort_limit,
                                std::max(0.0, c.saturation_effort - c.saturation_effort * qd / c.velocity_limit));
    const double bot = std::max(-c.effort_limit,
                                std::min(0.0, -c.saturation_effort - c.saturation_effort * qd / c.velocity_limit));
    const double raw = c.kp * (qdes - q) - c.kd * qd;
    const double expect = raw > top ? top : (raw < bot ? bot : raw);
    EXPECT_NEAR(dc_motor_torque(c, qdes, 0.0, q, qd), expect, 1e-12);
  }
}

TEST(DcMotor, EqualsPdAtZeroSpeed) {
  RngStream rng(3, fnv1a64("dc0"), 0);
  for (int i = 0; i < 200; ++i) {
    const double kp = rng.uniform(0, 100), kd = rng.uniform(0, 2), lim = rng.uniform(1, 30);
    const DcMotorCfg dc{kp, kd, lim * rng.uniform(1, 3), rng.uniform(1, 30), lim};
    const IdealPdCfg pd{kp, kd, lim};
    const double qdes = rng.uniform(-3, 3), q = rng.uniform(-3, 3);
    EXPECT_EQ(dc_motor_torque(dc, qdes, 0.0, q, 0.0), pd_torque(pd, qdes, 0.0, q, 0.0));
  }
}

TEST(Actuators, OutputBoundedByEffortLimit) {
  RngStream rng(4, fnv1a64("bound"), 0);
  for (int i = 0; i < 2000; ++i) {
    const double lim = rng.uniform(0.1, 50);
    const double qdes = rng.uniform(-1e3, 1e3), q = rng.uniform(-1e3, 1e3);
    const double qd = rng.uniform(-1e3, 1e3);
    EXPECT_LE(std::abs(pd_torque(IdealPdCfg{rng.uniform(0, 1e4), rng.uniform(0, 1e2), lim},
                                 qdes, 0.0, q, qd)),
              lim);
    const DcMotorCfg dc{rng.uniform(0, 1e4), rng.uniform(0, 1e2), lim * 1.5, rng.uniform(0.1, 40),
                        lim};
    EXPECT_LE(std::abs(dc_motor_torque(dc, qdes, 0.0, q, qd)), lim);
  }
}

TEST(Actuators, ValidationRejectsBadConfigs) {
  EXPECT_THROW(validate(ActuatorModel{IdealPdCfg{1, 1, 0}}, "a"), ConfigError);
  EXPECT_THROW(validate(ActuatorModel{DcMotorCfg{1, 1, 10, 5, 20}}, "a"), ConfigError);
  EXPECT_THROW(validate(ActuatorModel{DcMotorCfg{1, 1, 30, 0, 20}}, "a"), ConfigError);
  auto inner = std::make_shared<const ActuatorModel>(ActuatorModel{IdealPdCfg{1, 1, 5}});
  EXPECT_THROW(validate(ActuatorModel{DelayedCfg{inner, 0.02, 0.01, true}}, "a"), ConfigError);
  EXPECT_NO_THROW(validate(ActuatorModel{DelayedCfg{inner, 0.0, 0.01, true}}, "a"));
}

MlpLayer make_layer(std::size_t in, std::size_t out, Activation act, RngStream& rng) {
  MlpLayer l;
  l.in = in;
  l.out = out;
  l.activation = act;
  for (std::size_t i = 0; i < in * out; ++i) l.weights.push_back(rng.uniform(-0.5, 0.5));
  for (std::size_t i = 0; i < out; ++i) l.bias.push_back(rng.uniform(-0.1, 0.1));
  return l;
}

TEST(Mlp, ZeroWeightsGiveZero) {
  MlpLayer l;
  l.in = 4;
  l.out = 1;
  l.weights.assign(4, 0.0);
  l.bias.assign(1, 0.0);
  Mlp net({l});
  const double x[4] = {1, -2, 3, 4};
  EXPECT_EQ(net.forward_scalar(x), 0.0);
}

TEST(Mlp, MatchesMatrixOracle) {
  RngStream rng(5, fnv1a64("mlp"), 0);
  std::vector<MlpLayer> layers = {make_layer(6, 8, Activation::kElu, rng),
                                  make_layer(8, 5, Activation::kTanh, rng),
                                  make_layer(5, 4, Activation::kSoftsign, rng),
                                  make_layer(4, 3, Activation::kRelu, rng),
                                  make_layer(3, 1, Activation::kIdentity, rng)};
  Mlp net(layers);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(6);
    for (double& v : x) v = rng.uniform(-2, 2);
    // Oracle: nested-vector matrices and element-wise activations.
    std::vector<double> a = x;
    for (const MlpLayer& l : layers) {
      std::vector<std::vector<double>> w(l.out, std::vector<double>(l.in));
      for (std::size_t o = 0; o < l.out; ++o)
        for (std::size_t i = 0; i < l.in; ++i) w[o][i] = l.weights[o * l.in + i];
      std::vector<double> z(l.out);
      for (std::size_t o = 0; o < l.out; ++o) {
        z[o] = std::inner_product(w[o].begin(), w[o].end(), a.begin(), l.bias[o]);
        switch (l.activation) {
          case Activation::kRelu: z[o] = std::max(0.0, z[o]); break;
          case Activation::kTanh: z[o] = std::tanh(z[o]); break;
          case Activation::kElu: z[o] = z[o] > 0 ? z[o] : std::exp(z[o]) - 1.0; break;
          case Activation::kSoftsign: z[o] = z[o] / (1.0 + std::fabs(z[o])); break;
          case Activation::kIdentity: break;
        }
      }
      a = z;
    }
    EXPECT_NEAR(net.forward_scalar(x), a[0], 1e-12);
  }
}

TEST(Mlp, FileRoundTripAndErrors) {
  RngStream rng(6, fnv1a64("mlpio"), 0);
  Mlp net({make_layer(3, 4, Activation::kTanh, rng), make_layer(4, 1, Activation::kIdentity, rng)});
  const std::string path = temp_path("net.bin");
  save_mlp(path, net);
  Mlp back = load_mlp(path);
  ASSERT_EQ(back.layers().size(), 2u);
  EXPECT_EQ(back.layers()[0].weights, net.layers()[0].weights);
  EXPECT_EQ(back.layers()[1].bias, net.layers()[1].bias);
  EXPECT_EQ(back.layers()[0].activation, Activation::kTanh);

  EXPECT_THROW(load_mlp(temp_path("does_not_exist.bin")), MlpError);

  // Break the chain: second layer claims 5 inputs.
  MlpLayer l0 = net.layers()[0];
  MlpLayer l1 = make_layer(5, 1, Activation::kIdentity, rng);
  try {
    Mlp bad({l0, l1});
    FAIL();
  } catch (const MlpError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos);
  }

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const std::uint32_t v = 99;
    f.write(reinterpret_cast<const char*>(&v), 4);
  }
  EXPECT_THROW(load_mlp(path), MlpError);
  std::filesystem::remove(path);
}

// Reference ring: a deque holding the full history, read n entries back.
std::vector<double> oracle_delay(const std::vector<double>& in, std::size_t n, double fill) {
  std::deque<double> hist(n, fill);
  std::vector<double> out;
  for (double x : in) {
    hist.push_back(x);
    out.push_back(hist[hist.size() - 1 - n]);
  }
  return out;
}

std::vector<double> run_buffer(DelayBuffer& b, const std::vector<double>& in) {
  std::vector<double> out;
  for (double x : in) {
    b.push(0, std::span<const double>(&x, 1));
    b.advance();
    out.push_back(b.delayed(0)[0]);
  }
  return out;
}

TEST(DelayBuffer, MatchesRingOracle) {
  RngStream rng(7, fnv1a64("ring"), 0);
  std::vector<double> signal(40);
  for (double& v : signal) v = rng.uniform(-1, 1);
  for (std::size_t n : {0u, 1u, 2u, 5u}) {
    DelayBuffer b(1, 1, 6);
    b.set_delay(0, n);
    const double fill = 0.25;
    b.fill(0, std::span<const double>(&fill, 1));
    EXPECT_EQ(run_buffer(b, signal), oracle_delay(signal, n, fill)) << "n=" << n;
  }
}

TEST(DelayBuffer, RampExample) {
  DelayBuffer b(1, 1, 3);
  b.set_delay(0, 2);
  const double zero = 0.0;
  b.fill(0, std::span<const double>(&zero, 1));
  EXPECT_EQ(run_buffer(b, {0, 1, 2, 3, 4, 5}), (std::vector<double>{0, 0, 0, 1, 2, 3}));
}

TEST(DelayBuffer, CompositionAddsDelays) {
  RngStream rng(8, fnv1a64("compose"), 0);
  std::vector<double> signal(30);
  for (double& v : signal) v = rng.uniform(-1, 1);
  const double fill = 0.0;
  for (auto [n1, n2] : {std::pair<std::size_t, std::size_t>{1, 2}, {3, 0}, {2, 2}}) {
    DelayBuffer a(1, 1, 8), b(1, 1, 8), ab(1, 1, 8);
    a.set_delay(0, n1);
    b.set_delay(0, n2);
    ab.set_delay(0, n1 + n2);
    for (DelayBuffer* d : {&a, &b, &ab}) d->fill(0, std::span<const double>(&fill, 1));
    EXPECT_EQ(run_buffer(a, run_buffer(b, signal)), run_buffer(ab, signal));
  }
}

TEST(DelayBuffer, CapacityAndQuantization) {
  EXPECT_EQ(DelayBuffer::capacity_for(0.02, 0.005), 5u);
  EXPECT_EQ(DelayBuffer::capacity_for(0.021, 0.005), 6u);
  EXPECT_EQ(DelayBuffer::capacity_for(0.0, 0.005), 1u);
  EXPECT_EQ(delay_steps(0.0124, 0.005), 2u);
  EXPECT_EQ(delay_steps(0.0126, 0.005), 3u);
  DelayBuffer b(1, 1, 3);
  EXPECT_THROW(b.set_delay(0, 3), std::out_of_range);
}

sim::ModelSpec three_joints() {
  sim::ModelSpec s = testing::two_joint_spec();
  sim::JointSpec r;
  r.name = "r_hip";
  s.joints.push_back(r);
  return s;
}

TEST(ActuatorSet, RegistersGainFieldsAndRejectsOverlap) {
  const sim::ModelSpec spec = three_joints();
  sim::Model m = sim::Model::compile(spec, 2);
  entity::Entity e = entity::Entity::articulated(spec, {});
  ActuatorSet set({ideal_pd({".*_hip"}, 30, 0.5, 20), ideal_pd({"l_knee"}, 25, 0.4, 15)}, e, m, 0);
  EXPECT_EQ(m.field(kKpField).base(0), 30.0);
  EXPECT_EQ(m.field(kKpField).base(1), 25.0);
  EXPECT_EQ(m.field(kKdField).base(2), 0.5);
  EXPECT_EQ(set.effort_limit(1), 15.0);

  sim::Model m2 = sim::Model::compile(spec, 2);
  EXPECT_THROW(ActuatorSet({ideal_pd({".*"}, 1, 0, 1), ideal_pd({"r_hip"}, 1, 0, 1)}, e, m2, 0),
               ConfigError);
}

TEST(ActuatorSet, AppliesPdWithPerWorldGains) {
  const sim::ModelSpec spec = three_joints();
  sim::Model m = sim::Model::compile(spec, 2);
  entity::Entity e = entity::Entity::articulated(spec, {});
  ActuatorSet set({ideal_pd({".*"}, 10, 1, 100)}, e, m, 0);
  m.expand_field(kKpField);
  m.set_field_value(kKpField, 1, 0, 20.0);
  sim::BatchState s = sim::make_state(m);
  WorldArray<double> targets(2, 3);
  targets.fill(0.5);
  const std::size_t all[] = {0, 1};
  set.reset(all, targets, s);
  s.qd(0, 3) = 1.0;
  set.apply(targets, s, m);
  EXPECT_DOUBLE_EQ(s.ctrl(0, 0), 10 * 0.5 - 1.0);
  EXPECT_DOUBLE_EQ(s.ctrl(1, 0), 20 * 0.5);
  EXPECT_DOUBLE_EQ(s.ctrl(1, 1), 10 * 0.5);
}

TEST(ActuatorSet, DelayedTargetsAndResample) {
  const sim::ModelSpec spec = testing::one_leg_spec();
  constexpr std::size_t kN = 64;
  sim::Model m = sim::Model::compile(spec, kN);
  entity::Entity e = entity::Entity::articulated(spec, {});
  const double dt = m.physics_dt();
  ActuatorSet set({delayed(ideal_pd({"leg"}, 10, 0, 100), 0.0, 4 * dt)}, e, m, 42);
  sim::BatchState s = sim::make_state(m);
  WorldArray<double> targets(kN, 1);
  std::vector<std::size_t> all(kN);
  std::iota(all.begin(), all.end(), 0);
  set.reset(all, targets, s);
  std::set<std::size_t> seen;
  for (std::size_t w = 0; w < kN; ++w) {
    const std::size_t n = set.groups()[0].delays[0].buffer.delay(w);
    EXPECT_LE(n, 4u);
    seen.insert(n);
  }
  EXPECT_EQ(seen.size(), 5u);

  // Step target 0 -> 1: each world sees it after exactly its own delay.
  targets.fill(1.0);
  for (std::size_t step = 0; step < 6; ++step) {
    set.apply(targets, s, m);
    for (std::size_t w = 0; w < kN; ++w) {
      const std::size_t n = set.groups()[0].delays[0].buffer.delay(w);
      EXPECT_EQ(s.ctrl(w, 0), step >= n ? 10.0 : 0.0) << "w=" << w << " step=" << step;
    }
  }
  // Same seed, same draws; a fresh set reproduces world delays exactly.
  sim::Model m2 = sim::Model::compile(spec, kN);
  ActuatorSet again({delayed(ideal_pd({"leg"}, 10, 0, 100), 0.0, 4 * dt)}, e, m2, 42);
  again.reset(all, targets, s);
  for (std::size_t w = 0; w < kN; ++w) {
    EXPECT_EQ(again.groups()[0].delays[0].buffer.delay(w),
              set.groups()[0].delays[0].buffer.delay(w));
  }
}

TEST(ActuatorSet, MlpActuatorUsesHistoryLayout) {
  // Network: tau = 2 * err_t + 0 * err_{t-1} - 0.5 * vel_t.
  MlpLayer l;
  l.in = 3;
  l.out = 1;
  l.weights = {2.0, 0.0, -0.5};
  l.bias = {0.0};
  const std::string path = temp_path("act.bin");
  save_mlp(path, Mlp({l}));
  const sim::ModelSpec spec = testing::one_leg_spec();
  sim::Model m = sim::Model::compile(spec, 1);
  entity::Entity e = entity::Entity::articulated(spec, {});
  ActuatorSet set({ActuatorCfg{{"leg"}, {MlpCfg{path, 2, 1, 3.0}}}}, e, m, 0);
  sim::BatchState s = sim::make_state(m);
  WorldArray<double> targets(1, 1);
  const std::size_t all[] = {0};
  set.reset(all, targets, s);
  targets(0, 0) = 0.5;
  s.qd(0, 3) = 0.4;
  set.apply(targets, s, m);
  EXPECT_DOUBLE_EQ(s.ctrl(0, 0), 2 * 0.5 - 0.5 * 0.4);
  targets(0, 0) = 5.0;
  set.apply(targets, s, m);
  EXPECT_EQ(s.ctrl(0, 0), 3.0);

  sim::Model m2 = sim::Model::compile(spec, 1);
  EXPECT_THROW(ActuatorSet({ActuatorCfg{{"leg"}, {MlpCfg{path, 3, 1, 3.0}}}}, e, m2, 0), ConfigError);
  std::filesystem::remove(path);
}

TEST(ActuatorCfgJson, RoundTrip) {
  const ActuatorCfg c = delayed(ActuatorCfg{{".*"}, {DcMotorCfg{20, 0.5, 30, 12, 20}}}, 0.0, 0.01);
  const Json j = to_json_value(c);
  const ActuatorCfg back = actuator_cfg_from_json(j, "a");
  EXPECT_EQ(to_json_value(back), j);
  Json bad = j;
  bad["inner"]["kpp"] = 1;
  EXPECT_THROW(actuator_cfg_from_json(bad, "a"), ConfigError);
  bad = j;
  bad["type"] = "hydraulic";
  EXPECT_THROW(actuator_cfg_from_json(bad, "a"), ConfigError);
}

}  // namespace
}  // namespace lockstep::actuation
