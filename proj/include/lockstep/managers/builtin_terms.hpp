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

#ifndef LOCKSTEP_MANAGERS_BUILTIN_TERMS_HPP_
#define LOCKSTEP_MANAGERS_BUILTIN_TERMS_HPP_

// Term functions shipped with the library. Each factory validates its
// parameters once and returns a callable that only reads the environment.
// Included by env.hpp after ManagerBasedRlEnv is complete.

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include "lockstep/env/env.hpp"
#include "lockstep/managers/event_manager.hpp"
#include "lockstep/managers/registry.hpp"

namespace lockstep::managers {

namespace builtin {

using Range2 = std::array<double, 2>;

inline void check_range(const Range2& r, const std::string& where) {
  if (!(r[0] <= r[1])) throw ConfigError(where + ": lo must be <= hi");
}

inline double height_above_ground(const Env& env, std::size_t w) {
  const auto& d = env.data();
  return d.root_pos(w, 1) - env.terrain().height_at(d.root_pos(w, 0));
}

// Observations ------------------------------------------------------------

// Copies `cols` columns of a per-world array starting at `first`.
inline ObsTerm copy_columns(std::size_t cols,
                            std::function<const WorldArray<double>&(const Env&)> src,
                            std::size_t first = 0) {
  return {cols, [src, first, cols](const Env& env, WorldArray<double>& out) {
            const WorldArray<double>& a = src(env);
            for (std::size_t w = 0; w < out.worlds(); ++w) {
              for (std::size_t i = 0; i < cols; ++i) out(w, i) = a(w, first + i);
            }
          }};
}

inline void register_observations() {
  auto& r = observation_terms();
  r.add("base_lin_vel", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return copy_columns(2, [](const Env& e) -> const WorldArray<double>& {
      return e.data().root_lin_vel_b;
    });
  });
  r.add("base_lin_acc", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return copy_columns(2, [](const Env& e) -> const WorldArray<double>& {
      return e.data().root_lin_acc_b;
    });
  });
  r.add("projected_gravity", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return copy_columns(2, [](const Env& e) -> const WorldArray<double>& {
      return e.data().projected_gravity;
    });
  });
  r.add("base_ang_vel", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return ObsTerm{1, [](const Env& env, WorldArray<double>& out) {
                     for (std::size_t w = 0; w < out.worlds(); ++w) {
                       out(w, 0) = env.data().root_ang_vel[w];
                     }
                   }};
  });
  // Planar IMU: gyro (pitch rate), then base-frame acceleration (x, z).
  r.add("imu", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return ObsTerm{3, [](const Env& env, WorldArray<double>& out) {
                     const auto& d = env.data();
                     for (std::size_t w = 0; w < out.worlds(); ++w) {
                       out(w, 0) = d.root_ang_vel[w];
                       out(w, 1) = d.root_lin_acc_b(w, 0);
                       out(w, 2) = d.root_lin_acc_b(w, 1);
                     }
                   }};
  });
  r.add("base_height", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return ObsTerm{1, [](const Env& env, WorldArray<double>& out) {
                     for (std::size_t w = 0; w < out.worlds(); ++w) {
                       out(w, 0) = height_above_ground(env, w);
                     }
                   }};
  });
  r.add("joint_pos_rel", [](const Env& env, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return ObsTerm{env.model().nu(), [](const Env& e, WorldArray<double>& out) {
                     const auto& def = e.robot().default_state().joint_pos;
                     for (std::size_t w = 0; w < out.worlds(); ++w) {
                       for (std::size_t j = 0; j < out.cols(); ++j) {
                         out(w, j) = e.data().joint_pos(w, j) - def[j];
                       }
                     }
                   }};
  });
  r.add("joint_vel_rel", [](const Env& env, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return ObsTerm{env.model().nu(), [](const Env& e, WorldArray<double>& out) {
                     const auto& def = e.robot().default_state().joint_vel;
                     for (std::size_t w = 0; w < out.worlds(); ++w) {
                       for (std::size_t j = 0; j < out.cols(); ++j) {
                         out(w, j) = e.data().joint_vel(w, j) - def[j];
                       }
                     }
                   }};
  });
  r.add("last_action", [](const Env& env, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return copy_columns(env.actions().dim(), [](const Env& e) -> const WorldArray<double>& {
      return e.actions().action();
    });
  });
  r.add("velocity_command", [](const Env& env, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return copy_columns(env.commands().num_channels(),
                        [](const Env& e) -> const WorldArray<double>& {
                          return e.commands().values();
                        });
  });
  r.add("foot_contact_forces", [](const Env& env, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return copy_columns(env.model().n_feet(), [](const Env& e) -> const WorldArray<double>& {
      return e.read_sensor(env::kContactSensor);
    });
  });
  r.add("height_scan", [](const Env& env, const Json& p, const std::string& where) {
    Params(p, where).finish();
    if (!env.has_sensor(env::kHeightScanner)) {
      throw ConfigError(where + ": height_scan needs scene.height_scan probe offsets");
    }
    return copy_columns(env.sensor(env::kHeightScanner).dim(),
                        [](const Env& e) -> const WorldArray<double>& {
                          return e.read_sensor(env::kHeightScanner);
                        });
  });
}

// Actions -----------------------------------------------------------------

inline void register_actions() {
  // target_j = default_j + scale * a (or scale * a without the offset).
  action_terms().add("joint_position", [](const Env& env, const Json& p,
                                          const std::string& where) {
    Params ps(p, where);
    const auto patterns = ps.get<std::vector<std::string>>("joints", {".*"});
    const double scale = ps.get("scale", 0.25);
    const bool offset = ps.get("use_default_offset", true);
    ps.finish();
    std::vector<std::size_t> joints;
    try {
      joints = env.robot().find_joints(patterns);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ".joints: " + e.what());
    }
    std::vector<double> base(joints.size(), 0.0);
    if (offset) {
      for (std::size_t i = 0; i < joints.size(); ++i) {
        base[i] = env.robot().default_state().joint_pos[joints[i]];
      }
    }
    return ActionTerm{joints.size(), [joints, base, scale](const Env&, const WorldArray<double>& a,
                                                           std::size_t off,
                                                           WorldArray<double>& targets) {
                        for (std::size_t w = 0; w < a.worlds(); ++w) {
                          for (std::size_t i = 0; i < joints.size(); ++i) {
                            targets(w, joints[i]) = base[i] + scale * a(w, off + i);
                          }
                        }
                      }};
  });
}

// Rewards -----------------------------------------------------------------

inline void register_rewards() {
  auto& r = reward_terms();
  r.add("constant", [](const Env&, const Json& p, const std::string& where) {
    Params ps(p, where);
    const double v = ps.get("value", 1.0);
    ps.finish();
    return RewardTerm([v](const Env&, std::span<double> out) {
      std::fill(out.begin(), out.end(), v);
    });
  });
  // exp(-(vx_cmd - vx)^2 / std^2), vx in the base frame.
  r.add("track_lin_vel_x_exp", [](const Env& env, const Json& p, const std::string& where) {
    Params ps(p, where);
    const double sd = ps.get("std", 0.25);
    const auto channel = ps.get<std::string>("channel", "lin_vel_x");
    ps.finish();
    if (!(sd > 0.0)) throw ConfigError(ps.path("std") + ": must be > 0");
    std::size_t c = 0;
    try {
      c = env.commands().channel(channel);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ps.path("channel") + ": " + e.what());
    }
    const double inv = 1.0 / (sd * sd);
    return RewardTerm([c, inv](const Env& e, std::span<double> out) {
      for (std::size_t w = 0; w < out.size(); ++w) {
        const double err = e.commands().value(w, c) - e.data().root_lin_vel_b(w, 0);
        out[w] = std::exp(-err * err * inv);
      }
    });
  });
  r.add("pitch_rate_l2", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return RewardTerm([](const Env& e, std::span<double> out) {
      for (std::size_t w = 0; w < out.size(); ++w) {
        const double wy = e.data().root_ang_vel[w];
        out[w] = wy * wy;
      }
    });
  });
  // Planar surrogate: (I_b * pitch_rate)^2 with the per-world base inertia.
  r.add("angular_momentum_l2", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return RewardTerm([](const Env& e, std::span<double> out) {
      const sim::Field& inertia = e.model().field(sim::fields::kBaseInertia);
      for (std::size_t w = 0; w < out.size(); ++w) {
        const double l = inertia.value(w) * e.data().root_ang_vel[w];
        out[w] = l * l;
      }
    });
  });
  r.add("action_rate_l2", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return RewardTerm([](const Env& e, std::span<double> out) {
      const auto& a = e.actions().action();
      const auto& b = e.actions().prev_action();
      for (std::size_t w = 0; w < out.size(); ++w) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.cols(); ++i) {
          const double d = a(w, i) - b(w, i);
          s += d * d;
        }
        out[w] = s;
      }
    });
  });
  // Sum over joints of how far q leaves the soft band around the range middle.
  r.add("joint_limit", [](const Env& env, const Json& p, const std::string& where) {
    Params(p, where).finish();
    std::vector<double> mid, half;
    for (const auto& j : env.model().spec().joints) {
      mid.push_back(0.5 * (j.pos_lo + j.pos_hi));
      half.push_back(0.5 * j.soft_limit_fraction * (j.pos_hi - j.pos_lo));
    }
    return RewardTerm([mid, half](const Env& e, std::span<double> out) {
      for (std::size_t w = 0; w < out.size(); ++w) {
        double s = 0.0;
        for (std::size_t j = 0; j < mid.size(); ++j) {
          s += std::max(0.0, std::abs(e.data().joint_pos(w, j) - mid[j]) - half[j]);
        }
        out[w] = s;
      }
    });
  });
  r.add("foot_slip", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return RewardTerm([](const Env& e, std::span<double> out) {
      const auto& cs = e.contact_sensor();
      for (std::size_t w = 0; w < out.size(); ++w) {
        double s = 0.0;
        for (std::size_t f = 0; f < cs.n_feet(); ++f) {
          if (cs.in_contact(w, f)) s += std::abs(e.data().foot_vel(w, f).x);
        }
        out[w] = s;
      }
    });
  });
  // Pays (air time - target) once per touchdown.
  r.add("feet_air_time", [](const Env&, const Json& p, const std::string& where) {
    Params ps(p, where);
    const double target = ps.get("target", 0.3);
    ps.finish();
    return RewardTerm([target](const Env& e, std::span<double> out) {
      const auto& cs = e.contact_sensor();
      for (std::size_t w = 0; w < out.size(); ++w) {
        double s = 0.0;
        for (std::size_t f = 0; f < cs.n_feet(); ++f) {
          if (cs.touchdown(w, f)) s += cs.last_air_time(w, f) - target;
        }
        out[w] = s;
      }
    });
  });
}

// Terminations ------------------------------------------------------------

inline void register_terminations() {
  auto& r = termination_terms();
  r.add("time_out", [](const Env&, const Json& p, const std::string& where) {
    Params(p, where).finish();
    return TerminationTerm([](const Env& e, std::span<std::uint8_t> out) {
      for (std::size_t w = 0; w < out.size(); ++w) {
        out[w] = e.episode_length(w) >= e.max_episode_steps();
      }
    });
  });
  // Height is measured above the terrain directly under the base.
  r.add("base_height_below", [](const Env&, const Json& p, const std::string& where) {
    Params ps(p, where);
    const double h = ps.get("min_height", 0.12);
    ps.finish();
    return TerminationTerm([h](const Env& e, std::span<std::uint8_t> out) {
      for (std::size_t w = 0; w < out.size(); ++w) out[w] = height_above_ground(e, w) < h;
    });
  });
  r.add("pitch_beyond", [](const Env&, const Json& p, const std::string& where) {
    Params ps(p, where);
    const double limit = ps.get("limit", 1.0);
    ps.finish();
    return TerminationTerm([limit](const Env& e, std::span<std::uint8_t> out) {
      for (std::size_t w = 0; w < out.size(); ++w) {
        out[w] = std::abs(e.data().root_pitch[w]) > limit;
      }
    });
  });
}

// Events ------------------------------------------------------------------

inline void register_events() {
  auto& r = event_terms();
  r.add("randomize_field", [](Env& env, const Json& p, const std::string& where) {
    Params ps(p, where);
    const auto field = ps.require<std::string>("field");
    const auto dist = parse_distribution(ps.get<std::string>("distribution", "uniform"),
                                         ps.path("distribution"));
    const auto range = ps.require<Range2>("range");
    const auto op = parse_field_op(ps.get<std::string>("operation", "scale"),
                                   ps.path("operation"));
    const int index = ps.get("index", -1);
    ps.finish();
    if (!env.model().has_field(field)) {
      throw ConfigError(ps.path("field") + ": unknown model field '" + field + "' (available: " +
                        join(env.model().fields().keys()) + ")");
    }
    if (dist == Distribution::kUniform) check_range(range, ps.path("range"));
    return EventTerm([=](Env& e, std::span<const std::size_t> worlds, WorldStreams& rng) {
      randomize_field(e.model_mut(), field, dist, range[0], range[1], op, worlds, rng, index);
    });
  });
  // Adds U[lo, hi] to each default joint angle, clamped to the joint limits.
  r.add("reset_joints_offset", [](Env& env, const Json& p, const std::string& where) {
    Params ps(p, where);
    const auto range = ps.get<Range2>("range", {-0.1, 0.1});
    ps.finish();
    check_range(range, ps.path("range"));
    std::vector<std::pair<double, double>> lim;
    for (const auto& j : env.model().spec().joints) lim.emplace_back(j.pos_lo, j.pos_hi);
    return EventTerm([range, lim](Env& e, std::span<const std::size_t> worlds,
                                  WorldStreams& rng) {
      auto& s = e.state_mut();
      for (std::size_t w : worlds) {
        for (std::size_t j = 0; j < lim.size(); ++j) {
          double& q = s.q(w, sim::kBaseDofs + j);
          q = std::clamp(q + rng[w].uniform(range[0], range[1]), lim[j].first, lim[j].second);
        }
      }
    });
  });
  // External force on the base for the next physics substep.
  r.add("push_base", [](Env&, const Json& p, const std::string& where) {
    Params ps(p, where);
    const auto fx = ps.get<Range2>("force_x", {-50.0, 50.0});
    const auto fz = ps.get<Range2>("force_z", {0.0, 0.0});
    ps.finish();
    check_range(fx, ps.path("force_x"));
    check_range(fz, ps.path("force_z"));
    return EventTerm([fx, fz](Env& e, std::span<const std::size_t> worlds, WorldStreams& rng) {
      for (std::size_t w : worlds) {
        const double x = rng[w].uniform(fx[0], fx[1]);
        const double z = rng[w].uniform(fz[0], fz[1]);
        e.push(w, x, z);
      }
    });
  });
}

// Curricula ---------------------------------------------------------------

inline void register_curricula() {
  auto& r = curriculum_terms();
  // Moves a resetting world one terrain row up if it covered at least
  // `promote` of the commanded distance, down if at most `demote`.
  r.add("terrain_levels", [](Env& env, const Json& p, const std::string& where) {
    Params ps(p, where);
    const double promote = ps.get("promote", 0.8);
    const double demote = ps.get("demote", 0.4);
    const auto channel = ps.get<std::string>("channel", "lin_vel_x");
    ps.finish();
    if (!(demote < promote)) throw ConfigError(where + ": demote must be < promote");
    std::size_t c = 0;
    try {
      c = env.commands().channel(channel);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ps.path("channel") + ": " + e.what());
    }
    CurriculumTerm t;
    t.update = [=](Env& e, std::span<const std::size_t> worlds) {
      for (std::size_t w : worlds) {
        const double elapsed = static_cast<double>(e.episode_length(w)) * e.step_dt();
        const double required = std::abs(e.commands().value(w, c)) * elapsed;
        if (required < 1e-9) continue;
        const double travelled = std::abs(e.data().root_pos(w, 0) - e.spawn_x(w));
        const std::size_t level = e.terrain_level(w);
        if (travelled >= promote * required) {
          e.set_terrain_level(w, level + 1);
        } else if (travelled <= demote * required && level > 0) {
          e.set_terrain_level(w, level - 1);
        }
      }
    };
    t.report = [](const Env& e) {
      double s = 0.0;
      for (std::size_t w = 0; w < e.num_envs(); ++w) s += static_cast<double>(e.terrain_level(w));
      return s / static_cast<double>(e.num_envs());
    };
    return t;
  });
  // Scales a command range by `factor` (capped at +-limit) when the mean
  // per-second tracking reward over the episodes ending this step, divided
  // by the term weight, exceeds `threshold`.
  r.add("command_widen", [](Env& env, const Json& p, const std::string& where) {
    Params ps(p, where);
    const auto channel = ps.get<std::string>("channel", "lin_vel_x");
    const auto term = ps.get<std::string>("reward_term", "track_lin_vel_x");
    const double threshold = ps.get("threshold", 0.8);
    const double factor = ps.get("factor", 1.2);
    const double limit = ps.get("limit", 2.0);
    ps.finish();
    if (!(factor >= 1.0)) throw ConfigError(ps.path("factor") + ": must be >= 1");
    if (!env.rewards().terms().contains(term)) {
      throw ConfigError(ps.path("reward_term") + ": no reward term named '" + term + "'");
    }
    try {
      env.commands().channel(channel);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ps.path("channel") + ": " + e.what());
    }
    CurriculumTerm t;
    t.update = [=](Env& e, std::span<const std::size_t> worlds) {
      const auto& rt = e.rewards().term(term);
      if (worlds.empty() || rt.weight == 0.0) return;
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t w : worlds) {
        const double elapsed = static_cast<double>(e.episode_length(w)) * e.step_dt();
        if (elapsed <= 0.0) continue;
        sum += rt.episodic[w] / (rt.weight * elapsed);
        ++n;
      }
      if (n == 0 || sum / static_cast<double>(n) <= threshold) return;
      ChannelRange range = e.commands().ranges().at(channel);
      range.lo = std::max(range.lo * factor, -limit);
      range.hi = std::min(range.hi * factor, limit);
      e.commands_mut().set_range(channel, range);
    };
    t.report = [channel](const Env& e) { return e.commands().ranges().at(channel).hi; };
    return t;
  });
  // Linear weight schedule over common steps [start_step, end_step].
  r.add("reward_weight_schedule", [](Env& env, const Json& p, const std::string& where) {
    Params ps(p, where);
    const auto term = ps.require<std::string>("term");
    const double from = ps.require<double>("from");
    const double to = ps.require<double>("to");
    const auto start = ps.get<std::int64_t>("start_step", 0);
    const auto end = ps.require<std::int64_t>("end_step");
    ps.finish();
    if (!(end > start)) throw ConfigError(ps.path("end_step") + ": must be > start_step");
    if (!env.rewards().terms().contains(term)) {
      throw ConfigError(ps.path("term") + ": no reward term named '" + term + "'");
    }
    CurriculumTerm t;
    t.update = [=](Env& e, std::span<const std::size_t>) {
      const double u = std::clamp(static_cast<double>(e.common_step() - start) /
                                      static_cast<double>(end - start),
                                  0.0, 1.0);
      e.rewards_mut().set_weight(term, from + u * (to - from));
    };
    t.report = [term](const Env& e) { return e.rewards().term(term).weight; };
    return t;
  });
}

}  // namespace builtin

inline void register_builtin_terms() {
  static std::once_flag once;
  std::call_once(once, [] {
    builtin::register_observations();
    builtin::register_actions();
    builtin::register_rewards();
    builtin::register_terminations();
    builtin::register_events();
    builtin::register_curricula();
  });
}

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_BUILTIN_TERMS_HPP_
