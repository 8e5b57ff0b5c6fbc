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

#ifndef LOCKSTEP_MANAGERS_TERM_CFG_HPP_
#define LOCKSTEP_MANAGERS_TERM_CFG_HPP_

// Plain config records for manager terms and their JSON forms. Every term
// names a registered function ("func") and carries a free-form parameter
// object that the function's factory validates.

#include <array>
#include <cstddef>
#include <optional>
#include <string>

#include "lockstep/config/json_util.hpp"
#include "lockstep/core/ordered_map.hpp"

namespace lockstep::managers {

inline constexpr std::size_t kMaxObsDelay = 64;
inline constexpr std::size_t kMaxObsHistory = 64;

struct NoiseCfg {
  enum class Kind { kNone, kUniform, kGaussian };
  Kind kind = Kind::kNone;
  double magnitude = 0.0;  // half-width for uniform, sigma for gaussian
};

struct ObsTermCfg {
  std::string func;
  Json params = Json::object();
  std::optional<std::array<double, 2>> clip;
  double scale = 1.0;
  NoiseCfg noise;
  std::size_t delay = 0;    // control steps
  std::size_t history = 1;
};

struct ObsGroupCfg {
  OrderedMap<ObsTermCfg> terms;
  bool enable_noise = true;
};

struct ActionTermCfg {
  std::string func = "joint_position";
  Json params = Json::object();
  std::optional<double> clip;
};

struct RewardTermCfg {
  std::string func;
  double weight = 1.0;
  Json params = Json::object();
};

struct TerminationTermCfg {
  std::string func;
  bool time_out = false;
  Json params = Json::object();
};

enum class EventMode { kStartup, kReset, kInterval };

struct EventTermCfg {
  std::string func;
  EventMode mode = EventMode::kReset;
  std::array<double, 2> interval{0.0, 0.0};  // s, interval mode only
  Json params = Json::object();
};

struct ChannelRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct CommandCfg {
  OrderedMap<ChannelRange> ranges;
  double resample_period = 10.0;  // s
};

struct CurriculumTermCfg {
  std::string func;
  Json params = Json::object();
};

// JSON conversion ----------------------------------------------------------

inline const char* noise_kind_name(NoiseCfg::Kind k) {
  switch (k) {
    case NoiseCfg::Kind::kUniform: return "uniform";
    case NoiseCfg::Kind::kGaussian: return "gaussian";
    case NoiseCfg::Kind::kNone: break;
  }
  return "none";
}

inline const char* event_mode_name(EventMode m) {
  switch (m) {
    case EventMode::kStartup: return "startup";
    case EventMode::kInterval: return "interval";
    case EventMode::kReset: break;
  }
  return "reset";
}

inline Json to_json_value(const ObsTermCfg& c) {
  Json j;
  j["func"] = c.func;
  j["params"] = c.params;
  j["clip"] = c.clip ? Json::array({(*c.clip)[0], (*c.clip)[1]}) : Json();
  j["scale"] = c.scale;
  j["noise"] = {{"type", noise_kind_name(c.noise.kind)}, {"magnitude", c.noise.magnitude}};
  j["delay"] = c.delay;
  j["history"] = c.history;
  return j;
}

inline Json to_json_value(const ObsGroupCfg& g) {
  Json terms = Json::object();
  for (const auto& [name, t] : g.terms) terms[name] = to_json_value(t);
  return {{"enable_noise", g.enable_noise}, {"terms", terms}};
}

inline Json to_json_value(const ActionTermCfg& c) {
  return {{"func", c.func}, {"params", c.params}, {"clip", c.clip ? Json(*c.clip) : Json()}};
}

inline Json to_json_value(const RewardTermCfg& c) {
  return {{"func", c.func}, {"weight", c.weight}, {"params", c.params}};
}

inline Json to_json_value(const TerminationTermCfg& c) {
  return {{"func", c.func}, {"time_out", c.time_out}, {"params", c.params}};
}

inline Json to_json_value(const EventTermCfg& c) {
  return {{"func", c.func},
          {"mode", event_mode_name(c.mode)},
          {"interval", Json::array({c.interval[0], c.interval[1]})},
          {"params", c.params}};
}

inline Json to_json_value(const CommandCfg& c) {
  Json ranges = Json::object();
  for (const auto& [name, r] : c.ranges) ranges[name] = Json::array({r.lo, r.hi});
  return {{"resample_period", c.resample_period}, {"ranges", ranges}};
}

inline Json to_json_value(const CurriculumTermCfg& c) {
  return {{"func", c.func}, {"params", c.params}};
}

namespace detail {
inline Json read_params(ObjectReader& r) {
  Json p = Json::object();
  r.get("params", p);
  if (!p.is_object()) throw ConfigError(r.path("params") + ": expected an object");
  return p;
}
}  // namespace detail

inline ObsTermCfg obs_term_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  ObsTermCfg c;
  r.require("func", c.func);
  c.params = detail::read_params(r);
  std::array<double, 2> clip{};
  if (r.get("clip", clip)) c.clip = clip;
  r.get("scale", c.scale);
  if (const Json* n = r.child("noise")) {
    ObjectReader nr(*n, r.path("noise"));
    std::string type = "none";
    nr.get("type", type);
    nr.get("magnitude", c.noise.magnitude);
    nr.finish();
    if (type == "none") {
      c.noise.kind = NoiseCfg::Kind::kNone;
    } else if (type == "uniform") {
      c.noise.kind = NoiseCfg::Kind::kUniform;
    } else if (type == "gaussian") {
      c.noise.kind = NoiseCfg::Kind::kGaussian;
    } else {
      throw ConfigError(r.path("noise") + ".type: expected none, uniform or gaussian");
    }
  }
  r.get("delay", c.delay);
  r.get("history", c.history);
  r.finish();
  return c;
}

inline ObsGroupCfg obs_group_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  ObsGroupCfg g;
  r.get("enable_noise", g.enable_noise);
  if (const Json* terms = r.child("terms")) {
    if (!terms->is_object()) throw ConfigError(r.path("terms") + ": expected an object");
    for (auto it = terms->begin(); it != terms->end(); ++it) {
      g.terms.insert(it.key(), obs_term_from_json(it.value(), r.path("terms") + "." + it.key()));
    }
  }
  r.finish();
  return g;
}

inline ActionTermCfg action_term_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  ActionTermCfg c;
  r.get("func", c.func);
  c.params = detail::read_params(r);
  double clip = 0.0;
  if (r.get("clip", clip)) c.clip = clip;
  r.finish();
  return c;
}

inline RewardTermCfg reward_term_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  RewardTermCfg c;
  r.require("func", c.func);
  r.get("weight", c.weight);
  c.params = detail::read_params(r);
  r.finish();
  return c;
}

inline TerminationTermCfg termination_term_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  TerminationTermCfg c;
  r.require("func", c.func);
  r.get("time_out", c.time_out);
  c.params = detail::read_params(r);
  r.finish();
  return c;
}

inline EventTermCfg event_term_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  EventTermCfg c;
  r.require("func", c.func);
  std::string mode;
  r.require("mode", mode);
  if (mode == "startup") {
    c.mode = EventMode::kStartup;
  } else if (mode == "reset") {
    c.mode = EventMode::kReset;
  } else if (mode == "interval") {
    c.mode = EventMode::kInterval;
  } else {
    throw ConfigError(r.path("mode") + ": expected startup, reset or interval");
  }
  r.get("interval", c.interval);
  c.params = detail::read_params(r);
  r.finish();
  return c;
}

inline CommandCfg command_cfg_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  CommandCfg c;
  r.get("resample_period", c.resample_period);
  if (const Json* ranges = r.child("ranges")) {
    if (!ranges->is_object()) throw ConfigError(r.path("ranges") + ": expected an object");
    for (auto it = ranges->begin(); it != ranges->end(); ++it) {
      std::array<double, 2> v{};
      try {
        v = it.value().get<std::array<double, 2>>();
      } catch (const nlohmann::json::exception&) {
        throw ConfigError(r.path("ranges") + "." + it.key() + ": expected [lo, hi]");
      }
      c.ranges.insert(it.key(), {v[0], v[1]});
    }
  }
  r.finish();
  return c;
}

inline CurriculumTermCfg curriculum_term_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  CurriculumTermCfg c;
  r.require("func", c.func);
  c.params = detail::read_params(r);
  r.finish();
  return c;
}

}  // namespace lockstep::managers

#endif  // LOCKSTEP_MANAGERS_TERM_CFG_HPP_
