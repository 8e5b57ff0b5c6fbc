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

#ifndef LOCKSTEP_VIEWER_PROTOCOL_HPP_
#define LOCKSTEP_VIEWER_PROTOCOL_HPP_

// Wire format between the bridge and a browser client. Every message is a
// JSON text frame with a "type" field.
//
// Server to client:
//   {"type": "terrain", "protocol_version": 1, "id": "<hex>", "kind": "plane" | "heightfield",
//    "patch_length": L, "spacing": dx, "patches": [{"origin": x0, "heights": [...]}, ...]}
//       Sent once per connection, before the first frame.
//   {"type": "frame", "protocol_version": 1, "sim_step": s, "world": w,
//    "base": {"x": .., "z": .., "pitch": ..}, "joints": [...],
//    "tips": [[x, z], ...], "feet": [{"x": .., "z": .., "fx": .., "fz": .., "contact": bool}],
//    "command": {"<channel>": v}, "rewards": {"<term>": v}, "terrain_id": "<hex>",
//    "paused": bool, "mode": "live" | "replay", "frame_index": k, "frame_total": K}
//       In live mode frame_index is 0 and frame_total is 0.
//   {"type": "ack", "request": "<type>"}
//   {"type": "warning", "request": "<type>", "message": "..."}
//   {"type": "error", "message": "..."}
//
// Client to server:
//   {"type": "pause"} | {"type": "resume"} | {"type": "step_once"} | {"type": "reset"}
//   {"type": "select_world", "world": w}
//   {"type": "set_rate", "hz": f}                       frame broadcast rate
//   {"type": "push", "world": w, "fx": N, "fz": N}      live mode only
//   {"type": "scrub", "frame": k}                       replay mode only

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lockstep/config/json_util.hpp"
#include "lockstep/core/rng.hpp"
#include "lockstep/terrain/terrain.hpp"

namespace lockstep::viewer {

inline constexpr int kProtocolVersion = 1;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FootMsg {
  double x = 0.0, z = 0.0;
  double fx = 0.0, fz = 0.0;  // tangential (along x) and normal (along z) force, N
  bool contact = false;

  friend bool operator==(const FootMsg&, const FootMsg&) = default;
};

struct FrameMsg {
  std::int64_t sim_step = 0;
  std::size_t world = 0;
  double base_x = 0.0, base_z = 0.0, base_pitch = 0.0;
  std::vector<double> joints;
  std::vector<std::pair<double, double>> tips;
  std::vector<FootMsg> feet;
  std::vector<std::pair<std::string, double>> command;
  std::vector<std::pair<std::string, double>> rewards;
  std::string terrain_id;
  bool paused = false;
  std::string mode = "live";
  std::int64_t frame_index = 0;
  std::int64_t frame_total = 0;

  friend bool operator==(const FrameMsg&, const FrameMsg&) = default;
};

inline Json to_json_value(const FrameMsg& f) {
  Json j;
  j["type"] = "frame";
  j["protocol_version"] = kProtocolVersion;
  j["sim_step"] = f.sim_step;
  j["world"] = f.world;
  j["base"] = {{"x", f.base_x}, {"z", f.base_z}, {"pitch", f.base_pitch}};
  j["joints"] = f.joints;
  Json tips = Json::array();
  for (const auto& [x, z] : f.tips) tips.push_back({x, z});
  j["tips"] = tips;
  Json feet = Json::array();
  for (const auto& ft : f.feet) {
    feet.push_back({{"x", ft.x}, {"z", ft.z}, {"fx", ft.fx}, {"fz", ft.fz}, {"contact", ft.contact}});
  }
  j["feet"] = feet;
  Json cmd = Json::object();
  for (const auto& [k, v] : f.command) cmd[k] = v;
  j["command"] = cmd;
  Json rew = Json::object();
  for (const auto& [k, v] : f.rewards) rew[k] = v;
  j["rewards"] = rew;
  j["terrain_id"] = f.terrain_id;
  j["paused"] = f.paused;
  j["mode"] = f.mode;
  j["frame_index"] = f.frame_index;
  j["frame_total"] = f.frame_total;
  return j;
}

inline FrameMsg frame_from_json(const Json& j) {
  try {
    if (j.at("type") != "frame") throw ProtocolError("not a frame message");
    if (j.at("protocol_version") != kProtocolVersion) {
      throw ProtocolError("unsupported protocol_version " + j.at("protocol_version").dump());
    }
    FrameMsg f;
    f.sim_step = j.at("sim_step").get<std::int64_t>();
    f.world = j.at("world").get<std::size_t>();
    const Json& base = j.at("base");
    f.base_x = base.at("x").get<double>();
    f.base_z = base.at("z").get<double>();
    f.base_pitch = base.at("pitch").get<double>();
    f.joints = j.at("joints").get<std::vector<double>>();
    for (const auto& t : j.at("tips")) f.tips.emplace_back(t.at(0).get<double>(), t.at(1).get<double>());
    for (const auto& ft : j.at("feet")) {
      f.feet.push_back({ft.at("x").get<double>(), ft.at("z").get<double>(), ft.at("fx").get<double>(),
                        ft.at("fz").get<double>(), ft.at("contact").get<bool>()});
    }
    for (auto it = j.at("command").begin(); it != j.at("command").end(); ++it) {
      f.command.emplace_back(it.key(), it.value().get<double>());
    }
    for (auto it = j.at("rewards").begin(); it != j.at("rewards").end(); ++it) {
      f.rewards.emplace_back(it.key(), it.value().get<double>());
    }
    f.terrain_id = j.at("terrain_id").get<std::string>();
    f.paused = j.at("paused").get<bool>();
    f.mode = j.at("mode").get<std::string>();
    f.frame_index = j.at("frame_index").get<std::int64_t>();
    f.frame_total = j.at("frame_total").get<std::int64_t>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed frame: ") + e.what());
  }
}

struct ControlMsg {
  enum class Kind { kPause, kResume, kStepOnce, kReset, kSelectWorld, kSetRate, kPush, kScrub };
  Kind kind = Kind::kPause;
  std::size_t world = 0;
  double hz = 0.0;
  double fx = 0.0, fz = 0.0;
  std::int64_t frame = 0;

  friend bool operator==(const ControlMsg&, const ControlMsg&) = default;
};

inline const char* kind_name(ControlMsg::Kind k) {
  using K = ControlMsg::Kind;
  switch (k) {
    case K::kPause: return "pause";
    case K::kResume: return "resume";
    case K::kStepOnce: return "step_once";
    case K::kReset: return "reset";
    case K::kSelectWorld: return "select_world";
    case K::kSetRate: return "set_rate";
    case K::kPush: return "push";
    case K::kScrub: return "scrub";
  }
  return "?";
}

inline Json to_json_value(const ControlMsg& m) {
  using K = ControlMsg::Kind;
  Json j;
  j["type"] = kind_name(m.kind);
  switch (m.kind) {
    case K::kSelectWorld: j["world"] = m.world; break;
    case K::kSetRate: j["hz"] = m.hz; break;
    case K::kPush:
      j["world"] = m.world;
      j["fx"] = m.fx;
      j["fz"] = m.fz;
      break;
    case K::kScrub: j["frame"] = m.frame; break;
    default: break;
  }
  return j;
}

inline ControlMsg parse_control(const std::string& text) {
  using K = ControlMsg::Kind;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ProtocolError("control message needs a string 'type' field");
  }
  const std::string type = j["type"].get<std::string>();
  auto number = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw ProtocolError(type + ": missing numeric field '" + key + "'");
    }
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) throw ProtocolError(type + ": '" + std::string(key) + "' must be finite");
    return v;
  };
  auto index = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
      throw ProtocolError(type + ": missing integer field '" + key + "'");
    }
    return j[key].get<std::int64_t>();
  };
  ControlMsg m;
  if (type == "pause") {
    m.kind = K::kPause;
  } else if (type == "resume") {
    m.kind = K::kResume;
  } else if (type == "step_once") {
    m.kind = K::kStepOnce;
  } else if (type == "reset") {
    m.kind = K::kReset;
  } else if (type == "select_world") {
    m.kind = K::kSelectWorld;
    const auto w = index("world");
    if (w < 0) throw ProtocolError("select_world: world must be >= 0");
    m.world = static_cast<std::size_t>(w);
  } else if (type == "set_rate") {
    m.kind = K::kSetRate;
    m.hz = number("hz");
    if (!(m.hz > 0.0)) throw ProtocolError("set_rate: hz must be > 0");
  } else if (type == "push") {
    m.kind = K::kPush;
    const auto w = index("world");
    if (w < 0) throw ProtocolError("push: world must be >= 0");
    m.world = static_cast<std::size_t>(w);
    m.fx = number("fx");
    m.fz = number("fz");
  } else if (type == "scrub") {
    m.kind = K::kScrub;
    m.frame = index("frame");
  } else {
    throw ProtocolError("unknown control message type '" + type + "'");
  }
  return m;
}

inline std::string ack(const ControlMsg& m) {
  return Json{{"type", "ack"}, {"request", kind_name(m.kind)}}.dump();
}
inline std::string warning(const ControlMsg& m, const std::string& text) {
  return Json{{"type", "warning"}, {"request", kind_name(m.kind)}, {"message", text}}.dump();
}
inline std::string error(const std::string& text) {
  return Json{{"type", "error"}, {"message", text}}.dump();
}

inline std::string terrain_id(const terrain::Heightfield& hf) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a64(terrain::export_text(hf));
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

inline Json terrain_message(const terrain::Heightfield& hf) {
  Json j;
  j["type"] = "terrain";
  j["protocol_version"] = kProtocolVersion;
  j["id"] = terrain_id(hf);
  j["kind"] = hf.is_plane() ? "plane" : "heightfield";
  j["patch_length"] = hf.patch_length();
  j["spacing"] = hf.spacing();
  Json patches = Json::array();
  for (const auto& p : hf.patches()) patches.push_back({{"origin", p.origin}, {"heights", p.heights}});
  j["patches"] = patches;
  return j;
}

}  // namespace lockstep::viewer

#endif  // LOCKSTEP_VIEWER_PROTOCOL_HPP_
