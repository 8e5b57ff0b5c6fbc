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

#ifndef LOCKSTEP_TERRAIN_TERRAIN_IO_HPP_
#define LOCKSTEP_TERRAIN_TERRAIN_IO_HPP_

// JSON form of TerrainGridCfg:
//   {"rows": 10, "cols": 5, "patch_length": 8, "spacing": 0.05,
//    "mode": "curriculum",
//    "sub_terrains": {"stairs": {"type": "pyramid_stairs", "proportion": 0.3,
//                                "step_width": 0.3, "step_height": [0.05, 0.25]}}}

#include <array>
#include <string>

#include "lockstep/config/json_util.hpp"
#include "lockstep/terrain/terrain.hpp"

namespace lockstep::terrain {

inline Json range_json(const Range& r) { return Json::array({r.lo, r.hi}); }

inline Json to_json_value(const SubTerrainCfg& sub) {
  Json j;
  j["type"] = shape_name(sub.shape);
  j["proportion"] = sub.proportion;
  std::visit(
      [&j](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PyramidStairs>) {
          j["step_width"] = s.step_width;
          j["step_height"] = range_json(s.step_height);
        } else if constexpr (std::is_same_v<T, RandomGrid>) {
          j["cell_width"] = s.cell_width;
          j["height"] = range_json(s.height);
        } else if constexpr (std::is_same_v<T, Slope>) {
          j["max_slope"] = s.max_slope;
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          j["amplitude"] = range_json(s.amplitude);
        } else if constexpr (std::is_same_v<T, Wave>) {
          j["amplitude"] = range_json(s.amplitude);
          j["wavelength"] = s.wavelength;
        }
      },
      sub.shape);
  return j;
}

inline Json to_json_value(const TerrainGridCfg& cfg) {
  Json j;
  j["rows"] = cfg.rows;
  j["cols"] = cfg.cols;
  j["patch_length"] = cfg.patch_length;
  j["spacing"] = cfg.spacing;
  j["mode"] = cfg.mode == GridMode::kCurriculum ? "curriculum" : "random";
  Json subs = Json::object();
  for (const auto& [name, sub] : cfg.sub_terrains) subs[name] = to_json_value(sub);
  j["sub_terrains"] = subs;
  return j;
}

namespace detail {
inline void read_range(ObjectReader& r, const char* key, Range& out) {
  std::array<double, 2> v{out.lo, out.hi};
  r.get(key, v);
  out = {v[0], v[1]};
}
}  // namespace detail

inline SubTerrainCfg sub_terrain_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  std::string type;
  r.require("type", type);
  SubTerrainCfg sub;
  r.get("proportion", sub.proportion);
  if (type == "flat") {
    sub.shape = Flat{};
  } else if (type == "pyramid_stairs") {
    PyramidStairs s;
    r.get("step_width", s.step_width);
    detail::read_range(r, "step_height", s.step_height);
    sub.shape = s;
  } else if (type == "random_grid") {
    RandomGrid s;
    r.get("cell_width", s.cell_width);
    detail::read_range(r, "height", s.height);
    sub.shape = s;
  } else if (type == "slope") {
    Slope s;
    r.get("max_slope", s.max_slope);
    sub.shape = s;
  } else if (type == "uniform_noise") {
    UniformNoise s;
    detail::read_range(r, "amplitude", s.amplitude);
    sub.shape = s;
  } else if (type == "wave") {
    Wave s;
    detail::read_range(r, "amplitude", s.amplitude);
    r.get("wavelength", s.wavelength);
    sub.shape = s;
  } else {
    throw ConfigError(where + ".type: unknown sub-terrain type '" + type + "'");
  }
  r.finish();
  return sub;
}

inline TerrainGridCfg terrain_cfg_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  TerrainGridCfg cfg;
  r.get("rows", cfg.rows);
  r.get("cols", cfg.cols);
  r.get("patch_length", cfg.patch_length);
  r.get("spacing", cfg.spacing);
  std::string mode = "curriculum";
  r.get("mode", mode);
  if (mode == "curriculum") {
    cfg.mode = GridMode::kCurriculum;
  } else if (mode == "random") {
    cfg.mode = GridMode::kRandom;
  } else {
    throw ConfigError(r.path("mode") + ": expected 'curriculum' or 'random'");
  }
  if (const Json* subs = r.child("sub_terrains")) {
    if (!subs->is_object()) throw ConfigError(r.path("sub_terrains") + ": expected an object");
    for (auto it = subs->begin(); it != subs->end(); ++it) {
      cfg.sub_terrains.insert(it.key(),
                              sub_terrain_from_json(it.value(), r.path("sub_terrains") + "." + it.key()));
    }
  }
  r.finish();
  return cfg;
}

}  // namespace lockstep::terrain

#endif  // LOCKSTEP_TERRAIN_TERRAIN_IO_HPP_
