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

#ifndef LOCKSTEP_SIM_SPEC_IO_HPP_
#define LOCKSTEP_SIM_SPEC_IO_HPP_

// ModelSpec as JSON text. Schema (version 1):
//
//   {
//     "spec_version": 1,
//     "name": "walker",
//     "base_mass": 6.0, "base_inertia": 0.08,
//     "gravity": 9.81, "physics_dt": 0.005, "decimation": 4,
//     "contact": {"stiffness": 5000, "damping": 150,
//                 "tangential_damping": 150, "friction": 1.0},
//     "joints": [{"name": "hind_hip", "parent": -1, "attach_offset": [-0.2, 0],
//                 "link_length": 0.2, "link_mass": 0.5, "rotor_inertia": 0.03,
//                 "damping": 0.05, "pos_limits": [-1.2, 1.2],
//                 "soft_limit_fraction": 0.9}, ...],
//     "feet": ["hind_knee", "front_knee"]      // joint names or indices
//   }
//
// "parent" is -1 for the base, or a joint index / name of an earlier joint.

#include <array>
#include <fstream>
#include <sstream>
#include <string>

#include "lockstep/config/json_util.hpp"
#include "lockstep/sim/model_spec.hpp"

namespace lockstep::sim {

inline constexpr int kSpecVersion = 1;

inline Json to_json_value(const ModelSpec& s, bool include_timing = true) {
  Json j;
  j["spec_version"] = kSpecVersion;
  j["name"] = s.name;
  j["base_mass"] = s.base_mass;
  j["base_inertia"] = s.base_inertia;
  j["gravity"] = s.gravity;
  if (include_timing) {
    j["physics_dt"] = s.physics_dt;
    j["decimation"] = s.decimation;
  }
  j["contact"] = {{"stiffness", s.contact.stiffness},
                  {"damping", s.contact.damping},
                  {"tangential_damping", s.contact.tangential_damping},
                  {"friction", s.contact.friction}};
  Json joints = Json::array();
  for (const auto& js : s.joints) {
    joints.push_back({{"name", js.name},
                      {"parent", js.parent},
                      {"attach_offset", {js.attach_offset.x, js.attach_offset.z}},
                      {"link_length", js.link_length},
                      {"link_mass", js.link_mass},
                      {"rotor_inertia", js.rotor_inertia},
                      {"damping", js.damping},
                      {"pos_limits", {js.pos_lo, js.pos_hi}},
                      {"soft_limit_fraction", js.soft_limit_fraction}});
  }
  j["joints"] = joints;
  Json feet = Json::array();
  for (int f : s.feet) feet.push_back(s.joints[static_cast<std::size_t>(f)].name);
  j["feet"] = feet;
  return j;
}

namespace detail {
inline int resolve_joint_ref(const Json& ref, const std::vector<JointSpec>& joints,
                             const std::string& where) {
  if (ref.is_number_integer()) return ref.get<int>();
  if (ref.is_string()) {
    const auto name = ref.get<std::string>();
    for (std::size_t i = 0; i < joints.size(); ++i) {
      if (joints[i].name == name) return static_cast<int>(i);
    }
    throw ConfigError(where + ": no joint named '" + name + "'");
  }
  throw ConfigError(where + ": expected a joint index or name");
}
}  // namespace detail

inline ModelSpec model_spec_from_json(const Json& j, const std::string& where = "spec",
                                      bool require_version = true) {
  ModelSpec s;
  ObjectReader r(j, where);
  int version = kSpecVersion;
  if (require_version) {
    r.require("spec_version", version);
  } else {
    r.get("spec_version", version);
  }
  if (version != kSpecVersion) {
    throw ConfigError(where + ": unsupported spec_version " + std::to_string(version));
  }
  r.get("name", s.name);
  r.get("base_mass", s.base_mass);
  r.get("base_inertia", s.base_inertia);
  r.get("gravity", s.gravity);
  r.get("physics_dt", s.physics_dt);
  r.get("decimation", s.decimation);
  if (const Json* c = r.child("contact")) {
    ObjectReader cr(*c, r.path("contact"));
    cr.get("stiffness", s.contact.stiffness);
    cr.get("damping", s.contact.damping);
    cr.get("tangential_damping", s.contact.tangential_damping);
    cr.get("friction", s.contact.friction);
    cr.finish();
  }
  if (const Json* js = r.child("joints")) {
    if (!js->is_array()) throw ConfigError(r.path("joints") + ": expected an array");
    for (std::size_t i = 0; i < js->size(); ++i) {
      const std::string at = r.path("joints") + "[" + std::to_string(i) + "]";
      ObjectReader jr((*js)[i], at);
      JointSpec joint;
      jr.get("name", joint.name);
      if (const Json* p = jr.child("parent")) {
        joint.parent = p->is_number_integer() && p->get<int>() == -1
                           ? -1
                           : detail::resolve_joint_ref(*p, s.joints, at + ".parent");
      }
      std::array<double, 2> off{0.0, 0.0};
      jr.get("attach_offset", off);
      joint.attach_offset = {off[0], off[1]};
      jr.get("link_length", joint.link_length);
      jr.get("link_mass", joint.link_mass);
      jr.get("rotor_inertia", joint.rotor_inertia);
      jr.get("damping", joint.damping);
      std::array<double, 2> lim{joint.pos_lo, joint.pos_hi};
      jr.get("pos_limits", lim);
      joint.pos_lo = lim[0];
      joint.pos_hi = lim[1];
      jr.get("soft_limit_fraction", joint.soft_limit_fraction);
      jr.finish();
      s.joints.push_back(std::move(joint));
    }
  }
  if (const Json* feet = r.child("feet")) {
    if (!feet->is_array()) throw ConfigError(r.path("feet") + ": expected an array");
    for (const auto& f : *feet) {
      s.feet.push_back(detail::resolve_joint_ref(f, s.joints, r.path("feet")));
    }
  }
  r.finish();
  return s;
}

inline ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  ModelSpec s = model_spec_from_json(j, path);
  s.validate();
  return s;
}

inline void save_model_spec(const ModelSpec& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model spec '" + path + "'");
  out << to_json_value(s).dump(2) << "\n";
}

}  // namespace lockstep::sim

#endif  // LOCKSTEP_SIM_SPEC_IO_HPP_
