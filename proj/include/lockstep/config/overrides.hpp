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

#ifndef LOCKSTEP_CONFIG_OVERRIDES_HPP_
#define LOCKSTEP_CONFIG_OVERRIDES_HPP_

// Dotted-path overrides on a JSON config tree, e.g.
//
//   --env.scene.num-envs 4096
//   --env.rewards.foot-slip.weight -0.2
//   --env.scene.height-scan.3 0.25        (array element)
//   --env.observations.policy.terms.base-lin-vel.clip [-5,5]
//
// Dashes and underscores are interchangeable in path segments. The value
// must parse as the type already at that path: integer, number, bool,
// string, or a JSON array/object for composite fields. A null leaf (an
// unset optional) accepts any JSON literal; bare words become strings.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lockstep/config/json_util.hpp"
#include "lockstep/config/suggest.hpp"

namespace lockstep::config {

inline std::string to_dash(std::string s) {
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

inline std::string to_underscore(std::string s) {
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  return s;
}

// "a.b[2].c" -> {"a", "b", "2", "c"}
inline std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : path) {
    if (c == '.' || c == '[' || c == ']') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

inline const char* type_name(const Json& v) {
  if (v.is_boolean()) return "bool";
  if (v.is_number_integer()) return "int";
  if (v.is_number()) return "float";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "object";
  return "json";
}

struct PathInfo {
  std::string path;  // dashed form
  std::string type;
  std::string default_value;
};

// Every leaf (and every empty composite) under `root`, in tree order.
inline void list_paths(const Json& node, const std::string& prefix, std::vector<PathInfo>& out) {
  const bool leaf = !(node.is_object() || node.is_array()) || node.empty();
  const bool numeric_array =
      node.is_array() && !node.empty() &&
      std::all_of(node.begin(), node.end(), [](const Json& v) { return v.is_primitive(); });
  if (leaf || numeric_array) {
    out.push_back({prefix, type_name(node), node.dump()});
    if (!numeric_array) return;
  }
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      list_paths(it.value(), prefix + "." + to_dash(it.key()), out);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      list_paths(node[i], prefix + "." + std::to_string(i), out);
    }
  }
}

inline std::vector<PathInfo> list_paths(const Json& root) {
  std::vector<PathInfo> out;
  for (auto it = root.begin(); it != root.end(); ++it) list_paths(it.value(), to_dash(it.key()), out);
  return out;
}

inline std::string help_text(const Json& root) {
  std::ostringstream os;
  for (const auto& p : list_paths(root)) {
    os << "  --" << p.path << " <" << p.type << ">  (default: " << p.default_value << ")\n";
  }
  return os.str();
}

namespace detail {

inline bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

inline std::string unknown_path_message(const Json& root, const std::string& path) {
  std::vector<std::string> candidates;
  for (const auto& p : list_paths(root)) candidates.push_back(p.path);
  std::string msg = "unknown config path '" + path + "'";
  const auto close = nearest(to_dash(path), candidates);
  if (!close.empty()) msg += "; did you mean " + join(close, " or ") + "?";
  return msg;
}

inline Json parse_literal(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return Json(text);
  }
}

// Integer literals landing where the old value held floats become floats,
// so "[-2, 2]" over a float range keeps the field's type.
inline void match_numeric(const Json& like, Json& v) {
  if (like.is_number_float() && v.is_number_integer()) {
    v = Json(v.get<double>());
  } else if (like.is_array() && v.is_array() && !like.empty()) {
    for (std::size_t i = 0; i < v.size(); ++i) match_numeric(like[std::min(i, like.size() - 1)], v[i]);
  } else if (like.is_object() && v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (like.contains(it.key())) match_numeric(like[it.key()], it.value());
    }
  }
}

inline Json coerce(const Json& current, const std::string& text, const std::string& path) {
  auto bad = [&](const char* want) {
    return ConfigError(path + ": expected " + std::string(want) + ", got '" + text + "'");
  };
  if (current.is_string()) {
    const Json v = parse_literal(text);
    return v.is_string() ? v : Json(text);
  }
  const Json v = parse_literal(text);
  if (current.is_boolean()) {
    if (!v.is_boolean()) throw bad("true or false");
    return v;
  }
  if (current.is_number_integer()) {
    if (!v.is_number_integer()) throw bad("an integer");
    if (current.is_number_unsigned() && v.get<std::int64_t>() < 0) throw bad("a non-negative integer");
    return v;
  }
  if (current.is_number()) {
    if (!v.is_number()) throw bad("a number");
    return Json(v.get<double>());
  }
  if (current.is_array() || current.is_object()) {
    if (current.is_array() && !v.is_array()) throw bad("a JSON array");
    if (current.is_object() && !v.is_object()) throw bad("a JSON object");
    Json out = v;
    match_numeric(current, out);
    return out;
  }
  return v;  // null: optional field, anything goes
}

}  // namespace detail

// Applies one override in place. Throws ConfigError for unknown paths
// (with suggestions) and for values of the wrong type.
inline void apply_override(Json& root, const std::string& path, const std::string& value) {
  const auto parts = split_path(path);
  if (parts.empty()) throw ConfigError("empty config path");
  Json* node = &root;
  for (const auto& raw : parts) {
    if (node->is_object()) {
      const std::string want = to_underscore(raw);
      Json* next = nullptr;
      for (auto it = node->begin(); it != node->end(); ++it) {
        if (to_underscore(it.key()) == want) {
          next = &it.value();
          break;
        }
      }
      if (!next) throw ConfigError(detail::unknown_path_message(root, path));
      node = next;
    } else if (node->is_array() && detail::is_index(raw)) {
      const auto i = static_cast<std::size_t>(std::stoull(raw));
      if (i >= node->size()) {
        throw ConfigError(path + ": index " + raw + " out of range (size " +
                          std::to_string(node->size()) + ")");
      }
      node = &(*node)[i];
    } else {
      throw ConfigError(detail::unknown_path_message(root, path));
    }
  }
  *node = detail::coerce(*node, value, to_dash(path));
}

// Splits "--a.b=1 --c.d 2" style arguments into (path, value) pairs.
inline std::vector<std::pair<std::string, std::string>> parse_override_args(
    const std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + a + "'");
    std::string key = a.substr(2);
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(key.substr(0, eq), key.substr(eq + 1));
      continue;
    }
    if (i + 1 >= args.size()) throw ConfigError("missing value for '" + a + "'");
    out.emplace_back(key, args[++i]);
  }
  return out;
}

}  // namespace lockstep::config

#endif  // LOCKSTEP_CONFIG_OVERRIDES_HPP_
