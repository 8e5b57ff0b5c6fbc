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

#ifndef LOCKSTEP_ENV_CAPTURE_HPP_
#define LOCKSTEP_ENV_CAPTURE_HPP_

// Rolling buffer of recent simulation states, and its dump file.
//
// Dump layout (little-endian, version 1):
//   char[8] magic "LSCAPT\0\0"
//   u32 version, u32 n_worlds, u32 nq, u32 nu, u32 n_frames
//   u64 config hash (FNV-1a 64 of the compact config JSON)
//   u32 meta length, then that many bytes of JSON metadata
//   n_frames times:
//     i64 sim_step
//     f64 q[N*nq], qd[N*nq], ctrl[N*nu], ext_force[N*2], applied_force[N*2]
//
// Frames are stored oldest first with strictly increasing sim_step.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/config/json_util.hpp"
#include "lockstep/sim/model.hpp"
#include "lockstep/sim/state.hpp"

namespace lockstep::env {

static_assert(std::endian::native == std::endian::little,
              "capture files are written in host byte order");

inline constexpr std::array<char, 8> kCaptureMagic = {'L', 'S', 'C', 'A', 'P', 'T', 0, 0};
inline constexpr std::uint32_t kCaptureVersion = 1;

class CaptureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CaptureRing {
 public:
  CaptureRing() = default;
  CaptureRing(std::size_t capacity, const sim::BatchState& shape) : frames_(capacity) {
    if (capacity == 0) throw std::invalid_argument("capture ring capacity must be >= 1");
    for (auto& f : frames_) sim::snapshot_into(shape, f);
  }

  std::size_t capacity() const { return frames_.size(); }
  std::size_t size() const { return count_; }
  void clear() { count_ = 0; head_ = 0; }

  void push(const sim::BatchState& s) {
    if (frames_.empty()) return;
    sim::snapshot_into(s, frames_[head_]);
    head_ = (head_ + 1) % frames_.size();
    if (count_ < frames_.size()) ++count_;
  }

  // i = 0 is the oldest retained frame.
  const sim::StateFrame& at(std::size_t i) const {
    if (i >= count_) throw std::out_of_range("capture frame index out of range");
    const std::size_t start = (head_ + frames_.size() - count_) % frames_.size();
    return frames_[(start + i) % frames_.size()];
  }

  std::vector<sim::StateFrame> ordered() const {
    std::vector<sim::StateFrame> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < count_; ++i) out.push_back(at(i));
    return out;
  }

 private:
  std::vector<sim::StateFrame> frames_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

struct CaptureDump {
  std::uint32_t n_worlds = 0, nq = 0, nu = 0;
  std::uint64_t config_hash = 0;
  Json meta = Json::object();
  std::vector<sim::StateFrame> frames;

  friend bool operator==(const CaptureDump&, const CaptureDump&) = default;
};

namespace detail {
template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
inline void put_array(std::ofstream& out, const WorldArray<double>& a) {
  out.write(reinterpret_cast<const char*>(a.data()),
            static_cast<std::streamsize>(a.size() * sizeof(double)));
}
template <typename T>
T get(std::ifstream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw CaptureError(std::string("capture file truncated in ") + what);
  }
  return v;
}
inline void get_array(std::ifstream& in, WorldArray<double>& a, std::size_t n, std::size_t cols,
                      const char* what) {
  a = WorldArray<double>(n, cols);
  if (!in.read(reinterpret_cast<char*>(a.data()),
               static_cast<std::streamsize>(a.size() * sizeof(double)))) {
    throw CaptureError(std::string("capture file truncated in frame ") + what);
  }
}
}  // namespace detail

inline void save_capture(const std::string& path, const CaptureDump& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CaptureError("cannot open '" + path + "' for writing");
  const std::string meta = d.meta.dump();
  out.write(kCaptureMagic.data(), kCaptureMagic.size());
  detail::put(out, kCaptureVersion);
  detail::put(out, d.n_worlds);
  detail::put(out, d.nq);
  detail::put(out, d.nu);
  detail::put(out, static_cast<std::uint32_t>(d.frames.size()));
  detail::put(out, d.config_hash);
  detail::put(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  for (const sim::StateFrame& f : d.frames) {
    detail::put(out, f.sim_step);
    detail::put_array(out, f.q);
    detail::put_array(out, f.qd);
    detail::put_array(out, f.ctrl);
    detail::put_array(out, f.ext_force);
    detail::put_array(out, f.applied_force);
  }
  if (!out) throw CaptureError("write failed for '" + path + "'");
}

inline CaptureDump load_capture(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaptureError("cannot open capture '" + path + "'");
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) throw CaptureError("'" + path + "' is empty or truncated");
  if (magic != kCaptureMagic) throw CaptureError("'" + path + "' is not a capture file");
  const auto version = detail::get<std::uint32_t>(in, "header");
  if (version != kCaptureVersion) {
    throw CaptureError("unsupported capture version " + std::to_string(version) + " (expected " +
                       std::to_string(kCaptureVersion) + ")");
  }
  CaptureDump d;
  d.n_worlds = detail::get<std::uint32_t>(in, "header");
  d.nq = detail::get<std::uint32_t>(in, "header");
  d.nu = detail::get<std::uint32_t>(in, "header");
  const auto n_frames = detail::get<std::uint32_t>(in, "header");
  d.config_hash = detail::get<std::uint64_t>(in, "header");
  const auto meta_len = detail::get<std::uint32_t>(in, "header");
  std::string meta(meta_len, '\0');
  if (!in.read(meta.data(), meta_len)) throw CaptureError("capture file truncated in metadata");
  try {
    d.meta = Json::parse(meta);
  } catch (const nlohmann::json::parse_error& e) {
    throw CaptureError(std::string("capture metadata is not JSON: ") + e.what());
  }
  d.frames.resize(n_frames);
  std::int64_t prev = INT64_MIN;
  for (auto& f : d.frames) {
    f.sim_step = detail::get<std::int64_t>(in, "frame header");
    if (f.sim_step <= prev) throw CaptureError("capture frames out of order");
    prev = f.sim_step;
    detail::get_array(in, f.q, d.n_worlds, d.nq, "q");
    detail::get_array(in, f.qd, d.n_worlds, d.nq, "qd");
    detail::get_array(in, f.ctrl, d.n_worlds, d.nu, "ctrl");
    detail::get_array(in, f.ext_force, d.n_worlds, 2, "ext_force");
    detail::get_array(in, f.applied_force, d.n_worlds, 2, "applied_force");
  }
  return d;
}

// Model field values at dump time, so replays see the same randomization.
inline Json fields_to_json(const sim::Model& m) {
  Json j = Json::object();
  for (const auto& [name, f] : m.fields()) {
    if (!f.expanded()) continue;
    j[name] = std::vector<double>(f.values().begin(), f.values().end());
  }
  return j;
}

inline void apply_fields(sim::Model& m, const Json& fields) {
  for (auto it = fields.begin(); it != fields.end(); ++it) {
    const auto values = it.value().get<std::vector<double>>();
    if (!m.has_field(it.key())) continue;
    const std::size_t width = m.field(it.key()).width();
    if (values.size() != width * m.n_worlds()) {
      throw CaptureError("field '" + it.key() + "' has " + std::to_string(values.size()) +
                         " values, model expects " + std::to_string(width * m.n_worlds()));
    }
    m.expand_field(it.key());
    for (std::size_t w = 0; w < m.n_worlds(); ++w) {
      for (std::size_t i = 0; i < width; ++i) m.set_field_value(it.key(), w, i, values[w * width + i]);
    }
  }
}

// Re-simulates the substep that produced `next` from `prev`: state from
// prev, the controls and external force that step consumed from next.
inline void resimulate(const sim::Model& m, sim::BatchState& s, const sim::StateFrame& prev,
                       const sim::StateFrame& next) {
  sim::restore(s, prev);
  s.ctrl = next.ctrl;
  s.ext_force = next.applied_force;
  sim::physics_step(m, s);
}

}  // namespace lockstep::env

#endif  // LOCKSTEP_ENV_CAPTURE_HPP_
