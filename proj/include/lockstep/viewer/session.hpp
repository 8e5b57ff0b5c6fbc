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

#ifndef LOCKSTEP_VIEWER_SESSION_HPP_
#define LOCKSTEP_VIEWER_SESSION_HPP_

// What the bridge drives: a live env rolling a scripted policy, or a loaded
// capture dump. BridgeCore owns the hand-off between the network thread and
// the stepping thread. Control messages queue up and are applied only
// between control steps, and the latest frame sits in a snapshot buffer the
// broadcaster copies out.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lockstep/cli/runner.hpp"
#include "lockstep/env/capture.hpp"
#include "lockstep/env/env.hpp"
#include "lockstep/viewer/protocol.hpp"

namespace lockstep::viewer {

class Session {
 public:
  virtual ~Session() = default;
  // Applies one message and returns the reply text.
  virtual std::string handle(const ControlMsg& m) = 0;
  // Advances by one control step (live) or one frame (replay) unless
  // paused. Returns whether anything moved.
  virtual bool tick() = 0;
  virtual FrameMsg frame() const = 0;
  virtual const Json& terrain() const = 0;
  virtual const char* mode() const = 0;
  virtual std::int64_t sim_step() const = 0;
  virtual bool paused() const = 0;
  // Wall-clock seconds one tick stands for at real time.
  virtual double tick_seconds() const = 0;
};

namespace detail {

inline void fill_pose(FrameMsg& f, const sim::ModelSpec& spec, std::span<const double> q) {
  f.base_x = q[0];
  f.base_z = q[1];
  f.base_pitch = q[2];
  f.joints.assign(q.begin() + static_cast<std::ptrdiff_t>(sim::kBaseDofs), q.end());
  const auto poses = sim::forward_kinematics(spec, q);
  f.tips.clear();
  for (const auto& t : poses.tips) f.tips.emplace_back(t.x, t.z);
}

inline void fill_feet(FrameMsg& f, const sim::ContactCache& c, std::size_t w) {
  f.feet.clear();
  for (std::size_t i = 0; i < c.normal_force.cols(); ++i) {
    f.feet.push_back({c.pos_x(w, i), c.pos_z(w, i), c.tangential_force(w, i), c.normal_force(w, i),
                      c.in_contact(w, i) != 0});
  }
}

}  // namespace detail

// Live env plus an open-loop policy. Pushes land in ext_force and are
// consumed by the first substep of the next control step.
class LiveSession : public Session {
 public:
  LiveSession(env::EnvCfg cfg, cli::AgentCfg agent, bool start_paused = false)
      : env_(std::move(cfg)), agent_(std::move(agent)), paused_(start_paused) {
    restart();
    terrain_ = terrain_message(env_.terrain());
    terrain_id_ = terrain_["id"].get<std::string>();
  }

  std::string handle(const ControlMsg& m) override {
    using K = ControlMsg::Kind;
    switch (m.kind) {
      case K::kPause: paused_ = true; break;
      case K::kResume: paused_ = false; break;
      case K::kStepOnce: step_once_ = true; break;
      case K::kReset: restart(); break;
      case K::kSelectWorld:
        if (m.world >= env_.num_envs()) {
          return error("select_world: world " + std::to_string(m.world) + " out of range (" +
                       std::to_string(env_.num_envs()) + " worlds)");
        }
        world_ = m.world;
        break;
      case K::kPush:
        if (m.world >= env_.num_envs()) {
          return error("push: world " + std::to_string(m.world) + " out of range");
        }
        env_.push(m.world, m.fx, m.fz);
        break;
      case K::kScrub: return error("scrub is only valid in replay mode");
      case K::kSetRate: break;  // handled by the core
    }
    return ack(m);
  }

  bool tick() override {
    if (paused_ && !step_once_) return false;
    step_once_ = false;
    env_.step(policy_->act(step_++));
    return true;
  }

  FrameMsg frame() const override {
    FrameMsg f;
    const auto& s = env_.state();
    f.sim_step = s.sim_step;
    f.world = world_;
    detail::fill_pose(f, env_.model().spec(), s.q.row(world_));
    detail::fill_feet(f, s.contact, world_);
    std::size_t c = 0;
    for (const auto& [name, r] : env_.commands().ranges()) {
      f.command.emplace_back(name, env_.commands().value(world_, c++));
    }
    for (const auto& [name, t] : env_.rewards().terms()) f.rewards.emplace_back(name, t.step[world_]);
    f.terrain_id = terrain_id_;
    f.paused = paused_;
    f.mode = "live";
    return f;
  }

  const Json& terrain() const override { return terrain_; }
  const char* mode() const override { return "live"; }
  std::int64_t sim_step() const override { return env_.state().sim_step; }
  bool paused() const override { return paused_; }
  double tick_seconds() const override { return env_.step_dt(); }

  const env::ManagerBasedRlEnv& env() const { return env_; }

 private:
  void restart() {
    env_.reset();
    policy_ = std::make_unique<cli::Policy>(agent_, env_);
    step_ = 0;
  }

  env::ManagerBasedRlEnv env_;
  cli::AgentCfg agent_;
  std::unique_ptr<cli::Policy> policy_;
  std::int64_t step_ = 0;
  std::size_t world_ = 0;
  bool paused_ = false;
  bool step_once_ = false;
  Json terrain_;
  std::string terrain_id_;
};

// Steps through the frames of a dump. Replays start paused on frame 0;
// resume plays forward one frame per tick and pauses on the last frame.
class ReplaySession : public Session {
 public:
  explicit ReplaySession(env::CaptureDump dump) : dump_(std::move(dump)) {
    if (dump_.frames.empty()) throw env::CaptureError("dump holds no frames");
    if (!dump_.meta.contains("config")) {
      throw env::CaptureError("dump has no embedded config; cannot rebuild the model");
    }
    env::EnvCfg cfg = env::env_cfg_from_json(dump_.meta["config"]);
    cfg.scene.num_envs = dump_.n_worlds;
    cfg.capture_enabled = false;
    cfg.num_threads = 1;
    env_ = std::make_unique<env::ManagerBasedRlEnv>(std::move(cfg));
    if (dump_.meta.contains("fields")) env::apply_fields(env_->model_mut(), dump_.meta["fields"]);
    scratch_ = env_->state();
    terrain_ = terrain_message(env_->terrain());
    terrain_id_ = terrain_["id"].get<std::string>();
    for (const auto& w : dump_.meta.value("flagged_worlds", Json::array())) {
      world_ = w.get<std::size_t>();
      break;
    }
    load(0);
  }

  std::string handle(const ControlMsg& m) override {
    using K = ControlMsg::Kind;
    switch (m.kind) {
      case K::kPause: paused_ = true; break;
      case K::kResume: paused_ = false; break;
      case K::kStepOnce: step_once_ = true; break;
      case K::kReset:
        paused_ = true;
        load(0);
        break;
      case K::kSelectWorld:
        if (m.world >= dump_.n_worlds) {
          return error("select_world: world " + std::to_string(m.world) + " out of range (" +
                       std::to_string(dump_.n_worlds) + " worlds)");
        }
        world_ = m.world;
        load(index_);
        break;
      case K::kPush: return error("push is only valid in live mode");
      case K::kScrub: {
        const auto last = static_cast<std::int64_t>(dump_.frames.size()) - 1;
        const std::int64_t k = std::clamp<std::int64_t>(m.frame, 0, last);
        load(static_cast<std::size_t>(k));
        if (k != m.frame) {
          return warning(m, "frame " + std::to_string(m.frame) + " clamped to " + std::to_string(k) +
                                " (dump holds " + std::to_string(last + 1) + " frames)");
        }
        break;
      }
      case K::kSetRate: break;
    }
    return ack(m);
  }

  bool tick() override {
    if (paused_ && !step_once_) return false;
    step_once_ = false;
    if (index_ + 1 >= dump_.frames.size()) {
      paused_ = true;
      return false;
    }
    load(index_ + 1);
    return true;
  }

  FrameMsg frame() const override { return frame_; }
  const Json& terrain() const override { return terrain_; }
  const char* mode() const override { return "replay"; }
  std::int64_t sim_step() const override { return dump_.frames[index_].sim_step; }
  bool paused() const override { return paused_; }
  double tick_seconds() const override { return env_->physics_dt(); }

  std::size_t frame_index() const { return index_; }
  const env::CaptureDump& dump() const { return dump_; }

 private:
  // Contact values come from re-running the substep that produced frame k,
  // which is what a live frame would have shown at that sim_step.
  void load(std::size_t k) {
    index_ = k;
    const auto& fr = dump_.frames[k];
    FrameMsg f;
    f.sim_step = fr.sim_step;
    f.world = world_;
    detail::fill_pose(f, env_->model().spec(), fr.q.row(world_));
    if (k > 0) {
      env::resimulate(env_->model(), scratch_, dump_.frames[k - 1], fr);
      detail::fill_feet(f, scratch_.contact, world_);
    } else {
      scratch_.contact.clear_world(world_);
      detail::fill_feet(f, scratch_.contact, world_);
    }
    f.terrain_id = terrain_id_;
    f.mode = "replay";
    f.frame_index = static_cast<std::int64_t>(k);
    f.frame_total = static_cast<std::int64_t>(dump_.frames.size());
    frame_ = std::move(f);
  }

  env::CaptureDump dump_;
  std::unique_ptr<env::ManagerBasedRlEnv> env_;
  sim::BatchState scratch_;
  Json terrain_;
  std::string terrain_id_;
  std::size_t world_ = 0;
  std::size_t index_ = 0;
  bool paused_ = true;
  bool step_once_ = false;
  FrameMsg frame_;
};

// Thread-safe front of a Session. Any thread may enqueue; exactly one
// thread calls pump(). The broadcaster reads latest_frame().
class BridgeCore {
 public:
  using Reply = std::function<void(std::string)>;

  explicit BridgeCore(std::unique_ptr<Session> session, double rate_hz = 30.0)
      : session_(std::move(session)), rate_hz_(rate_hz) {
    publish();
  }

  // Parses immediately so malformed input gets an error reply without
  // waiting for the next control-step boundary.
  void enqueue(const std::string& text, Reply reply) {
    ControlMsg m;
    try {
      m = parse_control(text);
    } catch (const ProtocolError& e) {
      if (reply) reply(error(e.what()));
      return;
    }
    std::lock_guard lock(queue_mu_);
    queue_.emplace_back(m, std::move(reply));
  }

  // One boundary: drain messages, then advance at most one tick.
  bool pump() {
    std::deque<std::pair<ControlMsg, Reply>> batch;
    {
      std::lock_guard lock(queue_mu_);
      batch.swap(queue_);
    }
    for (auto& [m, reply] : batch) {
      std::string r = session_->handle(m);
      if (m.kind == ControlMsg::Kind::kSetRate && r.find("\"ack\"") != std::string::npos) {
        rate_hz_.store(m.hz);
      }
      if (reply) reply(std::move(r));
    }
    const bool moved = session_->tick();
    if (moved || !batch.empty()) publish();
    return moved;
  }

  // Paces ticks so one tick takes tick_seconds() / speed of wall time.
  // speed <= 0 runs as fast as possible.
  void run(const std::atomic<bool>& stop, double speed = 1.0) {
    using clock = std::chrono::steady_clock;
    auto next = clock::now();
    while (!stop.load()) {
      const bool moved = pump();
      if (!moved) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        next = clock::now();
        continue;
      }
      if (speed > 0.0) {
        next += std::chrono::duration_cast<clock::duration>(
            std::chrono::duration<double>(session_->tick_seconds() / speed));
        std::this_thread::sleep_until(next);
      }
    }
  }

  FrameMsg latest_frame() const {
    std::lock_guard lock(frame_mu_);
    return frame_;
  }
  std::string terrain_text() const { return terrain_text_; }
  std::string mode() const { return session_->mode(); }
  std::int64_t sim_step() const { return sim_step_.load(); }
  double rate_hz() const { return rate_hz_.load(); }
  // Only safe from the pumping thread.
  Session& session() { return *session_; }

 private:
  void publish() {
    FrameMsg f = session_->frame();
    if (terrain_text_.empty()) terrain_text_ = session_->terrain().dump();
    sim_step_.store(f.sim_step);
    std::lock_guard lock(frame_mu_);
    frame_ = std::move(f);
  }

  std::unique_ptr<Session> session_;
  std::atomic<double> rate_hz_;
  std::atomic<std::int64_t> sim_step_{0};
  std::mutex queue_mu_;
  std::deque<std::pair<ControlMsg, Reply>> queue_;
  mutable std::mutex frame_mu_;
  FrameMsg frame_;
  std::string terrain_text_;
};

}  // namespace lockstep::viewer

#endif  // LOCKSTEP_VIEWER_SESSION_HPP_
