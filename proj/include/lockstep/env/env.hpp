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

#ifndef LOCKSTEP_ENV_ENV_HPP_
#define LOCKSTEP_ENV_ENV_HPP_

// ManagerBasedRlEnv runs N worlds in lockstep. One call to step() executes,
// in this order:
//   1. action processing
//   2. `decimation` substeps of: actuators -> physics -> EntityData refresh
//      -> sensor update -> capture push and nonfinite check
//      Sensors run after the refresh so they see this substep's EntityData.
//   3. terminations
//   4. rewards (on pre-reset state)
//   5. curriculum, then reset of flagged worlds
//   6. command countdown
//   7. interval events
//   8. observations (on post-reset state)

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lockstep/actuation/actuator.hpp"
#include "lockstep/core/ordered_map.hpp"
#include "lockstep/core/parallel.hpp"
#include "lockstep/core/rng.hpp"
#include "lockstep/core/world_array.hpp"
#include "lockstep/entity/entity.hpp"
#include "lockstep/env/capture.hpp"
#include "lockstep/env/env_cfg.hpp"
#include "lockstep/managers/action_manager.hpp"
#include "lockstep/managers/command_manager.hpp"
#include "lockstep/managers/curriculum_manager.hpp"
#include "lockstep/managers/event_manager.hpp"
#include "lockstep/managers/observation_manager.hpp"
#include "lockstep/managers/reward_manager.hpp"
#include "lockstep/managers/termination_manager.hpp"
#include "lockstep/sensing/sensors.hpp"
#include "lockstep/sim/model.hpp"
#include "lockstep/sim/state.hpp"
#include "lockstep/terrain/terrain.hpp"

namespace lockstep::managers {
void register_builtin_terms();
}

namespace lockstep::env {

// Flat map of numeric arrays. Keys are fixed at construction:
//   episode_reward/<term>       mean episodic sum over worlds reset this step
//   episode_termination/<term>  worlds that term fired for this step
//   episode_termination/nonfinite
//   curriculum/<term>           the term's scalar report
//   reset_count                 worlds reset this step
using Extras = OrderedMap<std::vector<double>>;

struct StepResult {
  const managers::ObservationManager& observations;
  const std::vector<double>& reward;
  const std::vector<std::uint8_t>& terminated;
  const std::vector<std::uint8_t>& truncated;
  const Extras& extras;

  const WorldArray<double>& obs(const std::string& group) const {
    return observations.group(group);
  }
};

inline constexpr const char* kContactSensor = "feet_contact";
inline constexpr const char* kHeightScanner = "height_scan";

class ManagerBasedRlEnv {
 public:
  using SubstepHook = std::function<void(sim::BatchState&, std::int64_t sim_step)>;

  explicit ManagerBasedRlEnv(EnvCfg cfg) : cfg_(std::move(cfg)) {
    managers::register_builtin_terms();
    cfg_.validate();
    build();
  }
  ManagerBasedRlEnv(const ManagerBasedRlEnv&) = delete;
  ManagerBasedRlEnv& operator=(const ManagerBasedRlEnv&) = delete;

  // Starts every world's episode and returns the first observations. With
  // a seed the whole runtime is rebuilt, so equal seeds give equal episodes.
  const managers::ObservationManager& reset(std::optional<std::uint64_t> seed = std::nullopt) {
    if (seed || started_) {
      if (seed) cfg_.seed = *seed;
      build();
    }
    started_ = true;
    events_.apply_startup(*this);
    std::vector<std::size_t> all(num_envs());
    for (std::size_t w = 0; w < all.size(); ++w) all[w] = w;
    reset_worlds(all);
    capture_.clear();
    obs_.compute(*this);
    return obs_;
  }

  StepResult step(const WorldArray<double>& actions) {
    if (!started_) reset();
    // 1. Act.
    actions_.process(*this, actions);
    if (contact_) contact_->begin_control_step();
    std::fill(nonfinite_.begin(), nonfinite_.end(), 0);
    pending_dump_.reset();
    // 2. Simulate.
    for (std::size_t i = 0; i < cfg_.decimation; ++i) substep();
    // 3. Terminate.
    for (auto& n : episode_length_) ++n;
    ++common_step_;
    terminations_.compute(*this, nonfinite_);
    // 4. Reward.
    rewards_.compute(*this, step_dt());
    if (pending_dump_) write_pending_dump();
    // 5. Reset.
    reset_ids_.clear();
    const auto& flags = terminations_.reset_flags();
    for (std::size_t w = 0; w < flags.size(); ++w) {
      if (flags[w]) reset_ids_.push_back(w);
    }
    curriculum_.update(*this, reset_ids_);
    rewards_.reset(reset_ids_);
    if (!reset_ids_.empty()) reset_worlds(reset_ids_);
    // 6. Command.
    commands_.update();
    // 7. Apply events.
    events_.apply_interval(*this);
    // 8. Observe.
    for (auto& [name, s] : sensors_) s->invalidate();
    obs_.compute(*this);
    fill_extras();
    return {obs_, rewards_.total(), terminations_.terminated(), terminations_.truncated(),
            extras_};
  }

  // Scene and state -------------------------------------------------------
  const EnvCfg& cfg() const { return cfg_; }
  std::size_t num_envs() const { return cfg_.scene.num_envs; }
  double physics_dt() const { return cfg_.physics_dt; }
  double step_dt() const { return cfg_.step_dt(); }
  std::int64_t max_episode_steps() const { return cfg_.max_episode_steps(); }
  std::int64_t episode_length(std::size_t w) const { return episode_length_[w]; }
  std::int64_t common_step() const { return common_step_; }
  std::uint64_t world_offset() const { return cfg_.world_offset; }

  const sim::Model& model() const { return *model_; }
  sim::Model& model_mut() { return *model_; }
  const sim::BatchState& state() const { return state_; }
  sim::BatchState& state_mut() { return state_; }
  const entity::Entity& robot() const { return *robot_; }
  const entity::Entity& ground() const { return *ground_entity_; }
  const entity::EntityData& data() const { return data_; }
  const terrain::Heightfield& terrain() const { return *heightfield_; }
  const actuation::ActuatorSet& actuators() const { return actuators_; }
  const std::vector<double>& default_joint_pos() const { return cfg_.scene.default_state.joint_pos; }

  // Managers --------------------------------------------------------------
  const managers::ActionManager& actions() const { return actions_; }
  const managers::ObservationManager& observations() const { return obs_; }
  const managers::RewardManager& rewards() const { return rewards_; }
  managers::RewardManager& rewards_mut() { return rewards_; }
  const managers::TerminationManager& terminations() const { return terminations_; }
  const managers::EventManager& events() const { return events_; }
  const managers::CommandManager& commands() const { return commands_; }
  managers::CommandManager& commands_mut() { return commands_; }
  const managers::CurriculumManager& curriculum() const { return curriculum_; }
  const Extras& extras() const { return extras_; }

  // Sensors ---------------------------------------------------------------
  sensing::SensorContext sensor_context() const { return {*model_, state_, data_}; }
  const sensing::ContactSensor& contact_sensor() const { return *contact_; }
  sensing::Sensor& sensor(const std::string& name) const { return *sensors_.at(name); }
  bool has_sensor(const std::string& name) const { return sensors_.contains(name); }
  const WorldArray<double>& read_sensor(const std::string& name) const {
    return sensors_.at(name)->read(sensor_context());
  }

  // Terrain curriculum ----------------------------------------------------
  std::size_t terrain_level(std::size_t w) const { return terrain_level_[w]; }
  std::size_t terrain_column(std::size_t w) const { return terrain_col_[w]; }
  std::size_t terrain_rows() const { return heightfield_->rows(); }
  double spawn_x(std::size_t w) const { return spawn_x_[w]; }
  // Takes effect at the world's next reset.
  void set_terrain_level(std::size_t w, std::size_t level) {
    terrain_level_[w] = std::min(level, terrain_rows() - 1);
    spawn_x_[w] = spawn_origin(terrain_level_[w], terrain_col_[w]);
  }

  // Operator hooks --------------------------------------------------------
  // Called after every physics step, before the nonfinite check. Used by
  // fault-injection tests.
  void set_substep_hook(SubstepHook hook) { substep_hook_ = std::move(hook); }
  // External force on the base of world w for the next substep (N).
  void push(std::size_t w, double fx, double fz) {
    state_.ext_force(w, 0) = fx;
    state_.ext_force(w, 1) = fz;
  }

  const CaptureRing& capture() const { return capture_; }
  // Paths of dumps written so far, oldest first.
  const std::vector<std::string>& dumps() const { return dumps_; }
  // Reset ids from the last step.
  std::span<const std::size_t> last_reset_ids() const { return reset_ids_; }

  // Snapshot of the metadata written into a capture dump.
  Json capture_meta(const std::vector<std::size_t>& flagged) const {
    Json meta;
    meta["task_id"] = cfg_.task_id;
    meta["crash_sim_step"] = state_.sim_step;
    meta["flagged_worlds"] = flagged;
    Json arrays = Json::object();
    for (std::size_t w : flagged) {
      Json names = Json::array();
      if (!sim::row_finite(state_.q.row(w))) names.push_back("q");
      if (!sim::row_finite(state_.qd.row(w))) names.push_back("qd");
      if (!sim::row_finite(state_.ctrl.row(w))) names.push_back("ctrl");
      arrays[std::to_string(w)] = names;
    }
    meta["nonfinite_arrays"] = arrays;
    meta["offending_terms"] = Json::array();
    meta["model_spec"] = sim::to_json_value(model_->spec());
    meta["fields"] = fields_to_json(*model_);
    meta["config"] = to_json_value(cfg_);
    return meta;
  }

 private:
  double spawn_origin(std::size_t row, std::size_t col) const {
    if (heightfield_->is_plane()) return 0.0;
    return heightfield_->spawn_origin(row, col) + 0.5 * heightfield_->patch_length();
  }

  void build() {
    const std::size_t n = num_envs();
    sim::ModelSpec spec = cfg_.scene.robot;
    spec.physics_dt = cfg_.physics_dt;
    spec.decimation = static_cast<int>(cfg_.decimation);
    spec.validate();
    if (cfg_.scene.terrain) {
      cfg_.scene.terrain->validate();
      heightfield_ = std::make_shared<const terrain::Heightfield>(
          terrain::generate_grid(*cfg_.scene.terrain, cfg_.seed));
    } else {
      heightfield_ = std::make_shared<const terrain::Heightfield>();
    }
    model_ = std::make_unique<sim::Model>(sim::Model::compile(spec, n, heightfield_));
    state_ = sim::make_state(*model_);
    robot_ = std::make_unique<entity::Entity>(
        entity::Entity::articulated(spec, cfg_.scene.default_state));
    cfg_.scene.default_state = robot_->default_state();
    ground_entity_ = std::make_unique<entity::Entity>(entity::Entity::fixture("terrain"));
    data_ = entity::EntityData(n, model_->nu(), model_->n_feet());
    pool_ = cfg_.num_threads > 1 ? std::make_unique<WorkerPool>(cfg_.num_threads) : nullptr;

    sensors_.clear();
    auto contact = std::make_unique<sensing::ContactSensor>(kContactSensor, n, model_->n_feet(),
                                                            cfg_.scene.contact_history);
    contact_ = contact.get();
    sensors_.insert(kContactSensor, std::move(contact));
    if (!cfg_.scene.height_scan.empty()) {
      sensors_.insert(kHeightScanner, std::make_unique<sensing::HeightScanner>(
                                          kHeightScanner, n, cfg_.scene.height_scan));
    }

    terrain_level_.assign(n, 0);
    terrain_col_.assign(n, 0);
    spawn_x_.assign(n, 0.0);
    WorldStreams init(cfg_.seed, "terrain_init", n, cfg_.world_offset);
    const std::size_t max_level = std::min(cfg_.scene.max_init_terrain_level, terrain_rows() - 1);
    for (std::size_t w = 0; w < n; ++w) {
      terrain_col_[w] = static_cast<std::size_t>((cfg_.world_offset + w) % heightfield_->cols());
      terrain_level_[w] = static_cast<std::size_t>(
          init[w].uniform_int(0, static_cast<std::int64_t>(max_level)));
      spawn_x_[w] = spawn_origin(terrain_level_[w], terrain_col_[w]);
    }

    episode_length_.assign(n, 0);
    nonfinite_.assign(n, 0);
    reset_ids_.clear();
    reset_ids_.reserve(n);
    common_step_ = 0;
    dumps_.clear();
    capture_ = cfg_.capture_enabled ? CaptureRing(cfg_.capture_length, state_) : CaptureRing();

    actuators_ = actuation::ActuatorSet(cfg_.actuators, *robot_, *model_, cfg_.seed,
                                        cfg_.world_offset);
    actions_ = managers::ActionManager(cfg_.actions, *this, n, cfg_.scene.default_state.joint_pos);
    commands_ = managers::CommandManager(cfg_.commands, n, step_dt(), cfg_.seed, cfg_.world_offset);
    rewards_ = managers::RewardManager(cfg_.rewards, *this, n);
    terminations_ = managers::TerminationManager(cfg_.terminations, *this, n);
    events_ = managers::EventManager(cfg_.events, *this, n, step_dt(), cfg_.seed, cfg_.world_offset);
    curriculum_ = managers::CurriculumManager(cfg_.curriculum, *this);
    obs_ = managers::ObservationManager(cfg_.observations, *this, n, cfg_.seed, cfg_.world_offset);
    build_extras();
  }

  void reset_worlds(std::span<const std::size_t> ids) {
    robot_->write_default_state(state_, ids);
    for (std::size_t w : ids) {
      state_.q(w, 0) += spawn_x_[w];
      state_.q(w, 1) += heightfield_->height_at(spawn_x_[w]);
      episode_length_[w] = 0;
    }
    events_.apply_reset(*this, ids);
    actions_.reset(*this, ids);
    actuators_.reset(ids, actions_.targets(), state_);
    for (auto& [name, s] : sensors_) {
      s->reset(ids);
      s->invalidate();
    }
    data_.refresh(*model_, state_, 0.0, ids);
    commands_.resample(ids);
    obs_.reset(ids);
  }

  void substep() {
    actuators_.apply(actions_.targets(), state_, *model_);
    sim::physics_step(*model_, state_, pool_.get());
    if (substep_hook_) substep_hook_(state_, state_.sim_step);
    data_.refresh(*model_, state_, cfg_.physics_dt);
    const sensing::SensorContext ctx = sensor_context();
    for (auto& [name, s] : sensors_) s->update(ctx, cfg_.physics_dt);
    capture_.push(state_);
    std::vector<std::size_t>* fresh = nullptr;
    for (std::size_t w = 0; w < state_.n_worlds; ++w) {
      if (nonfinite_[w]) continue;
      if (sim::row_finite(state_.q.row(w)) && sim::row_finite(state_.qd.row(w)) &&
          sim::row_finite(state_.ctrl.row(w))) {
        continue;
      }
      nonfinite_[w] = 1;
      if (!pending_dump_) {
        flagged_scratch_.clear();
        fresh = &flagged_scratch_;
      }
      if (fresh) fresh->push_back(w);
    }
    // Freeze the ring at the first bad substep of this control step so the
    // dump ends exactly at the crash frame.
    if (fresh && cfg_.capture_enabled) {
      CaptureDump d;
      d.n_worlds = static_cast<std::uint32_t>(state_.n_worlds);
      d.nq = static_cast<std::uint32_t>(state_.nq);
      d.nu = static_cast<std::uint32_t>(state_.nu);
      d.config_hash = config_hash(cfg_);
      d.meta = capture_meta(*fresh);
      d.frames = capture_.ordered();
      pending_dump_ = std::move(d);
    }
  }

  void write_pending_dump() {
    Json names = Json::array();
    for (const auto& t : rewards_.nonfinite_terms()) names.push_back("reward/" + t);
    pending_dump_->meta["offending_terms"] = names;
    std::filesystem::create_directories(cfg_.capture_dir);
    const std::string task = cfg_.task_id.empty() ? "env" : cfg_.task_id;
    const std::string path =
        (std::filesystem::path(cfg_.capture_dir) /
         ("capture_" + task + "_" +
          std::to_string(pending_dump_->meta["crash_sim_step"].get<std::int64_t>()) + ".lscap"))
            .string();
    save_capture(path, *pending_dump_);
    dumps_.push_back(path);
    pending_dump_.reset();
  }

  void build_extras() {
    extras_.clear();
    for (const auto& [name, t] : rewards_.terms()) extras_.insert("episode_reward/" + name, {0.0});
    for (const auto& [name, t] : terminations_.terms()) {
      extras_.insert("episode_termination/" + name, {0.0});
    }
    extras_.insert(std::string("episode_termination/") + managers::kNonfiniteTerm, {0.0});
    for (const auto& [name, t] : curriculum_.terms()) extras_.insert("curriculum/" + name, {0.0});
    extras_.insert("reset_count", {0.0});
  }

  void fill_extras() {
    auto it = extras_.begin();
    for (const auto& [name, t] : rewards_.terms()) (it++)->second[0] = t.last_episode_mean;
    for (const auto& [name, t] : terminations_.terms()) {
      (it++)->second[0] = static_cast<double>(t.count);
    }
    (it++)->second[0] = static_cast<double>(terminations_.nonfinite_count());
    for (const auto& [name, t] : curriculum_.terms()) {
      (it++)->second[0] = curriculum_.report(*this, name);
    }
    it->second[0] = static_cast<double>(reset_ids_.size());
  }

  EnvCfg cfg_;
  bool started_ = false;
  std::shared_ptr<const terrain::Heightfield> heightfield_;
  std::unique_ptr<sim::Model> model_;
  sim::BatchState state_;
  std::unique_ptr<entity::Entity> robot_, ground_entity_;
  entity::EntityData data_;
  std::unique_ptr<WorkerPool> pool_;
  OrderedMap<std::unique_ptr<sensing::Sensor>> sensors_;
  sensing::ContactSensor* contact_ = nullptr;

  actuation::ActuatorSet actuators_;
  managers::ActionManager actions_;
  managers::ObservationManager obs_;
  managers::RewardManager rewards_;
  managers::TerminationManager terminations_;
  managers::EventManager events_;
  managers::CommandManager commands_;
  managers::CurriculumManager curriculum_;

  std::vector<std::size_t> terrain_level_, terrain_col_;
  std::vector<double> spawn_x_;
  std::vector<std::int64_t> episode_length_;
  std::int64_t common_step_ = 0;
  std::vector<std::uint8_t> nonfinite_;
  std::vector<std::size_t> reset_ids_;
  std::vector<std::size_t> flagged_scratch_;
  CaptureRing capture_;
  std::optional<CaptureDump> pending_dump_;
  std::vector<std::string> dumps_;
  SubstepHook substep_hook_;
  Extras extras_;
};

}  // namespace lockstep::env

#include "lockstep/managers/builtin_terms.hpp"

#endif  // LOCKSTEP_ENV_ENV_HPP_
