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

#ifndef LOCKSTEP_SIM_MODEL_HPP_
#define LOCKSTEP_SIM_MODEL_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/core/ordered_map.hpp"
#include "lockstep/core/parallel.hpp"
#include "lockstep/sim/kinematics.hpp"
#include "lockstep/sim/model_spec.hpp"
#include "lockstep/sim/state.hpp"
#include "lockstep/terrain/terrain.hpp"

namespace lockstep::sim {

// Read access to a field for the hot loops. Shared fields have stride 0.
struct FieldView {
  const double* data = nullptr;
  std::size_t stride = 0;
  double operator()(std::size_t w, std::size_t i = 0) const { return data[w * stride + i]; }
};

// A randomizable model parameter: one shared row, or one row per world.
class Field {
 public:
  Field() = default;
  Field(std::vector<double> base) : base_(base), values_(std::move(base)) {}

  std::size_t width() const { return base_.size(); }
  bool expanded() const { return expanded_; }
  // Value at compile time (or registration); randomization is relative to it.
  std::span<const double> base() const { return base_; }
  double base(std::size_t i) const { return base_[i]; }

  double value(std::size_t w, std::size_t i = 0) const {
    return expanded_ ? values_[w * width() + i] : values_[i];
  }
  std::span<const double> values() const { return values_; }
  FieldView view() const { return {values_.data(), expanded_ ? width() : 0}; }

 private:
  friend class Model;
  std::vector<double> base_;
  std::vector<double> values_;
  bool expanded_ = false;
};

class Model;

using Stage = std::function<void(BatchState&, std::size_t, std::size_t)>;

// Frozen stage list specialized to one shared/expanded field layout. The
// closures capture raw field pointers and strides, so any layout change must
// go through Model::expand_field, which rebuilds the pipeline.
struct StepPipeline {
  std::vector<std::string> names;
  std::vector<Stage> stages;
  std::uint64_t generation = 0;

  void run(BatchState& s, std::size_t begin, std::size_t end) const {
    for (const Stage& stage : stages) stage(s, begin, end);
  }
};

namespace fields {
inline constexpr const char* kBaseMass = "base_mass";
inline constexpr const char* kBaseInertia = "base_inertia";
inline constexpr const char* kLinkMass = "link_mass";
inline constexpr const char* kRotorInertia = "rotor_inertia";
inline constexpr const char* kDamping = "damping";
inline constexpr const char* kFriction = "friction";
inline constexpr const char* kContactStiffness = "contact_stiffness";
inline constexpr const char* kContactDamping = "contact_damping";
inline constexpr const char* kTangentialDamping = "tangential_damping";
}  // namespace fields

StepPipeline build_pipeline(const Model& model, std::uint64_t generation);

class Model {
 public:
  static Model compile(const ModelSpec& spec, std::size_t n_worlds,
                       std::shared_ptr<const terrain::Heightfield> ground = nullptr) {
    spec.validate();
    if (n_worlds < 1) throw SpecError("n_worlds must be >= 1");
    Model m;
    m.spec_ = std::make_shared<const ModelSpec>(spec);
    m.topology_ = std::make_shared<const Topology>(Topology::from(spec));
    m.n_worlds_ = n_worlds;
    m.terrain_ = ground ? std::move(ground) : std::make_shared<const terrain::Heightfield>();

    std::vector<double> link_mass, rotor, damping;
    for (const auto& j : spec.joints) {
      link_mass.push_back(j.link_mass);
      rotor.push_back(j.rotor_inertia);
      damping.push_back(j.damping);
    }
    m.fields_.insert(fields::kBaseMass, Field({spec.base_mass}));
    m.fields_.insert(fields::kBaseInertia, Field({spec.base_inertia}));
    m.fields_.insert(fields::kLinkMass, Field(link_mass));
    m.fields_.insert(fields::kRotorInertia, Field(rotor));
    m.fields_.insert(fields::kDamping, Field(damping));
    m.fields_.insert(fields::kFriction, Field({spec.contact.friction}));
    m.fields_.insert(fields::kContactStiffness, Field({spec.contact.stiffness}));
    m.fields_.insert(fields::kContactDamping, Field({spec.contact.damping}));
    m.fields_.insert(fields::kTangentialDamping, Field({spec.contact.tangential_damping}));

    double total = spec.base_mass;
    for (double lm : link_mass) total += lm;
    m.mass_diag_ = {total, total, spec.base_inertia};
    for (double r : rotor) m.mass_diag_.push_back(r);
    m.pipeline_ = build_pipeline(m, 0);
    return m;
  }

  Model(Model&&) = default;
  Model& operator=(Model&&) = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelSpec& spec() const { return *spec_; }
  const Topology& topology() const { return *topology_; }
  const terrain::Heightfield& terrain() const { return *terrain_; }
  std::shared_ptr<const terrain::Heightfield> terrain_ptr() const { return terrain_; }
  std::size_t n_worlds() const { return n_worlds_; }
  std::size_t nq() const { return spec_->nq(); }
  std::size_t nu() const { return spec_->nu(); }
  std::size_t n_feet() const { return spec_->feet.size(); }
  double physics_dt() const { return spec_->physics_dt; }

  // diag(M_total, M_total, I_base, I_1..I_k) from compile-time values.
  const std::vector<double>& mass_diag() const { return mass_diag_; }

  const OrderedMap<Field>& fields() const { return fields_; }
  bool has_field(const std::string& name) const { return fields_.contains(name); }
  const Field& field(const std::string& name) const { return lookup(name); }

  // Extra randomizable parameters owned by other subsystems (actuator gains).
  void add_field(const std::string& name, std::vector<double> values) {
    if (fields_.contains(name)) throw std::invalid_argument("field '" + name + "' exists");
    fields_.insert(name, Field(std::move(values)));
    pipeline_ = build_pipeline(*this, pipeline_.generation);
  }

  // Replicates a shared field per world and rebuilds the pipeline. No-op when
  // already expanded.
  std::uint64_t expand_field(const std::string& name) {
    Field& f = lookup(name);
    if (f.expanded_) return pipeline_.generation;
    std::vector<double> wide;
    wide.reserve(n_worlds_ * f.width());
    for (std::size_t w = 0; w < n_worlds_; ++w) {
      wide.insert(wide.end(), f.values_.begin(), f.values_.end());
    }
    f.values_ = std::move(wide);
    f.expanded_ = true;
    pipeline_ = build_pipeline(*this, pipeline_.generation + 1);
    return pipeline_.generation;
  }

  // Writes one world's entry of an expanded field.
  void set_field_value(const std::string& name, std::size_t w, std::size_t i, double v) {
    Field& f = lookup(name);
    if (!f.expanded_) {
      throw std::logic_error("field '" + name + "' is shared; expand it before per-world writes");
    }
    if (w >= n_worlds_ || i >= f.width()) throw std::out_of_range("field index out of range");
    f.values_[w * f.width() + i] = v;
  }

  std::uint64_t generation() const { return pipeline_.generation; }
  const StepPipeline& pipeline() const { return pipeline_; }

 private:
  Model() = default;

  Field& lookup(const std::string& name) {
    if (Field* f = fields_.find(name)) return *f;
    throw std::invalid_argument("unknown model field '" + name + "'; randomizable fields: [" +
                                join_keys() + "]");
  }
  const Field& lookup(const std::string& name) const {
    return const_cast<Model*>(this)->lookup(name);
  }
  std::string join_keys() const {
    std::string s;
    for (const auto& k : fields_.keys()) s += (s.empty() ? "" : ", ") + k;
    return s;
  }

  std::shared_ptr<const ModelSpec> spec_;
  std::shared_ptr<const Topology> topology_;
  std::shared_ptr<const terrain::Heightfield> terrain_;
  std::size_t n_worlds_ = 0;
  OrderedMap<Field> fields_;
  std::vector<double> mass_diag_;
  StepPipeline pipeline_;
};

inline BatchState make_state(const Model& m) {
  return BatchState(m.n_worlds(), m.nq(), m.nu(), m.n_feet());
}

// Stage order per physics step: kinematics, applied forces, contact, integrate.
inline StepPipeline build_pipeline(const Model& model, std::uint64_t generation) {
  struct Ctx {
    std::shared_ptr<const Topology> topo;
    std::shared_ptr<const terrain::Heightfield> ground;
    std::size_t nq, nu, n_feet;
    double dt, g;
    FieldView base_mass, base_inertia, link_mass, rotor, damping;
    FieldView friction, kn, cn, kt;
  };
  auto ctx = std::make_shared<Ctx>();
  ctx->topo = std::shared_ptr<const Topology>(std::make_shared<Topology>(model.topology()));
  ctx->ground = model.terrain_ptr();
  ctx->nq = model.nq();
  ctx->nu = model.nu();
  ctx->n_feet = model.n_feet();
  ctx->dt = model.spec().physics_dt;
  ctx->g = model.spec().gravity;
  ctx->base_mass = model.field(fields::kBaseMass).view();
  ctx->base_inertia = model.field(fields::kBaseInertia).view();
  ctx->link_mass = model.field(fields::kLinkMass).view();
  ctx->rotor = model.field(fields::kRotorInertia).view();
  ctx->damping = model.field(fields::kDamping).view();
  ctx->friction = model.field(fields::kFriction).view();
  ctx->kn = model.field(fields::kContactStiffness).view();
  ctx->cn = model.field(fields::kContactDamping).view();
  ctx->kt = model.field(fields::kTangentialDamping).view();

  StepPipeline p;
  p.generation = generation;

  p.names.emplace_back("kinematics");
  p.stages.emplace_back([ctx](BatchState& s, std::size_t b, std::size_t e) {
    auto& sc = s.scratch;
    for (std::size_t w = b; w < e; ++w) {
      forward_kinematics(*ctx->topo, s.q.row(w).data(), sc.pivot.row(w).data(),
                         sc.tip.row(w).data(), sc.angle.row(w).data(),
                         sc.sin_angle.row(w).data(), sc.cos_angle.row(w).data());
    }
  });

  // Actuator torques, link gravity, joint damping, and the base push.
  p.names.emplace_back("applied_forces");
  p.stages.emplace_back([ctx](BatchState& s, std::size_t b, std::size_t e) {
    const std::size_t k = ctx->nu;
    const double g = ctx->g;
    for (std::size_t w = b; w < e; ++w) {
      double* tau = s.scratch.tau.row(w).data();
      const double* qd = s.qd.row(w).data();
      const double* u = s.ctrl.row(w).data();
      const double* sin_a = s.scratch.sin_angle.row(w).data();
      tau[0] = s.ext_force(w, 0);
      tau[1] = s.ext_force(w, 1);
      tau[2] = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double half = 0.5 * ctx->topo->length[j];
        tau[3 + j] = u[j] - ctx->link_mass(w, j) * g * half * sin_a[j] -
                     ctx->damping(w, j) * qd[3 + j];
      }
      s.applied_force(w, 0) = s.ext_force(w, 0);
      s.applied_force(w, 1) = s.ext_force(w, 1);
      s.ext_force(w, 0) = 0.0;
      s.ext_force(w, 1) = 0.0;
    }
  });

  // Unilateral spring-damper normal force with clamped viscous friction,
  // mapped to generalized forces through the foot Jacobian transpose.
  p.names.emplace_back("contact");
  p.stages.emplace_back([ctx](BatchState& s, std::size_t b, std::size_t e) {
    const Topology& topo = *ctx->topo;
    const terrain::Heightfield& ground = *ctx->ground;
    for (std::size_t w = b; w < e; ++w) {
      const double* q = s.q.row(w).data();
      const double* qd = s.qd.row(w).data();
      const Vec2* pivot = s.scratch.pivot.row(w).data();
      const Vec2* tip = s.scratch.tip.row(w).data();
      double* tau = s.scratch.tau.row(w).data();
      const Vec2 base{q[0], q[1]};
      const double mu = ctx->friction(w);
      const double kn = ctx->kn(w);
      const double cn = ctx->cn(w);
      const double kt = ctx->kt(w);
      for (std::size_t f = 0; f < ctx->n_feet; ++f) {
        const auto& chain = topo.foot_chain[f];
        const Vec2 p = tip[static_cast<std::size_t>(topo.feet[f])];
        const Vec2 lb = lever(p, base);
        double vx = qd[0] + lb.x * qd[2];
        double vz = qd[1] + lb.z * qd[2];
        for (int j : chain) {
          const Vec2 l = lever(p, pivot[static_cast<std::size_t>(j)]);
          vx += l.x * qd[3 + static_cast<std::size_t>(j)];
          vz += l.z * qd[3 + static_cast<std::size_t>(j)];
        }
        const double phi = ground.height_at(p.x) - p.z;
        double fn = 0.0;
        double ft = 0.0;
        if (phi > 0.0) {
          fn = std::max(0.0, kn * phi - cn * vz);
          const double cap = mu * fn;
          ft = std::clamp(-kt * vx, -cap, cap);
        }
        s.contact.normal_force(w, f) = fn;
        s.contact.tangential_force(w, f) = ft;
        s.contact.pos_x(w, f) = p.x;
        s.contact.pos_z(w, f) = p.z;
        s.contact.vel_x(w, f) = vx;
        s.contact.vel_z(w, f) = vz;
        s.contact.in_contact(w, f) = phi > 0.0 ? 1 : 0;
        if (fn == 0.0 && ft == 0.0) continue;
        tau[0] += ft;
        tau[1] += fn;
        tau[2] += lb.x * ft + lb.z * fn;
        for (int j : chain) {
          const Vec2 l = lever(p, pivot[static_cast<std::size_t>(j)]);
          tau[3 + static_cast<std::size_t>(j)] += l.x * ft + l.z * fn;
        }
      }
    }
  });

  // Semi-implicit Euler with the diagonal mass matrix; gravity on the base
  // enters as an acceleration so free fall is exact in floating point.
  p.names.emplace_back("integrate");
  p.stages.emplace_back([ctx](BatchState& s, std::size_t b, std::size_t e) {
    const std::size_t k = ctx->nu;
    const double dt = ctx->dt;
    for (std::size_t w = b; w < e; ++w) {
      double* q = s.q.row(w).data();
      double* qd = s.qd.row(w).data();
      const double* tau = s.scratch.tau.row(w).data();
      double total = ctx->base_mass(w);
      for (std::size_t j = 0; j < k; ++j) total += ctx->link_mass(w, j);
      qd[0] += (tau[0] / total) * dt;
      qd[1] += (tau[1] / total - ctx->g) * dt;
      qd[2] += (tau[2] / ctx->base_inertia(w)) * dt;
      for (std::size_t j = 0; j < k; ++j) qd[3 + j] += (tau[3 + j] / ctx->rotor(w, j)) * dt;
      for (std::size_t i = 0; i < ctx->nq; ++i) q[i] += qd[i] * dt;
      s.time[w] += dt;
    }
  });
  return p;
}

// Advances every world by one physics_dt.
inline void physics_step(const Model& model, BatchState& state, WorkerPool* pool = nullptr) {
  const StepPipeline& pipeline = model.pipeline();
  constexpr std::size_t kBlock = 256;
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; b += kBlock) {
      pipeline.run(state, b, std::min(end, b + kBlock));
    }
  };
  if (pool) {
    pool->run(state.n_worlds, run);
  } else {
    run(0, state.n_worlds);
  }
  ++state.sim_step;
}

}  // namespace lockstep::sim

#endif  // LOCKSTEP_SIM_MODEL_HPP_
