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

#ifndef LOCKSTEP_TERRAIN_TERRAIN_HPP_
#define LOCKSTEP_TERRAIN_TERRAIN_HPP_

// Procedural 1-D terrain. Patches are laid end to end along x in row-major
// order (row = difficulty level, col = terrain type), so a patch at (r, c)
// starts at (r * cols + c) * patch_length.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lockstep/core/ordered_map.hpp"
#include "lockstep/core/rng.hpp"

namespace lockstep::terrain {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  // Linear difficulty scaling p(d) = lo + d * (hi - lo).
  double at(double d) const { return lo + d * (hi - lo); }
};

struct Flat {};
struct PyramidStairs {
  double step_width = 0.3;
  Range step_height{0.05, 0.25};
};
struct RandomGrid {
  double cell_width = 0.4;
  Range height{0.0, 0.15};
};
struct Slope {
  double max_slope = 0.4;  // rise / run at difficulty 1
};
struct UniformNoise {
  Range amplitude{0.01, 0.08};
};
struct Wave {
  Range amplitude{0.02, 0.2};
  double wavelength = 2.0;
};

using Shape = std::variant<Flat, PyramidStairs, RandomGrid, Slope, UniformNoise, Wave>;

struct SubTerrainCfg {
  Shape shape = Flat{};
  double proportion = 1.0;
};

enum class GridMode { kRandom, kCurriculum };

struct TerrainGridCfg {
  std::size_t rows = 10;
  std::size_t cols = 5;
  double patch_length = 8.0;
  double spacing = 0.05;
  GridMode mode = GridMode::kCurriculum;
  OrderedMap<SubTerrainCfg> sub_terrains;

  void validate() const;
};

inline const char* shape_name(const Shape& s) {
  constexpr const char* kNames[] = {"flat",   "pyramid_stairs", "random_grid",
                                    "slope",  "uniform_noise",  "wave"};
  return kNames[s.index()];
}

// The difficulty-scaled feature of a sub-terrain (step height, cell height,
// slope, amplitude). Flat has none.
inline std::vector<double> scaled_parameters(const Shape& shape, double d) {
  return std::visit(
      [d](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Flat>) {
          return {};
        } else if constexpr (std::is_same_v<T, PyramidStairs>) {
          return {s.step_height.at(d)};
        } else if constexpr (std::is_same_v<T, RandomGrid>) {
          return {s.height.at(d)};
        } else if constexpr (std::is_same_v<T, Slope>) {
          return {Range{0.0, s.max_slope}.at(d)};
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          return {s.amplitude.at(d)};
        } else {
          return {s.amplitude.at(d)};
        }
      },
      shape);
}

inline void validate_shape(const std::string& name, const Shape& shape) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("sub-terrain '" + name + "': " + what);
  };
  auto ordered = [&](const Range& r, const char* what) {
    if (!(r.lo <= r.hi)) fail(std::string(what) + " range must be ordered");
  };
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PyramidStairs>) {
          if (!(s.step_width > 0)) fail("step_width must be > 0");
          ordered(s.step_height, "step_height");
        } else if constexpr (std::is_same_v<T, RandomGrid>) {
          if (!(s.cell_width > 0)) fail("cell_width must be > 0");
          ordered(s.height, "height");
        } else if constexpr (std::is_same_v<T, Slope>) {
          if (!(s.max_slope >= 0)) fail("max_slope must be >= 0");
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          ordered(s.amplitude, "amplitude");
        } else if constexpr (std::is_same_v<T, Wave>) {
          if (!(s.wavelength > 0)) fail("wavelength must be > 0");
          ordered(s.amplitude, "amplitude");
        }
      },
      shape);
}

inline void TerrainGridCfg::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("terrain rows and cols must be >= 1");
  if (!(spacing > 0)) throw std::invalid_argument("terrain spacing must be > 0");
  if (!(patch_length > 0)) throw std::invalid_argument("terrain patch_length must be > 0");
  const double ratio = patch_length / spacing;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || ratio < 1.0) {
    throw std::invalid_argument("terrain patch_length must be a multiple of spacing");
  }
  if (sub_terrains.empty()) throw std::invalid_argument("terrain sub_terrains is empty");
  double total = 0.0;
  for (const auto& [name, sub] : sub_terrains) {
    validate_shape(name, sub.shape);
    if (!(sub.proportion >= 0)) {
      throw std::invalid_argument("sub-terrain '" + name + "': proportion must be >= 0");
    }
    total += sub.proportion;
  }
  if (!(total > 0)) throw std::invalid_argument("terrain proportions sum to zero");
}

struct Patch {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t type = 0;  // index into the sub-terrain map
  double difficulty = 0.0;
  double origin = 0.0;
  std::vector<double> heights;
};

// An empty heightfield is the ground plane z = 0.
class Heightfield {
 public:
  Heightfield() = default;
  Heightfield(std::size_t rows, std::size_t cols, double patch_length, double spacing,
              std::vector<std::string> type_names, std::vector<Patch> patches)
      : rows_(rows),
        cols_(cols),
        patch_length_(patch_length),
        spacing_(spacing),
        samples_(static_cast<std::size_t>(std::llround(patch_length / spacing)) + 1),
        type_names_(std::move(type_names)),
        patches_(std::move(patches)) {
    inv_patch_length_ = 1.0 / patch_length_;
    inv_spacing_ = 1.0 / spacing_;
  }

  bool is_plane() const { return patches_.empty(); }
  std::size_t rows() const { return is_plane() ? 1 : rows_; }
  std::size_t cols() const { return is_plane() ? 1 : cols_; }
  double patch_length() const { return patch_length_; }
  double spacing() const { return spacing_; }
  std::size_t samples_per_patch() const { return samples_; }
  double total_length() const { return static_cast<double>(patches_.size()) * patch_length_; }
  const std::vector<Patch>& patches() const { return patches_; }
  const std::vector<std::string>& type_names() const { return type_names_; }
  const Patch& patch(std::size_t row, std::size_t col) const {
    check_cell(row, col);
    return patches_[row * cols_ + col];
  }

  // Piecewise-linear between samples; clamps outside the grid.
  double height_at(double x) const {
    if (patches_.empty()) return 0.0;
    if (!(x > 0.0)) return patches_.front().heights.front();
    const std::size_t n = patches_.size();
    std::size_t p = static_cast<std::size_t>(x * inv_patch_length_);
    if (p >= n) {
      if (x >= total_length()) return patches_.back().heights.back();
      p = n - 1;
    }
    const double local = x - static_cast<double>(p) * patch_length_;
    const std::vector<double>& h = patches_[p].heights;
    double pos = local * inv_spacing_;
    if (pos < 0.0) pos = 0.0;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= samples_ - 1) i = samples_ - 2;
    const double t = pos - static_cast<double>(i);
    return h[i] + t * (h[i + 1] - h[i]);
  }

  double spawn_origin(std::size_t row, std::size_t col) const {
    if (patches_.empty()) {
      if (row != 0 || col != 0) {
        throw std::out_of_range("plane terrain has a single cell (0, 0)");
      }
      return 0.0;
    }
    check_cell(row, col);
    return static_cast<double>(row * cols_ + col) * patch_length_;
  }

 private:
  void check_cell(std::size_t row, std::size_t col) const {
    if (row >= rows_ || col >= cols_) {
      throw std::out_of_range("terrain cell (" + std::to_string(row) + ", " +
                              std::to_string(col) + ") outside " + std::to_string(rows_) +
                              "x" + std::to_string(cols_) + " grid");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double patch_length_ = 1.0;
  double spacing_ = 1.0;
  double inv_patch_length_ = 1.0;
  double inv_spacing_ = 1.0;
  std::size_t samples_ = 2;
  std::vector<std::string> type_names_;
  std::vector<Patch> patches_;
};

namespace detail {

inline std::size_t draw_type(RngStream& rng, const std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    if (u < cumulative[i]) return i;
  }
  return cumulative.size() - 1;
}

inline std::vector<double> make_profile(const Shape& shape, double d, double length,
                                        double spacing, std::size_t n, RngStream& rng) {
  std::vector<double> h(n, 0.0);
  auto x_of = [&](std::size_t i) { return static_cast<double>(i) * spacing; };
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PyramidStairs>) {
          // Up-then-down staircase, symmetric about the centre.
          const double rise = s.step_height.at(d);
          for (std::size_t i = 0; i < n; ++i) {
            const double edge = std::min(x_of(i), length - x_of(i));
            const double steps = std::floor(edge / s.step_width + 1e-9);
            h[i] = steps * rise;
          }
        } else if constexpr (std::is_same_v<T, RandomGrid>) {
          const double top = s.height.at(d);
          const auto cells =
              static_cast<std::size_t>(std::ceil(length / s.cell_width - 1e-9));
          std::vector<double> cell(cells + 1, 0.0);
          for (std::size_t c = 1; c + 1 < cells; ++c) cell[c] = rng.uniform(0.0, top);
          for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(x_of(i) / s.cell_width + 1e-9);
            h[i] = cell[std::min(c, cells)];
          }
        } else if constexpr (std::is_same_v<T, Slope>) {
          const double slope = Range{0.0, s.max_slope}.at(d);
          for (std::size_t i = 0; i < n; ++i) {
            h[i] = slope * std::min(x_of(i), length - x_of(i));
          }
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          // Coarse knots every 4 samples, linearly interpolated.
          const double amp = s.amplitude.at(d);
          const std::size_t stride = 4;
          const std::size_t knots = (n - 1 + stride - 1) / stride + 1;
          std::vector<double> k(knots, 0.0);
          for (std::size_t j = 1; j + 1 < knots; ++j) k[j] = rng.uniform(0.0, amp);
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i / stride;
            if (j + 1 >= knots) {
              h[i] = k[knots - 1];
              continue;
            }
            const double x0 = static_cast<double>(j * stride);
            const double x1 = std::min(static_cast<double>((j + 1) * stride),
                                       static_cast<double>(n - 1));
            const double t = (static_cast<double>(i) - x0) / (x1 - x0);
            h[i] = k[j] + t * (k[j + 1] - k[j]);
          }
        } else if constexpr (std::is_same_v<T, Wave>) {
          // Wavelength snapped so the patch holds a whole number of periods.
          const double amp = s.amplitude.at(d);
          const double periods = std::max(1.0, std::round(length / s.wavelength));
          const double lambda = length / periods;
          for (std::size_t i = 0; i < n; ++i) {
            h[i] = amp * std::sin(2.0 * std::numbers::pi * x_of(i) / lambda);
          }
        }
      },
      shape);
  // Patch ends sit at ground level so neighbours stitch exactly.
  h.front() = 0.0;
  h.back() = 0.0;
  return h;
}

}  // namespace detail

inline double curriculum_difficulty(std::size_t row, std::size_t rows) {
  if (rows <= 1) return 0.0;
  return static_cast<double>(row) / static_cast<double>(rows - 1);
}

inline Heightfield generate_grid(const TerrainGridCfg& cfg, std::uint64_t seed) {
  cfg.validate();
  RngStream rng(seed, fnv1a64("terrain"), 0);
  std::vector<double> cumulative;
  std::vector<std::string> names;
  double acc = 0.0;
  for (const auto& [name, sub] : cfg.sub_terrains) {
    acc += sub.proportion;
    cumulative.push_back(acc);
    names.push_back(name);
  }
  const auto n = static_cast<std::size_t>(std::llround(cfg.patch_length / cfg.spacing)) + 1;

  std::vector<std::size_t> column_type(cfg.cols);
  if (cfg.mode == GridMode::kCurriculum) {
    for (auto& t : column_type) t = detail::draw_type(rng, cumulative);
  }

  std::vector<Patch> patches;
  patches.reserve(cfg.rows * cfg.cols);
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    for (std::size_t c = 0; c < cfg.cols; ++c) {
      Patch p;
      p.row = r;
      p.col = c;
      if (cfg.mode == GridMode::kCurriculum) {
        p.type = column_type[c];
        p.difficulty = curriculum_difficulty(r, cfg.rows);
      } else {
        p.type = detail::draw_type(rng, cumulative);
        p.difficulty = rng.uniform();
      }
      p.origin = static_cast<double>(r * cfg.cols + c) * cfg.patch_length;
      const SubTerrainCfg& sub = std::next(cfg.sub_terrains.begin(), p.type)->second;
      p.heights = detail::make_profile(sub.shape, p.difficulty, cfg.patch_length,
                                       cfg.spacing, n, rng);
      patches.push_back(std::move(p));
    }
  }
  return Heightfield(cfg.rows, cfg.cols, cfg.patch_length, cfg.spacing, std::move(names),
                     std::move(patches));
}

// Text export:
//   lockstep-heightfield 1
//   rows <R> cols <C> patch_length <L> spacing <dx> samples <n>
//   types <T> <name_0> ... <name_T-1>
//   then per patch: patch <row> <col> <type> <difficulty> <origin>
//                   followed by one line of n height samples
// Numbers are written with 17 significant digits so the round trip is exact.
inline std::string export_text(const Heightfield& hf) {
  std::ostringstream out;
  out.precision(17);
  out << "lockstep-heightfield 1\n";
  out << "rows " << hf.rows() << " cols " << hf.cols() << " patch_length " << hf.patch_length()
      << " spacing " << hf.spacing() << " samples "
      << (hf.is_plane() ? 0 : hf.samples_per_patch()) << "\n";
  out << "types " << hf.type_names().size();
  for (const auto& n : hf.type_names()) out << ' ' << n;
  out << "\n";
  for (const auto& p : hf.patches()) {
    out << "patch " << p.row << ' ' << p.col << ' ' << p.type << ' ' << p.difficulty << ' '
        << p.origin << "\n";
    for (std::size_t i = 0; i < p.heights.size(); ++i) {
      if (i) out << ' ';
      out << p.heights[i];
    }
    out << "\n";
  }
  return out.str();
}

inline Heightfield import_text(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "lockstep-heightfield") {
    throw std::runtime_error("not a lockstep heightfield file");
  }
  if (version != 1) {
    throw std::runtime_error("unsupported heightfield version " + std::to_string(version));
  }
  std::size_t rows = 0, cols = 0, samples = 0, types = 0;
  double length = 0, spacing = 0;
  std::string k1, k2, k3, k4, k5, k6;
  if (!(in >> k1 >> rows >> k2 >> cols >> k3 >> length >> k4 >> spacing >> k5 >> samples >>
        k6 >> types)) {
    throw std::runtime_error("truncated heightfield header");
  }
  std::vector<std::string> names(types);
  for (auto& n : names) in >> n;
  if (samples == 0) return Heightfield();
  std::vector<Patch> patches(rows * cols);
  for (auto& p : patches) {
    if (!(in >> tag >> p.row >> p.col >> p.type >> p.difficulty >> p.origin) || tag != "patch") {
      throw std::runtime_error("truncated heightfield patch record");
    }
    p.heights.resize(samples);
    for (auto& h : p.heights) {
      if (!(in >> h)) throw std::runtime_error("truncated heightfield samples");
    }
  }
  return Heightfield(rows, cols, length, spacing, std::move(names), std::move(patches));
}

}  // namespace lockstep::terrain

#endif  // LOCKSTEP_TERRAIN_TERRAIN_HPP_
