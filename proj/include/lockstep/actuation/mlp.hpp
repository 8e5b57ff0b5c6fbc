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

#ifndef LOCKSTEP_ACTUATION_MLP_HPP_
#define LOCKSTEP_ACTUATION_MLP_HPP_

// Feed-forward network used by the learned actuator, plus its weights file.
//
// File layout (little-endian):
//   char[8]  magic "LSMLP\0\0\0"
//   u32      version (currently 1)
//   u32      layer count
//   per layer:
//     u32 in, u32 out, u32 activation-name length, activation name bytes
//     f64[out * in] weights, row-major (one row per output)
//     f64[out]      biases

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lockstep::actuation {

inline constexpr std::array<char, 8> kMlpMagic = {'L', 'S', 'M', 'L', 'P', 0, 0, 0};
inline constexpr std::uint32_t kMlpVersion = 1;

enum class Activation { kIdentity, kRelu, kTanh, kElu, kSoftsign };

inline Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "elu") return Activation::kElu;
  if (name == "softsign") return Activation::kSoftsign;
  throw std::invalid_argument("unknown activation '" + name +
                              "' (expected identity, relu, tanh, elu or softsign)");
}

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kElu: return "elu";
    case Activation::kSoftsign: return "softsign";
  }
  return "identity";
}

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kTanh: return std::tanh(x);
    case Activation::kElu: return x > 0.0 ? x : std::expm1(x);
    case Activation::kSoftsign: return x / (1.0 + std::abs(x));
  }
  return x;
}

struct MlpLayer {
  std::size_t in = 0, out = 0;
  Activation activation = Activation::kIdentity;
  std::vector<double> weights;  // out x in
  std::vector<double> bias;     // out
};

class MlpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<MlpLayer> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const MlpLayer& l = layers_[i];
      const std::string tag = "layer " + std::to_string(i);
      if (l.in == 0 || l.out == 0) throw MlpError(tag + ": zero-sized shape");
      if (l.weights.size() != l.in * l.out) throw MlpError(tag + ": weight count mismatch");
      if (l.bias.size() != l.out) throw MlpError(tag + ": bias count mismatch");
      if (i > 0 && l.in != layers_[i - 1].out) {
        throw MlpError(tag + ": input width " + std::to_string(l.in) +
                       " does not match previous output width " +
                       std::to_string(layers_[i - 1].out));
      }
      width_ = std::max({width_, l.in, l.out});
    }
    a_.resize(width_);
    b_.resize(width_);
  }

  const std::vector<MlpLayer>& layers() const { return layers_; }
  std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t output_size() const { return layers_.empty() ? 0 : layers_.back().out; }

  // Not reentrant: uses member scratch to stay allocation-free.
  double forward_scalar(std::span<const double> x) {
    std::copy(x.begin(), x.end(), a_.begin());
    for (const MlpLayer& l : layers_) {
      for (std::size_t o = 0; o < l.out; ++o) {
        const double* row = l.weights.data() + o * l.in;
        double acc = l.bias[o];
        for (std::size_t i = 0; i < l.in; ++i) acc += row[i] * a_[i];
        b_[o] = activate(l.activation, acc);
      }
      std::swap(a_, b_);
    }
    return a_[0];
  }

 private:
  std::vector<MlpLayer> layers_;
  std::size_t width_ = 0;
  std::vector<double> a_, b_;
};

namespace detail {
template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <typename T>
T read_pod(std::ifstream& in, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) throw MlpError("truncated at " + what);
  return v;
}
}  // namespace detail

inline void save_mlp(const std::string& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MlpError("cannot open '" + path + "' for writing");
  out.write(kMlpMagic.data(), kMlpMagic.size());
  detail::write_pod<std::uint32_t>(out, kMlpVersion);
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const MlpLayer& l : net.layers()) {
    const std::string act = activation_name(l.activation);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.in));
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.out));
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(act.size()));
    out.write(act.data(), static_cast<std::streamsize>(act.size()));
    for (double w : l.weights) detail::write_pod(out, w);
    for (double b : l.bias) detail::write_pod(out, b);
  }
  if (!out) throw MlpError("write failed for '" + path + "'");
}

inline Mlp load_mlp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MlpError("MLP weights file '" + path + "' not found");
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMlpMagic) {
    throw MlpError("'" + path + "' is not an MLP weights file");
  }
  const auto version = detail::read_pod<std::uint32_t>(in, "version");
  if (version != kMlpVersion) {
    throw MlpError("unsupported MLP weights version " + std::to_string(version));
  }
  const auto n = detail::read_pod<std::uint32_t>(in, "layer count");
  if (n == 0 || n > 64) throw MlpError("implausible layer count " + std::to_string(n));
  std::vector<MlpLayer> layers(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string tag = "layer " + std::to_string(i);
    MlpLayer& l = layers[i];
    l.in = detail::read_pod<std::uint32_t>(in, tag + " shape");
    l.out = detail::read_pod<std::uint32_t>(in, tag + " shape");
    const auto len = detail::read_pod<std::uint32_t>(in, tag + " activation");
    if (len > 32) throw MlpError(tag + ": activation name too long");
    std::string act(len, '\0');
    if (!in.read(act.data(), len)) throw MlpError("truncated at " + tag + " activation");
    try {
      l.activation = parse_activation(act);
    } catch (const std::invalid_argument& e) {
      throw MlpError(tag + ": " + e.what());
    }
    if (l.in == 0 || l.out == 0 || l.in * l.out > (1u << 24)) {
      throw MlpError(tag + ": bad shape " + std::to_string(l.in) + "x" + std::to_string(l.out));
    }
    l.weights.resize(l.in * l.out);
    l.bias.resize(l.out);
    for (double& w : l.weights) w = detail::read_pod<double>(in, tag + " weights");
    for (double& b : l.bias) b = detail::read_pod<double>(in, tag + " biases");
  }
  return Mlp(std::move(layers));
}

}  // namespace lockstep::actuation

#endif  // LOCKSTEP_ACTUATION_MLP_HPP_
