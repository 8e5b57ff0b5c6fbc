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

#ifndef LOCKSTEP_CORE_WORLD_ARRAY_HPP_
#define LOCKSTEP_CORE_WORLD_ARRAY_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace lockstep {

// Row-major (worlds x cols) buffer. Every batched quantity in the library
// carries the world index as its leading dimension.
template <class T>
class WorldArray {
 public:
  WorldArray() = default;
  WorldArray(std::size_t worlds, std::size_t cols, T fill = T{})
      : worlds_(worlds), cols_(cols), data_(worlds * cols, fill) {}

  std::size_t worlds() const { return worlds_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t w, std::size_t c) { return data_[w * cols_ + c]; }
  const T& operator()(std::size_t w, std::size_t c) const {
    return data_[w * cols_ + c];
  }

  std::span<T> row(std::size_t w) { return {data_.data() + w * cols_, cols_}; }
  std::span<const T> row(std::size_t w) const {
    return {data_.data() + w * cols_, cols_};
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }
  void fill_row(std::size_t w, const T& v) {
    std::fill_n(data_.begin() + w * cols_, cols_, v);
  }

  friend bool operator==(const WorldArray&, const WorldArray&) = default;

 private:
  std::size_t worlds_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace lockstep

#endif  // LOCKSTEP_CORE_WORLD_ARRAY_HPP_
