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

#ifndef LOCKSTEP_CORE_ORDERED_MAP_HPP_
#define LOCKSTEP_CORE_ORDERED_MAP_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lockstep {

// String-keyed map that iterates in insertion order. Term maps use it so that
// concatenation layouts depend only on registration order.
template <class V>
class OrderedMap {
 public:
  using value_type = std::pair<std::string, V>;
  using iterator = typename std::vector<value_type>::iterator;
  using const_iterator = typename std::vector<value_type>::const_iterator;

  OrderedMap() = default;
  OrderedMap(std::initializer_list<value_type> items) {
    for (const auto& [k, v] : items) insert(k, v);
  }

  V& insert(std::string key, V value) {
    if (find(key) != nullptr) {
      throw std::invalid_argument("duplicate key '" + key + "'");
    }
    items_.emplace_back(std::move(key), std::move(value));
    return items_.back().second;
  }

  // Inserts or replaces, keeping the original position on replace.
  V& set(const std::string& key, V value) {
    if (V* existing = find(key)) {
      *existing = std::move(value);
      return *existing;
    }
    return insert(key, std::move(value));
  }

  bool erase(std::string_view key) {
    for (auto it = items_.begin(); it != items_.end(); ++it) {
      if (it->first == key) {
        items_.erase(it);
        return true;
      }
    }
    return false;
  }

  V* find(std::string_view key) {
    for (auto& [k, v] : items_) {
      if (k == key) return &v;
    }
    return nullptr;
  }
  const V* find(std::string_view key) const {
    for (const auto& [k, v] : items_) {
      if (k == key) return &v;
    }
    return nullptr;
  }
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  V& at(std::string_view key) {
    if (V* v = find(key)) return *v;
    throw std::out_of_range(missing_message(key));
  }
  const V& at(std::string_view key) const {
    if (const V* v = find(key)) return *v;
    throw std::out_of_range(missing_message(key));
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& kv : items_) out.push_back(kv.first);
    return out;
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  void clear() { items_.clear(); }

  iterator begin() { return items_.begin(); }
  iterator end() { return items_.end(); }
  const_iterator begin() const { return items_.begin(); }
  const_iterator end() const { return items_.end(); }

 private:
  std::string missing_message(std::string_view key) const {
    std::string msg = "unknown key '" + std::string(key) + "'; available: [";
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (i) msg += ", ";
      msg += items_[i].first;
    }
    return msg + "]";
  }

  std::vector<value_type> items_;
};

}  // namespace lockstep

#endif  // LOCKSTEP_CORE_ORDERED_MAP_HPP_
