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

#ifndef LOCKSTEP_CONFIG_SUGGEST_HPP_
#define LOCKSTEP_CONFIG_SUGGEST_HPP_

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

namespace lockstep {

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Up to `limit` candidates closest to `word`, nearest first. Candidates
// farther than half the word length are dropped.
inline std::vector<std::string> nearest(std::string_view word,
                                        const std::vector<std::string>& candidates,
                                        std::size_t limit = 3) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  const std::size_t cutoff = std::max<std::size_t>(2, word.size() / 2);
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d <= cutoff) scored.emplace_back(d, c);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < limit; ++i) out.push_back(scored[i].second);
  return out;
}

inline std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

}  // namespace lockstep

#endif  // LOCKSTEP_CONFIG_SUGGEST_HPP_
