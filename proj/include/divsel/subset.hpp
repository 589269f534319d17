// Copyright 2026 The Authors.
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "divsel/error.hpp"

namespace divsel {

using Index = Eigen::Index;

// A selection gamma over items [0, M): strictly increasing indices.
class Subset {
 public:
  Subset() = default;

  // Indices must already be strictly increasing.
  explicit Subset(std::vector<Index> indices) : indices_(std::move(indices)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] < 0) throw InvalidArgument("Subset: negative index");
      if (i > 0 && indices_[i] <= indices_[i - 1]) {
        throw InvalidArgument("Subset: indices must be strictly increasing");
      }
    }
  }

  // Sorts; duplicates are rejected.
  static Subset from_unsorted(std::vector<Index> indices) {
    std::sort(indices.begin(), indices.end());
    return Subset(std::move(indices));
  }

  static Subset from_mask(const std::vector<bool>& mask) {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) idx.push_back(static_cast<Index>(i));
    }
    return Subset(std::move(idx));
  }

  static Subset from_bits(std::uint64_t bits, Index m) {
    std::vector<Index> idx;
    for (Index i = 0; i < m; ++i) {
      if ((bits >> i) & 1ULL) idx.push_back(i);
    }
    return Subset(std::move(idx));
  }

  const std::vector<Index>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  Index operator[](std::size_t i) const { return indices_[i]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  bool contains(Index i) const { return std::binary_search(indices_.begin(), indices_.end(), i); }

  // Throws unless every index is below m.
  void check_bound(Index m) const {
    if (!indices_.empty() && indices_.back() >= m) {
      throw InvalidArgument("Subset: index " + std::to_string(indices_.back()) +
                            " out of range for " + std::to_string(m) + " items");
    }
  }

  std::vector<bool> mask(Index m) const {
    std::vector<bool> out(static_cast<std::size_t>(m), false);
    for (Index i : indices_) out[static_cast<std::size_t>(i)] = true;
    return out;
  }

  // Augmented indicator [gamma; 1] of length m + 1.
  Eigen::VectorXd augmented(Index m) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m + 1);
    for (Index i : indices_) v(i) = 1.0;
    v(m) = 1.0;
    return v;
  }

  friend bool operator==(const Subset&, const Subset&) = default;
  friend auto operator<=>(const Subset& a, const Subset& b) { return a.indices_ <=> b.indices_; }

 private:
  std::vector<Index> indices_;
};

struct SubsetHash {
  std::size_t operator()(const Subset& s) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (Index i : s) {
      h ^= static_cast<std::size_t>(i) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h ^ s.size();
  }
};

inline std::string to_string(const Subset& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

}  // namespace divsel
