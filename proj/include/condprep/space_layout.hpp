// Copyright 2026 The condprep Authors
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

#include <optional>
#include <string>
#include <vector>

#include "condprep/types.hpp"

namespace condprep {

/// Ordered factorization of a tensor-product Hilbert space.
///
/// Each factor has a unique label and a dimension ≥ 1. Operators and states
/// carry their layout so that partial traces and embeddings can do all index
/// bookkeeping internally; callers never permute indices by hand.
class SpaceLayout {
 public:
  struct Factor {
    std::string label;
    int dim = 0;
    bool operator==(const Factor&) const = default;
  };

  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<Factor> factors);

  static SpaceLayout single(std::string label, int dim) {
    return SpaceLayout({{std::move(label), dim}});
  }

  int factor_count() const { return static_cast<int>(factors_.size()); }
  const Factor& factor(int i) const { return factors_.at(i); }
  const std::vector<Factor>& factors() const { return factors_; }
  int total_dim() const { return total_dim_; }

  bool has(const std::string& label) const;
  /// Position of `label` in factor order; LayoutError if unknown.
  int index_of(const std::string& label) const;

  /// Sub-layout of the named factors, kept in this layout's order.
  SpaceLayout sublayout(const std::vector<std::string>& labels) const;

  /// Concatenation; label sets must be disjoint.
  SpaceLayout concat(const SpaceLayout& other) const;

  bool operator==(const SpaceLayout&) const = default;

  std::string to_string() const;

 private:
  std::vector<Factor> factors_;
  int total_dim_ = 1;
};

}  // namespace condprep
