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

#include "condprep/space_layout.hpp"

#include <algorithm>
#include <sstream>

namespace condprep {

SpaceLayout::SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) {
    throw LayoutError("layout needs at least one factor");
  }
  total_dim_ = 1;
  for (const auto& f : factors_) {
    if (f.dim < 1) {
      throw LayoutError("factor '" + f.label + "' has non-positive dimension " +
                        std::to_string(f.dim));
    }
    total_dim_ *= f.dim;
  }
  for (size_t i = 0; i < factors_.size(); ++i) {
    for (size_t j = i + 1; j < factors_.size(); ++j) {
      if (factors_[i].label == factors_[j].label) {
        throw LayoutError("duplicate factor label '" + factors_[i].label + "'");
      }
    }
  }
}

bool SpaceLayout::has(const std::string& label) const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [&](const Factor& f) { return f.label == label; });
}

int SpaceLayout::index_of(const std::string& label) const {
  for (size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].label == label) return static_cast<int>(i);
  }
  throw LayoutError("unknown factor label '" + label + "' in layout " + to_string());
}

SpaceLayout SpaceLayout::sublayout(const std::vector<std::string>& labels) const {
  for (const auto& l : labels) index_of(l);  // reject unknown labels up front
  std::vector<Factor> kept;
  for (const auto& f : factors_) {
    if (std::find(labels.begin(), labels.end(), f.label) != labels.end()) {
      kept.push_back(f);
    }
  }
  return SpaceLayout(std::move(kept));
}

SpaceLayout SpaceLayout::concat(const SpaceLayout& other) const {
  std::vector<Factor> all = factors_;
  for (const auto& f : other.factors_) {
    if (has(f.label)) {
      throw LayoutError("label '" + f.label + "' present in both layouts");
    }
    all.push_back(f);
  }
  return SpaceLayout(std::move(all));
}

std::string SpaceLayout::to_string() const {
  std::ostringstream out;
  out << "(";
  for (size_t i = 0; i < factors_.size(); ++i) {
    if (i) out << ", ";
    out << factors_[i].label << ":" << factors_[i].dim;
  }
  out << ")";
  return out.str();
}

}  // namespace condprep
