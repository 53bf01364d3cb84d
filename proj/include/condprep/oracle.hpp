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

#include <vector>

#include "condprep/models.hpp"
#include "condprep/states.hpp"

// Independent brute-force routes used for cross-validation. Everything here
// deliberately avoids the engine's fast paths: states are reconstructed from
// outcome statistics alone, and traces are taken by naive index summation.
namespace condprep::oracle {

/// Deterministic informationally complete POVM with d² elements, built from
/// basis states and balanced two-level superpositions (real and imaginary
/// phase), then normalized so the elements sum to identity.
class TestFamily {
 public:
  explicit TestFamily(int dim);

  int dim() const { return dim_; }
  int size() const { return povm_.size(); }
  const Povm& povm() const { return povm_; }
  /// Condition number of the linear system mapping states to statistics;
  /// reconstruction error scales with it.
  double condition_number() const { return condition_number_; }

  /// Born probabilities Tr(ρ F_n) for every element.
  RVector probabilities(const CMatrix& rho) const;

  /// Least-squares inverse of `probabilities`: the Hermitian unit-trace
  /// matrix reproducing the given statistics.
  CMatrix reconstruct(const RVector& born) const;

 private:
  int dim_;
  Povm povm_;
  std::vector<CMatrix> hermitian_basis_;
  RMatrix system_;  // Tr(F_n B_k) over the orthonormal Hermitian basis B_k
  Eigen::JacobiSVD<RMatrix> solver_;
  double condition_number_ = 0.0;
};

/// TestFamily for the given dimension (≥ 2).
TestFamily make_ic_family(int dim);

/// Conditional object state recovered purely from joint outcome statistics
/// p(m, n)/p(m) over an informationally complete family — never from the
/// partial-trace formula. Throws ConditioningError when p(m) is below the
/// conditioning floor.
DensityOperator tomographic_conditional(const MeasurementModel& model,
                                        const DensityOperator& rho_o, int m);

/// Same contract as partial_trace, computed by scanning every matrix entry
/// and summing those whose traced indices coincide.
CMatrix brute_trace(const CMatrix& x, const SpaceLayout& layout,
                    const std::vector<std::string>& traced);

}  // namespace condprep::oracle
