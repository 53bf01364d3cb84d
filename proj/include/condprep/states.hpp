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

#include "condprep/space_layout.hpp"
#include "condprep/tensor.hpp"
#include "condprep/types.hpp"

namespace condprep {

class DensityOperator;

/// Unit vector on a laid-out space.
class PureState {
 public:
  PureState(SpaceLayout layout, CVector amplitudes);

  const SpaceLayout& layout() const { return layout_; }
  const CVector& amplitudes() const { return amplitudes_; }
  int dim() const { return static_cast<int>(amplitudes_.size()); }

  DensityOperator density() const;

 private:
  SpaceLayout layout_;
  CVector amplitudes_;
};

/// Hermitian, unit-trace, positive-semidefinite operator; all three are
/// checked at construction.
class DensityOperator {
 public:
  DensityOperator(SpaceLayout layout, CMatrix matrix);

  const SpaceLayout& layout() const { return layout_; }
  const CMatrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  /// Partial trace over the factors not named in `keep`.
  DensityOperator reduced(const std::vector<std::string>& keep) const;

 private:
  SpaceLayout layout_;
  CMatrix matrix_;
};

/// Orthonormal eigensystem of an observable. Eigenvalues within the
/// degeneracy width are grouped into one eigenspace; outcomes are the
/// groups, ordered by ascending eigenvalue.
class ObservableBasis {
 public:
  ObservableBasis(SpaceLayout layout, RVector eigenvalues, CMatrix eigenvectors);

  /// Computational basis with eigenvalues 0, 1, ..., d−1.
  static ObservableBasis computational(const SpaceLayout& layout);

  const SpaceLayout& layout() const { return layout_; }
  int dim() const { return static_cast<int>(eigenvectors_.rows()); }
  const CMatrix& eigenvectors() const { return eigenvectors_; }
  const RVector& eigenvalues() const { return eigenvalues_; }

  int outcome_count() const { return static_cast<int>(groups_.size()); }
  bool nondegenerate() const;
  /// Eigenvector column indices belonging to outcome m.
  const std::vector<int>& group(int m) const { return groups_.at(m); }
  double group_eigenvalue(int m) const;
  /// Single eigenvector of a nondegenerate outcome.
  CVector vector(int m) const;
  CMatrix group_projector_matrix(int m) const;

 private:
  SpaceLayout layout_;
  RVector eigenvalues_;
  CMatrix eigenvectors_;
  std::vector<std::vector<int>> groups_;
};

/// Orthogonal projector: P = P† and P² = P within tolerance.
class Projector {
 public:
  Projector(SpaceLayout layout, CMatrix matrix);

  /// Projector onto the span of orthonormal columns.
  static Projector from_vectors(const SpaceLayout& layout, const CMatrix& columns);

  const SpaceLayout& layout() const { return layout_; }
  const CMatrix& matrix() const { return matrix_; }
  int rank() const;

 private:
  SpaceLayout layout_;
  CMatrix matrix_;
};

/// P|ψ⟩/‖P|ψ⟩‖. Throws ConditioningError when ‖P|ψ⟩‖² is below the
/// conditioning floor, where the map is undefined.
PureState luders_project(const PureState& state, const Projector& p);

/// PρP/Tr(PρP), the mixed-state analogue.
DensityOperator luders_project_density(const DensityOperator& rho, const Projector& p);

struct EprProjection {
  PureState state;
  double probability = 0.0;
};

/// Project a two-factor state onto outcome m of an observable of the first
/// factor, i.e. apply the projector |a_m⟩⟨a_m| ⊗ I. For a Schmidt-form
/// state this lands on the product of the two m-th basis vectors.
EprProjection epr_luders(const PureState& state, const ObservableBasis& basis1, int m);

}  // namespace condprep
