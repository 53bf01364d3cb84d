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

#include "condprep/states.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace condprep {

PureState::PureState(SpaceLayout layout, CVector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.total_dim()) {
    throw LayoutError("state dimension " + std::to_string(amplitudes_.size()) +
                      " does not match layout " + layout_.to_string());
  }
  if (!amplitudes_.allFinite()) {
    throw ValidationError("state has non-finite amplitudes");
  }
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > tol::state_norm) {
    throw ValidationError("state is not normalized: ‖ψ‖ = " + std::to_string(norm));
  }
}

DensityOperator PureState::density() const {
  return DensityOperator(layout_, amplitudes_ * amplitudes_.adjoint());
}

DensityOperator::DensityOperator(SpaceLayout layout, CMatrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != layout_.total_dim()) {
    throw LayoutError("density dimension " + std::to_string(matrix_.rows()) + "x" +
                      std::to_string(matrix_.cols()) + " does not match layout " +
                      layout_.to_string());
  }
  if (!all_finite(matrix_)) {
    throw ValidationError("density operator has non-finite entries");
  }
  if (!is_hermitian(matrix_)) {
    throw ValidationError("density operator is not Hermitian: ‖ρ − ρ†‖max = " +
                          std::to_string(max_abs(matrix_ - matrix_.adjoint())));
  }
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > tol::trace_one) {
    throw ValidationError("density operator trace = " + std::to_string(tr));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (matrix_ + matrix_.adjoint()),
                                             Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -tol::psd_floor) {
    throw ValidationError("density operator is not PSD: min eigenvalue = " +
                          std::to_string(min_eig));
  }
}

DensityOperator DensityOperator::reduced(const std::vector<std::string>& keep) const {
  return DensityOperator(layout_.sublayout(keep), partial_trace(matrix_, layout_, keep));
}

namespace {

// Cluster eigenvalue indices whose sorted values chain within the
// degeneracy width, then order groups by ascending eigenvalue.
std::vector<std::vector<int>> group_eigenvalues(const RVector& values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return values[a] < values[b]; });

  std::vector<std::vector<int>> groups;
  for (int k = 0; k < n; ++k) {
    const int idx = order[k];
    if (!groups.empty() &&
        values[idx] - values[order[k - 1]] <= tol::degeneracy) {
      groups.back().push_back(idx);
    } else {
      groups.push_back({idx});
    }
  }
  return groups;
}

}  // namespace

ObservableBasis::ObservableBasis(SpaceLayout layout, RVector eigenvalues,
                                 CMatrix eigenvectors)
    : layout_(std::move(layout)),
      eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)) {
  const int d = layout_.total_dim();
  if (eigenvectors_.rows() != d || eigenvectors_.cols() != d) {
    throw LayoutError("basis must hold " + std::to_string(d) +
                      " eigenvectors of dimension " + std::to_string(d));
  }
  if (eigenvalues_.size() != d) {
    throw LayoutError("eigenvalue count " + std::to_string(eigenvalues_.size()) +
                      " does not match dimension " + std::to_string(d));
  }
  if (!all_finite(eigenvectors_) || !eigenvalues_.allFinite()) {
    throw ValidationError("basis has non-finite entries");
  }
  const CMatrix gram = eigenvectors_.adjoint() * eigenvectors_;
  const double defect = max_abs(gram - CMatrix::Identity(d, d));
  if (defect > tol::orthonormal) {
    throw ValidationError("basis vectors are not orthonormal: ‖V†V − I‖max = " +
                          std::to_string(defect));
  }
  groups_ = group_eigenvalues(eigenvalues_);
}

ObservableBasis ObservableBasis::computational(const SpaceLayout& layout) {
  const int d = layout.total_dim();
  return ObservableBasis(layout, RVector::LinSpaced(d, 0.0, double(d - 1)),
                         CMatrix::Identity(d, d));
}

bool ObservableBasis::nondegenerate() const {
  return std::all_of(groups_.begin(), groups_.end(),
                     [](const std::vector<int>& g) { return g.size() == 1; });
}

double ObservableBasis::group_eigenvalue(int m) const {
  return eigenvalues_[groups_.at(m).front()];
}

CVector ObservableBasis::vector(int m) const {
  const auto& g = groups_.at(m);
  if (g.size() != 1) {
    throw UnsupportedError("outcome " + std::to_string(m) +
                           " is degenerate; no single eigenvector");
  }
  return eigenvectors_.col(g.front());
}

CMatrix ObservableBasis::group_projector_matrix(int m) const {
  const auto& g = groups_.at(m);
  CMatrix p = CMatrix::Zero(dim(), dim());
  for (int idx : g) {
    p += eigenvectors_.col(idx) * eigenvectors_.col(idx).adjoint();
  }
  return p;
}

Projector::Projector(SpaceLayout layout, CMatrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != layout_.total_dim()) {
    throw LayoutError("projector dimension does not match layout " +
                      layout_.to_string());
  }
  if (!all_finite(matrix_)) {
    throw ValidationError("projector has non-finite entries");
  }
  if (!is_hermitian(matrix_)) {
    throw ValidationError("projector is not Hermitian");
  }
  const double idem = max_abs(matrix_ * matrix_ - matrix_);
  if (idem > tol::hermitian) {
    throw ValidationError("projector is not idempotent: ‖P² − P‖max = " +
                          std::to_string(idem));
  }
}

Projector Projector::from_vectors(const SpaceLayout& layout, const CMatrix& columns) {
  return Projector(layout, columns * columns.adjoint());
}

int Projector::rank() const {
  return static_cast<int>(std::lround(matrix_.trace().real()));
}

PureState luders_project(const PureState& state, const Projector& p) {
  if (state.layout() != p.layout()) {
    throw LayoutError("state and projector layouts differ: " +
                      state.layout().to_string() + " vs " + p.layout().to_string());
  }
  const CVector projected = p.matrix() * state.amplitudes();
  const double prob = projected.squaredNorm();
  if (prob <= tol::conditioning) {
    throw ConditioningError("projection probability " + std::to_string(prob) +
                            " is below the conditioning floor");
  }
  return PureState(state.layout(), projected / std::sqrt(prob));
}

DensityOperator luders_project_density(const DensityOperator& rho, const Projector& p) {
  if (rho.layout() != p.layout()) {
    throw LayoutError("density and projector layouts differ");
  }
  const CMatrix prp = p.matrix() * rho.matrix() * p.matrix();
  const double prob = prp.trace().real();
  if (prob <= tol::conditioning) {
    throw ConditioningError("projection probability " + std::to_string(prob) +
                            " is below the conditioning floor");
  }
  CMatrix out = prp / prob;
  out = 0.5 * (out + out.adjoint());
  return DensityOperator(rho.layout(), std::move(out));
}

EprProjection epr_luders(const PureState& state, const ObservableBasis& basis1, int m) {
  if (state.layout().factor_count() != 2) {
    throw LayoutError("epr_luders expects a two-factor state, got layout " +
                      state.layout().to_string());
  }
  const auto& first = state.layout().factor(0);
  if (basis1.layout().total_dim() != first.dim) {
    throw LayoutError("basis dimension does not match the first factor of " +
                      state.layout().to_string());
  }
  if (m < 0 || m >= basis1.outcome_count()) {
    throw ValidationError("outcome index " + std::to_string(m) + " out of range");
  }
  const CVector a = basis1.vector(m);
  const CMatrix embedded = embed(a * a.adjoint(), state.layout(), {first.label});
  const Projector proj(state.layout(), embedded);
  const double prob = (proj.matrix() * state.amplitudes()).squaredNorm();
  return EprProjection{luders_project(state, proj), prob};
}

}  // namespace condprep
