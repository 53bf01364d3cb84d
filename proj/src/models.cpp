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

#include "condprep/models.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

namespace condprep {

namespace {

// Extends orthonormal columns to a full unitary whose first k columns are
// exactly the input. Completion candidates come from the canonical basis in
// order (via Householder QR of [C | I]), so the result is deterministic.
CMatrix complete_unitary(const CMatrix& columns) {
  const Eigen::Index dim = columns.rows();
  const Eigen::Index k = columns.cols();
  CMatrix seed(dim, k + dim);
  seed.leftCols(k) = columns;
  seed.rightCols(dim) = CMatrix::Identity(dim, dim);
  Eigen::HouseholderQR<CMatrix> qr(seed);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  CMatrix out(dim, dim);
  out.leftCols(k) = columns;  // QR reproduces these only up to phase
  out.rightCols(dim - k) = q.rightCols(dim - k);
  return out;
}

CVector basis_vector(int dim, int index) {
  CVector e = CVector::Zero(dim);
  e[index] = 1.0;
  return e;
}

void require_nondegenerate(const ObservableBasis& basis, const char* builder) {
  if (!basis.nondegenerate()) {
    throw UnsupportedError(std::string(builder) +
                           " requires a nondegenerate basis (every eigenvalue "
                           "group of size one)");
  }
}

}  // namespace

PointerObservable::PointerObservable(SpaceLayout apparatus_layout,
                                     std::vector<CMatrix> blocks)
    : layout_(std::move(apparatus_layout)), blocks_(std::move(blocks)) {
  if (blocks_.empty()) {
    throw ValidationError("pointer observable needs at least one reading");
  }
  const int dim = layout_.total_dim();
  Eigen::Index total_cols = 0;
  for (size_t m = 0; m < blocks_.size(); ++m) {
    const CMatrix& b = blocks_[m];
    if (b.rows() != dim || b.cols() < 1) {
      throw LayoutError("pointer block " + std::to_string(m) +
                        " has shape " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ", expected " +
                        std::to_string(dim) + " rows");
    }
    if (!all_finite(b)) {
      throw ValidationError("pointer block " + std::to_string(m) +
                            " has non-finite entries");
    }
    total_cols += b.cols();
  }
  if (total_cols > dim) {
    throw ValidationError("pointer blocks hold " + std::to_string(total_cols) +
                          " vectors in a " + std::to_string(dim) +
                          "-dimensional apparatus");
  }
  // One stacked Gram check covers orthonormality within each block and
  // orthogonality across blocks.
  CMatrix stacked(dim, total_cols);
  Eigen::Index col = 0;
  for (const auto& b : blocks_) {
    stacked.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  const CMatrix gram = stacked.adjoint() * stacked;
  const double defect =
      max_abs(gram - CMatrix::Identity(total_cols, total_cols));
  if (defect > tol::orthonormal) {
    throw ValidationError("pointer vectors are not orthonormal: defect = " +
                          std::to_string(defect));
  }
  complete_ = (total_cols == dim);
}

CMatrix PointerObservable::projector(int m) const {
  const CMatrix& b = blocks_.at(m);
  return b * b.adjoint();
}

MeasurementModel::MeasurementModel(SpaceLayout object_layout,
                                   DensityOperator apparatus_state,
                                   UnitaryOperator coupling,
                                   PointerObservable pointer)
    : object_layout_(std::move(object_layout)),
      total_layout_(object_layout_.concat(apparatus_state.layout())),
      apparatus_state_(std::move(apparatus_state)),
      coupling_(std::move(coupling)),
      pointer_(std::move(pointer)) {
  if (pointer_.layout() != apparatus_state_.layout()) {
    throw LayoutError("pointer layout " + pointer_.layout().to_string() +
                      " differs from apparatus layout " +
                      apparatus_state_.layout().to_string());
  }
  if (coupling_.layout() != total_layout_) {
    throw LayoutError("coupling layout " + coupling_.layout().to_string() +
                      " is not object ⊕ apparatus = " + total_layout_.to_string());
  }
}

std::vector<std::string> MeasurementModel::object_labels() const {
  std::vector<std::string> labels;
  for (const auto& f : object_layout_.factors()) labels.push_back(f.label);
  return labels;
}

std::vector<std::string> MeasurementModel::apparatus_labels() const {
  std::vector<std::string> labels;
  for (const auto& f : apparatus_layout().factors()) labels.push_back(f.label);
  return labels;
}

NonidealityMatrix::NonidealityMatrix(RMatrix lambda) : lambda_(std::move(lambda)) {
  if (lambda_.rows() < 1 || lambda_.cols() < 1) {
    throw ValidationError("nonideality matrix must be non-empty");
  }
  if (!lambda_.allFinite()) {
    throw ValidationError("nonideality matrix has non-finite entries");
  }
  if (lambda_.minCoeff() < -1e-12) {
    throw ValidationError("nonideality matrix has negative entry " +
                          std::to_string(lambda_.minCoeff()));
  }
  for (Eigen::Index c = 0; c < lambda_.cols(); ++c) {
    const double sum = lambda_.col(c).sum();
    if (std::abs(sum - 1.0) > tol::stochastic) {
      throw ValidationError("nonideality column " + std::to_string(c) +
                            " sums to " + std::to_string(sum) + ", expected 1");
    }
  }
}

NonidealityMatrix NonidealityMatrix::identity(int outcomes) {
  return NonidealityMatrix(RMatrix::Identity(outcomes, outcomes));
}

NonidealityMatrix NonidealityMatrix::uniform(int outcomes) {
  return NonidealityMatrix(
      RMatrix::Constant(outcomes, outcomes, 1.0 / double(outcomes)));
}

NonidealityMatrix NonidealityMatrix::symmetric_noise(int outcomes, double p) {
  if (p < 0.0 || p > 1.0) {
    throw ValidationError("noise weight must lie in [0, 1], got " +
                          std::to_string(p));
  }
  if (outcomes < 2) {
    throw ValidationError("symmetric noise needs at least two outcomes");
  }
  RMatrix lam =
      RMatrix::Constant(outcomes, outcomes, p / double(outcomes - 1));
  lam.diagonal().setConstant(1.0 - p);
  return NonidealityMatrix(std::move(lam));
}

NonidealityMatrix with_detector_efficiency(const NonidealityMatrix& lam, double eta) {
  if (eta < 0.0 || eta > 1.0) {
    throw ValidationError("detector efficiency must lie in [0, 1], got " +
                          std::to_string(eta));
  }
  RMatrix extended(lam.pointer_outcomes() + 1, lam.object_outcomes());
  extended.topRows(lam.pointer_outcomes()) = eta * lam.matrix();
  extended.bottomRows(1).setConstant(1.0 - eta);
  return NonidealityMatrix(std::move(extended));
}

Povm::Povm(SpaceLayout object_layout, std::vector<CMatrix> elements)
    : layout_(std::move(object_layout)), elements_(std::move(elements)) {
  if (elements_.empty()) {
    throw ValidationError("POVM needs at least one element");
  }
  const int d = layout_.total_dim();
  CMatrix sum = CMatrix::Zero(d, d);
  for (size_t m = 0; m < elements_.size(); ++m) {
    const CMatrix& e = elements_[m];
    if (e.rows() != d || e.cols() != d) {
      throw LayoutError("POVM element " + std::to_string(m) +
                        " does not match layout " + layout_.to_string());
    }
    if (!all_finite(e)) {
      throw ValidationError("POVM element " + std::to_string(m) +
                            " has non-finite entries");
    }
    if (!is_hermitian(e)) {
      throw ValidationError("POVM element " + std::to_string(m) +
                            " is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (e + e.adjoint()),
                                               Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol::psd_floor) {
      throw ValidationError("POVM element " + std::to_string(m) +
                            " is not PSD: min eigenvalue = " +
                            std::to_string(eig.eigenvalues().minCoeff()));
    }
    sum += e;
  }
  const double completeness_defect = max_abs(sum - CMatrix::Identity(d, d));
  complete_ = completeness_defect <= tol::orthonormal;
  if (!complete_) {
    // Σ_m M_m may fall short of I (deficient pointer family) but never exceed it.
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (sum + sum.adjoint()),
                                               Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().maxCoeff() > 1.0 + tol::orthonormal) {
      throw ValidationError("POVM elements sum beyond identity: max eigenvalue = " +
                            std::to_string(eig.eigenvalues().maxCoeff()));
    }
  }
}

MeasurementModel build_first_kind(const ObservableBasis& basis,
                                  const std::string& apparatus_label) {
  require_nondegenerate(basis, "build_first_kind");
  const int d = basis.dim();
  const SpaceLayout apparatus = SpaceLayout::single(apparatus_label, d);

  // Cyclic shift on the pointer scale; block diagonal in the measured basis.
  CMatrix shift = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) shift((j + 1) % d, j) = 1.0;

  CMatrix u = CMatrix::Zero(d * d, d * d);
  CMatrix shift_power = CMatrix::Identity(d, d);
  for (int m = 0; m < d; ++m) {
    const CVector a = basis.vector(m);
    u += tensor_product(CMatrix(a * a.adjoint()), shift_power);
    shift_power = shift * shift_power;
  }

  std::vector<CMatrix> blocks;
  for (int m = 0; m < d; ++m) blocks.push_back(basis_vector(d, m));

  return MeasurementModel(
      basis.layout(),
      DensityOperator(apparatus,
                      basis_vector(d, 0) * basis_vector(d, 0).adjoint()),
      UnitaryOperator(basis.layout().concat(apparatus), std::move(u)),
      PointerObservable(apparatus, std::move(blocks)));
}

MeasurementModel build_second_kind(const ObservableBasis& basis,
                                   const std::vector<CVector>& final_states,
                                   const std::string& apparatus_label) {
  require_nondegenerate(basis, "build_second_kind");
  const int d = basis.dim();
  if (static_cast<int>(final_states.size()) != d) {
    throw ValidationError("expected " + std::to_string(d) +
                          " final states, got " +
                          std::to_string(final_states.size()));
  }
  for (size_t m = 0; m < final_states.size(); ++m) {
    if (final_states[m].size() != d) {
      throw ValidationError("final state " + std::to_string(m) +
                            " has dimension " +
                            std::to_string(final_states[m].size()) +
                            ", expected " + std::to_string(d));
    }
    const double norm = final_states[m].norm();
    if (!final_states[m].allFinite() || std::abs(norm - 1.0) > tol::state_norm) {
      throw ValidationError("final state " + std::to_string(m) +
                            " is not normalized: ‖ψ‖ = " + std::to_string(norm));
    }
  }
  const SpaceLayout apparatus = SpaceLayout::single(apparatus_label, d);
  const int total = d * d;

  // Domain |a_m⟩|θ⟩ and range |ψ_m⟩|θ_m⟩ are both orthonormal families (the
  // pointer states take care of range orthogonality even when the ψ_m
  // overlap), so the prescribed action is a partial isometry.
  CMatrix domain(total, d), range(total, d);
  const CVector theta0 = basis_vector(d, 0);
  for (int m = 0; m < d; ++m) {
    domain.col(m) = tensor_product(CVector(basis.vector(m)), theta0);
    range.col(m) = tensor_product(final_states[m], CVector(basis_vector(d, m)));
  }
  const CMatrix domain_full = complete_unitary(domain);
  const CMatrix range_full = complete_unitary(range);
  CMatrix u = range_full * domain_full.adjoint();

  std::vector<CMatrix> blocks;
  for (int m = 0; m < d; ++m) blocks.push_back(basis_vector(d, m));

  return MeasurementModel(
      basis.layout(),
      DensityOperator(apparatus, theta0 * theta0.adjoint()),
      UnitaryOperator(basis.layout().concat(apparatus), std::move(u)),
      PointerObservable(apparatus, std::move(blocks)));
}

MeasurementModel build_lambda_model(const ObservableBasis& basis,
                                    const NonidealityMatrix& lam,
                                    const std::string& apparatus_label) {
  require_nondegenerate(basis, "build_lambda_model");
  const int d = basis.dim();
  if (lam.object_outcomes() != d) {
    throw ValidationError("nonideality matrix has " +
                          std::to_string(lam.object_outcomes()) +
                          " object columns, basis has " + std::to_string(d));
  }
  const int readings = lam.pointer_outcomes();
  const int app_dim = readings * d;  // flat pointer index (m, i) = m·d + i
  const SpaceLayout apparatus = SpaceLayout::single(apparatus_label, app_dim);

  // Per source outcome m', send the fresh pointer to Σ_m √λ_mm' |θ_{m,m'}⟩.
  // Distinct m' land on orthogonal degeneracy slots, which is what makes the
  // cross terms between source outcomes vanish exactly.
  CMatrix u = CMatrix::Zero(d * app_dim, d * app_dim);
  for (int mp = 0; mp < d; ++mp) {
    CVector target = CVector::Zero(app_dim);
    for (int m = 0; m < readings; ++m) {
      target[m * d + mp] = std::sqrt(std::max(0.0, lam(m, mp)));
    }
    const CMatrix wheel = complete_unitary(target);
    const CVector a = basis.vector(mp);
    u += tensor_product(CMatrix(a * a.adjoint()), wheel);
  }

  std::vector<CMatrix> blocks;
  for (int m = 0; m < readings; ++m) {
    CMatrix block = CMatrix::Zero(app_dim, d);
    for (int i = 0; i < d; ++i) block(m * d + i, i) = 1.0;
    blocks.push_back(std::move(block));
  }

  const CVector theta0 = basis_vector(app_dim, 0);
  return MeasurementModel(
      basis.layout(),
      DensityOperator(apparatus, theta0 * theta0.adjoint()),
      UnitaryOperator(basis.layout().concat(apparatus), std::move(u)),
      PointerObservable(apparatus, std::move(blocks)));
}

Povm extract_povm(const MeasurementModel& model) {
  const CMatrix& u = model.coupling().matrix();
  const CMatrix rho_a_padded =
      embed(model.apparatus_state().matrix(), model.total_layout(),
            model.apparatus_labels());
  std::vector<CMatrix> elements;
  elements.reserve(model.outcome_count());
  for (int m = 0; m < model.outcome_count(); ++m) {
    const CMatrix e_padded =
        embed(model.pointer().projector(m), model.total_layout(),
              model.apparatus_labels());
    const CMatrix weighted = rho_a_padded * (u.adjoint() * e_padded * u);
    CMatrix element =
        partial_trace(weighted, model.total_layout(), model.object_labels());
    element = 0.5 * (element + element.adjoint());
    elements.push_back(std::move(element));
  }
  return Povm(model.object_layout(), std::move(elements));
}

NonidealityCheck verify_nonideality(const MeasurementModel& model,
                                    const ObservableBasis& basis) {
  require_nondegenerate(basis, "verify_nonideality");
  const int d = basis.dim();
  if (model.object_layout().total_dim() != d) {
    throw LayoutError("basis dimension " + std::to_string(d) +
                      " does not match model object " +
                      model.object_layout().to_string());
  }
  const int app_dim = model.apparatus_layout().total_dim();
  const int readings = model.outcome_count();
  const CMatrix& u = model.coupling().matrix();

  // Spectral form of ρ^(a) turns every cross trace into a few inner
  // products: Tr[U|a_m'⟩⟨a_m''|ρ^(a)U†E_m] = Σ_k w_k ⟨x_m''k|E_m|x_m'k⟩
  // with x_m'k = U(|a_m'⟩ ⊗ |φ_k⟩).
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(model.apparatus_state().matrix());
  std::vector<double> weights;
  std::vector<CVector> modes;
  for (int k = 0; k < app_dim; ++k) {
    if (eig.eigenvalues()[k] > 1e-14) {
      weights.push_back(eig.eigenvalues()[k]);
      modes.push_back(eig.eigenvectors().col(k));
    }
  }
  const int n_modes = static_cast<int>(weights.size());

  // projected[m][mp*n_modes + k] = E_m-components of x_{mp,k}
  std::vector<std::vector<CVector>> projected(readings);
  std::vector<CVector> images(d * n_modes);
  for (int mp = 0; mp < d; ++mp) {
    for (int k = 0; k < n_modes; ++k) {
      images[mp * n_modes + k] =
          u * tensor_product(CVector(basis.vector(mp)), modes[k]);
    }
  }
  for (int m = 0; m < readings; ++m) {
    const CMatrix& theta = model.pointer().block(m);
    projected[m].resize(d * n_modes);
    for (int idx = 0; idx < d * n_modes; ++idx) {
      // (I ⊗ Θ_m†) x, object index major
      const CVector& x = images[idx];
      CVector z(d * theta.cols());
      for (int o = 0; o < d; ++o) {
        z.segment(o * theta.cols(), theta.cols()) =
            theta.adjoint() * x.segment(o * app_dim, app_dim);
      }
      projected[m][idx] = std::move(z);
    }
  }

  NonidealityCheck check;
  RMatrix lambda(readings, d);
  NonidealityCheck::Violation worst;
  for (int m = 0; m < readings; ++m) {
    for (int mp = 0; mp < d; ++mp) {
      for (int mpp = 0; mpp < d; ++mpp) {
        Complex trace = 0.0;
        for (int k = 0; k < n_modes; ++k) {
          trace += weights[k] * projected[m][mpp * n_modes + k].dot(
                                    projected[m][mp * n_modes + k]);
        }
        if (mp == mpp) {
          lambda(m, mp) = trace.real();
        } else if (std::abs(trace) > worst.magnitude) {
          worst = {m, mp, mpp, std::abs(trace)};
        }
      }
    }
  }
  check.max_off_diagonal = worst.magnitude;
  if (worst.magnitude >= tol::offdiagonal) {
    check.worst = worst;
    check.note = "cross trace (m=" + std::to_string(worst.pointer) +
                 ", m'=" + std::to_string(worst.left) +
                 ", m''=" + std::to_string(worst.right) + ") has magnitude " +
                 std::to_string(worst.magnitude);
    return check;
  }
  try {
    check.lambda = NonidealityMatrix(std::move(lambda));
  } catch (const ValidationError& e) {
    check.note = std::string("diagonal traces are not column-stochastic: ") +
                 e.what();
  }
  return check;
}

MeasurementModel with_spectator(const MeasurementModel& model,
                                const SpaceLayout& spectator) {
  const SpaceLayout extended_object = model.object_layout().concat(spectator);
  const SpaceLayout total = extended_object.concat(model.apparatus_layout());
  std::vector<std::string> acts_on = model.object_labels();
  for (const auto& l : model.apparatus_labels()) acts_on.push_back(l);
  CMatrix u = embed(model.coupling().matrix(), total, acts_on);
  return MeasurementModel(extended_object, model.apparatus_state(),
                          UnitaryOperator(total, std::move(u)), model.pointer());
}

}  // namespace condprep
