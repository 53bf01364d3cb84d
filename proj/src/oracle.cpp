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

#include "condprep/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <utility>

#include "condprep/tensor.hpp"

namespace condprep::oracle {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Basis states plus balanced two-level superpositions with real and
// imaginary relative phase: d + 2·d(d−1)/2 = d² vectors, enough to span
// Hermitian operator space with their outer products.
std::vector<CVector> probe_vectors(int dim) {
  std::vector<CVector> probes;
  probes.reserve(dim * dim);
  for (int j = 0; j < dim; ++j) {
    CVector v = CVector::Zero(dim);
    v(j) = 1.0;
    probes.push_back(std::move(v));
  }
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k) {
      CVector plus = CVector::Zero(dim);
      plus(j) = kInvSqrt2;
      plus(k) = kInvSqrt2;
      probes.push_back(std::move(plus));
      CVector phase = CVector::Zero(dim);
      phase(j) = kInvSqrt2;
      phase(k) = Complex(0.0, kInvSqrt2);
      probes.push_back(std::move(phase));
    }
  }
  return probes;
}

// Orthonormal Hermitian basis under Tr(AB): diagonal units, then symmetric
// and antisymmetric off-diagonal combinations.
std::vector<CMatrix> hermitian_basis(int dim) {
  std::vector<CMatrix> basis;
  basis.reserve(dim * dim);
  for (int j = 0; j < dim; ++j) {
    CMatrix b = CMatrix::Zero(dim, dim);
    b(j, j) = 1.0;
    basis.push_back(std::move(b));
  }
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k) {
      CMatrix sym = CMatrix::Zero(dim, dim);
      sym(j, k) = kInvSqrt2;
      sym(k, j) = kInvSqrt2;
      basis.push_back(std::move(sym));
      CMatrix anti = CMatrix::Zero(dim, dim);
      anti(j, k) = Complex(0.0, kInvSqrt2);
      anti(k, j) = Complex(0.0, -kInvSqrt2);
      basis.push_back(std::move(anti));
    }
  }
  return basis;
}

double real_trace_product(const CMatrix& a, const CMatrix& b) {
  return a.transpose().cwiseProduct(b).sum().real();
}

// Outer products of the probe vectors, rescaled by the inverse square root
// of their sum so the family adds up to identity.
Povm build_family_povm(int dim) {
  if (dim < 2) {
    throw ValidationError("informationally complete family needs dim >= 2, got " +
                          std::to_string(dim));
  }
  const std::vector<CVector> probes = probe_vectors(dim);
  CMatrix s = CMatrix::Zero(dim, dim);
  for (const CVector& v : probes) s += v * v.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> s_solver(s);
  const CMatrix s_inv_sqrt = s_solver.operatorInverseSqrt();

  std::vector<CMatrix> elements;
  elements.reserve(probes.size());
  for (const CVector& v : probes) {
    const CVector w = s_inv_sqrt * v;
    CMatrix f = w * w.adjoint();
    f = 0.5 * (f + f.adjoint());
    elements.push_back(std::move(f));
  }
  return Povm(SpaceLayout::single("o", dim), std::move(elements));
}

}  // namespace

TestFamily::TestFamily(int dim) : dim_(dim), povm_(build_family_povm(dim)) {
  hermitian_basis_ = hermitian_basis(dim);
  const int n = povm_.size();
  system_.resize(n, n);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      system_(row, col) =
          real_trace_product(povm_.element(row), hermitian_basis_[col]);
    }
  }
  solver_.compute(system_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& singular = solver_.singularValues();
  condition_number_ = singular(0) / singular(singular.size() - 1);
}

RVector TestFamily::probabilities(const CMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw LayoutError("state dimension " + std::to_string(rho.rows()) +
                      " does not match the family dimension " +
                      std::to_string(dim_));
  }
  RVector born(size());
  for (int n = 0; n < size(); ++n) {
    born(n) = real_trace_product(rho, povm_.element(n));
  }
  return born;
}

CMatrix TestFamily::reconstruct(const RVector& born) const {
  if (born.size() != size()) {
    throw ValidationError("expected " + std::to_string(size()) +
                          " probabilities, got " + std::to_string(born.size()));
  }
  const RVector coefficients = solver_.solve(born);
  CMatrix rho = CMatrix::Zero(dim_, dim_);
  for (int k = 0; k < size(); ++k) {
    rho += coefficients(k) * hermitian_basis_[k];
  }
  return rho;
}

TestFamily make_ic_family(int dim) { return TestFamily(dim); }

DensityOperator tomographic_conditional(const MeasurementModel& model,
                                        const DensityOperator& rho_o, int m) {
  if (!(rho_o.layout() == model.object_layout())) {
    throw LayoutError("object state layout " + rho_o.layout().to_string() +
                      " does not match the model object space " +
                      model.object_layout().to_string());
  }
  const int obj_dim = model.object_layout().total_dim();
  const int app_dim = model.apparatus_layout().total_dim();
  const TestFamily family(obj_dim);

  const CMatrix& u = model.coupling().matrix();
  const CMatrix rho_f =
      u * tensor_product(rho_o.matrix(), model.apparatus_state().matrix()) *
      u.adjoint();
  const CMatrix pointer_padded = tensor_product(
      CMatrix::Identity(obj_dim, obj_dim), model.pointer().projector(m));
  const CMatrix conditioned = rho_f * pointer_padded;
  const double p = conditioned.real().trace();
  if (p <= tol::conditioning) {
    throw ConditioningError("pointer reading " + std::to_string(m) +
                            " has probability " + std::to_string(p) +
                            "; no state to reconstruct");
  }

  const CMatrix id_app = CMatrix::Identity(app_dim, app_dim);
  RVector born(family.size());
  for (int n = 0; n < family.size(); ++n) {
    const CMatrix test_padded = tensor_product(family.povm().element(n), id_app);
    born(n) = real_trace_product(conditioned, test_padded) / p;
  }

  CMatrix rho = family.reconstruct(born);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.real().trace();
  return DensityOperator(model.object_layout(), std::move(rho));
}

CMatrix brute_trace(const CMatrix& x, const SpaceLayout& layout,
                    const std::vector<std::string>& traced) {
  if (x.rows() != layout.total_dim() || x.cols() != layout.total_dim()) {
    throw LayoutError("matrix is " + std::to_string(x.rows()) + "x" +
                      std::to_string(x.cols()) + " but the layout has dimension " +
                      std::to_string(layout.total_dim()));
  }
  std::vector<bool> is_traced(layout.factor_count(), false);
  for (const std::string& label : traced) {
    const int idx = layout.index_of(label);
    if (is_traced[idx]) {
      throw LayoutError("factor '" + label + "' listed twice");
    }
    is_traced[idx] = true;
  }

  int kept_dim = 1;
  for (int i = 0; i < layout.factor_count(); ++i) {
    if (!is_traced[i]) kept_dim *= layout.factor(i).dim;
  }

  // Digit decomposition of a flat index, factor 0 most significant.
  const auto digits = [&](int flat) {
    std::vector<int> out(layout.factor_count());
    for (int i = layout.factor_count() - 1; i >= 0; --i) {
      out[i] = flat % layout.factor(i).dim;
      flat /= layout.factor(i).dim;
    }
    return out;
  };
  const auto kept_index = [&](const std::vector<int>& digit) {
    int flat = 0;
    for (int i = 0; i < layout.factor_count(); ++i) {
      if (!is_traced[i]) flat = flat * layout.factor(i).dim + digit[i];
    }
    return flat;
  };

  CMatrix out = CMatrix::Zero(kept_dim, kept_dim);
  for (int r = 0; r < x.rows(); ++r) {
    const std::vector<int> row_digits = digits(r);
    for (int c = 0; c < x.cols(); ++c) {
      const std::vector<int> col_digits = digits(c);
      bool diagonal = true;
      for (int i = 0; i < layout.factor_count(); ++i) {
        if (is_traced[i] && row_digits[i] != col_digits[i]) {
          diagonal = false;
          break;
        }
      }
      if (diagonal) {
        out(kept_index(row_digits), kept_index(col_digits)) += x(r, c);
      }
    }
  }
  return out;
}

}  // namespace condprep::oracle
