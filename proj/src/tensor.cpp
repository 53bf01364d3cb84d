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

#include "condprep/tensor.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

namespace condprep {

namespace {

// Flat index convention: factor 0 is most significant, matching A ⊗ B.
std::vector<long> full_strides(const SpaceLayout& layout) {
  const int n = layout.factor_count();
  std::vector<long> strides(n, 1);
  for (int k = n - 2; k >= 0; --k) {
    strides[k] = strides[k + 1] * layout.factor(k + 1).dim;
  }
  return strides;
}

// Flat offsets in the full index space for every multi-index combination of
// the factors at `positions`, enumerated with positions[0] most significant.
std::vector<long> subspace_offsets(const SpaceLayout& layout,
                                   const std::vector<int>& positions) {
  const auto strides = full_strides(layout);
  long count = 1;
  for (int p : positions) count *= layout.factor(p).dim;
  std::vector<long> offsets(count, 0);
  long repeat = count;
  for (int p : positions) {
    const int dim = layout.factor(p).dim;
    repeat /= dim;
    const long stride = strides[p];
    for (long i = 0; i < count; ++i) {
      offsets[i] += ((i / repeat) % dim) * stride;
    }
  }
  return offsets;
}

std::vector<int> positions_of(const SpaceLayout& layout,
                              const std::vector<std::string>& labels) {
  std::vector<int> positions;
  positions.reserve(labels.size());
  for (const auto& l : labels) {
    const int p = layout.index_of(l);
    if (std::find(positions.begin(), positions.end(), p) != positions.end()) {
      throw LayoutError("label '" + l + "' listed twice");
    }
    positions.push_back(p);
  }
  return positions;
}

void check_square(const CMatrix& x, const char* what) {
  if (x.rows() != x.cols()) {
    throw LayoutError(std::string(what) + " must be square, got " +
                      std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
}

}  // namespace

UnitaryOperator::UnitaryOperator(SpaceLayout layout, CMatrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  check_square(matrix_, "unitary");
  if (matrix_.rows() != layout_.total_dim()) {
    throw LayoutError("unitary dimension " + std::to_string(matrix_.rows()) +
                      " does not match layout " + layout_.to_string());
  }
  if (!all_finite(matrix_)) {
    throw ValidationError("unitary has non-finite entries");
  }
  const CMatrix gram = matrix_.adjoint() * matrix_;
  const double defect = max_abs(gram - CMatrix::Identity(gram.rows(), gram.cols()));
  if (defect > tol::unitary) {
    throw ValidationError("matrix is not unitary: ‖U†U − I‖max = " +
                          std::to_string(defect));
  }
}

CMatrix tensor_product(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CVector tensor_product(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

CMatrix partial_trace(const CMatrix& x, const SpaceLayout& layout,
                      const std::vector<std::string>& keep) {
  check_square(x, "partial_trace input");
  if (x.rows() != layout.total_dim()) {
    throw LayoutError("operator dimension " + std::to_string(x.rows()) +
                      " does not match layout " + layout.to_string());
  }
  const auto keep_positions = positions_of(layout, keep);

  std::vector<int> kept_sorted = keep_positions;
  std::sort(kept_sorted.begin(), kept_sorted.end());
  std::vector<int> traced;
  for (int p = 0; p < layout.factor_count(); ++p) {
    if (!std::binary_search(kept_sorted.begin(), kept_sorted.end(), p)) {
      traced.push_back(p);
    }
  }

  const auto kept_offsets = subspace_offsets(layout, kept_sorted);
  const auto traced_offsets = subspace_offsets(layout, traced);
  const long dk = static_cast<long>(kept_offsets.size());

  CMatrix out = CMatrix::Zero(dk, dk);
  for (long r = 0; r < dk; ++r) {
    for (long c = 0; c < dk; ++c) {
      Complex sum = 0.0;
      for (const long t : traced_offsets) {
        sum += x(kept_offsets[r] + t, kept_offsets[c] + t);
      }
      out(r, c) = sum;
    }
  }
  return out;
}

namespace {

// Offsets of the op's row/column index into the full space: op index
// `i` decomposes along acts_on order, each component lands at its factor's
// stride in the layout.
std::vector<long> op_index_offsets(const CMatrix& op, const SpaceLayout& layout,
                                   const std::vector<std::string>& acts_on,
                                   std::vector<int>& ctx_positions_out) {
  check_square(op, "embedded operator");
  const auto positions = positions_of(layout, acts_on);
  long dop = 1;
  for (int p : positions) dop *= layout.factor(p).dim;
  if (op.rows() != dop) {
    throw LayoutError("operator dimension " + std::to_string(op.rows()) +
                      " does not match the product of acts_on dims (" +
                      std::to_string(dop) + ")");
  }
  const auto strides = full_strides(layout);
  std::vector<long> offsets(dop, 0);
  long repeat = dop;
  for (int p : positions) {
    const int dim = layout.factor(p).dim;
    repeat /= dim;
    for (long i = 0; i < dop; ++i) {
      offsets[i] += ((i / repeat) % dim) * strides[p];
    }
  }
  ctx_positions_out.clear();
  std::vector<int> sorted_positions = positions;
  std::sort(sorted_positions.begin(), sorted_positions.end());
  for (int p = 0; p < layout.factor_count(); ++p) {
    if (!std::binary_search(sorted_positions.begin(), sorted_positions.end(), p)) {
      ctx_positions_out.push_back(p);
    }
  }
  return offsets;
}

}  // namespace

CMatrix embed(const CMatrix& op, const SpaceLayout& layout,
              const std::vector<std::string>& acts_on) {
  std::vector<int> ctx_positions;
  const auto op_offsets = op_index_offsets(op, layout, acts_on, ctx_positions);
  const auto ctx_offsets = subspace_offsets(layout, ctx_positions);

  const long d = layout.total_dim();
  CMatrix out = CMatrix::Zero(d, d);
  const long dop = static_cast<long>(op_offsets.size());
  for (long r = 0; r < dop; ++r) {
    for (long c = 0; c < dop; ++c) {
      const Complex v = op(r, c);
      if (v == Complex(0.0, 0.0)) continue;
      for (const long ctx : ctx_offsets) {
        out(op_offsets[r] + ctx, op_offsets[c] + ctx) = v;
      }
    }
  }
  return out;
}

CVector apply_embedded(const CMatrix& op, const SpaceLayout& layout,
                       const std::vector<std::string>& acts_on, const CVector& v) {
  if (v.size() != layout.total_dim()) {
    throw LayoutError("vector dimension " + std::to_string(v.size()) +
                      " does not match layout " + layout.to_string());
  }
  std::vector<int> ctx_positions;
  const auto op_offsets = op_index_offsets(op, layout, acts_on, ctx_positions);
  const auto ctx_offsets = subspace_offsets(layout, ctx_positions);

  CVector out = CVector::Zero(v.size());
  const long dop = static_cast<long>(op_offsets.size());
  for (long r = 0; r < dop; ++r) {
    for (long c = 0; c < dop; ++c) {
      const Complex w = op(r, c);
      if (w == Complex(0.0, 0.0)) continue;
      for (const long ctx : ctx_offsets) {
        out[op_offsets[r] + ctx] += w * v[op_offsets[c] + ctx];
      }
    }
  }
  return out;
}

UnitaryOperator hermitian_exp(const CMatrix& h_scaled, const SpaceLayout& layout) {
  check_square(h_scaled, "hermitian_exp input");
  if (!all_finite(h_scaled)) {
    throw ValidationError("hermitian_exp input has non-finite entries");
  }
  if (!is_hermitian(h_scaled)) {
    throw ValidationError("hermitian_exp input is not Hermitian: ‖H − H†‖max = " +
                          std::to_string(max_abs(h_scaled - h_scaled.adjoint())));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (h_scaled + h_scaled.adjoint()));
  if (eig.info() != Eigen::Success) {
    throw ValidationError("eigendecomposition failed in hermitian_exp");
  }
  const CVector phases =
      (Complex(0.0, -1.0) * eig.eigenvalues().cast<Complex>()).array().exp();
  CMatrix u = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  return UnitaryOperator(layout, std::move(u));
}

}  // namespace condprep
