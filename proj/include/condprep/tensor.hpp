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

#include <string>
#include <vector>

#include "condprep/space_layout.hpp"
#include "condprep/types.hpp"

namespace condprep {

/// Unitary on a laid-out space; construction checks ‖U†U − I‖max.
class UnitaryOperator {
 public:
  UnitaryOperator(SpaceLayout layout, CMatrix matrix);

  const SpaceLayout& layout() const { return layout_; }
  const CMatrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

 private:
  SpaceLayout layout_;
  CMatrix matrix_;
};

/// Kronecker product; subsystem order follows argument order.
CMatrix tensor_product(const CMatrix& a, const CMatrix& b);
CVector tensor_product(const CVector& a, const CVector& b);

/// Trace out every factor not named in `keep`. The result acts on the kept
/// factors in layout order and satisfies trace(result) = trace(x).
/// Implemented by explicit index-grid summation over the traced factors.
CMatrix partial_trace(const CMatrix& x, const SpaceLayout& layout,
                      const std::vector<std::string>& keep);

/// Pad `op` with identities on the factors it does not touch. `acts_on`
/// names the factors of `op` in the tensor order `op` uses; the result is
/// reordered to the layout's factor order.
CMatrix embed(const CMatrix& op, const SpaceLayout& layout,
              const std::vector<std::string>& acts_on);

/// embed(op, layout, acts_on) * v without materializing the embedded matrix.
CVector apply_embedded(const CMatrix& op, const SpaceLayout& layout,
                       const std::vector<std::string>& acts_on, const CVector& v);

/// exp(−i h) for Hermitian h, via spectral decomposition. The input plays
/// the role of an interaction Hamiltonian times its duration, so the result
/// is unitary up to eigensolver accuracy.
UnitaryOperator hermitian_exp(const CMatrix& h_scaled, const SpaceLayout& layout);

}  // namespace condprep
