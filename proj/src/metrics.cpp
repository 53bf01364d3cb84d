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

#include "condprep/metrics.hpp"

#include <Eigen/Eigenvalues>

namespace condprep {

double trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw LayoutError("trace_distance operands differ in shape");
  }
  CMatrix diff = a - b;
  diff = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(diff, Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

double fidelity_to_pure(const CVector& target, const CMatrix& rho) {
  if (rho.rows() != target.size() || rho.cols() != target.size()) {
    throw LayoutError("fidelity operands differ in dimension");
  }
  return (target.adjoint() * rho * target)(0, 0).real();
}

double overlap_fidelity(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) {
    throw LayoutError("overlap operands differ in dimension");
  }
  return std::norm(a.dot(b));
}

}  // namespace condprep
