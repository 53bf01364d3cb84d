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

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace condprep {

inline constexpr const char* kEngineName = "condprep";
inline constexpr const char* kEngineVersion = "0.1.0";

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Numerical tolerances used by validity checks across the library.
/// All matrix comparisons are max-norm (entrywise), which keeps the
/// thresholds independent of dimension.
namespace tol {
inline constexpr double hermitian = 1e-10;       // ‖X − X†‖max
inline constexpr double unitary = 1e-10;         // ‖U†U − I‖max
inline constexpr double trace_one = 1e-10;       // |Tr ρ − 1|
inline constexpr double psd_floor = 1e-10;       // min eigenvalue ≥ −psd_floor
inline constexpr double state_norm = 1e-12;      // |‖ψ‖ − 1|
inline constexpr double conditioning = 1e-12;    // probability floor for conditioning
inline constexpr double orthonormal = 1e-10;     // pairwise vector orthonormality
inline constexpr double degeneracy = 1e-9;       // eigenvalue grouping width
inline constexpr double stochastic = 1e-10;      // nonideality-matrix column sums
inline constexpr double offdiagonal = 1e-9;      // nonideality cross-term bound
inline constexpr double tomography = 1e-8;       // oracle route agreement
}  // namespace tol

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension or subsystem-label inconsistency between operands.
struct LayoutError : Error {
  explicit LayoutError(const std::string& what) : Error(what) {}
};

/// An input violates a type invariant (normalization, Hermiticity, ...).
struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Conditioning on an outcome whose probability is below the floor.
struct ConditioningError : Error {
  explicit ConditioningError(const std::string& what) : Error(what) {}
};

/// A requested construction is outside what the builder supports.
struct UnsupportedError : Error {
  explicit UnsupportedError(const std::string& what) : Error(what) {}
};

/// Scenario-file syntax or schema failure.
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

inline double max_abs(const CMatrix& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& x, double tolerance = tol::hermitian) {
  return x.rows() == x.cols() && max_abs(x - x.adjoint()) <= tolerance;
}

inline bool all_finite(const CMatrix& x) { return x.allFinite(); }

}  // namespace condprep
