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

#include <random>

#include <Eigen/QR>

#include "condprep/states.hpp"
#include "condprep/types.hpp"

namespace condprep::testing {

// All randomness in the suite flows through explicitly seeded generators so
// every run sees the same cases.
inline std::mt19937 seeded_rng(unsigned seed) { return std::mt19937(seed); }

inline CVector random_state_vector(std::mt19937& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  v.normalize();
  return v;
}

inline CMatrix random_unitary(std::mt19937& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) g(r, c) = Complex(gauss(rng), gauss(rng));
  }
  const Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(dim, dim);
}

inline CMatrix random_density_matrix(std::mt19937& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) g(r, c) = Complex(gauss(rng), gauss(rng));
  }
  CMatrix rho = g * g.adjoint();
  rho /= rho.real().trace();
  return 0.5 * (rho + rho.adjoint());
}

// Column-stochastic matrix with strictly positive entries.
inline RMatrix random_stochastic(std::mt19937& rng, int rows, int cols) {
  std::uniform_real_distribution<double> uniform(0.05, 1.0);
  RMatrix lam(rows, cols);
  for (int c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (int r = 0; r < rows; ++r) {
      lam(r, c) = uniform(rng);
      sum += lam(r, c);
    }
    lam.col(c) /= sum;
  }
  return lam;
}

inline ObservableBasis random_basis(std::mt19937& rng, const SpaceLayout& layout) {
  const int dim = layout.total_dim();
  RVector eigenvalues(dim);
  for (int i = 0; i < dim; ++i) eigenvalues(i) = double(i);
  return ObservableBasis(layout, eigenvalues, random_unitary(rng, dim));
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff_real(const RMatrix& a, const RMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace condprep::testing
