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

#include "condprep/types.hpp"

namespace condprep {

/// ½‖a − b‖₁ for Hermitian a, b (sum of absolute eigenvalues of the
/// difference, halved).
double trace_distance(const CMatrix& a, const CMatrix& b);

/// Squared-overlap fidelity ⟨target|ρ|target⟩ of a state against a pure
/// target. This is the convention reported everywhere in this library.
double fidelity_to_pure(const CVector& target, const CMatrix& rho);

/// |⟨a|b⟩|² for unit vectors; insensitive to global phase.
double overlap_fidelity(const CVector& a, const CVector& b);

}  // namespace condprep
