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

#include <optional>
#include <string>
#include <vector>

#include "condprep/conditioning.hpp"
#include "condprep/models.hpp"
#include "condprep/states.hpp"

namespace condprep {

/// Fidelity convention used in reports: F(ρ, |t⟩) = ⟨t|ρ|t⟩.
inline constexpr const char* kFidelityConvention = "squared_overlap";

/// Bipartite state in Schmidt form Σ_m c_m |a^(1)_m⟩|a^(2)_m⟩. The two
/// bases must be nondegenerate (one vector per outcome) and live on
/// distinct factor labels.
class EprState {
 public:
  EprState(CVector coefficients, ObservableBasis basis1, ObservableBasis basis2);

  /// Schmidt form over computational bases on fresh single-factor spaces.
  static EprState computational(const CVector& coefficients,
                                const std::string& label1 = "p1",
                                const std::string& label2 = "p2");

  const CVector& coefficients() const { return coefficients_; }
  const ObservableBasis& basis1() const { return basis1_; }
  const ObservableBasis& basis2() const { return basis2_; }
  int outcome_count() const { return static_cast<int>(coefficients_.size()); }
  /// particle 1 ⊕ particle 2.
  SpaceLayout pair_layout() const;

  PureState state() const;
  DensityOperator density() const;

 private:
  CVector coefficients_;
  ObservableBasis basis1_;
  ObservableBasis basis2_;
};

/// Particle-2 conditional states by full simulation: embed the particle-1
/// coupling, evolve, condition on the pointer reading, trace out particle 1.
/// Models with a pure apparatus state take a state-vector path; mixed
/// apparatus states fall back to the density-operator route.
ConditioningResult particle2_conditional_simulated(const EprState& epr,
                                                   const MeasurementModel& model);

/// Particle-2 conditional states from the mixing matrix alone:
/// ρ^(2)_fm = Σ_m' [λ_mm'|c_m'|² / Σ_m'' λ_mm''|c_m''|²] |a^(2)_m'⟩⟨a^(2)_m'|,
/// diagonal in the a^(2) basis. Readings with zero weight are absent.
ConditioningResult particle2_conditional_closed_form(const EprState& epr,
                                                     const NonidealityMatrix& lam);

struct EprOutcome {
  int outcome = 0;
  /// Reading probability from the simulated route; the closed form's value
  /// is reported next to it rather than silently assumed equal.
  double p = 0.0;
  double p_closed_form = 0.0;
  bool no_click = false;
  std::optional<DensityOperator> simulated;
  std::optional<DensityOperator> closed_form;
  /// ⟨a^(2)_m|ρ^(2)_fm|a^(2)_m⟩ for click readings with a defined target.
  std::optional<double> fidelity_to_target;
  std::optional<double> trace_distance_routes;
};

struct EprReport {
  std::vector<EprOutcome> outcomes;
  /// Mixing matrix the model was built from, after any efficiency extension.
  RMatrix effective_lambda;
  double eta = 1.0;
  double total_click_probability = 0.0;
  /// Modeling caveats, e.g. how the no-click reading was constructed.
  std::string note;
};

/// Run both routes for a nonideal measurement of basis 1 on particle 1 and
/// collect per-reading probabilities, states, fidelity to the projection
/// target |a^(2)_m⟩, and the distance between the routes. When `eta` is
/// given the mixing matrix is extended with a no-click reading first.
EprReport epr_report(const EprState& epr, const NonidealityMatrix& lam,
                     std::optional<double> eta = std::nullopt);

}  // namespace condprep
