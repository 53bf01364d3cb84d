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

#include "condprep/space_layout.hpp"
#include "condprep/states.hpp"
#include "condprep/tensor.hpp"
#include "condprep/types.hpp"

namespace condprep {

/// Family of mutually orthogonal apparatus projectors E_m, one per pointer
/// reading. Each reading may be degenerate: block m holds the orthonormal
/// vectors |θ_mi⟩ spanning it. Σ_m E_m ≤ I always; equality holds when the
/// blocks span the apparatus space.
class PointerObservable {
 public:
  PointerObservable(SpaceLayout apparatus_layout, std::vector<CMatrix> blocks);

  const SpaceLayout& layout() const { return layout_; }
  int outcome_count() const { return static_cast<int>(blocks_.size()); }
  /// Orthonormal columns spanning reading m (dim × degeneracy).
  const CMatrix& block(int m) const { return blocks_.at(m); }
  CMatrix projector(int m) const;
  /// True when Σ_m E_m = I on the apparatus space.
  bool resolves_identity() const { return complete_; }

 private:
  SpaceLayout layout_;
  std::vector<CMatrix> blocks_;
  bool complete_ = false;
};

/// Complete premeasurement description: apparatus initial state ρ^(a),
/// coupling unitary U on object ⊗ apparatus, and the pointer observable
/// read out after the interaction.
class MeasurementModel {
 public:
  MeasurementModel(SpaceLayout object_layout, DensityOperator apparatus_state,
                   UnitaryOperator coupling, PointerObservable pointer);

  const SpaceLayout& object_layout() const { return object_layout_; }
  const SpaceLayout& apparatus_layout() const { return apparatus_state_.layout(); }
  /// object ⊕ apparatus, the space the coupling acts on.
  const SpaceLayout& total_layout() const { return total_layout_; }
  const DensityOperator& apparatus_state() const { return apparatus_state_; }
  const UnitaryOperator& coupling() const { return coupling_; }
  const PointerObservable& pointer() const { return pointer_; }
  int outcome_count() const { return pointer_.outcome_count(); }

  std::vector<std::string> object_labels() const;
  std::vector<std::string> apparatus_labels() const;

 private:
  SpaceLayout object_layout_;
  SpaceLayout total_layout_;
  DensityOperator apparatus_state_;
  UnitaryOperator coupling_;
  PointerObservable pointer_;
};

/// Column-stochastic mixing matrix λ: entry (m, m') is the probability of
/// pointer reading m given ideal outcome m'. Rows index pointer readings,
/// columns index the measured observable's outcomes.
class NonidealityMatrix {
 public:
  explicit NonidealityMatrix(RMatrix lambda);

  static NonidealityMatrix identity(int outcomes);
  /// Every entry 1/M: the information-free measurement.
  static NonidealityMatrix uniform(int outcomes);
  /// 1−p on the diagonal, p spread evenly over the other rows.
  static NonidealityMatrix symmetric_noise(int outcomes, double p);

  int pointer_outcomes() const { return static_cast<int>(lambda_.rows()); }
  int object_outcomes() const { return static_cast<int>(lambda_.cols()); }
  double operator()(int m, int mp) const { return lambda_(m, mp); }
  const RMatrix& matrix() const { return lambda_; }

 private:
  RMatrix lambda_;
};

/// Extend λ with a no-click pointer row: click rows are scaled by the
/// detector efficiency η and the new row absorbs the missing 1−η from
/// every column, so columns still sum to one.
NonidealityMatrix with_detector_efficiency(const NonidealityMatrix& lam, double eta);

/// Positive operator-valued measure on the object space. Elements are PSD;
/// their sum is bounded by I and equals I when the underlying pointer
/// observable resolves the apparatus identity.
class Povm {
 public:
  Povm(SpaceLayout object_layout, std::vector<CMatrix> elements);

  const SpaceLayout& layout() const { return layout_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const CMatrix& element(int m) const { return elements_.at(m); }
  const std::vector<CMatrix>& elements() const { return elements_; }
  bool complete() const { return complete_; }

 private:
  SpaceLayout layout_;
  std::vector<CMatrix> elements_;
  bool complete_ = false;
};

/// Measurement that leaves the object in the measured eigenstate: the
/// coupling shifts a fresh pointer by the outcome index,
/// U|a_m⟩|θ⟩ = |a_m⟩|θ_m⟩. Requires a nondegenerate basis.
MeasurementModel build_first_kind(const ObservableBasis& basis,
                                  const std::string& apparatus_label = "a");

/// Measurement whose interaction disturbs the object, U|a_m⟩|θ⟩ = |ψ_m⟩|θ_m⟩
/// with configurable normalized final states ψ_m (in general not mutually
/// orthogonal). The map is completed to a genuine unitary; the completion is
/// deterministic and invisible to outcome statistics because the apparatus
/// starts in |θ⟩.
MeasurementModel build_second_kind(const ObservableBasis& basis,
                                   const std::vector<CVector>& final_states,
                                   const std::string& apparatus_label = "a");

/// Nonideal measurement of the basis observable with mixing matrix λ.
/// The apparatus carries one pointer block per reading, with degeneracy
/// index identified with the source outcome:
/// U|a_m'⟩|θ⟩ = |a_m'⟩ Σ_m √λ_mm' |θ_{m,m'}⟩.
MeasurementModel build_lambda_model(const ObservableBasis& basis,
                                    const NonidealityMatrix& lam,
                                    const std::string& apparatus_label = "a");

/// POVM induced on the object: M_m = Tr_a[(I ⊗ ρ^(a)) U† (I ⊗ E_m) U].
Povm extract_povm(const MeasurementModel& model);

struct NonidealityCheck {
  struct Violation {
    int pointer = 0;  // pointer reading m
    int left = 0;     // source outcome m'
    int right = 0;    // source outcome m''
    double magnitude = 0.0;
  };
  std::optional<NonidealityMatrix> lambda;  // present iff the check passed
  std::optional<Violation> worst;           // largest cross term on failure
  double max_off_diagonal = 0.0;
  std::string note;

  bool ok() const { return lambda.has_value(); }
};

/// Test whether the model is a nonideal measurement of the basis observable:
/// the cross traces Tr[U|a_m'⟩⟨a_m''|ρ^(a)U† E_m] must vanish for m' ≠ m'',
/// in which case the diagonal traces form the recovered λ.
NonidealityCheck verify_nonideality(const MeasurementModel& model,
                                    const ObservableBasis& basis);

/// Same measurement with an extra untouched factor appended to the object;
/// the coupling is embedded to act trivially on it.
MeasurementModel with_spectator(const MeasurementModel& model,
                                const SpaceLayout& spectator);

}  // namespace condprep
