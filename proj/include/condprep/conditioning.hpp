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
#include <vector>

#include "condprep/models.hpp"
#include "condprep/states.hpp"

namespace condprep {

/// Per-outcome detection probability and conditionally prepared state.
/// Outcomes whose probability falls at or below the conditioning floor have
/// no state: the conditional state is undefined there, and the data model
/// says so explicitly instead of renormalizing noise.
class ConditioningResult {
 public:
  struct Entry {
    int outcome = 0;
    double p = 0.0;
    std::optional<DensityOperator> state;
  };

  explicit ConditioningResult(std::vector<Entry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  const Entry& entry(int m) const { return entries_.at(m); }
  const std::vector<Entry>& entries() const { return entries_; }
  double p(int m) const { return entries_.at(m).p; }
  const std::optional<DensityOperator>& state(int m) const {
    return entries_.at(m).state;
  }
  /// Σ_m p(m); below one when the pointer family does not resolve identity.
  double total_probability() const { return total_probability_; }

 private:
  std::vector<Entry> entries_;
  double total_probability_ = 0.0;
};

/// Joint table p(m, n) over pointer readings m and object-test outcomes n.
class JointDistribution {
 public:
  JointDistribution(RMatrix table, bool expect_normalized);

  int pointer_outcomes() const { return static_cast<int>(table_.rows()); }
  int test_outcomes() const { return static_cast<int>(table_.cols()); }
  double p(int m, int n) const { return table_(m, n); }
  const RMatrix& table() const { return table_; }
  RVector pointer_marginal() const { return table_.rowwise().sum(); }
  RVector test_marginal() const { return table_.colwise().sum(); }

 private:
  RMatrix table_;
};

/// Premeasurement evolution ρ_f = U (ρ^(o) ⊗ ρ^(a)) U† on object ⊕ apparatus.
DensityOperator evolve(const MeasurementModel& model, const DensityOperator& rho_o);

/// Detection probabilities p(m) = Tr[ρ_f (I ⊗ E_m)], one per pointer reading.
std::vector<double> outcome_probabilities(const MeasurementModel& model,
                                          const DensityOperator& rho_o);

/// Conditionally prepared object states ρ^(o)_fm = Tr_a[ρ_f (I ⊗ E_m)] / p(m).
/// The apparatus is traced out first, then the division; the result is
/// re-Hermitized and re-normalized but never PSD-repaired.
ConditioningResult conditional_states(const MeasurementModel& model,
                                      const DensityOperator& rho_o);

/// Joint statistics of the pointer reading and an object POVM measured in
/// the final state: p(m, n) = Tr[ρ_f (I ⊗ E_m)(F_n ⊗ I)].
JointDistribution joint_distribution(const MeasurementModel& model,
                                     const DensityOperator& rho_o, const Povm& f);

/// Conditional preparation of a two-particle system when the measurement
/// touches only the first particle: the coupling is embedded to act
/// trivially on the second, and the returned states live on both particles.
ConditioningResult two_particle_conditional(const MeasurementModel& model,
                                            const DensityOperator& rho_12);

}  // namespace condprep
