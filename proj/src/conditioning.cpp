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

#include "condprep/conditioning.hpp"

#include <cmath>
#include <utility>

#include "condprep/tensor.hpp"

namespace condprep {

namespace {

// Σ_i (I ⊗ θ_i)† ρ (I ⊗ θ_i) over the columns θ_i of `theta`.  For an
// object-major flattening this equals Tr_a[ρ (I ⊗ ΘΘ†)], the unnormalized
// conditional object operator for the pointer projector ΘΘ†.
CMatrix block_reduce(const CMatrix& rho, int obj_dim, int app_dim,
                     const CMatrix& theta) {
  CMatrix out = CMatrix::Zero(obj_dim, obj_dim);
  for (int o = 0; o < obj_dim; ++o) {
    for (int op = 0; op < obj_dim; ++op) {
      const auto block = rho.block(o * app_dim, op * app_dim, app_dim, app_dim);
      out(o, op) = (theta.adjoint() * block * theta).trace();
    }
  }
  return out;
}

// ρ_f for a model whose object marginal is `rho_o`, as a raw matrix on the
// object ⊕ apparatus layout.
CMatrix final_state_matrix(const MeasurementModel& model,
                           const DensityOperator& rho_o) {
  if (!(rho_o.layout() == model.object_layout())) {
    throw LayoutError("object state layout " + rho_o.layout().to_string() +
                      " does not match the model object space " +
                      model.object_layout().to_string());
  }
  const CMatrix joint =
      tensor_product(rho_o.matrix(), model.apparatus_state().matrix());
  const CMatrix& u = model.coupling().matrix();
  CMatrix rho_f = u * joint * u.adjoint();
  rho_f = 0.5 * (rho_f + rho_f.adjoint());
  return rho_f;
}

ConditioningResult conditional_states_from_final(const MeasurementModel& model,
                                                 const CMatrix& rho_f) {
  const int obj_dim = model.object_layout().total_dim();
  const int app_dim = model.apparatus_layout().total_dim();
  const int readings = model.pointer().outcome_count();

  std::vector<ConditioningResult::Entry> entries;
  entries.reserve(readings);
  for (int m = 0; m < readings; ++m) {
    const CMatrix reduced =
        block_reduce(rho_f, obj_dim, app_dim, model.pointer().block(m));
    const double p = reduced.real().trace();
    ConditioningResult::Entry entry;
    entry.outcome = m;
    entry.p = p;
    if (p > tol::conditioning) {
      CMatrix state = reduced / p;
      state = 0.5 * (state + state.adjoint());
      state /= state.real().trace();
      entry.state.emplace(model.object_layout(), state);
    }
    entries.push_back(std::move(entry));
  }
  return ConditioningResult(std::move(entries));
}

}  // namespace

ConditioningResult::ConditioningResult(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  for (const Entry& entry : entries_) {
    if (entry.p < -tol::stochastic) {
      throw ValidationError("negative outcome probability " +
                            std::to_string(entry.p));
    }
    total_probability_ += entry.p;
  }
  if (total_probability_ > 1.0 + tol::stochastic) {
    throw ValidationError("outcome probabilities sum to " +
                          std::to_string(total_probability_) +
                          ", beyond one");
  }
}

JointDistribution::JointDistribution(RMatrix table, bool expect_normalized)
    : table_(std::move(table)) {
  if (table_.minCoeff() < -tol::stochastic) {
    throw ValidationError("negative joint probability in distribution table");
  }
  const double total = table_.sum();
  if (total > 1.0 + tol::stochastic) {
    throw ValidationError("joint probabilities sum to " +
                          std::to_string(total) + ", beyond one");
  }
  if (expect_normalized && std::abs(total - 1.0) > tol::stochastic) {
    throw ValidationError("joint probabilities sum to " +
                          std::to_string(total) + ", expected one");
  }
}

DensityOperator evolve(const MeasurementModel& model,
                       const DensityOperator& rho_o) {
  return DensityOperator(model.total_layout(), final_state_matrix(model, rho_o));
}

std::vector<double> outcome_probabilities(const MeasurementModel& model,
                                          const DensityOperator& rho_o) {
  const CMatrix rho_f = final_state_matrix(model, rho_o);
  const CMatrix rho_f_app =
      partial_trace(rho_f, model.total_layout(), model.apparatus_labels());
  std::vector<double> probabilities;
  probabilities.reserve(model.pointer().outcome_count());
  for (int m = 0; m < model.pointer().outcome_count(); ++m) {
    const CMatrix& theta = model.pointer().block(m);
    probabilities.push_back(
        (theta.adjoint() * rho_f_app * theta).real().trace());
  }
  return probabilities;
}

ConditioningResult conditional_states(const MeasurementModel& model,
                                      const DensityOperator& rho_o) {
  return conditional_states_from_final(model, final_state_matrix(model, rho_o));
}

JointDistribution joint_distribution(const MeasurementModel& model,
                                     const DensityOperator& rho_o,
                                     const Povm& f) {
  if (!(f.layout() == model.object_layout())) {
    throw LayoutError("object test layout " + f.layout().to_string() +
                      " does not match the model object space " +
                      model.object_layout().to_string());
  }
  const CMatrix rho_f = final_state_matrix(model, rho_o);
  const int obj_dim = model.object_layout().total_dim();
  const int app_dim = model.apparatus_layout().total_dim();
  const int readings = model.pointer().outcome_count();

  RMatrix table(readings, f.size());
  for (int m = 0; m < readings; ++m) {
    const CMatrix reduced =
        block_reduce(rho_f, obj_dim, app_dim, model.pointer().block(m));
    for (int n = 0; n < f.size(); ++n) {
      table(m, n) = (reduced * f.element(n)).real().trace();
    }
  }
  const bool expect_normalized =
      model.pointer().resolves_identity() && f.complete();
  return JointDistribution(std::move(table), expect_normalized);
}

ConditioningResult two_particle_conditional(const MeasurementModel& model,
                                            const DensityOperator& rho_12) {
  if (rho_12.layout().factor_count() != 2) {
    throw LayoutError("two-particle conditioning expects a two-factor state, "
                      "got " + rho_12.layout().to_string());
  }
  const SpaceLayout particle1 = SpaceLayout({rho_12.layout().factor(0)});
  const SpaceLayout particle2 = SpaceLayout({rho_12.layout().factor(1)});
  if (!(model.object_layout() == particle1)) {
    throw LayoutError("the measured particle " + particle1.to_string() +
                      " does not match the model object space " +
                      model.object_layout().to_string());
  }
  const MeasurementModel extended = with_spectator(model, particle2);
  return conditional_states(extended, rho_12);
}

}  // namespace condprep
