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

#include "condprep/epr.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>

#include "condprep/metrics.hpp"
#include "condprep/tensor.hpp"

namespace condprep {

namespace {

// Dominant eigenvector when ρ is pure within tolerance, otherwise empty.
std::optional<CVector> pure_component(const DensityOperator& rho) {
  const double purity = (rho.matrix() * rho.matrix()).real().trace();
  if (purity < 1.0 - 1e-12) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho.matrix());
  CVector top = solver.eigenvectors().col(rho.dim() - 1);
  top.normalize();
  return top;
}

ConditioningResult simulated_pure_apparatus(const EprState& epr,
                                            const MeasurementModel& model,
                                            const CVector& theta0) {
  const SpaceLayout pair = epr.pair_layout();
  const SpaceLayout total = pair.concat(model.apparatus_layout());
  const int d1 = epr.basis1().dim();
  const int d2 = epr.basis2().dim();
  const int app_dim = model.apparatus_layout().total_dim();

  const CVector psi_total =
      tensor_product(epr.state().amplitudes(), theta0);
  std::vector<std::string> acts_on = model.object_labels();
  for (const auto& l : model.apparatus_labels()) acts_on.push_back(l);
  const CVector psi_f =
      apply_embedded(model.coupling().matrix(), total, acts_on, psi_total);

  // Rows index the two-particle configuration, columns the apparatus.
  using RowMajor =
      Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> psi_grid(psi_f.data(), d1 * d2, app_dim);

  const SpaceLayout particle2 = SpaceLayout({pair.factor(1)});
  std::vector<ConditioningResult::Entry> entries;
  entries.reserve(model.outcome_count());
  for (int m = 0; m < model.outcome_count(); ++m) {
    // One unnormalized branch vector per degenerate pointer direction:
    // v_i = (I ⊗ ⟨θ_mi|) |Ψ_f⟩.
    const CMatrix branches = psi_grid * model.pointer().block(m).conjugate();
    const double p = branches.squaredNorm();
    ConditioningResult::Entry entry;
    entry.outcome = m;
    entry.p = p;
    if (p > tol::conditioning) {
      CMatrix rho2 = CMatrix::Zero(d2, d2);
      for (int i = 0; i < branches.cols(); ++i) {
        const Eigen::Map<const RowMajor> w(branches.col(i).data(), d1, d2);
        rho2 += w.transpose() * w.conjugate();
      }
      rho2 /= p;
      rho2 = 0.5 * (rho2 + rho2.adjoint());
      entry.state.emplace(particle2, std::move(rho2));
    }
    entries.push_back(std::move(entry));
  }
  return ConditioningResult(std::move(entries));
}

}  // namespace

EprState::EprState(CVector coefficients, ObservableBasis basis1,
                   ObservableBasis basis2)
    : coefficients_(std::move(coefficients)),
      basis1_(std::move(basis1)),
      basis2_(std::move(basis2)) {
  if (!basis1_.nondegenerate() || !basis2_.nondegenerate()) {
    throw ValidationError(
        "Schmidt form needs one basis vector per outcome on both sides");
  }
  if (coefficients_.size() != basis1_.dim() ||
      coefficients_.size() != basis2_.dim()) {
    throw ValidationError(
        "coefficient count " + std::to_string(coefficients_.size()) +
        " does not match basis dimensions " + std::to_string(basis1_.dim()) +
        " and " + std::to_string(basis2_.dim()));
  }
  const double norm2 = coefficients_.squaredNorm();
  if (std::abs(norm2 - 1.0) > tol::state_norm) {
    throw ValidationError("Schmidt coefficients have squared norm " +
                          std::to_string(norm2) + ", expected one");
  }
  pair_layout();  // rejects colliding factor labels
}

EprState EprState::computational(const CVector& coefficients,
                                 const std::string& label1,
                                 const std::string& label2) {
  const int d = static_cast<int>(coefficients.size());
  return EprState(
      coefficients,
      ObservableBasis::computational(SpaceLayout::single(label1, d)),
      ObservableBasis::computational(SpaceLayout::single(label2, d)));
}

SpaceLayout EprState::pair_layout() const {
  return basis1_.layout().concat(basis2_.layout());
}

PureState EprState::state() const {
  const int d = outcome_count();
  CVector amplitudes = CVector::Zero(basis1_.dim() * basis2_.dim());
  for (int m = 0; m < d; ++m) {
    amplitudes +=
        coefficients_(m) * tensor_product(basis1_.vector(m), basis2_.vector(m));
  }
  return PureState(pair_layout(), std::move(amplitudes));
}

DensityOperator EprState::density() const { return state().density(); }

ConditioningResult particle2_conditional_simulated(
    const EprState& epr, const MeasurementModel& model) {
  if (!(model.object_layout() == epr.basis1().layout())) {
    throw LayoutError("model measures " + model.object_layout().to_string() +
                      ", the first particle lives on " +
                      epr.basis1().layout().to_string());
  }
  if (const auto theta0 = pure_component(model.apparatus_state())) {
    return simulated_pure_apparatus(epr, model, *theta0);
  }
  const ConditioningResult pair_states =
      two_particle_conditional(model, epr.density());
  const std::string label2 = epr.basis2().layout().factor(0).label;
  std::vector<ConditioningResult::Entry> entries;
  entries.reserve(pair_states.size());
  for (const auto& pair_entry : pair_states.entries()) {
    ConditioningResult::Entry entry;
    entry.outcome = pair_entry.outcome;
    entry.p = pair_entry.p;
    if (pair_entry.state.has_value()) {
      entry.state = pair_entry.state->reduced({label2});
    }
    entries.push_back(std::move(entry));
  }
  return ConditioningResult(std::move(entries));
}

ConditioningResult particle2_conditional_closed_form(
    const EprState& epr, const NonidealityMatrix& lam) {
  if (lam.object_outcomes() != epr.outcome_count()) {
    throw ValidationError("mixing matrix has " +
                          std::to_string(lam.object_outcomes()) +
                          " source columns for " +
                          std::to_string(epr.outcome_count()) +
                          " Schmidt terms");
  }
  const int d = epr.outcome_count();
  const RVector weights_sq = epr.coefficients().cwiseAbs2();
  const SpaceLayout particle2 = epr.basis2().layout();

  std::vector<ConditioningResult::Entry> entries;
  entries.reserve(lam.pointer_outcomes());
  for (int m = 0; m < lam.pointer_outcomes(); ++m) {
    double p = 0.0;
    for (int mp = 0; mp < d; ++mp) p += lam(m, mp) * weights_sq(mp);
    ConditioningResult::Entry entry;
    entry.outcome = m;
    entry.p = p;
    if (p > tol::conditioning) {
      CMatrix rho2 = CMatrix::Zero(d, d);
      for (int mp = 0; mp < d; ++mp) {
        const double weight = lam(m, mp) * weights_sq(mp) / p;
        if (weight == 0.0) continue;
        const CVector a2 = epr.basis2().vector(mp);
        rho2 += weight * (a2 * a2.adjoint());
      }
      entry.state.emplace(particle2, std::move(rho2));
    }
    entries.push_back(std::move(entry));
  }
  return ConditioningResult(std::move(entries));
}

EprReport epr_report(const EprState& epr, const NonidealityMatrix& lam,
                     std::optional<double> eta) {
  NonidealityMatrix effective = lam;
  EprReport report;
  report.eta = eta.value_or(1.0);
  if (eta.has_value()) {
    effective = with_detector_efficiency(lam, *eta);
    report.note =
        "no-click reading modeled as an extra pointer row taking the "
        "missing 1-eta weight uniformly from every source outcome";
  }
  report.effective_lambda = effective.matrix();

  std::string apparatus_label = "a";
  if (epr.pair_layout().has(apparatus_label)) apparatus_label = "apparatus";
  const MeasurementModel model =
      build_lambda_model(epr.basis1(), effective, apparatus_label);

  const ConditioningResult simulated = particle2_conditional_simulated(epr, model);
  const ConditioningResult closed = particle2_conditional_closed_form(epr, effective);

  const int readings = effective.pointer_outcomes();
  const int targets = epr.outcome_count();
  for (int m = 0; m < readings; ++m) {
    EprOutcome out;
    out.outcome = m;
    out.p = simulated.p(m);
    out.p_closed_form = closed.p(m);
    out.no_click = eta.has_value() && m == readings - 1;
    out.simulated = simulated.state(m);
    out.closed_form = closed.state(m);
    if (!out.no_click && m < targets && out.simulated.has_value()) {
      out.fidelity_to_target =
          fidelity_to_pure(epr.basis2().vector(m), out.simulated->matrix());
    }
    if (out.simulated.has_value() && out.closed_form.has_value()) {
      out.trace_distance_routes =
          trace_distance(out.simulated->matrix(), out.closed_form->matrix());
    }
    if (!out.no_click) report.total_click_probability += out.p;
    report.outcomes.push_back(std::move(out));
  }
  return report;
}

}  // namespace condprep
