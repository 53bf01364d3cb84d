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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "condprep/conditioning.hpp"
#include "condprep/metrics.hpp"
#include "condprep/models.hpp"
#include "condprep/tensor.hpp"
#include "helpers.hpp"

using namespace condprep;
using testing::max_abs_diff;
using testing::max_abs_diff_real;

namespace {

CVector basis_vector(int dim, int k) {
  CVector v = CVector::Zero(dim);
  v(k) = 1.0;
  return v;
}

CVector plus_state() {
  CVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

// Initial apparatus vector of a model whose apparatus state is pure.
CVector apparatus_vector(const MeasurementModel& model) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(model.apparatus_state().matrix());
  const int top = static_cast<int>(solver.eigenvalues().size()) - 1;
  REQUIRE(solver.eigenvalues()(top) > 1.0 - 1e-12);
  return solver.eigenvectors().col(top);
}

}  // namespace

TEST_CASE("pointer observables demand orthonormal blocks") {
  const SpaceLayout apparatus = SpaceLayout::single("a", 2);
  CMatrix tilted(2, 1);
  tilted << 1.0, 0.5;
  std::vector<CMatrix> blocks;
  blocks.push_back(tilted);
  CHECK_THROWS_AS(PointerObservable(apparatus, blocks), ValidationError);
}

TEST_CASE("pointer observables know whether they span the apparatus") {
  const SpaceLayout apparatus = SpaceLayout::single("a", 3);
  std::vector<CMatrix> full;
  full.push_back(basis_vector(3, 0));
  CMatrix rest(3, 2);
  rest.col(0) = basis_vector(3, 1);
  rest.col(1) = basis_vector(3, 2);
  full.push_back(rest);
  CHECK(PointerObservable(apparatus, full).resolves_identity());

  std::vector<CMatrix> partial;
  partial.push_back(basis_vector(3, 0));
  partial.push_back(basis_vector(3, 2));
  const PointerObservable deficient(apparatus, partial);
  CHECK(!deficient.resolves_identity());
  CHECK(max_abs_diff(deficient.projector(1),
                     basis_vector(3, 2) * basis_vector(3, 2).adjoint()) <
        1e-14);
}

TEST_CASE("a repeatable-outcome model correlates object and pointer") {
  const ObservableBasis basis =
      ObservableBasis::computational(SpaceLayout::single("o", 2));
  const MeasurementModel model = build_first_kind(basis);
  const CVector theta = apparatus_vector(model);

  const CVector in = tensor_product(plus_state(), theta);
  const CVector out = model.coupling().matrix() * in;
  // Expect (|0⟩θ_0 + |1⟩θ_1)/√2 where θ_m spans pointer reading m.
  for (int m = 0; m < 2; ++m) {
    const CVector branch =
        tensor_product(basis.vector(m), CVector(model.pointer().block(m)));
    CHECK(std::abs(std::abs(branch.dot(out)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  }
  CHECK(std::abs(out.norm() - 1.0) < 1e-12);
}

TEST_CASE("a repeatable-outcome model induces the eigenprojector measure") {
  auto rng = testing::seeded_rng(31);
  const ObservableBasis basis =
      testing::random_basis(rng, SpaceLayout::single("o", 3));
  const MeasurementModel model = build_first_kind(basis);
  const Povm povm = extract_povm(model);
  REQUIRE(povm.size() == 3);
  CHECK(povm.complete());
  for (int m = 0; m < 3; ++m) {
    CHECK(max_abs_diff(povm.element(m),
                       basis.vector(m) * basis.vector(m).adjoint()) < 1e-10);
  }

  // An eigenstate is detected at its own outcome with certainty.
  const DensityOperator eigenstate(
      model.object_layout(), basis.vector(1) * basis.vector(1).adjoint());
  const std::vector<double> p = outcome_probabilities(model, eigenstate);
  CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a disturbing model acts like the repeatable one when the final "
          "states are the eigenvectors") {
  auto rng = testing::seeded_rng(32);
  const ObservableBasis basis =
      testing::random_basis(rng, SpaceLayout::single("o", 3));
  std::vector<CVector> final_states;
  for (int m = 0; m < 3; ++m) final_states.push_back(basis.vector(m));
  const MeasurementModel second = build_second_kind(basis, final_states);
  const MeasurementModel first = build_first_kind(basis);
  const CVector theta = apparatus_vector(second);
  for (int m = 0; m < 3; ++m) {
    const CVector in = tensor_product(basis.vector(m), theta);
    CHECK(max_abs_diff(CMatrix(second.coupling().matrix() * in),
                       CMatrix(first.coupling().matrix() * in)) < 1e-10);
  }
}

TEST_CASE("a disturbing model leaves the configured final state behind") {
  const ObservableBasis basis =
      ObservableBasis::computational(SpaceLayout::single("o", 2));
  std::vector<CVector> final_states;
  final_states.push_back(basis_vector(2, 0));  // |0⟩ stays
  final_states.push_back(plus_state());        // |1⟩ is kicked to |+⟩
  const MeasurementModel model = build_second_kind(basis, final_states);

  const DensityOperator one(model.object_layout(),
                            basis_vector(2, 1) * basis_vector(2, 1).adjoint());
  const ConditioningResult result = conditional_states(model, one);
  CHECK(result.p(1) == doctest::Approx(1.0));
  REQUIRE(result.state(1).has_value());
  CHECK(fidelity_to_pure(plus_state(), result.state(1)->matrix()) >
        1.0 - 1e-10);
}

TEST_CASE("the disturbing model's completion is a genuine unitary") {
  auto rng = testing::seeded_rng(33);
  const ObservableBasis basis =
      testing::random_basis(rng, SpaceLayout::single("o", 4));
  std::vector<CVector> final_states;
  for (int m = 0; m < 4; ++m) {
    final_states.push_back(testing::random_state_vector(rng, 4));
  }
  const MeasurementModel model = build_second_kind(basis, final_states);
  const CMatrix& u = model.coupling().matrix();
  CHECK(max_abs_diff(u.adjoint() * u,
                     CMatrix::Identity(u.rows(), u.cols())) < 1e-10);
}

TEST_CASE("disturbing models reject unnormalized final states") {
  const ObservableBasis basis =
      ObservableBasis::computational(SpaceLayout::single("o", 2));
  std::vector<CVector> final_states;
  final_states.push_back(basis_vector(2, 0));
  final_states.push_back(0.7 * basis_vector(2, 1));
  CHECK_THROWS_AS(build_second_kind(basis, final_states), ValidationError);
  final_states.pop_back();
  CHECK_THROWS_AS(build_second_kind(basis, final_states), ValidationError);
}

TEST_CASE("mixing models reproduce their mixing matrix in the measure") {
  const ObservableBasis basis =
      ObservableBasis::computational(SpaceLayout::single("o", 2));

  SUBCASE("identity mixing is the repeatable measurement") {
    const MeasurementModel model =
        build_lambda_model(basis, NonidealityMatrix::identity(2));
    const Povm povm = extract_povm(model);
    for (int m = 0; m < 2; ++m) {
      CHECK(max_abs_diff(povm.element(m),
                         basis.vector(m) * basis.vector(m).adjoint()) < 1e-10);
    }
  }

  SUBCASE("a stochastic matrix lands on the smeared eigenprojectors") {
    RMatrix lambda(2, 2);
    lambda << 0.9, 0.1, 0.1, 0.9;
    const MeasurementModel model =
        build_lambda_model(basis, NonidealityMatrix(lambda));
    const Povm povm = extract_povm(model);
    CMatrix expected0 = CMatrix::Zero(2, 2);
    expected0(0, 0) = 0.9;
    expected0(1, 1) = 0.1;
    CHECK(max_abs_diff(povm.element(0), expected0) < 1e-10);
    CMatrix expected1 = CMatrix::Zero(2, 2);
    expected1(0, 0) = 0.1;
    expected1(1, 1) = 0.9;
    CHECK(max_abs_diff(povm.element(1), expected1) < 1e-10);
  }

  SUBCASE("uniform mixing erases all information") {
    auto rng = testing::seeded_rng(34);
    const MeasurementModel model =
        build_lambda_model(basis, NonidealityMatrix::uniform(2));
    for (int trial = 0; trial < 5; ++trial) {
      const DensityOperator rho(model.object_layout(),
                                testing::random_density_matrix(rng, 2));
      for (double p : outcome_probabilities(model, rho)) {
        CHECK(p == doctest::Approx(0.5));
      }
    }
  }
}

TEST_CASE("mixing-matrix constructors and validation") {
  CHECK(max_abs_diff_real(NonidealityMatrix::identity(3).matrix(),
                          RMatrix::Identity(3, 3)) == 0.0);
  const RMatrix uniform = NonidealityMatrix::uniform(4).matrix();
  CHECK(uniform.minCoeff() == doctest::Approx(0.25));
  CHECK(uniform.maxCoeff() == doctest::Approx(0.25));
  const RMatrix noisy = NonidealityMatrix::symmetric_noise(3, 0.3).matrix();
  CHECK(noisy(0, 0) == doctest::Approx(0.7));
  CHECK(noisy(1, 0) == doctest::Approx(0.15));
  CHECK(noisy.colwise().sum().maxCoeff() == doctest::Approx(1.0));

  RMatrix negative(2, 2);
  negative << 1.1, 0.0, -0.1, 1.0;
  CHECK_THROWS_AS(NonidealityMatrix{negative}, ValidationError);
  RMatrix leaky(2, 2);
  leaky << 0.8, 0.1, 0.1, 0.9;
  CHECK_THROWS_AS(NonidealityMatrix{leaky}, ValidationError);
}

TEST_CASE("detector efficiency adds a no-click row that balances columns") {
  const NonidealityMatrix ideal = NonidealityMatrix::identity(2);

  SUBCASE("perfect detection leaves an empty extra row") {
    const NonidealityMatrix lifted = with_detector_efficiency(ideal, 1.0);
    REQUIRE(lifted.pointer_outcomes() == 3);
    CHECK(lifted.matrix().row(2).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("a dead detector never clicks") {
    const NonidealityMatrix lifted = with_detector_efficiency(ideal, 0.0);
    CHECK(lifted.matrix().topRows(2).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(lifted.matrix().row(2).minCoeff() == doctest::Approx(1.0));
  }

  SUBCASE("partial efficiency splits the weight and states stay stochastic") {
    const NonidealityMatrix lifted = with_detector_efficiency(ideal, 0.8);
    const RVector sums = lifted.matrix().colwise().sum();
    CHECK(std::abs(sums.minCoeff() - 1.0) < 1e-12);
    CHECK(std::abs(sums.maxCoeff() - 1.0) < 1e-12);

    const ObservableBasis basis =
        ObservableBasis::computational(SpaceLayout::single("o", 2));
    const MeasurementModel model = build_lambda_model(basis, lifted);
    const DensityOperator rho(model.object_layout(),
                              plus_state() * plus_state().adjoint());
    const std::vector<double> p = outcome_probabilities(model, rho);
    REQUIRE(p.size() == 3);
    CHECK(p[0] == doctest::Approx(0.4));
    CHECK(p[1] == doctest::Approx(0.4));
    CHECK(p[2] == doctest::Approx(0.2));
  }

  SUBCASE("efficiencies outside the unit interval are rejected") {
    CHECK_THROWS_AS(with_detector_efficiency(ideal, 1.2), ValidationError);
    CHECK_THROWS_AS(with_detector_efficiency(ideal, -0.1), ValidationError);
  }
}

TEST_CASE("the induced measure reproduces detection statistics") {
  auto rng = testing::seeded_rng(35);
  const SpaceLayout object = SpaceLayout::single("o", 3);
  const ObservableBasis basis = testing::random_basis(rng, object);

  std::vector<MeasurementModel> models;
  models.push_back(build_first_kind(basis));
  std::vector<CVector> final_states;
  for (int m = 0; m < 3; ++m) {
    final_states.push_back(testing::random_state_vector(rng, 3));
  }
  models.push_back(build_second_kind(basis, final_states));
  models.push_back(
      build_lambda_model(basis, NonidealityMatrix(testing::random_stochastic(
                                    rng, 3, 3))));

  for (const MeasurementModel& model : models) {
    const Povm povm = extract_povm(model);
    CMatrix sum = CMatrix::Zero(3, 3);
    for (int m = 0; m < povm.size(); ++m) sum += povm.element(m);
    CHECK(max_abs_diff(sum, CMatrix::Identity(3, 3)) < 1e-10);

    const DensityOperator rho(object, testing::random_density_matrix(rng, 3));
    const std::vector<double> direct = outcome_probabilities(model, rho);
    for (int m = 0; m < povm.size(); ++m) {
      const double via_measure = (rho.matrix() * povm.element(m)).trace().real();
      CHECK(std::abs(direct[m] - via_measure) < 1e-10);
    }
  }
}

TEST_CASE("mixing recovery round-trips through the model") {
  auto rng = testing::seeded_rng(36);
  const SpaceLayout object = SpaceLayout::single("o", 3);
  const ObservableBasis basis = testing::random_basis(rng, object);
  const RMatrix lambda = testing::random_stochastic(rng, 4, 3);
  const MeasurementModel model =
      build_lambda_model(basis, NonidealityMatrix(lambda));
  const NonidealityCheck check = verify_nonideality(model, basis);
  REQUIRE(check.ok());
  CHECK(max_abs_diff_real(check.lambda->matrix(), lambda) < 1e-10);
  CHECK(check.max_off_diagonal < 1e-9);
}

TEST_CASE("a repeatable measurement recovers the identity mixing matrix") {
  const ObservableBasis basis =
      ObservableBasis::computational(SpaceLayout::single("o", 3));
  const NonidealityCheck check =
      verify_nonideality(build_first_kind(basis), basis);
  REQUIRE(check.ok());
  CHECK(max_abs_diff_real(check.lambda->matrix(), RMatrix::Identity(3, 3)) <
        1e-10);
}

TEST_CASE("a basis-rotating coupling is flagged as not mixing that basis") {
  const ObservableBasis basis =
      ObservableBasis::computational(SpaceLayout::single("o", 2));
  const MeasurementModel plain = build_first_kind(basis);

  CMatrix hadamard(2, 2);
  hadamard << 1.0, 1.0, 1.0, -1.0;
  hadamard /= std::sqrt(2.0);
  const CMatrix rotated_matrix =
      plain.coupling().matrix() *
      embed(hadamard, plain.total_layout(), {"o"});
  const MeasurementModel rotated(
      plain.object_layout(), plain.apparatus_state(),
      UnitaryOperator(plain.total_layout(), rotated_matrix), plain.pointer());

  const NonidealityCheck check = verify_nonideality(rotated, basis);
  CHECK(!check.ok());
  REQUIRE(check.worst.has_value());
  CHECK(check.max_off_diagonal == doctest::Approx(0.5));
  CHECK(check.worst->left != check.worst->right);
}

TEST_CASE("measures may be deficient but never overcomplete") {
  const SpaceLayout object = SpaceLayout::single("o", 2);
  std::vector<CMatrix> deficient;
  deficient.push_back(0.5 * CMatrix::Identity(2, 2));
  const Povm partial(object, deficient);
  CHECK(!partial.complete());

  std::vector<CMatrix> over;
  over.push_back(CMatrix::Identity(2, 2));
  over.push_back(0.5 * CMatrix::Identity(2, 2));
  CHECK_THROWS_AS(Povm(object, over), ValidationError);

  CMatrix negative(2, 2);
  negative << 0.5, 0.0, 0.0, -0.1;
  std::vector<CMatrix> indefinite;
  indefinite.push_back(negative);
  CHECK_THROWS_AS(Povm(object, indefinite), ValidationError);
}

TEST_CASE("spectator factors ride along untouched") {
  auto rng = testing::seeded_rng(37);
  const ObservableBasis basis =
      ObservableBasis::computational(SpaceLayout::single("o", 2));
  const MeasurementModel model = build_first_kind(basis);
  const SpaceLayout spectator = SpaceLayout::single("s", 3);
  const MeasurementModel extended = with_spectator(model, spectator);

  CHECK(extended.object_layout().total_dim() == 6);
  CHECK(extended.object_labels() ==
        std::vector<std::string>{"o", "s"});

  // Statistics of a product input factorize: the spectator is irrelevant.
  const CMatrix rho_o = testing::random_density_matrix(rng, 2);
  const CMatrix rho_s = testing::random_density_matrix(rng, 3);
  const DensityOperator joint(extended.object_layout(),
                              tensor_product(rho_o, rho_s));
  const std::vector<double> p_joint = outcome_probabilities(extended, joint);
  const std::vector<double> p_alone = outcome_probabilities(
      model, DensityOperator(model.object_layout(), rho_o));
  for (int m = 0; m < 2; ++m) {
    CHECK(std::abs(p_joint[m] - p_alone[m]) < 1e-12);
  }
}

TEST_CASE("builders refuse degenerate bases") {
  const SpaceLayout object = SpaceLayout::single("o", 2);
  RVector eigenvalues(2);
  eigenvalues << 1.0, 1.0;
  const ObservableBasis degenerate(object, eigenvalues,
                                   CMatrix::Identity(2, 2));
  CHECK_THROWS_AS(build_first_kind(degenerate), UnsupportedError);
}
