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

// End-to-end gate for the library: ten independent checks, each printing one
// PASS/FAIL line. The binary exits nonzero when any check fails. Randomized
// checks use fixed seeds so a failure is always reproducible.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "condprep/conditioning.hpp"
#include "condprep/epr.hpp"
#include "condprep/metrics.hpp"
#include "condprep/models.hpp"
#include "condprep/oracle.hpp"
#include "condprep/scenario.hpp"
#include "condprep/tensor.hpp"
#include "helpers.hpp"

using namespace condprep;

namespace {

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

// Extra context a check wants shown under its verdict line.
std::string g_note;

std::string fmt(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3e", x);
  return buffer;
}

// --------------------------------------------------------------------------
// 1. The closed-form mixing route and the full simulation agree on the far
//    particle's conditional states for 200 random scenarios, fast.
// --------------------------------------------------------------------------
void check_dual_route_bulk() {
  auto rng = testing::seeded_rng(101);
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 2 + trial % 5;  // 2..6
    const EprState epr(
        testing::random_state_vector(rng, dim),
        testing::random_basis(rng, SpaceLayout::single("p1", dim)),
        testing::random_basis(rng, SpaceLayout::single("p2", dim)));
    const NonidealityMatrix lam(testing::random_stochastic(rng, dim, dim));
    const ConditioningResult simulated = particle2_conditional_simulated(
        epr, build_lambda_model(epr.basis1(), lam));
    const ConditioningResult closed =
        particle2_conditional_closed_form(epr, lam);
    require(simulated.size() == closed.size(), "route outcome counts differ");
    for (int m = 0; m < simulated.size(); ++m) {
      require(std::abs(simulated.p(m) - closed.p(m)) <= 1e-10,
              "probabilities diverge at trial " + std::to_string(trial));
      require(simulated.state(m).has_value() && closed.state(m).has_value(),
              "a route dropped outcome " + std::to_string(m));
      worst = std::max(worst, trace_distance(simulated.state(m)->matrix(),
                                             closed.state(m)->matrix()));
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  require(worst <= 1e-10, "worst route distance " + fmt(worst));
  require(seconds < 10.0,
          "took " + fmt(seconds) + " s, budget is 10 s");
  char note[96];
  std::snprintf(note, sizeof note, "worst distance %s in %.2f s",
                fmt(worst).c_str(), seconds);
  g_note = note;
}

// --------------------------------------------------------------------------
// 2. With a perfect measurement the far particle lands exactly on the
//    paired basis vector, in every dimension.
// --------------------------------------------------------------------------
void check_ideal_projection() {
  auto rng = testing::seeded_rng(102);
  for (int dim = 2; dim <= 6; ++dim) {
    const EprState epr(
        testing::random_state_vector(rng, dim),
        testing::random_basis(rng, SpaceLayout::single("p1", dim)),
        testing::random_basis(rng, SpaceLayout::single("p2", dim)));
    const ConditioningResult result = particle2_conditional_simulated(
        epr, build_first_kind(epr.basis1()));
    for (int m = 0; m < dim; ++m) {
      require(result.state(m).has_value(),
              "outcome " + std::to_string(m) + " missing at dim " +
                  std::to_string(dim));
      const double fidelity = fidelity_to_pure(epr.basis2().vector(m),
                                               result.state(m)->matrix());
      require(fidelity >= 1.0 - 1e-10,
              "projection fidelity " + fmt(fidelity) + " at dim " +
                  std::to_string(dim));
    }
  }
}

// --------------------------------------------------------------------------
// 3. A repeatable measurement leaves eigenstates behind: follow-up tests
//    see |<b_n|a_m>|² and remeasuring an eigenstate is certain.
// --------------------------------------------------------------------------
void check_repeatable_statistics() {
  auto rng = testing::seeded_rng(103);
  for (int dim = 2; dim <= 4; ++dim) {
    const SpaceLayout object = SpaceLayout::single("o", dim);
    const ObservableBasis a = testing::random_basis(rng, object);
    const ObservableBasis b = testing::random_basis(rng, object);
    const MeasurementModel model = build_first_kind(a);
    const DensityOperator rho(object, testing::random_density_matrix(rng, dim));

    std::vector<CMatrix> elements;
    for (int n = 0; n < dim; ++n) {
      elements.push_back(b.vector(n) * b.vector(n).adjoint());
    }
    const JointDistribution joint =
        joint_distribution(model, rho, Povm(object, elements));
    const std::vector<double> p = outcome_probabilities(model, rho);
    for (int m = 0; m < dim; ++m) {
      require(p[m] > 1e-6, "vanishing outcome weight in a random state");
      for (int n = 0; n < dim; ++n) {
        const double conditional = joint.p(m, n) / p[m];
        const double overlap =
            std::norm(b.vector(n).dot(a.vector(m)));
        require(std::abs(conditional - overlap) <= 1e-10,
                "follow-up statistics off by " +
                    fmt(std::abs(conditional - overlap)));
      }
    }

    const DensityOperator eigenstate(
        object, a.vector(1) * a.vector(1).adjoint());
    const std::vector<double> again =
        outcome_probabilities(model, eigenstate);
    require(std::abs(again[1] - 1.0) <= 1e-10,
            "remeasuring an eigenstate was not certain");
  }
}

// --------------------------------------------------------------------------
// 4. A disturbing measurement leaves exactly the configured final states,
//    even when they overlap each other.
// --------------------------------------------------------------------------
void check_disturbing_states() {
  auto rng = testing::seeded_rng(104);
  for (int dim = 2; dim <= 4; ++dim) {
    const SpaceLayout object = SpaceLayout::single("o", dim);
    const ObservableBasis basis = testing::random_basis(rng, object);
    std::vector<CVector> final_states;
    final_states.push_back(testing::random_state_vector(rng, dim));
    for (int m = 1; m < dim; ++m) {
      // Deliberately correlated with the previous state so the set is far
      // from orthogonal.
      CVector psi = final_states.back() +
                    0.5 * testing::random_state_vector(rng, dim);
      psi.normalize();
      final_states.push_back(psi);
    }
    const MeasurementModel model = build_second_kind(basis, final_states);
    const DensityOperator rho(object, testing::random_density_matrix(rng, dim));
    const ConditioningResult result = conditional_states(model, rho);
    for (int m = 0; m < dim; ++m) {
      require(result.state(m).has_value(), "a disturbing outcome is missing");
      const double fidelity =
          fidelity_to_pure(final_states[m], result.state(m)->matrix());
      require(fidelity >= 1.0 - 1e-10,
              "final state fidelity " + fmt(fidelity));
    }
  }
}

// --------------------------------------------------------------------------
// 5. The mixing matrix used to build a model is recovered from the model,
//    including rectangular ones, with clean cross terms.
// --------------------------------------------------------------------------
void check_mixing_round_trip() {
  auto rng = testing::seeded_rng(105);
  std::uniform_int_distribution<int> dims(2, 6);
  double worst_entry = 0.0;
  double worst_cross = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int sources = dims(rng);
    const int readings = dims(rng);
    const RMatrix lambda = testing::random_stochastic(rng, readings, sources);
    const ObservableBasis basis =
        testing::random_basis(rng, SpaceLayout::single("o", sources));
    const MeasurementModel model =
        build_lambda_model(basis, NonidealityMatrix(lambda));
    const NonidealityCheck check = verify_nonideality(model, basis);
    require(check.ok(), "recovery rejected an honest mixing model");
    const double entry_error =
        (check.lambda->matrix() - lambda).cwiseAbs().maxCoeff();
    worst_entry = std::max(worst_entry, entry_error);
    worst_cross = std::max(worst_cross, check.max_off_diagonal);
  }
  require(worst_entry <= 1e-10, "matrix recovery off by " + fmt(worst_entry));
  require(worst_cross < 1e-9, "cross terms up to " + fmt(worst_cross));
}

// --------------------------------------------------------------------------
// 6. Every model induces a complete measure on the object, and that measure
//    reproduces the model's own detection statistics.
// --------------------------------------------------------------------------
void check_induced_measures() {
  auto rng = testing::seeded_rng(106);
  for (int dim = 2; dim <= 4; ++dim) {
    const SpaceLayout object = SpaceLayout::single("o", dim);
    const ObservableBasis basis = testing::random_basis(rng, object);
    std::vector<CVector> final_states;
    for (int m = 0; m < dim; ++m) {
      final_states.push_back(testing::random_state_vector(rng, dim));
    }
    std::vector<MeasurementModel> models;
    models.push_back(build_first_kind(basis));
    models.push_back(build_second_kind(basis, final_states));
    models.push_back(build_lambda_model(
        basis,
        NonidealityMatrix(testing::random_stochastic(rng, dim + 1, dim))));

    for (const MeasurementModel& model : models) {
      const Povm povm = extract_povm(model);
      CMatrix sum = CMatrix::Zero(dim, dim);
      for (int m = 0; m < povm.size(); ++m) sum += povm.element(m);
      const double defect =
          (sum - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
      require(defect <= 1e-10, "measure does not resolve identity: " +
                                   fmt(defect));

      const DensityOperator rho(object,
                                testing::random_density_matrix(rng, dim));
      const std::vector<double> direct = outcome_probabilities(model, rho);
      for (int m = 0; m < povm.size(); ++m) {
        const double via_measure =
            (rho.matrix() * povm.element(m)).trace().real();
        require(std::abs(direct[m] - via_measure) <= 1e-10,
                "measure statistics diverge by " +
                    fmt(std::abs(direct[m] - via_measure)));
      }
    }
  }
}

// --------------------------------------------------------------------------
// 7. Simulation, closed form, and pure statistics reconstruction agree on
//    the far particle's state for 50 scenarios.
// --------------------------------------------------------------------------
void check_triple_route() {
  auto rng = testing::seeded_rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + trial % 2;  // 2..3
    const EprState epr(
        testing::random_state_vector(rng, dim),
        testing::random_basis(rng, SpaceLayout::single("p1", dim)),
        testing::random_basis(rng, SpaceLayout::single("p2", dim)));
    const NonidealityMatrix lam(testing::random_stochastic(rng, dim, dim));
    const MeasurementModel model = build_lambda_model(epr.basis1(), lam);

    const ConditioningResult simulated =
        particle2_conditional_simulated(epr, model);
    const ConditioningResult closed =
        particle2_conditional_closed_form(epr, lam);

    const MeasurementModel extended =
        with_spectator(model, epr.basis2().layout());
    const DensityOperator rho_12(extended.object_layout(),
                                 epr.density().matrix());
    for (int m = 0; m < lam.pointer_outcomes(); ++m) {
      const DensityOperator via_statistics =
          oracle::tomographic_conditional(extended, rho_12, m)
              .reduced({epr.basis2().layout().factor(0).label});
      const CMatrix& a = simulated.state(m)->matrix();
      const CMatrix& b = closed.state(m)->matrix();
      const CMatrix& c = via_statistics.matrix();
      worst = std::max({worst, trace_distance(a, b), trace_distance(a, c),
                        trace_distance(b, c)});
    }
  }
  require(worst <= 1e-8, "routes disagree by " + fmt(worst));
  g_note = "worst pairwise distance " + fmt(worst);
}

// --------------------------------------------------------------------------
// 8. Unread measurements on one particle never move the other particle's
//    unconditional state.
// --------------------------------------------------------------------------
void check_no_signaling() {
  auto rng = testing::seeded_rng(108);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d1 = 2 + trial % 2;
    const int d2 = 2 + (trial / 2) % 2;
    const SpaceLayout pair({{"p1", d1}, {"p2", d2}});
    const ObservableBasis basis1 =
        testing::random_basis(rng, SpaceLayout::single("p1", d1));
    const DensityOperator rho_12(pair,
                                 testing::random_density_matrix(rng, d1 * d2));

    std::vector<MeasurementModel> models;
    models.push_back(build_first_kind(basis1));
    models.push_back(build_lambda_model(
        basis1, NonidealityMatrix(testing::random_stochastic(rng, d1, d1))));

    const CMatrix before = rho_12.reduced({"p2"}).matrix();
    for (const MeasurementModel& model : models) {
      const ConditioningResult result = two_particle_conditional(model, rho_12);
      CMatrix averaged = CMatrix::Zero(d2, d2);
      for (int m = 0; m < result.size(); ++m) {
        averaged += result.p(m) * result.state(m)->reduced({"p2"}).matrix();
      }
      worst = std::max(worst, (averaged - before).cwiseAbs().maxCoeff());
    }
  }
  require(worst <= 1e-10, "far state moved by " + fmt(worst));
}

// --------------------------------------------------------------------------
// 9. A detector that fires 80% of the time on one half of a Bell pair
//    leaves exactly one fifth of the weight, and a maximally mixed far
//    state, in the no-click reading.
// --------------------------------------------------------------------------
void check_detector_efficiency() {
  CVector bell(2);
  bell << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const EprReport report = epr_report(EprState::computational(bell),
                                      NonidealityMatrix::identity(2), 0.8);
  require(report.outcomes.size() == 3, "expected two clicks plus no-click");
  const EprOutcome& miss = report.outcomes.back();
  require(miss.no_click, "the extra reading is not flagged no-click");
  require(std::abs(miss.p - 0.2) <= 1e-12,
          "no-click weight " + fmt(miss.p) + " instead of 0.2");
  require(miss.simulated.has_value(), "no-click state missing");
  const double defect =
      (miss.simulated->matrix() - 0.5 * CMatrix::Identity(2, 2))
          .cwiseAbs()
          .maxCoeff();
  require(defect <= 1e-10, "no-click state off the maximal mixture by " +
                               fmt(defect));
  require(std::abs(report.total_click_probability - 0.8) <= 1e-12,
          "click probabilities do not sum to 0.8");
}

// --------------------------------------------------------------------------
// 10. The command-line tool is deterministic and honors its exit-code
//     contract: 0 on success, 1 on invalid input, 2 on failed verification.
// --------------------------------------------------------------------------
int run_cli(const std::string& args) {
  const std::string command = std::string(CONDPREP_CLI_PATH) + " " + args +
                              " > /dev/null 2> /dev/null";
  const int status = std::system(command.c_str());
  require(status != -1 && WIFEXITED(status), "could not launch the CLI");
  return WEXITSTATUS(status);
}

void check_cli_contract() {
  namespace fs = std::filesystem;
  const fs::path scenario =
      fs::path(CONDPREP_SCENARIO_DIR) / "bell_noise.json";
  require(fs::exists(scenario), "sample scenario file is missing");

  const fs::path out1 = fs::temp_directory_path() / "condprep_accept_1.json";
  const fs::path out2 = fs::temp_directory_path() / "condprep_accept_2.json";
  require(run_cli("run " + scenario.string() + " --out " + out1.string()) == 0,
          "a valid scenario did not exit 0");
  require(run_cli("run " + scenario.string() + " --out " + out2.string()) == 0,
          "the repeat run did not exit 0");

  std::ifstream f1(out1), f2(out2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  require(!s1.str().empty(), "the CLI wrote an empty report");
  require(s1.str() == s2.str(), "two identical runs produced different bytes");
  fs::remove(out1);
  fs::remove(out2);

  const fs::path broken = fs::temp_directory_path() / "condprep_broken.json";
  {
    std::ofstream out(broken);
    out << "{\"kind\": \"epr\", \"c\": [1, 0], \"lambda\": [[0.5], [0.4]]}";
  }
  require(run_cli("run " + broken.string()) == 1,
          "invalid input did not exit 1");
  fs::remove(broken);

  require(run_cli("run " + scenario.string() +
                  " --verify --tolerance 1e-20") == 2,
          "an unreachable verification tolerance did not exit 2");
}

struct Check {
  const char* label;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Check> checks = {
      {"closed form vs simulation on 200 random mixing scenarios, under 10 s",
       check_dual_route_bulk},
      {"perfect measurements project the far particle exactly (dims 2-6)",
       check_ideal_projection},
      {"repeatable measurements leave eigenstates with the right statistics",
       check_repeatable_statistics},
      {"disturbing measurements leave exactly the configured final states",
       check_disturbing_states},
      {"mixing matrices survive a build/recover round trip (100 cases)",
       check_mixing_round_trip},
      {"induced measures are complete and reproduce detection statistics",
       check_induced_measures},
      {"simulation, closed form, and statistics reconstruction all agree",
       check_triple_route},
      {"unread distant measurements cannot signal",
       check_no_signaling},
      {"an 80% detector leaves a fifth of a Bell pair unprojected",
       check_detector_efficiency},
      {"the CLI is byte-deterministic and keeps its exit-code contract",
       check_cli_contract},
  };

  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    std::string verdict = "PASS";
    std::string detail;
    g_note.clear();
    try {
      checks[i].body();
    } catch (const Failure& f) {
      verdict = "FAIL";
      detail = f.detail;
      ++failed;
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = std::string("unexpected error: ") + e.what();
      ++failed;
    }
    std::printf("[%s] %02zu %s\n", verdict.c_str(), i + 1, checks[i].label);
    if (!g_note.empty()) std::printf("       (%s)\n", g_note.c_str());
    if (!detail.empty()) std::printf("       %s\n", detail.c_str());
  }
  if (failed != 0) {
    std::printf("%d of %zu checks failed\n", failed, checks.size());
    return 1;
  }
  std::printf("all %zu checks passed\n", checks.size());
  return 0;
}
