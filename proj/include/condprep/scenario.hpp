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

#include "json.hpp"

#include "condprep/types.hpp"

namespace condprep {

enum class ReportFormat { kJson, kCsv, kTable };

/// How the measurement apparatus is specified in a scenario file.
struct ModelSpec {
  std::string type;  // "first-kind" | "second-kind" | "lambda"
  /// Mixing matrix for "lambda" models, presets already expanded.
  std::optional<RMatrix> lambda;
  /// Post-measurement object states for "second-kind" models.
  std::vector<CVector> final_states;
  /// Detector efficiency; only valid for "lambda". Extends the mixing
  /// matrix with a no-click row before the model is built.
  std::optional<double> efficiency;
};

/// Optional observable measured jointly on the final object state,
/// given by orthonormal basis vectors (one POVM element per vector).
struct TestSpec {
  std::vector<CVector> vectors;
};

/// Fully resolved scenario: defaults applied, presets expanded, coefficient
/// lists normalized. `resolved()` is the canonical echo embedded in reports.
struct ScenarioConfig {
  std::string kind;  // "single" | "epr"
  int dim = 0;
  /// Pure initial state (Schmidt coefficients for "epr", amplitudes in the
  /// computational basis for "single"); empty when `density` is given.
  CVector coefficients;
  /// Mixed initial object state, "single" only.
  std::optional<CMatrix> density;
  ModelSpec model;
  std::optional<TestSpec> test;
  bool verify = false;
  ReportFormat format = ReportFormat::kJson;

  nlohmann::json resolved() const;
};

/// Parse and validate scenario JSON. Syntax problems raise ParseError with
/// the line number; semantic problems raise ValidationError naming the
/// offending fields.
ScenarioConfig parse_scenario_text(const std::string& text);
/// Same, reading the text from a file.
ScenarioConfig parse_scenario(const std::string& path);

struct OutcomeReport {
  int outcome = 0;
  /// Exactly 0.0 when the outcome is absent.
  double p = 0.0;
  bool absent = false;
  bool no_click = false;
  std::optional<double> fidelity_to_target;
  std::optional<double> trace_distance_routes;
  std::optional<CMatrix> state;
  /// Mixing-matrix route for EPR runs.
  std::optional<CMatrix> closed_form_state;
};

struct VerificationReport {
  double tolerance = 0.0;
  double max_deviation = 0.0;
  bool passed = true;
  struct Entry {
    int outcome = 0;
    double deviation = 0.0;
  };
  std::vector<Entry> per_outcome;
};

/// Everything a run produced, serializable to byte-stable JSON and back.
struct RunReport {
  nlohmann::json config_echo;
  std::string kind;
  int dim = 0;
  double eta = 1.0;
  double total_click_probability = 0.0;
  std::string note;
  std::vector<OutcomeReport> outcomes;
  /// p(m, n) table when a test observable was configured.
  std::optional<RMatrix> joint;
  std::optional<VerificationReport> verification;

  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
  bool operator==(const RunReport& other) const;
};

/// Execute a scenario. `verify_tolerance` bounds the cross-route deviation
/// accepted in verification mode.
RunReport run_scenario(const ScenarioConfig& config,
                       double verify_tolerance = tol::tomography);

/// Render a report. JSON is canonical and lossless; CSV flattens the
/// per-outcome scalars; the table targets human eyes.
std::string emit_report(const RunReport& report, ReportFormat format);

/// Deterministic listing of the named states and mixing-matrix patterns
/// understood by scenario files.
std::string preset_listing();

/// Entry point behind the binary: 0 on success, 1 on parse/validation
/// failure, 2 when verification finds disagreement beyond tolerance.
int cli_main(int argc, char** argv);

}  // namespace condprep
