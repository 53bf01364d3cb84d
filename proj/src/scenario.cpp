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

#include "condprep/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"

#include "condprep/conditioning.hpp"
#include "condprep/epr.hpp"
#include "condprep/metrics.hpp"
#include "condprep/models.hpp"
#include "condprep/oracle.hpp"
#include "condprep/states.hpp"

namespace condprep {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON <-> numeric helpers
// ---------------------------------------------------------------------------

Complex parse_complex(const json& j, const std::string& field) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return Complex(j[0].get<double>(), j[1].get<double>());
  }
  throw ValidationError("field '" + field +
                        "' must be a number or an [re, im] pair");
}

CVector parse_cvector(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("field '" + field + "' must be a non-empty array");
  }
  CVector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) =
        parse_complex(j[i], field + "[" + std::to_string(i) + "]");
  }
  if (!v.allFinite()) {
    throw ValidationError("field '" + field + "' has non-finite entries");
  }
  return v;
}

CMatrix parse_cmatrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("field '" + field +
                          "' must be a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  CMatrix m;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    const CVector row = parse_cvector(j[r], row_field);
    if (r == 0) {
      cols = static_cast<std::size_t>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      throw ValidationError("field '" + row_field + "' has " +
                            std::to_string(row.size()) + " entries, row 0 has " +
                            std::to_string(cols));
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

RMatrix parse_rmatrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("field '" + field +
                          "' must be a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  RMatrix m;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    const json& row = j[r];
    if (!row.is_array() || row.empty()) {
      throw ValidationError("field '" + row_field +
                            "' must be a non-empty array of numbers");
    }
    if (r == 0) {
      cols = row.size();
      m.resize(rows, cols);
    } else if (row.size() != cols) {
      throw ValidationError("field '" + row_field + "' has " +
                            std::to_string(row.size()) + " entries, row 0 has " +
                            std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw ValidationError("field '" + row_field + "[" + std::to_string(c) +
                              "]' must be a number");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          row[c].get<double>();
    }
  }
  if (!m.allFinite()) {
    throw ValidationError("field '" + field + "' has non-finite entries");
  }
  return m;
}

json complex_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json cvector_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

json cmatrix_json(const CMatrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data.push_back(complex_json(m(r, c)));
    }
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMatrix cmatrix_from_json(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data")) {
    throw ValidationError("field '" + field +
                          "' must be an object with rows, cols, data");
  }
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const json& data = j.at("data");
  if (!data.is_array() ||
      data.size() != static_cast<std::size_t>(rows) * cols) {
    throw ValidationError("field '" + field + ".data' must hold " +
                          std::to_string(rows * cols) + " entries");
  }
  CMatrix m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c, ++k) {
      m(r, c) = parse_complex(data[k], field + ".data");
    }
  }
  return m;
}

json rmatrix_json(const RMatrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

// Shortest decimal form that parses back to the same double.
std::string number_text(double x) { return json(x).dump(); }

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& context) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ValidationError("unknown field '" + context + item.key() + "'");
    }
  }
}

CVector preset_coefficients(const std::string& name) {
  if (name == "bell") {
    CVector c(2);
    c << 1.0, 1.0;
    return c / std::sqrt(2.0);
  }
  if (name.rfind("ghz-", 0) == 0) {
    int d = 0;
    try {
      d = std::stoi(name.substr(4));
    } catch (const std::exception&) {
      d = 0;
    }
    if (d >= 3 && d <= 8) {
      return CVector::Constant(d, Complex(1.0 / std::sqrt(double(d)), 0.0));
    }
  }
  throw ValidationError("unknown state preset '" + name +
                        "'; see the presets subcommand");
}

RMatrix lambda_from_spec(const json& j, int dim, const std::string& field) {
  RMatrix lambda;
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "identity") {
      lambda = NonidealityMatrix::identity(dim).matrix();
    } else if (name == "uniform") {
      lambda = NonidealityMatrix::uniform(dim).matrix();
    } else {
      throw ValidationError("field '" + field + "': unknown pattern '" + name +
                            "'; see the presets subcommand");
    }
  } else if (j.is_object()) {
    reject_unknown_keys(j, {"preset", "p", "outcomes"}, field + ".");
    if (!j.contains("preset") || !j.at("preset").is_string()) {
      throw ValidationError("field '" + field + ".preset' must name a pattern");
    }
    const std::string name = j.at("preset").get<std::string>();
    const int outcomes = j.value("outcomes", dim);
    if (outcomes != dim) {
      throw ValidationError("field '" + field + ".outcomes' is " +
                            std::to_string(outcomes) +
                            " but the scenario dimension is " +
                            std::to_string(dim));
    }
    if (name == "identity") {
      lambda = NonidealityMatrix::identity(dim).matrix();
    } else if (name == "uniform") {
      lambda = NonidealityMatrix::uniform(dim).matrix();
    } else if (name == "symmetric-noise") {
      if (!j.contains("p") || !j.at("p").is_number()) {
        throw ValidationError("field '" + field +
                              ".p' is required for symmetric-noise");
      }
      lambda =
          NonidealityMatrix::symmetric_noise(dim, j.at("p").get<double>())
              .matrix();
    } else {
      throw ValidationError("field '" + field + ".preset': unknown pattern '" +
                            name + "'; see the presets subcommand");
    }
  } else {
    lambda = parse_rmatrix(j, field);
    if (lambda.cols() != dim) {
      throw ValidationError("field '" + field + "' has " +
                            std::to_string(lambda.cols()) +
                            " columns but the scenario dimension is " +
                            std::to_string(dim));
    }
  }
  // Column-stochastic or throw, citing the offending column.
  return NonidealityMatrix(std::move(lambda)).matrix();
}

int resolve_dim(const json& j, const ScenarioConfig& config,
                const std::string& state_source) {
  const int state_dim = config.density.has_value()
                            ? static_cast<int>(config.density->rows())
                            : static_cast<int>(config.coefficients.size());
  if (j.contains("dim")) {
    if (!j.at("dim").is_number_integer()) {
      throw ValidationError("field 'dim' must be an integer");
    }
    const int declared = j.at("dim").get<int>();
    if (declared != state_dim) {
      throw ValidationError("field 'dim' is " + std::to_string(declared) +
                            " but '" + state_source + "' has dimension " +
                            std::to_string(state_dim));
    }
  }
  return state_dim;
}

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t stop = std::min(e.byte, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError("scenario is not valid JSON (line " + std::to_string(line) +
                     "): " + e.what());
  }
  if (!j.is_object()) {
    throw ParseError("scenario must be a JSON object");
  }
  reject_unknown_keys(j,
                      {"kind", "dim", "state", "c", "coefficients", "model",
                       "lambda", "eta", "efficiency", "test", "verify",
                       "format"},
                      "");

  ScenarioConfig config;

  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ValidationError("field 'kind' must be \"single\" or \"epr\"");
  }
  config.kind = j.at("kind").get<std::string>();
  if (config.kind == "single-system") config.kind = "single";
  if (config.kind != "single" && config.kind != "epr") {
    throw ValidationError("field 'kind' must be \"single\" or \"epr\", got \"" +
                          config.kind + "\"");
  }

  // Initial state: a "state" object, or the top-level shortcuts "c" /
  // "coefficients" for a pure state.
  std::string state_source;
  int state_specs = 0;
  json state_spec;
  if (j.contains("state")) {
    ++state_specs;
    state_spec = j.at("state");
  }
  for (const char* shortcut : {"c", "coefficients"}) {
    if (j.contains(shortcut)) {
      ++state_specs;
      state_spec = json{{"coefficients", j.at(shortcut)}};
    }
  }
  if (state_specs != 1) {
    throw ValidationError(
        "give the initial state exactly once, as 'state' or the 'c' shortcut");
  }
  if (state_spec.is_array()) {
    state_spec = json{{"coefficients", state_spec}};
  }
  if (!state_spec.is_object()) {
    throw ValidationError("field 'state' must be an object or an array");
  }
  reject_unknown_keys(state_spec, {"preset", "coefficients", "density"},
                      "state.");
  const int given = int(state_spec.contains("preset")) +
                    int(state_spec.contains("coefficients")) +
                    int(state_spec.contains("density"));
  if (given != 1) {
    throw ValidationError(
        "field 'state' needs exactly one of preset, coefficients, density");
  }
  if (state_spec.contains("preset")) {
    if (config.kind != "epr") {
      throw ValidationError("state presets are Schmidt forms; they need kind "
                            "\"epr\"");
    }
    config.coefficients =
        preset_coefficients(state_spec.at("preset").get<std::string>());
    state_source = "state.preset";
  } else if (state_spec.contains("coefficients")) {
    CVector c = parse_cvector(state_spec.at("coefficients"),
                              "state.coefficients");
    const double norm = c.norm();
    if (norm < 1e-12) {
      throw ValidationError("field 'state.coefficients' has zero norm");
    }
    // Skip the division when the list is already normalized to machine
    // precision, so re-parsing a report's config echo is a fixed point
    // instead of drifting by an ulp per round trip.
    if (std::abs(c.squaredNorm() - 1.0) > 1e-15) c /= norm;
    config.coefficients = std::move(c);
    state_source = "state.coefficients";
  } else {
    if (config.kind != "single") {
      throw ValidationError(
          "field 'state.density' needs kind \"single\"; epr scenarios take "
          "Schmidt coefficients");
    }
    CMatrix rho = parse_cmatrix(state_spec.at("density"), "state.density");
    if (rho.rows() != rho.cols()) {
      throw ValidationError("field 'state.density' must be square, got " +
                            std::to_string(rho.rows()) + "x" +
                            std::to_string(rho.cols()));
    }
    config.density = std::move(rho);
    state_source = "state.density";
  }
  config.dim = resolve_dim(j, config, state_source);

  // Model: a "model" object, or the top-level "lambda" shortcut.
  json model_spec;
  if (j.contains("model") && j.contains("lambda")) {
    throw ValidationError(
        "give either 'model' or the top-level 'lambda' shortcut, not both");
  }
  if (j.contains("model")) {
    model_spec = j.at("model");
  } else if (j.contains("lambda")) {
    model_spec = json{{"type", "lambda"}, {"lambda", j.at("lambda")}};
  } else {
    throw ValidationError("field 'model' is required");
  }
  if (!model_spec.is_object()) {
    throw ValidationError("field 'model' must be an object");
  }
  for (const char* shortcut : {"eta", "efficiency"}) {
    if (j.contains(shortcut)) {
      if (model_spec.contains("efficiency")) {
        throw ValidationError("detector efficiency given twice");
      }
      model_spec["efficiency"] = j.at(shortcut);
    }
  }
  reject_unknown_keys(model_spec,
                      {"type", "lambda", "final_states", "efficiency"},
                      "model.");
  if (!model_spec.contains("type") || !model_spec.at("type").is_string()) {
    throw ValidationError(
        "field 'model.type' must be \"first-kind\", \"second-kind\", or "
        "\"lambda\"");
  }
  config.model.type = model_spec.at("type").get<std::string>();
  if (config.model.type == "first-kind" || config.model.type == "second-kind") {
    if (model_spec.contains("lambda")) {
      throw ValidationError("field 'model.lambda' belongs to lambda models");
    }
    if (model_spec.contains("efficiency")) {
      throw ValidationError(
          "field 'model.efficiency' is only supported for lambda models");
    }
  }
  if (config.model.type == "first-kind") {
    // No further fields.
  } else if (config.model.type == "second-kind") {
    if (!model_spec.contains("final_states") ||
        !model_spec.at("final_states").is_array()) {
      throw ValidationError(
          "field 'model.final_states' must list one vector per outcome");
    }
    const json& states = model_spec.at("final_states");
    if (states.size() != static_cast<std::size_t>(config.dim)) {
      throw ValidationError("field 'model.final_states' has " +
                            std::to_string(states.size()) +
                            " vectors but the scenario dimension is " +
                            std::to_string(config.dim));
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::string field =
          "model.final_states[" + std::to_string(i) + "]";
      CVector psi = parse_cvector(states[i], field);
      if (psi.size() != config.dim) {
        throw ValidationError("field '" + field + "' has dimension " +
                              std::to_string(psi.size()) +
                              " but the scenario dimension is " +
                              std::to_string(config.dim));
      }
      const double norm = psi.norm();
      if (norm < 1e-12) {
        throw ValidationError("field '" + field + "' has zero norm");
      }
      config.model.final_states.push_back(psi / norm);
    }
  } else if (config.model.type == "lambda") {
    if (!model_spec.contains("lambda")) {
      throw ValidationError("field 'model.lambda' is required");
    }
    config.model.lambda =
        lambda_from_spec(model_spec.at("lambda"), config.dim, "model.lambda");
    if (model_spec.contains("efficiency")) {
      if (!model_spec.at("efficiency").is_number()) {
        throw ValidationError("field 'model.efficiency' must be a number");
      }
      const double eta = model_spec.at("efficiency").get<double>();
      if (eta < 0.0 || eta > 1.0) {
        throw ValidationError("field 'model.efficiency' must lie in [0, 1], "
                              "got " + number_text(eta));
      }
      config.model.efficiency = eta;
    }
  } else {
    throw ValidationError(
        "field 'model.type' must be \"first-kind\", \"second-kind\", or "
        "\"lambda\", got \"" + config.model.type + "\"");
  }

  if (j.contains("test")) {
    if (config.kind != "single") {
      throw ValidationError(
          "field 'test' is only supported for single-system scenarios");
    }
    json test_spec = j.at("test");
    if (test_spec.is_array()) test_spec = json{{"vectors", test_spec}};
    if (!test_spec.is_object() || !test_spec.contains("vectors")) {
      throw ValidationError("field 'test' must hold orthonormal 'vectors'");
    }
    reject_unknown_keys(test_spec, {"vectors"}, "test.");
    const json& vectors = test_spec.at("vectors");
    if (!vectors.is_array() || vectors.empty()) {
      throw ValidationError("field 'test.vectors' must be a non-empty array");
    }
    TestSpec test;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      const std::string field = "test.vectors[" + std::to_string(i) + "]";
      CVector b = parse_cvector(vectors[i], field);
      if (b.size() != config.dim) {
        throw ValidationError("field '" + field + "' has dimension " +
                              std::to_string(b.size()) +
                              " but the scenario dimension is " +
                              std::to_string(config.dim));
      }
      test.vectors.push_back(std::move(b));
    }
    for (std::size_t i = 0; i < test.vectors.size(); ++i) {
      for (std::size_t k = i; k < test.vectors.size(); ++k) {
        const Complex g = test.vectors[i].dot(test.vectors[k]);
        const double expected = i == k ? 1.0 : 0.0;
        if (std::abs(g - expected) > tol::orthonormal) {
          throw ValidationError("field 'test.vectors' must be orthonormal; "
                                "vectors " + std::to_string(i) + " and " +
                                std::to_string(k) + " violate this");
        }
      }
    }
    config.test = std::move(test);
  }

  if (j.contains("verify")) {
    if (!j.at("verify").is_boolean()) {
      throw ValidationError("field 'verify' must be a boolean");
    }
    config.verify = j.at("verify").get<bool>();
  }
  if (j.contains("format")) {
    const std::string format = j.at("format").is_string()
                                   ? j.at("format").get<std::string>()
                                   : std::string();
    if (format == "json") {
      config.format = ReportFormat::kJson;
    } else if (format == "csv") {
      config.format = ReportFormat::kCsv;
    } else if (format == "table") {
      config.format = ReportFormat::kTable;
    } else {
      throw ValidationError(
          "field 'format' must be \"json\", \"csv\", or \"table\"");
    }
  }
  return config;
}

ScenarioConfig parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot read scenario file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_text(text.str());
}

json ScenarioConfig::resolved() const {
  json state;
  if (density.has_value()) {
    state["density"] = cmatrix_json(*density);
  } else {
    state["coefficients"] = cvector_json(coefficients);
  }
  json model_json{{"type", model.type}};
  if (model.lambda.has_value()) {
    model_json["lambda"] = rmatrix_json(*model.lambda);
  }
  if (!model.final_states.empty()) {
    json states = json::array();
    for (const CVector& psi : model.final_states) {
      states.push_back(cvector_json(psi));
    }
    model_json["final_states"] = std::move(states);
  }
  if (model.efficiency.has_value()) {
    model_json["efficiency"] = *model.efficiency;
  }
  json out{{"kind", kind},
           {"dim", dim},
           {"state", std::move(state)},
           {"model", std::move(model_json)},
           {"verify", verify}};
  if (test.has_value()) {
    json vectors = json::array();
    for (const CVector& b : test->vectors) vectors.push_back(cvector_json(b));
    out["test"] = json{{"vectors", std::move(vectors)}};
  }
  switch (format) {
    case ReportFormat::kJson:
      out["format"] = "json";
      break;
    case ReportFormat::kCsv:
      out["format"] = "csv";
      break;
    case ReportFormat::kTable:
      out["format"] = "table";
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Running scenarios
// ---------------------------------------------------------------------------

namespace {

MeasurementModel build_configured_model(const ScenarioConfig& config,
                                        const ObservableBasis& basis) {
  if (config.model.type == "first-kind") {
    return build_first_kind(basis);
  }
  if (config.model.type == "second-kind") {
    return build_second_kind(basis, config.model.final_states);
  }
  NonidealityMatrix lam(*config.model.lambda);
  if (config.model.efficiency.has_value()) {
    lam = with_detector_efficiency(lam, *config.model.efficiency);
  }
  return build_lambda_model(basis, lam);
}

void run_epr_scenario(const ScenarioConfig& config, double verify_tolerance,
                      RunReport& report) {
  const EprState epr = EprState::computational(config.coefficients);
  const int d = config.dim;

  if (config.model.type == "lambda") {
    const EprReport er = epr_report(epr, NonidealityMatrix(*config.model.lambda),
                                    config.model.efficiency);
    report.eta = er.eta;
    report.note = er.note;
    report.total_click_probability = er.total_click_probability;
    for (const EprOutcome& out : er.outcomes) {
      OutcomeReport entry;
      entry.outcome = out.outcome;
      entry.absent = !out.simulated.has_value();
      entry.p = entry.absent ? 0.0 : out.p;
      entry.no_click = out.no_click;
      entry.fidelity_to_target = out.fidelity_to_target;
      entry.trace_distance_routes = out.trace_distance_routes;
      if (out.simulated.has_value()) entry.state = out.simulated->matrix();
      if (out.closed_form.has_value()) {
        entry.closed_form_state = out.closed_form->matrix();
      }
      report.outcomes.push_back(std::move(entry));
    }
  } else {
    const MeasurementModel model =
        build_configured_model(config, epr.basis1());
    const ConditioningResult sim = particle2_conditional_simulated(epr, model);
    const ConditioningResult closed =
        particle2_conditional_closed_form(epr, NonidealityMatrix::identity(d));
    report.eta = 1.0;
    for (int m = 0; m < sim.size(); ++m) {
      OutcomeReport entry;
      entry.outcome = m;
      entry.absent = !sim.state(m).has_value();
      entry.p = entry.absent ? 0.0 : sim.p(m);
      if (sim.state(m).has_value()) {
        entry.state = sim.state(m)->matrix();
        if (m < d) {
          entry.fidelity_to_target =
              fidelity_to_pure(epr.basis2().vector(m), sim.state(m)->matrix());
        }
      }
      if (closed.state(m).has_value()) {
        entry.closed_form_state = closed.state(m)->matrix();
      }
      if (entry.state.has_value() && entry.closed_form_state.has_value()) {
        entry.trace_distance_routes =
            trace_distance(*entry.state, *entry.closed_form_state);
      }
      report.total_click_probability += entry.p;
      report.outcomes.push_back(std::move(entry));
    }
  }

  if (config.verify) {
    VerificationReport verification;
    verification.tolerance = verify_tolerance;
    const MeasurementModel model =
        build_configured_model(config, epr.basis1());
    const MeasurementModel extended =
        with_spectator(model, epr.basis2().layout());
    const DensityOperator rho_12 = epr.density();
    const std::string label2 = epr.basis2().layout().factor(0).label;
    for (const OutcomeReport& entry : report.outcomes) {
      if (!entry.state.has_value()) continue;
      const DensityOperator tomo_pair =
          oracle::tomographic_conditional(extended, rho_12, entry.outcome);
      const CMatrix tomo = tomo_pair.reduced({label2}).matrix();
      double deviation = trace_distance(tomo, *entry.state);
      if (entry.closed_form_state.has_value()) {
        deviation = std::max(deviation,
                             trace_distance(tomo, *entry.closed_form_state));
        deviation = std::max(
            deviation, trace_distance(*entry.state, *entry.closed_form_state));
      }
      verification.per_outcome.push_back({entry.outcome, deviation});
      verification.max_deviation =
          std::max(verification.max_deviation, deviation);
    }
    verification.passed = verification.max_deviation <= verification.tolerance;
    report.verification = std::move(verification);
  }
}

void run_single_scenario(const ScenarioConfig& config, double verify_tolerance,
                         RunReport& report) {
  const SpaceLayout layout = SpaceLayout::single("o", config.dim);
  const ObservableBasis basis = ObservableBasis::computational(layout);
  const DensityOperator rho_o =
      config.density.has_value()
          ? DensityOperator(layout, *config.density)
          : PureState(layout, config.coefficients).density();
  const MeasurementModel model = build_configured_model(config, basis);

  const ConditioningResult cond = conditional_states(model, rho_o);
  report.eta = config.model.efficiency.value_or(1.0);
  if (config.model.efficiency.has_value()) {
    report.note =
        "no-click reading modeled as an extra pointer row taking the "
        "missing 1-eta weight uniformly from every source outcome";
  }
  const int readings = cond.size();
  for (int m = 0; m < readings; ++m) {
    OutcomeReport entry;
    entry.outcome = m;
    entry.absent = !cond.state(m).has_value();
    entry.p = entry.absent ? 0.0 : cond.p(m);
    entry.no_click =
        config.model.efficiency.has_value() && m == readings - 1;
    if (cond.state(m).has_value()) {
      entry.state = cond.state(m)->matrix();
      if (!entry.no_click && m < config.dim) {
        entry.fidelity_to_target =
            fidelity_to_pure(basis.vector(m), cond.state(m)->matrix());
      }
    }
    if (!entry.no_click) report.total_click_probability += entry.p;
    report.outcomes.push_back(std::move(entry));
  }

  if (config.test.has_value()) {
    std::vector<CMatrix> elements;
    for (const CVector& b : config.test->vectors) {
      elements.push_back(b * b.adjoint());
    }
    const Povm f(layout, std::move(elements));
    report.joint = joint_distribution(model, rho_o, f).table();
  }

  if (config.verify) {
    VerificationReport verification;
    verification.tolerance = verify_tolerance;
    for (OutcomeReport& entry : report.outcomes) {
      if (!entry.state.has_value()) continue;
      const CMatrix tomo =
          oracle::tomographic_conditional(model, rho_o, entry.outcome).matrix();
      const double deviation = trace_distance(tomo, *entry.state);
      entry.trace_distance_routes = deviation;
      verification.per_outcome.push_back({entry.outcome, deviation});
      verification.max_deviation =
          std::max(verification.max_deviation, deviation);
    }
    verification.passed = verification.max_deviation <= verification.tolerance;
    report.verification = std::move(verification);
  }
}

json tolerance_block() {
  return json{{"conditioning", tol::conditioning},
              {"degeneracy", tol::degeneracy},
              {"hermitian", tol::hermitian},
              {"offdiagonal", tol::offdiagonal},
              {"orthonormal", tol::orthonormal},
              {"psd_floor", tol::psd_floor},
              {"state_norm", tol::state_norm},
              {"stochastic", tol::stochastic},
              {"tomography", tol::tomography},
              {"trace_one", tol::trace_one},
              {"unitary", tol::unitary}};
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, double verify_tolerance) {
  RunReport report;
  report.config_echo = config.resolved();
  report.kind = config.kind;
  report.dim = config.dim;
  if (config.kind == "epr") {
    run_epr_scenario(config, verify_tolerance, report);
  } else {
    run_single_scenario(config, verify_tolerance, report);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json RunReport::to_json() const {
  json outcome_array = json::array();
  for (const OutcomeReport& entry : outcomes) {
    json o{{"outcome", entry.outcome},
           {"p", entry.p},
           {"absent", entry.absent},
           {"no_click", entry.no_click}};
    if (entry.fidelity_to_target.has_value()) {
      o["fidelity_to_target"] = *entry.fidelity_to_target;
    }
    if (entry.trace_distance_routes.has_value()) {
      o["trace_distance_routes"] = *entry.trace_distance_routes;
    }
    if (entry.state.has_value()) o["state"] = cmatrix_json(*entry.state);
    if (entry.closed_form_state.has_value()) {
      o["closed_form_state"] = cmatrix_json(*entry.closed_form_state);
    }
    outcome_array.push_back(std::move(o));
  }
  json results{{"kind", kind},
               {"dim", dim},
               {"eta", eta},
               {"total_click_probability", total_click_probability},
               {"outcomes", std::move(outcome_array)}};
  if (!note.empty()) results["note"] = note;
  if (joint.has_value()) results["joint"] = rmatrix_json(*joint);

  json out{{"config", config_echo},
           {"meta", json{{"engine", kEngineName},
                         {"version", kEngineVersion},
                         {"fidelity_convention", kFidelityConvention},
                         {"tolerances", tolerance_block()}}},
           {"results", std::move(results)}};
  if (verification.has_value()) {
    json per_outcome = json::array();
    for (const VerificationReport::Entry& entry : verification->per_outcome) {
      per_outcome.push_back(
          json{{"outcome", entry.outcome}, {"deviation", entry.deviation}});
    }
    out["verification"] = json{{"tolerance", verification->tolerance},
                               {"max_deviation", verification->max_deviation},
                               {"passed", verification->passed},
                               {"per_outcome", std::move(per_outcome)}};
  }
  return out;
}

RunReport RunReport::from_json(const json& j) {
  RunReport report;
  report.config_echo = j.at("config");
  const json& results = j.at("results");
  report.kind = results.at("kind").get<std::string>();
  report.dim = results.at("dim").get<int>();
  report.eta = results.at("eta").get<double>();
  report.total_click_probability =
      results.at("total_click_probability").get<double>();
  if (results.contains("note")) {
    report.note = results.at("note").get<std::string>();
  }
  for (const json& o : results.at("outcomes")) {
    OutcomeReport entry;
    entry.outcome = o.at("outcome").get<int>();
    entry.p = o.at("p").get<double>();
    entry.absent = o.at("absent").get<bool>();
    entry.no_click = o.at("no_click").get<bool>();
    if (o.contains("fidelity_to_target")) {
      entry.fidelity_to_target = o.at("fidelity_to_target").get<double>();
    }
    if (o.contains("trace_distance_routes")) {
      entry.trace_distance_routes = o.at("trace_distance_routes").get<double>();
    }
    if (o.contains("state")) {
      entry.state = cmatrix_from_json(o.at("state"), "state");
    }
    if (o.contains("closed_form_state")) {
      entry.closed_form_state =
          cmatrix_from_json(o.at("closed_form_state"), "closed_form_state");
    }
    report.outcomes.push_back(std::move(entry));
  }
  if (results.contains("joint")) {
    report.joint = parse_rmatrix(results.at("joint"), "joint");
  }
  if (j.contains("verification")) {
    const json& v = j.at("verification");
    VerificationReport verification;
    verification.tolerance = v.at("tolerance").get<double>();
    verification.max_deviation = v.at("max_deviation").get<double>();
    verification.passed = v.at("passed").get<bool>();
    for (const json& entry : v.at("per_outcome")) {
      verification.per_outcome.push_back({entry.at("outcome").get<int>(),
                                          entry.at("deviation").get<double>()});
    }
    report.verification = std::move(verification);
  }
  return report;
}

bool RunReport::operator==(const RunReport& other) const {
  return to_json() == other.to_json();
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string fixed6(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", x);
  return buffer;
}

std::string scientific3(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3e", x);
  return buffer;
}

std::string pad_left(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return std::string(width - s.size(), ' ') + s;
}

std::string emit_csv(const RunReport& report) {
  std::ostringstream out;
  out << "outcome,p,fidelity_to_target,trace_distance_routes,absent\n";
  for (const OutcomeReport& entry : report.outcomes) {
    out << entry.outcome << ',' << number_text(entry.p) << ',';
    if (entry.fidelity_to_target.has_value()) {
      out << number_text(*entry.fidelity_to_target);
    }
    out << ',';
    if (entry.trace_distance_routes.has_value()) {
      out << number_text(*entry.trace_distance_routes);
    }
    out << ',' << (entry.absent ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string emit_table(const RunReport& report) {
  std::ostringstream out;
  out << "scenario: " << report.kind << " (dimension " << report.dim << ")\n";
  out << "eta: " << fixed6(report.eta) << "\n";
  out << "total click probability: " << fixed6(report.total_click_probability)
      << "\n";
  if (!report.note.empty()) out << "note: " << report.note << "\n";
  out << "\n";

  const std::vector<std::string> headers = {"outcome", "p", "fidelity_to_target",
                                            "trace_distance_routes", "state"};
  std::vector<std::vector<std::string>> rows;
  for (const OutcomeReport& entry : report.outcomes) {
    std::string label = std::to_string(entry.outcome);
    if (entry.no_click) label += " (no click)";
    rows.push_back({label, fixed6(entry.p),
                    entry.fidelity_to_target.has_value()
                        ? fixed6(*entry.fidelity_to_target)
                        : "-",
                    entry.trace_distance_routes.has_value()
                        ? scientific3(*entry.trace_distance_routes)
                        : "-",
                    entry.absent ? "absent" : "present"});
  }
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < headers.size(); ++c) {
    std::size_t w = headers[c].size();
    for (const auto& row : rows) w = std::max(w, row[c].size());
    widths.push_back(w);
  }
  for (std::size_t c = 0; c < headers.size(); ++c) {
    out << (c == 0 ? "" : "  ") << pad_left(headers[c], widths[c]);
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c == 0 ? "" : "  ") << pad_left(row[c], widths[c]);
    }
    out << "\n";
  }

  if (report.joint.has_value()) {
    out << "\njoint distribution p(reading, test outcome):\n";
    for (Eigen::Index r = 0; r < report.joint->rows(); ++r) {
      for (Eigen::Index c = 0; c < report.joint->cols(); ++c) {
        out << (c == 0 ? "" : "  ") << fixed6((*report.joint)(r, c));
      }
      out << "\n";
    }
  }
  if (report.verification.has_value()) {
    const VerificationReport& v = *report.verification;
    out << "\nverification: max route deviation "
        << scientific3(v.max_deviation) << " against tolerance "
        << scientific3(v.tolerance) << " -> "
        << (v.passed ? "passed" : "FAILED") << "\n";
  }
  return out.str();
}

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return report.to_json().dump(2) + "\n";
    case ReportFormat::kCsv:
      return emit_csv(report);
    case ReportFormat::kTable:
      return emit_table(report);
  }
  throw Error("unreachable report format");
}

std::string preset_listing() {
  std::ostringstream out;
  out << "named states (state.preset):\n"
      << "  bell     two equal Schmidt terms, dimension 2\n"
      << "  ghz-N    N equal Schmidt terms, N = 3..8 (e.g. ghz-3)\n"
      << "\n"
      << "named mixing patterns (model.lambda):\n"
      << "  identity          exact readout, lambda = I\n"
      << "  uniform           information-free readout, every entry 1/M\n"
      << "  symmetric-noise   1-p on the diagonal, p spread over the other\n"
      << "                    readings; use {\"preset\": \"symmetric-noise\","
         " \"p\": 0.1}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

int cli_main(int argc, char** argv) {
  CLI::App app{"conditional-preparation laboratory for quantum measurement "
               "models"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a scenario file");
  std::string path;
  run->add_option("file", path, "scenario JSON file")->required();
  std::string format_name;
  run->add_option("--format", format_name, "report format")
      ->check(CLI::IsMember({"json", "csv", "table"}));
  bool verify = false;
  run->add_flag("--verify", verify,
                "cross-check every conditional state against the "
                "statistics-only reconstruction");
  double tolerance = tol::tomography;
  run->add_option("--tolerance", tolerance,
                  "accepted route deviation in verification mode");
  std::string out_path;
  run->add_option("--out", out_path, "write the report here instead of stdout");

  auto* presets =
      app.add_subcommand("presets", "list named states and mixing patterns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (presets->parsed()) {
    std::cout << preset_listing();
    return 0;
  }

  try {
    ScenarioConfig config = parse_scenario(path);
    if (verify) config.verify = true;
    if (!format_name.empty()) {
      config.format = format_name == "csv"
                          ? ReportFormat::kCsv
                          : format_name == "table" ? ReportFormat::kTable
                                                   : ReportFormat::kJson;
    }
    const RunReport report = run_scenario(config, tolerance);
    const std::string text = emit_report(report, config.format);
    if (!out_path.empty()) {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return 1;
      }
      out << text;
    } else {
      std::cout << text;
    }
    if (report.verification.has_value() && !report.verification->passed) {
      return 2;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace condprep
