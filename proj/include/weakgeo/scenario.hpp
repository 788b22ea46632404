#pragma once

// Declarative scenarios: a JSON document (comments allowed) describing the
// system, meter, coupling and post-selection, validated against the
// weakgeo-scenario/1 schema and executed into a Report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakgeo/errors.hpp"
#include "weakgeo/linalg.hpp"
#include "weakgeo/pointer.hpp"
#include "weakgeo/rayspace.hpp"
#include "weakgeo/report.hpp"
#include "weakgeo/vonneumann.hpp"

namespace weakgeo {

inline constexpr const char* kScenarioSchema = "weakgeo-scenario/1";

/// Syntax error in the config text, anchored at a 1-based line and column.
class ConfigParseError : public std::runtime_error {
public:
  ConfigParseError(const std::string& what, long line, long column);

  [[nodiscard]] long line() const { return line_; }
  [[nodiscard]] long column() const { return column_; }

private:
  long line_;
  long column_;
};

/// Well-formed JSON that does not describe a valid scenario. The message
/// starts with the JSON pointer of the offending field.
class ConfigValidationError : public InvalidArgument {
public:
  ConfigValidationError(const std::string& path, const std::string& what);
};

enum class ScenarioKind { strong_shift, weak_shift, readout_scan, triangle_phase, metric_check, sweep };

std::string to_string(ScenarioKind kind);

struct ContinuousMeterSpec {
  GaussianSpec gaussian;
  Grid grid = Grid::standard();
};

struct SweepSpec {
  ScenarioKind base = ScenarioKind::strong_shift;
  /// JSON pointer into the config, e.g. "/coupling/lambda".
  std::string parameter;
  std::vector<double> values;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::strong_shift;
  /// The parsed document, echoed into the report.
  nlohmann::json source;
  std::uint64_t seed = 0;

  std::optional<StateVector> alpha;
  std::optional<HermitianOperator> observable;
  std::optional<StateVector> beta;
  std::optional<ContinuousMeterSpec> continuous;
  std::optional<FiniteMeter> finite;
  std::optional<double> lambda;
  std::optional<double> epsilon;

  /// triangle-phase with explicit Bloch vertices.
  std::vector<BlochPoint> vertices;
  /// readout-scan resolution.
  long scan_points = 2048;
  /// metric-check random displacements.
  long samples = 100;

  std::optional<SweepSpec> sweep;
};

/// Throws ConfigParseError on malformed text.
nlohmann::json parse_config_text(const std::string& text);

/// Throws ConfigValidationError (or InvalidArgument from the library types).
Scenario validate_scenario(const nlohmann::json& config);

Scenario load_scenario_file(const std::string& path);

/// Executes the scenario. Physics guards (PhysicsGuardError) propagate.
Report run_scenario(const Scenario& scenario, double tolerance_scale = 1.0);

}  // namespace weakgeo
