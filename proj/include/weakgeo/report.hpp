#pragma once

// Verification reports. Every number carries the name of the operation that
// produced it; every comparison carries its tolerance.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace weakgeo {

enum class ToleranceKind { absolute, relative };

struct Check {
  std::string name;
  /// Operation that produced `computed`.
  std::string formula;
  /// Operation or closed form that produced `oracle`.
  std::string oracle_formula;
  std::string units = "dimensionless";
  double computed = 0.0;
  double oracle = 0.0;
  /// Unscaled tolerance; the report's tolerance scale multiplies it.
  double base_tolerance = 0.0;
  ToleranceKind kind = ToleranceKind::absolute;
  /// Aggregated checks: how many samples went in and which was worst.
  long samples = 1;
  long worst_index = -1;

  [[nodiscard]] double abs_error() const;
  /// abs_error / |oracle|; equals abs_error when the oracle is exactly zero.
  [[nodiscard]] double rel_error() const;
  [[nodiscard]] double error() const;
  [[nodiscard]] bool passed(double scale) const;
};

/// Folds per-sample comparisons into one check holding the worst sample.
class CheckAccumulator {
public:
  explicit CheckAccumulator(Check prototype);

  void add(double computed, double oracle);
  [[nodiscard]] Check result() const;

private:
  Check worst_;
  long count_ = 0;
};

struct Value {
  std::string name;
  std::string formula;
  std::string units = "dimensionless";
  double value = 0.0;
};

/// Fixed-column numeric table written as data.csv.
class Table {
public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<double> row);
  [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
  [[nodiscard]] const std::vector<std::vector<double>>& rows() const { return rows_; }
  /// Header plus rows; doubles printed with 17 significant digits.
  [[nodiscard]] std::string to_csv() const;

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

/// Round-trippable "%.17g".
std::string format_double(double v);

struct Report {
  std::string mode;
  nlohmann::json scenario = nlohmann::json::object();
  double tolerance_scale = 1.0;
  std::vector<Check> checks;
  std::vector<Value> values;
  nlohmann::json notes = nlohmann::json::object();
  Table table;
  double wall_time_seconds = 0.0;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Writes report.json and data.csv into `dir`, creating it if needed.
void write_report_files(const Report& report, const std::filesystem::path& dir);

}  // namespace weakgeo
