#include "weakgeo/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "weakgeo/errors.hpp"

namespace weakgeo {

namespace {

// JSON has no inf/nan; keep them readable instead of silently nulling.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

double Check::abs_error() const { return std::abs(computed - oracle); }

double Check::rel_error() const {
  const double err = abs_error();
  return oracle == 0.0 ? err : err / std::abs(oracle);
}

double Check::error() const { return kind == ToleranceKind::absolute ? abs_error() : rel_error(); }

bool Check::passed(double scale) const {
  const double e = error();
  return std::isfinite(e) && e <= base_tolerance * scale;
}

CheckAccumulator::CheckAccumulator(Check prototype) : worst_(std::move(prototype)) {}

void CheckAccumulator::add(double computed, double oracle) {
  Check trial = worst_;
  trial.computed = computed;
  trial.oracle = oracle;
  // NaN errors must win so a broken sample cannot hide behind a good one.
  const double e = trial.error(), w = worst_.error();
  if (count_ == 0 || std::isnan(e) || (!std::isnan(w) && e > w)) {
    worst_ = trial;
    worst_.worst_index = count_;
  }
  ++count_;
}

Check CheckAccumulator::result() const {
  Check out = worst_;
  out.samples = count_;
  return out;
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns_.size())
    throw DimensionMismatch("Table::add_row", static_cast<long>(columns_.size()),
                            static_cast<long>(row.size()));
  rows_.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

bool Report::passed() const {
  for (const auto& c : checks)
    if (!c.passed(tolerance_scale)) return false;
  return true;
}

nlohmann::json Report::to_json() const {
  using nlohmann::json;
  json out;
  out["mode"] = mode;
  out["scenario"] = scenario;
  out["tolerance_scale"] = tolerance_scale;
  json checks_json = json::array();
  for (const auto& c : checks) {
    json j;
    j["name"] = c.name;
    j["formula"] = c.formula;
    j["oracle_formula"] = c.oracle_formula;
    j["units"] = c.units;
    j["computed"] = number(c.computed);
    j["oracle"] = number(c.oracle);
    j["abs_error"] = number(c.abs_error());
    j["rel_error"] = number(c.rel_error());
    j["tolerance_kind"] = c.kind == ToleranceKind::absolute ? "absolute" : "relative";
    j["base_tolerance"] = c.base_tolerance;
    j["tolerance"] = c.base_tolerance * tolerance_scale;
    if (c.worst_index >= 0 || c.samples != 1) {
      j["samples"] = c.samples;
      j["worst_index"] = c.worst_index;
    }
    j["passed"] = c.passed(tolerance_scale);
    checks_json.push_back(std::move(j));
  }
  out["checks"] = std::move(checks_json);
  json values_json = json::array();
  for (const auto& v : values)
    values_json.push_back({{"name", v.name}, {"formula", v.formula}, {"units", v.units}, {"value", number(v.value)}});
  out["values"] = std::move(values_json);
  out["notes"] = notes;
  out["csv_columns"] = table.columns();
  out["csv_rows"] = table.rows().size();
  out["passed"] = passed();
  out["wall_time_seconds"] = wall_time_seconds;
  return out;
}

void write_report_files(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "report.json", std::ios::binary);
    f << report.to_json().dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  }
  std::ofstream f(dir / "data.csv", std::ios::binary);
  f << report.table.to_csv();
  if (!f) throw std::runtime_error("cannot write " + (dir / "data.csv").string());
}

}  // namespace weakgeo
