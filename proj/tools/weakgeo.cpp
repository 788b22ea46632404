// weakgeo: run scenario configs and randomized verification batteries.
//
// Exit codes: 0 all checks pass, 1 a tolerance check failed, 2 config parse
// error, 3 validation error (including unknown suites), 4 physics guard.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "weakgeo/battery.hpp"
#include "weakgeo/errors.hpp"
#include "weakgeo/scenario.hpp"

namespace {

enum Exit { kPass = 0, kToleranceFailure = 1, kParseError = 2, kValidationError = 3, kPhysicsGuard = 4 };

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("WEAKGEO_OUT"); env && *env) return env;
  return ".";
}

int finish(const weakgeo::Report& report, const std::filesystem::path& dir) {
  weakgeo::write_report_files(report, dir);
  for (const auto& c : report.checks) {
    std::cout << (c.passed(report.tolerance_scale) ? "PASS " : "FAIL ") << c.name
              << "  error=" << weakgeo::format_double(c.error())
              << " tol=" << weakgeo::format_double(c.base_tolerance * report.tolerance_scale) << '\n';
  }
  std::cout << (report.passed() ? "passed" : "FAILED") << " (" << report.checks.size() << " checks, "
            << report.wall_time_seconds << " s) -> " << (dir / "report.json").string() << '\n';
  return report.passed() ? kPass : kToleranceFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakgeo: von Neumann and weak measurement geometry, verified by simulation"};
  app.require_subcommand(1);
  // Global options are accepted before or after the subcommand.
  app.fallthrough();

  std::string out_flag;
  double tolerance_scale = 1.0;
  app.add_option("--out", out_flag, "Output directory for report.json and data.csv (default: $WEAKGEO_OUT or .)");
  app.add_option("--tolerance-scale", tolerance_scale, "Multiply every tolerance by this factor (logged in the report)")
      ->check(CLI::PositiveNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Execute a scenario config");
  run->add_option("config", config_path, "Scenario file (JSON, comments allowed)")->required();

  std::string suite;
  std::uint64_t seed = 0;
  long count = -1;
  unsigned threads = 0;
  auto* battery = app.add_subcommand("battery", "Run a randomized verification battery");
  battery->add_option("suite", suite, "Suite name (see list-suites)")->required();
  battery->add_option("--seed", seed, "Base seed")->required();
  battery->add_option("--count", count, "Number of random instances (default: the suite's standard size)");
  battery->add_option("--threads", threads, "Worker threads (0 = all cores); never changes the results");

  auto* list = app.add_subcommand("list-suites", "List battery suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kValidationError;
  }

  try {
    if (list->parsed()) {
      for (const auto& s : weakgeo::battery_suites())
        std::cout << s.name << "  (default count " << s.default_count << ")  " << s.description << '\n';
      return kPass;
    }
    const auto dir = output_dir(out_flag);
    if (run->parsed()) {
      const weakgeo::Scenario scenario = weakgeo::load_scenario_file(config_path);
      return finish(weakgeo::run_scenario(scenario, tolerance_scale), dir);
    }
    if (count < 0) {
      for (const auto& s : weakgeo::battery_suites())
        if (s.name == suite) count = s.default_count;
    }
    return finish(weakgeo::run_battery(suite, seed, std::max(count, 0L), tolerance_scale, threads), dir);
  } catch (const weakgeo::ConfigParseError& e) {
    std::cerr << config_path << ": parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const weakgeo::InvalidArgument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidationError;
  } catch (const weakgeo::PhysicsGuardError& e) {
    std::cerr << "physics guard: " << e.what() << '\n';
    return kPhysicsGuard;
  }
}
