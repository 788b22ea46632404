#pragma once

// Randomized verification batteries. Instance i of a battery seeded with s
// draws from instance_rng(s, i), so results do not depend on the number of
// worker threads or on scheduling.

#include <cstdint>
#include <string>
#include <vector>

#include "weakgeo/report.hpp"

namespace weakgeo {

struct SuiteInfo {
  std::string name;
  std::string description;
  long default_count = 0;
};

const std::vector<SuiteInfo>& battery_suites();

/// Throws ConfigValidationError for an unknown suite and InvalidArgument for
/// a negative count. threads = 0 uses the hardware concurrency.
Report run_battery(const std::string& suite, std::uint64_t seed, long count, double tolerance_scale = 1.0,
                   unsigned threads = 0);

}  // namespace weakgeo
