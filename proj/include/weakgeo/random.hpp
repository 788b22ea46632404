#pragma once

// Seeded generators for randomized batteries and property tests.

#include <cstdint>
#include <random>

#include "weakgeo/linalg.hpp"

namespace weakgeo {

using Rng = std::mt19937_64;

/// Independent stream for instance `index` of a battery seeded with `seed`.
Rng instance_rng(std::uint64_t seed, std::uint64_t index);

/// Haar-distributed pure state.
StateVector random_state(Rng& rng, long dim);

/// Haar-distributed unitary (QR of a complex Ginibre matrix, phase-fixed).
CMatrix random_unitary(Rng& rng, long dim);

/// U diag(o) U^dagger with o uniform in [lo, hi] and Haar U.
HermitianOperator random_hermitian(Rng& rng, long dim, double lo = -1.0, double hi = 1.0);

double uniform(Rng& rng, double lo, double hi);

}  // namespace weakgeo
