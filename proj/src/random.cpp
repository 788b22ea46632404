#include "weakgeo/random.hpp"

#include <cmath>

namespace weakgeo {

namespace {

CVector gaussian_vector(Rng& rng, long dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(dim);
  for (long i = 0; i < dim; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v[i] = Complex(re, im);
  }
  return v;
}

}  // namespace

Rng instance_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

StateVector random_state(Rng& rng, long dim) { return StateVector::normalized(gaussian_vector(rng, dim)); }

CMatrix random_unitary(Rng& rng, long dim) {
  CMatrix g(dim, dim);
  for (long j = 0; j < dim; ++j) g.col(j) = gaussian_vector(rng, dim);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (long j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

HermitianOperator random_hermitian(Rng& rng, long dim, double lo, double hi) {
  RVector spectrum(dim);
  for (long i = 0; i < dim; ++i) spectrum[i] = uniform(rng, lo, hi);
  return HermitianOperator::from_spectrum(spectrum, random_unitary(rng, dim));
}

}  // namespace weakgeo
