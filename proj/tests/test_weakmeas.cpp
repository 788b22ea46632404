#include <doctest.h>

#include <array>
#include <cmath>

#include "oracles.hpp"
#include "weakgeo/errors.hpp"
#include "weakgeo/random.hpp"
#include "weakgeo/rayspace.hpp"
#include "weakgeo/weakmeas.hpp"

using namespace weakgeo;
using oracle::pi;

namespace {

double max_abs(const CVector& v) { return v.cwiseAbs().maxCoeff(); }

struct Scenario {
  StateVector alpha;
  StateVector beta;
  HermitianOperator op;
};

// Random pre/post/observable triple with |<beta|alpha>| above `min_overlap`.
Scenario random_scenario(Rng& rng, long n, double min_overlap) {
  while (true) {
    StateVector a = random_state(rng, n);
    StateVector b = random_state(rng, n);
    if (std::abs(inner_product(b, a)) > min_overlap) return {a, b, random_hermitian(rng, n)};
  }
}

}  // namespace

TEST_SUITE("weakmeas") {
  TEST_CASE("weak_value basics") {
    Rng rng = instance_rng(61, 0);
    const Scenario s = random_scenario(rng, 3, 0.2);
    const WeakValue same = weak_value(s.alpha, s.alpha, s.op);
    CHECK(std::abs(same.value.imag()) < 1e-12);
    CHECK(std::abs(same.value.real() - expectation(s.op, s.alpha)) < 1e-12);
    CHECK(std::abs(weak_value(s.alpha, s.beta, HermitianOperator::identity(3)).value - 1.0) < 1e-15);
    CHECK(std::abs(weak_value(s.alpha, s.beta, s.op).overlap - inner_product(s.beta, s.alpha)) == 0.0);
  }

  TEST_CASE("qubit weak value of sigma_1 is the stereographic coordinate, conjugated") {
    const auto x = HermitianOperator::pauli_x();
    const StateVector up = basis_state(2, 0);
    for (double theta : {0.3, 1.0, 2.0, 2.9}) {
      for (double phi : {-2.5, -0.4, 0.0, 1.1, 3.0}) {
        const StateVector beta = state_from_bloch(theta, phi);
        // <beta|sigma_1|u0> = conj(beta_1), <beta|u0> = conj(beta_0).
        const Complex brute = std::conj(beta[1]) / std::conj(beta[0]);
        const Complex wv = weak_value(up, beta, x).value;
        CHECK(std::abs(wv - brute) < 1e-14);
        CHECK(std::abs(std::abs(wv) - std::tan(theta / 2)) < 1e-12);
        CHECK(std::abs(wv - std::polar(std::tan(theta / 2), -phi)) < 1e-12);
      }
    }
  }

  TEST_CASE("weak_value guard") {
    const auto x = HermitianOperator::pauli_x();
    CHECK_THROWS_AS(weak_value(basis_state(2, 0), basis_state(2, 1), x), AmplificationDivergence);
    const StateVector nearly = state_from_bloch(pi - 1e-7, 0.0);
    CHECK_THROWS_AS(weak_value(basis_state(2, 0), nearly, x), AmplificationDivergence);
    CHECK_NOTHROW(weak_value(basis_state(2, 0), nearly, x, 1e-9));
  }

  TEST_CASE("weak_value invariances") {
    Rng rng = instance_rng(62, 0);
    for (int trial = 0; trial < 50; ++trial) {
      const long n = 2 + trial % 3;
      const Scenario s = random_scenario(rng, n, 0.05);
      const Complex base = weak_value(s.alpha, s.beta, s.op).value;
      const Complex rotated =
          weak_value(s.alpha.with_phase(uniform(rng, -pi, pi)), s.beta.with_phase(uniform(rng, -pi, pi)), s.op).value;
      CHECK(std::abs(base - rotated) < 1e-12);

      const auto op2 = random_hermitian(rng, n);
      const double a = uniform(rng, -2, 2), b = uniform(rng, -2, 2);
      const HermitianOperator combo(a * s.op.matrix() + b * op2.matrix());
      const Complex lhs = weak_value(s.alpha, s.beta, combo).value;
      const Complex rhs = a * base + b * weak_value(s.alpha, s.beta, op2).value;
      CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
    }
  }

  TEST_CASE("weak value interpolates to the expectation as beta -> alpha") {
    Rng rng = instance_rng(63, 0);
    const auto op = random_hermitian(rng, 2);
    const BlochPoint a{1.1, 0.4};
    const StateVector alpha = state_from_bloch(a);
    Complex previous = weak_value(alpha, state_from_bloch(2.0, -1.0), op).value;
    for (int i = 1; i <= 100; ++i) {
      const double t = static_cast<double>(i) / 100.0;
      const StateVector beta = state_from_bloch((1 - t) * 2.0 + t * a.theta, (1 - t) * -1.0 + t * a.phi);
      const Complex wv = weak_value(alpha, beta, op).value;
      CHECK(std::abs(wv - previous) < 0.1);
      previous = wv;
    }
    CHECK(std::abs(previous - expectation(op, alpha)) < 1e-8);
  }

  TEST_CASE("anomalous amplification occurs above the guard") {
    Rng rng = instance_rng(64, 0);
    bool seen = false;
    for (int trial = 0; trial < 200 && !seen; ++trial) {
      const auto op = random_hermitian(rng, 2);
      const StateVector alpha = random_state(rng, 2);
      // Post-select close to the state orthogonal to alpha.
      const BlochPoint anti = bloch_from_state(alpha).antipode();
      const StateVector beta = state_from_bloch(anti.theta + 0.05, anti.phi);
      const WeakValue wv = weak_value(alpha, beta, op);
      seen = std::abs(wv.value) > op.eigenvalues().cwiseAbs().maxCoeff();
    }
    CHECK(seen);
  }

  TEST_CASE("WeakCoupling policy") {
    CHECK_NOTHROW(WeakCoupling(0.1));
    CHECK_THROWS_AS(WeakCoupling(0.2), InvalidArgument);
    CHECK_NOTHROW(WeakCoupling(0.5, 1.0));
  }

  TEST_CASE("weak_evolve_and_postselect") {
    const Grid g = Grid::standard();
    const PointerWave w = gaussian_wave({}, g);
    Rng rng = instance_rng(65, 0);
    const Scenario s = random_scenario(rng, 3, 0.2);

    CHECK(max_abs(weak_evolve_and_postselect(s.alpha, w, s.beta, s.op, WeakCoupling(0.0)).samples() -
                  w.samples()) < 1e-14);

    const StateVector eig = s.op.eigenvector(0);
    const StateVector beta = StateVector::normalized(eig.amplitudes() + 0.5 * s.beta.amplitudes());
    const PointerWave out = weak_evolve_and_postselect(eig, w, beta, s.op, WeakCoupling(0.05));
    CHECK(max_abs(out.samples() - translate(w, 0.05 * s.op.eigenvalues()[0]).samples()) < 1e-12);

    CHECK_THROWS_AS(weak_evolve_and_postselect(basis_state(2, 0), w, basis_state(2, 1),
                                               HermitianOperator::pauli_x(), WeakCoupling(0.01)),
                    AmplificationDivergence);
  }

  TEST_CASE("weak_shift_first_order") {
    const Grid g = Grid::standard();
    const PointerWave real_wave = gaussian_wave({}, g);
    const PointerWave chirped = gaussian_wave({.chirp = 1.0}, g);
    const WeakCoupling eps(0.01);
    const WeakValue real_wv{Complex(1.7, 0.0), Complex(0.5, 0.0)};
    CHECK(weak_shift_first_order(real_wv, chirped, eps) == doctest::Approx(0.017));
    const WeakValue imag_wv{Complex(0.0, 2.0), Complex(0.5, 0.0)};
    CHECK(std::abs(weak_shift_first_order(imag_wv, real_wave, eps)) < 1e-10);
    // C(Q,P) = -1 for c = 1.
    CHECK(weak_shift_first_order(imag_wv, chirped, eps) == doctest::Approx(-0.02).epsilon(1e-9));
  }

  TEST_CASE("weak_shift_exact") {
    const Grid g = Grid::standard();
    const PointerWave w = gaussian_wave({}, g);
    Rng rng = instance_rng(66, 0);
    const Scenario s = random_scenario(rng, 2, 0.3);
    CHECK(std::abs(weak_shift_exact(s.alpha, w, s.beta, s.op, WeakCoupling(0.0))) < 1e-14);

    const StateVector eig = s.op.eigenvector(1);
    for (double e : {0.001, 0.05, 0.1})
      CHECK(std::abs(weak_shift_exact(eig, w, s.beta, s.op, WeakCoupling(e)) - e * s.op.eigenvalues()[1]) < 1e-12);
  }

  TEST_CASE("slope of the exact shift matches the first-order coefficient") {
    const Grid g = Grid::standard();
    Rng rng = instance_rng(67, 0);
    const std::array<double, 3> ladder{1e-3, 2e-3, 4e-3};
    for (double chirp : {0.0, 1.0}) {
      const PointerWave w = gaussian_wave({.chirp = chirp}, g);
      for (int trial = 0; trial < 5; ++trial) {
        const Scenario s = random_scenario(rng, 2 + trial % 3, 0.1);
        std::array<double, 3> shifts{};
        for (int i = 0; i < 3; ++i) shifts[i] = weak_shift_exact(s.alpha, w, s.beta, s.op, WeakCoupling(ladder[i]));
        const double slope = weak_shift_slope(ladder, shifts);
        const WeakValue wv = weak_value(s.alpha, s.beta, s.op);
        const double first = weak_shift_first_order(wv, w, WeakCoupling(1.0, 1.0));
        CHECK(std::abs(slope - first) < 1e-4 * std::abs(first));
      }
    }
  }

  TEST_CASE("weak_shift_slope recovers polynomial coefficients") {
    const std::array<double, 3> e{1e-3, 2e-3, 4e-3};
    std::array<double, 3> f{};
    for (int i = 0; i < 3; ++i) f[i] = 2.5 * e[i] - 40.0 * e[i] * e[i] + 900.0 * e[i] * e[i] * e[i];
    CHECK(weak_shift_slope(e, f) == doctest::Approx(2.5).epsilon(1e-12));
  }

  TEST_CASE("first-order error is O(eps^2)") {
    const Grid g = Grid::standard();
    const PointerWave w = gaussian_wave({.chirp = 0.7}, g);
    Rng rng = instance_rng(68, 0);
    for (int trial = 0; trial < 3; ++trial) {
      const Scenario s = random_scenario(rng, 3, 0.3);
      const WeakValue wv = weak_value(s.alpha, s.beta, s.op);
      const std::array<double, 5> ladder{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
      std::array<double, 5> err{};
      for (int i = 0; i < 5; ++i) {
        const WeakCoupling eps(ladder[i]);
        err[i] = std::abs(weak_shift_exact(s.alpha, w, s.beta, s.op, eps) - weak_shift_first_order(wv, w, eps));
      }
      const double k = std::max(err[3] / (ladder[3] * ladder[3]), err[4] / (ladder[4] * ladder[4]));
      for (int i = 0; i < 5; ++i) CHECK(err[i] <= 1.5 * k * ladder[i] * ladder[i] + 1e-13);
    }
  }

  TEST_CASE("weak_triangle_phase") {
    Rng rng = instance_rng(69, 0);
    const Scenario s = random_scenario(rng, 3, 0.2);
    CHECK(std::abs(weak_triangle_rate(s.alpha, s.alpha, s.op, 1e-3)) < 1e-12);
    const StateVector eig = s.op.eigenvector(2);
    CHECK(std::abs(weak_triangle_phase(eig, s.beta.normalize(), s.op, 1e-3, 0.0, 0.01)) < 1e-14);

    // alpha = |u0>, beta = |pi/2, 0>, O = sigma_1: Re(O_w) = 1, <sigma_1> = 0.
    const double rate = weak_triangle_rate(basis_state(2, 0), state_from_bloch(pi / 2, 0),
                                           HermitianOperator::pauli_x(), 1e-3);
    CHECK(std::abs(rate + 1e-3) < 1e-12);

    for (int trial = 0; trial < 20; ++trial) {
      const Scenario r = random_scenario(rng, 2 + trial % 3, 0.1);
      const double expected =
          -1e-3 * (weak_value(r.alpha, r.beta, r.op).value.real() - expectation(r.op, r.alpha));
      CHECK(std::abs(weak_triangle_rate(r.alpha, r.beta, r.op, 1e-3) - expected) < 1e-8);
      const double rotated = weak_triangle_phase(r.alpha.with_phase(1.3), r.beta.with_phase(-2.1), r.op, 1e-3, 0.4, 0.01);
      CHECK(std::abs(rotated - weak_triangle_phase(r.alpha, r.beta, r.op, 1e-3, 0.4, 0.01)) < 1e-12);
    }
  }
}
