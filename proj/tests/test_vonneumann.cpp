#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "weakgeo/errors.hpp"
#include "weakgeo/random.hpp"
#include "weakgeo/vonneumann.hpp"

using namespace weakgeo;
using oracle::pi;

namespace {

double wrap(double a) { return std::remainder(a, 2.0 * pi); }

bool same_ray(const StateVector& a, const StateVector& b, double tolerance = 1e-10) {
  return std::abs(std::abs(inner_product(a, b)) - 1.0) < tolerance;
}

}  // namespace

TEST_SUITE("vonneumann") {
  TEST_CASE("indexed_state") {
    Rng rng = instance_rng(51, 0);
    const auto op = random_hermitian(rng, 3);
    const StrongCoupling c(0.7, op);
    const StateVector alpha = random_state(rng, 3);
    CHECK((indexed_state(alpha, c, 0.0).amplitudes() - alpha.amplitudes()).norm() < 1e-15);
    CHECK(indexed_state(alpha, c, 2.3).is_normalized(1e-12));

    const StateVector eig = op.eigenvector(1);
    const StateVector moved = indexed_state(eig, c, 1.9);
    const Complex phase = std::polar(1.0, -0.7 * 1.9 * op.eigenvalues()[1]);
    CHECK((moved.amplitudes() - phase * eig.amplitudes()).norm() < 1e-12);

    const StrongCoupling z(1.0, HermitianOperator::pauli_z());
    CHECK(same_ray(indexed_state(state_from_bloch(pi / 2, 0), z, pi / 2), state_from_bloch(pi / 2, -pi)));
  }

  TEST_CASE("evolve_strong_continuous") {
    const Grid g = Grid::standard();
    const PointerWave w = gaussian_wave({}, g);
    Rng rng = instance_rng(52, 0);
    const auto op = random_hermitian(rng, 3);
    const StateVector alpha = random_state(rng, 3);

    SUBCASE("no coupling gives the product state") {
      const BipartiteState s = evolve_strong_continuous(alpha, w, StrongCoupling(0.0, op));
      const CMatrix expected = alpha.amplitudes() * w.samples().transpose();
      CHECK((s.computational_components() - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("eigenstate input populates one translated branch") {
      const StrongCoupling c(0.8, op);
      const BipartiteState s = evolve_strong_continuous(op.eigenvector(2), w, c);
      const PointerWave expected = translate(w, 0.8 * op.eigenvalues()[2]);
      CHECK(std::abs(std::abs(s.components().row(2).dot(expected.samples().transpose())) * g.dx() - 1.0) < 1e-12);
      CHECK(s.components().topRows(2).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("well separated qubit branches carry weight 1/2 each") {
      const PointerWave narrow = gaussian_wave({.width = 0.1}, g);
      const BipartiteState s = evolve_strong_continuous(
          state_from_bloch(pi / 2, 0), narrow, StrongCoupling(1.0, HermitianOperator::pauli_z()));
      const RVector density = meter_position_density(s);
      double left = 0.0, right = 0.0;
      for (long j = 0; j < g.size(); ++j) (g.x(j) < 0 ? left : right) += density[j] * g.dx();
      CHECK(std::abs(left - 0.5) < 1e-12);
      CHECK(std::abs(right - 0.5) < 1e-12);
    }
    SUBCASE("momentum-space exponentiation agrees") {
      const StrongCoupling c(0.6, op);
      const BipartiteState a = evolve_strong_continuous(alpha, w, c, EvolutionPath::translation);
      const BipartiteState b = evolve_strong_continuous(alpha, w, c, EvolutionPath::momentum);
      CHECK((a.computational_components() - b.computational_components()).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK_THROWS_AS(evolve_strong_continuous(alpha, w, StrongCoupling(15.0, op)), SupportOverflow);
    CHECK_THROWS_AS(evolve_strong_continuous(StateVector{1.0, 1.0, 0.0}, w, StrongCoupling(0.1, op)),
                    InvalidArgument);
  }

  TEST_CASE("unitarity and correlation structure") {
    const Grid g(-16.0, 16.0, 256);
    const PointerWave w = gaussian_wave({.width = 0.8}, g);
    Rng rng = instance_rng(53, 0);
    for (int trial = 0; trial < 10; ++trial) {
      const long n = 2 + trial % 3;
      const auto op = random_hermitian(rng, n);
      const StateVector alpha = random_state(rng, n);
      const StrongCoupling c(uniform(rng, 0.0, 2.0), op);
      const BipartiteState s = evolve_strong_continuous(alpha, w, c);
      CHECK(std::abs(s.norm_squared() - 1.0) < 1e-10);

      // Meter reduced state: sum_j |alpha^j|^2 |phi_j><phi_j|.
      const CVector coeffs = op.eigenvectors().adjoint() * alpha.amplitudes();
      CMatrix mixture = CMatrix::Zero(g.size(), g.size());
      for (long j = 0; j < n; ++j) {
        const CVector branch = translate(w, c.lambda * op.eigenvalues()[j]).samples();
        mixture += std::norm(coeffs[j]) * g.dx() * branch * branch.adjoint();
      }
      CHECK((partial_trace(s, Factor::meter).matrix() - mixture).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("separated branches decohere the system in the eigenbasis") {
    const Grid g = Grid::standard();
    const PointerWave narrow = gaussian_wave({.width = 0.05}, g);
    RVector spectrum(3);
    spectrum << -1.0, 0.0, 1.0;
    Rng rng = instance_rng(54, 0);
    const auto op = HermitianOperator::from_spectrum(spectrum, random_unitary(rng, 3));
    const StateVector alpha = random_state(rng, 3);
    const BipartiteState s = evolve_strong_continuous(alpha, narrow, StrongCoupling(2.0, op));
    const CMatrix in_eigenbasis =
        op.eigenvectors().adjoint() * partial_trace(s, Factor::system).matrix() * op.eigenvectors();
    const CVector coeffs = op.eigenvectors().adjoint() * alpha.amplitudes();
    CHECK((in_eigenbasis - CMatrix(coeffs.cwiseAbs2().cast<Complex>().asDiagonal())).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("pointer_mean_shift") {
    const Grid g = Grid::standard();
    const PointerWave w = gaussian_wave({}, g);
    const auto z = HermitianOperator::pauli_z();
    CHECK(std::abs(pointer_mean_shift(state_from_bloch(1.0, 0), w, StrongCoupling(0.0, z))) < 1e-14);
    CHECK(std::abs(pointer_mean_shift(basis_state(2, 1), w, StrongCoupling(0.3, z)) + 0.3) < 1e-8);
    for (double theta : {0.2, 1.0, 2.0, 3.0}) {
      const double shift = pointer_mean_shift(state_from_bloch(theta, 0), w, StrongCoupling(0.2, z));
      CHECK(std::abs(shift - 0.2 * std::cos(theta)) < 1e-8);
    }
  }

  TEST_CASE("pointer variance grows by lambda^2 Var(O)") {
    const Grid g = Grid::standard();
    const PointerWave w = gaussian_wave({.center = 0.5, .width = 1.2}, g);
    Rng rng = instance_rng(55, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const long n = 2 + trial % 3;
      const auto op = random_hermitian(rng, n);
      const StateVector alpha = random_state(rng, n);
      const StrongCoupling c(uniform(rng, 0.0, 1.0), op);
      const PointerStatistics st = pointer_statistics(evolve_strong_continuous(alpha, w, c), g);
      CHECK(std::abs(st.var_q - (1.44 + c.lambda * c.lambda * variance(op, alpha))) < 1e-7);
    }
  }

  TEST_CASE("phase_shift_rate") {
    const auto z = HermitianOperator::pauli_z();
    CHECK(std::abs(phase_shift_rate(basis_state(2, 0), StrongCoupling(1.0, z)) + 1.0) < 1e-12);
    CHECK(std::abs(phase_shift_rate(state_from_bloch(pi / 2, 0.4), StrongCoupling(1.0, z))) < 1e-12);
    for (double theta : {0.3, 1.2, 2.8})
      CHECK(std::abs(phase_shift_rate(state_from_bloch(theta, 0), StrongCoupling(0.7, z)) +
                     0.7 * std::cos(theta)) < 1e-9);
  }

  TEST_CASE("fs_speed") {
    const auto z = HermitianOperator::pauli_z();
    CHECK(fs_speed(basis_state(2, 1), StrongCoupling(1.0, z)) == 0.0);
    CHECK(fs_speed(state_from_bloch(pi / 2, 1.0), StrongCoupling(1.0, z)) == doctest::Approx(1.0).epsilon(1e-15));
    const StateVector psi = state_from_bloch(0.9, 0.2);
    CHECK(fs_speed(psi, StrongCoupling(0.8, z)) == doctest::Approx(2.0 * fs_speed(psi, StrongCoupling(0.4, z))));

    Rng rng = instance_rng(56, 0);
    for (int trial = 0; trial < 50; ++trial) {
      const long n = 2 + trial % 3;
      const StrongCoupling c(uniform(rng, 0.1, 1.0), random_hermitian(rng, n));
      const StateVector alpha = random_state(rng, n);
      const double analytic = fs_speed(alpha, c);
      CHECK(std::abs(fs_speed_finite_difference(alpha, c) - analytic) < 1e-8 * analytic);
    }
  }

  TEST_CASE("evolve_strong_finite") {
    Rng rng = instance_rng(57, 0);
    const auto op = random_hermitian(rng, 3);
    const StateVector alpha = random_state(rng, 3);
    const FiniteMeter meter({0.0, 0.5, 1.5}, random_state(rng, 3));

    const BipartiteState free = evolve_strong_finite(alpha, meter, StrongCoupling(0.0, op));
    CHECK((free.components() - alpha.amplitudes() * meter.initial.amplitudes().transpose())
              .cwiseAbs().maxCoeff() < 1e-15);

    const FiniteMeter single({0.7}, StateVector{1.0});
    const BipartiteState one = evolve_strong_finite(alpha, single, StrongCoupling(1.3, op));
    CHECK(partial_trace(one, Factor::system).eigenvalues().maxCoeff() == doctest::Approx(1.0));

    const StateVector qubit = state_from_bloch(1.0, 0.5);
    const BipartiteState flip = evolve_strong_finite(
        qubit, FiniteMeter::qubit(0.0, 1.0, pi / 2, 0.0), StrongCoupling(pi, HermitianOperator::pauli_z()));
    const double amp = 1.0 / std::sqrt(2.0);
    CHECK((flip.components().col(0) - amp * qubit.amplitudes()).norm() < 1e-15);
    CHECK((flip.components().col(1) + amp * qubit.amplitudes()).norm() < 1e-15);
    CHECK(std::abs(flip.norm_squared() - 1.0) < 1e-12);
  }

  TEST_CASE("readout_probability") {
    const BlochPoint ref = kReadoutReference;
    CHECK(readout_probability(DensityMatrix::pure(state_from_bloch(ref)), ref) == doctest::Approx(1.0));
    CHECK(readout_probability(DensityMatrix(0.5 * CMatrix::Identity(2, 2)), ref) == doctest::Approx(0.5));
    CHECK_THROWS_AS(readout_probability(DensityMatrix(CMatrix::Identity(3, 3) / 3.0), ref), DimensionMismatch);

    Rng rng = instance_rng(58, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const long n = 2 + trial % 3;
      const StrongCoupling c(uniform(rng, 0.0, 2.0), random_hermitian(rng, n));
      const StateVector alpha = random_state(rng, n);
      const double p0 = uniform(rng, -1, 1), p1 = uniform(rng, -1, 1);
      const double theta = uniform(rng, 0.1, pi - 0.1), phi = uniform(rng, -pi, pi);
      const Complex a0a1 = inner_product(indexed_state(alpha, c, p0), indexed_state(alpha, c, p1));
      const double beta = std::arg(std::conj(a0a1));
      const DensityMatrix rho =
          partial_trace(evolve_strong_finite(alpha, FiniteMeter::qubit(p0, p1, theta, phi), c), Factor::meter);
      CHECK(std::abs(readout_probability(rho, ref) -
                     oracle::readout_closed_form(std::abs(a0a1), theta, phi, beta)) < 1e-10);
    }
  }

  TEST_CASE("the printed 1/4 coefficient fails the no-coupling limit") {
    // lambda = 0, meter already in the reference state: p must be 1.
    const StateVector alpha = state_from_bloch(0.3, 0.1);
    const StrongCoupling c(0.0, HermitianOperator::pauli_z());
    const DensityMatrix rho =
        partial_trace(evolve_strong_finite(alpha, FiniteMeter::qubit(0, 1, pi / 2, 0), c), Factor::meter);
    const double traced = readout_probability(rho, kReadoutReference);
    CHECK(traced == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(oracle::readout_closed_form(1.0, pi / 2, 0, 0) == doctest::Approx(1.0));
    const double quarter = 0.5 + 0.25 * 1.0 * std::sin(pi / 2) * std::cos(0.0);
    CHECK(std::abs(traced - quarter) > 0.2);
  }

  TEST_CASE("readout argmax sits at beta") {
    Rng rng = instance_rng(59, 0);
    const long points = 2048;
    const double step = 2 * pi / points;
    for (int trial = 0; trial < 5; ++trial) {
      const StrongCoupling c(uniform(rng, 0.2, 2.0), random_hermitian(rng, 2));
      const StateVector alpha = random_state(rng, 2);
      const double beta = std::arg(inner_product(indexed_state(alpha, c, 1.0), indexed_state(alpha, c, 0.0)));
      double best = -1.0, best_phi = 0.0;
      for (long i = 0; i < points; ++i) {
        const double phi = -pi + static_cast<double>(i) * step;
        const DensityMatrix rho = partial_trace(
            evolve_strong_finite(alpha, FiniteMeter::qubit(0.0, 1.0, pi / 2, phi), c), Factor::meter);
        const double p = readout_probability(rho, kReadoutReference);
        if (p > best) best = p, best_phi = phi;
      }
      CHECK(std::abs(wrap(best_phi - beta)) <= step);
    }
  }

  TEST_CASE("postselect_phase") {
    const auto z = HermitianOperator::pauli_z();
    const StateVector alpha = state_from_bloch(pi / 2, 0);

    SUBCASE("beta on the A0 ray") {
      const StrongCoupling c(1.0, z);
      const FiniteMeter meter = FiniteMeter::qubit(0.0, 0.6, pi / 2, 0.0);
      const StateVector beta = indexed_state(alpha, c, 0.0).with_phase(0.8);
      const PostselectPhase r = postselect_phase(alpha, meter, c, beta);
      CHECK(std::abs(r.phase) < 1e-12);
      CHECK(std::abs(wrap(r.argmax_shift - r.phase)) <= r.scan_step);
    }
    SUBCASE("equator pair with the north pole: |Theta| = gamma / 2") {
      for (double gamma : {0.4, 1.2, 2.0}) {
        // A(p) = Bloch(pi/2, 2 lambda p), so p1 = gamma/2 puts A1 at azimuth gamma.
        const StrongCoupling c(1.0, z);
        const FiniteMeter meter = FiniteMeter::qubit(0.0, gamma / 2, 1.3, 0.0);
        const PostselectPhase r = postselect_phase(alpha, meter, c, basis_state(2, 0));
        // arg(<A0|A1><A1|N><N|A0>) = arg((1 + e^{i gamma})/4) = gamma/2.
        CHECK(r.phase == doctest::Approx(gamma / 2).epsilon(1e-12));
        CHECK(std::abs(wrap(r.argmax_shift - r.phase)) <= r.scan_step);
      }
    }
    SUBCASE("collinear triple") {
      // sigma_y rotations keep everything on the phi = 0 meridian.
      const StrongCoupling c(0.9, HermitianOperator::pauli_y());
      const StateVector a = state_from_bloch(0.7, 0);
      const PostselectPhase r =
          postselect_phase(a, FiniteMeter::qubit(0.1, 0.5, pi / 2, 0.0), c, state_from_bloch(0.2, 0));
      CHECK(std::abs(r.phase) < 1e-12);
      CHECK(std::abs(wrap(r.argmax_shift)) <= r.scan_step);
    }
    SUBCASE("random scenarios track the argmax shift") {
      Rng rng = instance_rng(60, 0);
      for (int trial = 0; trial < 5; ++trial) {
        const long n = 2 + trial % 2;
        const StrongCoupling c(uniform(rng, 0.2, 1.5), random_hermitian(rng, n));
        const StateVector a = random_state(rng, n);
        const FiniteMeter meter = FiniteMeter::qubit(uniform(rng, -1, 1), uniform(rng, -1, 1), 1.1, 0.3);
        const PostselectPhase r = postselect_phase(a, meter, c, random_state(rng, n), 1024);
        CHECK(std::abs(wrap(r.argmax_shift - r.phase)) <= r.scan_step);
      }
    }
    SUBCASE("orthogonal post-selection") {
      const StrongCoupling c(1.0, z);
      CHECK_THROWS_AS(postselect_phase(basis_state(2, 0), FiniteMeter::qubit(0, 1, 1, 0), c, basis_state(2, 1)),
                      UndefinedPhase);
    }
  }
}
