#include "weakgeo/weakmeas.hpp"

#include <cmath>
#include <string>

#include "weakgeo/errors.hpp"
#include "weakgeo/rayspace.hpp"

namespace weakgeo {

namespace {

void require_normalized(const char* where, const StateVector& psi) {
  if (!psi.is_normalized(tol::derived))
    throw InvalidArgument(std::string(where) + ": state is not normalized");
}

Complex checked_overlap(const char* where, const StateVector& alpha, const StateVector& beta,
                        const HermitianOperator& op, double guard) {
  if (alpha.dim() != op.dim()) throw DimensionMismatch(where, op.dim(), alpha.dim());
  if (beta.dim() != op.dim()) throw DimensionMismatch(where, op.dim(), beta.dim());
  require_normalized(where, alpha);
  require_normalized(where, beta);
  const Complex overlap = inner_product(beta, alpha);
  if (!(std::abs(overlap) > guard))
    throw AmplificationDivergence(std::string(where) + ": |<beta|alpha>| = " +
                                  std::to_string(std::abs(overlap)) + " is below the guard " +
                                  std::to_string(guard));
  return overlap;
}

}  // namespace

WeakCoupling::WeakCoupling(double epsilon, double bound) : epsilon_(epsilon) {
  if (!std::isfinite(epsilon)) throw InvalidArgument("WeakCoupling: epsilon must be finite");
  if (std::abs(epsilon) > bound)
    throw InvalidArgument("WeakCoupling: |epsilon| = " + std::to_string(std::abs(epsilon)) +
                          " exceeds the weak-regime bound " + std::to_string(bound));
}

WeakValue weak_value(const StateVector& alpha, const StateVector& beta, const HermitianOperator& op,
                     double guard) {
  const Complex overlap = checked_overlap("weak_value", alpha, beta, op, guard);
  const Complex numerator = beta.amplitudes().dot(op.matrix() * alpha.amplitudes());
  return {numerator / overlap, overlap};
}

PointerWave weak_evolve_and_postselect(const StateVector& alpha, const PointerWave& w,
                                       const StateVector& beta, const HermitianOperator& op,
                                       const WeakCoupling& eps, double guard) {
  const Complex overlap = checked_overlap("weak_evolve_and_postselect", alpha, beta, op, guard);
  const CVector a = op.eigenvectors().adjoint() * alpha.amplitudes();
  const CVector b = op.eigenvectors().adjoint() * beta.amplitudes();
  CVector conditional = CVector::Zero(w.grid().size());
  for (long j = 0; j < op.dim(); ++j) {
    const Complex weight = std::conj(b[j]) * a[j];
    if (weight == Complex(0.0)) continue;
    conditional += weight * translate(w, eps.epsilon() * op.eigenvalues()[j]).samples();
  }
  const PointerWave unnormalized(w.grid(), conditional);
  if (unnormalized.norm_squared() < 1e-12)
    throw PostselectionFailure("weak_evolve_and_postselect: post-selection probability < 1e-12");
  return PointerWave(w.grid(), conditional / overlap).normalize();
}

double weak_shift_first_order(const WeakValue& wv, const PointerWave& w, const WeakCoupling& eps) {
  return eps.epsilon() * (wv.value.imag() * covariance_term(w) + wv.value.real());
}

double weak_shift_exact(const StateVector& alpha, const PointerWave& w, const StateVector& beta,
                        const HermitianOperator& op, const WeakCoupling& eps, double guard) {
  const PointerWave after = weak_evolve_and_postselect(alpha, w, beta, op, eps, guard);
  return moments(after).mean_q - moments(w).mean_q;
}

double weak_shift_slope(std::span<const double> epsilons, std::span<const double> shifts) {
  if (epsilons.size() != shifts.size() || epsilons.empty())
    throw InvalidArgument("weak_shift_slope: need matching, non-empty samples");
  const long n = static_cast<long>(epsilons.size());
  Eigen::MatrixXd v(n, n);
  Eigen::VectorXd rhs(n);
  for (long i = 0; i < n; ++i) {
    double power = 1.0;
    for (long k = 0; k < n; ++k) {
      power *= epsilons[i];
      v(i, k) = power;
    }
    rhs[i] = shifts[i];
  }
  return v.colPivHouseholderQr().solve(rhs)[0];
}

double weak_triangle_phase(const StateVector& alpha, const StateVector& beta,
                           const HermitianOperator& op, double coupling, double y, double dy) {
  if (alpha.dim() != op.dim()) throw DimensionMismatch("weak_triangle_phase", op.dim(), alpha.dim());
  require_normalized("weak_triangle_phase", alpha);
  require_normalized("weak_triangle_phase", beta);
  const StateVector here(hermitian_exp(op, coupling * y) * alpha.amplitudes());
  const StateVector next(hermitian_exp(op, coupling * (y + dy)) * alpha.amplitudes());
  return pancharatnam_phase(here, next, beta);
}

double weak_triangle_rate(const StateVector& alpha, const StateVector& beta,
                          const HermitianOperator& op, double coupling, double y) {
  // Theta(dy) is analytic in dy, so the central quotient has an even error series.
  constexpr double ladder[3] = {1e-2, 1e-3, 1e-4};
  double d[3];
  for (int i = 0; i < 3; ++i) {
    const double h = ladder[i];
    d[i] = (weak_triangle_phase(alpha, beta, op, coupling, y, h) -
            weak_triangle_phase(alpha, beta, op, coupling, y, -h)) /
           (2.0 * h);
  }
  const double r1 = (100.0 * d[1] - d[0]) / 99.0;
  const double r2 = (100.0 * d[2] - d[1]) / 99.0;
  return (1e4 * r2 - r1) / (1e4 - 1.0);
}

}  // namespace weakgeo
