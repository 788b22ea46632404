#pragma once

// Weak measurement with pre-selection |alpha> and post-selection |beta>:
// weak values, the exact conditional pointer state, the first-order shift
//   Delta Q = eps [Im(O_w) C(Q,P) + Re(O_w)],
// and the triangle phase of (A(y), A(y+dy), beta).

#include <complex>
#include <span>
#include <vector>

#include "weakgeo/linalg.hpp"
#include "weakgeo/pointer.hpp"

namespace weakgeo {

/// Default lower bound on |<beta|alpha>|.
inline constexpr double kWeakValueGuard = 1e-6;
/// Default weak-regime policy bound on |eps|.
inline constexpr double kWeakRegimeBound = 0.1;

struct WeakValue {
  Complex value;
  /// <beta|alpha>
  Complex overlap;
};

class WeakCoupling {
public:
  explicit WeakCoupling(double epsilon, double bound = kWeakRegimeBound);

  [[nodiscard]] double epsilon() const { return epsilon_; }

private:
  double epsilon_;
};

/// <beta|O|alpha> / <beta|alpha>. Throws AmplificationDivergence when
/// |<beta|alpha>| <= guard.
WeakValue weak_value(const StateVector& alpha, const StateVector& beta, const HermitianOperator& op,
                     double guard = kWeakValueGuard);

/// Exact e^{-i eps O (x) P} on alpha (x) w, projection onto beta and exact
/// renormalization. The result is divided by <beta|alpha> before the real
/// renormalization, so eps = 0 reproduces w.
PointerWave weak_evolve_and_postselect(const StateVector& alpha, const PointerWave& w,
                                       const StateVector& beta, const HermitianOperator& op,
                                       const WeakCoupling& eps, double guard = kWeakValueGuard);

/// eps [Im(O_w) C(Q,P) + Re(O_w)].
double weak_shift_first_order(const WeakValue& wv, const PointerWave& w, const WeakCoupling& eps);

/// <Q> of the conditional pointer minus <Q> of w, no perturbative step.
double weak_shift_exact(const StateVector& alpha, const PointerWave& w, const StateVector& beta,
                        const HermitianOperator& op, const WeakCoupling& eps,
                        double guard = kWeakValueGuard);

/// Linear coefficient of the cubic through the origin and (eps_i, shift_i),
/// i = 1..3. The exact shift vanishes at eps = 0, so this removes the
/// eps^2 and eps^3 contamination of the slope.
double weak_shift_slope(std::span<const double> epsilons, std::span<const double> shifts);

/// arg[<A(y)|beta><beta|A(y+dy)><A(y+dy)|A(y)>] with A(y) = e^{-i coupling y O}|alpha>.
double weak_triangle_phase(const StateVector& alpha, const StateVector& beta,
                           const HermitianOperator& op, double coupling, double y, double dy);

/// Theta/dy as dy -> 0 at y, Richardson-extrapolated over dy = 1e-2, 1e-3, 1e-4.
double weak_triangle_rate(const StateVector& alpha, const StateVector& beta,
                          const HermitianOperator& op, double coupling, double y = 0.0);

}  // namespace weakgeo
