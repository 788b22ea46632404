#pragma once

// Ideal von Neumann pre-measurement: the pulse lambda delta(t - t0) O (x) P
// applied as one exact unitary, for a finite meter and for the continuous
// pointer.

#include <vector>

#include "weakgeo/linalg.hpp"
#include "weakgeo/pointer.hpp"
#include "weakgeo/rayspace.hpp"

namespace weakgeo {

struct StrongCoupling {
  StrongCoupling(double lambda, HermitianOperator observable);

  double lambda;
  HermitianOperator observable;
};

/// Meter with momentum basis {|v_s>}, P = |v_s> p_s <v^s|, prepared in
/// `initial` (amplitudes in that basis).
struct FiniteMeter {
  FiniteMeter(std::vector<double> momenta, StateVector initial);

  /// cos(theta/2)|v0> + e^{i phi} sin(theta/2)|v1>.
  static FiniteMeter qubit(double p0, double p1, double theta, double phi);

  std::vector<double> momenta;
  StateVector initial;
};

/// |A(y)> = e^{-i lambda y O}|alpha>.
StateVector indexed_state(const StateVector& alpha, const StrongCoupling& c, double y);

enum class EvolutionPath {
  /// Per-eigenbranch translation alpha^j phi(x - lambda o_j) in the O eigenbasis.
  translation,
  /// Independent check: integral dy |A(y)> (x) |p(y)> phi_p(y), with A(y) from
  /// a scaling-and-squaring matrix exponential; computational system basis.
  momentum,
};

BipartiteState evolve_strong_continuous(const StateVector& alpha, const PointerWave& w,
                                        const StrongCoupling& c,
                                        EvolutionPath path = EvolutionPath::translation);

/// Diagonal of the reduced pointer state as a position density (sums to 1/dx).
RVector meter_position_density(const BipartiteState& state);

struct PointerStatistics {
  double mean_q = 0.0;
  double var_q = 0.0;
};

/// Position mean and variance of tr_S(|psi_f><psi_f|) on `grid`.
PointerStatistics pointer_statistics(const BipartiteState& state, const Grid& grid);

/// tr(rho^(M) Q) - <Q>_initial from the simulated final state.
double pointer_mean_shift(const StateVector& alpha, const PointerWave& w, const StrongCoupling& c);

/// d/dy arg <A(y)|A(y+dy)> at y = 0 from central differences on the ladder
/// dy = 1e-3, 1e-4, 1e-5, Richardson-extrapolated.
double phase_shift_rate(const StateVector& alpha, const StrongCoupling& c);

/// Fubini-Study speed of y -> |A(y)>: lambda * sqrt(Var(O)_alpha).
double fs_speed(const StateVector& alpha, const StrongCoupling& c);

/// fs_distance(A(0), A(dy)) / dy, Richardson-extrapolated over the ladder
/// dy = (1e-2, 1e-3, 1e-4) / (|lambda| (o_max - o_min)).
double fs_speed_finite_difference(const StateVector& alpha, const StrongCoupling& c);

BipartiteState evolve_strong_finite(const StateVector& alpha, const FiniteMeter& meter,
                                    const StrongCoupling& c);

/// tr(rho |ref><ref|) for a qubit meter.
double readout_probability(const DensityMatrix& meter_rho, const BlochPoint& reference);

/// Normalized meter state after projecting the system onto beta:
/// C <beta|A_s> phi^s |v_s>.
StateVector postselected_meter_state(const StateVector& alpha, const FiniteMeter& meter,
                                     const StrongCoupling& c, const StateVector& beta);

struct PostselectPhase {
  /// Pancharatnam phase of (A0, beta, A1) = arg(<A1|beta><beta|A0><A0|A1>).
  double phase = 0.0;
  /// phi_p - phi, the shift of the readout argmax caused by post-selection,
  /// located by brute-force scans of the meter azimuth.
  double argmax_shift = 0.0;
  /// Scan resolution; the two numbers agree to within this.
  double scan_step = 0.0;
};

/// Post-selection phase for a two-state meter. The meter's polar angle is
/// kept; its azimuth is scanned over `scan_points` values in [-pi, pi).
PostselectPhase postselect_phase(const StateVector& alpha, const FiniteMeter& meter,
                                 const StrongCoupling& c, const StateVector& beta,
                                 long scan_points = 2048);

/// Reference state |theta = pi/2, phi = 0> used for readouts.
inline constexpr BlochPoint kReadoutReference{1.5707963267948966, 0.0};

}  // namespace weakgeo
