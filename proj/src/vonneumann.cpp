#include "weakgeo/vonneumann.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "weakgeo/errors.hpp"

namespace weakgeo {

namespace {

constexpr double kPi = std::numbers::pi;

void require_normalized(const char* where, const StateVector& psi) {
  if (!psi.is_normalized(tol::derived))
    throw InvalidArgument(std::string(where) + ": state is not normalized");
}

void require_normalized(const char* where, const PointerWave& w) {
  if (std::abs(w.norm_squared() - 1.0) > tol::derived)
    throw InvalidArgument(std::string(where) + ": pointer wave is not normalized");
}

double wrap(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

// Three-level Richardson for an even error series in h with h ratio 10.
double richardson_ratio10(double d1, double d2, double d3) {
  const double r1 = (100.0 * d2 - d1) / 99.0;
  const double r2 = (100.0 * d3 - d2) / 99.0;
  return (1e4 * r2 - r1) / (1e4 - 1.0);
}

constexpr double kLadder[3] = {1e-3, 1e-4, 1e-5};
constexpr double kSpeedLadder[3] = {1e-2, 1e-3, 1e-4};

long argmax_index(const std::vector<double>& v) {
  return static_cast<long>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

StrongCoupling::StrongCoupling(double lambda_, HermitianOperator observable_)
    : lambda(lambda_), observable(std::move(observable_)) {
  if (!std::isfinite(lambda)) throw InvalidArgument("StrongCoupling: lambda must be finite");
}

FiniteMeter::FiniteMeter(std::vector<double> momenta_, StateVector initial_)
    : momenta(std::move(momenta_)), initial(std::move(initial_)) {
  if (static_cast<long>(momenta.size()) != initial.dim())
    throw DimensionMismatch("FiniteMeter", static_cast<long>(momenta.size()), initial.dim());
  for (double p : momenta)
    if (!std::isfinite(p)) throw InvalidArgument("FiniteMeter: non-finite momentum");
  require_normalized("FiniteMeter", initial);
}

FiniteMeter FiniteMeter::qubit(double p0, double p1, double theta, double phi) {
  return FiniteMeter({p0, p1}, state_from_bloch(theta, phi));
}

StateVector indexed_state(const StateVector& alpha, const StrongCoupling& c, double y) {
  if (alpha.dim() != c.observable.dim())
    throw DimensionMismatch("indexed_state", c.observable.dim(), alpha.dim());
  require_normalized("indexed_state", alpha);
  return StateVector(hermitian_exp(c.observable, c.lambda * y) * alpha.amplitudes());
}

BipartiteState evolve_strong_continuous(const StateVector& alpha, const PointerWave& w,
                                        const StrongCoupling& c, EvolutionPath path) {
  const HermitianOperator& op = c.observable;
  if (alpha.dim() != op.dim())
    throw DimensionMismatch("evolve_strong_continuous", op.dim(), alpha.dim());
  require_normalized("evolve_strong_continuous", alpha);
  require_normalized("evolve_strong_continuous", w);
  const Grid& g = w.grid();
  const long n = op.dim();

  if (path == EvolutionPath::translation) {
    const CVector coeffs = op.eigenvectors().adjoint() * alpha.amplitudes();
    CMatrix comps(n, g.size());
    for (long j = 0; j < n; ++j)
      comps.row(j) = coeffs[j] * translate(w, c.lambda * op.eigenvalues()[j]).samples().transpose();
    return BipartiteState(std::move(comps), MeterKind::position_grid, g.dx(), op.eigenvectors());
  }

  // Same overflow guard as the translation path: the widest branch shift.
  for (long j = 0; j < n; ++j) {
    const double shift = c.lambda * op.eigenvalues()[j];
    const auto [lo, hi] = support(w);
    if (lo + shift < g.x_min() || hi + shift > g.x(g.size() - 1))
      throw SupportOverflow("evolve_strong_continuous: branch leaves the grid");
  }
  const MomentumWave p = to_momentum(w);
  CMatrix momentum_comps(n, g.size());
  for (long k = 0; k < g.size(); ++k) {
    const CMatrix generator = Complex(0.0, -c.lambda * g.y(k)) * op.matrix();
    const CMatrix u = generator.exp();
    momentum_comps.col(k) = (u * alpha.amplitudes()) * p.samples()[k];
  }
  CMatrix comps(n, g.size());
  for (long j = 0; j < n; ++j)
    comps.row(j) = to_position(MomentumWave(g, momentum_comps.row(j).transpose())).samples().transpose();
  return BipartiteState(std::move(comps), MeterKind::position_grid, g.dx());
}

RVector meter_position_density(const BipartiteState& state) {
  if (state.meter_kind() != MeterKind::position_grid)
    throw InvalidArgument("meter_position_density: meter is not a position grid");
  return state.components().cwiseAbs2().colwise().sum().transpose();
}

PointerStatistics pointer_statistics(const BipartiteState& state, const Grid& grid) {
  if (state.meter_dim() != grid.size())
    throw DimensionMismatch("pointer_statistics", grid.size(), state.meter_dim());
  const RVector rho = meter_position_density(state);
  const RVector x = grid.positions();
  const double total = rho.sum();
  PointerStatistics out;
  out.mean_q = x.dot(rho) / total;
  out.var_q = (x.array() - out.mean_q).square().matrix().dot(rho) / total;
  return out;
}

double pointer_mean_shift(const StateVector& alpha, const PointerWave& w, const StrongCoupling& c) {
  const BipartiteState state = evolve_strong_continuous(alpha, w, c);
  return pointer_statistics(state, w.grid()).mean_q - moments(w).mean_q;
}

double phase_shift_rate(const StateVector& alpha, const StrongCoupling& c) {
  require_normalized("phase_shift_rate", alpha);
  double d[3];
  for (int i = 0; i < 3; ++i) {
    const double h = kLadder[i];
    const double forward = std::arg(inner_product(alpha, indexed_state(alpha, c, h)));
    const double backward = std::arg(inner_product(alpha, indexed_state(alpha, c, -h)));
    d[i] = (forward - backward) / (2.0 * h);
  }
  return richardson_ratio10(d[0], d[1], d[2]);
}

double fs_speed(const StateVector& alpha, const StrongCoupling& c) {
  return std::abs(c.lambda) * std::sqrt(variance(c.observable, alpha));
}

double fs_speed_finite_difference(const StateVector& alpha, const StrongCoupling& c) {
  require_normalized("fs_speed_finite_difference", alpha);
  // d(h)/h is even in h with coefficients set by lambda times the spectral
  // width, so the ladder is measured in units of 1/(|lambda| width). Larger
  // steps than the fixed 1e-5 keep rounding in the tiny distance out of the
  // result when the speed itself is small.
  const double scale = std::abs(c.lambda) * (c.observable.max_eigenvalue() - c.observable.min_eigenvalue());
  if (scale == 0.0) return 0.0;
  double d[3];
  for (int i = 0; i < 3; ++i) {
    const double h = kSpeedLadder[i] / scale;
    d[i] = fs_distance(alpha, indexed_state(alpha, c, h)) / h;
  }
  return richardson_ratio10(d[0], d[1], d[2]);
}

BipartiteState evolve_strong_finite(const StateVector& alpha, const FiniteMeter& meter,
                                    const StrongCoupling& c) {
  const long m = meter.initial.dim();
  CMatrix comps(alpha.dim(), m);
  for (long s = 0; s < m; ++s)
    comps.col(s) = indexed_state(alpha, c, meter.momenta[s]).amplitudes() * meter.initial[s];
  return BipartiteState(std::move(comps), MeterKind::finite_basis);
}

double readout_probability(const DensityMatrix& meter_rho, const BlochPoint& reference) {
  if (meter_rho.dim() != 2) throw DimensionMismatch("readout_probability", 2, meter_rho.dim());
  const CVector ref = state_from_bloch(reference).amplitudes();
  const double p = ref.dot(meter_rho.matrix() * ref).real();
  return std::clamp(p, 0.0, 1.0);
}

StateVector postselected_meter_state(const StateVector& alpha, const FiniteMeter& meter,
                                     const StrongCoupling& c, const StateVector& beta) {
  require_normalized("postselected_meter_state", beta);
  const long m = meter.initial.dim();
  CVector out(m);
  for (long s = 0; s < m; ++s)
    out[s] = inner_product(beta, indexed_state(alpha, c, meter.momenta[s])) * meter.initial[s];
  if (out.squaredNorm() < 1e-24)
    throw PostselectionFailure("postselected_meter_state: post-selection probability vanishes");
  return StateVector::normalized(out);
}

PostselectPhase postselect_phase(const StateVector& alpha, const FiniteMeter& meter,
                                 const StrongCoupling& c, const StateVector& beta,
                                 long scan_points) {
  if (meter.initial.dim() != 2) throw DimensionMismatch("postselect_phase", 2, meter.initial.dim());
  if (scan_points < 8) throw InvalidArgument("postselect_phase: need at least 8 scan points");
  const StateVector a0 = indexed_state(alpha, c, meter.momenta[0]);
  const StateVector a1 = indexed_state(alpha, c, meter.momenta[1]);

  PostselectPhase out;
  out.phase = pancharatnam_phase(a0, beta, a1);

  const double theta = bloch_from_state(meter.initial).theta;
  if (std::sin(theta) < 1e-6)
    throw InvalidArgument("postselect_phase: meter at a pole has no azimuthal readout signal");
  out.scan_step = 2.0 * kPi / static_cast<double>(scan_points);
  std::vector<double> plain(scan_points);
  std::vector<double> selected(scan_points);
  for (long i = 0; i < scan_points; ++i) {
    const double phi = -kPi + static_cast<double>(i) * out.scan_step;
    const FiniteMeter scanned = FiniteMeter::qubit(meter.momenta[0], meter.momenta[1], theta, phi);
    const DensityMatrix rho = partial_trace(evolve_strong_finite(alpha, scanned, c), Factor::meter);
    plain[i] = readout_probability(rho, kReadoutReference);
    const StateVector post = postselected_meter_state(alpha, scanned, c, beta);
    selected[i] = readout_probability(DensityMatrix::pure(post), kReadoutReference);
  }
  const double phi_plain = -kPi + static_cast<double>(argmax_index(plain)) * out.scan_step;
  const double phi_selected = -kPi + static_cast<double>(argmax_index(selected)) * out.scan_step;
  out.argmax_shift = wrap(phi_selected - phi_plain);
  return out;
}

}  // namespace weakgeo
