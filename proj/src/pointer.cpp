#include "weakgeo/pointer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "weakgeo/errors.hpp"

namespace weakgeo {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

// Eigen::FFT keeps its plan inside the object; one per call keeps the
// transforms reentrant across threads.
CVector fft_forward(const CVector& in) {
  Eigen::FFT<double> fft;
  CVector out(in.size());
  fft.fwd(out, in);
  return out;
}

CVector fft_inverse_unscaled(const CVector& in) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  CVector out(in.size());
  fft.inv(out, in);
  return out;
}

double alternating_sign(long j) { return (j & 1) ? -1.0 : 1.0; }

double mean_over(const RVector& coord, const RVector& density) {
  return coord.dot(density) / density.sum();
}

}  // namespace

Grid::Grid(double x_min, double x_max, long points) : x_min_(x_min), x_max_(x_max), m_(points) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
    throw InvalidArgument("Grid: need finite x_min < x_max");
  if (points < 16 || !std::has_single_bit(static_cast<unsigned long>(points)))
    throw InvalidArgument("Grid: point count must be a power of two >= 16, got " +
                          std::to_string(points));
}

Grid Grid::standard() { return Grid(-20.0, 20.0, 4096); }

double Grid::dy() const { return 2.0 * kPi / (static_cast<double>(m_) * dx()); }

RVector Grid::positions() const {
  RVector out(m_);
  for (long j = 0; j < m_; ++j) out[j] = x(j);
  return out;
}

RVector Grid::momenta() const {
  RVector out(m_);
  for (long k = 0; k < m_; ++k) out[k] = y(k);
  return out;
}

PointerWave::PointerWave(Grid grid, CVector samples) : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size())
    throw DimensionMismatch("PointerWave", grid_.size(), samples_.size());
  if (!samples_.allFinite()) throw InvalidArgument("PointerWave: non-finite sample");
}

PointerWave PointerWave::normalize() const {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw InvalidArgument("PointerWave: cannot normalize a zero wave");
  return PointerWave(grid_, samples_ / std::sqrt(n2));
}

double PointerWave::edge_ratio() const {
  const double peak = samples_.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(samples_[0]), std::abs(samples_[samples_.size() - 1])) / peak;
}

MomentumWave::MomentumWave(Grid grid, CVector samples) : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size())
    throw DimensionMismatch("MomentumWave", grid_.size(), samples_.size());
}

PointerWave gaussian_wave(const GaussianSpec& spec, const Grid& grid) {
  if (!(spec.width > 0.0)) throw InvalidArgument("gaussian_wave: width must be positive");
  const double margin = 8.0 * spec.width;
  if (grid.x_min() > spec.center - margin || grid.x(grid.size() - 1) < spec.center + margin)
    throw SupportOverflow("gaussian_wave: grid must span center +- 8 width");
  const double momentum_width = std::sqrt(1.0 + spec.chirp * spec.chirp) / (2.0 * spec.width);
  const double p_reach = std::abs(spec.mean_momentum) + 8.0 * momentum_width;
  if (p_reach > grid.y(grid.size() - 1))
    throw SupportOverflow("gaussian_wave: momentum content exceeds the grid's Nyquist range");

  const Complex a(1.0, spec.chirp);
  const double denom = 4.0 * spec.width * spec.width;
  CVector samples(grid.size());
  for (long j = 0; j < grid.size(); ++j) {
    const double u = grid.x(j) - spec.center;
    samples[j] = std::exp(-a * (u * u) / denom + Complex(0.0, spec.mean_momentum * grid.x(j)));
  }
  return PointerWave(grid, std::move(samples)).normalize();
}

MomentumWave to_momentum(const PointerWave& w) {
  const Grid& g = w.grid();
  const long m = g.size();
  CVector staggered(m);
  for (long j = 0; j < m; ++j) staggered[j] = alternating_sign(j) * w.samples()[j];
  CVector out = fft_forward(staggered);
  for (long k = 0; k < m; ++k)
    out[k] *= g.dx() * kInvSqrt2Pi * std::polar(1.0, -g.y(k) * g.x_min());
  return MomentumWave(g, std::move(out));
}

PointerWave to_position(const MomentumWave& w) {
  const Grid& g = w.grid();
  const long m = g.size();
  CVector shifted(m);
  for (long k = 0; k < m; ++k) shifted[k] = w.samples()[k] * std::polar(1.0, g.y(k) * g.x_min());
  CVector out = fft_inverse_unscaled(shifted);
  for (long j = 0; j < m; ++j) out[j] *= alternating_sign(j) * g.dy() * kInvSqrt2Pi;
  return PointerWave(g, std::move(out));
}

std::pair<double, double> support(const PointerWave& w) {
  const RVector mag = w.samples().cwiseAbs();
  const double cut = kSupportThreshold * mag.maxCoeff();
  long lo = 0;
  long hi = mag.size() - 1;
  while (lo < hi && mag[lo] < cut) ++lo;
  while (hi > lo && mag[hi] < cut) --hi;
  return {w.grid().x(lo), w.grid().x(hi)};
}

PointerWave translate(const PointerWave& w, double shift) {
  if (shift == 0.0) return w;
  const Grid& g = w.grid();
  const auto [lo, hi] = support(w);
  if (lo + shift < g.x_min() || hi + shift > g.x(g.size() - 1))
    throw SupportOverflow("translate: shift " + std::to_string(shift) +
                          " pushes the wave off the grid [" + std::to_string(g.x_min()) + ", " +
                          std::to_string(g.x_max()) + ")");
  MomentumWave p = to_momentum(w);
  CVector s = p.samples();
  for (long k = 0; k < g.size(); ++k) s[k] *= std::polar(1.0, -g.y(k) * shift);
  return to_position(MomentumWave(g, std::move(s)));
}

PointerWave modulate(const PointerWave& w, double p0) {
  CVector s = w.samples();
  for (long j = 0; j < s.size(); ++j) s[j] *= std::polar(1.0, p0 * w.grid().x(j));
  return PointerWave(w.grid(), std::move(s));
}

Moments moments(const PointerWave& w) {
  const Grid& g = w.grid();
  const RVector x = g.positions();
  const RVector y = g.momenta();
  const RVector rho_q = w.samples().cwiseAbs2();
  const RVector rho_p = to_momentum(w).samples().cwiseAbs2();
  Moments out;
  out.mean_q = mean_over(x, rho_q);
  out.mean_p = mean_over(y, rho_p);
  out.var_q = mean_over((x.array() - out.mean_q).square().matrix(), rho_q);
  out.var_p = mean_over((y.array() - out.mean_p).square().matrix(), rho_p);
  return out;
}

CVector apply_momentum(const PointerWave& w) {
  MomentumWave p = to_momentum(w);
  CVector s = p.samples();
  for (long k = 0; k < s.size(); ++k) s[k] *= w.grid().y(k);
  return to_position(MomentumWave(w.grid(), std::move(s))).samples();
}

double covariance_term(const PointerWave& w) {
  const Grid& g = w.grid();
  const double n2 = w.norm_squared();
  const CVector q_psi = g.positions().cast<Complex>().cwiseProduct(w.samples());
  const CVector p_psi = apply_momentum(w);
  // <psi|{Q,P}|psi> = 2 Re <Q psi|P psi>
  const double anticommutator = 2.0 * q_psi.dot(p_psi).real() * g.dx() / n2;
  const double mean_q = q_psi.dot(w.samples()).real() * g.dx() / n2;
  const double mean_p = w.samples().dot(p_psi).real() * g.dx() / n2;
  return anticommutator - 2.0 * mean_p * mean_q;
}

}  // namespace weakgeo
