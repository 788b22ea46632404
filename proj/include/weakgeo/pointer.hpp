#pragma once

// The continuous 1-D measuring particle on a uniform position grid.
//
// Fourier convention: <q(x)|p(y)> = e^{ixy}/sqrt(2 pi), hence
//   phi_p(y) = (2 pi)^{-1/2} sum_j e^{-i y x_j} phi(x_j) dx
// and P = -i d/dx in the position representation. Momentum samples live on
// y_k = (k - m/2) dy with dy = 2 pi / (m dx).

#include <cstddef>

#include "weakgeo/linalg.hpp"

namespace weakgeo {

class Grid {
public:
  Grid(double x_min, double x_max, long points);

  /// [-20, 20] with 4096 points.
  static Grid standard();

  [[nodiscard]] double x_min() const { return x_min_; }
  [[nodiscard]] double x_max() const { return x_max_; }
  [[nodiscard]] long size() const { return m_; }
  [[nodiscard]] double dx() const { return (x_max_ - x_min_) / static_cast<double>(m_); }
  [[nodiscard]] double dy() const;
  [[nodiscard]] double x(long j) const { return x_min_ + static_cast<double>(j) * dx(); }
  [[nodiscard]] double y(long k) const { return static_cast<double>(k - m_ / 2) * dy(); }
  [[nodiscard]] RVector positions() const;
  [[nodiscard]] RVector momenta() const;

  bool operator==(const Grid&) const = default;

private:
  double x_min_;
  double x_max_;
  long m_;
};

/// Position-space samples phi(x_j).
class PointerWave {
public:
  PointerWave(Grid grid, CVector samples);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] const CVector& samples() const { return samples_; }
  [[nodiscard]] double norm_squared() const { return samples_.squaredNorm() * grid_.dx(); }
  [[nodiscard]] PointerWave normalize() const;
  /// max(|phi(x_0)|, |phi(x_{m-1})|) / max |phi|.
  [[nodiscard]] double edge_ratio() const;

private:
  Grid grid_;
  CVector samples_;
};

/// Momentum-space samples phi_p(y_k) on the grid's reciprocal lattice.
class MomentumWave {
public:
  MomentumWave(Grid grid, CVector samples);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] const CVector& samples() const { return samples_; }
  [[nodiscard]] double norm_squared() const { return samples_.squaredNorm() * grid_.dy(); }

private:
  Grid grid_;
  CVector samples_;
};

/// exp(-(1 + i c)(x - q0)^2 / (4 sigma^2) + i p0 x), normalized.
struct GaussianSpec {
  double center = 0.0;
  double mean_momentum = 0.0;
  double width = 1.0;
  double chirp = 0.0;
};

struct Moments {
  double mean_q = 0.0;
  double mean_p = 0.0;
  double var_q = 0.0;
  double var_p = 0.0;
};

PointerWave gaussian_wave(const GaussianSpec& spec, const Grid& grid);

MomentumWave to_momentum(const PointerWave& w);
PointerWave to_position(const MomentumWave& w);

/// output(x) = input(x - shift), applied as e^{-i y shift} in momentum space.
/// Throws SupportOverflow if the shifted support would leave the grid.
PointerWave translate(const PointerWave& w, double shift);

/// Multiplies by e^{i p0 x}.
PointerWave modulate(const PointerWave& w, double p0);

Moments moments(const PointerWave& w);

/// <{Q,P}> - 2 <P><Q>.
double covariance_term(const PointerWave& w);

/// P phi = -i phi', evaluated spectrally.
CVector apply_momentum(const PointerWave& w);

/// Relative amplitude below which samples count as outside the support.
inline constexpr double kSupportThreshold = 1e-8;

/// [lowest, highest] grid position with |phi| >= kSupportThreshold * max|phi|.
std::pair<double, double> support(const PointerWave& w);

}  // namespace weakgeo
