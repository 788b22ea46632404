#pragma once

// Geometry of the space of rays CP(n): the psi^0 != 0 projective chart,
// Fubini-Study metric in coordinate and projector form, the U(1) connection,
// Pancharatnam triangle phases and Bloch-sphere solid angles.

#include <array>
#include <vector>

#include "weakgeo/linalg.hpp"

namespace weakgeo {

/// |psi^0| at or below this is outside the chart.
inline constexpr double kChartGuard = 1e-12;
/// Pairwise overlaps at or below this make a triangle phase undefined.
inline constexpr double kOverlapGuard = 1e-12;

/// psi^0 = r e^{i varphi} / (1 + |xi|^2)^{1/2}, psi^i = xi^i psi^0.
struct LiftedCoordinates {
  double r = 1.0;
  double varphi = 0.0;
  CVector xi;

  [[nodiscard]] long n() const { return xi.size(); }
  [[nodiscard]] StateVector reconstruct() const;
};

struct BlochPoint {
  double theta = 0.0;
  double phi = 0.0;

  /// Unit vector (sin th cos ph, sin th sin ph, cos th).
  [[nodiscard]] Eigen::Vector3d unit_vector() const;
  [[nodiscard]] BlochPoint antipode() const;
};

/// cos(theta/2)|u0> + e^{i phi} sin(theta/2)|u1>.
StateVector state_from_bloch(double theta, double phi);
inline StateVector state_from_bloch(const BlochPoint& p) { return state_from_bloch(p.theta, p.phi); }

struct TangentDisplacement {
  CVector dxi;
};

LiftedCoordinates projective_coords(const StateVector& psi);

BlochPoint bloch_from_state(const StateVector& psi);

/// Geodesic distance arccos|<a|b>| in [0, pi/2].
double fs_distance(const StateVector& a, const StateVector& b);

/// [(1+|xi|^2) |dxi|^2 - |conj(xi).dxi|^2] / (1+|xi|^2)^2.
double fs_metric_form(const LiftedCoordinates& point, const TangentDisplacement& d);

/// A = (i/2)(xi dxi-bar - xi-bar dxi) / (1+|xi|^2), evaluated on d.
double connection_eval(const LiftedCoordinates& point, const TangentDisplacement& d);

/// Differential of the chart section xi -> (1, xi)/sqrt(1+|xi|^2) applied
/// to d: the unit-vector displacement that corresponds to dxi.
CVector lift_displacement(const LiftedCoordinates& point, const TangentDisplacement& d);

/// arg(<a|c><c|b><b|a>) in (-pi, pi]. For qubits this is -Omega(a,b,c)/2.
double pancharatnam_phase(const StateVector& a, const StateVector& b, const StateVector& c);

/// Like pancharatnam_phase, also reporting whether the triple product sits
/// within `margin` of the branch cut at +-pi.
struct TrianglePhase {
  double phase = 0.0;
  bool near_branch_cut = false;
};
TrianglePhase pancharatnam_phase_checked(const StateVector& a, const StateVector& b,
                                         const StateVector& c, double margin = 1e-6);

/// Oriented solid angle of the geodesic triangle p1 -> p2 -> p3.
double solid_angle(const BlochPoint& p1, const BlochPoint& p2, const BlochPoint& p3);

struct MetricDecomposition {
  double phase_part = 0.0;  // |<psi|dpsi>|^2 = (dvarphi - A)^2
  double fs_part = 0.0;     // <dpsi|dpsi> - |<psi|dpsi>|^2
  double total = 0.0;       // <dpsi|dpsi>
};

/// Splits the sphere line element along dpsi into fibre and base parts.
/// dpsi is first projected onto the tangent space of the unit sphere.
MetricDecomposition sphere_metric_decomposition_check(const StateVector& psi, const CVector& dpsi);

}  // namespace weakgeo
