#include "weakgeo/rayspace.hpp"

#include <cmath>
#include <numbers>

#include "weakgeo/errors.hpp"

namespace weakgeo {

namespace {

constexpr double kPi = std::numbers::pi;

// Wraps into (-pi, pi].
double principal_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

void require_normalized(const char* where, const StateVector& psi) {
  if (!psi.is_normalized(tol::derived))
    throw InvalidArgument(std::string(where) + ": state is not normalized");
}

void require_chart_dim(const char* where, const LiftedCoordinates& p, const TangentDisplacement& d) {
  if (p.xi.size() != d.dxi.size()) throw DimensionMismatch(where, p.xi.size(), d.dxi.size());
}

// Interior angle at vertex a of the geodesic triangle (a, b, c).
double vertex_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d tb = b - a.dot(b) * a;
  const Eigen::Vector3d tc = c - a.dot(c) * a;
  return std::atan2(tb.cross(tc).norm(), tb.dot(tc));
}

}  // namespace

StateVector LiftedCoordinates::reconstruct() const {
  const double s = std::sqrt(1.0 + xi.squaredNorm());
  CVector out(xi.size() + 1);
  out[0] = std::polar(r, varphi) / s;
  out.tail(xi.size()) = xi * out[0];
  return StateVector(std::move(out));
}

Eigen::Vector3d BlochPoint::unit_vector() const {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

BlochPoint BlochPoint::antipode() const {
  return {kPi - theta, principal_angle(phi + kPi)};
}

StateVector state_from_bloch(double theta, double phi) {
  return StateVector{Complex(std::cos(theta / 2.0)), std::polar(std::sin(theta / 2.0), phi)};
}

LiftedCoordinates projective_coords(const StateVector& psi) {
  const Complex head = psi[0];
  if (std::abs(head) <= kChartGuard)
    throw ChartSingularity("projective_coords: |psi^0| <= 1e-12, rotate the basis");
  LiftedCoordinates out;
  out.r = psi.norm();
  out.varphi = std::arg(head);
  out.xi = psi.amplitudes().tail(psi.dim() - 1) / head;
  return out;
}

BlochPoint bloch_from_state(const StateVector& psi) {
  if (psi.dim() != 2) throw DimensionMismatch("bloch_from_state", 2, psi.dim());
  require_normalized("bloch_from_state", psi);
  const double a0 = std::abs(psi[0]);
  const double a1 = std::abs(psi[1]);
  BlochPoint p;
  p.theta = 2.0 * std::atan2(a1, a0);
  // Azimuth is undefined at the poles; report 0 there.
  if (a0 > kChartGuard && a1 > kChartGuard)
    p.phi = principal_angle(std::arg(psi[1]) - std::arg(psi[0]));
  return p;
}

double fs_distance(const StateVector& a, const StateVector& b) {
  require_normalized("fs_distance", a);
  require_normalized("fs_distance", b);
  const Complex overlap = inner_product(a, b);
  // sin d = |b - a<a|b>|; atan2 keeps full precision for nearby rays.
  const double perp = (b.amplitudes() - overlap * a.amplitudes()).norm();
  return std::atan2(perp, std::abs(overlap));
}

double fs_metric_form(const LiftedCoordinates& point, const TangentDisplacement& d) {
  require_chart_dim("fs_metric_form", point, d);
  const double s = 1.0 + point.xi.squaredNorm();
  // sum_k conj(xi_k) dxi^k
  const Complex projection = point.xi.dot(d.dxi);
  return (s * d.dxi.squaredNorm() - std::norm(projection)) / (s * s);
}

double connection_eval(const LiftedCoordinates& point, const TangentDisplacement& d) {
  require_chart_dim("connection_eval", point, d);
  const double s = 1.0 + point.xi.squaredNorm();
  // xi^i conj(dxi_i) - conj(xi_i) dxi^i = -2i Im(conj(xi).dxi)
  const Complex bracket = d.dxi.dot(point.xi) - point.xi.dot(d.dxi);
  const Complex a = Complex(0.0, 0.5) * bracket / s;
  return a.real();
}

CVector lift_displacement(const LiftedCoordinates& point, const TangentDisplacement& d) {
  require_chart_dim("lift_displacement", point, d);
  const double s = 1.0 + point.xi.squaredNorm();
  const double norm = std::sqrt(s);
  const double dnorm = point.xi.dot(d.dxi).real() / norm;
  CVector head(point.xi.size() + 1);
  head[0] = 1.0;
  head.tail(point.xi.size()) = point.xi;
  CVector tail = CVector::Zero(point.xi.size() + 1);
  tail.tail(point.xi.size()) = d.dxi;
  return tail / norm - head * (dnorm / s);
}

TrianglePhase pancharatnam_phase_checked(const StateVector& a, const StateVector& b,
                                         const StateVector& c, double margin) {
  const Complex ac = inner_product(a, c);
  const Complex cb = inner_product(c, b);
  const Complex ba = inner_product(b, a);
  const double scale = a.norm() * b.norm() * c.norm();
  const double guard = kOverlapGuard * std::max(scale, 1e-300);
  if (std::abs(ac) <= guard || std::abs(cb) <= guard || std::abs(ba) <= guard)
    throw UndefinedPhase("pancharatnam_phase: vanishing pairwise overlap");
  const Complex product = ac * cb * ba;
  TrianglePhase out;
  out.phase = std::arg(product);
  if (out.phase == -kPi) out.phase = kPi;
  out.near_branch_cut = kPi - std::abs(out.phase) < margin;
  return out;
}

double pancharatnam_phase(const StateVector& a, const StateVector& b, const StateVector& c) {
  return pancharatnam_phase_checked(a, b, c).phase;
}

double solid_angle(const BlochPoint& p1, const BlochPoint& p2, const BlochPoint& p3) {
  const Eigen::Vector3d a = p1.unit_vector();
  const Eigen::Vector3d b = p2.unit_vector();
  const Eigen::Vector3d c = p3.unit_vector();
  constexpr double kCoincide = 1e-10;
  if ((a - b).norm() < kCoincide || (b - c).norm() < kCoincide || (a - c).norm() < kCoincide)
    return 0.0;
  if ((a + b).norm() < kCoincide || (b + c).norm() < kCoincide || (a + c).norm() < kCoincide)
    throw UndefinedPhase("solid_angle: antipodal vertices, geodesic not unique");
  const double excess =
      vertex_angle(a, b, c) + vertex_angle(b, c, a) + vertex_angle(c, a, b) - kPi;
  const double orientation = a.dot(b.cross(c));
  if (std::abs(orientation) < 1e-10) {
    // All three on one great circle: zero area, or a hemisphere when the
    // points do not fit in a half circle. The hemisphere's sign is moot since
    // -Omega/2 = +-pi coincide.
    return excess < kPi / 2.0 ? 0.0 : 2.0 * kPi;
  }
  return orientation > 0.0 ? excess : -excess;
}

MetricDecomposition sphere_metric_decomposition_check(const StateVector& psi, const CVector& dpsi) {
  require_normalized("sphere_metric_decomposition_check", psi);
  if (dpsi.size() != psi.dim())
    throw DimensionMismatch("sphere_metric_decomposition_check", psi.dim(), dpsi.size());
  const CVector& v = psi.amplitudes();
  // Remove the radial component Re<psi|dpsi> psi.
  const CVector tangent = dpsi - v.dot(dpsi).real() * v;
  MetricDecomposition out;
  out.total = tangent.squaredNorm();
  out.phase_part = std::norm(v.dot(tangent));
  out.fs_part = out.total - out.phase_part;
  return out;
}

}  // namespace weakgeo
