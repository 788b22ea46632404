#include "weakgeo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "weakgeo/errors.hpp"

namespace weakgeo {

namespace {

void require_same_dim(const char* where, long expected, long got) {
  if (expected != got) throw DimensionMismatch(where, expected, got);
}

void require_normalized(const char* where, const StateVector& psi) {
  if (!psi.is_normalized(tol::derived))
    throw InvalidArgument(std::string(where) + ": state is not normalized (norm " +
                          std::to_string(psi.norm()) + ")");
}

// Eigenvalues closer than this are treated as one degenerate block.
constexpr double kDegeneracyGap = 1e-10;

// Modified Gram-Schmidt inside every block of (numerically) equal eigenvalues.
void orthonormalize_degenerate_blocks(const RVector& values, CMatrix& vectors) {
  const long n = values.size();
  long start = 0;
  while (start < n) {
    long stop = start + 1;
    while (stop < n && values[stop] - values[stop - 1] < kDegeneracyGap) ++stop;
    for (long j = start; j < stop; ++j) {
      for (long k = start; k < j; ++k)
        vectors.col(j) -= vectors.col(k).dot(vectors.col(j)) * vectors.col(k);
      vectors.col(j).normalize();
    }
    start = stop;
  }
}

}  // namespace

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 1) throw InvalidArgument("StateVector: dimension must be >= 1");
  if (!amps_.allFinite()) throw InvalidArgument("StateVector: non-finite amplitude");
}

StateVector::StateVector(std::initializer_list<Complex> amplitudes)
    : StateVector(CVector(Eigen::Map<const CVector>(amplitudes.begin(),
                                                    static_cast<long>(amplitudes.size())))) {}

StateVector StateVector::normalized(CVector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw InvalidArgument("StateVector: cannot normalize the zero vector");
  return StateVector(amplitudes / n);
}

StateVector StateVector::normalize() const { return normalized(amps_); }

bool StateVector::is_normalized(double tolerance) const {
  return std::abs(amps_.squaredNorm() - 1.0) <= tolerance;
}

StateVector StateVector::with_phase(double phase) const {
  return StateVector(amps_ * std::polar(1.0, phase));
}

StateVector basis_state(long dim, long index) {
  if (index < 0 || index >= dim) throw InvalidArgument("basis_state: index out of range");
  CVector v = CVector::Zero(dim);
  v[index] = 1.0;
  return StateVector(std::move(v));
}

HermitianOperator::HermitianOperator(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.rows() != matrix_.cols())
    throw InvalidArgument("HermitianOperator: matrix must be square and non-empty");
  if (!matrix_.allFinite()) throw InvalidArgument("HermitianOperator: non-finite entry");
  const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol::construction)
    throw InvalidArgument("HermitianOperator: matrix is not Hermitian (max |O - O^dagger| = " +
                          std::to_string(asym) + ")");
  // Symmetrize the last few ulps so the solver sees an exactly Hermitian input.
  const CMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
  if (solver.info() != Eigen::Success)
    throw InvalidArgument("HermitianOperator: eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  orthonormalize_degenerate_blocks(eigenvalues_, eigenvectors_);
}

HermitianOperator HermitianOperator::identity(long dim) {
  return HermitianOperator(CMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::pauli_x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return HermitianOperator(m);
}

HermitianOperator HermitianOperator::pauli_y() {
  CMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return HermitianOperator(m);
}

HermitianOperator HermitianOperator::pauli_z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return HermitianOperator(m);
}

HermitianOperator HermitianOperator::from_spectrum(const RVector& eigenvalues,
                                                   const CMatrix& eigenvectors) {
  require_same_dim("HermitianOperator::from_spectrum", eigenvectors.cols(), eigenvalues.size());
  CMatrix m = eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
  // Rounding in the product leaves ~1e-16 anti-Hermitian residue.
  return HermitianOperator(0.5 * (m + m.adjoint()));
}

DensityMatrix::DensityMatrix(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.rows() != matrix_.cols())
    throw InvalidArgument("DensityMatrix: matrix must be square and non-empty");
  const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol::construction) throw InvalidArgument("DensityMatrix: not Hermitian");
  if (std::abs(matrix_.trace() - Complex(1.0)) > tol::derived)
    throw InvalidArgument("DensityMatrix: trace " + std::to_string(matrix_.trace().real()) +
                          " != 1");
  if (eigenvalues().minCoeff() < -tol::derived)
    throw InvalidArgument("DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  require_normalized("DensityMatrix::pure", psi);
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

RVector DensityMatrix::eigenvalues() const {
  const CMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
  return Eigen::SelfAdjointEigenSolver<CMatrix>(herm, Eigen::EigenvaluesOnly).eigenvalues();
}

BipartiteState::BipartiteState(CMatrix components, MeterKind kind, double meter_weight)
    : BipartiteState(components, kind, meter_weight,
                     CMatrix::Identity(components.rows(), components.rows())) {}

BipartiteState::BipartiteState(CMatrix components, MeterKind kind, double meter_weight,
                               CMatrix system_basis)
    : components_(std::move(components)),
      kind_(kind),
      weight_(meter_weight),
      basis_(std::move(system_basis)) {
  if (components_.rows() < 1 || components_.cols() < 1)
    throw InvalidArgument("BipartiteState: empty component array");
  if (!(weight_ > 0.0)) throw InvalidArgument("BipartiteState: meter weight must be positive");
  if (kind_ == MeterKind::finite_basis && weight_ != 1.0)
    throw InvalidArgument("BipartiteState: finite meters carry unit weight");
  require_same_dim("BipartiteState system basis", components_.rows(), basis_.rows());
  if (unitarity_defect(basis_) > tol::derived)
    throw InvalidArgument("BipartiteState: system basis is not unitary");
  if (std::abs(norm_squared() - 1.0) > tol::derived)
    throw InvalidArgument("BipartiteState: total norm^2 = " + std::to_string(norm_squared()));
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  require_same_dim("inner_product", a.dim(), b.dim());
  // Eigen's dot() conjugates its left operand.
  return a.amplitudes().dot(b.amplitudes());
}

double expectation(const HermitianOperator& op, const StateVector& psi) {
  require_same_dim("expectation", op.dim(), psi.dim());
  require_normalized("expectation", psi);
  const Complex value = psi.amplitudes().dot(op.matrix() * psi.amplitudes());
  if (std::abs(value.imag()) > tol::construction * std::max(1.0, op.matrix().norm()))
    throw InvalidArgument("expectation: imaginary residue " + std::to_string(value.imag()));
  return value.real();
}

double variance(const HermitianOperator& op, const StateVector& psi) {
  require_same_dim("variance", op.dim(), psi.dim());
  require_normalized("variance", psi);
  // <O^2> - <O>^2 = || (O - <O>) psi ||^2, computed without cancellation.
  const double mean = expectation(op, psi);
  const CVector centered = op.matrix() * psi.amplitudes() - mean * psi.amplitudes();
  return std::max(0.0, centered.squaredNorm());
}

CMatrix hermitian_exp(const HermitianOperator& op, double s) {
  const CVector phases = (-Complex(0.0, s) * op.eigenvalues().cast<Complex>()).array().exp();
  return op.eigenvectors() * phases.asDiagonal() * op.eigenvectors().adjoint();
}

DensityMatrix partial_trace(const BipartiteState& state, Factor keep) {
  const double w = state.meter_weight();
  if (keep == Factor::system) {
    const CMatrix c = state.computational_components();
    CMatrix rho = w * (c * c.adjoint());
    return DensityMatrix(0.5 * (rho + rho.adjoint()));
  }
  // rho_{kl} = w * sum_j c_{jk} conj(c_{jl}); the system basis drops out.
  const CMatrix& c = state.components();
  CMatrix rho = w * (c.transpose() * c.conjugate());
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

double ensemble_expectation(const DensityMatrix& rho, const HermitianOperator& op) {
  require_same_dim("ensemble_expectation", op.dim(), rho.dim());
  const Complex value = (rho.matrix() * op.matrix()).trace();
  if (std::abs(value.imag()) > tol::derived * std::max(1.0, op.matrix().norm()))
    throw InvalidArgument("ensemble_expectation: imaginary residue " +
                          std::to_string(value.imag()));
  return value.real();
}

double unitarity_defect(const CMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  const RVector sv = Eigen::JacobiSVD<CMatrix>(u).singularValues();
  return (sv.array() - 1.0).abs().maxCoeff();
}

}  // namespace weakgeo
