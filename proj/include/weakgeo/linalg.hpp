#pragma once

// Finite-dimensional complex linear algebra: states, observables, density
// matrices, composite system (x) meter states, partial traces and spectral
// matrix functions. hbar = 1 throughout; every quantity is dimensionless.

#include <complex>

#include <Eigen/Dense>

namespace weakgeo {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

namespace tol {
/// Validation applied when a value is constructed.
inline constexpr double construction = 1e-12;
/// Assertions on quantities derived from valid inputs.
inline constexpr double derived = 1e-10;
}  // namespace tol

/// Column of complex amplitudes psi^sigma in a fixed orthonormal basis.
/// Not necessarily normalized; operations that need a unit vector check it.
class StateVector {
public:
  explicit StateVector(CVector amplitudes);
  StateVector(std::initializer_list<Complex> amplitudes);

  /// Rescales to unit norm. Throws on the zero vector.
  static StateVector normalized(CVector amplitudes);
  [[nodiscard]] StateVector normalize() const;

  [[nodiscard]] long dim() const { return amps_.size(); }
  [[nodiscard]] const CVector& amplitudes() const { return amps_; }
  [[nodiscard]] Complex operator[](long i) const { return amps_[i]; }
  [[nodiscard]] double norm() const { return amps_.norm(); }
  [[nodiscard]] bool is_normalized(double tolerance = tol::construction) const;
  /// Same ray, amplitudes multiplied by e^{i phase}.
  [[nodiscard]] StateVector with_phase(double phase) const;

private:
  CVector amps_;
};

StateVector basis_state(long dim, long index);

/// Observable O = |o_j> o_j <o^j| with its spectral decomposition computed
/// once at construction. Eigenvalues ascend; eigenvectors are the columns
/// of eigenvectors(), orthonormal also inside degenerate blocks.
class HermitianOperator {
public:
  explicit HermitianOperator(CMatrix matrix);

  static HermitianOperator identity(long dim);
  static HermitianOperator pauli_x();
  static HermitianOperator pauli_y();
  static HermitianOperator pauli_z();
  /// sum_j o_j |v_j><v_j| for an orthonormal set given as matrix columns.
  static HermitianOperator from_spectrum(const RVector& eigenvalues, const CMatrix& eigenvectors);

  [[nodiscard]] long dim() const { return matrix_.rows(); }
  [[nodiscard]] const CMatrix& matrix() const { return matrix_; }
  [[nodiscard]] const RVector& eigenvalues() const { return eigenvalues_; }
  [[nodiscard]] const CMatrix& eigenvectors() const { return eigenvectors_; }
  [[nodiscard]] StateVector eigenvector(long j) const { return StateVector(eigenvectors_.col(j)); }
  [[nodiscard]] double min_eigenvalue() const { return eigenvalues_.minCoeff(); }
  [[nodiscard]] double max_eigenvalue() const { return eigenvalues_.maxCoeff(); }

private:
  CMatrix matrix_;
  RVector eigenvalues_;
  CMatrix eigenvectors_;
};

/// Hermitian, unit-trace, positive semidefinite.
class DensityMatrix {
public:
  explicit DensityMatrix(CMatrix matrix);

  static DensityMatrix pure(const StateVector& psi);

  [[nodiscard]] long dim() const { return matrix_.rows(); }
  [[nodiscard]] const CMatrix& matrix() const { return matrix_; }
  [[nodiscard]] RVector eigenvalues() const;
  [[nodiscard]] double trace() const { return matrix_.trace().real(); }

private:
  CMatrix matrix_;
};

enum class MeterKind { finite_basis, position_grid };

/// Joint system (x) meter amplitudes c[j][k]. Row j runs over the columns of
/// system_basis() (expressed in the computational basis of the system), column
/// k over meter basis states or grid points. For a position grid every meter
/// sum carries the quadrature weight dx.
class BipartiteState {
public:
  BipartiteState(CMatrix components, MeterKind kind, double meter_weight = 1.0);
  BipartiteState(CMatrix components, MeterKind kind, double meter_weight, CMatrix system_basis);

  [[nodiscard]] long system_dim() const { return components_.rows(); }
  [[nodiscard]] long meter_dim() const { return components_.cols(); }
  [[nodiscard]] MeterKind meter_kind() const { return kind_; }
  [[nodiscard]] double meter_weight() const { return weight_; }
  [[nodiscard]] const CMatrix& components() const { return components_; }
  [[nodiscard]] const CMatrix& system_basis() const { return basis_; }
  /// Components re-expressed in the computational system basis.
  [[nodiscard]] CMatrix computational_components() const { return basis_ * components_; }
  [[nodiscard]] double norm_squared() const { return components_.squaredNorm() * weight_; }

private:
  CMatrix components_;
  MeterKind kind_;
  double weight_;
  CMatrix basis_;
};

enum class Factor { system, meter };

/// <a|b>, conjugating the left slot.
Complex inner_product(const StateVector& a, const StateVector& b);

double expectation(const HermitianOperator& op, const StateVector& psi);

/// <O^2> - <O>^2, clamped at zero.
double variance(const HermitianOperator& op, const StateVector& psi);

/// e^{-i s O} built from the eigendecomposition.
CMatrix hermitian_exp(const HermitianOperator& op, double s);

/// Reduced density matrix of the kept factor. Keeping the system yields a
/// matrix in the computational system basis.
DensityMatrix partial_trace(const BipartiteState& state, Factor keep);

/// tr(rho O).
double ensemble_expectation(const DensityMatrix& rho, const HermitianOperator& op);

/// Largest singular-value deviation from 1; zero for an exact unitary.
double unitarity_defect(const CMatrix& u);

}  // namespace weakgeo
