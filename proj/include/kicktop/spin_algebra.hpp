#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace kicktop {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Total spin quantum number j, stored as the integer 2j so that
/// half-integer values are exact.
class Spin {
 public:
  /// Throws std::invalid_argument unless two_j >= 1.
  explicit Spin(int two_j);

  /// Accepts j = 1/2, 1, 3/2, ...; anything else (j <= 0, j = 0.7) throws
  /// std::invalid_argument.
  static Spin from_value(double j);

  int two_j() const { return two_j_; }
  double value() const { return 0.5 * two_j_; }
  int dim() const { return two_j_ + 1; }

  friend bool operator==(Spin a, Spin b) { return a.two_j_ == b.two_j_; }

 private:
  int two_j_;
};

/// Angular-momentum operators in the |j,m> basis, ordered m = j, j-1, ..., -j
/// (hbar = 1). Immutable after construction.
class SpinSystem {
 public:
  explicit SpinSystem(Spin j);

  Spin spin() const { return spin_; }
  double j() const { return spin_.value(); }
  int dim() const { return spin_.dim(); }
  const Matrix& jx() const { return jx_; }
  const Matrix& jy() const { return jy_; }
  const Matrix& jz() const { return jz_; }
  /// m quantum number of basis index k.
  double m(int k) const { return j() - k; }

 private:
  Spin spin_;
  Matrix jx_, jy_, jz_;
};

SpinSystem make_spin_system(double j);

/// Unitary matrix; construction verifies U^dagger U = I to 1e-10 (max
/// elementwise deviation).
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(Matrix entries);

  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

class QuantumState {
 public:
  /// Throws std::invalid_argument if | ||v||^2 - 1 | > 1e-12.
  explicit QuantumState(Vector amplitudes);

  const Vector& amplitudes() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }

  /// Basis vector |j, m = j - k>.
  static QuantumState basis(int dim, int k);

 private:
  struct Unchecked {};
  QuantumState(Vector amplitudes, Unchecked) : v_(std::move(amplitudes)) {}
  friend QuantumState apply(const UnitaryMatrix&, const QuantumState&);

  Vector v_;
};

/// U|psi>. The result's norm is that of the input up to roundoff and is not
/// re-checked.
QuantumState apply(const UnitaryMatrix& u, const QuantumState& state);

double max_abs(const Matrix& m);
double hermiticity_deviation(const Matrix& m);

/// exp(scale * H) through the spectral decomposition of H. Re(scale) must be
/// zero so that the result is unitary; H must be Hermitian to 1e-8.
UnitaryMatrix matrix_exponential_hermitian_generator(const Matrix& h, Complex scale);

/// exp(-i kappa/(2j) Jz^2) exp(-i pi/2 Jy).
UnitaryMatrix floquet_operator(const SpinSystem& sys, double kappa);

/// Maps (theta, phi) into theta in [0, pi], phi in [-pi, pi) without moving
/// the point on the sphere.
std::pair<double, double> wrap_angles(double theta, double phi);

/// R(theta, phi)|j,j> with R = exp[i theta (Jx sin(phi) - Jy cos(phi))].
QuantumState coherent_state(const SpinSystem& sys, double theta, double phi);

/// <psi|M|psi>. Throws std::domain_error if the imaginary part is >= 1e-8.
double expectation(const QuantumState& state, const Matrix& m);

}  // namespace kicktop
