#include "kicktop/spin_algebra.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kicktop {

namespace {

constexpr double kUnitarityTol = 1e-10;
constexpr double kNormTol = 1e-12;
constexpr double kHermitianTol = 1e-8;
constexpr double kImagResidueTol = 1e-8;

}  // namespace

Spin::Spin(int two_j) : two_j_(two_j) {
  if (two_j < 1) {
    throw std::invalid_argument("spin: 2j must be a positive integer, got " +
                                std::to_string(two_j));
  }
}

Spin Spin::from_value(double j) {
  const double twice = 2.0 * j;
  const double rounded = std::round(twice);
  if (!(j > 0.0) || std::abs(twice - rounded) > 1e-12) {
    throw std::invalid_argument("spin: j must be a positive half-integer, got " +
                                std::to_string(j));
  }
  return Spin(static_cast<int>(rounded));
}

SpinSystem::SpinSystem(Spin j) : spin_(j) {
  const int d = spin_.dim();
  const double jv = spin_.value();
  jz_ = Matrix::Zero(d, d);
  Matrix jplus = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double mk = jv - k;
    jz_(k, k) = mk;
    // <j, m+1 | J+ | j, m>, with |j, m+1> at index k-1.
    if (k > 0) jplus(k - 1, k) = std::sqrt(jv * (jv + 1.0) - mk * (mk + 1.0));
  }
  const Matrix jminus = jplus.adjoint();
  jx_ = 0.5 * (jplus + jminus);
  jy_ = Complex(0.0, -0.5) * (jplus - jminus);
}

SpinSystem make_spin_system(double j) { return SpinSystem(Spin::from_value(j)); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_deviation(const Matrix& m) { return max_abs(m - m.adjoint()); }

UnitaryMatrix::UnitaryMatrix(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("unitary: matrix not square");
  const Matrix id = Matrix::Identity(m_.rows(), m_.cols());
  const double dev = max_abs(m_.adjoint() * m_ - id);
  if (dev > kUnitarityTol) {
    throw std::invalid_argument("unitary: U^dagger U deviates from identity by " +
                                std::to_string(dev));
  }
}

QuantumState::QuantumState(Vector amplitudes) : v_(std::move(amplitudes)) {
  const double dev = std::abs(v_.squaredNorm() - 1.0);
  if (dev > kNormTol) {
    throw std::invalid_argument("state: squared norm deviates from 1 by " +
                                std::to_string(dev));
  }
}

QuantumState QuantumState::basis(int dim, int k) {
  if (k < 0 || k >= dim) throw std::out_of_range("state: basis index out of range");
  Vector v = Vector::Zero(dim);
  v(k) = 1.0;
  return QuantumState(std::move(v));
}

QuantumState apply(const UnitaryMatrix& u, const QuantumState& state) {
  if (u.dim() != state.dim()) throw std::invalid_argument("apply: dimension mismatch");
  return QuantumState(u.matrix() * state.amplitudes(), QuantumState::Unchecked{});
}

UnitaryMatrix matrix_exponential_hermitian_generator(const Matrix& h, Complex scale) {
  if (h.rows() != h.cols()) throw std::invalid_argument("expm: generator not square");
  const double dev = hermiticity_deviation(h);
  if (dev > kHermitianTol) {
    throw std::invalid_argument("expm: generator is not Hermitian (deviation " +
                                std::to_string(dev) + ")");
  }
  if (std::abs(scale.real()) > 1e-15 * std::max(1.0, std::abs(scale))) {
    throw std::invalid_argument("expm: scale must be purely imaginary");
  }
  // Symmetrize so the solver sees an exactly Hermitian matrix.
  const Matrix herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  if (es.info() != Eigen::Success) throw std::runtime_error("expm: eigensolver failed");
  const Eigen::VectorXd& evals = es.eigenvalues();
  Vector phases(evals.size());
  for (Eigen::Index k = 0; k < evals.size(); ++k) phases(k) = std::exp(scale * evals(k));
  const Matrix& v = es.eigenvectors();
  return UnitaryMatrix(v * phases.asDiagonal() * v.adjoint());
}

UnitaryMatrix floquet_operator(const SpinSystem& sys, double kappa) {
  const double half_pi = 0.5 * std::numbers::pi;
  const UnitaryMatrix precession =
      matrix_exponential_hermitian_generator(sys.jy(), Complex(0.0, -half_pi));
  // Jz^2 is diagonal in this basis, so the kick factor is a phase per m.
  Vector kick(sys.dim());
  for (int k = 0; k < sys.dim(); ++k) {
    const double m = sys.m(k);
    kick(k) = std::exp(Complex(0.0, -kappa / (2.0 * sys.j()) * m * m));
  }
  return UnitaryMatrix(kick.asDiagonal() * precession.matrix());
}

std::pair<double, double> wrap_angles(double theta, double phi) {
  constexpr double pi = std::numbers::pi;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  double p = phi;
  if (t > pi) {
    t = two_pi - t;
    p += pi;
  }
  p = std::fmod(p + pi, two_pi);
  if (p < 0.0) p += two_pi;
  p -= pi;
  if (p >= pi) p -= two_pi;
  return {t, p};
}

QuantumState coherent_state(const SpinSystem& sys, double theta, double phi) {
  const auto [t, p] = wrap_angles(theta, phi);
  if (t == 0.0) return QuantumState::basis(sys.dim(), 0);  // generator vanishes
  const Matrix generator = std::sin(p) * sys.jx() - std::cos(p) * sys.jy();
  const UnitaryMatrix rotation =
      matrix_exponential_hermitian_generator(generator, Complex(0.0, t));
  return apply(rotation, QuantumState::basis(sys.dim(), 0));
}

double expectation(const QuantumState& state, const Matrix& m) {
  if (m.rows() != state.dim() || m.cols() != state.dim()) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  const Complex value = state.amplitudes().dot(m * state.amplitudes());
  if (std::abs(value.imag()) >= kImagResidueTol) {
    throw std::domain_error("expectation: imaginary residue " +
                            std::to_string(value.imag()) +
                            " (non-Hermitian operator or corrupted state)");
  }
  return value.real();
}

}  // namespace kicktop
