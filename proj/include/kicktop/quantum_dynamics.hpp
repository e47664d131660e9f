#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kicktop/field.hpp"
#include "kicktop/parallel.hpp"
#include "kicktop/spin_algebra.hpp"

namespace kicktop {

using Vec3 = Eigen::Vector3d;

/// (<Jx>, <Jy>, <Jz>).
Vec3 spin_expectations(const SpinSystem& sys, const QuantumState& state);

/// U^n |psi> by n matrix-vector products.
QuantumState evolve(const UnitaryMatrix& u, const QuantumState& state, std::int64_t n);

/// S = 1/2 [1 - |<J>|^2 / j^2].
double linear_entropy_from_expectations(const Vec3& mean_j, double j);

/// One-qubit reduced density matrix of a symmetric-subspace state,
/// rho_1 = (I + (<J>/j) . sigma) / 2.
Eigen::Matrix2cd single_qubit_reduced_state(const SpinSystem& sys, const QuantumState& state);

/// Linear entropy of one qubit against the other 2j - 1. Evaluates both
/// 1 - Tr rho_1^2 and the expectation-value form and throws std::logic_error
/// if they differ by more than 1e-12.
double linear_entropy(const SpinSystem& sys, const QuantumState& state);

/// Closed-form <J(n)> for j = 1 starting from the coherent state |theta,phi>.
/// The odd-n branch of <Jx> carries the prefactor (-1)^((n-1)/2).
Vec3 closed_form_j1_expectations(double theta, double phi, double kappa, std::int64_t n);

/// Same, but throws std::invalid_argument unless j == 1.
Vec3 closed_form_j1_expectations(Spin j, double theta, double phi, double kappa,
                                 std::int64_t n);

struct EntanglementTrace {
  std::vector<double> values;  // S(n), n = 0..N
  double theta = 0.0;
  double phi = 0.0;
  double kappa = 0.0;
  Spin j{2};
};

EntanglementTrace entanglement_trace(const SpinSystem& sys, double theta, double phi,
                                     double kappa, std::int64_t n_kicks);

/// Mean of S(1..N); S(0) is excluded.
double finite_time_average_entropy(const SpinSystem& sys, double theta, double phi,
                                   double kappa, std::int64_t n_kicks);
double finite_time_average_entropy(const SpinSystem& sys, const UnitaryMatrix& u,
                                   double theta, double phi, std::int64_t n_kicks);

struct FloquetDecomposition {
  Eigen::VectorXd eigenphases;  // alpha_k in (-pi, pi]; xi_k = exp(i alpha_k)
  Matrix eigenvectors;          // column k is |xi_k>
  double kappa = 0.0;

  int dim() const { return static_cast<int>(eigenphases.size()); }
  Complex eigenvalue(int k) const { return std::polar(1.0, eigenphases(k)); }
};

/// Numerical eigendecomposition of a unitary (complex Schur form, which is
/// diagonal for normal matrices), eigenpairs sorted by ascending eigenphase.
/// Eigenphase clusters closer than 1e-8 rad are re-orthonormalized jointly.
/// Throws std::runtime_error if an eigen-residual exceeds 1e-8.
FloquetDecomposition floquet_decompose(const UnitaryMatrix& u, double kappa);

/// Analytic j = 1 eigenphases, in the order e^{-i k/2}, -i e^{-i k/4}, i e^{-i k/4}.
std::array<double, 3> analytic_j1_eigenphases(double kappa);

/// Floquet decomposition of floquet_operator(sys, kappa). For j = 1 the
/// eigenpairs follow the analytic order above and carry the analytic
/// eigenphases; otherwise this is floquet_decompose(U, kappa).
FloquetDecomposition floquet_decompose(const SpinSystem& sys, double kappa);

/// Index 4-tuple of the DC expansion. Zero-based.
struct Quadruple {
  int k = 0, l = 0, p = 0, q = 0;

  bool diagonal() const { return k == l && p == q; }
  Quadruple conjugate() const { return {l, k, q, p}; }
  friend auto operator<=>(const Quadruple&, const Quadruple&) = default;
};

struct ResonanceSet {
  std::vector<Quadruple> quadruples;  // lexicographically sorted
  double tolerance = 0.0;

  bool contains(const Quadruple& quad) const;
  std::size_t diagonal_count() const;
};

inline constexpr double kDefaultResonanceTolerance = 1e-9;

/// All (k,l,p,q) with |arg(xi_k* xi_l xi_p* xi_q)| <= tol.
ResonanceSet resonant_quadruples(const FloquetDecomposition& dec,
                                 double tol = kDefaultResonanceTolerance);

struct EntropyAverages {
  double s_q = 0.0;
  double i_q = 0.0;
  double r_q = 0.0;
};

/// Infinite-time averages evaluated through the resonance expansion. Holds
/// the decomposition, the resonance set and the angular-momentum matrices in
/// the Floquet basis, so repeated evaluation over initial conditions is cheap.
class TimeAveragedEntropy {
 public:
  TimeAveragedEntropy(const SpinSystem& sys, FloquetDecomposition dec,
                      double tol = kDefaultResonanceTolerance);

  /// Throws std::domain_error if an imaginary residue reaches 1e-9 or if
  /// S_Q and I_Q + R_Q disagree by more than 1e-12.
  EntropyAverages operator()(double theta, double phi) const;

  /// Sum of E(k,l,p,q) over the given quadruples at |theta,phi>.
  Complex e_sum(std::span<const Quadruple> quads, double theta, double phi) const;

  const FloquetDecomposition& decomposition() const { return dec_; }
  const ResonanceSet& resonances() const { return res_; }
  const SpinSystem& system() const { return sys_; }

 private:
  Vector coefficients(double theta, double phi) const;

  SpinSystem sys_;
  FloquetDecomposition dec_;
  ResonanceSet res_;
  std::array<Matrix, 3> j_floquet_;  // <xi_k|J_i|xi_l>
};

EntropyAverages infinite_time_average_entropy(const SpinSystem& sys,
                                              const FloquetDecomposition& dec,
                                              double theta, double phi);

/// Q(theta,phi) = |<theta,phi|psi>|^2, times (2j+1)/(4 pi) when normalize.
FieldMap husimi_map(const SpinSystem& sys, const QuantumState& state,
                    const ThetaPhiGrid& grid, bool normalize = false,
                    Execution exec = Execution::parallel);

/// Husimi map of Floquet eigenstate `index` (zero-based).
FieldMap husimi_map(const SpinSystem& sys, const FloquetDecomposition& dec, int index,
                    const ThetaPhiGrid& grid, bool normalize = false,
                    Execution exec = Execution::parallel);

/// Real map of sum E(k,l,p,q) over `group`. The group must consist of
/// resonant quadruples and be closed under conjugation, otherwise
/// std::invalid_argument.
FieldMap eterm_map(const TimeAveragedEntropy& averages, std::span<const Quadruple> group,
                   const ThetaPhiGrid& grid, Execution exec = Execution::parallel);

}  // namespace kicktop
