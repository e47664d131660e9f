#include "kicktop/quantum_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kicktop {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEntropyFormTol = 1e-12;
constexpr double kEigenResidualTol = 1e-8;
constexpr double kClusterTol = 1e-8;
constexpr double kImagTol = 1e-9;
constexpr double kIdentityTol = 1e-12;

// Wraps to (-pi, pi].
double wrap_phase(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

double phase_distance(double a, double b) { return std::abs(wrap_phase(a - b)); }

// Re-orthonormalizes the columns [first, last) of v in place.
void orthonormalize_columns(Matrix& v, int first, int last) {
  const int n = last - first;
  if (n < 2) return;
  Eigen::HouseholderQR<Matrix> qr(v.middleCols(first, n));
  Matrix q = qr.householderQ() * Matrix::Identity(v.rows(), n);
  // Undo the arbitrary phases QR puts on each column.
  const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c) {
    const Complex d = r(c, c);
    if (std::abs(d) > 0.0) q.col(c) *= d / std::abs(d);
  }
  v.middleCols(first, n) = q;
}

}  // namespace

Vec3 spin_expectations(const SpinSystem& sys, const QuantumState& state) {
  return {expectation(state, sys.jx()), expectation(state, sys.jy()),
          expectation(state, sys.jz())};
}

QuantumState evolve(const UnitaryMatrix& u, const QuantumState& state, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("evolve: negative kick count");
  QuantumState s = state;
  for (std::int64_t i = 0; i < n; ++i) s = apply(u, s);
  return s;
}

double linear_entropy_from_expectations(const Vec3& mean_j, double j) {
  return 0.5 * (1.0 - mean_j.squaredNorm() / (j * j));
}

Eigen::Matrix2cd single_qubit_reduced_state(const SpinSystem& sys, const QuantumState& state) {
  const Vec3 r = spin_expectations(sys, state) / sys.j();
  Eigen::Matrix2cd rho;
  rho << 1.0 + r.z(), Complex(r.x(), -r.y()),
         Complex(r.x(), r.y()), 1.0 - r.z();
  return 0.5 * rho;
}

double linear_entropy(const SpinSystem& sys, const QuantumState& state) {
  const Vec3 mean_j = spin_expectations(sys, state);
  const double from_expectations = linear_entropy_from_expectations(mean_j, sys.j());
  const Eigen::Matrix2cd rho = single_qubit_reduced_state(sys, state);
  const double from_purity = 1.0 - (rho * rho).trace().real();
  if (std::abs(from_expectations - from_purity) > kEntropyFormTol) {
    throw std::logic_error("linear_entropy: purity and expectation forms disagree");
  }
  return std::clamp(from_expectations, 0.0, 0.5);
}

Vec3 closed_form_j1_expectations(double theta, double phi, double kappa, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("closed form: negative kick count");
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const auto parity_sign = [](std::int64_t m) { return (m % 2 == 0) ? 1.0 : -1.0; };

  const auto jx = [&](std::int64_t m) {
    if (m % 2 == 0) {
      const double a = 0.5 * kappa * static_cast<double>(m / 2);
      return parity_sign(m / 2) * (st * cp * std::cos(a) - st * ct * sp * std::sin(a));
    }
    const double a = 0.5 * kappa * static_cast<double>((m + 1) / 2);
    return parity_sign((m - 1) / 2) * (ct * std::cos(a) + cp * sp * st * st * std::sin(a));
  };

  const double y = (n % 2 == 0)
                       ? st * sp
                       : st * (sp * std::cos(0.5 * kappa) - ct * cp * std::sin(0.5 * kappa));
  const double z = (n == 0) ? ct : -jx(n - 1);
  return {jx(n), y, z};
}

Vec3 closed_form_j1_expectations(Spin j, double theta, double phi, double kappa,
                                 std::int64_t n) {
  if (j.two_j() != 2) {
    throw std::invalid_argument("closed form expectations exist only for j = 1");
  }
  return closed_form_j1_expectations(theta, phi, kappa, n);
}

EntanglementTrace entanglement_trace(const SpinSystem& sys, double theta, double phi,
                                     double kappa, std::int64_t n_kicks) {
  if (n_kicks < 1) throw std::invalid_argument("entanglement_trace: need N >= 1");
  const UnitaryMatrix u = floquet_operator(sys, kappa);
  EntanglementTrace trace;
  trace.theta = theta;
  trace.phi = phi;
  trace.kappa = kappa;
  trace.j = sys.spin();
  trace.values.reserve(static_cast<std::size_t>(n_kicks) + 1);
  QuantumState s = coherent_state(sys, theta, phi);
  trace.values.push_back(linear_entropy(sys, s));
  for (std::int64_t n = 1; n <= n_kicks; ++n) {
    s = apply(u, s);
    trace.values.push_back(linear_entropy(sys, s));
  }
  return trace;
}

double finite_time_average_entropy(const SpinSystem& sys, const UnitaryMatrix& u,
                                   double theta, double phi, std::int64_t n_kicks) {
  if (n_kicks < 1) throw std::invalid_argument("finite_time_average_entropy: need N >= 1");
  QuantumState s = coherent_state(sys, theta, phi);
  double sum = 0.0;
  for (std::int64_t n = 1; n <= n_kicks; ++n) {
    s = apply(u, s);
    sum += linear_entropy(sys, s);
  }
  return sum / static_cast<double>(n_kicks);
}

double finite_time_average_entropy(const SpinSystem& sys, double theta, double phi,
                                   double kappa, std::int64_t n_kicks) {
  return finite_time_average_entropy(sys, floquet_operator(sys, kappa), theta, phi, n_kicks);
}

FloquetDecomposition floquet_decompose(const UnitaryMatrix& u, double kappa) {
  const int d = u.dim();
  Eigen::ComplexSchur<Matrix> schur(u.matrix());
  if (schur.info() != Eigen::Success) throw std::runtime_error("floquet: Schur decomposition failed");
  const Matrix& t = schur.matrixT();
  const Matrix& q = schur.matrixU();

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phase(d);
  for (int k = 0; k < d; ++k) phase[k] = wrap_phase(std::arg(t(k, k)));
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return phase[a] < phase[b]; });

  FloquetDecomposition dec;
  dec.kappa = kappa;
  dec.eigenphases.resize(d);
  dec.eigenvectors.resize(d, d);
  for (int k = 0; k < d; ++k) {
    dec.eigenphases(k) = phase[order[k]];
    dec.eigenvectors.col(k) = q.col(order[k]);
  }

  // Degenerate clusters in the sorted list; a cluster straddling the -pi/+pi
  // seam is orthonormalized across both ends.
  int first = 0;
  while (first < d) {
    int last = first + 1;
    while (last < d && dec.eigenphases(last) - dec.eigenphases(last - 1) < kClusterTol) ++last;
    orthonormalize_columns(dec.eigenvectors, first, last);
    first = last;
  }
  if (d > 1 && phase_distance(dec.eigenphases(0), dec.eigenphases(d - 1)) < kClusterTol) {
    int head = 1;
    while (head < d && dec.eigenphases(head) - dec.eigenphases(head - 1) < kClusterTol) ++head;
    int tail = d - 1;
    while (tail > head && dec.eigenphases(tail) - dec.eigenphases(tail - 1) < kClusterTol) --tail;
    Matrix seam(d, head + (d - tail));
    seam << dec.eigenvectors.middleCols(tail, d - tail), dec.eigenvectors.leftCols(head);
    orthonormalize_columns(seam, 0, static_cast<int>(seam.cols()));
    dec.eigenvectors.middleCols(tail, d - tail) = seam.leftCols(d - tail);
    dec.eigenvectors.leftCols(head) = seam.rightCols(head);
  }

  for (int k = 0; k < d; ++k) {
    const Vector v = dec.eigenvectors.col(k);
    const double residual = (u.matrix() * v - dec.eigenvalue(k) * v).cwiseAbs().maxCoeff();
    if (residual > kEigenResidualTol) {
      throw std::runtime_error("floquet: eigen-residual " + std::to_string(residual) +
                               " for eigenpair " + std::to_string(k));
    }
  }
  return dec;
}

std::array<double, 3> analytic_j1_eigenphases(double kappa) {
  return {wrap_phase(-0.5 * kappa), wrap_phase(-0.5 * kPi - 0.25 * kappa),
          wrap_phase(0.5 * kPi - 0.25 * kappa)};
}

FloquetDecomposition floquet_decompose(const SpinSystem& sys, double kappa) {
  FloquetDecomposition numeric = floquet_decompose(floquet_operator(sys, kappa), kappa);
  if (sys.spin().two_j() != 2) return numeric;

  const auto analytic = analytic_j1_eigenphases(kappa);
  std::array<int, 3> perm{0, 1, 2};
  std::array<int, 3> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int i = 0; i < 3; ++i) cost = std::max(cost, phase_distance(numeric.eigenphases(perm[i]), analytic[i]));
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best_cost > kEigenResidualTol) {
    throw std::runtime_error("floquet: numerical j=1 spectrum does not match the analytic one");
  }

  FloquetDecomposition dec;
  dec.kappa = kappa;
  dec.eigenphases.resize(3);
  dec.eigenvectors.resize(3, 3);
  for (int i = 0; i < 3; ++i) {
    dec.eigenphases(i) = analytic[i];
    dec.eigenvectors.col(i) = numeric.eigenvectors.col(best[i]);
  }
  return dec;
}

bool ResonanceSet::contains(const Quadruple& quad) const {
  return std::binary_search(quadruples.begin(), quadruples.end(), quad);
}

std::size_t ResonanceSet::diagonal_count() const {
  return static_cast<std::size_t>(std::count_if(quadruples.begin(), quadruples.end(),
                                                [](const Quadruple& q) { return q.diagonal(); }));
}

ResonanceSet resonant_quadruples(const FloquetDecomposition& dec, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("resonances: tolerance must be positive");
  const int d = dec.dim();
  const Eigen::VectorXd& a = dec.eigenphases;
  ResonanceSet set;
  set.tolerance = tol;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) {
          // (k,k,q,q) cancels identically; don't let roundoff decide it.
          const bool resonant =
              (k == l && p == q) || phase_distance(a(l) - a(k) + a(q) - a(p), 0.0) <= tol;
          if (resonant) set.quadruples.push_back({k, l, p, q});
        }
  return set;
}

TimeAveragedEntropy::TimeAveragedEntropy(const SpinSystem& sys, FloquetDecomposition dec,
                                         double tol)
    : sys_(sys), dec_(std::move(dec)), res_(resonant_quadruples(dec_, tol)) {
  if (dec_.dim() != sys_.dim()) throw std::invalid_argument("time average: dimension mismatch");
  const Matrix& v = dec_.eigenvectors;
  j_floquet_ = {v.adjoint() * sys_.jx() * v, v.adjoint() * sys_.jy() * v,
                v.adjoint() * sys_.jz() * v};
}

Vector TimeAveragedEntropy::coefficients(double theta, double phi) const {
  return dec_.eigenvectors.adjoint() * coherent_state(sys_, theta, phi).amplitudes();
}

namespace {

// A_i(k,l) = C_k* C_l <xi_k|J_i|xi_l>, so that E(k,l,p,q) = sum_i A_i(k,l) A_i(p,q).
std::array<Matrix, 3> weighted_elements(const std::array<Matrix, 3>& jf, const Vector& c) {
  std::array<Matrix, 3> a;
  const Matrix outer = c.conjugate() * c.transpose();
  for (int i = 0; i < 3; ++i) a[i] = outer.cwiseProduct(jf[i]);
  return a;
}

Complex e_term(const std::array<Matrix, 3>& a, const Quadruple& x) {
  return a[0](x.k, x.l) * a[0](x.p, x.q) + a[1](x.k, x.l) * a[1](x.p, x.q) +
         a[2](x.k, x.l) * a[2](x.p, x.q);
}

}  // namespace

EntropyAverages TimeAveragedEntropy::operator()(double theta, double phi) const {
  const auto a = weighted_elements(j_floquet_, coefficients(theta, phi));
  Complex diagonal = 0.0, off_diagonal = 0.0, all = 0.0;
  for (const Quadruple& x : res_.quadruples) {
    const Complex e = e_term(a, x);
    (x.diagonal() ? diagonal : off_diagonal) += e;
    all += e;
  }
  if (std::abs(diagonal.imag()) >= kImagTol || std::abs(off_diagonal.imag()) >= kImagTol ||
      std::abs(all.imag()) >= kImagTol) {
    throw std::domain_error("time average: imaginary residue in resonance sum; "
                            "resonance set not closed under conjugation");
  }
  const double scale = 1.0 / (2.0 * sys_.j() * sys_.j());
  EntropyAverages out;
  out.i_q = 0.5 - scale * diagonal.real();
  out.r_q = -scale * off_diagonal.real();
  out.s_q = 0.5 - scale * all.real();
  if (std::abs(out.s_q - (out.i_q + out.r_q)) > kIdentityTol) {
    throw std::domain_error("time average: S_Q != I_Q + R_Q");
  }
  return out;
}

Complex TimeAveragedEntropy::e_sum(std::span<const Quadruple> quads, double theta,
                                   double phi) const {
  const auto a = weighted_elements(j_floquet_, coefficients(theta, phi));
  Complex sum = 0.0;
  for (const Quadruple& x : quads) sum += e_term(a, x);
  return sum;
}

EntropyAverages infinite_time_average_entropy(const SpinSystem& sys,
                                              const FloquetDecomposition& dec,
                                              double theta, double phi) {
  return TimeAveragedEntropy(sys, dec)(theta, phi);
}

FieldMap husimi_map(const SpinSystem& sys, const QuantumState& state,
                    const ThetaPhiGrid& grid, bool normalize, Execution exec) {
  if (state.dim() != sys.dim()) throw std::invalid_argument("husimi: dimension mismatch");
  FieldMap map(grid, "husimi");
  const double factor = normalize ? sys.dim() / (4.0 * kPi) : 1.0;
  fill_field(map, exec, [&](double theta, double phi) {
    return factor * std::norm(coherent_state(sys, theta, phi).amplitudes().dot(state.amplitudes()));
  });
  map.params["j"] = sys.j();
  map.params["normalized"] = normalize ? 1.0 : 0.0;
  return map;
}

FieldMap husimi_map(const SpinSystem& sys, const FloquetDecomposition& dec, int index,
                    const ThetaPhiGrid& grid, bool normalize, Execution exec) {
  if (index < 0 || index >= dec.dim()) throw std::out_of_range("husimi: eigenstate index");
  const QuantumState eigenstate(dec.eigenvectors.col(index).normalized());
  FieldMap map = husimi_map(sys, eigenstate, grid, normalize, exec);
  map.params["kappa"] = dec.kappa;
  map.params["eigenstate"] = index;
  map.params["eigenphase"] = dec.eigenphases(index);
  return map;
}

FieldMap eterm_map(const TimeAveragedEntropy& averages, std::span<const Quadruple> group,
                   const ThetaPhiGrid& grid, Execution exec) {
  if (group.empty()) throw std::invalid_argument("eterm: empty quadruple group");
  const std::vector<Quadruple> members(group.begin(), group.end());
  for (const Quadruple& x : members) {
    if (!averages.resonances().contains(x)) {
      throw std::invalid_argument("eterm: quadruple is not resonant");
    }
    if (std::find(members.begin(), members.end(), x.conjugate()) == members.end()) {
      throw std::invalid_argument("eterm: group is not closed under conjugation");
    }
  }
  FieldMap map(grid, "eterm");
  fill_field(map, exec, [&](double theta, double phi) {
    const Complex s = averages.e_sum(members, theta, phi);
    if (std::abs(s.imag()) >= kImagTol) throw std::domain_error("eterm: imaginary residue");
    return s.real();
  });
  map.params["j"] = averages.system().j();
  map.params["kappa"] = averages.decomposition().kappa;
  return map;
}

}  // namespace kicktop
