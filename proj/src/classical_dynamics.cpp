#include "kicktop/classical_dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "kicktop/spin_algebra.hpp"

namespace kicktop {

namespace {

constexpr double kNormTol = 1e-12;

// Sum of squares taken in sorted order, so that permuting or flipping the
// sign of components leaves the result bit-identical.
double permutation_invariant_norm(const Eigen::Vector3d& v) {
  std::array<double, 3> sq{v.x() * v.x(), v.y() * v.y(), v.z() * v.z()};
  std::sort(sq.begin(), sq.end());
  return std::sqrt(sq[0] + sq[1] + sq[2]);
}

Eigen::Vector3d theta_basis(double theta, double phi) {
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
}

Eigen::Vector3d phi_basis(double phi) { return {-std::sin(phi), std::cos(phi), 0.0}; }

// Tangent-plane basis at s as the columns of a 3x2 matrix.
Eigen::Matrix<double, 3, 2> tangent_frame(const ClassicalState& s) {
  const Eigen::Vector3d a = default_tangent(s);
  const Eigen::Vector3d b = s.vec().cross(a).normalized();
  Eigen::Matrix<double, 3, 2> e;
  e << a, b;
  return e;
}

}  // namespace

ClassicalState::ClassicalState(double x, double y, double z) : v_(x, y, z) {
  if (norm_deviation() > kNormTol) {
    throw std::invalid_argument("classical state: not on the unit sphere (deviation " +
                                std::to_string(norm_deviation()) + ")");
  }
}

ClassicalState ClassicalState::from_angles(double theta, double phi) {
  return ClassicalState(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                        std::cos(theta));
}

double ClassicalState::theta() const { return std::acos(std::clamp(v_.z() / v_.norm(), -1.0, 1.0)); }

double ClassicalState::phi() const { return std::atan2(v_.y(), v_.x()); }

ClassicalState classical_map(const ClassicalState& s, double kappa) {
  const double c = std::cos(kappa * s.x());
  const double sn = std::sin(kappa * s.x());
  return ClassicalState(Eigen::Vector3d(s.z() * c + s.y() * sn, -s.z() * sn + s.y() * c, -s.x()),
                        ClassicalState::Unchecked{});
}

Eigen::Matrix3d classical_jacobian(const ClassicalState& s, double kappa) {
  const double c = std::cos(kappa * s.x());
  const double sn = std::sin(kappa * s.x());
  Eigen::Matrix3d jac;
  jac << kappa * (s.y() * c - s.z() * sn), sn, c,
         -kappa * (s.z() * c + s.y() * sn), c, -sn,
         -1.0, 0.0, 0.0;
  return jac;
}

Eigen::Vector3d default_tangent(const ClassicalState& s) {
  for (const Eigen::Vector3d& trial : {Eigen::Vector3d::UnitX().eval(), Eigen::Vector3d::UnitY().eval()}) {
    const Eigen::Vector3d t = trial - trial.dot(s.vec()) * s.vec();
    if (t.norm() > 1e-6) return t.normalized();
  }
  return Eigen::Vector3d::UnitZ();  // unreachable for a unit vector
}

double lyapunov_finite_time(const ClassicalState& start, const Eigen::Vector3d& tangent,
                            double kappa, std::int64_t n_total, std::int64_t n_transient) {
  if (n_transient < 0 || n_total <= n_transient) {
    throw std::invalid_argument("lyapunov: need n_total > n_transient >= 0");
  }
  ClassicalState s = start;
  Eigen::Vector3d t = tangent;
  double sum = 0.0;
  for (std::int64_t step = 0; step < n_total; ++step) {
    const Eigen::Vector3d pushed = classical_jacobian(s, kappa) * t;
    const double norm = permutation_invariant_norm(pushed);
    const double stretch = norm / permutation_invariant_norm(t);
    t = pushed / norm;
    s = classical_map(s, kappa);
    if (step >= n_transient) sum += std::log(stretch);
  }
  return sum / static_cast<double>(n_total - n_transient);
}

double lyapunov_finite_time(double theta, double phi, double kappa, std::int64_t n_total,
                            std::int64_t n_transient) {
  const ClassicalState s = ClassicalState::from_angles(theta, phi);
  return lyapunov_finite_time(s, default_tangent(s), kappa, n_total, n_transient);
}

double classical_ignorance(double theta, double phi, double kappa, std::int64_t n_total,
                           std::int64_t n_transient) {
  return classical_ignorance(ClassicalState::from_angles(theta, phi), kappa, n_total, n_transient);
}

double classical_ignorance(const ClassicalState& start, double kappa, std::int64_t n_total,
                           std::int64_t n_transient) {
  if (n_total < 1 || n_transient < 0) {
    throw std::invalid_argument("ignorance: need n_total >= 1 and n_transient >= 0");
  }
  ClassicalState s = start;
  for (std::int64_t i = 0; i < n_transient; ++i) s = classical_map(s, kappa);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (std::int64_t i = 0; i < n_total; ++i) {
    sum += s.vec();
    s = classical_map(s, kappa);
  }
  const Eigen::Vector3d mean = sum / static_cast<double>(n_total);
  return std::clamp(0.5 - 0.5 * mean.squaredNorm(), 0.0, 0.5);
}

double Trajectory::max_norm_drift() const {
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, p.norm_deviation());
  return worst;
}

Trajectory iterate_map(double theta, double phi, double kappa, std::int64_t n_points) {
  Trajectory traj = iterate_map(ClassicalState::from_angles(theta, phi), kappa, n_points);
  traj.theta0 = theta;
  traj.phi0 = phi;
  return traj;
}

Trajectory iterate_map(const ClassicalState& start, double kappa, std::int64_t n_points) {
  if (n_points < 1) throw std::invalid_argument("iterate: need at least one point");
  Trajectory traj;
  traj.kappa = kappa;
  traj.theta0 = start.theta();
  traj.phi0 = start.phi();
  traj.points.reserve(static_cast<std::size_t>(n_points));
  traj.points.push_back(start);
  for (std::int64_t i = 1; i < n_points; ++i) {
    traj.points.push_back(classical_map(traj.points.back(), kappa));
  }
  return traj;
}

std::vector<Trajectory> poincare_section(std::span<const std::pair<double, double>> seeds,
                                         double kappa, std::int64_t n_per_seed,
                                         Execution exec) {
  if (seeds.empty()) throw std::invalid_argument("poincare: no seeds");
  if (n_per_seed < 1) throw std::invalid_argument("poincare: need at least one point per seed");
  std::vector<Trajectory> out(seeds.size());
  for_each_index(seeds.size(), exec, [&](std::size_t i) {
    out[i] = iterate_map(seeds[i].first, seeds[i].second, kappa, n_per_seed);
  });
  return out;
}

namespace {

Eigen::Vector3d iterate_vec(ClassicalState s, double kappa, int steps) {
  for (int i = 0; i < steps; ++i) s = classical_map(s, kappa);
  return s.vec();
}

std::optional<ClassicalState> newton_root(double theta, double phi, double kappa, int period,
                                          const OrbitSearchOptions& opt) {
  for (int it = 0; it <= opt.max_newton_steps; ++it) {
    const ClassicalState s = ClassicalState::from_angles(theta, phi);
    ClassicalState w = s;
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    for (int i = 0; i < period; ++i) {
      m = classical_jacobian(w, kappa) * m;
      w = classical_map(w, kappa);
    }
    const Eigen::Vector3d diff = w.vec() - s.vec();
    if (diff.norm() < opt.residual_tolerance) return s;
    if (it == opt.max_newton_steps) break;

    const Eigen::Vector3d et = theta_basis(theta, phi);
    const Eigen::Vector3d ep = phi_basis(phi);
    Eigen::Matrix<double, 3, 2> frame;
    frame << et, ep;
    Eigen::Matrix<double, 3, 2> ds;
    ds << et, std::sin(theta) * ep;
    const Eigen::Matrix2d a = frame.transpose() * (m - Eigen::Matrix3d::Identity()) * ds;
    const Eigen::Vector2d g = frame.transpose() * diff;
    // Pseudo-inverse: a is singular at the poles (sin(theta) = 0).
    Eigen::Vector2d step = a.completeOrthogonalDecomposition().solve(-g);
    if (!step.allFinite()) return std::nullopt;
    const double len = step.norm();
    if (len > 0.5) step *= 0.5 / len;
    const auto [t, p] = wrap_angles(theta + step(0), phi + step(1));
    theta = t;
    phi = p;
  }
  return std::nullopt;
}

}  // namespace

std::vector<PeriodicOrbit> find_periodic_orbits(double kappa, int period,
                                                const ThetaPhiGrid& seeds, Execution exec,
                                                const OrbitSearchOptions& opt) {
  if (period < 1 || period > 8) {
    throw std::invalid_argument("periodic orbits: period must be in 1..8");
  }
  std::vector<std::optional<ClassicalState>> roots(seeds.size());
  for_each_index(seeds.size(), exec, [&](std::size_t cell) {
    roots[cell] = newton_root(seeds.theta(seeds.theta_index(cell)),
                              seeds.phi(seeds.phi_index(cell)), kappa, period, opt);
  });

  std::vector<PeriodicOrbit> orbits;
  const auto known = [&](const ClassicalState& s) {
    for (const auto& orbit : orbits)
      for (const auto& c : orbit.cycle)
        if ((c.vec() - s.vec()).norm() < opt.dedup_distance) return true;
    return false;
  };

  for (const auto& root : roots) {
    if (!root || known(*root)) continue;
    int minimal = period;
    for (int d = 1; d < period; ++d) {
      if (period % d == 0 && (iterate_vec(*root, kappa, d) - root->vec()).norm() < 1e-8) {
        minimal = d;
        break;
      }
    }
    PeriodicOrbit orbit;
    orbit.period = minimal;
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    ClassicalState s = *root;
    for (int i = 0; i < minimal; ++i) {
      orbit.cycle.push_back(s);
      m = classical_jacobian(s, kappa) * m;
      s = classical_map(s, kappa);
    }
    const Eigen::Matrix<double, 3, 2> e = tangent_frame(*root);
    const Eigen::Matrix2d reduced = e.transpose() * m * e;
    orbit.stability = reduced.eigenvalues().cwiseAbs().maxCoeff();
    orbit.stable = orbit.stability <= opt.stability_threshold;
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

}  // namespace kicktop
