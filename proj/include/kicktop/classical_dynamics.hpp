#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kicktop/field.hpp"
#include "kicktop/parallel.hpp"

namespace kicktop {

/// Point (x, y, z) on the unit sphere.
class ClassicalState {
 public:
  /// Throws std::invalid_argument if | |v| - 1 | > 1e-12.
  ClassicalState(double x, double y, double z);

  /// (sin t cos p, sin t sin p, cos t).
  static ClassicalState from_angles(double theta, double phi);

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  const Eigen::Vector3d& vec() const { return v_; }

  /// theta in [0, pi].
  double theta() const;
  /// phi in [-pi, pi].
  double phi() const;
  double norm_deviation() const { return std::abs(v_.norm() - 1.0); }

 private:
  struct Unchecked {};
  ClassicalState(const Eigen::Vector3d& v, Unchecked) : v_(v) {}
  friend ClassicalState classical_map(const ClassicalState&, double);

  Eigen::Vector3d v_;
};

/// x' = z cos(k x) + y sin(k x), y' = -z sin(k x) + y cos(k x), z' = -x.
/// Exactly norm-preserving in exact arithmetic; the result is not
/// renormalized.
ClassicalState classical_map(const ClassicalState& s, double kappa);

/// Analytic derivative of classical_map at s.
Eigen::Matrix3d classical_jacobian(const ClassicalState& s, double kappa);

/// Unit tangent at s: projection of (1,0,0), or of (0,1,0) if that is
/// degenerate.
Eigen::Vector3d default_tangent(const ClassicalState& s);

inline constexpr std::int64_t kLyapunovKicks = 2600;
inline constexpr std::int64_t kLyapunovTransient = 100;

/// Finite-time Lyapunov exponent in nats per kick: the tangent vector is
/// pushed through the Jacobian and rescaled to unit length every step, and
/// ln(stretch) is averaged over the steps after the transient.
double lyapunov_finite_time(double theta, double phi, double kappa,
                            std::int64_t n_total = kLyapunovKicks,
                            std::int64_t n_transient = kLyapunovTransient);
double lyapunov_finite_time(const ClassicalState& start, const Eigen::Vector3d& tangent,
                            double kappa, std::int64_t n_total, std::int64_t n_transient);

/// I_C = 1/2 - 1/2 |trajectory mean|^2 over n_total points after discarding
/// n_transient. The starting point counts as the first point.
double classical_ignorance(double theta, double phi, double kappa, std::int64_t n_total,
                           std::int64_t n_transient = 0);
double classical_ignorance(const ClassicalState& start, double kappa, std::int64_t n_total,
                           std::int64_t n_transient = 0);

struct Trajectory {
  std::vector<ClassicalState> points;
  double kappa = 0.0;
  double theta0 = 0.0;
  double phi0 = 0.0;

  double max_norm_drift() const;
};

/// n_points states starting at (theta, phi).
Trajectory iterate_map(double theta, double phi, double kappa, std::int64_t n_points);
Trajectory iterate_map(const ClassicalState& start, double kappa, std::int64_t n_points);

std::vector<Trajectory> poincare_section(std::span<const std::pair<double, double>> seeds,
                                         double kappa, std::int64_t n_per_seed,
                                         Execution exec = Execution::parallel);

struct PeriodicOrbit {
  std::vector<ClassicalState> cycle;  // minimal-period cycle, starting at the root found
  int period = 0;
  double stability = 0.0;  // spectral radius of the cycle's tangent map
  bool stable = false;
};

struct OrbitSearchOptions {
  int max_newton_steps = 50;
  double residual_tolerance = 1e-11;
  double dedup_distance = 1e-6;
  double stability_threshold = 1.0 + 1e-9;
};

/// Newton search for roots of F^p(s) = s in (theta, phi) from every seed of
/// the grid (default 40x80). Non-converging seeds are dropped. Results are
/// deduplicated across cycle members and ordered by the first seed that
/// found them. Throws std::invalid_argument unless 1 <= period <= 8.
std::vector<PeriodicOrbit> find_periodic_orbits(double kappa, int period,
                                                const ThetaPhiGrid& seeds = ThetaPhiGrid(40, 80),
                                                Execution exec = Execution::parallel,
                                                const OrbitSearchOptions& options = {});

}  // namespace kicktop
