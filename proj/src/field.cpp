#include "kicktop/field.hpp"

#include <algorithm>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kicktop/parallel.hpp"

namespace kicktop {

ThetaPhiGrid::ThetaPhiGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 2 || n_phi < 2) {
    throw std::invalid_argument("grid: need at least 2 points per axis, got " +
                                std::to_string(n_theta) + "x" + std::to_string(n_phi));
  }
}

double ThetaPhiGrid::d_theta() const { return std::numbers::pi / n_theta_; }
double ThetaPhiGrid::d_phi() const { return 2.0 * std::numbers::pi / n_phi_; }
double ThetaPhiGrid::theta(int i) const { return (i + 0.5) * d_theta(); }
double ThetaPhiGrid::phi(int k) const { return -std::numbers::pi + (k + 0.5) * d_phi(); }

FieldMap::FieldMap(ThetaPhiGrid g, std::string label_)
    : grid(g), values(g.size(), 0.0), error_mask(g.size(), 0), label(std::move(label_)) {}

std::size_t FieldMap::failed_cells() const {
  return static_cast<std::size_t>(std::count(error_mask.begin(), error_mask.end(), 1));
}

int configure_threads_from_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("KICKTOP_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace kicktop
