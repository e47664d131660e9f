#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "kicktop/parallel.hpp"

namespace kicktop {

/// Cell-centred uniform grid over theta in [0, pi), phi in [-pi, pi).
class ThetaPhiGrid {
 public:
  ThetaPhiGrid(int n_theta, int n_phi);

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  std::size_t size() const { return static_cast<std::size_t>(n_theta_) * n_phi_; }

  double d_theta() const;
  double d_phi() const;
  double theta(int i) const;
  double phi(int k) const;

  /// Row-major, theta outer.
  std::size_t index(int i, int k) const { return static_cast<std::size_t>(i) * n_phi_ + k; }
  int theta_index(std::size_t cell) const { return static_cast<int>(cell / n_phi_); }
  int phi_index(std::size_t cell) const { return static_cast<int>(cell % n_phi_); }

  friend bool operator==(const ThetaPhiGrid&, const ThetaPhiGrid&) = default;

 private:
  int n_theta_;
  int n_phi_;
};

/// A scalar sampled on a ThetaPhiGrid. Cells whose evaluation failed carry
/// value 0 and error_mask 1.
struct FieldMap {
  ThetaPhiGrid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> error_mask;
  std::string label;
  std::map<std::string, double> params;

  FieldMap(ThetaPhiGrid g, std::string label_);

  double& at(int i, int k) { return values[grid.index(i, k)]; }
  double at(int i, int k) const { return values[grid.index(i, k)]; }
  std::size_t failed_cells() const;
};

/// Evaluates eval(theta, phi) at every cell. A throwing or non-finite
/// evaluation marks the cell in error_mask instead of aborting the scan.
template <class Eval>
void fill_field(FieldMap& map, Execution exec, Eval&& eval) {
  const ThetaPhiGrid& g = map.grid;
  for_each_index(g.size(), exec, [&](std::size_t cell) {
    const double theta = g.theta(g.theta_index(cell));
    const double phi = g.phi(g.phi_index(cell));
    try {
      const double v = eval(theta, phi);
      if (std::isfinite(v)) {
        map.values[cell] = v;
        return;
      }
    } catch (const std::exception&) {
    }
    map.values[cell] = 0.0;
    map.error_mask[cell] = 1;
  });
}

}  // namespace kicktop
