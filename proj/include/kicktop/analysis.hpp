#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kicktop/field.hpp"
#include "kicktop/parallel.hpp"
#include "kicktop/quantum_dynamics.hpp"
#include "kicktop/spin_algebra.hpp"

namespace kicktop {

enum class Measure { sq_exact, sq_finite, iq, rq, ic, lyapunov, husimi, eterm };

/// CLI spelling: sq-exact, sq-finite, iq, rq, ic, lyap, husimi, eterm.
std::string_view measure_name(Measure m);
/// Inverse of measure_name; throws std::invalid_argument on unknown names.
Measure parse_measure(std::string_view name);

struct ScanParams {
  double j = 1.0;
  double kappa = 2.5;
  std::int64_t entropy_kicks = 200;
  std::int64_t lyapunov_kicks = 2600;
  std::int64_t lyapunov_transient = 100;
  std::int64_t ignorance_kicks = 10000;
  std::int64_t ignorance_transient = 0;
  double resonance_tolerance = kDefaultResonanceTolerance;
  int eigenstate = 0;  // zero-based, Husimi only
  bool husimi_normalize = false;
  std::vector<Quadruple> eterm_group;
};

/// Evaluates one measure at every grid cell. Cells that fail are flagged in
/// the map's error_mask. Output does not depend on `exec`.
FieldMap scan_field(Measure measure, const ThetaPhiGrid& grid, const ScanParams& params,
                    Execution exec = Execution::parallel);

/// S(kappa, n) for a fixed initial condition.
struct ButterflyGrid {
  std::vector<double> kappa_values;
  std::vector<std::int64_t> n_values;
  std::vector<double> values;  // kappa outer, n inner
  double theta = 0.0;
  double phi = 0.0;
  Spin j{2};

  double at(std::size_t kappa_index, std::size_t n_index) const {
    return values[kappa_index * n_values.size() + n_index];
  }
};

/// Uses the closed-form j = 1 expectations when j == 1, matrix evolution
/// otherwise.
ButterflyGrid butterfly(double theta, double phi, double j, std::span<const double> kappa_axis,
                        std::span<const std::int64_t> n_axis,
                        Execution exec = Execution::parallel);

/// S_Q and lambda against kappa for one initial condition. S_Q is the mean of
/// the butterfly row over n = 1..entropy_kicks; lambda uses the Lyapunov
/// kick counts from params.
struct KappaProfile {
  std::vector<double> kappa;
  std::vector<double> s_q;
  std::vector<double> lyapunov;
};

KappaProfile kappa_profile(double theta, double phi, std::span<const double> kappa_axis,
                           const ScanParams& params, Execution exec = Execution::parallel);

/// Bilinear interpolation of a cell-centred field, periodic in phi and
/// clamped at the first/last theta rows.
double sample_bilinear(const FieldMap& field, double theta, double phi);

struct SliceTable {
  std::vector<double> phi;
  std::vector<double> theta;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> columns;  // one per label, aligned with phi
};

inline constexpr int kDefaultSliceSamples = 201;

/// Samples each field along theta = (pi/2)(phi/phi0 + 1), phi evenly spaced
/// over the part of the line inside the domain.
SliceTable slice(std::span<const FieldMap> fields, double phi0,
                 int n_samples = kDefaultSliceSamples);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of two slice columns restricted to the central third
/// of the samples.
double central_third_correlation(const SliceTable& table, std::size_t column_a,
                                 std::size_t column_b);

/// Riemann sum over cells with weight d_theta d_phi (times sin(theta) when
/// area_weight).
double field_trace(const FieldMap& f, bool area_weight = false);

/// D(f, g) = ln[Tr f Tr g / Tr(f g)]. Throws std::invalid_argument for
/// mismatched grids and std::domain_error for negative values, flagged
/// cells, or Tr(f g) <= 0.
double distance(const FieldMap& f, const FieldMap& g, bool area_weight = false);

/// Sets negative values to 0 and returns how many were changed.
std::size_t clamp_negative(FieldMap& f);

struct MeasurePair {
  Measure first;
  Measure second;
};

struct DistanceRow {
  double kappa = 0.0;
  std::string pair;  // "first:second"
  double d = 0.0;
  std::size_t clamped_cells = 0;
  std::optional<std::string> error;
};

inline constexpr double kDefaultKappaMax = 4.0;

/// D for every pair at every kappa. Lyapunov maps are clamped at zero
/// before use; any other failure is reported in the row's error field.
/// Throws std::invalid_argument for kappa outside (0, kappa_max].
std::vector<DistanceRow> distance_sweep(std::span<const MeasurePair> pairs,
                                        std::span<const double> kappa_axis,
                                        const ThetaPhiGrid& grid, const ScanParams& params,
                                        bool area_weight = false,
                                        double kappa_max = kDefaultKappaMax,
                                        Execution exec = Execution::parallel);

}  // namespace kicktop
