#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kicktop/analysis.hpp"
#include "kicktop/classical_dynamics.hpp"
#include "kicktop/quantum_dynamics.hpp"

namespace kicktop {

/// Invalid configuration. Maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure reading or writing a file. Maps to exit code 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KappaRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  /// start, start + step, ... up to stop (inclusive within step * 1e-9).
  std::vector<double> values() const;
  friend bool operator==(const KappaRange&, const KappaRange&) = default;
};

/// Everything needed to reproduce one run. Indices in `group` and
/// `eigenstate` are one-based, as on the command line.
struct RunConfig {
  std::string command;
  double j = 1.0;
  double kappa = 2.5;
  std::optional<KappaRange> kappa_range;
  int n_theta = 100;
  int n_phi = 200;
  std::optional<std::int64_t> n_total;
  std::optional<std::int64_t> n_transient;
  std::vector<std::string> measures;
  std::vector<std::string> pairs;
  int eigenstate = 1;
  std::vector<Quadruple> group;
  double phi0 = -0.666018;
  int samples = kDefaultSliceSamples;
  double theta = 1.2;
  double phi = 0.3;
  std::vector<std::pair<double, double>> seeds;
  int period = 1;
  int seed_n_theta = 40;
  int seed_n_phi = 80;
  double resonance_tolerance = kDefaultResonanceTolerance;
  std::string output = "-";
  bool area_weight = false;
  bool husimi_normalize = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline constexpr double kMaxSpin = 64.0;
inline constexpr int kMaxGridSide = 4096;

/// Range and consistency checks for `config.command`. Throws ConfigError.
void validate(const RunConfig& config);

std::string config_to_json(const RunConfig& config);
/// Throws ConfigError on malformed input or unknown keys.
RunConfig config_from_json(const std::string& text);

/// "100x200" -> (100, 200).
std::pair<int, int> parse_grid(const std::string& text);
/// "a:b:step".
KappaRange parse_kappa_range(const std::string& text);
/// "k:l:p:q" (one-based).
Quadruple parse_quadruple(const std::string& text);
/// "theta:phi".
std::pair<double, double> parse_seed(const std::string& text);

/// Resolves "sq" to sq-exact for j = 1 and sq-finite otherwise.
Measure resolve_measure(const std::string& name, double j);

/// %.17g, so that every double round-trips.
std::string format_double(double v);

void write_field_csv(const FieldMap& map, std::ostream& out);
void write_butterfly_csv(const ButterflyGrid& grid, std::ostream& out);
void write_kappa_profile_csv(const KappaProfile& profile, std::ostream& out);
void write_slice_csv(const SliceTable& table, std::ostream& out);
/// Adds a leading seed column when there is more than one trajectory.
void write_trajectory_csv(const std::vector<Trajectory>& trajectories, std::ostream& out);
void write_distance_csv(const std::vector<DistanceRow>& rows, std::ostream& out);
void write_spectrum_csv(const FloquetDecomposition& dec, std::ostream& out);
void write_orbits_csv(const std::vector<PeriodicOrbit>& orbits, std::ostream& out);

struct RunMetadata {
  double wall_time_seconds = 0.0;
  std::size_t rows = 0;
  std::vector<std::size_t> failed_cells;
  int threads = 1;
};

/// Sidecar JSON: config echo, version, UTC timestamp, wall time, rows,
/// failed cells.
std::string metadata_json(const RunConfig& config, const RunMetadata& meta);

/// Writes `payload` to `path`, or to stdout when path is "-". Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& payload);

std::string version_string();

}  // namespace kicktop
