#include "kicktop/cli.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

namespace kicktop {

namespace {

ScanParams scan_params(const RunConfig& c) {
  ScanParams p;
  p.j = c.j;
  p.kappa = c.kappa;
  if (c.n_total) {
    p.entropy_kicks = *c.n_total;
    p.lyapunov_kicks = *c.n_total;
    p.ignorance_kicks = *c.n_total;
  }
  if (c.n_transient) {
    p.lyapunov_transient = *c.n_transient;
    p.ignorance_transient = *c.n_transient;
  }
  p.resonance_tolerance = c.resonance_tolerance;
  p.eigenstate = c.eigenstate - 1;
  p.husimi_normalize = c.husimi_normalize;
  for (const auto& q : c.group) p.eterm_group.push_back({q.k - 1, q.l - 1, q.p - 1, q.q - 1});
  return p;
}

std::vector<double> kappa_axis(const RunConfig& c) {
  return c.kappa_range ? c.kappa_range->values() : std::vector<double>{c.kappa};
}

void collect_failures(const FieldMap& map, RunMetadata& meta) {
  for (std::size_t cell = 0; cell < map.error_mask.size(); ++cell) {
    if (map.error_mask[cell]) meta.failed_cells.push_back(cell);
  }
}

}  // namespace

std::optional<RunConfig> parse_command_line(const std::vector<std::string>& args,
                                            std::ostream& out) {
  RunConfig c;
  CLI::App app{"Quantum and classical kicked-top simulations.", "kicktop"};
  app.set_version_flag("--version", version_string());
  app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
  app.allow_config_extras(false);
  app.get_formatter()->column_width(34);

  std::string grid = "100x200";
  std::string seed_grid = "40x80";
  std::string kappa_range;
  std::vector<std::string> group;
  std::vector<std::string> seeds;

  app.add_option("command", c.command,
                 "scan | butterfly | kappa-profile | slice | distance | orbit | spectrum | periodic-orbits")
      ->required();
  app.add_option("--j", c.j, "Spin quantum number (half-integer)")->capture_default_str();
  app.add_option("--kappa", c.kappa, "Kick strength")->capture_default_str();
  app.add_option("--kappa-range", kappa_range, "Kick strengths start:stop:step");
  app.add_option("--grid", grid, "Theta x phi cells, NxM")->capture_default_str();
  app.add_option("--n-total", c.n_total,
                 "Kicks per trajectory (defaults: sq-finite 200, lyap 2600, ic 10000, "
                 "butterfly 200, orbit 1000)");
  app.add_option("--n-transient", c.n_transient,
                 "Discarded kicks (defaults: lyap 100, ic 0)");
  app.add_option("--measure,--measures", c.measures,
                 "sq sq-exact sq-finite iq rq ic lyap husimi eterm")
      ->delimiter(',');
  app.add_option("--pairs", c.pairs, "Distance pairs a:b, comma separated")->delimiter(',');
  app.add_option("--eigenstate", c.eigenstate, "Floquet eigenstate for husimi (1-based)")
      ->capture_default_str();
  app.add_option("--group", group, "E-term quadruples k:l:p:q (1-based), comma separated")
      ->delimiter(',');
  app.add_option("--phi0", c.phi0, "Slice line theta = (pi/2)(phi/phi0 + 1)")
      ->capture_default_str();
  app.add_option("--samples", c.samples, "Points along the slice")->capture_default_str();
  app.add_option("--theta", c.theta, "Initial theta")->capture_default_str();
  app.add_option("--phi", c.phi, "Initial phi")->capture_default_str();
  app.add_option("--seeds", seeds, "Orbit seeds theta:phi, comma separated")->delimiter(',');
  app.add_option("--period", c.period, "Orbit period to search (1..8)")->capture_default_str();
  app.add_option("--seed-grid", seed_grid, "Newton seed grid NxM")->capture_default_str();
  app.add_option("--resonance-tol", c.resonance_tolerance, "Resonance tolerance (rad)")
      ->capture_default_str();
  app.add_option("--output,-o", c.output, "CSV path, '-' for stdout")->capture_default_str();
  app.add_flag("--area-weight", c.area_weight, "Weight distance traces by sin(theta)");
  app.add_flag("--husimi-normalize", c.husimi_normalize, "Scale Husimi maps by (2j+1)/(4 pi)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << '\n';
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  std::tie(c.n_theta, c.n_phi) = parse_grid(grid);
  std::tie(c.seed_n_theta, c.seed_n_phi) = parse_grid(seed_grid);
  if (!kappa_range.empty()) c.kappa_range = parse_kappa_range(kappa_range);
  for (const auto& g : group) c.group.push_back(parse_quadruple(g));
  for (const auto& s : seeds) c.seeds.push_back(parse_seed(s));
  validate(c);
  return c;
}

RunMetadata run(const RunConfig& c, std::ostream& log) {
  validate(c);
  const auto start = std::chrono::steady_clock::now();
  RunMetadata meta;
  meta.threads = configure_threads_from_env();
  const Execution exec = Execution::parallel;
  const ScanParams params = scan_params(c);
  const ThetaPhiGrid grid(c.n_theta, c.n_phi);
  std::ostringstream payload;

  if (c.command == "scan") {
    const Measure m = resolve_measure(c.measures.front(), c.j);
    const FieldMap map = scan_field(m, grid, params, exec);
    collect_failures(map, meta);
    write_field_csv(map, payload);
    meta.rows = grid.size();
  } else if (c.command == "butterfly") {
    std::vector<std::int64_t> n_axis(static_cast<std::size_t>(c.n_total.value_or(200)) + 1);
    for (std::size_t n = 0; n < n_axis.size(); ++n) n_axis[n] = static_cast<std::int64_t>(n);
    const auto kappas = kappa_axis(c);
    const ButterflyGrid b = butterfly(c.theta, c.phi, c.j, kappas, n_axis, exec);
    write_butterfly_csv(b, payload);
    meta.rows = b.values.size();
  } else if (c.command == "kappa-profile") {
    const KappaProfile profile = kappa_profile(c.theta, c.phi, kappa_axis(c), params, exec);
    write_kappa_profile_csv(profile, payload);
    meta.rows = profile.kappa.size();
  } else if (c.command == "slice") {
    std::vector<FieldMap> fields;
    for (const auto& name : c.measures) {
      fields.push_back(scan_field(resolve_measure(name, c.j), grid, params, exec));
      collect_failures(fields.back(), meta);
    }
    const SliceTable table = slice(fields, c.phi0, c.samples);
    write_slice_csv(table, payload);
    meta.rows = table.phi.size();
  } else if (c.command == "distance") {
    std::vector<MeasurePair> pairs;
    for (const auto& p : c.pairs) {
      const auto colon = p.find(':');
      pairs.push_back({resolve_measure(p.substr(0, colon), c.j),
                       resolve_measure(p.substr(colon + 1), c.j)});
    }
    const auto rows = distance_sweep(pairs, kappa_axis(c), grid, params, c.area_weight,
                                     kDefaultKappaMax, exec);
    for (const auto& r : rows) {
      if (r.error) log << "kappa " << format_double(r.kappa) << ' ' << r.pair << ": " << *r.error << '\n';
    }
    write_distance_csv(rows, payload);
    meta.rows = rows.size();
  } else if (c.command == "orbit") {
    std::vector<std::pair<double, double>> seeds = c.seeds;
    if (seeds.empty()) seeds.emplace_back(c.theta, c.phi);
    const auto trajectories = poincare_section(seeds, c.kappa, c.n_total.value_or(1000), exec);
    write_trajectory_csv(trajectories, payload);
    meta.rows = trajectories.size() * trajectories.front().points.size();
  } else if (c.command == "spectrum") {
    const FloquetDecomposition dec = floquet_decompose(make_spin_system(c.j), c.kappa);
    write_spectrum_csv(dec, payload);
    meta.rows = static_cast<std::size_t>(dec.dim());
  } else if (c.command == "periodic-orbits") {
    const auto orbits =
        find_periodic_orbits(c.kappa, c.period, ThetaPhiGrid(c.seed_n_theta, c.seed_n_phi), exec);
    write_orbits_csv(orbits, payload);
    for (const auto& o : orbits) meta.rows += o.cycle.size();
  }

  meta.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text_file(c.output, payload.str());
  if (c.output != "-") write_text_file(c.output + ".meta.json", metadata_json(c, meta));
  log << c.command << ": " << meta.rows << " rows, " << meta.failed_cells.size()
      << " failed cells, " << meta.wall_time_seconds << " s, " << meta.threads << " threads\n";
  return meta;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  std::optional<RunConfig> config;
  try {
    config = parse_command_line(args, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "kicktop: config error: " << e.what() << '\n';
    return 2;
  }
  if (!config) return 0;
  try {
    run(*config, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "kicktop: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "kicktop: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace kicktop
