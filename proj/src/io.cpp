#include "kicktop/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#ifndef KICKTOP_VERSION
#define KICKTOP_VERSION "0.0.0"
#endif

namespace kicktop {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands{"scan",  "butterfly", "kappa-profile",  "slice", "distance",
                                      "orbit", "spectrum",  "periodic-orbits"};

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail("invalid " + what + " '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) fail("invalid " + what + " '" + text + "'");
  return v;
}

int parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    fail("invalid " + what + " '" + text + "'");
  }
  if (used != text.size()) fail("invalid " + what + " '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

void require_grid(int n_theta, int n_phi, const std::string& what) {
  if (n_theta < 2 || n_phi < 2 || n_theta > kMaxGridSide || n_phi > kMaxGridSide) {
    fail(what + " must have between 2 and " + std::to_string(kMaxGridSide) + " points per axis");
  }
}

}  // namespace

std::vector<double> KappaRange::values() const {
  std::vector<double> out;
  const double span = stop - start;
  const auto count = static_cast<std::int64_t>(std::floor(span / step + 1e-9));
  for (std::int64_t i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::pair<int, int> parse_grid(const std::string& text) {
  const auto parts = split(text, 'x');
  if (parts.size() != 2) fail("invalid grid '" + text + "', expected NxM");
  return {parse_int(parts[0], "grid"), parse_int(parts[1], "grid")};
}

KappaRange parse_kappa_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) fail("invalid kappa range '" + text + "', expected start:stop:step");
  return {parse_number(parts[0], "kappa range"), parse_number(parts[1], "kappa range"),
          parse_number(parts[2], "kappa range")};
}

Quadruple parse_quadruple(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4) fail("invalid quadruple '" + text + "', expected k:l:p:q");
  return {parse_int(parts[0], "quadruple"), parse_int(parts[1], "quadruple"),
          parse_int(parts[2], "quadruple"), parse_int(parts[3], "quadruple")};
}

std::pair<double, double> parse_seed(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) fail("invalid seed '" + text + "', expected theta:phi");
  return {parse_number(parts[0], "seed"), parse_number(parts[1], "seed")};
}

Measure resolve_measure(const std::string& name, double j) {
  if (name == "sq") return j == 1.0 ? Measure::sq_exact : Measure::sq_finite;
  try {
    return parse_measure(name);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

void validate(const RunConfig& c) {
  if (!kCommands.contains(c.command)) fail("unknown command '" + c.command + "'");
  try {
    Spin::from_value(c.j);
  } catch (const std::invalid_argument&) {
    fail("j must be a positive half-integer, got " + format_double(c.j));
  }
  if (c.j > kMaxSpin) fail("j must not exceed " + format_double(kMaxSpin));
  if (!std::isfinite(c.kappa)) fail("kappa must be finite");
  if (c.kappa_range) {
    const KappaRange& r = *c.kappa_range;
    if (!(r.step > 0.0) || r.stop < r.start) fail("kappa range needs step > 0 and stop >= start");
    if ((r.stop - r.start) / r.step > 1e6) fail("kappa range has more than 1e6 values");
  }
  require_grid(c.n_theta, c.n_phi, "grid");
  require_grid(c.seed_n_theta, c.seed_n_phi, "seed grid");
  if (c.n_total && *c.n_total < 1) fail("n-total must be >= 1");
  if (c.n_transient && *c.n_transient < 0) fail("n-transient must be >= 0");
  if (c.n_total && c.n_transient && *c.n_transient >= *c.n_total) {
    fail("n-transient must be smaller than n-total");
  }
  if (!(c.resonance_tolerance > 0.0)) fail("resonance tolerance must be positive");
  if (c.output.empty()) fail("output path is empty");

  for (const auto& m : c.measures) resolve_measure(m, c.j);
  for (const auto& p : c.pairs) {
    const auto parts = split(p, ':');
    if (parts.size() != 2) fail("invalid pair '" + p + "', expected a:b");
    resolve_measure(parts[0], c.j);
    resolve_measure(parts[1], c.j);
  }

  const int dim = Spin::from_value(c.j).dim();
  const auto needs_measures = [&](std::size_t lo, std::size_t hi) {
    if (c.measures.size() < lo || c.measures.size() > hi) {
      fail(c.command + " takes " +
           (lo == hi ? std::to_string(lo) : "at least " + std::to_string(lo)) + " measure(s)");
    }
  };
  if (c.command == "scan") {
    needs_measures(1, 1);
    const Measure m = resolve_measure(c.measures[0], c.j);
    if (m == Measure::husimi && (c.eigenstate < 1 || c.eigenstate > dim)) {
      fail("eigenstate must be in 1.." + std::to_string(dim));
    }
    if (m == Measure::eterm) {
      if (c.group.empty()) fail("eterm needs a --group");
      for (const auto& q : c.group) {
        for (int idx : {q.k, q.l, q.p, q.q}) {
          if (idx < 1 || idx > dim) fail("group index out of range 1.." + std::to_string(dim));
        }
      }
    }
  } else if (c.command == "slice") {
    needs_measures(1, 64);
    if (c.phi0 == 0.0 || !std::isfinite(c.phi0)) fail("phi0 must be nonzero");
    if (c.samples < 2) fail("samples must be >= 2");
  } else if (c.command == "distance") {
    if (c.pairs.empty()) fail("distance needs --pairs");
    for (double k : c.kappa_range ? c.kappa_range->values() : std::vector<double>{c.kappa}) {
      if (!(k > 0.0 && k <= kDefaultKappaMax)) {
        fail("distance kappa values must lie in (0, " + format_double(kDefaultKappaMax) + "]");
      }
    }
  } else if (c.command == "butterfly" || c.command == "kappa-profile") {
    if (!c.kappa_range) fail(c.command + " needs --kappa-range");
  } else if (c.command == "periodic-orbits") {
    if (c.period < 1 || c.period > 8) fail("period must be in 1..8");
  }
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["j"] = c.j;
  j["kappa"] = c.kappa;
  j["kappa_range"] = c.kappa_range
                         ? json::array({c.kappa_range->start, c.kappa_range->stop, c.kappa_range->step})
                         : json(nullptr);
  j["grid"] = json::array({c.n_theta, c.n_phi});
  j["n_total"] = c.n_total ? json(*c.n_total) : json(nullptr);
  j["n_transient"] = c.n_transient ? json(*c.n_transient) : json(nullptr);
  j["measures"] = c.measures;
  j["pairs"] = c.pairs;
  j["eigenstate"] = c.eigenstate;
  json group = json::array();
  for (const auto& q : c.group) group.push_back({q.k, q.l, q.p, q.q});
  j["group"] = group;
  j["phi0"] = c.phi0;
  j["samples"] = c.samples;
  j["theta"] = c.theta;
  j["phi"] = c.phi;
  json seeds = json::array();
  for (const auto& [t, p] : c.seeds) seeds.push_back({t, p});
  j["seeds"] = seeds;
  j["period"] = c.period;
  j["seed_grid"] = json::array({c.seed_n_theta, c.seed_n_phi});
  j["resonance_tolerance"] = c.resonance_tolerance;
  j["output"] = c.output;
  j["area_weight"] = c.area_weight;
  j["husimi_normalize"] = c.husimi_normalize;
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  static const std::set<std::string> kKeys{
      "command", "j",       "kappa",  "kappa_range", "grid",      "n_total",
      "n_transient", "measures", "pairs", "eigenstate", "group", "phi0",
      "samples", "theta",   "phi",    "seeds",       "period",    "seed_grid",
      "resonance_tolerance", "output", "area_weight", "husimi_normalize"};
  RunConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) fail("config JSON must be an object");
    for (const auto& [key, value] : j.items()) {
      if (!kKeys.contains(key)) fail("unknown config key '" + key + "'");
    }
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("command", c.command);
    get("j", c.j);
    get("kappa", c.kappa);
    if (j.contains("kappa_range") && !j["kappa_range"].is_null()) {
      const auto r = j["kappa_range"].get<std::vector<double>>();
      if (r.size() != 3) fail("kappa_range needs 3 values");
      c.kappa_range = KappaRange{r[0], r[1], r[2]};
    }
    if (j.contains("grid")) {
      const auto g = j["grid"].get<std::vector<int>>();
      if (g.size() != 2) fail("grid needs 2 values");
      c.n_theta = g[0];
      c.n_phi = g[1];
    }
    if (j.contains("n_total") && !j["n_total"].is_null()) c.n_total = j["n_total"].get<std::int64_t>();
    if (j.contains("n_transient") && !j["n_transient"].is_null()) {
      c.n_transient = j["n_transient"].get<std::int64_t>();
    }
    get("measures", c.measures);
    get("pairs", c.pairs);
    get("eigenstate", c.eigenstate);
    if (j.contains("group")) {
      for (const auto& q : j["group"]) {
        const auto v = q.get<std::vector<int>>();
        if (v.size() != 4) fail("group entries need 4 indices");
        c.group.push_back({v[0], v[1], v[2], v[3]});
      }
    }
    get("phi0", c.phi0);
    get("samples", c.samples);
    get("theta", c.theta);
    get("phi", c.phi);
    if (j.contains("seeds")) {
      for (const auto& s : j["seeds"]) {
        const auto v = s.get<std::vector<double>>();
        if (v.size() != 2) fail("seeds need 2 angles");
        c.seeds.emplace_back(v[0], v[1]);
      }
    }
    get("period", c.period);
    if (j.contains("seed_grid")) {
      const auto g = j["seed_grid"].get<std::vector<int>>();
      if (g.size() != 2) fail("seed_grid needs 2 values");
      c.seed_n_theta = g[0];
      c.seed_n_phi = g[1];
    }
    get("resonance_tolerance", c.resonance_tolerance);
    get("output", c.output);
    get("area_weight", c.area_weight);
    get("husimi_normalize", c.husimi_normalize);
  } catch (const json::exception& e) {
    fail(std::string("malformed config JSON: ") + e.what());
  }
  return c;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no "-0" in output
  return buf;
}

void write_field_csv(const FieldMap& map, std::ostream& out) {
  out << "theta,phi,value\n";
  const ThetaPhiGrid& g = map.grid;
  for (int i = 0; i < g.n_theta(); ++i) {
    for (int k = 0; k < g.n_phi(); ++k) {
      out << format_double(g.theta(i)) << ',' << format_double(g.phi(k)) << ','
          << format_double(map.at(i, k)) << '\n';
    }
  }
}

void write_butterfly_csv(const ButterflyGrid& grid, std::ostream& out) {
  out << "kappa,n,S\n";
  for (std::size_t ki = 0; ki < grid.kappa_values.size(); ++ki) {
    for (std::size_t ni = 0; ni < grid.n_values.size(); ++ni) {
      out << format_double(grid.kappa_values[ki]) << ',' << grid.n_values[ni] << ','
          << format_double(grid.at(ki, ni)) << '\n';
    }
  }
}

void write_kappa_profile_csv(const KappaProfile& profile, std::ostream& out) {
  out << "kappa,S_Q,lambda\n";
  for (std::size_t ki = 0; ki < profile.kappa.size(); ++ki) {
    out << format_double(profile.kappa[ki]) << ',' << format_double(profile.s_q[ki]) << ','
        << format_double(profile.lyapunov[ki]) << '\n';
  }
}

void write_slice_csv(const SliceTable& table, std::ostream& out) {
  out << "phi,theta";
  for (const auto& label : table.labels) out << ',' << label;
  out << '\n';
  for (std::size_t r = 0; r < table.phi.size(); ++r) {
    out << format_double(table.phi[r]) << ',' << format_double(table.theta[r]);
    for (const auto& col : table.columns) out << ',' << format_double(col[r]);
    out << '\n';
  }
}

void write_trajectory_csv(const std::vector<Trajectory>& trajectories, std::ostream& out) {
  const bool multi = trajectories.size() > 1;
  out << (multi ? "seed,n,x,y,z,theta,phi\n" : "n,x,y,z,theta,phi\n");
  for (std::size_t s = 0; s < trajectories.size(); ++s) {
    const auto& pts = trajectories[s].points;
    for (std::size_t n = 0; n < pts.size(); ++n) {
      if (multi) out << s << ',';
      out << n << ',' << format_double(pts[n].x()) << ',' << format_double(pts[n].y()) << ','
          << format_double(pts[n].z()) << ',' << format_double(pts[n].theta()) << ','
          << format_double(pts[n].phi()) << '\n';
    }
  }
}

void write_distance_csv(const std::vector<DistanceRow>& rows, std::ostream& out) {
  out << "kappa,pair,D,clamped,status\n";
  for (const auto& r : rows) {
    out << format_double(r.kappa) << ',' << r.pair << ','
        << (r.error ? std::string("nan") : format_double(r.d)) << ',' << r.clamped_cells << ','
        << (r.error ? "error" : "ok") << '\n';
  }
}

void write_spectrum_csv(const FloquetDecomposition& dec, std::ostream& out) {
  out << "index,eigenphase";
  for (int c = 0; c < dec.dim(); ++c) out << ",re" << c + 1 << ",im" << c + 1;
  out << '\n';
  for (int k = 0; k < dec.dim(); ++k) {
    out << k + 1 << ',' << format_double(dec.eigenphases(k));
    for (int c = 0; c < dec.dim(); ++c) {
      const Complex z = dec.eigenvectors(c, k);
      out << ',' << format_double(z.real()) << ',' << format_double(z.imag());
    }
    out << '\n';
  }
}

void write_orbits_csv(const std::vector<PeriodicOrbit>& orbits, std::ostream& out) {
  out << "orbit,period,stability,stable,point,x,y,z,theta,phi\n";
  for (std::size_t o = 0; o < orbits.size(); ++o) {
    const auto& orbit = orbits[o];
    for (std::size_t p = 0; p < orbit.cycle.size(); ++p) {
      const auto& s = orbit.cycle[p];
      out << o + 1 << ',' << orbit.period << ',' << format_double(orbit.stability) << ','
          << (orbit.stable ? 1 : 0) << ',' << p << ',' << format_double(s.x()) << ','
          << format_double(s.y()) << ',' << format_double(s.z()) << ','
          << format_double(s.theta()) << ',' << format_double(s.phi()) << '\n';
    }
  }
}

std::string version_string() { return KICKTOP_VERSION; }

std::string metadata_json(const RunConfig& config, const RunMetadata& meta) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);

  json j;
  j["config"] = json::parse(config_to_json(config));
  j["version"] = version_string();
  j["timestamp"] = stamp;
  j["wall_time_seconds"] = meta.wall_time_seconds;
  j["rows"] = meta.rows;
  j["threads"] = meta.threads;
  j["failed_cells"] = meta.failed_cells;
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& payload) {
  if (path == "-") {
    std::cout << payload;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << payload;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace kicktop
