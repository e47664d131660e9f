#include "kicktop/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "kicktop/classical_dynamics.hpp"

namespace kicktop {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::pair<Measure, std::string_view>, 8> kMeasureNames{{
    {Measure::sq_exact, "sq-exact"},
    {Measure::sq_finite, "sq-finite"},
    {Measure::iq, "iq"},
    {Measure::rq, "rq"},
    {Measure::ic, "ic"},
    {Measure::lyapunov, "lyap"},
    {Measure::husimi, "husimi"},
    {Measure::eterm, "eterm"},
}};

}  // namespace

std::string_view measure_name(Measure m) {
  for (const auto& [measure, name] : kMeasureNames)
    if (measure == m) return name;
  throw std::invalid_argument("unknown measure");
}

Measure parse_measure(std::string_view name) {
  for (const auto& [measure, known] : kMeasureNames)
    if (known == name) return measure;
  throw std::invalid_argument("unknown measure '" + std::string(name) + "'");
}

FieldMap scan_field(Measure measure, const ThetaPhiGrid& grid, const ScanParams& params,
                    Execution exec) {
  const SpinSystem sys = make_spin_system(params.j);
  FieldMap map(grid, std::string(measure_name(measure)));
  map.params["j"] = params.j;
  map.params["kappa"] = params.kappa;

  switch (measure) {
    case Measure::sq_exact:
    case Measure::iq:
    case Measure::rq: {
      const TimeAveragedEntropy averages(sys, floquet_decompose(sys, params.kappa),
                                         params.resonance_tolerance);
      map.params["resonance_tolerance"] = params.resonance_tolerance;
      fill_field(map, exec, [&](double theta, double phi) {
        const EntropyAverages e = averages(theta, phi);
        return measure == Measure::sq_exact ? e.s_q : measure == Measure::iq ? e.i_q : e.r_q;
      });
      break;
    }
    case Measure::sq_finite: {
      const UnitaryMatrix u = floquet_operator(sys, params.kappa);
      map.params["n_total"] = static_cast<double>(params.entropy_kicks);
      fill_field(map, exec, [&](double theta, double phi) {
        return finite_time_average_entropy(sys, u, theta, phi, params.entropy_kicks);
      });
      break;
    }
    case Measure::ic:
      map.params["n_total"] = static_cast<double>(params.ignorance_kicks);
      map.params["n_transient"] = static_cast<double>(params.ignorance_transient);
      fill_field(map, exec, [&](double theta, double phi) {
        return classical_ignorance(theta, phi, params.kappa, params.ignorance_kicks,
                                   params.ignorance_transient);
      });
      break;
    case Measure::lyapunov:
      map.params["n_total"] = static_cast<double>(params.lyapunov_kicks);
      map.params["n_transient"] = static_cast<double>(params.lyapunov_transient);
      fill_field(map, exec, [&](double theta, double phi) {
        return lyapunov_finite_time(theta, phi, params.kappa, params.lyapunov_kicks,
                                    params.lyapunov_transient);
      });
      break;
    case Measure::husimi: {
      FieldMap h = husimi_map(sys, floquet_decompose(sys, params.kappa), params.eigenstate, grid,
                              params.husimi_normalize, exec);
      h.label = map.label;
      h.params.insert(map.params.begin(), map.params.end());
      return h;
    }
    case Measure::eterm: {
      const TimeAveragedEntropy averages(sys, floquet_decompose(sys, params.kappa),
                                         params.resonance_tolerance);
      FieldMap e = eterm_map(averages, params.eterm_group, grid, exec);
      e.label = map.label;
      e.params.insert(map.params.begin(), map.params.end());
      return e;
    }
  }
  return map;
}

ButterflyGrid butterfly(double theta, double phi, double j, std::span<const double> kappa_axis,
                        std::span<const std::int64_t> n_axis, Execution exec) {
  if (kappa_axis.empty() || n_axis.empty()) throw std::invalid_argument("butterfly: empty axis");
  if (std::any_of(n_axis.begin(), n_axis.end(), [](std::int64_t n) { return n < 0; })) {
    throw std::invalid_argument("butterfly: negative kick count");
  }
  const SpinSystem sys = make_spin_system(j);
  ButterflyGrid out;
  out.kappa_values.assign(kappa_axis.begin(), kappa_axis.end());
  out.n_values.assign(n_axis.begin(), n_axis.end());
  out.values.assign(kappa_axis.size() * n_axis.size(), 0.0);
  out.theta = theta;
  out.phi = phi;
  out.j = sys.spin();
  const bool closed_form = sys.spin().two_j() == 2;
  const std::int64_t n_max = *std::max_element(n_axis.begin(), n_axis.end());

  for_each_index(kappa_axis.size(), exec, [&](std::size_t ki) {
    const double kappa = kappa_axis[ki];
    double* row = out.values.data() + ki * n_axis.size();
    if (closed_form) {
      for (std::size_t ni = 0; ni < n_axis.size(); ++ni) {
        row[ni] = std::clamp(linear_entropy_from_expectations(
                                 closed_form_j1_expectations(theta, phi, kappa, n_axis[ni]), 1.0),
                             0.0, 0.5);
      }
      return;
    }
    // Matrix evolution: one pass to the largest requested n.
    std::vector<double> s_of_n(static_cast<std::size_t>(n_max) + 1);
    const UnitaryMatrix u = floquet_operator(sys, kappa);
    QuantumState psi = coherent_state(sys, theta, phi);
    s_of_n[0] = linear_entropy(sys, psi);
    for (std::int64_t n = 1; n <= n_max; ++n) {
      psi = apply(u, psi);
      s_of_n[static_cast<std::size_t>(n)] = linear_entropy(sys, psi);
    }
    for (std::size_t ni = 0; ni < n_axis.size(); ++ni) {
      row[ni] = s_of_n[static_cast<std::size_t>(n_axis[ni])];
    }
  });
  return out;
}

KappaProfile kappa_profile(double theta, double phi, std::span<const double> kappa_axis,
                           const ScanParams& params, Execution exec) {
  if (params.entropy_kicks < 1) throw std::invalid_argument("kappa profile: need entropy_kicks >= 1");
  // Checked here: an exception escaping the OpenMP loop would abort.
  if (params.lyapunov_transient < 0 || params.lyapunov_transient >= params.lyapunov_kicks) {
    throw std::invalid_argument("kappa profile: need 0 <= lyapunov_transient < lyapunov_kicks");
  }
  std::vector<std::int64_t> n_axis(static_cast<std::size_t>(params.entropy_kicks));
  for (std::size_t n = 0; n < n_axis.size(); ++n) n_axis[n] = static_cast<std::int64_t>(n) + 1;
  const ButterflyGrid rows = butterfly(theta, phi, params.j, kappa_axis, n_axis, exec);
  KappaProfile out;
  out.kappa = rows.kappa_values;
  out.s_q.assign(kappa_axis.size(), 0.0);
  out.lyapunov.assign(kappa_axis.size(), 0.0);
  for_each_index(kappa_axis.size(), exec, [&](std::size_t ki) {
    double sum = 0.0;
    for (std::size_t ni = 0; ni < n_axis.size(); ++ni) sum += rows.at(ki, ni);
    out.s_q[ki] = sum / static_cast<double>(n_axis.size());
    out.lyapunov[ki] = lyapunov_finite_time(theta, phi, kappa_axis[ki], params.lyapunov_kicks,
                                            params.lyapunov_transient);
  });
  return out;
}

double sample_bilinear(const FieldMap& field, double theta, double phi) {
  const ThetaPhiGrid& g = field.grid;
  const double fi = std::clamp(theta / g.d_theta() - 0.5, 0.0, g.n_theta() - 1.0);
  const int i0 = std::min(static_cast<int>(std::floor(fi)), g.n_theta() - 1);
  const int i1 = std::min(i0 + 1, g.n_theta() - 1);
  const double wi = fi - i0;

  const double fk = (phi + kPi) / g.d_phi() - 0.5;
  const double fk_floor = std::floor(fk);
  const double wk = fk - fk_floor;
  const int n = g.n_phi();
  const int k0 = ((static_cast<int>(fk_floor) % n) + n) % n;
  const int k1 = (k0 + 1) % n;

  return (1.0 - wi) * ((1.0 - wk) * field.at(i0, k0) + wk * field.at(i0, k1)) +
         wi * ((1.0 - wk) * field.at(i1, k0) + wk * field.at(i1, k1));
}

SliceTable slice(std::span<const FieldMap> fields, double phi0, int n_samples) {
  if (phi0 == 0.0 || !std::isfinite(phi0)) throw std::invalid_argument("slice: phi0 must be nonzero");
  if (n_samples < 2) throw std::invalid_argument("slice: need at least 2 samples");
  // theta in [0, pi] <=> phi in [-|phi0|, |phi0|]; also clip to the phi domain.
  const double half_width = std::min(std::abs(phi0), kPi);
  SliceTable table;
  for (const auto& f : fields) {
    table.labels.push_back(f.label);
    table.columns.emplace_back();
  }
  for (int s = 0; s < n_samples; ++s) {
    const double phi = -half_width + 2.0 * half_width * s / (n_samples - 1);
    const double theta = std::clamp(0.5 * kPi * (phi / phi0 + 1.0), 0.0, kPi);
    table.phi.push_back(phi);
    table.theta.push_back(theta);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      table.columns[c].push_back(sample_bilinear(fields[c], theta, phi));
    }
  }
  return table;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson: need two equal-length samples of size >= 2");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw std::domain_error("pearson: constant sample");
  return sab / std::sqrt(saa * sbb);
}

double central_third_correlation(const SliceTable& table, std::size_t column_a,
                                 std::size_t column_b) {
  const std::size_t n = table.phi.size();
  const std::size_t lo = n / 3;
  const std::size_t hi = n - n / 3;
  const std::span<const double> a(table.columns.at(column_a));
  const std::span<const double> b(table.columns.at(column_b));
  return pearson_correlation(a.subspan(lo, hi - lo), b.subspan(lo, hi - lo));
}

double field_trace(const FieldMap& f, bool area_weight) {
  const ThetaPhiGrid& g = f.grid;
  double sum = 0.0;
  for (int i = 0; i < g.n_theta(); ++i) {
    const double w = area_weight ? std::sin(g.theta(i)) : 1.0;
    double row = 0.0;
    for (int k = 0; k < g.n_phi(); ++k) row += f.at(i, k);
    sum += w * row;
  }
  return sum * g.d_theta() * g.d_phi();
}

double distance(const FieldMap& f, const FieldMap& g, bool area_weight) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("distance: fields are on different grids");
  for (const FieldMap* m : {&f, &g}) {
    if (m->failed_cells() > 0) {
      throw std::domain_error("distance: field '" + m->label + "' has failed cells");
    }
    if (std::any_of(m->values.begin(), m->values.end(), [](double v) { return v < 0.0; })) {
      throw std::domain_error("distance: field '" + m->label + "' has negative values");
    }
  }
  FieldMap product(f.grid, f.label + "*" + g.label);
  for (std::size_t c = 0; c < product.values.size(); ++c) product.values[c] = f.values[c] * g.values[c];
  const double tfg = field_trace(product, area_weight);
  if (!(tfg > 0.0)) throw std::domain_error("distance: Tr(fg) is not positive");
  return std::log(field_trace(f, area_weight) * field_trace(g, area_weight) / tfg);
}

std::size_t clamp_negative(FieldMap& f) {
  std::size_t count = 0;
  for (double& v : f.values) {
    if (v < 0.0) {
      v = 0.0;
      ++count;
    }
  }
  return count;
}

std::vector<DistanceRow> distance_sweep(std::span<const MeasurePair> pairs,
                                        std::span<const double> kappa_axis,
                                        const ThetaPhiGrid& grid, const ScanParams& params,
                                        bool area_weight, double kappa_max, Execution exec) {
  for (double kappa : kappa_axis) {
    if (!(kappa > 0.0 && kappa <= kappa_max)) {
      throw std::invalid_argument("distance sweep: kappa " + std::to_string(kappa) +
                                  " outside (0, " + std::to_string(kappa_max) + "]");
    }
  }
  std::vector<DistanceRow> rows;
  for (double kappa : kappa_axis) {
    ScanParams p = params;
    p.kappa = kappa;
    std::map<Measure, FieldMap> maps;
    std::map<Measure, std::size_t> clamped;
    for (const MeasurePair& pair : pairs) {
      for (Measure m : {pair.first, pair.second}) {
        if (maps.contains(m)) continue;
        FieldMap f = scan_field(m, grid, p, exec);
        clamped[m] = m == Measure::lyapunov ? clamp_negative(f) : 0;
        maps.emplace(m, std::move(f));
      }
    }
    for (const MeasurePair& pair : pairs) {
      DistanceRow row;
      row.kappa = kappa;
      row.pair = std::string(measure_name(pair.first)) + ":" + std::string(measure_name(pair.second));
      row.clamped_cells = clamped[pair.first] + (pair.first == pair.second ? 0 : clamped[pair.second]);
      try {
        row.d = distance(maps.at(pair.first), maps.at(pair.second), area_weight);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace kicktop
