#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kicktop/analysis.hpp"
#include "kicktop/classical_dynamics.hpp"
#include "oracles.hpp"

using namespace kicktop;

namespace {

constexpr double kPi = std::numbers::pi;

FieldMap constant_field(const ThetaPhiGrid& g, double v, const std::string& label = "c") {
  FieldMap f(g, label);
  std::fill(f.values.begin(), f.values.end(), v);
  return f;
}

FieldMap random_field(const ThetaPhiGrid& g, std::mt19937_64& rng) {
  FieldMap f(g, "r");
  for (double& v : f.values) v = oracle::uniform(rng, 0.0, 1.0);
  return f;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("grid") {
  const ThetaPhiGrid g(4, 8);
  CHECK(g.theta(0) == doctest::Approx(kPi / 8));
  CHECK(g.phi(0) == doctest::Approx(-kPi + kPi / 8));
  for (int i = 1; i < 4; ++i) CHECK(g.theta(i) > g.theta(i - 1));
  for (int k = 1; k < 8; ++k) CHECK(g.phi(k) > g.phi(k - 1));
  CHECK(g.theta(3) < kPi);
  CHECK(g.phi(7) < kPi);
  CHECK(g.index(2, 3) == 19);
  CHECK(g.theta_index(19) == 2);
  CHECK(g.phi_index(19) == 3);
  CHECK_THROWS_AS(ThetaPhiGrid(1, 8), std::invalid_argument);
}

TEST_CASE("measure names round-trip") {
  for (Measure m : {Measure::sq_exact, Measure::sq_finite, Measure::iq, Measure::rq, Measure::ic,
                    Measure::lyapunov, Measure::husimi, Measure::eterm}) {
    CHECK(parse_measure(measure_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_measure("entropy"), std::invalid_argument);
}

TEST_CASE("scan_field") {
  const ThetaPhiGrid grid(12, 24);
  ScanParams p;
  SUBCASE("S_Q is zero at kappa = 0") {
    p.kappa = 0.0;
    const FieldMap f = scan_field(Measure::sq_exact, grid, p);
    for (double v : f.values) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("S_Q is 2 pi periodic in kappa") {
    p.kappa = 0.5;
    const FieldMap a = scan_field(Measure::sq_exact, grid, p);
    p.kappa = 0.5 + 2 * kPi;
    const FieldMap b = scan_field(Measure::sq_exact, grid, p);
    for (std::size_t c = 0; c < a.values.size(); ++c) CHECK(std::abs(a.values[c] - b.values[c]) < 1e-10);
  }
  SUBCASE("I_Q + R_Q = S_Q map-wise") {
    const FieldMap s = scan_field(Measure::sq_exact, grid, p);
    const FieldMap i = scan_field(Measure::iq, grid, p);
    const FieldMap r = scan_field(Measure::rq, grid, p);
    for (std::size_t c = 0; c < s.values.size(); ++c)
      CHECK(std::abs(s.values[c] - i.values[c] - r.values[c]) < 1e-12);
  }
  SUBCASE("serial and parallel are bit-identical for every measure") {
    p.entropy_kicks = 20;
    p.lyapunov_kicks = 300;
    p.ignorance_kicks = 300;
    p.eterm_group = {{1, 2, 1, 2}, {2, 1, 2, 1}};
    for (Measure m : {Measure::sq_exact, Measure::sq_finite, Measure::iq, Measure::rq, Measure::ic,
                      Measure::lyapunov, Measure::husimi, Measure::eterm}) {
      CAPTURE(measure_name(m));
      const FieldMap a = scan_field(m, grid, p, Execution::serial);
      const FieldMap b = scan_field(m, grid, p, Execution::parallel);
      CHECK(a.values == b.values);
      CHECK(a.error_mask == b.error_mask);
      CHECK(a.failed_cells() == 0);
      CHECK(a.label == std::string(measure_name(m)));
    }
  }
  SUBCASE("per-cell failures go to the error mask") {
    p.lyapunov_kicks = 50;  // below the default transient of 100
    const FieldMap f = scan_field(Measure::lyapunov, grid, p);
    CHECK(f.failed_cells() == grid.size());
    for (double v : f.values) CHECK(v == 0.0);
  }
  SUBCASE("sq-finite matches the library average cell by cell") {
    p.j = 1.5;
    p.entropy_kicks = 30;
    const FieldMap f = scan_field(Measure::sq_finite, ThetaPhiGrid(3, 4), p);
    const SpinSystem s = make_spin_system(1.5);
    const ThetaPhiGrid g(3, 4);
    for (std::size_t c = 0; c < g.size(); ++c) {
      CHECK(f.values[c] == finite_time_average_entropy(s, g.theta(g.theta_index(c)), g.phi(g.phi_index(c)), 2.5, 30));
    }
  }
}

TEST_CASE("butterfly") {
  std::vector<double> kappas;
  for (int i = 0; i <= 64; ++i) kappas.push_back(i * 8 * kPi / 64);
  std::vector<std::int64_t> ns;
  for (std::int64_t n = 0; n <= 200; ++n) ns.push_back(n);
  const ButterflyGrid b = butterfly(1.2, 0.3, 1.0, kappas, ns);
  SUBCASE("zero row at kappa = 0 and zero column at n = 0") {
    for (std::size_t n = 0; n < ns.size(); ++n) CHECK(std::abs(b.at(0, n)) < 1e-12);
    for (std::size_t k = 0; k < kappas.size(); ++k) CHECK(std::abs(b.at(k, 0)) < 1e-12);
  }
  SUBCASE("values within [0, 1/2]") {
    for (double v : b.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 0.5);
    }
  }
  SUBCASE("8 pi shift") {
    std::vector<double> shifted;
    for (double k : kappas) shifted.push_back(k + 8 * kPi);
    const ButterflyGrid c = butterfly(1.2, 0.3, 1.0, shifted, ns);
    for (std::size_t i = 0; i < b.values.size(); ++i) CHECK(std::abs(b.values[i] - c.values[i]) < 1e-10);
  }
  SUBCASE("closed form and matrix paths agree") {
    const SpinSystem s = make_spin_system(1.0);
    for (std::size_t k : {5u, 17u, 40u}) {
      const EntanglementTrace tr = entanglement_trace(s, 1.2, 0.3, kappas[k], 200);
      for (std::size_t n = 0; n < ns.size(); ++n) CHECK(std::abs(tr.values[n] - b.at(k, n)) < 1e-10);
    }
  }
  SUBCASE("kappa periods detected by autocorrelation") {
    // Full S(kappa, n) and the n-averaged row over kappa in [0, 16 pi].
    std::vector<double> axis;
    const int per_pi = 16;
    for (int i = 0; i < 16 * per_pi; ++i) axis.push_back(i * kPi / per_pi);
    std::vector<std::int64_t> n_axis;
    for (std::int64_t n = 1; n <= 60; ++n) n_axis.push_back(n);
    const ButterflyGrid g = butterfly(1.2, 0.3, 1.0, axis, n_axis, Execution::serial);
    const auto mismatch = [&](std::size_t shift, bool averaged) {
      double worst = 0.0;
      for (std::size_t k = 0; k + shift < axis.size(); ++k) {
        if (averaged) {
          double a = 0.0, c = 0.0;
          for (std::size_t n = 0; n < n_axis.size(); ++n) {
            a += g.at(k, n);
            c += g.at(k + shift, n);
          }
          worst = std::max(worst, std::abs(a - c) / n_axis.size());
        } else {
          for (std::size_t n = 0; n < n_axis.size(); ++n)
            worst = std::max(worst, std::abs(g.at(k, n) - g.at(k + shift, n)));
        }
      }
      return worst;
    };
    // Smallest shift with a vanishing mismatch.
    const auto period = [&](bool averaged) {
      for (std::size_t shift = 1; shift < axis.size() / 2; ++shift)
        if (mismatch(shift, averaged) < 1e-10) return shift * kPi / per_pi;
      return 0.0;
    };
    // S(kappa, n) repeats after 2 pi even though U only repeats after 4 pi:
    // the extra kick phase at kappa + 2 pi is a pi rotation about z, a
    // product of single-qubit unitaries. 8 pi is then a period too.
    CHECK(period(false) == doctest::Approx(2 * kPi));
    CHECK(period(true) == doctest::Approx(2 * kPi));
    CHECK(mismatch(8 * per_pi, false) < 1e-10);
    CHECK(mismatch(per_pi, false) > 0.1);
    // The infinite-time average has the same 2 pi period.
    const double sq_period = [&] {
      const SpinSystem s = make_spin_system(1.0);
      for (int shift = 1; shift < 8 * per_pi; ++shift) {
        bool same = true;
        for (int k = 0; k < 4 * per_pi && same; ++k) {
          const double a = infinite_time_average_entropy(s, floquet_decompose(s, k * kPi / per_pi + 0.01), 1.2, 0.3).s_q;
          const double c = infinite_time_average_entropy(s, floquet_decompose(s, (k + shift) * kPi / per_pi + 0.01), 1.2, 0.3).s_q;
          same = std::abs(a - c) < 1e-10;
        }
        if (same) return shift * kPi / per_pi;
      }
      return 0.0;
    }();
    CHECK(sq_period == doctest::Approx(2 * kPi));
  }
  SUBCASE("j = 3/2 has the longer kappa period 3 pi") {
    // Kick phases m^2 kappa / 3 with m^2 in {9/4, 1/4}: a 3 pi shift adds
    // the same phase pi/4 to every level, i.e. a global phase.
    const SpinSystem s = make_spin_system(1.5);
    const Matrix u = floquet_operator(s, 1.1).matrix();
    CHECK(max_abs(std::polar(1.0, -kPi / 4) * u - floquet_operator(s, 1.1 + 3 * kPi).matrix()) < 1e-12);
    std::vector<double> axis{0.7, 0.7 + kPi, 0.7 + 2 * kPi, 0.7 + 3 * kPi};
    const ButterflyGrid g = butterfly(2.5, 1.1, 1.5, axis, ns);
    double shift1 = 0.0, shift2 = 0.0, shift3 = 0.0;
    for (std::size_t n = 0; n < ns.size(); ++n) {
      shift1 = std::max(shift1, std::abs(g.at(0, n) - g.at(1, n)));
      shift2 = std::max(shift2, std::abs(g.at(0, n) - g.at(2, n)));
      shift3 = std::max(shift3, std::abs(g.at(0, n) - g.at(3, n)));
    }
    CHECK(shift1 > 0.1);
    CHECK(shift2 > 0.1);
    CHECK(shift3 < 1e-10);
  }
  CHECK_THROWS_AS(butterfly(1.0, 1.0, 1.0, std::vector<double>{}, ns), std::invalid_argument);
}

TEST_CASE("bilinear sampling and slices") {
  const ThetaPhiGrid g(10, 20);
  SUBCASE("constant field gives constant columns") {
    const std::vector<FieldMap> fields{constant_field(g, 0.3, "a"), constant_field(g, 2.0, "b")};
    const SliceTable t = slice(fields, 2.29965, 51);
    CHECK(t.labels == std::vector<std::string>{"a", "b"});
    for (double v : t.columns[0]) CHECK(v == doctest::Approx(0.3).epsilon(1e-15));
    for (double v : t.columns[1]) CHECK(v == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("samples follow the slice line") {
    const std::vector<FieldMap> fields{constant_field(g, 1.0)};
    const SliceTable t = slice(fields, -0.666018, 21);
    CHECK(t.phi.front() == doctest::Approx(-0.666018));
    CHECK(t.phi.back() == doctest::Approx(0.666018));
    for (std::size_t r = 0; r < t.phi.size(); ++r)
      CHECK(t.theta[r] == doctest::Approx(kPi / 2 * (t.phi[r] / -0.666018 + 1)));
    CHECK(t.theta[10] == doctest::Approx(kPi / 2));
    const SliceTable wide = slice(fields, 4.0, 21);  // clipped to the phi domain
    CHECK(wide.phi.front() == doctest::Approx(-kPi));
    CHECK(wide.phi.back() == doctest::Approx(kPi));
  }
  SUBCASE("interpolation is exact at cell centres and linear between") {
    FieldMap f(g, "lin");
    for (int i = 0; i < g.n_theta(); ++i)
      for (int k = 0; k < g.n_phi(); ++k) f.at(i, k) = 2.0 * i + 0.5 * k;
    CHECK(sample_bilinear(f, g.theta(3), g.phi(7)) == doctest::Approx(2.0 * 3 + 0.5 * 7));
    CHECK(sample_bilinear(f, 0.5 * (g.theta(3) + g.theta(4)), g.phi(7)) == doctest::Approx(7.0 + 3.5));
    // Wraps in phi between the last and first columns.
    CHECK(sample_bilinear(f, g.theta(2), kPi) == doctest::Approx(4.0 + 0.5 * 0.5 * 19));
    // Clamped beyond the first theta row.
    CHECK(sample_bilinear(f, 0.0, g.phi(4)) == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(slice(std::vector<FieldMap>{constant_field(g, 1.0)}, 0.0), std::invalid_argument);
}

TEST_CASE("pearson correlation") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{2, 4, 6, 8, 10};
  const std::vector<double> c{5, 4, 3, 2, 1};
  CHECK(pearson_correlation(a, b) == doctest::Approx(1.0));
  CHECK(pearson_correlation(a, c) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson_correlation(a, std::vector<double>{1, 1, 1, 1, 1}), std::domain_error);
}

TEST_CASE("distance") {
  const ThetaPhiGrid g(20, 40);
  const double cell = g.d_theta() * g.d_phi();
  SUBCASE("single-cell indicator") {
    FieldMap f(g, "one");
    f.at(3, 5) = 1.0;
    CHECK(distance(f, f) == doctest::Approx(std::log(cell)).epsilon(1e-14));
  }
  SUBCASE("uniform fields give ln(area)") {
    CHECK(distance(constant_field(g, 1.0), constant_field(g, 3.0)) ==
          doctest::Approx(std::log(2 * kPi * kPi)).epsilon(1e-13));
  }
  SUBCASE("symmetry, scale invariance and self-distance") {
    auto rng = oracle::rng(30);
    for (int trial = 0; trial < 20; ++trial) {
      const FieldMap f = random_field(g, rng);
      const FieldMap h = random_field(g, rng);
      CHECK(distance(f, h) == doctest::Approx(distance(h, f)).epsilon(1e-15));
      FieldMap cf = f, ch = h;
      for (double& v : cf.values) v *= 3.7;
      for (double& v : ch.values) v *= 3.7;
      CHECK(distance(cf, ch) == doctest::Approx(distance(f, h)).epsilon(1e-13));
      // ln(Tr f^2 / Tr(f f)) with the cell weights spelled out.
      double s1 = 0.0, s2 = 0.0;
      for (double v : f.values) {
        s1 += v;
        s2 += v * v;
      }
      CHECK(distance(f, f) == doctest::Approx(std::log(cell * s1 * s1 / s2)).epsilon(1e-13));
      CHECK(distance(f, f, true) != distance(f, f, false));
    }
  }
  SUBCASE("area weighting") {
    const double tr = field_trace(constant_field(g, 1.0), true);
    CHECK(tr == doctest::Approx(4 * kPi).epsilon(1e-3));
  }
  SUBCASE("errors") {
    FieldMap neg = constant_field(g, 1.0);
    neg.values[7] = -0.1;
    CHECK_THROWS_AS(distance(neg, constant_field(g, 1.0)), std::domain_error);
    CHECK_THROWS_AS(distance(constant_field(g, 0.0), constant_field(g, 1.0)), std::domain_error);
    FieldMap masked = constant_field(g, 1.0);
    masked.error_mask[3] = 1;
    CHECK_THROWS_AS(distance(masked, constant_field(g, 1.0)), std::domain_error);
    CHECK_THROWS_AS(distance(constant_field(ThetaPhiGrid(4, 4), 1.0), constant_field(g, 1.0)),
                    std::invalid_argument);
  }
  SUBCASE("clamping") {
    FieldMap f = constant_field(g, 1.0);
    f.values[0] = -1e-4;
    f.values[9] = -2e-4;
    CHECK(clamp_negative(f) == 2);
    CHECK(f.values[0] == 0.0);
    CHECK(clamp_negative(f) == 0);
  }
}

TEST_CASE("distance sweep") {
  const ThetaPhiGrid g(16, 32);
  ScanParams p;
  p.lyapunov_kicks = 600;
  p.ignorance_kicks = 2000;
  const std::vector<MeasurePair> pairs{{Measure::sq_exact, Measure::lyapunov},
                                       {Measure::sq_exact, Measure::ic},
                                       {Measure::sq_exact, Measure::iq},
                                       {Measure::iq, Measure::ic},
                                       {Measure::sq_exact, Measure::rq},
                                       {Measure::sq_exact, Measure::sq_exact}};
  const std::vector<double> kappas{0.5, 2.5};
  const auto rows = distance_sweep(pairs, kappas, g, p);
  REQUIRE(rows.size() == 12);
  CHECK(rows[0].pair == "sq-exact:lyap");
  CHECK(rows[0].kappa == 0.5);
  CHECK(rows[6].kappa == 2.5);
  // R_Q is sign-indefinite and is reported, not thrown.
  CHECK(rows[4].error.has_value());
  CHECK(!rows[1].error.has_value());
  // S_Q and lambda are the least correlated pair.
  const auto at = [&](int kappa_index, int pair) { return rows[static_cast<std::size_t>(kappa_index * 6 + pair)].d; };
  for (int k : {0, 1})
    for (int pair : {1, 2, 3}) CHECK(at(k, 0) > at(k, pair));
  // Self-distance is positive.
  CHECK(at(1, 5) > 0.0);

  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(distance_sweep(pairs, bad, g, p), std::invalid_argument);
  const std::vector<double> too_big{4.5};
  CHECK_THROWS_AS(distance_sweep(pairs, too_big, g, p), std::invalid_argument);
}

TEST_CASE("kappa profile") {
  const std::vector<double> kappas{0.5, 1.7, 2.5, 6.0};
  for (double j : {1.0, 1.5}) {
    ScanParams p;
    p.j = j;
    p.entropy_kicks = 80;
    p.lyapunov_kicks = 300;
    p.lyapunov_transient = 20;
    const KappaProfile prof = kappa_profile(2.35, -0.1, kappas, p, Execution::serial);
    REQUIRE(prof.kappa.size() == kappas.size());
    const SpinSystem s = make_spin_system(j);
    for (std::size_t k = 0; k < kappas.size(); ++k) {
      // Row mean of the butterfly vs the plain matrix-evolution average.
      CHECK(std::abs(prof.s_q[k] - oracle::brute_force_mean_entropy(s, oracle::pade_floquet(s, kappas[k]),
                                                                    2.35, -0.1, 80)) < 1e-10);
      CHECK(prof.lyapunov[k] == lyapunov_finite_time(2.35, -0.1, kappas[k], 300, 20));
    }
    const KappaProfile par = kappa_profile(2.35, -0.1, kappas, p, Execution::parallel);
    CHECK(par.s_q == prof.s_q);
    CHECK(par.lyapunov == prof.lyapunov);
  }
  ScanParams bad;
  bad.entropy_kicks = 0;
  CHECK_THROWS_AS(kappa_profile(1.0, 1.0, kappas, bad), std::invalid_argument);
  ScanParams short_lyap;
  short_lyap.lyapunov_kicks = 50;
  CHECK_THROWS_AS(kappa_profile(1.0, 1.0, kappas, short_lyap), std::invalid_argument);
}

}  // TEST_SUITE
