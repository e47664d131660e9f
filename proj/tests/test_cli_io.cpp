#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "kicktop/cli.hpp"
#include "kicktop/io.hpp"

using namespace kicktop;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

RunConfig parse(const std::vector<std::string>& args) {
  std::ostringstream sink;
  auto c = parse_command_line(args, sink);
  REQUIRE(c.has_value());
  return *c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("kicktop_test_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const int status = std::system((std::string(KICKTOP_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli-io") {

TEST_CASE("parsing examples") {
  SUBCASE("scan") {
    const RunConfig c = parse({"scan", "--measure", "sq-exact", "--j", "1", "--kappa", "2.5", "--grid", "100x200"});
    CHECK(c.command == "scan");
    CHECK(c.measures == std::vector<std::string>{"sq-exact"});
    CHECK(c.n_theta == 100);
    CHECK(c.n_phi == 200);
    CHECK(c.kappa == 2.5);
  }
  SUBCASE("distance sweep") {
    const RunConfig c = parse({"distance", "--pairs", "sq:lyap,sq:ic", "--kappa-range", "0.25:4.0:0.25"});
    CHECK(c.pairs == std::vector<std::string>{"sq:lyap", "sq:ic"});
    REQUIRE(c.kappa_range.has_value());
    const auto ks = c.kappa_range->values();
    CHECK(ks.size() == 16);
    CHECK(ks.back() == doctest::Approx(4.0));
  }
  SUBCASE("groups and seeds are parsed as lists") {
    const RunConfig c = parse({"scan", "--measure", "eterm", "--group", "2:3:2:3,3:2:3:2"});
    CHECK(c.group == std::vector<Quadruple>{{2, 3, 2, 3}, {3, 2, 3, 2}});
    const RunConfig o = parse({"orbit", "--seeds", "1.0:0.5,2.0:-1.0"});
    CHECK(o.seeds.size() == 2);
    CHECK(o.seeds[1].second == -1.0);
  }
  SUBCASE("help is not an error") {
    std::ostringstream out;
    CHECK(!parse_command_line({"--help"}, out).has_value());
    CHECK(out.str().find("--kappa-range") != std::string::npos);
    CHECK(out.str().find("--n-total") != std::string::npos);
  }
  SUBCASE("sq alias follows j") {
    CHECK(resolve_measure("sq", 1.0) == Measure::sq_exact);
    CHECK(resolve_measure("sq", 1.5) == Measure::sq_finite);
  }
}

TEST_CASE("rejected configurations") {
  std::ostringstream sink;
  const auto rejects = [&](const std::vector<std::string>& args) {
    CAPTURE(args.size());
    CHECK_THROWS_AS(parse_command_line(args, sink), ConfigError);
  };
  rejects({"scan", "--j", "0.7"});
  rejects({"scan", "--measure", "iq", "--j", "0.7"});
  rejects({"scan", "--measure", "bogus"});
  rejects({"scan"});
  rejects({"frobnicate"});
  rejects({"scan", "--measure", "iq", "--grid", "100"});
  rejects({"scan", "--measure", "iq", "--grid", "1x200"});
  rejects({"scan", "--measure", "iq", "--unknown-flag", "1"});
  rejects({"scan", "--measure", "husimi", "--eigenstate", "4"});
  rejects({"scan", "--measure", "eterm"});
  rejects({"scan", "--measure", "eterm", "--group", "0:1:1:1"});
  rejects({"distance", "--pairs", "sq:lyap", "--kappa-range", "0.5:5:0.5"});
  rejects({"distance", "--pairs", "sq-lyap"});
  rejects({"slice", "--measures", "sq", "--phi0", "0"});
  rejects({"butterfly"});
  rejects({"butterfly", "--kappa-range", "1:0:0.1"});
  rejects({"kappa-profile"});
  rejects({"periodic-orbits", "--period", "9"});
  rejects({"scan", "--measure", "ic", "--n-total", "10", "--n-transient", "10"});
  rejects({"scan", "--measure", "ic", "--kappa", "abc"});
}

TEST_CASE("config files") {
  TempDir dir;
  const fs::path cfg = dir.path / "run.ini";
  {
    std::ofstream out(cfg);
    out << "command=scan\nmeasure=ic\nkappa=1.5\ngrid=6x8\n";
  }
  SUBCASE("file values and flag precedence") {
    const RunConfig a = parse({"--config", cfg.string()});
    CHECK(a.command == "scan");
    CHECK(a.kappa == 1.5);
    CHECK(a.n_theta == 6);
    const RunConfig b = parse({"--config", cfg.string(), "--kappa", "2.0"});
    CHECK(b.kappa == 2.0);
  }
  SUBCASE("unknown keys are rejected") {
    std::ofstream(cfg, std::ios::app) << "colour=blue\n";
    std::ostringstream sink;
    CHECK_THROWS_AS(parse_command_line({"--config", cfg.string()}, sink), ConfigError);
  }
  SUBCASE("missing file") {
    std::ostringstream sink;
    CHECK_THROWS_AS(parse_command_line({"--config", (dir.path / "nope.ini").string()}, sink), ConfigError);
  }
}

TEST_CASE("JSON round trip") {
  RunConfig c = parse({"scan", "--measure", "eterm", "--group", "2:3:2:3,3:2:3:2", "--kappa", "0.1",
                       "--n-total", "123", "--seeds", "0.1:0.2", "--area-weight", "--kappa-range",
                       "0.5:1.5:0.5", "--grid", "7x9", "--resonance-tol", "1e-10"});
  c.theta = 0.1 + 0.2;  // not exactly representable in short decimal
  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(back == c);
  CHECK(config_from_json(config_to_json(RunConfig{})) == RunConfig{});
  CHECK_THROWS_AS(config_from_json("{\"command\": \"scan\", \"extra\": 1}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"grid\": [1]}"), ConfigError);
}

TEST_CASE("CSV writers") {
  SUBCASE("2x2 zero map") {
    const FieldMap m(ThetaPhiGrid(2, 2), "zero");
    std::ostringstream out;
    write_field_csv(m, out);
    const auto ls = lines(out.str());
    REQUIRE(ls.size() == 5);
    CHECK(ls[0] == "theta,phi,value");
    for (std::size_t r = 1; r < 5; ++r) CHECK(ls[r].substr(ls[r].rfind(',') + 1) == "0");
    // Row-major, theta outer.
    CHECK(ls[1].substr(0, ls[1].find(',')) == ls[2].substr(0, ls[2].find(',')));
  }
  SUBCASE("17 significant digits round-trip") {
    for (double v : {0.1, 1.0 / 3.0, kPi, 1e-300, -2.5e17}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-0.0) == "0");
  }
  SUBCASE("fixed point trajectory") {
    std::ostringstream out;
    write_trajectory_csv({iterate_map(ClassicalState(0, 1, 0), 2.5, 5)}, out);
    const auto ls = lines(out.str());
    CHECK(ls[0] == "n,x,y,z,theta,phi");
    REQUIRE(ls.size() == 6);
    const auto xyz = [](const std::string& l) {
      const auto a = l.find(',');
      const auto b = l.find(',', l.find(',', l.find(',', a + 1) + 1) + 1);
      return l.substr(a, b - a);
    };
    for (std::size_t r = 2; r < 6; ++r) CHECK(xyz(ls[r]) == xyz(ls[1]));
    std::ostringstream multi;
    write_trajectory_csv({iterate_map(1, 1, 1, 2), iterate_map(2, 2, 1, 2)}, multi);
    CHECK(lines(multi.str())[0] == "seed,n,x,y,z,theta,phi");
    CHECK(lines(multi.str()).size() == 5);
  }
  SUBCASE("butterfly and slice headers") {
    std::ostringstream b;
    const std::vector<double> ks{0.5};
    const std::vector<std::int64_t> ns{0, 1};
    write_butterfly_csv(butterfly(1.2, 0.3, 1.0, ks, ns), b);
    CHECK(lines(b.str())[0] == "kappa,n,S");
    CHECK(lines(b.str()).size() == 3);
    std::ostringstream s;
    FieldMap f(ThetaPhiGrid(4, 4), "iq");
    write_slice_csv(slice(std::vector<FieldMap>{f}, 1.0, 5), s);
    CHECK(lines(s.str())[0] == "phi,theta,iq");
  }
  SUBCASE("spectrum at j = 1, kappa = 2.5") {
    std::ostringstream out;
    write_spectrum_csv(floquet_decompose(make_spin_system(1.0), 2.5), out);
    const auto ls = lines(out.str());
    REQUIRE(ls.size() == 4);
    CHECK(ls[0] == "index,eigenphase,re1,im1,re2,im2,re3,im3");
    const auto phase = [](const std::string& l) {
      const auto a = l.find(',');
      return std::stod(l.substr(a + 1, l.find(',', a + 1) - a - 1));
    };
    CHECK(phase(ls[1]) == doctest::Approx(-1.25));
    CHECK(phase(ls[2]) == doctest::Approx(-kPi / 2 - 0.625));
    CHECK(phase(ls[3]) == doctest::Approx(kPi / 2 - 0.625));
  }
}

TEST_CASE("runs, determinism and sidecar") {
  TempDir dir;
  std::ostringstream log;
  const auto run_to = [&](RunConfig c, const std::string& name) {
    c.output = (dir.path / name).string();
    run(c, log);
    return slurp(c.output);
  };
  SUBCASE("scan output is byte-identical across runs") {
    const RunConfig c = parse({"scan", "--measure", "lyap", "--kappa", "2.5", "--grid", "10x20", "--n-total", "400"});
    const std::string a = run_to(c, "a.csv");
    const std::string b = run_to(c, "b.csv");
    CHECK(a == b);
    CHECK(lines(a).size() == 201);
    const auto meta = nlohmann::json::parse(slurp(dir.path / "a.csv.meta.json"));
    CHECK(meta["config"]["command"] == "scan");
    CHECK(meta["rows"] == 200);
    CHECK(meta["failed_cells"].empty());
    CHECK(meta.contains("timestamp"));
    CHECK(meta.contains("wall_time_seconds"));
    CHECK(meta.contains("version"));
    // The sidecar's config echo reproduces the run.
    RunConfig again = config_from_json(meta["config"].dump());
    CHECK(run_to(again, "c.csv") == a);
  }
  SUBCASE("failed cells are listed in the sidecar") {
    const RunConfig c = parse({"scan", "--measure", "lyap", "--grid", "3x4", "--n-total", "50"});
    run_to(c, "f.csv");
    const auto meta = nlohmann::json::parse(slurp(dir.path / "f.csv.meta.json"));
    CHECK(meta["failed_cells"].size() == 12);
  }
  SUBCASE("each command produces its table") {
    CHECK(lines(run_to(parse({"butterfly", "--kappa-range", "0:1:0.5", "--n-total", "4"}), "b.csv")).size() == 16);
    CHECK(lines(run_to(parse({"slice", "--measures", "sq,ic", "--grid", "6x8", "--samples", "11", "--n-total", "50"}), "s.csv"))[0] ==
          "phi,theta,sq-exact,ic");
    CHECK(lines(run_to(parse({"distance", "--pairs", "sq:ic,iq:ic", "--kappa-range", "0.5:1:0.5", "--grid", "6x8",
                              "--n-total", "100"}), "d.csv")).size() == 5);
    CHECK(lines(run_to(parse({"orbit", "--n-total", "10"}), "o.csv")).size() == 11);
    const auto kp = lines(run_to(parse({"kappa-profile", "--kappa-range", "0.5:2.5:0.5", "--n-total", "150"}), "k.csv"));
    CHECK(kp[0] == "kappa,S_Q,lambda");
    CHECK(kp.size() == 6);
    CHECK(lines(run_to(parse({"spectrum", "--j", "2"}), "sp.csv")).size() == 6);
    const auto orbit_lines = lines(run_to(parse({"periodic-orbits", "--seed-grid", "10x20"}), "p.csv"));
    CHECK(orbit_lines[0] == "orbit,period,stability,stable,point,x,y,z,theta,phi");
    CHECK(orbit_lines.size() > 1);
  }
  SUBCASE("unwritable output is an I/O error") {
    RunConfig c = parse({"spectrum"});
    c.output = (dir.path / "missing" / "x.csv").string();
    CHECK_THROWS_AS(run(c, log), IoError);
  }
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(run_cli("spectrum --j 1 --kappa 2.5 -o " + (dir.path / "s.csv").string()) == 0);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("scan --j 0.7") == 2);
  CHECK(run_cli("scan --measure nope") == 2);
  CHECK(run_cli("spectrum -o " + (dir.path / "no" / "such" / "dir.csv").string()) == 1);
}

}  // TEST_SUITE
