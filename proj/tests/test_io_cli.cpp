// Unit tests for file plumbing (CSV, config JSON, sequence JSON, SVG) and
// end-to-end smoke tests of the command-line binary (path injected by the
// build as SPINRES_CLI_PATH).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#ifndef _WIN32
#include <sys/wait.h>
#include <unistd.h>
#endif

#include "spinres/dynamics.hpp"
#include "spinres/errors.hpp"
#include "spinres/fitkit.hpp"
#include "spinres/io.hpp"

namespace io = spinres::io;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() /
                   ("spinres_test_" + tag + "_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) { return io::read_text(p.string()); }

// Runs the CLI with stdout/stderr captured to files; returns the exit code.
int run_cli(const std::string& args, const fs::path& dir,
            std::string* out = nullptr) {
  const fs::path out_file = dir / "stdout.txt";
  const std::string cmd = std::string(SPINRES_CLI_PATH) + " " + args + " > " +
                          out_file.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (out) *out = slurp(out_file);
#ifdef _WIN32
  return rc;
#else
  return WEXITSTATUS(rc);
#endif
}

}  // namespace

TEST_CASE("csv round trip preserves values bit-for-bit") {
  const auto dir = temp_dir("csv");
  const std::string path = (dir / "t.csv").string();
  const std::vector<std::vector<double>> rows = {
      {1.0, -2.5e-9, 3713.7}, {0.1234567890123, 7e300, -1e-300}};
  io::write_csv(path, {"a", "b", "c"}, rows, {"round trip"});
  const auto back = io::read_csv(path);
  REQUIRE(back.columns == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(back.rows.size() == 2);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      // %.11e keeps 12 significant digits.
      CHECK(back.rows[r][c] ==
            doctest::Approx(rows[r][c]).epsilon(1e-11));
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("csv reader reports malformed input precisely") {
  const auto dir = temp_dir("csv_bad");
  const std::string path = (dir / "bad.csv").string();

  SUBCASE("empty file") {
    io::write_text(path, "");
    CHECK_THROWS_WITH_AS(io::read_csv(path),
                         doctest::Contains("no data rows"),
                         spinres::invalid_input_error);
  }
  SUBCASE("header only") {
    io::write_text(path, "a,b\n");
    CHECK_THROWS_WITH_AS(io::read_csv(path),
                         doctest::Contains("no data rows"),
                         spinres::invalid_input_error);
  }
  SUBCASE("width mismatch names the row") {
    io::write_text(path, "a,b\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(io::read_csv(path), doctest::Contains("row 3"),
                         spinres::invalid_input_error);
  }
  SUBCASE("non-numeric field") {
    io::write_text(path, "a,b\n1,zebra\n");
    CHECK_THROWS_AS(io::read_csv(path), spinres::invalid_input_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("trace csv supports re/im, db/deg, and magnitude forms") {
  const auto dir = temp_dir("trace");

  SUBCASE("re/im round trip") {
    spinres::fitkit::Trace t;
    t.x = {1.0, 2.0};
    t.y = {{0.5, -0.25}, {0.9, 0.1}};
    const std::string p = (dir / "a.csv").string();
    io::write_trace_csv(p, t);
    const auto back = io::read_trace_csv(p);
    CHECK(back.complex_data);
    CHECK(back.y[0].real() == doctest::Approx(0.5).epsilon(1e-11));
    CHECK(back.y[0].imag() == doctest::Approx(-0.25).epsilon(1e-11));
  }
  SUBCASE("db/deg is converted to linear complex") {
    const std::string p = (dir / "b.csv").string();
    io::write_text(p, "freq_mhz,mag_db,phase_deg\n10,-6.0205999132796,90\n");
    const auto back = io::read_trace_csv(p);
    REQUIRE(back.y.size() == 1);
    CHECK(back.complex_data);
    CHECK(back.y[0].real() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(back.y[0].imag() == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("magnitude-only") {
    const std::string p = (dir / "c.csv").string();
    io::write_text(p, "freq_mhz,mag\n10,0.75\n");
    const auto back = io::read_trace_csv(p);
    CHECK_FALSE(back.complex_data);
    CHECK(back.y[0].real() == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("unknown header is rejected") {
    const std::string p = (dir / "d.csv").string();
    io::write_text(p, "freq,linear\n1,2\n");
    CHECK_THROWS_AS(io::read_trace_csv(p), spinres::invalid_input_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("run config parses strictly and round-trips through its echo") {
  const std::string text = R"({
    "atom": {"a_scale": 1.016},
    "resonator": {"omega_c_mhz": 3713.7, "kappa_i_mhz": 0.102},
    "ensemble": {"g_coll_mhz": 0.95, "sigma_mhz": 0.42, "shape": "gaussian",
                 "n_packets": 1001},
    "sweep": {"b_min_gauss": 760},
    "output": {"svg": true}
  })";
  const auto cfg = io::parse_run_config(text);
  CHECK(cfg.atom.a_scale == doctest::Approx(1.016));
  CHECK(cfg.resonator.kappa_i_mhz == doctest::Approx(0.102));
  CHECK(cfg.ens.g_coll_mhz == doctest::Approx(0.95));
  CHECK(cfg.n_packets == 1001);
  CHECK(cfg.sweep.b_min_gauss == doctest::Approx(760));
  CHECK(cfg.output.svg);

  // The fully resolved echo is itself a valid config (fixture files work
  // as --config inputs).
  const auto echoed = io::parse_run_config(io::run_config_json(cfg));
  CHECK(echoed.atom.a_scale == doctest::Approx(cfg.atom.a_scale));
  CHECK(echoed.n_packets == cfg.n_packets);

  SUBCASE("unknown keys are named with their path") {
    CHECK_THROWS_WITH_AS(
        io::parse_run_config(R"({"resonator": {"kappa_x": 1}})"),
        doctest::Contains("resonator.kappa_x"), spinres::invalid_input_error);
  }
  SUBCASE("type errors are rejected") {
    CHECK_THROWS_AS(io::parse_run_config(R"({"atom": {"a_scale": "big"}})"),
                    spinres::invalid_input_error);
  }
  SUBCASE("bad shape string") {
    CHECK_THROWS_AS(
        io::parse_run_config(R"({"ensemble": {"shape": "boxcar"}})"),
        spinres::invalid_input_error);
  }
}

TEST_CASE("sequence json parses pulses, delays, and acquisitions") {
  const std::string text = R"({"events": [
    {"pulse": {"axis": "x", "angle_pi": 0.5}},
    {"delay_us": 30.0},
    {"pulse": {"axis": "y", "angle_pi": 1.0, "duration_us": 0.5}},
    {"delay_us": 30.0},
    {"acquire": "echo"}
  ]})";
  const auto seq = io::parse_sequence_json(text);
  REQUIRE(seq.events.size() == 5);
  const auto* p0 = std::get_if<spinres::dynamics::Pulse>(&seq.events[0]);
  REQUIRE(p0 != nullptr);
  CHECK(p0->axis == spinres::dynamics::Axis::x);
  CHECK(p0->angle_rad == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
  const auto* d1 = std::get_if<spinres::dynamics::Delay>(&seq.events[1]);
  REQUIRE(d1 != nullptr);
  CHECK(d1->duration_us == doctest::Approx(30.0));
  const auto* a4 = std::get_if<spinres::dynamics::Acquire>(&seq.events[4]);
  REQUIRE(a4 != nullptr);
  CHECK(a4->tag == "echo");

  CHECK_THROWS_AS(io::parse_sequence_json(R"({"events": [{"pulse": {}, "delay_us": 1}]})"),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(io::parse_sequence_json(R"({"events": [{"warp": 9}]})"),
                  spinres::invalid_input_error);
}

TEST_CASE("svg writer produces a well-formed plot") {
  const auto dir = temp_dir("svg");
  const std::string p = (dir / "plot.svg").string();
  io::write_svg_series(p, {0, 1, 2, 3}, {0, 1, 0, -1}, "x", "y", "demo");
  const auto text = slurp(p);
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
  CHECK(text.find("demo") != std::string::npos);
  CHECK(text.find("</svg>") != std::string::npos);
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// CLI end-to-end
// ---------------------------------------------------------------------------

TEST_CASE("cli: bad invocations exit 2, help exits 0") {
  const auto dir = temp_dir("cli_basics");
  std::string out;
  CHECK(run_cli("--help", dir, &out) == 0);
  CHECK(out.find("spinres") != std::string::npos);
  CHECK(run_cli("definitely-not-a-command", dir, &out) == 2);
  // Missing file propagates as an input error.
  CHECK(run_cli("fit resonator --in /nonexistent.csv --out " +
                    (dir / "o").string(),
                dir, &out) == 2);
  fs::remove_all(dir);
}

TEST_CASE("cli: empty input file names the problem and exits 2") {
  const auto dir = temp_dir("cli_empty");
  const auto empty = dir / "empty.csv";
  io::write_text(empty.string(), "");
  std::string out;
  const int rc = run_cli("fit decay --in " + empty.string() + " --out " +
                             (dir / "o").string(),
                         dir, &out);
  CHECK(rc == 2);
  CHECK(out.find("no data rows") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: atom populations at extreme temperature are uniform") {
  const auto dir = temp_dir("cli_pop");
  std::string out;
  const int rc = run_cli("atom populations --temp-mk 1e9 --out " +
                             (dir / "o").string(),
                         dir, &out);
  CHECK(rc == 0);
  const auto table = io::read_csv((dir / "o" / "atom_populations.csv").string());
  REQUIRE(table.rows.size() == 8);
  for (const auto& row : table.rows) {
    CHECK(row.back() == doctest::Approx(0.125).epsilon(1e-6));
  }
  fs::remove_all(dir);
}

TEST_CASE("cli: zero-field levels collapse to two rows") {
  const auto dir = temp_dir("cli_levels");
  std::string out;
  const int rc = run_cli(
      "atom levels --bmin 0 --bmax 0 --points 1 --out " + (dir / "o").string(),
      dir, &out);
  CHECK(rc == 0);
  const auto table = io::read_csv((dir / "o" / "atom_levels.csv").string());
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][2] == doctest::Approx(3.0));  // F=1 degeneracy
  CHECK(table.rows[1][2] == doctest::Approx(5.0));  // F=2 degeneracy
  CHECK(table.rows[1][1] - table.rows[0][1] ==
        doctest::Approx(1771.62612880).epsilon(1e-9));
  // Sidecar exists and echoes the command.
  const auto side = slurp(dir / "o" / "atom_levels.csv.json");
  CHECK(side.find("\"atom levels\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: coupled s21 with --gcoll 0 is reproducible byte-for-byte") {
  const auto dir = temp_dir("cli_s21");
  std::string out;
  CHECK(run_cli("sim s21 --gcoll 0 --fmin 3712 --fmax 3716 --points 101 "
                "--out " + (dir / "a").string(), dir, &out) == 0);
  CHECK(run_cli("sim s21 --gcoll 0 --fmin 3712 --fmax 3716 --points 101 "
                "--out " + (dir / "b").string(), dir, &out) == 0);
  CHECK(slurp(dir / "a" / "sim_s21.csv") == slurp(dir / "b" / "sim_s21.csv"));
  CHECK(slurp(dir / "a" / "sim_s21.csv.json") ==
        slurp(dir / "b" / "sim_s21.csv.json"));
  fs::remove_all(dir);
}

TEST_CASE("cli: resonator fit round-trips a synthesized trace") {
  const auto dir = temp_dir("cli_fit_res");
  const auto odir = dir / "o";
  std::string out;
  // Synthesize with the simulator itself (bare resonator via --gcoll 0).
  CHECK(run_cli("sim s21 --gcoll 0 --fmin 3710 --fmax 3717.4 --points 501 "
                "--out " + odir.string(), dir, &out) == 0);
  const int rc = run_cli("fit resonator --in " +
                             (odir / "sim_s21.csv").string() + " --out " +
                             odir.string(),
                         dir, &out);
  CHECK(rc == 0);
  CHECK(out.find("converged: yes") != std::string::npos);
  // Defaults in play: omega_c 3713.7, kappa_i 0.118, kappa_e 0.163.
  const auto report = slurp(odir / "fit_resonator_report.json");
  CHECK(report.find("omega_c") != std::string::npos);
  CHECK(out.find("3713.7") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: cpmg writes the requested number of echoes") {
  const auto dir = temp_dir("cli_cpmg");
  std::string out;
  const int rc = run_cli(
      "sim cpmg --n 25 --tau-us 100 --t2-ms 1.38 --out " + (dir / "o").string(),
      dir, &out);
  CHECK(rc == 0);
  const auto table = io::read_csv((dir / "o" / "sim_cpmg.csv").string());
  CHECK(table.rows.size() == 25);
  CHECK(out.find("envelope time constant") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: od normalize maps a linear spectrum to zeros") {
  const auto dir = temp_dir("cli_od");
  const auto in = dir / "od.csv";
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 401; ++i) {
    const double wl = 400.0 + 1.25 * i;
    rows.push_back({wl, 0.002 * wl - 0.3});
  }
  io::write_csv(in.string(), {"wavelength_nm", "od"}, rows);
  std::string out;
  const int rc = run_cli("od normalize --in " + in.string() +
                             " --anchors 450,800 --out " + (dir / "o").string(),
                         dir, &out);
  CHECK(rc == 0);
  const auto table = io::read_csv((dir / "o" / "od_normalize.csv").string());
  for (const auto& row : table.rows) {
    CHECK(std::abs(row[1]) < 1e-12);
  }
  // Anchors are echoed in the sidecar.
  const auto side = slurp(dir / "o" / "od_normalize.csv.json");
  CHECK(side.find("anchor_lo_nm") != std::string::npos);
  CHECK(side.find("450") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: od density prints the flagged comparison") {
  const auto dir = temp_dir("cli_density");
  std::string out;
  const int rc = run_cli(
      "od density --integrated-od 31.93 --out " + (dir / "o").string(), dir,
      &out);
  CHECK(rc == 0);
  CHECK(out.find("density estimate") != std::string::npos);
  CHECK(out.find("reported, not asserted") != std::string::npos);
  CHECK(fs::exists(dir / "o" / "od_density.json"));
  fs::remove_all(dir);
}

TEST_CASE("cli: fixtures writes config files usable as --config") {
  const auto dir = temp_dir("cli_fixtures");
  const auto odir = dir / "o";
  std::string out;
  CHECK(run_cli("fixtures --out " + odir.string(), dir, &out) == 0);
  CHECK(out.find("[flagged]") != std::string::npos);
  for (const std::string name :
       {"fixtures_asgrown.json", "fixtures_bleached.json",
        "fixtures_unbleached.json", "fixtures_resonator_before.json",
        "fixtures_resonator_after.json", "fixtures_report.json"}) {
    CHECK(fs::exists(odir / name));
  }
  // Feed a fixture back in as --config.
  const int rc = run_cli("--config " +
                             (odir / "fixtures_asgrown.json").string() +
                             " sim s21 --points 51 --fmin 3712 --fmax 3715 "
                             "--out " + (dir / "p").string(),
                         dir, &out);
  CHECK(rc == 0);
  fs::remove_all(dir);
}
