#include "doctest.h"

#include "holespin/cli.hpp"
#include "holespin/csv.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using holespin::cli::run;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string data_path(const std::string& name) { return std::string(HOLESPIN_TEST_DATA_DIR) + "/" + name; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// "key: value" lines of a report.
std::map<std::string, std::string> keys(const std::string& text) {
  std::map<std::string, std::string> m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(": ");
    if (pos != std::string::npos) m[line.substr(0, pos)] = line.substr(pos + 2);
  }
  return m;
}

double number(const std::map<std::string, std::string>& m, const std::string& key) {
  REQUIRE(m.count(key) == 1);
  return std::stod(m.at(key));
}

}  // namespace

TEST_CASE("strain subcommand") {
  const auto r = run_cli({"strain", "--delta-e-mev", "3.7"});
  REQUIRE(r.code == 0);
  const auto k = keys(r.out);
  CHECK(std::abs(number(k, "u_xx_percent") / -0.04 - 1.0) < 0.02);
  CHECK(std::abs(number(k, "delta0_mev") / 2.6 - 1.0) < 0.02);
  CHECK(r.err.empty());
}

TEST_CASE("t1-curve is monotone decreasing at high field") {
  const auto r = run_cli({"t1-curve", "--bmin", "5", "--bmax", "7", "--temperature", "1.5"});
  REQUIRE(r.code == 0);
  const auto table = holespin::parse_csv(r.out);
  REQUIRE(table.header == std::vector<std::string>{"field_t", "gamma_per_s", "t1_us"});
  const auto t1 = table.column_values(2);
  REQUIRE(t1.size() == 10);
  for (std::size_t i = 1; i < t1.size(); ++i) CHECK(t1[i] < t1[i - 1]);

  const auto q = run_cli({"t1-curve", "--bmin", "5", "--bmax", "7", "--method", "quadrature", "--nodes", "16"});
  REQUIRE(q.code == 0);
  const auto tq = holespin::parse_csv(q.out).column_values(2);
  for (std::size_t i = 0; i < t1.size(); ++i) CHECK(tq[i] == doctest::Approx(t1[i]).epsilon(1e-9));
}

TEST_CASE("usage and argument errors") {
  auto r = run_cli({});
  CHECK(r.code == 1);
  CHECK(r.err.find("strain") != std::string::npos);
  CHECK(r.out.empty());

  CHECK(run_cli({"strain", "--no-such-flag"}).code == 1);
  CHECK(run_cli({"no-such-command"}).code == 1);
  CHECK(run_cli({"strain", "--delta-e-mev", "abc"}).code == 1);
  CHECK(run_cli({"t1-curve", "--method", "simpson"}).code == 1);
  CHECK(run_cli({"t1-curve", "--points", "1"}).code == 1);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("config defaults, flag precedence and parameter overrides") {
  const std::string cfg = data_path("cli_config.yaml");
  write_file(cfg, "delta_e_mev: 2.0\na_c: -8.0\n");

  const auto base = keys(run_cli({"strain", "--delta-e-mev", "2.0"}).out);
  const auto from_config = run_cli({"--config", cfg, "strain"});
  REQUIRE(from_config.code == 0);
  const auto k = keys(from_config.out);
  CHECK(number(k, "delta_e_mev") == doctest::Approx(2.0));
  // a_c from the config moves the strain away from the default-material value.
  CHECK(number(k, "u_xx") != doctest::Approx(number(base, "u_xx")));

  // Flags beat config values, in either position relative to the subcommand.
  CHECK(number(keys(run_cli({"--config", cfg, "strain", "--delta-e-mev", "3.7"}).out), "delta_e_mev") ==
        doctest::Approx(3.7));
  CHECK(number(keys(run_cli({"strain", "--delta-e-mev=3.7", "--config", cfg}).out), "delta_e_mev") ==
        doctest::Approx(3.7));

  // --param beats the config file; with the default a_c restored the result matches.
  const auto restored = keys(run_cli({"--config", cfg, "--param", "a_c=-7.17", "strain", "--delta-e-mev", "2.0"}).out);
  CHECK(number(restored, "u_xx") == doctest::Approx(number(base, "u_xx")).epsilon(1e-12));
  const auto flag_only = keys(run_cli({"strain", "--param", "a_c=-8.0", "--delta-e-mev", "2.0"}).out);
  CHECK(number(flag_only, "u_xx") == doctest::Approx(number(k, "u_xx")).epsilon(1e-12));

  // Keys of other subcommands are accepted and ignored.
  write_file(cfg, "delta_e_mev: 2.0\nbmin: 3\n");
  CHECK(run_cli({"--config", cfg, "strain"}).code == 0);
  const auto t1 = run_cli({"--config", cfg, "t1-curve", "--bmax", "4", "--points", "2"});
  REQUIRE(t1.code == 0);
  CHECK(holespin::parse_csv(t1.out).rows.front()[0] == doctest::Approx(3.0));
}

TEST_CASE("config and parameter errors exit 1") {
  const std::string cfg = data_path("cli_bad_config.yaml");
  write_file(cfg, "not_a_key: 1\n");
  auto r = run_cli({"--config", cfg, "strain"});
  CHECK(r.code == 1);
  CHECK(r.err.find("not_a_key") != std::string::npos);

  write_file(cfg, "rho: -1\n");
  r = run_cli({"--config", cfg, "strain"});
  CHECK(r.code == 1);
  CHECK(r.err.find("rho") != std::string::npos);

  write_file(cfg, "[1, 2\n");
  CHECK(run_cli({"--config", cfg, "strain"}).code == 1);
  CHECK(run_cli({"--config", data_path("missing.yaml"), "strain"}).code == 1);
  CHECK(run_cli({"--param", "nope=1", "strain"}).code == 1);
  CHECK(run_cli({"--param", "a_c", "strain"}).code == 1);
  CHECK(run_cli({"--param", "c_ratio=2", "strain"}).code == 1);
}

TEST_CASE("levels and transitions") {
  const auto r = run_cli({"levels", "--field", "0.1", "--outer-polarization", "x", "--strain-case", "uxx_minus_uyy"});
  REQUIRE(r.code == 0);
  const auto k = keys(r.out);
  // The exact doublet carries higher-order mixing corrections of a few percent.
  CHECK(number(k, "g_hh_perp") == doctest::Approx(-0.15).epsilon(0.05));
  CHECK(number(k, "g_hh_perp_perturbative") == doctest::Approx(-0.15).epsilon(1e-12));
  CHECK(number(k, "g_hh_sign_inferred") == -1.0);
  CHECK(r.out.find("line,energy_ev,offset_ghz,polarization") != std::string::npos);
  CHECK(r.out.find("hole,electron,") != std::string::npos);
  CHECK(run_cli({"levels", "--strain-case", "diagonal"}).code == 1);
}

TEST_CASE("t2star report") {
  const auto r = run_cli({"t2star"});
  REQUIRE(r.code == 0);
  const auto k = keys(r.out);
  CHECK(number(k, "t2_star_mixing_free_ns") == doctest::Approx(58.0).epsilon(1e-6));
  CHECK(number(k, "t2_star_ratio") == doctest::Approx(3.67).epsilon(0.02));
  CHECK(run_cli({"--param", "mixing_ratio=0", "t2star"}).out.find("t2_star_strain_ns: inf") != std::string::npos);
}

TEST_CASE("output is deterministic and honours --output and --emit-plot-data") {
  const std::vector<std::string> args = {"cpt", "--powers", "1,2", "--dmin", "-1", "--dmax", "1", "--step", "0.1",
                                         "--noise", "0.03", "--seed", "7"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto table = holespin::parse_csv(a.out);
  CHECK(table.header == std::vector<std::string>{"detuning_ghz", "rho33", "power", "sigma"});
  CHECK(table.rows.size() == 42);

  const std::string out_path = data_path("cli_cpt.csv");
  const std::string plot_path = data_path("cli_cpt_plot.csv");
  auto with_files = args;
  with_files.insert(with_files.end(), {"--output", out_path, "--emit-plot-data", plot_path});
  const auto c = run_cli(with_files);
  REQUIRE(c.code == 0);
  CHECK(c.out.empty());
  CHECK(read_file(out_path) == a.out);
  const std::string plot = read_file(plot_path);
  CHECK(plot.rfind("series,x,y\nP=1,", 0) == 0);
}

TEST_CASE("cpt synthesis then global fit") {
  const std::string path = data_path("cli_fit_cpt.csv");
  REQUIRE(run_cli({"cpt", "--noise", "0.01", "--seed", "3", "--output", path}).code == 0);
  const auto r = run_cli({"fit-cpt", "--input", path, "--t2-star", "6", "--gamma3", "0.7"});
  REQUIRE(r.code == 0);
  const auto k = keys(r.out);
  CHECK(k.at("converged") == "true");
  for (const auto& [name, truth] : std::vector<std::pair<std::string, double>>{
           {"t2_star", 6.8}, {"t1", 90.0}, {"gamma3", 0.63}, {"gamma3_deph", 0.64},
           {"rabi_sq_per_power", 0.046}, {"control_detuning", 0.215}}) {
    CAPTURE(name);
    CHECK(std::abs(number(k, name) - truth) < 3.0 * number(k, name + "_2sigma"));
  }
  CHECK(r.out.rfind("parameter", 0) == 0);

  // Frozen parameters are left out of the fit.
  const auto frozen = run_cli({"fit-cpt", "--input", path, "--freeze", "t1,control_detuning"});
  REQUIRE(frozen.code == 0);
  CHECK(keys(frozen.out).count("t1") == 0);
  CHECK(run_cli({"fit-cpt", "--input", path, "--freeze", "bogus"}).code == 1);
  CHECK(run_cli({"fit-cpt", "--input", path, "--scale-mode", "sometimes"}).code == 1);
  CHECK(run_cli({"fit-cpt", "--input", path, "--power", "1"}).code == 1);
}

TEST_CASE("recovery synthesis then exponential fit") {
  const std::string path = data_path("cli_recovery.csv");
  REQUIRE(run_cli({"recover", "--tmax", "480", "--points", "40", "--output", path}).code == 0);
  const auto r = run_cli({"fit-t1", "--input", path});
  REQUIRE(r.code == 0);
  CHECK(number(keys(r.out), "tau") == doctest::Approx(90.0).epsilon(1e-4));

  const std::string flat = data_path("cli_flat.csv");
  write_file(flat, "x,y\n0,1\n1,1\n2,1\n3,1\n4,1\n5,1\n");
  const auto d = run_cli({"fit-t1", "--input", flat});
  CHECK(d.code == 2);
  CHECK(d.err.find("did not converge") != std::string::npos);

  CHECK(run_cli({"fit-t1", "--input", data_path("missing.csv")}).code == 1);
  CHECK(run_cli({"fit-t1"}).code == 1);
}

TEST_CASE("pump transient") {
  const auto r = run_cli({"pump", "--duration", "100", "--points", "51"});
  REQUIRE(r.code == 0);
  const auto table = holespin::parse_csv(r.out);
  CHECK(table.rows.size() == 51);
  CHECK(table.rows.front()[1] == 0.0);
  CHECK(run_cli({"pump", "--drive", "both"}).code == 1);
  CHECK(run_cli({"pump", "--drive", "probe", "--points", "11"}).code == 0);
}
