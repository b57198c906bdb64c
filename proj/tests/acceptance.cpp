// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "random_inputs.hpp"

#include "holespin/cli.hpp"
#include "holespin/csv.hpp"
#include "holespin/fitting.hpp"
#include "holespin/hyperfine.hpp"
#include "holespin/lambda.hpp"
#include "holespin/optics.hpp"
#include "holespin/phonon.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace holespin;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds; 0 when none is specified
  std::function<Verdict()> check;
};

double rel_err(double got, double want) { return std::abs(got / want - 1.0); }

std::map<std::string, std::string> report_keys(const std::string& text) {
  std::map<std::string, std::string> m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(": ");
    if (pos != std::string::npos) m[line.substr(0, pos)] = line.substr(pos + 2);
  }
  return m;
}

std::string run_tool(const std::vector<std::string>& args, int& code) {
  std::ostringstream out, err;
  code = cli::run(args, out, err);
  return out.str();
}

Verdict strain_reproduction() {
  int code = 0;
  const auto k = report_keys(run_tool({"strain", "--delta-e-mev", "3.7"}, code));
  if (code != 0 || !k.contains("u_xx_percent") || !k.contains("delta0_mev")) return {false, "strain subcommand failed"};
  const double u = std::stod(k.at("u_xx_percent"));
  const double d0 = std::stod(k.at("delta0_mev"));
  const bool ok = rel_err(u, -0.04) <= 0.02 && rel_err(d0, 2.6) <= 0.02;
  return {ok, fmt::format("u_xx = {:.5f} % (want -0.04 % +-2%), delta0 = {:.4f} meV (want 2.6 meV +-2%)", u, d0)};
}

Verdict t1_curve() {
  int code = 0;
  const std::string csv = run_tool({"--param", "g_hh_perp=-0.15", "t1-curve", "--bmin", "5", "--bmax", "7", "--points",
                                    "2", "--temperature", "1.5", "--anisotropy", "8e-5"},
                                   code);
  if (code != 0) return {false, "t1-curve subcommand failed"};
  const auto t1 = parse_csv(csv).column_values(2);
  const bool ok = t1.size() == 2 && t1[0] >= 0.45 && t1[0] <= 0.57 && t1[1] >= 0.11 && t1[1] <= 0.15;
  return {ok, fmt::format("T1(5 T) = {:.4f} us in [0.45, 0.57], T1(7 T) = {:.4f} us in [0.11, 0.15]", t1[0], t1[1])};
}

Verdict rate_oracles() {
  const T1Params p;
  double worst = 0.0;
  for (double b : {1.0, 3.0, 5.0, 7.0, 10.0})
    worst = std::max(worst, rel_err(gamma_quadrature(b, p).gamma, gamma_closed(b, p).gamma));
  return {worst <= 1e-3, fmt::format("max |quadrature/closed - 1| = {:.2e} over B = 1,3,5,7,10 T (limit 1e-3)", worst)};
}

Verdict scaling_laws() {
  const T1Params p;
  double worst_rate = 0.0;
  for (double b : {0.5, 1.0, 2.5, 5.0}) {
    worst_rate = std::max(worst_rate, rel_err(gamma_closed(2.0 * b, p).gamma / gamma_closed(b, p).gamma, 32.0));
    worst_rate = std::max(worst_rate, rel_err(gamma_quadrature(2.0 * b, p).gamma / gamma_quadrature(b, p).gamma, 32.0));
  }
  double worst_t1 = 0.0;
  for (double b : {0.5, 1.0, 2.0}) {
    // k_B T = 100 |g mu_B (2B)|: the criterion's boundary, the least favourable case.
    const double zeeman = std::abs(p.g_hh_perp * p.constants.mu_b_ev * 2.0 * b);
    const double temperature = 100.0 * zeeman / p.constants.k_b_ev;
    worst_t1 = std::max(worst_t1, rel_err(t1_theory(2.0 * b, temperature, p) / t1_theory(b, temperature, p), 1.0 / 16.0));
  }
  const bool ok = worst_rate <= 1e-12 && worst_t1 <= 5e-3;
  return {ok, fmt::format("max |Gamma(2B)/Gamma(B)/32 - 1| = {:.1e} (limit 1e-12), "
                          "max |T1(2B)/T1(B)*16 - 1| = {:.1e} (limit 5e-3)",
                          worst_rate, worst_t1)};
}

Verdict dark_state() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto p = testing::random_params(rng);
    p.gamma12_rate = p.gamma21_rate = p.gamma12_deph = 0.0;
    p.delta_p = p.delta_c;
    worst = std::max(worst, steady_state(p).population(2));
  }
  return {worst <= 1e-12, fmt::format("max rho33 = {:.2e} over 100 draws (limit 1e-12)", worst)};
}

Verdict lindblad_suite() {
  std::mt19937_64 rng(6);
  double trace = 0.0, herm = 0.0, min_eig = 1.0, balance = 0.0, endpoint = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto p = testing::random_params(rng);
    const Matrix3c rho = testing::random_rho(rng);
    const Matrix3c d = lindblad_rhs(rho, p);
    trace = std::max(trace, std::abs(d.trace()) / p.max_rate());
    herm = std::max(herm, (d - d.adjoint()).cwiseAbs().maxCoeff() / p.max_rate());

    const Matrix3c s = steady_state(p).matrix();
    trace = std::max(trace, std::abs(s.trace() - 1.0));
    herm = std::max(herm, (s - s.adjoint()).cwiseAbs().maxCoeff());
    min_eig = std::min(min_eig, min_eigenvalue(s));

    const auto dark = p.dark();
    const Matrix3c t = steady_state(dark).matrix();
    balance = std::max(balance, rel_err(t(0, 0).real() / t(1, 1).real(), dark.gamma21_rate / dark.gamma12_rate));

    if (k < 40) {
      const double slowest = std::min({p.gamma12_rate + p.gamma21_rate, p.gamma3_relax});
      const std::vector<double> grid = {5.0 / slowest, 50.0 / slowest};
      const auto traj = time_evolve(rho, p, grid);
      for (const auto& r : traj) {
        trace = std::max(trace, std::abs(r.trace() - 1.0));
        herm = std::max(herm, (r - r.adjoint()).cwiseAbs().maxCoeff());
        min_eig = std::min(min_eig, min_eigenvalue(r));
      }
      endpoint = std::max(endpoint, (traj.back() - s).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = trace <= 1e-12 && herm <= 1e-10 && min_eig >= -1e-9 && balance <= 1e-10 && endpoint <= 1e-6;
  return {ok, fmt::format("trace {:.1e} (1e-12), hermiticity {:.1e} (1e-10), min eigenvalue {:.1e} (-1e-9), "
                          "detailed balance {:.1e} (1e-10), evolve vs steady {:.1e} (1e-6); 200 draws, 40 evolved",
                          trace, herm, min_eig, balance, endpoint)};
}

Verdict cpt_round_trip() {
  const CptParams truth;
  const CptConditions cond;
  std::vector<double> detuning;
  for (int i = 0; i <= 120; ++i) detuning.push_back(-3.0 + 0.05 * i);
  const std::vector<double> powers = {0.5, 1.0, 2.0, 4.0};
  const auto spectra = cpt_spectra(truth, cond, detuning, powers);

  CptFitSetup setup;
  setup.conditions = cond;
  setup.initial = truth;
  setup.initial.t2_star *= 1.1;
  setup.initial.t1 *= 0.9;
  setup.initial.gamma3 *= 1.1;
  setup.initial.gamma3_deph *= 0.9;
  setup.initial.rabi_sq_per_power *= 1.1;
  setup.initial.control_detuning *= 0.95;

  constexpr int kSeeds = 200;
  std::map<std::string, int> covered;
  int converged = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<DataSeries> data;
    for (const auto& s : spectra) {
      const double sigma = 0.03 * *std::max_element(s.rho33.begin(), s.rho33.end());
      DataSeries d;
      d.x = detuning;
      for (double v : s.rho33) d.y.push_back(v + sigma * nd(rng));
      d.sigma = std::vector<double>(detuning.size(), sigma);
      d.power = s.power;
      data.push_back(std::move(d));
    }
    const FitResult fit = fit_cpt_global(data, setup);
    if (!fit.converged) continue;
    ++converged;
    for (auto name : kCptParamNames)
      if (std::abs(fit.value(name) - cpt_param(truth, name)) <= fit.sigma2(name)) ++covered[std::string(name)];
  }
  bool ok = true;
  std::string detail = fmt::format("{}/{} converged; within 2 sigma:", converged, kSeeds);
  for (auto name : kCptParamNames) {
    const int n = covered[std::string(name)];
    ok = ok && n >= 0.95 * kSeeds;
    detail += fmt::format(" {} {:.1f}%", name, 100.0 * n / kSeeds);
  }
  return {ok, detail + " (need >= 95% each)"};
}

Verdict t1_round_trip() {
  constexpr double kTau = 510.0;  // ns
  CptParams cpt;
  cpt.t1 = kTau;
  LambdaParams drive = cpt_lambda_params(cpt, CptConditions{}, 0.0, 0.0);
  drive.delta_c = 0.0;
  std::vector<double> dark;
  for (int i = 0; i < 50; ++i) dark.push_back(5.0 * kTau * i / 49.0);
  const DataSeries clean = recovery_curve(drive, 300.0, dark);
  const auto [lo, hi] = std::minmax_element(clean.y.begin(), clean.y.end());
  const double sigma = 0.05 * (*hi - *lo);

  auto noisy_fit = [&](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    DataSeries s = clean;
    for (double& y : s.y) y += sigma * nd(rng);
    return fit_exponential(s);
  };
  const FitResult fit = noisy_fit(0);
  const double tau = fit.value("tau"), two_sigma = fit.sigma2("tau");
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FitResult f = noisy_fit(seed);
    if (f.converged && std::abs(f.value("tau") - kTau) <= f.sigma2("tau")) ++covered;
  }
  const bool ok = fit.converged && std::abs(tau - kTau) <= two_sigma && two_sigma >= 10.0 && two_sigma <= 160.0;
  return {ok, fmt::format("tau = {:.1f} +- {:.1f} ns (true 510 ns; 2 sigma pinned to [10, 160] ns); "
                          "coverage over 100 seeds {}%",
                          tau, two_sigma, covered)};
}

Verdict hyperfine_reproduction() {
  const HyperfineParams h;
  const HyperfineResult r = omega_sq(h);
  const double t_free = r.t2_star_mixing_free.value_or(0.0) * 1e9;
  const double t_strain = r.t2_star_strain.value_or(0.0) * 1e9;
  double worst_ratio = 0.0;
  for (int i = 0; i < 10; ++i) {
    HyperfineParams g = h;
    g.bohr_radius = 0.5e-9 * std::pow(10.0, i / 9.0);
    const HyperfineResult q = omega_sq(g);
    worst_ratio = std::max(worst_ratio, rel_err(*q.t2_star_strain / *q.t2_star_mixing_free, 3.67));
  }
  const bool ok = rel_err(t_free, 58.0) <= 0.05 && rel_err(t_strain, 216.0) <= 0.05 && worst_ratio <= 0.02;
  return {ok, fmt::format("T2* mixing-free {:.2f} ns (58 +-5%), strain {:.1f} ns (216 +-5%), "
                          "max |ratio/3.67 - 1| = {:.2e} over a_B in [0.5, 5] nm (limit 2e-2)",
                          t_free, t_strain, worst_ratio)};
}

Verdict selection_rules() {
  using cd = std::complex<double>;
  const double r = 1.0 / std::sqrt(2.0);
  const cd a = 0.5 * cd(1.0, -1.0) * r, b = 0.5 * cd(1.0, 1.0) * r;
  const std::array<ComplexVec3, 4> diagonal = {
      ComplexVec3{r, 0.0, 0.0}, ComplexVec3{0.0, cd(0.0, -r), 0.0}, ComplexVec3{0.0, cd(0.0, r), 0.0},
      ComplexVec3{-r, 0.0, 0.0}};
  const std::array<ComplexVec3, 4> shear = {ComplexVec3{a, -a, 0.0}, ComplexVec3{-b, -b, 0.0},
                                            ComplexVec3{b, b, 0.0}, ComplexVec3{-a, a, 0.0}};
  double worst = 0.0;
  for (auto [c, table] : {std::pair{StrainCase::diagonal, diagonal}, std::pair{StrainCase::shear, shear}}) {
    const auto d = dipole_elements(c);
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(d[k].vector[i] - table[k][i]));
  }
  bool sum_rule = true;
  for (double e0 : {0.0, 1.512, 1.0 / 3.0})
    for (double field : {0.0, 0.3, 4.77, 7.0, 11.1}) {
      const auto t = transition_table(e0, -0.43, -0.15, field).transitions;
      sum_rule = sum_rule && t[0].energy + t[3].energy == t[1].energy + t[2].energy;
    }
  const int sign = infer_g_hh_sign("x", -1);
  const bool ok = worst <= 1e-15 && sum_rule && sign < 0;
  return {ok, fmt::format("dipole tables max deviation {:.1e} (double rounding of exact sqrt2 coefficients), "
                          "E1+E4 == E2+E3 {}, g_hh sign from x outer lines with g_e < 0: {}",
                          worst, sum_rule ? "exact" : "violated", sign)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "strain reproduction", 1.0, strain_reproduction},
      {2, "T1 theory curve", 1.0, t1_curve},
      {3, "rate oracle equivalence", 10.0, rate_oracles},
      {4, "exact scaling properties", 0.0, scaling_laws},
      {5, "dark-state property", 0.0, dark_state},
      {6, "Lindblad structural suite", 0.0, lindblad_suite},
      {7, "CPT fit round trip", 300.0, cpt_round_trip},
      {8, "T1 fit round trip", 10.0, t1_round_trip},
      {9, "hyperfine reproduction", 1.0, hyperfine_reproduction},
      {10, "selection-rule suite", 0.0, selection_rules},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, fmt::format("exception: {}", e.what())};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit == 0.0 || elapsed < c.time_limit;
    const bool pass = v.pass && in_time;
    failures += pass ? 0 : 1;
    const std::string limit = c.time_limit > 0.0 ? fmt::format(", limit {:g} s", c.time_limit) : "";
    fmt::print("{} [{:>2}] {}: {} [{:.3f} s{}{}]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail, elapsed, limit,
               in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
