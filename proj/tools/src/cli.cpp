#include "holespin/cli.hpp"

#include "holespin/csv.hpp"
#include "holespin/errors.hpp"
#include "holespin/fitting.hpp"
#include "holespin/hamiltonian.hpp"
#include "holespin/hyperfine.hpp"
#include "holespin/lambda.hpp"
#include "holespin/optics.hpp"
#include "holespin/params.hpp"
#include "holespin/phonon.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace holespin::cli {

namespace {

constexpr double kDefaultE0 = 1.512;  // eV, main acceptor line

// Global options that take a value; used to find the subcommand token before parsing.
const std::vector<std::string> kGlobalValueOptions = {"--config", "--param", "--output", "--emit-plot-data", "-o"};

struct Globals {
  std::string config;
  std::vector<std::string> params;
  std::string output;
  std::string plot_data;
};

// Long-format (series, x, y) rows for --emit-plot-data.
struct PlotData {
  std::vector<std::string> series;
  std::vector<double> x;
  std::vector<double> y;

  void add(const std::string& name, double xv, double yv) {
    series.push_back(name);
    x.push_back(xv);
    y.push_back(yv);
  }
  void add(const std::string& name, const std::vector<double>& xs, const std::vector<double>& ys) {
    for (std::size_t i = 0; i < xs.size(); ++i) add(name, xs[i], ys[i]);
  }
};

void write_plot_data(const std::string& path, const PlotData& d) {
  std::ofstream f(path);
  if (!f) throw ValidationError(fmt::format("cannot open plot data file '{}'", path));
  f << "series,x,y\n";
  for (std::size_t i = 0; i < d.x.size(); ++i)
    f << d.series[i] << ',' << format_number(d.x[i]) << ',' << format_number(d.y[i]) << '\n';
}

void key_value(std::ostream& out, std::string_view key, double v) { out << key << ": " << format_number(v) << '\n'; }
void key_value(std::ostream& out, std::string_view key, std::string_view v) { out << key << ": " << v << '\n'; }

std::string to_dash(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

// Shared CPT model and laboratory condition flags.
struct CptOptions {
  CptParams params;
  double control_power = 3.0;
  double field = 7.0;
  double temperature = 1.5;
  std::string convention = "angular";

  void add_to(CLI::App* sub, bool as_initial_guess) {
    const std::string tag = as_initial_guess ? " (initial guess)" : "";
    sub->add_option("--t2-star", params.t2_star, "spin dephasing time T2*, ns" + tag)->capture_default_str();
    sub->add_option("--t1", params.t1, "spin relaxation time T1, ns" + tag)->capture_default_str();
    sub->add_option("--gamma3", params.gamma3, "excited-state decay, GHz" + tag)->capture_default_str();
    sub->add_option("--gamma3-deph", params.gamma3_deph, "optical dephasing, GHz" + tag)->capture_default_str();
    sub->add_option("--rabi-sq-per-power", params.rabi_sq_per_power, "Rabi^2 per laser power, GHz^2/uW" + tag)
        ->capture_default_str();
    sub->add_option("--control-detuning", params.control_detuning, "control laser detuning, GHz" + tag)
        ->capture_default_str();
    sub->add_option("--control-power", control_power, "control laser power, uW")->capture_default_str();
    sub->add_option("--field", field, "magnetic field, T")->capture_default_str();
    sub->add_option("--temperature", temperature, "temperature, K")->capture_default_str();
    sub->add_option("--convention", convention, "GHz convention: angular or ordinary")->capture_default_str();
  }

  CptConditions conditions(const ParameterSet& ps) const {
    CptConditions c;
    c.control_power = control_power;
    c.field = field;
    c.temperature = temperature;
    c.g_hh_perp = ps.material.g_hh_perp;
    c.convention = parse_frequency_convention(convention);
    c.constants = ps.constants;
    return c;
  }
};

std::vector<double> grid(double lo, double hi, std::size_t n) {
  if (n < 2) throw ValidationError("need at least 2 grid points");
  if (!(hi > lo)) throw ValidationError(fmt::format("empty range [{}, {}]", lo, hi));
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> stepped(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ValidationError("step must be > 0");
  if (!(hi > lo)) throw ValidationError(fmt::format("empty range [{}, {}]", lo, hi));
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
  return g;
}

void add_noise(std::vector<double>& y, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  for (double& v : y) v += sigma * nd(rng);
}

void print_fit(std::ostream& out, const FitResult& fit) {
  out << fmt::format("{:<20} {:>20} {:>20}\n", "parameter", "value", "two_sigma");
  for (const auto& name : fit.names)
    out << fmt::format("{:<20} {:>20} {:>20}\n", name, format_number(fit.value(name)),
                       format_number(fit.sigma2(name)));
  out << '\n';
  for (const auto& name : fit.names) {
    key_value(out, name, fit.value(name));
    key_value(out, name + "_2sigma", fit.sigma2(name));
  }
  key_value(out, "converged", fit.converged ? "true" : "false");
  key_value(out, "iterations", static_cast<double>(fit.iterations));
  key_value(out, "residual_norm", fit.residual_norm);
  key_value(out, "reduced_chi_sq", fit.reduced_chi_sq);
  key_value(out, "condition_number", fit.condition_number);
  key_value(out, "ill_conditioned", fit.ill_conditioned ? "true" : "false");
  key_value(out, "degenerate", fit.degenerate ? "true" : "false");
  std::string bounds;
  for (const auto& b : fit.at_bound) bounds += (bounds.empty() ? "" : ",") + b;
  key_value(out, "at_bound", bounds.empty() ? "none" : bounds);
  key_value(out, "message", fit.message);
}

// Warnings and exit code common to all fits.
int finish_fit(const FitResult& fit, std::ostream& err) {
  if (fit.ill_conditioned)
    err << fmt::format("warning: ill-conditioned fit (condition number {}); some parameters are not identifiable\n",
                       format_number(fit.condition_number));
  if (!fit.at_bound.empty()) err << "warning: parameters at a bound; their uncertainties are unreliable\n";
  if (fit.degenerate) err << "warning: data carry no usable signal\n";
  if (!fit.converged) {
    err << "error: fit did not converge: " << fit.message << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

// Everything a subcommand needs at run time.
struct Context {
  ParameterSet params;
  std::ostream& out;
  std::ostream& err;
  PlotData plot;
};

using Action = std::function<int(Context&)>;

class Tool {
public:
  Tool() : app_("Hole spins bound to acceptors in strained GaAs: models, simulations and fits.", "holespin") {
    app_.add_option("--config", globals_.config, "YAML file of parameter values and option defaults");
    app_.add_option("--param", globals_.params, "parameter override key=value (repeatable)");
    app_.add_option("-o,--output", globals_.output, "write primary output to FILE instead of stdout");
    app_.add_option("--emit-plot-data", globals_.plot_data, "write tidy series,x,y CSV to FILE");
    app_.require_subcommand(0, 1);
    app_.fallthrough();

    add_strain();
    add_levels();
    add_t1_curve();
    add_t2star();
    add_cpt();
    add_pump();
    add_recover();
    add_fit_t1();
    add_fit_cpt();
  }

  int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    try {
      apply_config(args);
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << '\n';
      return kExitValidation;
    }

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.push_back("holespin");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
      app_.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app_.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app_.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitValidation;
    }

    CLI::App* chosen = nullptr;
    for (auto* sub : app_.get_subcommands()) chosen = sub;
    if (chosen == nullptr) {
      err << app_.help();
      return kExitValidation;
    }

    try {
      ConfigMap overrides = config_params_;
      for (const auto& kv : globals_.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
          throw ValidationError(fmt::format("--param expects key=value, got '{}'", kv));
        const std::string key = kv.substr(0, eq);
        if (!is_parameter_key(key)) throw ParameterError(key, "unknown parameter");
        overrides[key] = kv.substr(eq + 1);
      }
      std::ostringstream primary;
      Context ctx{load_params(overrides), primary, err, {}};
      const int code = actions_.at(chosen->get_name())(ctx);

      if (globals_.output.empty()) {
        out << primary.str();
      } else {
        std::ofstream f(globals_.output);
        if (!f) throw ValidationError(fmt::format("cannot open output file '{}'", globals_.output));
        f << primary.str();
      }
      if (!globals_.plot_data.empty()) write_plot_data(globals_.plot_data, ctx.plot);
      return code;
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << '\n';
      return kExitValidation;
    } catch (const NumericalError& e) {
      err << "numerical error: " << e.what() << '\n';
      return kExitNumerical;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitValidation;
    }
  }

private:
  CLI::App* add(const std::string& name, const std::string& description, Action action) {
    CLI::App* sub = app_.add_subcommand(name, description);
    actions_[name] = std::move(action);
    return sub;
  }

  // Finds the subcommand token, skipping the values of global options.
  std::optional<std::size_t> subcommand_index(const std::vector<std::string>& args) const {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (std::find(kGlobalValueOptions.begin(), kGlobalValueOptions.end(), args[i]) != kGlobalValueOptions.end()) {
        ++i;
        continue;
      }
      if (actions_.contains(args[i])) return i;
    }
    return std::nullopt;
  }

  static std::optional<std::string> config_path(const std::vector<std::string>& args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    return path;
  }

  static bool given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  }

  // Config keys that name parameters become parameter overrides; the rest are
  // option defaults, inserted after the subcommand unless given on the command line.
  void apply_config(std::vector<std::string>& args) {
    const auto path = config_path(args);
    if (!path) return;
    const ConfigMap config = read_config_file(*path);
    const auto sub_index = subcommand_index(args);
    CLI::App* chosen = sub_index ? app_.get_subcommand(args[*sub_index]) : nullptr;

    std::vector<std::string> injected_global;
    std::vector<std::string> injected_sub;
    for (const auto& [key, value] : config) {
      if (is_parameter_key(key)) {
        config_params_[key] = value;
        continue;
      }
      const std::string flag = "--" + to_dash(key);
      if (key == "config") throw ValidationError("config: key 'config' is not allowed");
      if (app_.get_option_no_throw(flag) != nullptr) {
        if (!given(args, flag)) injected_global.push_back(flag + "=" + value);
        continue;
      }
      bool known = false;
      for (const auto* sub : app_.get_subcommands({})) known = known || sub->get_option_no_throw(flag) != nullptr;
      if (!known) throw ValidationError(fmt::format("config: unknown key '{}'", key));
      if (chosen != nullptr && chosen->get_option_no_throw(flag) != nullptr && !given(args, flag))
        injected_sub.push_back(flag + "=" + value);
    }
    if (sub_index) args.insert(args.begin() + static_cast<std::ptrdiff_t>(*sub_index) + 1, injected_sub.begin(),
                               injected_sub.end());
    args.insert(args.begin(), injected_global.begin(), injected_global.end());
  }

  void add_strain() {
    auto o = std::make_shared<double>(3.7);
    auto* sub = add("strain", "strain and hh-lh splitting from a band-gap shift", [o](Context& c) {
      const auto& m = c.params.material;
      const double u = strain_from_shift(*o * 1e-3, m);
      const double delta0 = hh_lh_splitting(u, m);
      key_value(c.out, "delta_e_mev", *o);
      key_value(c.out, "u_xx", u);
      key_value(c.out, "u_xx_percent", 100.0 * u);
      key_value(c.out, "delta0_mev", 1e3 * delta0);
      return kExitOk;
    });
    sub->add_option("--delta-e-mev", *o, "band-gap shift, meV")->capture_default_str();
  }

  struct LevelsOptions {
    double field = 7.0;
    double delta_e_mev = 3.7;
    std::optional<double> delta0_mev;
    std::optional<double> mixing_ratio;
    double g0 = 1.0;
    std::optional<double> g_e;
    double e0 = kDefaultE0;
    std::string strain_case;
    std::string outer_polarization;
  };

  void add_levels() {
    auto o = std::make_shared<LevelsOptions>();
    auto* sub = add("levels", "heavy-hole doublet and optical transitions", [o](Context& c) {
      const auto& ps = c.params;
      const double delta0 =
          o->delta0_mev ? *o->delta0_mev * 1e-3 : hh_lh_splitting(strain_from_shift(o->delta_e_mev * 1e-3, ps.material), ps.material);
      const double ratio = o->mixing_ratio.value_or(ps.hyperfine.mixing_ratio);
      const HoleLevelStructure h{delta0, ratio * delta0, o->g0, o->field};
      const HeavyHoleDoublet d = heavy_hole_doublet(h, ps.constants);
      const double g_pert = g_perp_perturbative(h.delta0, h.delta1, h.g0);
      const double g_hh = o->field > 0.0 ? d.splitting() / (ps.constants.mu_b_ev * o->field) : g_pert;
      const double g_e = o->g_e.value_or(ps.material.g_e_perp);

      key_value(c.out, "field_t", o->field);
      key_value(c.out, "delta0_mev", 1e3 * h.delta0);
      key_value(c.out, "delta1_mev", 1e3 * h.delta1);
      key_value(c.out, "up_energy_mev", 1e3 * d.up.energy);
      key_value(c.out, "down_energy_mev", 1e3 * d.down.energy);
      key_value(c.out, "up_heavy_weight", d.up.heavy_weight());
      key_value(c.out, "down_heavy_weight", d.down.heavy_weight());
      key_value(c.out, "splitting_uev", 1e6 * d.splitting());
      key_value(c.out, "g_hh_perp", g_hh);
      key_value(c.out, "g_hh_perp_perturbative", g_pert);
      key_value(c.out, "g_e_perp", g_e);
      if (!o->outer_polarization.empty())
        key_value(c.out, "g_hh_sign_inferred",
                  static_cast<double>(infer_g_hh_sign(o->outer_polarization, g_e < 0.0 ? -1 : 1)));

      const TransitionTable t = transition_table(o->e0, g_e, g_hh, o->field, ps.constants);
      c.out << "\nline,energy_ev,offset_ghz,polarization\n";
      for (const auto& tr : t.transitions) {
        const double offset = energy_to_ghz(tr.energy - t.e0, ps.constants);
        c.out << tr.id << ',' << fmt::format("{:.12f}", tr.energy) << ',' << format_number(offset) << ','
              << to_string(tr.polarization) << '\n';
        c.plot.add("transition_" + std::string(to_string(tr.polarization)), offset, 1.0);
      }

      if (!o->strain_case.empty()) {
        c.out << "\nhole,electron,px_re,px_im,py_re,py_im,pz_re,pz_im,strength\n";
        for (const auto& e : dipole_elements(parse_strain_case(o->strain_case))) {
          c.out << (e.hole == Spin::up ? "up" : "down") << ',' << (e.electron == Spin::up ? "up" : "down");
          for (const auto& comp : e.vector) c.out << ',' << format_number(comp.real()) << ',' << format_number(comp.imag());
          c.out << ',' << format_number(e.strength()) << '\n';
        }
      }
      return kExitOk;
    });
    sub->add_option("--field", o->field, "magnetic field along x, T")->capture_default_str();
    sub->add_option("--delta-e-mev", o->delta_e_mev, "band-gap shift setting delta0, meV")->capture_default_str();
    sub->add_option("--delta0-mev", o->delta0_mev, "hh-lh splitting, meV (overrides --delta-e-mev)");
    sub->add_option("--mixing-ratio", o->mixing_ratio, "delta1 / delta0 (default: parameter mixing_ratio)");
    sub->add_option("--g0", o->g0, "bare acceptor g-factor")->capture_default_str();
    sub->add_option("--g-e", o->g_e, "electron g-factor (default: parameter g_e_perp)");
    sub->add_option("--e0", o->e0, "zero-field line energy, eV")->capture_default_str();
    sub->add_option("--strain-case", o->strain_case, "print dipole elements: uxx_minus_uyy or uxy");
    sub->add_option("--outer-polarization", o->outer_polarization, "infer the g_hh sign from x or y outer lines");
  }

  struct T1CurveOptions {
    double bmin = 1.0;
    double bmax = 10.0;
    std::size_t points = 10;
    double temperature = 1.5;
    double anisotropy = 8e-5;
    std::string method = "closed";
    int nodes = kDefaultAngularNodes;
  };

  void add_t1_curve() {
    auto o = std::make_shared<T1CurveOptions>();
    auto* sub = add("t1-curve", "phonon-limited spin relaxation versus field", [o](Context& c) {
      if (!(o->bmin > 0.0)) throw ValidationError("--bmin must be > 0");
      const RateMethod method = parse_rate_method(o->method);
      T1Params p{c.params.material.g_hh_perp, o->anisotropy, c.params.material, c.params.constants};
      CsvTable table{{"field_t", "gamma_per_s", "t1_us"}, {}};
      for (double b : grid(o->bmin, o->bmax, o->points)) {
        const RateResult r = method == RateMethod::closed_form ? gamma_closed(b, p) : gamma_quadrature(b, p, o->nodes);
        const double t1 = t1_theory(b, o->temperature, p, method, o->nodes);
        table.rows.push_back({b, r.gamma, 1e6 * t1});
        c.plot.add("t1_us", b, 1e6 * t1);
      }
      write_csv(c.out, table);
      return kExitOk;
    });
    sub->add_option("--bmin", o->bmin, "lowest field, T")->capture_default_str();
    sub->add_option("--bmax", o->bmax, "highest field, T")->capture_default_str();
    sub->add_option("--points", o->points, "number of fields")->capture_default_str();
    sub->add_option("--temperature", o->temperature, "temperature, K")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--anisotropy", o->anisotropy, "strain anisotropy u_xx - u_yy")->capture_default_str();
    sub->add_option("--method", o->method, "closed or quadrature")->capture_default_str();
    sub->add_option("--nodes", o->nodes, "angular quadrature order")->capture_default_str();
  }

  void add_t2star() {
    add("t2star", "hyperfine-limited dephasing time", [](Context& c) {
      const HyperfineResult r = omega_sq(c.params.hyperfine, c.params.constants);
      auto ns = [](const std::optional<double>& t) { return t ? format_number(*t * 1e9) : std::string("inf"); };
      key_value(c.out, "omega_sq_mixing_free", r.term_mixing_free);
      key_value(c.out, "omega_sq_strain", r.term_strain);
      key_value(c.out, "omega_sq_total", r.sigma_sq_total);
      key_value(c.out, "t2_star_mixing_free_ns", ns(r.t2_star_mixing_free));
      key_value(c.out, "t2_star_strain_ns", ns(r.t2_star_strain));
      key_value(c.out, "t2_star_total_ns", ns(r.t2_star_total));
      if (r.term_strain > 0.0) key_value(c.out, "t2_star_ratio", std::sqrt(r.term_mixing_free / r.term_strain));
      return kExitOk;
    });
  }

  struct CptScanOptions {
    CptOptions cpt;
    std::vector<double> powers = {0.5, 1.0, 2.0, 4.0};
    double dmin = -3.0;
    double dmax = 3.0;
    double step = 0.05;
    double noise = 0.0;
    std::uint64_t seed = 0;
  };

  void add_cpt() {
    auto o = std::make_shared<CptScanOptions>();
    auto* sub = add("cpt", "stationary CPT spectra at several probe powers", [o](Context& c) {
      if (o->noise < 0.0) throw ValidationError("--noise must be >= 0");
      const auto detunings = stepped(o->dmin, o->dmax, o->step);
      const auto spectra = cpt_spectra(o->cpt.params, o->cpt.conditions(c.params), detunings, o->powers);
      std::mt19937_64 rng(o->seed);
      CsvTable table{{"detuning_ghz", "rho33", "power"}, {}};
      if (o->noise > 0.0) table.header.push_back("sigma");
      for (const auto& s : spectra) {
        std::vector<double> y = s.rho33;
        const double sigma = o->noise * *std::max_element(y.begin(), y.end());
        if (o->noise > 0.0) add_noise(y, sigma, rng);
        for (std::size_t i = 0; i < y.size(); ++i) {
          table.rows.push_back({s.detuning[i], y[i], s.power});
          if (o->noise > 0.0) table.rows.back().push_back(sigma);
        }
        c.plot.add(fmt::format("P={}", s.power), s.detuning, y);
      }
      write_csv(c.out, table);
      return kExitOk;
    });
    o->cpt.add_to(sub, false);
    sub->add_option("--powers", o->powers, "probe powers, uW")->delimiter(',')->capture_default_str();
    sub->add_option("--dmin", o->dmin, "lowest probe detuning, GHz")->capture_default_str();
    sub->add_option("--dmax", o->dmax, "highest probe detuning, GHz")->capture_default_str();
    sub->add_option("--step", o->step, "probe detuning step, GHz")->capture_default_str();
    sub->add_option("--noise", o->noise, "Gaussian noise, fraction of each curve's maximum")->capture_default_str();
    sub->add_option("--seed", o->seed, "noise seed")->capture_default_str();
  }

  struct DriveOptions {
    CptOptions cpt;
    std::string drive = "control";
    double drive_detuning = 0.0;
    double drive_power = 3.0;

    LambdaParams lambda(const ParameterSet& ps) const {
      CptConditions cond = cpt.conditions(ps);
      const double scale = frequency_scale(cond.convention);
      if (drive == "control") {
        LambdaParams p = cpt_lambda_params(cpt.params, cond, 0.0, 0.0);
        p.delta_c = scale * drive_detuning;
        return p;
      }
      if (drive == "probe") {
        cond.control_power = 0.0;
        return cpt_lambda_params(cpt.params, cond, drive_power, drive_detuning);
      }
      throw ValidationError(fmt::format("--drive must be control or probe, got '{}'", drive));
    }

    void add_to(CLI::App* sub) {
      cpt.add_to(sub, false);
      sub->add_option("--drive", drive, "driven transition: control or probe")->capture_default_str();
      sub->add_option("--drive-detuning", drive_detuning, "detuning of the driving laser, GHz")->capture_default_str();
      sub->add_option("--drive-power", drive_power, "probe power when --drive probe, uW")->capture_default_str();
    }
  };

  struct PumpOptions {
    DriveOptions drive;
    double duration = 200.0;
    std::size_t points = 201;
  };

  void add_pump() {
    auto o = std::make_shared<PumpOptions>();
    auto* sub = add("pump", "emission transient under optical pumping", [o](Context& c) {
      const DataSeries s = pumping_signal(o->drive.lambda(c.params), o->duration, o->points);
      CsvTable table{{"time_ns", "signal"}, {}};
      for (std::size_t i = 0; i < s.size(); ++i) table.rows.push_back({s.x[i], s.y[i]});
      c.plot.add("pump", s.x, s.y);
      write_csv(c.out, table);
      return kExitOk;
    });
    o->drive.add_to(sub);
    sub->add_option("--duration", o->duration, "pulse length, ns")->capture_default_str();
    sub->add_option("--points", o->points, "number of samples")->capture_default_str();
  }

  struct RecoverOptions {
    DriveOptions drive;
    double pump_duration = 300.0;
    double tmin = 20.0;
    double tmax = 500.0;
    std::size_t points = 40;
    double readout_delay = 5.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
  };

  void add_recover() {
    auto o = std::make_shared<RecoverOptions>();
    auto* sub = add("recover", "pump, dark interval, readout: spin recovery curve", [o](Context& c) {
      if (o->noise < 0.0) throw ValidationError("--noise must be >= 0");
      const auto tau = grid(o->tmin, o->tmax, o->points);
      DataSeries s = recovery_curve(o->drive.lambda(c.params), o->pump_duration, tau, o->readout_delay);
      CsvTable table{{"dark_time_ns", "signal"}, {}};
      std::mt19937_64 rng(o->seed);
      const auto [lo, hi] = std::minmax_element(s.y.begin(), s.y.end());
      const double sigma = o->noise * (*hi - *lo);
      if (o->noise > 0.0) {
        add_noise(s.y, sigma, rng);
        table.header.push_back("sigma");
      }
      for (std::size_t i = 0; i < s.size(); ++i) {
        table.rows.push_back({s.x[i], s.y[i]});
        if (o->noise > 0.0) table.rows.back().push_back(sigma);
      }
      c.plot.add("recovery", s.x, s.y);
      write_csv(c.out, table);
      return kExitOk;
    });
    o->drive.add_to(sub);
    sub->add_option("--pump-duration", o->pump_duration, "pump pulse length, ns")->capture_default_str();
    sub->add_option("--tmin", o->tmin, "shortest dark time, ns")->capture_default_str();
    sub->add_option("--tmax", o->tmax, "longest dark time, ns")->capture_default_str();
    sub->add_option("--points", o->points, "number of dark times")->capture_default_str();
    sub->add_option("--readout-delay", o->readout_delay, "readout window, ns")->capture_default_str();
    sub->add_option("--noise", o->noise, "Gaussian noise, fraction of the signal range")->capture_default_str();
    sub->add_option("--seed", o->seed, "noise seed")->capture_default_str();
  }

  struct FitT1Options {
    std::string input;
    std::string model = "recovery";
    int max_iterations = 200;
  };

  void add_fit_t1() {
    auto o = std::make_shared<FitT1Options>();
    auto* sub = add("fit-t1", "single-exponential fit of a recovery or decay curve", [o](Context& c) {
      const DataSeries s = series_from_csv(read_csv(o->input));
      LeastSquaresOptions opts;
      opts.max_iterations = o->max_iterations;
      const FitResult fit = fit_exponential(s, parse_exponential_model(o->model), opts);
      print_fit(c.out, fit);
      c.plot.add("data", s.x, s.y);
      const double amp = fit.value("amplitude"), tau = fit.value("tau"), off = fit.value("offset");
      for (double x : s.x) {
        const double e = std::exp(-x / tau);
        c.plot.add("fit", x, off + amp * (o->model == "decay" ? e : 1.0 - e));
      }
      return finish_fit(fit, c.err);
    });
    sub->add_option("--input", o->input, "CSV with x,y[,sigma] columns")->required();
    sub->add_option("--model", o->model, "recovery or decay")->capture_default_str();
    sub->add_option("--max-iterations", o->max_iterations, "iteration budget")->capture_default_str();
  }

  struct FitCptOptions {
    CptOptions cpt;
    std::vector<std::string> inputs;
    std::vector<double> powers;
    std::vector<std::string> freeze;
    std::string scale_mode = "shared";
    bool fit_offsets = false;
    double background_fraction = 0.0;
    int max_iterations = 200;
  };

  void add_fit_cpt() {
    auto o = std::make_shared<FitCptOptions>();
    auto* sub = add("fit-cpt", "global fit of CPT spectra with shared model parameters", [o](Context& c) {
      if (!o->powers.empty() && o->powers.size() != o->inputs.size())
        throw ValidationError("--power must be given once per --input");
      std::vector<DataSeries> spectra;
      for (std::size_t i = 0; i < o->inputs.size(); ++i) {
        const CsvTable table = read_csv(o->inputs[i]);
        if (!o->powers.empty()) {
          DataSeries s = series_from_csv(table, o->powers[i]);
          s.label = fmt::format("P={}", o->powers[i]);
          spectra.push_back(std::move(s));
        } else {
          for (auto& s : spectra_from_csv(table)) spectra.push_back(std::move(s));
        }
      }
      if (o->background_fraction > 0.0)
        for (auto& s : spectra) s = subtract_background(s, o->background_fraction);

      CptFitSetup setup;
      setup.conditions = o->cpt.conditions(c.params);
      setup.initial = o->cpt.params;
      setup.frozen.insert(o->freeze.begin(), o->freeze.end());
      setup.scale_mode = parse_scale_mode(o->scale_mode);
      setup.fit_offsets = o->fit_offsets;
      setup.options.max_iterations = o->max_iterations;
      const FitResult fit = fit_cpt_global(spectra, setup);
      print_fit(c.out, fit);

      CptParams fitted = setup.initial;
      for (auto name : kCptParamNames)
        if (fit.values.contains(std::string(name))) cpt_param(fitted, name) = fit.value(name);
      for (std::size_t k = 0; k < spectra.size(); ++k) {
        const auto& s = spectra[k];
        c.plot.add("data " + s.label, s.x, s.y);
        std::vector<double> model = cpt_model_curve(fitted, setup.conditions, *s.power, s.x);
        double scale = 1.0, offset = 0.0;
        if (setup.scale_mode == ScaleMode::shared) scale = fit.value("scale");
        if (setup.scale_mode == ScaleMode::per_curve) scale = fit.value(fmt::format("scale_{}", k));
        if (setup.fit_offsets) offset = fit.value(fmt::format("offset_{}", k));
        for (double& m : model) m = scale * m + offset;
        c.plot.add("fit " + s.label, s.x, model);
      }
      return finish_fit(fit, c.err);
    });
    o->cpt.add_to(sub, true);
    sub->add_option("--input", o->inputs, "CSV spectra (repeatable); rows carry a power column unless --power is given")
        ->required();
    sub->add_option("--power", o->powers, "probe power of each --input, uW (repeatable)");
    sub->add_option("--freeze", o->freeze, "parameters held at their initial value")->delimiter(',');
    sub->add_option("--scale-mode", o->scale_mode, "per_curve, shared or fixed")->capture_default_str();
    sub->add_flag("--fit-offsets", o->fit_offsets, "add a free background offset per spectrum");
    sub->add_option("--background-fraction", o->background_fraction,
                    "subtract the mean of this fraction of tail points before fitting (0 = off)")
        ->capture_default_str();
    sub->add_option("--max-iterations", o->max_iterations, "iteration budget")->capture_default_str();
  }

  CLI::App app_;
  Globals globals_;
  ConfigMap config_params_;
  std::map<std::string, Action, std::less<>> actions_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Tool tool;
  return tool.run(args, out, err);
}

}  // namespace holespin::cli
