#include "holespin/fitting.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace holespin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void fill_uncertainties(FitResult& out, const LeastSquaresSummary& s, const Eigen::VectorXd& lower) {
  const CovarianceEstimate cov = estimate_covariance(s.jacobian, s.residuals);
  out.covariance = cov.covariance;
  out.reduced_chi_sq = cov.reduced_chi_sq;
  out.condition_number = cov.condition_number;
  out.ill_conditioned = cov.ill_conditioned;
  out.residual_norm = s.residuals.norm();
  out.converged = s.converged;
  out.iterations = s.iterations;
  out.message = s.message;
  out.cost_history = s.cost_history;
  for (std::size_t j = 0; j < out.names.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    out.values[out.names[j]] = s.x(k);
    const double var = cov.covariance(k, k);
    out.two_sigma[out.names[j]] = var >= 0.0 ? 2.0 * std::sqrt(var) : kNaN;
    if (lower.size() && std::isfinite(lower(k)) && s.x(k) <= lower(k) + 1e-9 * std::abs(lower(k)))
      out.at_bound.push_back(out.names[j]);
  }
  if (out.ill_conditioned && out.message.find("ill-conditioned") == std::string::npos)
    out.message += fmt::format("; normal matrix ill-conditioned (cond {:.3g})", cov.condition_number);
}

}  // namespace

double FitResult::value(std::string_view name) const {
  auto it = values.find(std::string(name));
  if (it == values.end()) throw ValidationError(fmt::format("fit result has no parameter '{}'", name));
  return it->second;
}

double FitResult::sigma2(std::string_view name) const {
  auto it = two_sigma.find(std::string(name));
  if (it == two_sigma.end()) throw ValidationError(fmt::format("fit result has no parameter '{}'", name));
  return it->second;
}

double estimate_background(const DataSeries& series, double tail_fraction) {
  series.validate();
  if (series.size() < 4) throw ValidationError("background: series needs at least 4 points");
  if (!(tail_fraction > 0.0 && tail_fraction <= 0.5))
    throw ValidationError(fmt::format("background: tail_fraction must lie in (0, 0.5], got {}", tail_fraction));
  const std::size_t n = series.size();
  const auto total = static_cast<std::size_t>(std::lround(tail_fraction * static_cast<double>(n)));
  const std::size_t per_end = std::max<std::size_t>(1, total / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < per_end; ++i) sum += series.y[i] + series.y[n - 1 - i];
  return sum / static_cast<double>(2 * per_end);
}

DataSeries subtract_background(const DataSeries& series, double tail_fraction) {
  const double background = estimate_background(series, tail_fraction);
  DataSeries out = series;
  for (double& y : out.y) y -= background;
  return out;
}

ExponentialModel parse_exponential_model(std::string_view s) {
  if (s == "recovery") return ExponentialModel::recovery;
  if (s == "decay") return ExponentialModel::decay;
  throw ValidationError(fmt::format("unknown exponential model '{}' (expected recovery or decay)", s));
}

std::string_view to_string(ExponentialModel m) { return m == ExponentialModel::recovery ? "recovery" : "decay"; }

FitResult fit_exponential(const DataSeries& series, ExponentialModel model, const LeastSquaresOptions& opts) {
  series.validate();
  if (series.size() < 5) throw ValidationError("fit_exponential: needs at least 5 points");
  const auto n = static_cast<Eigen::Index>(series.size());

  FitResult out;
  out.names = {"amplitude", "tau", "offset"};

  const auto [ymin, ymax] = std::minmax_element(series.y.begin(), series.y.end());
  if (*ymax == *ymin) {
    out.degenerate = true;
    out.converged = false;
    out.message = "series is constant; no exponential to fit";
    out.values = {{"amplitude", 0.0}, {"tau", kNaN}, {"offset", *ymin}};
    out.two_sigma = {{"amplitude", kNaN}, {"tau", kNaN}, {"offset", kNaN}};
    return out;
  }

  Eigen::VectorXd x(n), y(n), w = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = series.x[static_cast<std::size_t>(i)];
    y(i) = series.y[static_cast<std::size_t>(i)];
    if (series.sigma) w(i) = 1.0 / (*series.sigma)[static_cast<std::size_t>(i)];
  }
  auto shape = [model](double xi, double tau) {
    const double e = std::exp(-xi / tau);
    return model == ExponentialModel::recovery ? 1.0 - e : e;
  };

  // Linear parameters are exact for fixed tau; scan tau on a log grid.
  const double span = x(n - 1) - x(0);
  double min_dx = span;
  for (Eigen::Index i = 1; i < n; ++i) min_dx = std::min(min_dx, x(i) - x(i - 1));
  const double tau_lo = 0.25 * min_dx, tau_hi = 10.0 * span;
  constexpr int kScan = 80;
  double best_rss = std::numeric_limits<double>::infinity();
  Eigen::Vector3d start(0.0, 0.5 * span, y.mean());
  for (int k = 0; k < kScan; ++k) {
    const double tau = tau_lo * std::pow(tau_hi / tau_lo, k / double(kScan - 1));
    Eigen::MatrixXd a(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, 0) = w(i) * shape(x(i), tau);
      a(i, 1) = w(i);
    }
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(w.cwiseProduct(y));
    const double rss = (a * c - w.cwiseProduct(y)).squaredNorm();
    if (rss < best_rss) {
      best_rss = rss;
      start = Eigen::Vector3d(c(0), tau, c(1));
    }
  }

  LeastSquaresProblem problem;
  problem.n_params = 3;
  problem.n_residuals = n;
  problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (Eigen::Index i = 0; i < n; ++i) r(i) = w(i) * (p(2) + p(0) * shape(x(i), p(1)) - y(i));
  };
  problem.jacobian = [&](const Eigen::VectorXd& p, const Eigen::VectorXd&, Eigen::MatrixXd& jac) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = std::exp(-x(i) / p(1));
      const double de_dtau = e * x(i) / (p(1) * p(1));
      jac(i, 0) = w(i) * shape(x(i), p(1));
      jac(i, 1) = w(i) * p(0) * (model == ExponentialModel::recovery ? -de_dtau : de_dtau);
      jac(i, 2) = w(i);
    }
  };
  const double inf = std::numeric_limits<double>::infinity();
  problem.lower = Eigen::Vector3d(-inf, 1e-9 * tau_lo, -inf);
  problem.typical = Eigen::Vector3d(*ymax - *ymin, span, *ymax - *ymin);

  const LeastSquaresSummary s = levenberg_marquardt(problem, start, opts);
  fill_uncertainties(out, s, problem.lower);
  const double amp = out.values["amplitude"];
  const double amp2s = out.two_sigma["amplitude"];
  if (!(std::abs(amp) > amp2s)) {
    out.degenerate = true;
    out.message += "; amplitude consistent with zero";
  }
  return out;
}

ScaleMode parse_scale_mode(std::string_view s) {
  if (s == "per_curve") return ScaleMode::per_curve;
  if (s == "shared") return ScaleMode::shared;
  if (s == "fixed") return ScaleMode::fixed;
  throw ValidationError(fmt::format("unknown scale mode '{}' (expected per_curve, shared or fixed)", s));
}

std::string_view to_string(ScaleMode m) {
  switch (m) {
    case ScaleMode::per_curve:
      return "per_curve";
    case ScaleMode::shared:
      return "shared";
    case ScaleMode::fixed:
      break;
  }
  return "fixed";
}

double& cpt_param(CptParams& p, std::string_view name) {
  if (name == "t2_star") return p.t2_star;
  if (name == "t1") return p.t1;
  if (name == "gamma3") return p.gamma3;
  if (name == "gamma3_deph") return p.gamma3_deph;
  if (name == "rabi_sq_per_power") return p.rabi_sq_per_power;
  if (name == "control_detuning") return p.control_detuning;
  throw ValidationError(fmt::format("unknown CPT parameter '{}'", name));
}

double cpt_param(const CptParams& p, std::string_view name) { return cpt_param(const_cast<CptParams&>(p), name); }

std::vector<double> cpt_model_curve(const CptParams& cpt, const CptConditions& cond, double power,
                                    std::span<const double> detunings_ghz) {
  std::vector<double> out;
  out.reserve(detunings_ghz.size());
  LambdaParams p = cpt_lambda_params(cpt, cond, power, 0.0);
  const double scale = frequency_scale(cond.convention);
  for (double d : detunings_ghz) {
    p.delta_p = scale * d;
    out.push_back(steady_rho33(p));
  }
  return out;
}

FitResult fit_cpt_global(std::span<const DataSeries> spectra, const CptFitSetup& setup) {
  if (spectra.empty()) throw ValidationError("fit_cpt_global: no spectra");
  for (const auto& s : setup.frozen) cpt_param(setup.initial, s);
  std::vector<double> powers;
  for (const auto& s : spectra) {
    s.validate();
    if (!s.power) throw ValidationError(fmt::format("fit_cpt_global: spectrum '{}' has no probe power", s.label));
    if (!(*s.power >= 0.0)) throw ValidationError("fit_cpt_global: probe powers must be >= 0");
    if (std::find(powers.begin(), powers.end(), *s.power) == powers.end()) powers.push_back(*s.power);
  }
  const bool rabi_free = !setup.frozen.contains("rabi_sq_per_power");
  if (rabi_free && powers.size() < 2)
    throw ValidationError("fit_cpt_global: fitting rabi_sq_per_power needs spectra at two or more distinct powers");

  std::vector<std::string> shared;
  for (auto name : kCptParamNames)
    if (!setup.frozen.contains(name)) shared.emplace_back(name);
  const auto n_shared = static_cast<Eigen::Index>(shared.size());
  const auto n_curves = static_cast<Eigen::Index>(spectra.size());
  const Eigen::Index scale_base = n_shared;
  const Eigen::Index n_scales = setup.scale_mode == ScaleMode::per_curve ? n_curves
                                : setup.scale_mode == ScaleMode::shared  ? 1
                                                                         : 0;
  const Eigen::Index offset_base = scale_base + n_scales;
  const Eigen::Index n_params = offset_base + (setup.fit_offsets ? n_curves : 0);
  if (n_params == 0) throw ValidationError("fit_cpt_global: nothing to fit");

  std::vector<Eigen::Index> start_row;
  Eigen::Index n_res = 0;
  for (const auto& s : spectra) {
    start_row.push_back(n_res);
    n_res += static_cast<Eigen::Index>(s.size());
  }
  Eigen::VectorXd y(n_res), w(n_res);
  for (Eigen::Index k = 0; k < n_curves; ++k) {
    const auto& s = spectra[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < s.size(); ++i) {
      y(start_row[k] + static_cast<Eigen::Index>(i)) = s.y[i];
      w(start_row[k] + static_cast<Eigen::Index>(i)) = s.sigma ? 1.0 / (*s.sigma)[i] : 1.0;
    }
  }

  auto physical = [&](const Eigen::VectorXd& p) {
    CptParams cpt = setup.initial;
    for (Eigen::Index j = 0; j < n_shared; ++j) cpt_param(cpt, shared[static_cast<std::size_t>(j)]) = p(j);
    return cpt;
  };
  auto rho33_all = [&](const CptParams& cpt) {
    Eigen::VectorXd m(n_res);
    for (Eigen::Index k = 0; k < n_curves; ++k) {
      const auto& s = spectra[static_cast<std::size_t>(k)];
      const auto curve = cpt_model_curve(cpt, setup.conditions, *s.power, s.x);
      for (std::size_t i = 0; i < curve.size(); ++i) m(start_row[k] + static_cast<Eigen::Index>(i)) = curve[i];
    }
    return m;
  };
  auto scale_index = [&](Eigen::Index k) { return scale_base + (n_scales == 1 ? 0 : k); };
  auto scale_of = [&](const Eigen::VectorXd& p, Eigen::Index k) { return n_scales ? p(scale_index(k)) : 1.0; };
  auto offset_of = [&](const Eigen::VectorXd& p, Eigen::Index k) {
    return setup.fit_offsets ? p(offset_base + k) : 0.0;
  };
  auto assemble = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& rho33, Eigen::VectorXd& r) {
    for (Eigen::Index k = 0; k < n_curves; ++k) {
      const Eigen::Index len = static_cast<Eigen::Index>(spectra[static_cast<std::size_t>(k)].size());
      for (Eigen::Index i = start_row[k]; i < start_row[k] + len; ++i)
        r(i) = w(i) * (scale_of(p, k) * rho33(i) + offset_of(p, k) - y(i));
    }
  };

  // Starting point: shared values from setup.initial, linear nuisances solved exactly.
  Eigen::VectorXd x0(n_params);
  for (Eigen::Index j = 0; j < n_shared; ++j) x0(j) = cpt_param(setup.initial, shared[static_cast<std::size_t>(j)]);
  if (n_params > n_shared) {
    const Eigen::VectorXd m = rho33_all(setup.initial);
    const Eigen::Index n_lin = n_params - n_shared;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_res, n_lin);
    Eigen::VectorXd b = w.cwiseProduct(y);
    for (Eigen::Index k = 0; k < n_curves; ++k) {
      const Eigen::Index len = static_cast<Eigen::Index>(spectra[static_cast<std::size_t>(k)].size());
      for (Eigen::Index i = start_row[k]; i < start_row[k] + len; ++i) {
        if (n_scales)
          a(i, scale_index(k) - n_shared) = w(i) * m(i);
        else
          b(i) -= w(i) * m(i);
        if (setup.fit_offsets) a(i, offset_base + k - n_shared) = w(i);
      }
    }
    x0.tail(n_lin) = a.colPivHouseholderQr().solve(b);
  }
  LeastSquaresProblem problem;
  problem.n_params = n_params;
  problem.n_residuals = n_res;
  problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) { assemble(p, rho33_all(physical(p)), r); };
  problem.jacobian = [&](const Eigen::VectorXd& p, const Eigen::VectorXd&, Eigen::MatrixXd& jac) {
    const Eigen::VectorXd base = rho33_all(physical(p));
    jac.setZero();
    for (Eigen::Index j = 0; j < n_shared; ++j) {
      const double h = setup.options.fd_relative_step * std::max(std::abs(p(j)), 1e-3);
      Eigen::VectorXd pp = p, pm = p;
      pp(j) += h;
      pm(j) -= h;
      if (pm(j) <= problem.lower(j)) pm(j) = p(j);
      const Eigen::VectorXd d = (rho33_all(physical(pp)) - rho33_all(physical(pm))) / (pp(j) - pm(j));
      for (Eigen::Index k = 0; k < n_curves; ++k) {
        const Eigen::Index len = static_cast<Eigen::Index>(spectra[static_cast<std::size_t>(k)].size());
        for (Eigen::Index i = start_row[k]; i < start_row[k] + len; ++i) jac(i, j) = w(i) * scale_of(p, k) * d(i);
      }
    }
    for (Eigen::Index k = 0; k < n_curves; ++k) {
      const Eigen::Index len = static_cast<Eigen::Index>(spectra[static_cast<std::size_t>(k)].size());
      for (Eigen::Index i = start_row[k]; i < start_row[k] + len; ++i) {
        if (n_scales) jac(i, scale_index(k)) = w(i) * base(i);
        if (setup.fit_offsets) jac(i, offset_base + k) = w(i);
      }
    }
  };
  const double inf = std::numeric_limits<double>::infinity();
  problem.lower = Eigen::VectorXd::Constant(n_params, -inf);
  for (Eigen::Index j = 0; j < n_shared; ++j)
    if (shared[static_cast<std::size_t>(j)] != "control_detuning") problem.lower(j) = 1e-6 * std::abs(x0(j));

  FitResult out;
  out.names = shared;
  if (n_scales == 1) out.names.emplace_back("scale");
  for (Eigen::Index k = 0; k < n_curves && n_scales > 1; ++k) out.names.push_back(fmt::format("scale_{}", k));
  for (Eigen::Index k = 0; k < n_curves; ++k)
    if (setup.fit_offsets) out.names.push_back(fmt::format("offset_{}", k));

  const LeastSquaresSummary s = levenberg_marquardt(problem, x0, setup.options);
  fill_uncertainties(out, s, problem.lower);
  return out;
}

}  // namespace holespin
