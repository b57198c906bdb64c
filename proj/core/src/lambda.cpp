#include "holespin/lambda.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace holespin {

namespace {

using Vector9c = Eigen::Matrix<std::complex<double>, 9, 1>;
using Matrix9c = Eigen::Matrix<std::complex<double>, 9, 9>;
constexpr std::complex<double> kI{0.0, 1.0};

Vector9c vec(const Matrix3c& m) {
  Vector9c v;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v(3 * i + j) = m(i, j);
  return v;
}

Matrix3c unvec(const Vector9c& v) {
  Matrix3c m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v(3 * i + j);
  return m;
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

}  // namespace

LambdaParams LambdaParams::dark() const {
  LambdaParams p = *this;
  p.omega_c = 0.0;
  p.omega_p = 0.0;
  return p;
}

double LambdaParams::max_rate() const {
  return std::max({std::abs(omega_c), std::abs(omega_p), std::abs(delta_c), std::abs(delta_p), gamma12_rate,
                   gamma21_rate, gamma12_deph, 2.0 * gamma3_relax, gamma3_deph});
}

void validate(const LambdaParams& p) {
  const std::array<std::pair<const char*, double>, 5> rates = {{{"gamma12_rate", p.gamma12_rate},
                                                                {"gamma21_rate", p.gamma21_rate},
                                                                {"gamma12_deph", p.gamma12_deph},
                                                                {"gamma3_relax", p.gamma3_relax},
                                                                {"gamma3_deph", p.gamma3_deph}}};
  for (const auto& [name, v] : rates)
    if (!std::isfinite(v) || v < 0.0) throw ParameterError(name, fmt::format("rate must be finite and >= 0, got {}", v));
  for (double v : {p.omega_c.real(), p.omega_c.imag(), p.omega_p.real(), p.omega_p.imag(), p.delta_c, p.delta_p})
    if (!std::isfinite(v)) throw ValidationError("Lambda parameters: Rabi amplitudes and detunings must be finite");
}

bool completely_positive(const LambdaParams& p) {
  return p.gamma12_deph <= 4.0 * p.gamma3_deph * (1.0 + 1e-12);
}

namespace {

void require_completely_positive(const LambdaParams& p) {
  if (!completely_positive(p))
    throw ValidationError(fmt::format("ground dephasing {} exceeds 4x optical dephasing {}; the master equation "
                                      "would not preserve positivity",
                                      p.gamma12_deph, p.gamma3_deph));
}

}  // namespace

double min_eigenvalue(const Matrix3c& rho) {
  const Matrix3c herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix3c> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix3::DensityMatrix3(const Matrix3c& rho) : rho_(rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-9)
    throw ValidationError(fmt::format("density matrix trace is {}, expected 1", rho.trace().real()));
  if (min_eigenvalue(rho) < -1e-9) throw ValidationError("density matrix has a negative eigenvalue");
}

DensityMatrix3 DensityMatrix3::diagonal(double p1, double p2, double p3) {
  Matrix3c m = Matrix3c::Zero();
  m(0, 0) = p1;
  m(1, 1) = p2;
  m(2, 2) = p3;
  return DensityMatrix3(m);
}

Matrix3c build_h(const LambdaParams& p) {
  Matrix3c h;
  h << p.delta_c, 0.0, std::conj(p.omega_c) / 2.0,  //
      0.0, p.delta_p, std::conj(p.omega_p) / 2.0,   //
      p.omega_c / 2.0, p.omega_p / 2.0, 0.0;
  return -h;
}

Matrix3c lindblad_rhs(const Matrix3c& rho, const LambdaParams& p) {
  const Matrix3c h = build_h(p);
  Matrix3c out = -kI * (h * rho - rho * h);

  const double g12 = p.gamma12_rate;
  const double g21 = p.gamma21_rate;
  const double g3 = p.gamma3_relax;
  const double ground = 0.5 * (g12 + g21) + p.gamma12_deph;
  const double optical1 = 0.5 * (g12 + 2.0 * g3) + p.gamma3_deph;
  const double optical2 = 0.5 * (g21 + 2.0 * g3) + p.gamma3_deph;

  out(0, 0) += -g12 * rho(0, 0) + g21 * rho(1, 1) + g3 * rho(2, 2);
  out(1, 1) += g12 * rho(0, 0) - g21 * rho(1, 1) + g3 * rho(2, 2);
  out(2, 2) += -2.0 * g3 * rho(2, 2);
  out(0, 1) -= ground * rho(0, 1);
  out(1, 0) -= ground * rho(1, 0);
  out(0, 2) -= optical1 * rho(0, 2);
  out(2, 0) -= optical1 * rho(2, 0);
  out(1, 2) -= optical2 * rho(1, 2);
  out(2, 1) -= optical2 * rho(2, 1);
  return out;
}

Matrix9c liouvillian(const LambdaParams& p) {
  Matrix9c l;
  for (int k = 0; k < 9; ++k) {
    Matrix3c basis = Matrix3c::Zero();
    basis(k / 3, k % 3) = 1.0;
    l.col(k) = vec(lindblad_rhs(basis, p));
  }
  return l;
}

RelaxationRates boltzmann_split(double t1, double splitting_ev, double temperature, const PhysicalConstants& c) {
  if (!(t1 > 0.0)) throw ValidationError(fmt::format("boltzmann_split: T1 must be > 0, got {}", t1));
  if (!(temperature > 0.0))
    throw ValidationError(fmt::format("boltzmann_split: temperature must be > 0, got {}", temperature));
  const double boltzmann = std::exp(-std::abs(splitting_ev) / (c.k_b_ev * temperature));
  const double total = 1.0 / t1;
  RelaxationRates r;
  r.gamma12 = total / (1.0 + boltzmann);
  r.gamma21 = total - r.gamma12;
  return r;
}

namespace {

// Liouvillian with the first population equation replaced by the trace row.
Matrix9c stationary_system(const LambdaParams& p, Vector9c& rhs) {
  const double scale = p.max_rate();
  const bool any_decay = p.gamma12_rate > 0.0 || p.gamma21_rate > 0.0 || p.gamma3_relax > 0.0 ||
                         p.gamma12_deph > 0.0 || p.gamma3_deph > 0.0;
  if (!any_decay || scale == 0.0) throw NumericalError("steady_state: no decay channel, stationary state is not unique");
  Matrix9c m = liouvillian(p);
  m.row(0).setZero();
  m(0, 0) = m(0, 4) = m(0, 8) = scale;
  rhs.setZero();
  rhs(0) = scale;
  return m;
}

}  // namespace

double steady_rho33(const LambdaParams& p) {
  Vector9c rhs;
  const Matrix9c m = stationary_system(p, rhs);
  const Vector9c v = m.partialPivLu().solve(rhs);
  const double r = v(8).real() / (v(0).real() + v(4).real() + v(8).real());
  if (!std::isfinite(r)) throw NumericalError("steady_rho33: solve produced a non-finite population");
  return r;
}

DensityMatrix3 steady_state(const LambdaParams& p) {
  validate(p);
  require_completely_positive(p);
  Vector9c rhs;
  const Matrix9c m = stationary_system(p, rhs);

  Eigen::FullPivLU<Matrix9c> lu(m);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw NumericalError("steady_state: singular Liouvillian, stationary state is not unique");
  Matrix3c rho = unvec(lu.solve(rhs));
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  if (!rho.allFinite()) throw NumericalError("steady_state: solve produced non-finite entries");
  return DensityMatrix3(rho);
}

std::vector<Matrix3c> time_evolve(const Matrix3c& rho0, const LambdaParams& p, std::span<const double> t_grid,
                                  const IntegratorOptions& opts) {
  validate(p);
  require_completely_positive(p);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0)) throw ValidationError("time_evolve: times must be >= 0");
    if (i > 0 && t_grid[i] < t_grid[i - 1]) throw ValidationError("time_evolve: times must be non-decreasing");
  }
  const Matrix9c l = liouvillian(p);
  const double rate = std::max(p.max_rate(), 1e-300);

  std::vector<Matrix3c> out;
  out.reserve(t_grid.size());
  Vector9c y = vec(rho0);
  Vector9c k1 = l * y;
  double t = 0.0;
  double h = 0.01 / rate;
  std::size_t steps = 0;

  for (double target : t_grid) {
    while (t < target) {
      if (++steps > opts.max_steps)
        throw NumericalError(fmt::format("time_evolve: step budget {} exhausted at t = {} ns", opts.max_steps, t));
      const bool last = h >= target - t;
      const double hs = last ? target - t : h;

      const Vector9c k2 = l * (y + hs * a21 * k1);
      const Vector9c k3 = l * (y + hs * (a31 * k1 + a32 * k2));
      const Vector9c k4 = l * (y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vector9c k5 = l * (y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vector9c k6 = l * (y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const Vector9c y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vector9c k7 = l * y_new;
      const Vector9c err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double norm = 0.0;
      for (int i = 0; i < 9; ++i) {
        const double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
        norm += std::norm(err(i)) / (sc * sc);
      }
      norm = std::sqrt(norm / 9.0);

      if (norm <= 1.0) {
        t = last ? target : t + hs;
        // Rounding seeds an anti-Hermitian part that the error control only
        // notices once stiff modes have grown it to tolerance level.
        const Matrix3c r = unvec(y_new);
        y = vec(0.5 * (r + r.adjoint()));
        k1 = l * y;
      }
      const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      // A step shortened to land on an output time does not shrink the proposal.
      if (!(last && norm <= 1.0 && hs < h)) h = hs * factor;
    }
    out.push_back(unvec(y));
  }
  return out;
}

std::vector<Spectrum> cpt_spectrum(const LambdaParams& base, std::span<const double> probe_detunings,
                                   std::span<const double> probe_powers, double power_to_rabi_sq) {
  if (probe_detunings.empty() || probe_powers.empty()) throw ValidationError("cpt_spectrum: empty detuning or power grid");
  if (!(power_to_rabi_sq > 0.0)) throw ValidationError("cpt_spectrum: power_to_rabi_sq must be > 0");
  for (std::size_t i = 1; i < probe_detunings.size(); ++i)
    if (!(probe_detunings[i] > probe_detunings[i - 1]))
      throw ValidationError("cpt_spectrum: detunings must be strictly increasing");
  for (double power : probe_powers)
    if (!(power >= 0.0)) throw ValidationError("cpt_spectrum: probe powers must be >= 0");

  std::vector<Spectrum> out;
  out.reserve(probe_powers.size());
  for (double power : probe_powers) {
    Spectrum s;
    s.power = power;
    s.detuning.assign(probe_detunings.begin(), probe_detunings.end());
    s.rho33.reserve(probe_detunings.size());
    LambdaParams p = base;
    p.omega_p = std::sqrt(power_to_rabi_sq * power);
    for (double d : probe_detunings) {
      p.delta_p = d;
      s.rho33.push_back(std::clamp(steady_state(p).population(2), 0.0, 1.0));
    }
    out.push_back(std::move(s));
  }
  return out;
}

FrequencyConvention parse_frequency_convention(std::string_view s) {
  if (s == "angular") return FrequencyConvention::angular;
  if (s == "ordinary") return FrequencyConvention::ordinary;
  throw ValidationError(fmt::format("unknown frequency convention '{}' (expected angular or ordinary)", s));
}

std::string_view to_string(FrequencyConvention c) {
  return c == FrequencyConvention::angular ? "angular" : "ordinary";
}

double frequency_scale(FrequencyConvention c) {
  return c == FrequencyConvention::angular ? 1.0 : 2.0 * std::numbers::pi;
}

LambdaParams cpt_lambda_params(const CptParams& cpt, const CptConditions& cond, double probe_power,
                               double probe_detuning_ghz) {
  if (!(cpt.t2_star > 0.0)) throw ParameterError("t2_star", "must be > 0");
  if (!(cpt.t1 > 0.0)) throw ParameterError("t1", "must be > 0");
  if (cpt.rabi_sq_per_power < 0.0) throw ParameterError("rabi_sq_per_power", "must be >= 0");
  if (probe_power < 0.0 || cond.control_power < 0.0) throw ValidationError("laser powers must be >= 0");
  const double scale = frequency_scale(cond.convention);
  const auto& c = cond.constants;
  const RelaxationRates rates =
      boltzmann_split(cpt.t1, cond.g_hh_perp * c.mu_b_ev * cond.field, cond.temperature, c);

  LambdaParams p;
  p.omega_c = scale * std::sqrt(cpt.rabi_sq_per_power * cond.control_power);
  p.omega_p = scale * std::sqrt(cpt.rabi_sq_per_power * probe_power);
  p.delta_c = scale * cpt.control_detuning;
  p.delta_p = scale * probe_detuning_ghz;
  p.gamma12_rate = rates.gamma12;
  p.gamma21_rate = rates.gamma21;
  p.gamma12_deph = 1.0 / cpt.t2_star;
  p.gamma3_relax = scale * cpt.gamma3;
  p.gamma3_deph = scale * cpt.gamma3_deph;
  validate(p);
  return p;
}

std::vector<Spectrum> cpt_spectra(const CptParams& cpt, const CptConditions& cond,
                                  std::span<const double> probe_detunings_ghz, std::span<const double> probe_powers) {
  const double scale = frequency_scale(cond.convention);
  const LambdaParams base = cpt_lambda_params(cpt, cond, 0.0, 0.0);
  std::vector<double> detunings(probe_detunings_ghz.begin(), probe_detunings_ghz.end());
  for (double& d : detunings) d *= scale;
  auto spectra = cpt_spectrum(base, detunings, probe_powers, scale * scale * cpt.rabi_sq_per_power);
  for (auto& s : spectra) s.detuning.assign(probe_detunings_ghz.begin(), probe_detunings_ghz.end());
  return spectra;
}

DataSeries pumping_signal(const LambdaParams& drive, double duration, std::size_t n_points,
                          const IntegratorOptions& opts) {
  if (!(duration > 0.0)) throw ValidationError("pumping_signal: duration must be > 0");
  if (n_points < 2) throw ValidationError("pumping_signal: need at least 2 samples");
  const Matrix3c thermal = steady_state(drive.dark()).matrix();
  DataSeries s;
  s.label = "pumping";
  s.x.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) s.x[i] = duration * static_cast<double>(i) / (n_points - 1);
  const auto traj = time_evolve(thermal, drive, s.x, opts);
  s.y.reserve(n_points);
  for (const auto& rho : traj) s.y.push_back(drive.gamma3_relax * rho(2, 2).real());
  return s;
}

DataSeries recovery_curve(const LambdaParams& drive, double pump_duration, std::span<const double> dark_times,
                          double readout_delay, const IntegratorOptions& opts) {
  if (!(pump_duration > 0.0)) throw ValidationError("recovery_curve: pump duration must be > 0");
  if (!(readout_delay >= 0.0)) throw ValidationError("recovery_curve: readout delay must be >= 0");
  if (dark_times.empty()) throw ValidationError("recovery_curve: no dark times");
  for (std::size_t i = 0; i < dark_times.size(); ++i) {
    if (dark_times[i] < 0.0) throw ValidationError("recovery_curve: dark times must be >= 0");
    if (i > 0 && !(dark_times[i] > dark_times[i - 1]))
      throw ValidationError("recovery_curve: dark times must be strictly increasing");
  }
  const LambdaParams dark = drive.dark();
  const Matrix3c thermal = steady_state(dark).matrix();
  const std::array<double, 1> pump_end = {pump_duration};
  const Matrix3c pumped = time_evolve(thermal, drive, pump_end, opts).front();
  const auto relaxed = time_evolve(pumped, dark, dark_times, opts);

  DataSeries s;
  s.label = "recovery";
  s.x.assign(dark_times.begin(), dark_times.end());
  s.y.reserve(dark_times.size());
  const std::array<double, 1> readout = {readout_delay};
  for (const auto& rho : relaxed) {
    const Matrix3c at_readout = time_evolve(rho, drive, readout, opts).front();
    s.y.push_back(drive.gamma3_relax * at_readout(2, 2).real());
  }
  return s;
}

}  // namespace holespin
