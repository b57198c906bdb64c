#pragma once

#include "holespin/params.hpp"
#include "holespin/series.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace holespin {

// Three-level Lambda system on the ordered basis {|1>, |2>, |3>} =
// {|Down>, |Up>, |Up Down up>}: the control laser couples 1-3, the probe 2-3.
// Rates, detunings and Rabi amplitudes share one angular-frequency unit
// (rad/ns); times are in ns.

using Matrix3c = Eigen::Matrix3cd;

struct LambdaParams {
  std::complex<double> omega_c = 0.0;
  std::complex<double> omega_p = 0.0;
  double delta_c = 0.0;
  double delta_p = 0.0;
  double gamma12_rate = 0.0;  ///< population flow 1 -> 2
  double gamma21_rate = 0.0;  ///< population flow 2 -> 1
  double gamma12_deph = 0.0;  ///< pure ground dephasing 1/T2
  double gamma3_relax = 0.0;  ///< excited-state decay into each ground state
  double gamma3_deph = 0.0;   ///< extra optical dephasing

  /// Copy with both lasers switched off.
  LambdaParams dark() const;
  /// Largest rate or field magnitude; the scale for residual checks.
  double max_rate() const;
};

/// Throws ValidationError if any rate is negative or non-finite.
void validate(const LambdaParams& p);

/// The pure-dephasing part (gamma12_deph on rho12, gamma3_deph on rho13 and
/// rho23) generates a completely positive map only if
/// gamma12_deph <= 4 gamma3_deph. Outside that region the stationary state
/// can have negative eigenvalues.
bool completely_positive(const LambdaParams& p);

/// A 3x3 density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix3 {
public:
  DensityMatrix3() : rho_(Matrix3c::Zero()) { rho_(0, 0) = 1.0; }
  /// Checks the invariants (Hermitian 1e-10, trace 1e-9, eigenvalues >= -1e-9).
  explicit DensityMatrix3(const Matrix3c& rho);

  static DensityMatrix3 diagonal(double p1, double p2, double p3);

  const Matrix3c& matrix() const { return rho_; }
  double population(int level) const { return rho_(level, level).real(); }
  std::complex<double> operator()(int i, int j) const { return rho_(i, j); }

private:
  Matrix3c rho_;
};

/// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const Matrix3c& rho);

/// H = -[[Dc, 0, Oc*/2], [0, Dp, Op*/2], [Oc/2, Op/2, 0]] (hbar = 1).
Matrix3c build_h(const LambdaParams& p);

/// d rho/dt = -i [H, rho] + L(rho) with the relaxation/dephasing superoperator
/// of the Lambda model. Linear in rho; the output is traceless.
Matrix3c lindblad_rhs(const Matrix3c& rho, const LambdaParams& p);

/// The 9x9 matrix of lindblad_rhs acting on row-major vec(rho).
Eigen::Matrix<std::complex<double>, 9, 9> liouvillian(const LambdaParams& p);

struct RelaxationRates {
  double gamma12 = 0.0;
  double gamma21 = 0.0;
};

/// Splits 1/T1 so that gamma12 + gamma21 = 1/t1 and gamma21/gamma12 =
/// exp(-splitting / k_B T). `t1` in ns, splitting in eV, temperature in K.
RelaxationRates boltzmann_split(double t1, double splitting_ev, double temperature, const PhysicalConstants& c = {});

/// Stationary state from a direct solve of the vectorised equations, one
/// population equation replaced by the trace condition. Throws NumericalError
/// when the stationary state is not unique and ValidationError when the
/// parameters fail completely_positive.
DensityMatrix3 steady_state(const LambdaParams& p);

/// rho33 of the stationary state without the uniqueness and invariant
/// checks of steady_state; for inner loops over already validated inputs.
double steady_rho33(const LambdaParams& p);

struct IntegratorOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  std::size_t max_steps = 50'000'000;
};

/// Integrates the master equation from rho0 at t = 0 with an adaptive
/// Dormand-Prince 5(4) scheme and returns rho at each time of `t_grid`
/// (non-decreasing, >= 0). Each accepted step is projected onto Hermitian
/// matrices. Throws NumericalError if the step budget runs out
/// and ValidationError when the parameters fail completely_positive.
std::vector<Matrix3c> time_evolve(const Matrix3c& rho0, const LambdaParams& p, std::span<const double> t_grid,
                                  const IntegratorOptions& opts = {});

/// rho33 versus probe detuning at one probe power.
struct Spectrum {
  double power = 0.0;              ///< uW
  std::vector<double> detuning;    ///< strictly increasing
  std::vector<double> rho33;
};

/// For each probe power P sets |Omega_p|^2 = power_to_rabi_sq * P and
/// evaluates the stationary rho33 over `probe_detunings`. All in model units.
std::vector<Spectrum> cpt_spectrum(const LambdaParams& base, std::span<const double> probe_detunings,
                                   std::span<const double> probe_powers, double power_to_rabi_sq);

/// How laboratory "GHz" inputs map to the model's rad/ns.
enum class FrequencyConvention {
  angular,   ///< value taken as rad/ns as read
  ordinary,  ///< value multiplied by 2 pi
};
FrequencyConvention parse_frequency_convention(std::string_view s);
std::string_view to_string(FrequencyConvention c);
/// Scale factor from GHz to rad/ns.
double frequency_scale(FrequencyConvention c);

/// The six physical parameters of the CPT lineshape model.
struct CptParams {
  double t2_star = 6.8;              ///< ns
  double t1 = 90.0;                  ///< ns
  double gamma3 = 0.63;              ///< GHz
  double gamma3_deph = 0.64;         ///< GHz
  double rabi_sq_per_power = 0.046;  ///< GHz^2 / uW
  double control_detuning = 0.215;   ///< GHz
};

/// Fixed experimental conditions of a CPT scan.
struct CptConditions {
  double control_power = 3.0;  ///< uW; Omega_c^2 = rabi_sq_per_power * control_power
  double field = 7.0;          ///< T
  double temperature = 1.5;    ///< K
  double g_hh_perp = -0.15;
  FrequencyConvention convention = FrequencyConvention::angular;
  PhysicalConstants constants{};
};

/// LambdaParams for one (probe power, probe detuning in GHz) point.
LambdaParams cpt_lambda_params(const CptParams& cpt, const CptConditions& cond, double probe_power,
                               double probe_detuning_ghz);

/// cpt_spectrum in laboratory units: detunings in GHz in and out.
std::vector<Spectrum> cpt_spectra(const CptParams& cpt, const CptConditions& cond,
                                  std::span<const double> probe_detunings_ghz, std::span<const double> probe_powers);

/// Emission Gamma3 * rho33 during a drive pulse starting from the lasers-off
/// thermal state, sampled at n_points equally spaced times in [0, duration].
DataSeries pumping_signal(const LambdaParams& drive, double duration, std::size_t n_points = 201,
                          const IntegratorOptions& opts = {});

/// Pump -> dark tau -> readout. After `pump_duration` of drive from the
/// thermal state the lasers are off for each tau in `dark_times`; the signal is
/// Gamma3 * rho33 after `readout_delay` of renewed drive.
DataSeries recovery_curve(const LambdaParams& drive, double pump_duration, std::span<const double> dark_times,
                          double readout_delay = 5.0, const IntegratorOptions& opts = {});

}  // namespace holespin
