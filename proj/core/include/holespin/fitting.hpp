#pragma once

#include "holespin/lambda.hpp"
#include "holespin/least_squares.hpp"
#include "holespin/series.hpp"

#include <Eigen/Dense>

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace holespin {

struct FitResult {
  std::vector<std::string> names;  ///< parameter order of `covariance`
  std::map<std::string, double> values;
  std::map<std::string, double> two_sigma;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  double reduced_chi_sq = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
  double condition_number = 0.0;
  /// Normal matrix too close to singular; some parameters are not identifiable.
  bool ill_conditioned = false;
  /// Fitted parameters that ended on a bound.
  std::vector<std::string> at_bound;
  /// Data carry no usable signal (flat, or amplitude consistent with zero).
  bool degenerate = false;
  std::vector<double> cost_history;

  double value(std::string_view name) const;
  double sigma2(std::string_view name) const;
};

/// Mean of the outermost points: tail_fraction of the series split evenly
/// between both ends (at least one point per end).
double estimate_background(const DataSeries& series, double tail_fraction);

/// y minus estimate_background. Requires >= 4 points, tail_fraction in (0, 0.5].
DataSeries subtract_background(const DataSeries& series, double tail_fraction);

enum class ExponentialModel {
  recovery,  ///< offset + amplitude (1 - exp(-x / tau))
  decay,     ///< offset + amplitude exp(-x / tau)
};
ExponentialModel parse_exponential_model(std::string_view s);
std::string_view to_string(ExponentialModel m);

/// Single exponential fit, parameters {amplitude, tau, offset}. Starts from a
/// log-spaced scan over tau with the linear parameters solved exactly.
FitResult fit_exponential(const DataSeries& series, ExponentialModel model = ExponentialModel::recovery,
                          const LeastSquaresOptions& opts = {});

/// Names of the shared CPT parameters, in fit order.
inline constexpr std::string_view kCptParamNames[] = {"t2_star", "t1", "gamma3", "gamma3_deph", "rabi_sq_per_power",
                                                      "control_detuning"};

double& cpt_param(CptParams& p, std::string_view name);
double cpt_param(const CptParams& p, std::string_view name);

/// How the detected signal amplitude maps onto rho33.
enum class ScaleMode {
  per_curve,  ///< one free scale_k per spectrum
  shared,     ///< one free `scale` for all spectra
  fixed,      ///< data already in units of rho33
};
ScaleMode parse_scale_mode(std::string_view s);
std::string_view to_string(ScaleMode m);

struct CptFitSetup {
  CptConditions conditions;
  CptParams initial;
  std::set<std::string, std::less<>> frozen;  ///< names from kCptParamNames
  ScaleMode scale_mode = ScaleMode::shared;
  bool fit_offsets = false;  ///< per-curve residual background offset_k
  LeastSquaresOptions options;
};

/// Unscaled model rho33 at one probe power; detunings in GHz.
std::vector<double> cpt_model_curve(const CptParams& cpt, const CptConditions& cond, double power,
                                    std::span<const double> detunings_ghz);

/// Simultaneous fit of all spectra (each with `power` set) with shared Lambda
/// parameters. Needs two distinct powers unless rabi_sq_per_power is frozen.
FitResult fit_cpt_global(std::span<const DataSeries> spectra, const CptFitSetup& setup);

}  // namespace holespin
