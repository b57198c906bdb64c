#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace holespin {

/// Residual vector r(x) with optional analytic Jacobian and box bounds.
struct LeastSquaresProblem {
  Eigen::Index n_params = 0;
  Eigen::Index n_residuals = 0;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)> residuals;
  /// Optional. When empty, central differences are used (one-sided next to a bound).
  std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& r, Eigen::MatrixXd& jac)> jacobian;
  Eigen::VectorXd lower;  ///< empty = unbounded
  Eigen::VectorXd upper;  ///< empty = unbounded
  /// Magnitude used to size finite-difference steps when x_j is near zero.
  Eigen::VectorXd typical;
};

struct LeastSquaresOptions {
  int max_iterations = 200;
  double ftol = 1e-12;          ///< relative cost decrease
  double xtol = 1e-10;          ///< relative step size
  double gtol = 1e-14;          ///< scaled gradient
  double initial_damping = 1e-3;
  double fd_relative_step = 1e-6;
};

struct LeastSquaresSummary {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  ///< 0.5 |r|^2
  int iterations = 0;
  bool converged = false;
  std::string message;
  /// Cost after the starting point and after every accepted step.
  std::vector<double> cost_history;
};

/// Damped Gauss-Newton (Levenberg-Marquardt with Marquardt diagonal scaling
/// and gain-ratio damping updates). Steps that would leave the bounds are
/// projected back onto them. Deterministic.
LeastSquaresSummary levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                                        const LeastSquaresOptions& opts = {});

/// Central-difference Jacobian of problem.residuals at x.
Eigen::MatrixXd numeric_jacobian(const LeastSquaresProblem& problem, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r, double relative_step);

/// Parameter covariance (J^T J)^-1 scaled by the reduced chi-square, plus a
/// conditioning diagnosis of the column-normalised normal matrix.
struct CovarianceEstimate {
  Eigen::MatrixXd covariance;
  double reduced_chi_sq = 0.0;
  double condition_number = 0.0;
  bool ill_conditioned = false;
  /// Direction of weakest curvature in normalised parameter space.
  Eigen::VectorXd weakest_direction;
};

inline constexpr double kIllConditionedThreshold = 1e10;

CovarianceEstimate estimate_covariance(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& residuals,
                                       double condition_threshold = kIllConditionedThreshold);

}  // namespace holespin
