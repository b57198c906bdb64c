#include "holespin/least_squares.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace holespin {

namespace {

double lower_of(const LeastSquaresProblem& p, Eigen::Index j) {
  return p.lower.size() ? p.lower(j) : -std::numeric_limits<double>::infinity();
}
double upper_of(const LeastSquaresProblem& p, Eigen::Index j) {
  return p.upper.size() ? p.upper(j) : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd project(const LeastSquaresProblem& p, Eigen::VectorXd x) {
  for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = std::clamp(x(j), lower_of(p, j), upper_of(p, j));
  return x;
}

}  // namespace

Eigen::MatrixXd numeric_jacobian(const LeastSquaresProblem& problem, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r, double relative_step) {
  Eigen::MatrixXd jac(problem.n_residuals, problem.n_params);
  Eigen::VectorXd r_plus(problem.n_residuals), r_minus(problem.n_residuals);
  for (Eigen::Index j = 0; j < problem.n_params; ++j) {
    const double typical = problem.typical.size() ? std::abs(problem.typical(j)) : 1.0;
    const double h = relative_step * std::max(std::abs(x(j)), typical > 0.0 ? typical : 1.0);
    Eigen::VectorXd xp = x, xm = x;
    const bool can_plus = x(j) + h <= upper_of(problem, j);
    const bool can_minus = x(j) - h >= lower_of(problem, j);
    if (can_plus && can_minus) {
      xp(j) += h;
      xm(j) -= h;
      problem.residuals(xp, r_plus);
      problem.residuals(xm, r_minus);
      jac.col(j) = (r_plus - r_minus) / (2.0 * h);
    } else if (can_plus) {
      xp(j) += h;
      problem.residuals(xp, r_plus);
      jac.col(j) = (r_plus - r) / h;
    } else {
      xm(j) -= h;
      problem.residuals(xm, r_minus);
      jac.col(j) = (r - r_minus) / h;
    }
  }
  return jac;
}

LeastSquaresSummary levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                                        const LeastSquaresOptions& opts) {
  if (problem.n_params <= 0 || problem.n_residuals < problem.n_params)
    throw ValidationError(fmt::format("least squares: {} residuals cannot determine {} parameters",
                                      problem.n_residuals, problem.n_params));
  if (x0.size() != problem.n_params) throw ValidationError("least squares: starting point has wrong size");

  auto jacobian_at = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
    if (problem.jacobian) {
      Eigen::MatrixXd jac(problem.n_residuals, problem.n_params);
      problem.jacobian(x, r, jac);
      return jac;
    }
    return numeric_jacobian(problem, x, r, opts.fd_relative_step);
  };

  LeastSquaresSummary s;
  s.x = project(problem, std::move(x0));
  s.residuals.resize(problem.n_residuals);
  problem.residuals(s.x, s.residuals);
  if (!s.residuals.allFinite()) throw NumericalError("least squares: residuals not finite at the starting point");
  s.cost = 0.5 * s.residuals.squaredNorm();
  s.cost_history.push_back(s.cost);
  s.jacobian = jacobian_at(s.x, s.residuals);

  Eigen::MatrixXd normal = s.jacobian.transpose() * s.jacobian;
  Eigen::VectorXd gradient = s.jacobian.transpose() * s.residuals;
  Eigen::VectorXd scale = normal.diagonal().cwiseMax(1e-300);
  double mu = opts.initial_damping;
  double nu = 2.0;
  Eigen::VectorXd r_new(problem.n_residuals);

  for (s.iterations = 0; s.iterations < opts.max_iterations; ++s.iterations) {
    const double scaled_gradient = (gradient.array().abs() / scale.array().sqrt()).maxCoeff();
    if (scaled_gradient <= opts.gtol * std::sqrt(2.0 * s.cost + 1e-300)) {
      s.converged = true;
      s.message = "gradient below tolerance";
      return s;
    }

    Eigen::MatrixXd damped = normal;
    damped.diagonal() += mu * scale;
    const Eigen::VectorXd step_raw = damped.ldlt().solve(-gradient);
    const Eigen::VectorXd x_new = project(problem, s.x + step_raw);
    const Eigen::VectorXd step = x_new - s.x;

    problem.residuals(x_new, r_new);
    const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm() : std::numeric_limits<double>::infinity();
    const double predicted = -(gradient.dot(step) + 0.5 * step.dot(normal * step));
    const double actual = s.cost - cost_new;
    const double gain = predicted > 0.0 ? actual / predicted : -1.0;

    if (actual >= 0.0 && gain > 0.0) {
      // Step size in the metric of the (accumulated) curvature diagonal.
      const Eigen::VectorXd d = scale.cwiseSqrt();
      const bool small_step = d.cwiseProduct(step).norm() <= opts.xtol * (d.cwiseProduct(s.x).norm() + opts.xtol);
      const bool small_decrease = actual <= opts.ftol * s.cost && predicted <= opts.ftol * s.cost;
      s.x = x_new;
      s.residuals = r_new;
      s.cost = cost_new;
      s.cost_history.push_back(s.cost);
      s.jacobian = jacobian_at(s.x, s.residuals);
      normal = s.jacobian.transpose() * s.jacobian;
      gradient = s.jacobian.transpose() * s.residuals;
      scale = scale.cwiseMax(normal.diagonal());
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
      nu = 2.0;
      if (small_decrease || small_step) {
        s.converged = true;
        s.message = small_decrease ? "relative cost decrease below tolerance" : "step below tolerance";
        ++s.iterations;
        return s;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e20) {
        s.converged = true;
        s.message = "no further decrease possible";
        return s;
      }
    }
  }
  s.converged = false;
  s.message = fmt::format("iteration budget of {} exhausted", opts.max_iterations);
  return s;
}

CovarianceEstimate estimate_covariance(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& residuals,
                                       double condition_threshold) {
  const Eigen::Index n = jacobian.cols();
  const Eigen::Index m = jacobian.rows();
  CovarianceEstimate out;
  out.reduced_chi_sq = m > n ? residuals.squaredNorm() / static_cast<double>(m - n) : 0.0;

  const Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
  Eigen::VectorXd norms = normal.diagonal().cwiseSqrt();
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(norms(j) > 0.0)) norms(j) = 1.0;
  const Eigen::MatrixXd normalized = norms.cwiseInverse().asDiagonal() * normal * norms.cwiseInverse().asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  const double lmin = lambda.minCoeff();
  out.condition_number = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  out.ill_conditioned = !(out.condition_number < condition_threshold) || normal.diagonal().minCoeff() <= 0.0;
  out.weakest_direction = eig.eigenvectors().col(0);

  // Pseudo-inverse in normalised coordinates; directions below the threshold
  // get infinite variance rather than a meaningless huge number.
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::VectorXd v = eig.eigenvectors().col(k);
    const double l = lambda(k);
    if (l > lmax / condition_threshold)
      inv += (v * v.transpose()) / l;
    else
      inv += (v * v.transpose()) * std::numeric_limits<double>::infinity();
  }
  out.covariance = norms.cwiseInverse().asDiagonal() * inv * norms.cwiseInverse().asDiagonal();
  out.covariance *= out.reduced_chi_sq;
  return out;
}

}  // namespace holespin
