#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace signoise::optimize {

struct Result {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
  /// Converged when best-to-worst spread of the simplex is below ftol.
  double ftol = 1e-10;
  std::size_t max_evaluations = 100000;
  /// Per-coordinate size of the initial simplex.
  std::vector<double> initial_step;
  /// Restart from the best vertex until a restart improves f by less than ftol.
  bool restart = true;
};

/// Derivative-free simplex descent. Non-finite objective values are treated
/// as +inf, so constraints can be expressed by returning infinity.
Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options);

struct LeastSquaresProblem {
  std::size_t n_params = 0;
  std::size_t n_residuals = 0;
  /// Writes n_residuals residuals for the given parameters.
  std::function<void(std::span<const double> params, std::span<double> residuals)> residuals;
  /// Row-major n_residuals × n_params Jacobian. Forward differences when empty.
  std::function<void(std::span<const double> params, std::span<double> jac)> jacobian;
  std::vector<double> lower;  // empty: unbounded
  std::vector<double> upper;
};

struct LevenbergMarquardtOptions {
  std::size_t max_iterations = 2000;
  double ftol = 1e-15;  // relative reduction of the cost
  double xtol = 1e-12;  // relative step size
  double gtol = 1e-14;  // max-abs gradient
};

/// Damped Gauss-Newton with box bounds by projection. Result.f is ½ Σ r².
Result levenberg_marquardt(const LeastSquaresProblem& problem, std::vector<double> x0,
                           const LevenbergMarquardtOptions& options = {});

/// Solves the dense symmetric positive definite system A x = b in place
/// (Cholesky). Returns false when A is not positive definite.
bool solve_spd(std::vector<double>& a, std::vector<double>& b, std::size_t n);

}  // namespace signoise::optimize
