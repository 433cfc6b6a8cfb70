#include "signoise/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace signoise::optimize {

namespace {

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

struct SimplexRun {
  std::vector<double> x;
  double f;
  std::size_t evals;
  bool converged;
};

SimplexRun simplex_descent(const Objective& f, const std::vector<double>& x0,
                           const std::vector<double>& step, double ftol, std::size_t budget) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  std::size_t evals = 0;
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= n; ++i) {
    fv[i] = safe_eval(f, pts[i]);
    ++evals;
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  bool converged = false;

  while (evals < budget) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (std::isfinite(fv[worst]) && fv[worst] - fv[best] <= ftol) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    for (double& c : centroid) c /= static_cast<double>(n);

    for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + (centroid[d] - pts[worst][d]);
    const double fr = safe_eval(f, xr);
    ++evals;

    if (fr < fv[best]) {
      for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + 2.0 * (centroid[d] - pts[worst][d]);
      const double fe = safe_eval(f, xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflection beat the worst point, inside otherwise.
    const bool outside = fr < fv[worst];
    for (std::size_t d = 0; d < n; ++d)
      xc[d] = outside ? centroid[d] + 0.5 * (xr[d] - centroid[d])
                      : centroid[d] + 0.5 * (pts[worst][d] - centroid[d]);
    const double fc = safe_eval(f, xc);
    ++evals;
    if (fc < (outside ? fr : fv[worst])) {
      pts[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
      fv[i] = safe_eval(f, pts[i]);
      ++evals;
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {pts[best], fv[best], evals, converged};
}

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  std::vector<double> step = options.initial_step;
  if (step.size() != n) {
    step.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) step[i] = x0[i] != 0.0 ? 0.05 * std::fabs(x0[i]) : 0.00025;
  }

  Result res;
  auto run = simplex_descent(f, x0, step, options.ftol, options.max_evaluations);
  res.evaluations = run.evals;
  res.x = run.x;
  res.f = run.f;
  res.converged = run.converged;
  while (options.restart && run.converged && res.evaluations < options.max_evaluations) {
    run = simplex_descent(f, res.x, step, options.ftol, options.max_evaluations - res.evaluations);
    res.evaluations += run.evals;
    const double improvement = res.f - run.f;
    if (run.f < res.f) {
      res.x = run.x;
      res.f = run.f;
    }
    res.converged = run.converged;
    if (!(improvement >= options.ftol)) break;
  }
  return res;
}

bool solve_spd(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return true;
}

Result levenberg_marquardt(const LeastSquaresProblem& problem, std::vector<double> x0,
                           const LevenbergMarquardtOptions& options) {
  const std::size_t p = problem.n_params;
  const std::size_t m = problem.n_residuals;
  const auto project = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < p; ++i) {
      if (!problem.lower.empty()) x[i] = std::max(x[i], problem.lower[i]);
      if (!problem.upper.empty()) x[i] = std::min(x[i], problem.upper[i]);
    }
  };
  std::vector<double> r(m), r_try(m), jac(m * p);
  const auto cost = [&](const std::vector<double>& x, std::vector<double>& res) {
    problem.residuals(x, res);
    double c = 0.0;
    for (double v : res) c += v * v;
    return std::isfinite(c) ? 0.5 * c : std::numeric_limits<double>::infinity();
  };
  const auto compute_jacobian = [&](const std::vector<double>& x) {
    if (problem.jacobian) {
      problem.jacobian(x, jac);
      return;
    }
    std::vector<double> xh = x, rh(m);
    for (std::size_t j = 0; j < p; ++j) {
      const double h = 1e-7 * std::max(1.0, std::fabs(x[j]));
      xh[j] = x[j] + h;
      problem.residuals(xh, rh);
      for (std::size_t i = 0; i < m; ++i) jac[i * p + j] = (rh[i] - r[i]) / h;
      xh[j] = x[j];
    }
  };

  Result res;
  project(x0);
  std::vector<double> x = std::move(x0);
  double c = cost(x, r);
  res.evaluations = 1;
  double lambda = 1e-3;
  std::vector<double> jtj(p * p), jtr(p), a(p * p), delta(p), x_try(p);

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    compute_jacobian(x);
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        const double jij = jac[i * p + j];
        jtr[j] += jij * r[i];
        for (std::size_t k = 0; k <= j; ++k) jtj[j * p + k] += jij * jac[i * p + k];
      }
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = j + 1; k < p; ++k) jtj[j * p + k] = jtj[k * p + j];

    double gmax = 0.0;
    for (double g : jtr) gmax = std::max(gmax, std::fabs(g));
    if (gmax <= options.gtol) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    while (!accepted && lambda < 1e16) {
      a = jtj;
      for (std::size_t j = 0; j < p; ++j) a[j * p + j] += lambda * std::max(jtj[j * p + j], 1e-12);
      for (std::size_t j = 0; j < p; ++j) delta[j] = -jtr[j];
      if (!solve_spd(a, delta, p)) {
        lambda *= 10.0;
        continue;
      }
      for (std::size_t j = 0; j < p; ++j) x_try[j] = x[j] + delta[j];
      project(x_try);
      const double c_try = cost(x_try, r_try);
      ++res.evaluations;
      if (c_try < c) {
        double step_norm = 0.0, x_norm = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
          step_norm += (x_try[j] - x[j]) * (x_try[j] - x[j]);
          x_norm += x[j] * x[j];
        }
        const double rel_reduction = (c - c_try) / std::max(c, 1e-300);
        x = x_try;
        r = r_try;
        c = c_try;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (rel_reduction < options.ftol ||
            std::sqrt(step_norm) <= options.xtol * (std::sqrt(x_norm) + options.xtol)) {
          res.converged = true;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      // No descent direction left at machine precision.
      res.converged = true;
      break;
    }
    if (res.converged) break;
  }
  res.x = std::move(x);
  res.f = c;
  return res;
}

}  // namespace signoise::optimize
