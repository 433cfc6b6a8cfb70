#include "signoise/stat_kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "signoise/errors.hpp"
#include "signoise/metrics.hpp"
#include "signoise/parallel.hpp"
#include "signoise/rng.hpp"

namespace signoise {

double log_gamma(double x) {
  if (!(x > 0)) throw DomainError("log_gamma requires x > 0");
  static constexpr std::array<double, 9> c{
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection: Γ(x)Γ(1-x) = π / sin(πx)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (std::size_t i = 1; i < c.size(); ++i) a += c[i] / (x + static_cast<double>(i));
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

double reg_gamma_lower(double s, double x) {
  if (!(s > 0)) throw DomainError("reg_gamma_lower requires s > 0");
  if (!(x >= 0)) throw DomainError("reg_gamma_lower requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  constexpr double eps = 1e-16;
  constexpr int max_iter = 100000;
  const double log_prefix = s * std::log(x) - x - log_gamma(s);

  if (x < s + 1.0) {
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < max_iter; ++n) {
      term *= x / (s + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * eps) break;
    }
    return std::clamp(sum * std::exp(log_prefix), 0.0, 1.0);
  }

  // Upper tail Q(s, x) by the modified Lentz method.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return std::clamp(1.0 - std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi_squared_cdf(double x, double dof) {
  if (!(dof > 0)) throw DomainError("chi-squared degrees of freedom must be > 0");
  if (x <= 0) return 0.0;
  return reg_gamma_lower(dof / 2.0, x / 2.0);
}

double within_tolerance_probability(std::size_t n, double k) {
  if (n < 2) throw DomainError("within-tolerance probability needs n >= 2");
  if (!(k > 0)) throw DomainError("tolerance k must be > 0");
  const double dof = static_cast<double>(n - 1);
  const double hi = (1.0 + k) * (1.0 + k) * dof;
  const double lo = k < 1.0 ? (1.0 - k) * (1.0 - k) * dof : 0.0;
  return chi_squared_cdf(hi, dof) - chi_squared_cdf(lo, dof);
}

std::optional<std::size_t> min_checkpoints(const MinCheckpointQuery& q) {
  if (!(q.k > 0)) throw DomainError("min_checkpoints: k must be > 0");
  if (!(q.alpha > 0 && q.alpha < 1)) throw DomainError("min_checkpoints: alpha must be in (0, 1)");
  for (std::size_t n = 2; n <= kMinCheckpointCap; ++n)
    if (within_tolerance_probability(n, q.k) >= q.alpha) return n;
  return std::nullopt;
}

ToleranceEstimate empirical_within_tolerance(std::span<const double> window, std::size_t n,
                                             double k, std::size_t trials, std::uint64_t seed,
                                             unsigned threads) {
  if (n < 2) throw DomainError("within-tolerance estimate needs n >= 2");
  if (window.size() <= n) throw InsufficientCheckpointsError(window.size(), n + 1);
  if (trials == 0) throw DomainError("within-tolerance estimate needs at least one trial");
  if (!(k > 0)) throw DomainError("tolerance k must be > 0");

  const double sigma = sample_std(window);
  if (sigma == 0.0) return {1.0, true};

  std::vector<unsigned char> hit(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    Rng rng = Rng::stream(seed, t);
    const auto chosen = sample_indices(rng, window.size(), n);
    std::vector<double> sample;
    sample.reserve(n);
    for (auto idx : chosen) sample.push_back(window[idx]);
    hit[t] = std::fabs(sample_std(sample) - sigma) < k * sigma ? 1 : 0;
  });
  std::size_t count = 0;
  for (auto h : hit) count += h;
  return {static_cast<double>(count) / static_cast<double>(trials), false};
}

Correlation pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("pearson_r: inputs differ in length");
  if (xs.size() < 3) throw DomainError("pearson_r needs at least 3 points");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double a = xs[i] - mx;
    const double b = ys[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson_r: zero variance");
  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  c.r_squared = c.r * c.r;
  return c;
}

}  // namespace signoise
