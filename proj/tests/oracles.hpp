#pragma once

// Independent reference implementations used as test oracles. Deliberately
// naive: no shared code with the library.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

struct Pairs {
  std::int64_t concordant = 0, discordant = 0, tied = 0;
};

inline Pairs count_pairs(const std::vector<double>& a, const std::vector<double>& b) {
  Pairs p;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      if (a[i] == a[j] || b[i] == b[j])
        ++p.tied;
      else if (s > 0)
        ++p.concordant;
      else
        ++p.discordant;
    }
  return p;
}

inline double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

inline double sample_std(const std::vector<double>& v) {
  const double m = mean(v);
  long double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(static_cast<double>(s / (v.size() - 1)));
}

// P(chi2_nu < x) for integer nu, closed forms.
inline double chi2_cdf(double x, int nu) {
  if (x <= 0) return 0.0;
  const double h = x / 2;
  if (nu % 2 == 0) {
    // 1 - e^{-h} sum_{j < nu/2} h^j / j!
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < nu / 2; ++j) {
      term *= h / j;
      sum += term;
    }
    return 1.0 - std::exp(-h) * sum;
  }
  // odd: erf(sqrt(h)) - e^{-h} sum_{j=1}^{(nu-1)/2} h^{j-1/2} / Gamma(j + 1/2)
  double cdf = std::erf(std::sqrt(h));
  double term = std::sqrt(h) / std::tgamma(1.5);  // h^{1/2} / Gamma(3/2)
  for (int j = 1; j <= (nu - 1) / 2; ++j) {
    cdf -= std::exp(-h) * term;
    term *= h / (j + 0.5);
  }
  return cdf;
}

inline double within_tolerance(int n, double k) {
  const int nu = n - 1;
  const double lo = k >= 1 ? 0.0 : (1 - k) * (1 - k) * nu;
  const double hi = (1 + k) * (1 + k) * nu;
  return chi2_cdf(hi, nu) - chi2_cdf(lo, nu);
}

inline int min_n_scan(double k, double alpha, int cap = 100000) {
  for (int n = 2; n <= cap; ++n)
    if (within_tolerance(n, k) >= alpha) return n;
  return -1;
}

}  // namespace oracle
