#pragma once

// Independent reference computations used by the tests: a dense matrix
// exponential, adaptive quadrature and small statistics helpers.

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "wvamp/dynamics.hpp"

namespace oracle {

using wvamp::Complex;
using wvamp::Mat2;

constexpr double kPi = 3.14159265358979323846;

inline double max_abs(const Mat2& a) {
  double m = 0.0;
  for (const Complex& z : a.m) m = std::max(m, std::abs(z));
  return m;
}

/// exp(A) by scaling and squaring with a Taylor series on the scaled matrix.
inline Mat2 expm(const Mat2& a) {
  int squarings = 0;
  double norm = max_abs(a) * 2.0;
  while (norm > 0.25) {
    norm *= 0.5;
    ++squarings;
  }
  const Mat2 x = Complex{std::ldexp(1.0, -squarings)} * a;
  Mat2 term = Mat2::identity();
  Mat2 sum = Mat2::identity();
  for (int k = 1; k < 30; ++k) {
    term = Complex{1.0 / k} * (term * x);
    sum = sum + term;
    if (max_abs(term) < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// exp(-i t H) applied to a state.
inline wvamp::Vec2 propagate(const Mat2& h, double t, const wvamp::Vec2& v) {
  return expm(Complex{0.0, -t} * h) * v;
}

/// Adaptive Gauss-Kronrod on [a, b].
template <class F>
double integrate(F f, double a, double b, double tol = 1e-13) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, &err);
}

/// Integral over [a, b] split at the given interior points.
template <class F>
double integrate_pieces(F f, std::vector<double> cuts, double tol = 1e-13) {
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += integrate(f, cuts[i], cuts[i + 1], tol);
  return s;
}

/// Integral over [0, 40 scale] in panels of one scale each.
template <class F>
double integrate_decay(F f, double scale) {
  std::vector<double> cuts;
  for (int k = 0; k <= 40; ++k) cuts.push_back(k * scale);
  return integrate_pieces(f, cuts);
}

struct Moments {
  double mean = 0.0, stddev = 0.0, stderr_mean = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
  Moments m;
  const double n = static_cast<double>(x.size());
  for (double v : x) m.mean += v;
  m.mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.stddev = std::sqrt(ss / (n - 1.0));
  m.stderr_mean = m.stddev / std::sqrt(n);
  return m;
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = cdf(x[i]);
    d = std::max({d, std::abs(c - i / n), std::abs((i + 1) / n - c)});
  }
  return d;
}

/// Asymptotic KS critical value at 1% significance.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace oracle
