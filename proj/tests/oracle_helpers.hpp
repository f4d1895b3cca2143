#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they check.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using bigq = boost::multiprecision::cpp_rational;

// Exact Horner evaluation of Delta(r) over the rationals.
inline bigq delta_exact(const bigq& a, const bigq& M, const bigq& l, const bigq& r) {
  return (r * r + a * a) * (1 - r * r / (l * l)) - 2 * M * r;
}

// Cardano (trigonometric branch) for a depressed-able real cubic
// c3 x^3 + c2 x^2 + c1 x + c0 with three real roots.
inline std::vector<double> cubic_roots(double c3, double c2, double c1, double c0) {
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = -4.0 * p * p * p - 27.0 * q * q;
  std::vector<double> out;
  if (disc > 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double phi = std::acos(std::clamp(3.0 * q / (p * m), -1.0, 1.0)) / 3.0;
    for (int k = 0; k < 3; ++k)
      out.push_back(m * std::cos(phi - 2.0 * M_PI * k / 3.0) - a / 3.0);
  } else {
    // single real root via Cardano radicals
    const double s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    const double u = std::cbrt(-q / 2.0 + s), v = std::cbrt(-q / 2.0 - s);
    out.push_back(u + v - a / 3.0);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Real-root count of a quartic by Sturm-free sampling: evaluate on a fine
// grid over a generous interval and count sign changes. Intended as a slow,
// independent check for clearly non-degenerate cases.
inline int quartic_real_roots_by_scan(const std::array<double, 5>& c, double lo, double hi,
                                      int n = 200000) {
  auto eval = [&c](double x) {
    return ((((c[4] * x) + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
  };
  int count = 0;
  double prev = eval(lo);
  for (int i = 1; i <= n; ++i) {
    double x = lo + (hi - lo) * i / n;
    double cur = eval(x);
    if (prev == 0.0)
      ++count;
    else if (prev * cur < 0.0)
      ++count;
    prev = cur;
  }
  return count;
}

// Central finite difference of order 2.
template <class F>
double fd_derivative(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline std::mt19937_64 rng(unsigned seed = 0x5eed) { return std::mt19937_64(seed); }

}  // namespace oracle
