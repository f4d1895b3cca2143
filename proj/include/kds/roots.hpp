#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "kds/errors.hpp"

namespace kds {

// Roots of a real polynomial sum_k c[k] r^k via the balanced companion
// matrix, followed by one round of Newton polish per root.
inline std::vector<std::complex<double>> poly_roots(std::vector<double> c) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  if (c.size() < 2) return {};
  const int n = static_cast<int>(c.size()) - 1;

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[i] / c[n];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;

  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);

  auto eval = [&c](std::complex<double> z) {
    std::complex<double> p = 0.0, dp = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
      dp = dp * z + p;
      p = p * z + c[k];
    }
    return std::pair{p, dp};
  };

  std::vector<std::complex<double>> roots;
  roots.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::complex<double> z = es.eigenvalues()(i);
    for (int it = 0; it < 2; ++it) {
      auto [p, dp] = eval(z);
      if (std::abs(dp) > 0.0) {
        std::complex<double> step = p / dp;
        if (std::abs(step) < 0.5 * (1.0 + std::abs(z))) z -= step;
      }
    }
    roots.push_back(z);
  }
  std::sort(roots.begin(), roots.end(), [](auto u, auto v) {
    return u.real() != v.real() ? u.real() < v.real() : u.imag() < v.imag();
  });
  return roots;
}

// Count the real roots among the companion-matrix eigenvalues. A root is
// taken as real when |Im| <= tol * max(1, |Re|).
inline int count_real_roots(const std::vector<double>& coeffs, double tol = 1e-7) {
  int count = 0;
  for (auto z : poly_roots(coeffs))
    if (std::abs(z.imag()) <= tol * std::max(1.0, std::abs(z.real()))) ++count;
  return count;
}

// Real roots inside [lo, hi], polished and sorted.
inline std::vector<double> real_roots_in(const std::vector<double>& coeffs, double lo,
                                         double hi, double tol = 1e-7) {
  std::vector<double> out;
  for (auto z : poly_roots(coeffs)) {
    if (std::abs(z.imag()) > tol * std::max(1.0, std::abs(z.real()))) continue;
    double r = z.real();
    if (r >= lo - 1e-12 * (std::abs(lo) + 1.0) && r <= hi + 1e-12 * (std::abs(hi) + 1.0))
      out.push_back(std::clamp(r, lo, hi));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Bracketed root refinement: bisection until the bracket is small, then
// Newton with bisection fallback. fdf returns (f, f').
template <class FDF>
double refine_root(FDF&& fdf, double lo, double hi, double tol = 1e-13) {
  auto f = [&fdf](double x) { return fdf(x).first; };
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw OutOfDomain("refine_root: endpoints do not bracket");
  for (int it = 0; it < 8; ++it) {
    double mid = 0.5 * (lo + hi), fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    auto [fx, dfx] = fdf(x);
    if (fx == 0.0) return x;
    if (flo * fx < 0.0) {
      hi = x;
    } else {
      lo = x;
      flo = fx;
    }
    double step = dfx != 0.0 ? fx / dfx : 0.0;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= tol * (1.0 + std::abs(x))) return xn;
    x = xn;
  }
  return x;
}

}  // namespace kds
