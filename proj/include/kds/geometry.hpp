#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kds/errors.hpp"
#include "kds/params.hpp"
#include "kds/roots.hpp"

namespace kds {

// Delta(r) = (r^2 + a^2)(1 - r^2/l^2) - 2 M r, the horizon polynomial.
inline double delta_eval(const BlackHoleParams& p, double r) {
  return (r * r + p.a * p.a) * (1.0 - r * r / (p.l * p.l)) - 2.0 * p.M * r;
}

// k-th derivative of Delta, k <= 3 (Delta'''' is constant -24/l^2, not needed).
inline double delta_deriv(const BlackHoleParams& p, double r, int k) {
  const double l2 = p.l * p.l, a2 = p.a * p.a;
  switch (k) {
    case 0:
      return delta_eval(p, r);
    case 1:
      return 2.0 * r - 4.0 * r * r * r / l2 - 2.0 * a2 * r / l2 - 2.0 * p.M;
    case 2:
      return 2.0 - 2.0 * a2 / l2 - 12.0 * r * r / l2;
    case 3:
      return -24.0 * r / l2;
    default:
      throw OutOfDomain("delta_deriv: k must be 0..3");
  }
}

// Coefficients of Delta as a polynomial in r (index = power).
inline std::vector<double> delta_coeffs(const BlackHoleParams& p) {
  const double l2 = p.l * p.l, a2 = p.a * p.a;
  return {a2, -2.0 * p.M, 1.0 - a2 / l2, 0.0, -1.0 / l2};
}

enum class Subextremality { subextremal, not_subextremal, borderline };

inline const char* to_string(Subextremality s) {
  switch (s) {
    case Subextremality::subextremal:
      return "subextremal";
    case Subextremality::not_subextremal:
      return "not_subextremal";
    default:
      return "borderline";
  }
}

// Discriminant-style polynomial P(x, z), x = a^2/l^2, z = M^2/l^2. Delta has
// four distinct real roots iff P > 0 and |a| < l. For a = 0 this reduces to
// z(1 - 27 z) > 0, i.e. 0 < M^2/l^2 < 1/27.
inline double subextremality_polynomial(double x, double z) {
  const double omx = 1.0 - x;
  return -27.0 * z * z + z * (36.0 * x * omx + omx * omx * omx) - 16.0 * x * x * x -
         8.0 * x * x * omx * omx - x * omx * omx * omx * omx;
}

namespace detail {
// Magnitude scale of the monomials of P, for the borderline tolerance.
inline double subextremality_scale(double x, double z) {
  const double omx = std::abs(1.0 - x);
  return std::max(1.0, 27.0 * z * z + std::abs(z) * (36.0 * std::abs(x) * omx + omx * omx * omx) +
                           16.0 * std::abs(x * x * x) + 8.0 * x * x * omx * omx +
                           std::abs(x) * omx * omx * omx * omx);
}
}  // namespace detail

inline Subextremality classify_subextremal(double a, double M, double l) {
  if (!(M > 0.0) || !(l > 0.0)) throw OutOfDomain("classify_subextremal: need M > 0, l > 0");
  const double x = a * a / (l * l), z = M * M / (l * l);
  const double P = subextremality_polynomial(x, z);
  const double tol = 1e-12 * detail::subextremality_scale(x, z);
  if (std::abs(P) <= tol) return Subextremality::borderline;
  if (P > 0.0 && std::abs(a) < l) return Subextremality::subextremal;
  return Subextremality::not_subextremal;
}

inline bool is_subextremal(const BlackHoleParams& p) {
  return classify_subextremal(p.a, p.M, p.l) == Subextremality::subextremal;
}

// Horizon radii, surface gravities, angular velocities and the tortoise
// partial-fraction residues, all derived from the four roots of Delta.
struct HorizonData {
  std::array<double, 4> roots{};  // ascending: rbar_minus < 0 <= r_minus < r_plus < rbar_plus
  double r_plus = 0.0;
  double rbar_plus = 0.0;
  double r_minus = 0.0;
  double rbar_minus = 0.0;
  double kappa_plus = 0.0;      // Delta'(r_plus) / (2 (r_plus^2 + a^2)) > 0
  double kappa_bar_plus = 0.0;  // |Delta'(rbar_plus)| / (2 (rbar_plus^2 + a^2)) > 0
  double omega_plus = 0.0;      // a Xi / (r_plus^2 + a^2)
  double omega_bar_plus = 0.0;  // a Xi / (rbar_plus^2 + a^2)
  double Xi = 1.0;
  std::array<double, 4> tortoise_coeffs{};  // A_i = (r_i^2 + a^2) / Delta'(r_i)
};

inline HorizonData horizon_data(const BlackHoleParams& p) {
  if (!is_subextremal(p))
    throw NotSubextremal("horizon_data: parameters are not subextremal");
  auto croots = poly_roots(delta_coeffs(p));
  if (croots.size() != 4) throw NotSubextremal("horizon_data: quartic degenerated");
  HorizonData h;
  for (int i = 0; i < 4; ++i) {
    // Newton-polish each root once more on the exact polynomial.
    double r = croots[i].real();
    for (int it = 0; it < 3; ++it) {
      double d = delta_deriv(p, r, 1);
      if (d == 0.0) break;
      r -= delta_eval(p, r) / d;
    }
    h.roots[i] = r;
  }
  std::sort(h.roots.begin(), h.roots.end());
  h.rbar_minus = h.roots[0];
  h.r_minus = h.roots[1];
  h.r_plus = h.roots[2];
  h.rbar_plus = h.roots[3];
  h.Xi = p.xi();
  const double a2 = p.a * p.a;
  const double dp = delta_deriv(p, h.r_plus, 1);
  const double dbp = delta_deriv(p, h.rbar_plus, 1);
  h.kappa_plus = dp / (2.0 * (h.r_plus * h.r_plus + a2));
  h.kappa_bar_plus = std::abs(dbp) / (2.0 * (h.rbar_plus * h.rbar_plus + a2));
  h.omega_plus = p.a * h.Xi / (h.r_plus * h.r_plus + a2);
  h.omega_bar_plus = p.a * h.Xi / (h.rbar_plus * h.rbar_plus + a2);
  for (int i = 0; i < 4; ++i)
    h.tortoise_coeffs[i] =
        (h.roots[i] * h.roots[i] + a2) / delta_deriv(p, h.roots[i], 1);
  return h;
}

// Unique maximizer of Delta/(r^2+a^2)^2 in (r_plus, rbar_plus) and unique
// maximizer of Delta itself. Both from bracketed root-finding on the exact
// derivative polynomials; for a = 0 the first is exactly 3M.
struct SpecialRadii {
  double r_delta_frac = 0.0;
  double r_delta_max = 0.0;
};

namespace detail {
// pol(r) = -Xi r^3 + 3 M r^2 - a^2 Xi r - M a^2;
// d/dr [Delta/(r^2+a^2)^2] = 2 pol(r) / (r^2+a^2)^3.
inline double frac_pol(const BlackHoleParams& p, double r) {
  const double Xi = p.xi(), a2 = p.a * p.a;
  return -Xi * r * r * r + 3.0 * p.M * r * r - a2 * Xi * r - p.M * a2;
}
inline double frac_pol_deriv(const BlackHoleParams& p, double r) {
  const double Xi = p.xi(), a2 = p.a * p.a;
  return -3.0 * Xi * r * r + 6.0 * p.M * r - a2 * Xi;
}
}  // namespace detail

inline SpecialRadii special_radii(const BlackHoleParams& p, const HorizonData& h) {
  SpecialRadii s;
  s.r_delta_frac = refine_root(
      [&p](double r) { return std::pair{detail::frac_pol(p, r), detail::frac_pol_deriv(p, r)}; },
      h.r_plus, h.rbar_plus, 1e-14);
  s.r_delta_max = refine_root(
      [&p](double r) { return std::pair{delta_deriv(p, r, 1), delta_deriv(p, r, 2)}; },
      h.r_plus, h.rbar_plus, 1e-14);
  return s;
}

inline SpecialRadii special_radii(const BlackHoleParams& p) {
  return special_radii(p, horizon_data(p));
}

// Closed-form tortoise coordinate r*(r) = sum_i A_i ln|r - r_i| + C on
// (r_plus, rbar_plus), normalized so that r*(r_delta_frac) = 0.
class Tortoise {
 public:
  Tortoise(const BlackHoleParams& p, const HorizonData& h)
      : p_(p), h_(h), r_frac_(special_radii(p, h).r_delta_frac) {
    offset_ = 0.0;
    offset_ = -raw(r_frac_);
  }

  double r_plus() const { return h_.r_plus; }
  double rbar_plus() const { return h_.rbar_plus; }
  double r_delta_frac() const { return r_frac_; }

  double operator()(double r) const {
    if (!(r > h_.r_plus && r < h_.rbar_plus))
      throw OutOfDomain("tortoise: r outside (r_plus, rbar_plus)");
    return raw(r) + offset_;
  }

  // dr*/dr = (r^2+a^2)/Delta
  double deriv(double r) const {
    return (r * r + p_.a * p_.a) / delta_eval(p_, r);
  }

  // Inverse map: bisection bracket, then Newton.
  double inverse(double rstar) const {
    double lo = h_.r_plus, hi = h_.rbar_plus;
    // Walk the bracket in from the horizons until the values straddle rstar.
    double mlo = next_after_plus(), mhi = next_before_barplus();
    while ((*this)(mlo) > rstar) {
      mlo = h_.r_plus + 0.5 * (mlo - h_.r_plus);
      if (mlo - h_.r_plus < 1e-300) throw OutOfDomain("tortoise inverse: rstar too negative");
    }
    while ((*this)(mhi) < rstar) {
      mhi = h_.rbar_plus - 0.5 * (h_.rbar_plus - mhi);
      if (h_.rbar_plus - mhi < 1e-300) throw OutOfDomain("tortoise inverse: rstar too positive");
    }
    lo = mlo;
    hi = mhi;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      double fx = (*this)(x)-rstar;
      if (fx > 0.0)
        hi = x;
      else
        lo = x;
      double step = fx / deriv(x);
      double xn = x - step;
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if (std::abs(xn - x) <= 1e-15 * (1.0 + std::abs(x)) || hi - lo < 1e-15 * (1.0 + std::abs(x)))
        return xn;
      x = xn;
    }
    return x;
  }

 private:
  double raw(double r) const {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
      s += h_.tortoise_coeffs[i] * std::log(std::abs(r - h_.roots[i]));
    return s;
  }
  double next_after_plus() const { return h_.r_plus + 1e-3 * (h_.rbar_plus - h_.r_plus); }
  double next_before_barplus() const { return h_.rbar_plus - 1e-3 * (h_.rbar_plus - h_.r_plus); }

  BlackHoleParams p_;
  HorizonData h_;
  double r_frac_;
  double offset_;
};

// Pointwise causal predicates at (r, theta).
struct CausalPredicates {
  bool in_ergoregion = false;
  bool w_timelike = false;
  double g_tt = 0.0;  // sign of g(dt, dt): positive inside the ergoregion
  double g_ww = 0.0;  // g(W, W) for W = dt + a Xi/(r^2+a^2) dphi
};

inline CausalPredicates causal_predicates(const BlackHoleParams& p, const HorizonData& h,
                                          double r, double theta) {
  if (!(r >= h.r_plus && r <= h.rbar_plus))
    throw OutOfDomain("causal_predicates: r outside [r_plus, rbar_plus]");
  if (!(theta >= 0.0 && theta <= 4.0 * std::atan(1.0)))
    throw OutOfDomain("causal_predicates: theta outside [0, pi]");
  const double a2 = p.a * p.a;
  const double s2 = std::sin(theta) * std::sin(theta);
  const double c2 = std::cos(theta) * std::cos(theta);
  const double dtheta = 1.0 + a2 / (p.l * p.l) * c2;
  const double rho2 = r * r + a2 * c2;
  const double D = delta_eval(p, r);
  CausalPredicates out;
  out.g_tt = -(D - dtheta * a2 * s2) / rho2;
  out.in_ergoregion = (D - dtheta * a2 * s2) < 0.0;
  // g(W,W) = -(Delta/rho^2) (1 - a^2 sin^2(theta)/(r^2+a^2))^2: timelike
  // strictly between the horizons, null on them.
  const double q = 1.0 - a2 * s2 / (r * r + a2);
  out.g_ww = -(D / rho2) * q * q;
  out.w_timelike = out.g_ww < 0.0;
  return out;
}

// max over [r_plus, rbar_plus] of Delta/a^2; the trapping/connected-ergoregion
// criterion compares this against 1 (meaningful only for a != 0).
inline double max_delta_over_a2(const BlackHoleParams& p, const HorizonData& h) {
  if (p.a == 0.0) return std::numeric_limits<double>::infinity();
  const double r_max = special_radii(p, h).r_delta_max;
  return delta_eval(p, r_max) / (p.a * p.a);
}

}  // namespace kds
