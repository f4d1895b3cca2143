#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "kds/potential.hpp"
#include "kds/radial.hpp"
#include "kds/spectrum.hpp"

namespace kds {

enum class CurrentKind { Qh, Qy, Qf, Qt, QK, QKbar };

inline const char* to_string(CurrentKind k) {
  switch (k) {
    case CurrentKind::Qh: return "Qh";
    case CurrentKind::Qy: return "Qy";
    case CurrentKind::Qf: return "Qf";
    case CurrentKind::Qt: return "Qt";
    case CurrentKind::QK: return "QK";
    default: return "QKbar";
  }
}

// A scalar multiplier profile on the r* line with as many derivatives as the
// current identities consume (three for f, two for h, one for y).
struct Profile {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<double(double)> d3;

  double operator()(double x) const { return value ? value(x) : 0.0; }
  double deriv1(double x) const { return d1 ? d1(x) : 0.0; }
  double deriv2(double x) const { return d2 ? d2(x) : 0.0; }
  double deriv3(double x) const {
    if (d3) return d3(x);
    if (!d2) return 0.0;
    const double h = 1e-5;
    return (d2(x + h) - d2(x - h)) / (2.0 * h);
  }
  bool empty() const { return !value; }
};

inline Profile zero_profile() { return {}; }

inline Profile constant_profile(double c) {
  Profile p;
  p.value = [c](double) { return c; };
  p.d1 = [](double) { return 0.0; };
  p.d2 = [](double) { return 0.0; };
  p.d3 = [](double) { return 0.0; };
  return p;
}

namespace detail {

// Smooth C-infinity step based on exp(-1/s): 0 for s <= 0, 1 for s >= 1.
struct SmoothStep {
  static double phi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
  static double dphi(double s) { return s > 0.0 ? phi(s) / (s * s) : 0.0; }
  static double ddphi(double s) {
    return s > 0.0 ? phi(s) * (1.0 - 2.0 * s) / (s * s * s * s) : 0.0;
  }
  static double value(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = phi(s), b = phi(1.0 - s);
    return a / (a + b);
  }
  static double d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double a = phi(s), b = phi(1.0 - s);
    const double ap = dphi(s), bp = -dphi(1.0 - s);
    const double den = a + b;
    return (ap * den - a * (ap + bp)) / (den * den);
  }
  static double d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double a = phi(s), b = phi(1.0 - s);
    const double ap = dphi(s), bp = -dphi(1.0 - s);
    const double app = ddphi(s), bpp = ddphi(1.0 - s);
    const double den = a + b, denp = ap + bp, denpp = app + bpp;
    const double num = ap * den - a * denp;
    const double nump = app * den - a * denpp;
    return (nump * den - 2.0 * num * denp) / (den * den * den);
  }
};

}  // namespace detail

// C-infinity bump in r*: 1 on [c - plateau, c + plateau], supported on
// [c - support, c + support].
inline Profile bump_profile(double center, double plateau, double support) {
  if (!(support > plateau && plateau > 0.0))
    throw OutOfDomain("bump_profile: need support > plateau > 0");
  const double w = support - plateau;
  Profile p;
  auto sl = [center, support, w](double x) { return (x - (center - support)) / w; };
  auto sr = [center, support, w](double x) { return ((center + support) - x) / w; };
  p.value = [=](double x) {
    return detail::SmoothStep::value(sl(x)) * detail::SmoothStep::value(sr(x));
  };
  p.d1 = [=](double x) {
    const double L = detail::SmoothStep::value(sl(x)), R = detail::SmoothStep::value(sr(x));
    const double Lp = detail::SmoothStep::d1(sl(x)) / w, Rp = -detail::SmoothStep::d1(sr(x)) / w;
    return Lp * R + L * Rp;
  };
  p.d2 = [=](double x) {
    const double L = detail::SmoothStep::value(sl(x)), R = detail::SmoothStep::value(sr(x));
    const double Lp = detail::SmoothStep::d1(sl(x)) / w, Rp = -detail::SmoothStep::d1(sr(x)) / w;
    const double Lpp = detail::SmoothStep::d2(sl(x)) / (w * w);
    const double Rpp = detail::SmoothStep::d2(sr(x)) / (w * w);
    return Lpp * R + 2.0 * Lp * Rp + L * Rpp;
  };
  return p;
}

// C-infinity plateau: 1 on [lo, hi], falling to 0 over transition zones of
// width t on both sides.
inline Profile plateau_profile(double lo, double hi, double t) {
  Profile p;
  p.value = [=](double x) {
    return detail::SmoothStep::value((x - (lo - t)) / t) *
           detail::SmoothStep::value(((hi + t) - x) / t);
  };
  p.d1 = [=](double x) {
    const double L = detail::SmoothStep::value((x - (lo - t)) / t);
    const double R = detail::SmoothStep::value(((hi + t) - x) / t);
    const double Lp = detail::SmoothStep::d1((x - (lo - t)) / t) / t;
    const double Rp = -detail::SmoothStep::d1(((hi + t) - x) / t) / t;
    return Lp * R + L * Rp;
  };
  p.d2 = [=](double x) {
    const double L = detail::SmoothStep::value((x - (lo - t)) / t);
    const double R = detail::SmoothStep::value(((hi + t) - x) / t);
    const double Lp = detail::SmoothStep::d1((x - (lo - t)) / t) / t;
    const double Rp = -detail::SmoothStep::d1(((hi + t) - x) / t) / t;
    const double Lpp = detail::SmoothStep::d2((x - (lo - t)) / t) / (t * t);
    const double Rpp = detail::SmoothStep::d2(((hi + t) - x) / t) / (t * t);
    return Lpp * R + 2.0 * Lp * Rp + L * Rpp;
  };
  return p;
}

namespace detail {

// Shared geometry for composite profiles g(r(r*)): the conversion factor
// s(r) = Delta/(r^2+a^2) and its r-derivatives.
struct ChainFactors {
  BlackHoleParams p;
  double s(double r) const { return delta_eval(p, r) / (r * r + p.a * p.a); }
  double s1(double r) const {
    const double u = r * r + p.a * p.a;
    return (delta_deriv(p, r, 1) * u - 2.0 * r * delta_eval(p, r)) / (u * u);
  }
  double s2(double r) const {
    const double u = r * r + p.a * p.a;
    const double N = delta_deriv(p, r, 1) * u - 2.0 * r * delta_eval(p, r);
    const double Np = delta_deriv(p, r, 2) * u - 2.0 * delta_eval(p, r);
    return Np / (u * u) - 4.0 * r * N / (u * u * u);
  }
};

// Profile from an analytic function of r with derivatives up to third order:
//   f(r*) = g(r), f' = s g', f'' = s s' g' + s^2 g'',
//   f''' = s (s'^2 + s s'') g' + 3 s^2 s' g'' + s^3 g'''.
inline Profile function_of_r_profile(std::shared_ptr<const Tortoise> rs,
                                     const BlackHoleParams& p, std::function<double(double)> g,
                                     std::function<double(double)> g1,
                                     std::function<double(double)> g2,
                                     std::function<double(double)> g3) {
  ChainFactors cf{p};
  Profile prof;
  prof.value = [rs, g](double x) { return g(rs->inverse(x)); };
  prof.d1 = [rs, cf, g1](double x) {
    double r = rs->inverse(x);
    return cf.s(r) * g1(r);
  };
  prof.d2 = [rs, cf, g1, g2](double x) {
    double r = rs->inverse(x);
    double s = cf.s(r);
    return s * cf.s1(r) * g1(r) + s * s * g2(r);
  };
  if (g3)
    prof.d3 = [rs, cf, g1, g2, g3](double x) {
      double r = rs->inverse(x);
      double s = cf.s(r), s1 = cf.s1(r), s2 = cf.s2(r);
      return s * (s1 * s1 + s * s2) * g1(r) + 3.0 * s * s * s1 * g2(r) + s * s * s * g3(r);
    };
  return prof;
}

}  // namespace detail

// arctan-shaped multiplier vanishing at r = center, increasing in r.
inline Profile arctan_profile(std::shared_ptr<const Tortoise> rs, const BlackHoleParams& p,
                              double center, double slope = 1.0) {
  auto g = [center, slope](double r) { return 2.0 / M_PI * std::atan(slope * (r - center)); };
  auto g1 = [center, slope](double r) {
    double t = slope * (r - center);
    return 2.0 / M_PI * slope / (1.0 + t * t);
  };
  auto g2 = [center, slope](double r) {
    double t = slope * (r - center);
    double q = 1.0 + t * t;
    return -2.0 / M_PI * 2.0 * slope * slope * t / (q * q);
  };
  auto g3 = [center, slope](double r) {
    double t = slope * (r - center);
    double q = 1.0 + t * t;
    return 2.0 / M_PI * slope * slope * slope * (6.0 * t * t - 2.0) / (q * q * q);
  };
  return detail::function_of_r_profile(rs, p, g, g1, g2, g3);
}

// Exponential multiplier y = exp(c r).
inline Profile exp_r_profile(std::shared_ptr<const Tortoise> rs, const BlackHoleParams& p,
                             double c) {
  auto g = [c](double r) { return std::exp(c * r); };
  auto g1 = [c, g](double r) { return c * g(r); };
  auto g2 = [c, g](double r) { return c * c * g(r); };
  auto g3 = [c, g](double r) { return c * c * c * g(r); };
  return detail::function_of_r_profile(rs, p, g, g1, g2, g3);
}

// Monotone window multiplier y = -exp(-C T(x)) with T' falling smoothly from
// 1 to 0 over [xA, xB] (cubic taper); y < 0, y' = C T' exp(-C T) >= 0, and y'
// vanishes beyond xB.
inline Profile window_exp_profile(double x0, double xA, double xB, double C) {
  if (!(xB > xA)) throw OutOfDomain("window_exp_profile: need xB > xA");
  auto T = [=](double x) {
    if (x <= xA) return x - x0;
    const double w = xB - xA;
    double t = std::min(1.0, (x - xA) / w);
    // integral of 1 - (3t^2 - 2t^3)
    return (xA - x0) + w * (t - t * t * t + 0.5 * t * t * t * t);
  };
  auto Tp = [=](double x) {
    if (x <= xA) return 1.0;
    if (x >= xB) return 0.0;
    double t = (x - xA) / (xB - xA);
    return 1.0 - (3.0 * t * t - 2.0 * t * t * t);
  };
  auto Tpp = [=](double x) {
    if (x <= xA || x >= xB) return 0.0;
    double w = xB - xA;
    double t = (x - xA) / w;
    return -(6.0 * t - 6.0 * t * t) / w;
  };
  Profile p;
  p.value = [=](double x) { return -std::exp(-C * T(x)); };
  p.d1 = [=](double x) { return C * Tp(x) * std::exp(-C * T(x)); };
  p.d2 = [=](double x) {
    return (C * Tpp(x) - C * C * Tp(x) * Tp(x)) * std::exp(-C * T(x));
  };
  return p;
}

struct MultiplierConfig {
  double eps_trap = 0.05;   // |max V - w^2| <= eps_trap * lambda_tilde marks trapping
  double eps_prime = 0.05;  // near-cosmological split inside the de Sitter regime
  double a0_small = 0.05;   // slow-rotation threshold of the bounded regime
  double c_large = 6.0;     // exponent scale of e^{C r} multipliers
  double a_large = 64.0;    // outer slope of the bounded-regime polynomial y
  double c_window = 3.0;    // decay constant of the window multipliers
  double blend_fraction = 1.0 / 20.0;  // f-extension transition width (in r)
  double bump_fraction = 1.0 / 40.0;   // bump plateau/support radius (in r)
  int f_ode_samples = 4001;
};

// Multiplier triple (f, h, y) instantiated for one frequency and regime.
struct MultiplierSet {
  Profile f, h, y;
  RegimeLabel regime;
  std::string recipe;
  double r_trap = 0.0;  // 0 means "not trapped"
  double r_center = 0.0;
  double bound_B = 0.0;
};

namespace detail {

// Solve -f''' / 2 = Delta (r* derivatives) around x_c with
// f(x_c) = 0, f'(x_c) = 1, f''(x_c) = 0, on [x_lo, x_hi]; then blend with
// quintic Hermite pieces to the constants -1 and +1 outside.
struct FOdeTable {
  std::vector<double> x;
  std::vector<double> f, f1, f2;  // values and first/second r*-derivatives
  BlackHoleParams p;
  std::shared_ptr<const Tortoise> rs;

  double f3(double xx) const {
    return -2.0 * delta_eval(p, rs->inverse(xx));
  }
  std::size_t locate(double xx) const {
    auto it = std::upper_bound(x.begin(), x.end(), xx);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    if (i == 0) return 0;
    if (i >= x.size()) return x.size() - 2;
    return i - 1;
  }
  // Quintic Hermite evaluation from stored (f, f', f'') at the bracketing nodes.
  void eval(double xx, double& v, double& v1, double& v2) const {
    std::size_t i = locate(xx);
    const double h = x[i + 1] - x[i];
    const double t = (xx - x[i]) / h;
    const double f0 = f[i], f0p = f1[i] * h, f0pp = f2[i] * h * h;
    const double g0 = f[i + 1], g0p = f1[i + 1] * h, g0pp = f2[i + 1] * h * h;
    // quintic basis in t
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double H0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    const double H1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double K0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    const double K1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    const double K2 = 0.5 * t3 - t4 + 0.5 * t5;
    v = H0 * f0 + H1 * f0p + H2 * f0pp + K0 * g0 + K1 * g0p + K2 * g0pp;
    const double dH0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    const double dH1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    const double dH2 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
    const double dK0 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    const double dK1 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    const double dK2 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
    v1 = (dH0 * f0 + dH1 * f0p + dH2 * f0pp + dK0 * g0 + dK1 * g0p + dK2 * g0pp) / h;
    const double ddH0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    const double ddH1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    const double ddH2 = 1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3;
    const double ddK0 = 60.0 * t - 180.0 * t2 + 120.0 * t3;
    const double ddK1 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    const double ddK2 = 3.0 * t - 12.0 * t2 + 10.0 * t3;
    v2 = (ddH0 * f0 + ddH1 * f0p + ddH2 * f0pp + ddK0 * g0 + ddK1 * g0p + ddK2 * g0pp) / (h * h);
  }
};

// Quintic Hermite blend matching (value, d1, d2) at both ends.
struct QuinticBlend {
  double x0 = 0.0, x1 = 1.0;
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;  // left values
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;  // right values

  void eval(double xx, double& v, double& v1, double& v2, double& v3) const {
    const double h = x1 - x0;
    const double t = (xx - x0) / h;
    const double f0 = a0, f0p = a1 * h, f0pp = a2 * h * h;
    const double g0 = b0, g0p = b1 * h, g0pp = b2 * h * h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double H0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    const double H1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double K0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    const double K1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    const double K2 = 0.5 * t3 - t4 + 0.5 * t5;
    v = H0 * f0 + H1 * f0p + H2 * f0pp + K0 * g0 + K1 * g0p + K2 * g0pp;
    const double dH0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    const double dH1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    const double dH2 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
    const double dK0 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    const double dK1 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    const double dK2 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
    v1 = (dH0 * f0 + dH1 * f0p + dH2 * f0pp + dK0 * g0 + dK1 * g0p + dK2 * g0pp) / h;
    const double ddH0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    const double ddH1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    const double ddH2 = 1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3;
    const double ddK0 = 60.0 * t - 180.0 * t2 + 120.0 * t3;
    const double ddK1 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    const double ddK2 = 3.0 * t - 12.0 * t2 + 10.0 * t3;
    v2 = (ddH0 * f0 + ddH1 * f0p + ddH2 * f0pp + ddK0 * g0 + ddK1 * g0p + ddK2 * g0pp) / (h * h);
    const double d3H0 = -60.0 + 360.0 * t - 360.0 * t2;
    const double d3H1 = -36.0 + 192.0 * t - 180.0 * t2;
    const double d3H2 = -9.0 + 36.0 * t - 30.0 * t2;
    const double d3K0 = 60.0 - 360.0 * t + 360.0 * t2;
    const double d3K1 = -24.0 + 168.0 * t - 180.0 * t2;
    const double d3K2 = 3.0 - 24.0 * t + 30.0 * t2;
    v3 = (d3H0 * f0 + d3H1 * f0p + d3H2 * f0pp + d3K0 * g0 + d3K1 * g0p + d3K2 * g0pp) /
         (h * h * h);
  }
};

}  // namespace detail

// f multiplier solving -f'''/2 = Delta with f(x_c)=0, f'(x_c)=1, f''(x_c)=0,
// blended to -1 / +1 outside transition intervals anchored at fixed radii.
inline Profile f_ode_profile(const BlackHoleParams& p, const HorizonData& h,
                             std::shared_ptr<const Tortoise> rs, double r_center,
                             const MultiplierConfig& cfg) {
  const double gap = h.rbar_plus - h.r_plus;
  const double w = cfg.blend_fraction * gap;
  const double x_c = (*rs)(r_center);
  // The seeded ODE window is sized in r*: |f''| grows like 2 Delta |x - x_c|,
  // so the window must stay small enough to keep f' positive throughout.
  const double X = 0.6 / std::sqrt(std::max(delta_eval(p, r_center), 1e-2));
  const double x_guard_lo = (*rs)(h.r_plus + 0.2 * w);
  const double x_guard_hi = (*rs)(h.rbar_plus - 0.2 * w);
  const double x_lo = std::max(x_c - X, x_guard_lo + 0.5);
  const double x_hi = std::min(x_c + X, x_guard_hi - 0.5);

  auto table = std::make_shared<detail::FOdeTable>();
  table->p = p;
  table->rs = rs;
  const int n = cfg.f_ode_samples | 1;
  table->x.resize(n);
  table->f.resize(n);
  table->f1.resize(n);
  table->f2.resize(n);
  for (int i = 0; i < n; ++i) table->x[i] = x_lo + (x_hi - x_lo) * i / (n - 1.0);

  // Integrate the third-order ODE outward from x_c in both directions,
  // carrying r as auxiliary state.
  auto rhs = [&p](double, const std::array<double, 4>& y, std::array<double, 4>& dy) {
    dy[0] = y[1];
    dy[1] = y[2];
    dy[2] = -2.0 * delta_eval(p, y[3]);
    dy[3] = delta_eval(p, y[3]) / (y[3] * y[3] + p.a * p.a);
  };
  auto integ = make_dopri<4>(rhs);
  OdeOptions<4> opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-14;
  opt.max_step = 0.5;

  auto run_dir = [&](bool forward) {
    std::array<double, 4> y{0.0, 1.0, 0.0, r_center};
    std::vector<double> cps;
    for (int i = 0; i < n; ++i) {
      double xx = table->x[i];
      if (forward ? xx >= x_c : xx <= x_c) cps.push_back(xx);
    }
    if (!forward) std::reverse(cps.begin(), cps.end());
    integ.integrate(y, x_c, forward ? x_hi : x_lo, opt, cps,
                    [&](double xx, std::array<double, 4>& yc) {
                      auto it = std::lower_bound(table->x.begin(), table->x.end(), xx - 1e-12);
                      std::size_t i = static_cast<std::size_t>(it - table->x.begin());
                      if (i < table->x.size() && std::abs(table->x[i] - xx) < 1e-9) {
                        table->f[i] = yc[0];
                        table->f1[i] = yc[1];
                        table->f2[i] = yc[2];
                      }
                    });
  };
  run_dir(true);
  run_dir(false);

  // Short transition intervals adjacent to the window; curvature-matched
  // quintics over long spans amplify the edge second derivative.
  const double T_blend = 2.5;
  const double x_ta = x_lo - T_blend;
  const double x_tb = x_hi + T_blend;

  double fl, fl1, fl2, fr, fr1, fr2;
  table->eval(x_lo, fl, fl1, fl2);
  table->eval(x_hi, fr, fr1, fr2);

  auto left = std::make_shared<detail::QuinticBlend>();
  left->x0 = x_ta;
  left->x1 = x_lo;
  left->a0 = -1.0;
  left->b0 = fl;
  left->b1 = fl1;
  left->b2 = fl2;
  auto right = std::make_shared<detail::QuinticBlend>();
  right->x0 = x_hi;
  right->x1 = x_tb;
  right->a0 = fr;
  right->a1 = fr1;
  right->a2 = fr2;
  right->b0 = 1.0;

  Profile prof;
  auto eval_all = [table, left, right, x_lo, x_hi, x_ta, x_tb](double xx, int which) {
    double v = 0.0, v1 = 0.0, v2 = 0.0, v3 = 0.0;
    if (xx <= x_ta) {
      v = -1.0;
    } else if (xx < x_lo) {
      left->eval(xx, v, v1, v2, v3);
    } else if (xx <= x_hi) {
      table->eval(xx, v, v1, v2);
      v3 = table->f3(xx);
    } else if (xx < x_tb) {
      right->eval(xx, v, v1, v2, v3);
    } else {
      v = 1.0;
    }
    switch (which) {
      case 0: return v;
      case 1: return v1;
      case 2: return v2;
      default: return v3;
    }
  };
  prof.value = [eval_all](double x) { return eval_all(x, 0); };
  prof.d1 = [eval_all](double x) { return eval_all(x, 1); };
  prof.d2 = [eval_all](double x) { return eval_all(x, 2); };
  prof.d3 = [eval_all](double x) { return eval_all(x, 3); };
  return prof;
}

// Pointwise current values on the solution grid.
inline std::vector<double> current_eval(CurrentKind kind, const MultiplierSet& mult,
                                        const RadialSolution& sol, const RadialPotential& pot) {
  const std::size_t n = sol.size();
  if (n == 0 || sol.radius.size() != n)
    throw GridMismatch("current_eval: solution grid is empty or lacks radii");
  const FrequencyTriple& f = pot.frequency();
  const HorizonData& h = pot.horizons();
  const double w = f.omega;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sol.grid[i];
    const Complex u = sol.u[i], up = sol.up[i];
    const double re_up_u = std::real(up * std::conj(u));
    const double im_up_u = std::imag(up * std::conj(u));
    const double u2 = std::norm(u), up2 = std::norm(up);
    const double V = pot.V(sol.radius[i]);
    switch (kind) {
      case CurrentKind::Qh:
        out[i] = mult.h(x) * re_up_u - 0.5 * mult.h.deriv1(x) * u2;
        break;
      case CurrentKind::Qy:
        out[i] = mult.y(x) * (up2 + (w * w - V) * u2);
        break;
      case CurrentKind::Qf:
        out[i] = mult.f(x) * (up2 + (w * w - V) * u2) + mult.f.deriv1(x) * re_up_u -
                 0.5 * mult.f.deriv2(x) * u2;
        break;
      case CurrentKind::Qt:
        out[i] = w * im_up_u;
        break;
      case CurrentKind::QK:
        out[i] = (w - h.omega_plus * f.m) * im_up_u;
        break;
      case CurrentKind::QKbar:
        out[i] = (w - h.omega_bar_plus * f.m) * im_up_u;
        break;
    }
  }
  return out;
}

// Closed-form r*-derivative of each current along a solution.
inline std::vector<double> current_derivative_closed_form(CurrentKind kind,
                                                          const MultiplierSet& mult,
                                                          const RadialSolution& sol,
                                                          const RadialPotential& pot) {
  const std::size_t n = sol.size();
  const FrequencyTriple& f = pot.frequency();
  const HorizonData& h = pot.horizons();
  const double w = f.omega;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sol.grid[i];
    const double r = sol.radius[i];
    const Complex u = sol.u[i], up = sol.up[i];
    const Complex H = sol.has_H ? sol.H[i] : Complex(0.0);
    const double u2 = std::norm(u), up2 = std::norm(up);
    const double V = pot.V(r);
    const double Vp = pot.dV_drstar(r);
    switch (kind) {
      case CurrentKind::Qh: {
        const double hv = mult.h(x), hpp = mult.h.deriv2(x);
        out[i] = hv * up2 + (hv * (V - w * w) - 0.5 * hpp) * u2 +
                 hv * std::real(u * std::conj(H));
        break;
      }
      case CurrentKind::Qy: {
        const double yv = mult.y(x), yp = mult.y.deriv1(x);
        out[i] = yp * up2 + (yp * (w * w - V) - yv * Vp) * u2 +
                 2.0 * yv * std::real(up * std::conj(H));
        break;
      }
      case CurrentKind::Qf: {
        const double fv = mult.f(x), fp = mult.f.deriv1(x), f3 = mult.f.deriv3(x);
        out[i] = 2.0 * fp * up2 + (-fv * Vp - 0.5 * f3) * u2 +
                 std::real(2.0 * fv * std::conj(H) * up + fp * std::conj(H) * u);
        break;
      }
      case CurrentKind::Qt:
        out[i] = w * std::imag(H * std::conj(u));
        break;
      case CurrentKind::QK:
        out[i] = (w - h.omega_plus * f.m) * std::imag(H * std::conj(u));
        break;
      case CurrentKind::QKbar:
        out[i] = (w - h.omega_bar_plus * f.m) * std::imag(H * std::conj(u));
        break;
    }
  }
  return out;
}

// Max relative residual between the finite-difference derivative of the
// current along r* and its closed form.
inline double identity_check(CurrentKind kind, const MultiplierSet& mult,
                             const RadialSolution& sol, const RadialPotential& pot) {
  const std::size_t n = sol.size();
  if (n < 5) throw GridMismatch("identity_check: grid too small");
  const double hstep = sol.grid[1] - sol.grid[0];
  auto Q = current_eval(kind, mult, sol, pot);
  auto dQ = current_derivative_closed_form(kind, mult, sol, pot);
  double scale = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) scale = std::max(scale, std::abs(dQ[i]));
  double qscale = 0.0;
  for (std::size_t i = 0; i < n; ++i) qscale = std::max(qscale, std::abs(Q[i]));
  scale = std::max(scale, qscale);
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double fd = (Q[i + 1] - Q[i - 1]) / (2.0 * hstep);
    worst = std::max(worst, std::abs(fd - dQ[i]) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Regime multiplier constructions and coercivity certification.

namespace detail {

inline double sup_profile_bound(const MultiplierSet& m, const std::vector<double>& grid) {
  double B = 0.0;
  for (double x : grid) {
    double s = std::abs(m.f(x)) + std::abs(m.f.deriv1(x)) + std::abs(m.f.deriv2(x)) +
               std::abs(m.f.empty() ? 0.0 : m.f.deriv3(x)) + std::abs(m.h(x)) +
               std::abs(m.h.deriv1(x)) + std::abs(m.h.deriv2(x)) + std::abs(m.y(x)) +
               std::abs(m.y.deriv1(x));
    B = std::max(B, s);
  }
  return B;
}

// Smallest radius where V(r) falls below w^2 - margin, scanning from r_plus;
// used to anchor the window multiplier of the trapped natural cases.
inline double left_crossing_radius(const RadialPotential& pot, double margin) {
  const HorizonData& h = pot.horizons();
  const double w = pot.frequency().omega;
  const int n = 2000;
  for (int i = 1; i < n; ++i) {
    double r = h.r_plus + (h.rbar_plus - h.r_plus) * i / static_cast<double>(n);
    if (pot.V(r) >= w * w - margin)
      return std::max(h.r_plus + 0.02 * (h.rbar_plus - h.r_plus),
                      h.r_plus + (h.rbar_plus - h.r_plus) * (i - 1) / static_cast<double>(n));
  }
  return h.r_plus + 0.5 * (h.rbar_plus - h.r_plus);
}

}  // namespace detail

inline MultiplierSet build_multipliers(const BlackHoleParams& p, const HorizonData& h,
                                       std::shared_ptr<const Tortoise> rs,
                                       const RegimeParams& rp, const FrequencyTriple& f,
                                       const RegimeLabel& regime,
                                       const MultiplierConfig& cfg = {}) {
  if (regime.flags == 0) throw UnknownRegime("build_multipliers: empty regime flags");
  RadialPotential pot(p, h, f);
  const double gap = h.rbar_plus - h.r_plus;
  const double lt = f.lambda_tilde;
  auto vmax = pot.max_V();

  MultiplierSet out;
  out.regime = regime;

  const bool trapped = std::abs(vmax.value - f.omega * f.omega) <= cfg.eps_trap * lt;
  // a boundary maximum is pulled into the open interval for the r* maps
  vmax.r_max = std::clamp(vmax.r_max, h.r_plus + 2e-3 * gap, h.rbar_plus - 2e-3 * gap);

  auto make_bump = [&](double r_center) {
    const double x_center = (*rs)(r_center);
    // plateau/support measured in r, mapped conservatively to r* at the center
    const double dr = cfg.bump_fraction * gap;
    const double scale = (r_center * r_center + p.a * p.a) / delta_eval(p, r_center);
    const double plateau = std::min(dr * scale, 2.0);
    return bump_profile(x_center, plateau, 2.0 * plateau);
  };

  if (regime.has(regime_ds)) {
    if (trapped) {
      out.recipe = "ds_trapped_f";
      out.r_trap = vmax.r_max;
      out.r_center = vmax.r_max;
      out.f = f_ode_profile(p, h, rs, vmax.r_max, cfg);
    } else if (vmax.value - f.omega * f.omega > 0.0) {
      out.recipe = "ds_f_h";
      out.r_center = vmax.r_max;
      out.f = f_ode_profile(p, h, rs, vmax.r_max, cfg);
      out.h = make_bump(vmax.r_max);
    } else {
      out.recipe = "ds_exp_y";
      out.y = exp_r_profile(rs, p, cfg.c_large / std::max(1.0, h.rbar_plus));
    }
  } else if (regime.has(regime_sharp_enlarged)) {
    out.recipe = "sharp_enlarged_f_h";
    out.r_center = vmax.r_max;
    out.f = arctan_profile(rs, p, vmax.r_max);
    out.h = make_bump(vmax.r_max);
  } else if (regime.has(regime_natural)) {
    const double amw = p.a * f.m * f.omega;
    if (trapped) {
      out.r_trap = vmax.r_max;
      out.r_center = vmax.r_max;
      out.f = f_ode_profile(p, h, rs, vmax.r_max, cfg);
      if (amw < 0.0) {
        out.recipe = "natural_trapped_f";
      } else {
        out.recipe = "natural_trapped_f_y";
        const double r3 = detail::left_crossing_radius(pot, 0.5 * cfg.eps_trap * lt);
        const double x3 = (*rs)(r3);
        out.y = window_exp_profile((*rs)(h.r_plus + 1e-6 * gap), x3 - 1.0, x3, cfg.c_window);
      }
    } else if (vmax.value - f.omega * f.omega > 0.0) {
      out.recipe = "natural_f_h";
      out.r_center = vmax.r_max;
      out.f = f_ode_profile(p, h, rs, vmax.r_max, cfg);
      out.h = make_bump(vmax.r_max);
    } else {
      out.recipe = "natural_exp_y";
      out.y = exp_r_profile(rs, p, cfg.c_large / std::max(1.0, h.rbar_plus));
    }
  } else if (regime.has(regime_lessflat)) {
    out.recipe = "lessflat_f_h";
    out.r_center = vmax.r_max;
    out.f = arctan_profile(rs, p, vmax.r_max);
    const double r_in = h.r_plus + 2.0 * cfg.blend_fraction * gap;
    const double r_out = h.rbar_plus - 2.0 * cfg.blend_fraction * gap;
    out.h = plateau_profile((*rs)(r_in), (*rs)(r_out), 1.0);
  } else if (regime.has(regime_omega_dominated)) {
    out.recipe = "omega_dominated_y";
    auto sr = special_radii(p, h);
    out.r_center = sr.r_delta_frac;
    out.y = arctan_profile(rs, p, sr.r_delta_frac);
  } else if (regime.has(regime_flat)) {
    const double a0 = cfg.a0_small;
    if (std::abs(f.omega) <= rp.omega_low && f.m == 0) {
      out.recipe = "flat_stationary_axisym_y";
      // y = (r^2+a^2)^3
      auto g = [&p](double r) { return std::pow(r * r + p.a * p.a, 3); };
      auto g1 = [&p](double r) { return 6.0 * r * std::pow(r * r + p.a * p.a, 2); };
      auto g2 = [&p](double r) {
        const double u = r * r + p.a * p.a;
        return 6.0 * u * u + 24.0 * r * r * u;
      };
      out.y = detail::function_of_r_profile(rs, p, g, g1, g2, nullptr);
    } else if (std::abs(f.omega) <= rp.omega_low && std::abs(p.a) <= a0) {
      out.recipe = "flat_stationary_small_a_h_y";
      // Middle-region y = (r^2+a^2)^2 - c^2 with A_large outer extensions,
      // h = C_large * lambda_tilde / (r^2+a^2) under a plateau cutoff.
      const double r_mid = 0.5 * (h.r_plus + h.rbar_plus);
      const double c2 = std::pow(r_mid * r_mid + p.a * p.a, 2);
      const double r_in = h.r_plus + 2.0 * cfg.blend_fraction * gap;
      const double r_out = h.rbar_plus - 2.0 * cfg.blend_fraction * gap;
      const double xin = (*rs)(r_in), xout = (*rs)(r_out);
      const double A = cfg.a_large;
      const double a2 = p.a * p.a;
      auto I = [a2, &p](double r) {  // int dr / (r^2+a^2)^2
        if (p.a == 0.0) return -1.0 / (3.0 * r * r * r);
        const double a1 = std::sqrt(a2);
        return r / (2.0 * a2 * (r * r + a2)) + std::atan(r / a1) / (2.0 * a2 * a1);
      };
      auto g = [=, &p](double r) {
        const double q = std::pow(r * r + a2, 2);
        if (r < r_in) {
          double alpha = (std::pow(r_in * r_in + a2, 2) - c2) / std::pow(r_in * r_in + a2, 2);
          return alpha * q + A * q * (I(r) - I(r_in));
        }
        if (r > r_out) {
          double alpha = (std::pow(r_out * r_out + a2, 2) - c2) / std::pow(r_out * r_out + a2, 2);
          return alpha * q + A * q * (I(r) - I(r_out));
        }
        return q - c2;
      };
      auto g1 = [=, &p](double r) {
        const double u = r * r + a2;
        const double qp = 4.0 * r * u;
        if (r < r_in) {
          double alpha = (std::pow(r_in * r_in + a2, 2) - c2) / std::pow(r_in * r_in + a2, 2);
          return alpha * qp + A * (qp * (I(r) - I(r_in)) + 1.0);
        }
        if (r > r_out) {
          double alpha = (std::pow(r_out * r_out + a2, 2) - c2) / std::pow(r_out * r_out + a2, 2);
          return alpha * qp + A * (qp * (I(r) - I(r_out)) + 1.0);
        }
        return qp;
      };
      auto g2 = [=, &p](double r) {
        const double u = r * r + a2;
        const double qpp = 4.0 * u + 8.0 * r * r;
        if (r < r_in || r > r_out) {
          double r_edge = r < r_in ? r_in : r_out;
          double alpha = (std::pow(r_edge * r_edge + a2, 2) - c2) / std::pow(r_edge * r_edge + a2, 2);
          return alpha * qpp + A * (qpp * (I(r) - I(r_edge)) + 4.0 * r / u * 2.0);
        }
        return qpp;
      };
      out.y = detail::function_of_r_profile(rs, p, g, g1, g2, nullptr);

      const double C_large = 8.0;
      auto plateau = plateau_profile(xin, xout, 1.0);
      auto hg = [C_large, lt, a2](double r) { return C_large * lt / (r * r + a2); };
      auto hg1 = [C_large, lt, a2](double r) {
        const double u = r * r + a2;
        return -2.0 * C_large * lt * r / (u * u);
      };
      auto hg2 = [C_large, lt, a2](double r) {
        const double u = r * r + a2;
        return C_large * lt * (8.0 * r * r - 2.0 * u) / (u * u * u);
      };
      auto base = detail::function_of_r_profile(rs, p, hg, hg1, hg2, nullptr);
      Profile hp;
      hp.value = [base, plateau](double x) { return base(x) * plateau(x); };
      hp.d1 = [base, plateau](double x) {
        return base.deriv1(x) * plateau(x) + base(x) * plateau.deriv1(x);
      };
      hp.d2 = [base, plateau](double x) {
        return base.deriv2(x) * plateau(x) + 2.0 * base.deriv1(x) * plateau.deriv1(x) +
               base(x) * plateau.deriv2(x);
      };
      out.h = hp;
      out.r_center = r_mid;
    } else {
      out.recipe = std::abs(f.omega) <= rp.omega_low ? "flat_stationary_large_a_y"
                                                     : "flat_nonstationary_y";
      const double r_cut = h.rbar_plus - 2.0 * cfg.blend_fraction * gap;
      const double x_cut = (*rs)(r_cut);
      out.y = window_exp_profile((*rs)(h.r_plus + 1e-6 * gap), x_cut - 1.0, x_cut, cfg.c_window);
    }
  } else {
    throw UnknownRegime("build_multipliers: no recipe for flags " +
                        regime_flags_string(regime));
  }

  // Record the uniform bound over a coarse grid.
  const double xa = (*rs)(h.r_plus + 1e-3 * gap), xb = (*rs)(h.rbar_plus - 1e-3 * gap);
  out.bound_B = detail::sup_profile_bound(out, uniform_grid(xa, xb, 257));
  return out;
}

// Pointwise coercivity certificate: the regime's bulk inequality sampled on
// an r* grid. certified_b is the largest b with  target >= b * weight  on the
// grid (negative values report failure; that is data, not an error).
struct CoercivityReport {
  std::string regime;
  std::string recipe;
  double r_trap = 0.0;
  double min_slack = 0.0;    // min of the target expression
  double certified_b = 0.0;  // min target/weight over the grid
  double aux_slack = 0.0;    // recipe-specific secondary certificate
  int grid_points = 0;
};

inline CoercivityReport certify_coercivity(const BlackHoleParams& p, const HorizonData& h,
                                           std::shared_ptr<const Tortoise> rs,
                                           const RegimeParams& rp, const FrequencyTriple& f,
                                           const MultiplierSet& mult, int grid_points = 2000) {
  RadialPotential pot(p, h, f);
  const double gap = h.rbar_plus - h.r_plus;
  const double xa = (*rs)(h.r_plus + 1e-3 * gap);
  const double xb = (*rs)(h.rbar_plus - 1e-3 * gap);
  auto grid = uniform_grid(xa, xb, grid_points);
  const double w = f.omega, lt = f.lambda_tilde;

  CoercivityReport rep;
  rep.regime = regime_flags_string(mult.regime);
  rep.recipe = mult.recipe;
  rep.r_trap = mult.r_trap;
  rep.grid_points = grid_points;

  double min_slack = 1e300, min_b = 1e300, aux = 1e300;
  for (double x : grid) {
    const double r = rs->inverse(x);
    const double D = delta_eval(p, r);
    const double V = pot.V(r);
    const double Vp = pot.dV_drstar(r);
    double target = 0.0, weight = 1.0;

    if (mult.recipe == "ds_trapped_f" || mult.recipe == "natural_trapped_f" ||
        mult.recipe == "natural_trapped_f_y") {
      target = -mult.f(x) * Vp - 0.5 * mult.f.deriv3(x);
      if (!mult.y.empty())
        target += mult.y.deriv1(x) * (w * w - V) - mult.y(x) * Vp;
      weight = D * (lt * (r - mult.r_trap) * (r - mult.r_trap) + 1.0);
      aux = std::min(aux, mult.f.deriv1(x) - 0.0);  // f' >= 0 check
    } else if (mult.recipe == "ds_f_h" || mult.recipe == "natural_f_h") {
      target = -mult.f(x) * Vp - 0.5 * mult.f.deriv3(x) + mult.h(x) * (V - w * w) -
               0.5 * mult.h.deriv2(x);
      weight = D * std::max(lt, 1.0);
      aux = std::min(aux, 2.0 * mult.f.deriv1(x) + mult.h(x));
    } else if (mult.recipe == "ds_exp_y" || mult.recipe == "natural_exp_y") {
      target = mult.y.deriv1(x) * (w * w - V) - mult.y(x) * Vp;
      weight = D * std::max(lt, 1.0);
      aux = std::min(aux, mult.y.deriv1(x));
    } else if (mult.recipe == "sharp_enlarged_f_h" || mult.recipe == "lessflat_f_h") {
      target = -mult.f(x) * Vp - 0.5 * mult.f.deriv3(x) + mult.h(x) * (V - w * w) -
               0.5 * mult.h.deriv2(x);
      weight = D * (1.0 + w * w + lt);
      aux = std::min(aux, 2.0 * mult.f.deriv1(x) + mult.h(x));
    } else if (mult.recipe == "omega_dominated_y") {
      target = mult.y.deriv1(x) * (w * w - V) - mult.y(x) * Vp;
      weight = D * w * w;
      aux = std::min(aux, mult.y.deriv1(x) / std::max(D, 1e-12));
    } else if (mult.recipe == "flat_stationary_axisym_y") {
      const double u = r * r + p.a * p.a;
      target = mult.y.deriv1(x) - 4.0 * r * D / (u * u) * mult.y(x);
      weight = D;
      aux = std::min(aux, target - 0.0);
    } else if (mult.recipe == "flat_stationary_small_a_h_y") {
      // Stat-current form with V_tilde = V0 + V_mu (the Psi-equation bulk).
      const double u = r * r + p.a * p.a;
      const double Vt = pot.V0(r) + pot.V_mu(r);
      const double Vtp = D / u * (pot.dV0(r) + pot.dV_mu(r));
      const double s = D / u;
      const double rDu2 = r * D / (u * u);
      // (r Delta / u^2 h)' in r*
      const double d_rDu2 =
          s * ((D + r * delta_deriv(p, r, 1)) / (u * u) - 4.0 * r * r * D / (u * u * u));
      const double hterm = d_rDu2 * mult.h(x) + rDu2 * mult.h.deriv1(x);
      target = mult.y.deriv1(x) * w * w - (mult.y.deriv1(x) * Vt + mult.y(x) * Vtp) -
               0.5 * mult.h.deriv2(x) + hterm + mult.h(x) * (Vt - w * w);
      weight = std::max(lt, 1.0);
      aux = std::min(aux,
                     mult.y.deriv1(x) - 4.0 * r * D / (u * u) * mult.y(x) + mult.h(x));
    } else {  // window-y bounded recipes
      target = mult.y.deriv1(x);
      weight = D;
      aux = std::min(aux, mult.y.deriv1(x) * (w * w - V) - mult.y(x) * Vp);
    }

    min_slack = std::min(min_slack, target);
    if (weight > 1e-14) min_b = std::min(min_b, target / weight);
  }
  rep.min_slack = min_slack;
  rep.certified_b = min_b;
  rep.aux_slack = aux;
  return rep;
}

inline nlohmann::json coercivity_report_json(const CoercivityReport& rep) {
  return {{"regime", rep.regime},     {"recipe", rep.recipe},
          {"r_trap", rep.r_trap},     {"min_slack", rep.min_slack},
          {"certified_b", rep.certified_b}, {"aux_slack", rep.aux_slack},
          {"grid_points", rep.grid_points}};
}

}  // namespace kds
