#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kds/geometry.hpp"
#include "kds/io.hpp"
#include "kds/ode.hpp"
#include "kds/potential.hpp"
#include "kds/series.hpp"

namespace kds {

using Complex = std::complex<double>;

enum class HorizonSide { event_horizon, cosmological_horizon };

// Frobenius seed data at the matching point: u and du/dr* for the outgoing
// local solution u ~ (r - r_h)^eta around the chosen horizon.
struct FrobeniusSeed {
  HorizonSide side = HorizonSide::event_horizon;
  int order = 16;
  double r_match = 0.0;       // Boyer-Lindquist radius of the seed
  double rstar_match = 0.0;   // tortoise coordinate of the seed
  Complex eta;                // Frobenius index
  Complex u;                  // u(r_match)
  Complex du_drstar;          // du/dr* (r_match)
  double tail_estimate = 0.0; // last-term ratio at the match point
};

// Radial solution sampled on an ascending r* grid.
struct RadialSolution {
  std::vector<double> grid;     // r*
  std::vector<double> radius;   // r(r*), carried by the integrator
  std::vector<Complex> u;
  std::vector<Complex> up;      // du/dr*
  HorizonSide boundary = HorizonSide::event_horizon;
  int frobenius_order = 16;
  std::vector<Complex> H;       // inhomogeneity samples (empty when H = 0)
  bool has_H = false;
  int rescale_exponent = 0;     // solution holds 2^{-1024*exponent} x the true values

  std::size_t size() const { return grid.size(); }
};

namespace detail {

// Coefficient series A(x), B(x) of the Frobenius normal form
//   x^2 u_xx + x A(x) u_x + B(x) u = 0,
// around r = r_h + sgn * x.
struct FrobeniusCoefficients {
  std::vector<double> A, B;
  Complex eta;
};

inline FrobeniusCoefficients frobenius_coefficients(const RadialPotential& pot, HorizonSide side,
                                                    int order) {
  const BlackHoleParams& p = pot.params();
  const HorizonData& h = pot.horizons();
  const FrequencyTriple& f = pot.frequency();
  const double r_h = side == HorizonSide::event_horizon ? h.r_plus : h.rbar_plus;
  const double sgn = side == HorizonSide::event_horizon ? 1.0 : -1.0;
  const double omega_h =
      side == HorizonSide::event_horizon ? h.omega_plus : h.omega_bar_plus;
  const double kappa_h =
      side == HorizonSide::event_horizon ? h.kappa_plus : h.kappa_bar_plus;

  const std::size_t n = static_cast<std::size_t>(order) + 6;
  const double a2 = p.a * p.a;

  // r(x) = r_h + sgn x and the exact Taylor series of Delta, Delta'.
  PowerSeries r(n);
  r.at(0) = r_h;
  r.at(1) = sgn;
  PowerSeries D(n), Dp(n);
  double fact = 1.0;
  for (int k = 0; k <= 4 && static_cast<std::size_t>(k) <= n; ++k) {
    if (k > 0) fact *= k;
    if (k <= 3) {
      D.at(k) = delta_deriv(p, r_h, k) * std::pow(sgn, k) / fact;
      if (k < 3) Dp.at(k) = delta_deriv(p, r_h, k + 1) * std::pow(sgn, k) / fact;
    } else {
      D.at(4) = -1.0 / (p.l * p.l) * std::pow(sgn, 4);  // Delta'''' / 4! = -24/l^2 / 24
    }
  }
  Dp.at(3) = -24.0 / (p.l * p.l) * std::pow(sgn, 3) / 6.0;

  PowerSeries u2 = r.mul(r, n);  // r^2 + a^2
  u2.at(0) += a2;

  // a0 = (u2 w - a m Xi)^2 - D (lt - 2 a m w Xi) - mu2 D u2 - D (r Dp u2 - 2 r^2 D + D a^2)/u2^2
  const double w = f.omega, m = f.m, Xi = h.Xi;
  PowerSeries lin = u2 * w;
  lin.at(0) -= p.a * m * Xi;
  PowerSeries a0 = lin.mul(lin, n);
  a0 = a0 - D * (f.lambda_tilde - 2.0 * p.a * m * w * Xi);
  a0 = a0 - D.mul(u2, n) * p.mu2_kg;
  PowerSeries sl = r.mul(Dp, n).mul(u2, n) - r.mul(r, n).mul(D, n) * 2.0 + D * a2;
  sl = D.mul(sl, n).div(u2.mul(u2, n), n);
  a0 = a0 - sl;

  // a1 = D (Dp u2 - 2 r D) / u2, with one factor of x; a2s = (D/x)^2.
  PowerSeries a1 = D.mul(Dp.mul(u2, n) - r.mul(D, n) * 2.0, n).div(u2, n);
  PowerSeries Dtilde = D.shift_down(1);
  PowerSeries a2s = Dtilde.mul(Dtilde, n);

  // Normal form: A = sgn * (a1/x) / a2s ... the ODE is in d/dr, converted to
  // d/dx with the sign; both A0 terms collapse to 1.
  PowerSeries A = a1.shift_down(1).div(a2s, n) * sgn;
  PowerSeries B = a0.div(a2s, n);

  FrobeniusCoefficients out;
  out.A.resize(n + 1);
  out.B.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    out.A[k] = A[k];
    out.B[k] = B[k];
  }
  out.eta = Complex(0.0, -(w - omega_h * m) / (2.0 * kappa_h));
  return out;
}

}  // namespace detail

// Outgoing Frobenius seed at the requested horizon. If match_radius <= 0 the
// match point is chosen automatically from the series tail. Raises
// ResonantFrequency when the index degenerates and SeriesDiverged when the
// last-term estimate exceeds 1e-12 at the match point.
inline FrobeniusSeed frobenius_solution(const RadialPotential& pot, const Tortoise& rs,
                                        HorizonSide side, int order = 16,
                                        double match_radius = 0.0) {
  const HorizonData& h = pot.horizons();
  const FrequencyTriple& f = pot.frequency();
  const double omega_h =
      side == HorizonSide::event_horizon ? h.omega_plus : h.omega_bar_plus;
  if (std::abs(f.omega - omega_h * f.m) < 1e-10)
    throw ResonantFrequency("frobenius_solution: omega too close to omega_h m");

  auto fc = detail::frobenius_coefficients(pot, side, order);
  const Complex eta = fc.eta;

  // Recursion c_n I(eta + n) = -sum_{j>=1} [A_j (eta + n - j) + B_j] c_{n-j},
  // I(s) = s^2 + B_0 (A_0 = 1).
  std::vector<Complex> c(static_cast<std::size_t>(order) + 1);
  c[0] = 1.0;
  for (int nn = 1; nn <= order; ++nn) {
    Complex s = 0.0;
    for (int j = 1; j <= nn; ++j)
      s += (fc.A[j] * (eta + Complex(nn - j)) + fc.B[j]) * c[nn - j];
    Complex I = (eta + Complex(nn)) * (eta + Complex(nn)) + fc.B[0];
    c[nn] = -s / I;
  }

  const double r_h = side == HorizonSide::event_horizon ? h.r_plus : h.rbar_plus;
  const double sgn = side == HorizonSide::event_horizon ? 1.0 : -1.0;

  // Candidate match offsets: cap at a third of the gap to the nearest other
  // root of Delta, shrink until the series tail passes the threshold.
  double gap = h.rbar_plus - h.r_plus;
  for (double root : h.roots) {
    double d = std::abs(r_h - root);
    if (d > 1e-12) gap = std::min(gap, d);
  }
  double x = match_radius > 0.0 ? match_radius : gap / 3.0;
  if (match_radius > 0.0 && x > 0.95 * gap)
    throw OutOfDomain("frobenius_solution: match radius outside the convergence region");

  auto tail_at = [&c, order](double xx) {
    double head = 0.0, last = std::abs(c[order]) * std::pow(xx, order);
    for (int k = 0; k <= order; ++k) head = std::max(head, std::abs(c[k]) * std::pow(xx, k));
    return last / std::max(head, 1e-300);
  };

  const double tail_tol = 1e-12;
  if (match_radius <= 0.0) {
    for (int it = 0; it < 60 && tail_at(x) > tail_tol; ++it) x *= 0.75;
  }
  double tail = tail_at(x);
  if (tail > tail_tol) throw SeriesDiverged("frobenius_solution: last-term test failed");

  // Evaluate u = x^eta sum c_k x^k and du/dx = x^{eta-1} sum (eta+k) c_k x^k.
  Complex su = 0.0, sdu = 0.0;
  for (int k = order; k >= 0; --k) {
    su = su * x + c[k];
    sdu = sdu * x + (eta + Complex(k)) * c[k];
  }
  const Complex xpow = std::exp(eta * std::log(x));
  const Complex u = xpow * su;
  const Complex du_dx = xpow / x * sdu;

  FrobeniusSeed seed;
  seed.side = side;
  seed.order = order;
  seed.r_match = r_h + sgn * x;
  seed.rstar_match = rs(seed.r_match);
  seed.eta = eta;
  seed.u = u;
  const double rr = seed.r_match;
  seed.du_drstar = delta_eval(pot.params(), rr) / (rr * rr + pot.params().a * pot.params().a) *
                   sgn * du_dx;
  seed.tail_estimate = tail;
  return seed;
}

enum class IntegrationDirection { to_plus_infinity, to_minus_infinity };

using Inhomogeneity = std::function<Complex(double rstar)>;

// Integrate u'' + (omega^2 - V) u = H in r*, carrying r(r*) as auxiliary
// state. Samples (u, u') exactly on output_grid (ascending r* values inside
// the span). When renormalize is set, the solution is rescaled by 2^-1024
// whenever it overflows 1e140 and the count is recorded.
inline RadialSolution integrate_radial(const RadialPotential& pot, const Tortoise& rs,
                                       const FrobeniusSeed& seed, IntegrationDirection direction,
                                       std::pair<double, double> rstar_span,
                                       const std::vector<double>& output_grid,
                                       const Inhomogeneity& H = nullptr, double tol = 1e-10,
                                       bool renormalize = true) {
  const BlackHoleParams& p = pot.params();
  const bool forward = direction == IntegrationDirection::to_plus_infinity;
  const double x1 = forward ? rstar_span.second : rstar_span.first;
  // Output points on the far side of the seed are reachable; any requested
  // points behind it are skipped.
  if ((forward && seed.rstar_match >= x1) || (!forward && seed.rstar_match <= x1))
    throw OutOfDomain("integrate_radial: span does not extend past the seed");

  RadialSolution sol;
  sol.boundary = seed.side;
  sol.frobenius_order = seed.order;
  sol.has_H = static_cast<bool>(H);

  // State: Re u, Im u, Re u', Im u', r.
  std::array<double, 5> y{seed.u.real(), seed.u.imag(), seed.du_drstar.real(),
                          seed.du_drstar.imag(), seed.r_match};
  int rescale = 0;

  auto rhs = [&pot, &p, &H](double x, const std::array<double, 5>& s,
                            std::array<double, 5>& dy) {
    const double r = s[4];
    const double V = pot.V(r);
    const double w = pot.frequency().omega;
    const double coef = V - w * w;
    Complex u(s[0], s[1]);
    Complex rhs_u = coef * u;
    if (H) rhs_u += H(x);
    dy[0] = s[2];
    dy[1] = s[3];
    dy[2] = rhs_u.real();
    dy[3] = rhs_u.imag();
    dy[4] = delta_eval(p, r) / (r * r + p.a * p.a);
  };

  OdeOptions<5> opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol * 1e-2;
  opt.max_step = 0.25;
  opt.initial_step = 1e-4;

  std::vector<double> cps = output_grid;
  if (!forward) std::reverse(cps.begin(), cps.end());

  auto integrator = make_dopri<5>(rhs);

  // March from the seed to the far end, rescaling on overflow.
  std::vector<double> grid_out, radius_out;
  std::vector<Complex> u_out, up_out;
  double x = seed.rstar_match;
  std::size_t cp_idx = 0;
  while (cp_idx < cps.size() && (forward ? cps[cp_idx] < x : cps[cp_idx] > x)) ++cp_idx;

  std::vector<double> active(cps.begin() + cp_idx, cps.end());
  integrator.integrate(
      y, x, x1, opt, active, [&](double xc, std::array<double, 5>& yc) {
        grid_out.push_back(xc);
        radius_out.push_back(yc[4]);
        u_out.push_back(Complex(yc[0], yc[1]));
        up_out.push_back(Complex(yc[2], yc[3]));
        if (renormalize) {
          double mag = std::max({std::abs(yc[0]), std::abs(yc[1]), std::abs(yc[2]),
                                 std::abs(yc[3])});
          if (mag > 1e140) {
            const double f = std::ldexp(1.0, -512);
            for (int i = 0; i < 4; ++i) yc[i] *= f;
            for (auto& v : u_out) v *= f;
            for (auto& v : up_out) v *= f;
            rescale += 1;
          }
        }
      });

  sol.rescale_exponent = rescale;
  if (!forward) {
    std::reverse(grid_out.begin(), grid_out.end());
    std::reverse(radius_out.begin(), radius_out.end());
    std::reverse(u_out.begin(), u_out.end());
    std::reverse(up_out.begin(), up_out.end());
  }
  sol.grid = std::move(grid_out);
  sol.radius = std::move(radius_out);
  sol.u = std::move(u_out);
  sol.up = std::move(up_out);
  if (H) {
    sol.H.resize(sol.grid.size());
    for (std::size_t i = 0; i < sol.grid.size(); ++i) sol.H[i] = H(sol.grid[i]);
  }
  return sol;
}

// Uniform output grid helper.
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return g;
}

// Max relative ODE residual |u'' + (w^2 - V) u - H| by a five-point
// fourth-order stencil on a uniform grid.
inline double ode_residual(const RadialPotential& pot, const RadialSolution& sol) {
  const std::size_t n = sol.size();
  if (n < 7) throw GridMismatch("ode_residual: grid too small");
  const double h = sol.grid[1] - sol.grid[0];
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (std::abs((sol.grid[i + 1] - sol.grid[i]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw GridMismatch("ode_residual: grid must be uniform");
  const double w = pot.frequency().omega;
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    Complex upp = (-sol.u[i - 2] + 16.0 * sol.u[i - 1] - 30.0 * sol.u[i] + 16.0 * sol.u[i + 1] -
                   sol.u[i + 2]) /
                  (12.0 * h * h);
    Complex res = upp + (w * w - pot.V(sol.radius[i])) * sol.u[i];
    if (sol.has_H) res -= sol.H[i];
    double scale = std::abs(upp) + std::abs(sol.u[i]) * std::abs(w * w) + 1e-30;
    worst = std::max(worst, std::abs(res) / std::max(scale, std::abs(sol.u[i])));
  }
  return worst;
}

inline void write_radial_csv(const std::string& path, const RadialSolution& sol) {
  CsvWriter csv(path);
  csv.header({"rstar", "re_u", "im_u", "re_up", "im_up"});
  for (std::size_t i = 0; i < sol.size(); ++i)
    csv.row_strings({float17(sol.grid[i]), float17(sol.u[i].real()), float17(sol.u[i].imag()),
                     float17(sol.up[i].real()), float17(sol.up[i].imag())});
}

// Critical-point structure of V0 on [r_plus, rbar_plus].
enum class V0Structure {
  unique_interior_max,   // one critical point, a maximum
  interior_min_then_max, // two critical points, min < max
  min_then_boundary_max, // interior minimum, V0 still rising at rbar_plus
  monotone,              // no interior critical point
};

struct V0CriticalPoints {
  std::optional<double> r_min;
  std::optional<double> r_max;
  V0Structure structure = V0Structure::monotone;
  int interior_count = 0;
};

// Trapping radius of a classified frequency: the maximizer of V for trapped
// de Sitter / high omega~lambda triples, the sentinel 0 otherwise.
inline double r_trap(const RadialPotential& pot, const RegimeLabel& regime,
                     double eps_trap = 0.05) {
  if (!(regime.has(regime_ds) || regime.has(regime_natural))) return 0.0;
  auto vmax = pot.max_V();
  const double w = pot.frequency().omega;
  if (std::abs(vmax.value - w * w) <= eps_trap * pot.frequency().lambda_tilde)
    return vmax.r_max;
  return 0.0;
}

inline V0CriticalPoints v0_critical_points(const RadialPotential& pot) {
  const HorizonData& h = pot.horizons();
  const auto& c = pot.cubic_coeffs();
  std::vector<double> coeffs{c[0], c[1], c[2], c[3]};
  auto roots = real_roots_in(coeffs, h.r_plus, h.rbar_plus);
  // Discard tangential (double) roots that do not change the sign.
  std::vector<double> crossing;
  const double eps = 1e-9 * (h.rbar_plus - h.r_plus);
  for (double r : roots) {
    double lo = std::max(h.r_plus, r - eps), hi = std::min(h.rbar_plus, r + eps);
    if (pot.cubic_dV0(lo) * pot.cubic_dV0(hi) < 0.0) crossing.push_back(r);
  }
  if (crossing.size() > 2)
    throw StructureViolation("v0_critical_points: more than two sign changes of dV0/dr");

  V0CriticalPoints out;
  out.interior_count = static_cast<int>(crossing.size());
  const double g_lo = pot.cubic_dV0(h.r_plus + eps);
  const double g_hi = pot.cubic_dV0(h.rbar_plus - eps);
  if (crossing.empty()) {
    out.structure = V0Structure::monotone;
  } else if (crossing.size() == 1) {
    if (g_lo > 0.0 && g_hi < 0.0) {
      out.structure = V0Structure::unique_interior_max;
      out.r_max = crossing[0];
    } else {
      out.structure = V0Structure::min_then_boundary_max;
      out.r_min = crossing[0];
    }
  } else {
    out.structure = V0Structure::interior_min_then_max;
    out.r_min = crossing[0];
    out.r_max = crossing[1];
  }

  // The cubic (r^2+a^2)^3 dV0/dr may have at most one interior critical
  // point, a local maximum; violation signals a bug upstream.
  auto qroots = real_roots_in({c[1], 2.0 * c[2], 3.0 * c[3]}, h.r_plus, h.rbar_plus);
  if (qroots.size() > 1)
    throw StructureViolation("v0_critical_points: cubic has more than one interior extremum");
  if (qroots.size() == 1) {
    double second = 6.0 * c[3] * qroots[0] + 2.0 * c[2];
    if (second > 1e-10 * std::max(1.0, std::abs(c[3])))
      throw StructureViolation("v0_critical_points: cubic extremum is not a maximum");
  }
  return out;
}

}  // namespace kds
