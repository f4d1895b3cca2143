#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kds/geometry.hpp"
#include "kds/io.hpp"
#include "kds/ode.hpp"
#include "kds/roots.hpp"

namespace kds {

// Null geodesic state in Boyer-Lindquist coordinates with conserved
// quantities. E is g(gdot, dt) and L is -g(gdot, dphi) up to the fixed
// affine normalization; Q is the Carter-type constant entering the radial
// and angular quadratures; K stores the combination as printed in the
// conserved-quantity display (it is never consumed by the flow, which uses
// Q directly).
struct GeodesicState {
  double t = 0.0, r = 0.0, theta = 0.0, phi = 0.0;
  double E = 0.0, L = 0.0, Q = 0.0, K = 0.0;
  double p_r = 0.0;      // rho^2 dr/dv
  double p_theta = 0.0;  // rho^2 dtheta/dv
};

namespace detail {

struct GeodesicCoefficients {
  BlackHoleParams p;
  double Xi;

  double rho2(double r, double theta) const {
    double c = std::cos(theta);
    return r * r + p.a * p.a * c * c;
  }
  double dyn_K(double E, double L, double Q) const {
    return Xi * Xi * (Q + p.a * p.a * E * E - 2.0 * p.a * Xi * L * E);
  }
  // radial quadrature R(r) = Xi^2 ((r^2+a^2) E - a Xi L)^2 - Delta K
  double R(double r, double E, double L, double Q) const {
    const double u = r * r + p.a * p.a;
    const double P = u * E - p.a * Xi * L;
    return Xi * Xi * P * P - delta_eval(p, r) * dyn_K(E, L, Q);
  }
  double dR_dr(double r, double E, double L, double Q) const {
    const double u = r * r + p.a * p.a;
    const double P = u * E - p.a * Xi * L;
    return Xi * Xi * 2.0 * P * 2.0 * r * E - delta_deriv(p, r, 1) * dyn_K(E, L, Q);
  }
  // angular quadrature Theta(theta) = Delta_theta K - Xi^2 (Xi L - a E sin^2)^2 / sin^2
  double Theta(double theta, double E, double L, double Q) const {
    const double s = std::sin(theta), c = std::cos(theta);
    const double dth = 1.0 + p.a * p.a / (p.l * p.l) * c * c;
    const double W = Xi * L / s - p.a * E * s;
    return dth * dyn_K(E, L, Q) - Xi * Xi * W * W;
  }
  double dTheta_dtheta(double theta, double E, double L, double Q) const {
    const double s = std::sin(theta), c = std::cos(theta);
    const double dthp = -2.0 * p.a * p.a / (p.l * p.l) * s * c;
    const double W = Xi * L / s - p.a * E * s;
    const double Wp = -c * (Xi * L / (s * s) + p.a * E);
    return dthp * dyn_K(E, L, Q) - Xi * Xi * 2.0 * W * Wp;
  }
  // rho^2 dt/dv and rho^2 dphi/dv
  double T(double r, double theta, double E, double L) const {
    const double s2 = std::sin(theta) * std::sin(theta);
    const double c = std::cos(theta);
    const double dth = 1.0 + p.a * p.a / (p.l * p.l) * c * c;
    const double u = r * r + p.a * p.a;
    const double D = delta_eval(p, r);
    return (p.a * Xi / dth) * (p.a * E * s2 - Xi * L) +
           Xi * u * (p.a * Xi * L - u * E) / D;
  }
  double Phi(double r, double theta, double E, double L) const {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double dth = 1.0 + p.a * p.a / (p.l * p.l) * c * c;
    const double u = r * r + p.a * p.a;
    const double D = delta_eval(p, r);
    double first;
    if (L == 0.0)
      first = (Xi * Xi / dth) * p.a * E;  // the 1/sin^2 cancels exactly
    else
      first = (Xi * Xi / dth) * (p.a * E * s * s - Xi * L) / (s * s);
    return first + p.a * Xi * Xi * (p.a * Xi * L - u * E) / D;
  }
};

}  // namespace detail

// First-order derivatives of (t, r, theta, phi) in affine time, with the
// radial/angular momenta as explicit state so turning points are crossed
// smoothly (p_r' = R'/(2 rho^2) preserves p_r^2 = R exactly).
struct GeodesicDerivatives {
  double dt = 0.0, dr = 0.0, dtheta = 0.0, dphi = 0.0;
  double dp_r = 0.0, dp_theta = 0.0;
};

inline GeodesicDerivatives geodesic_rhs(const BlackHoleParams& p, const GeodesicState& s) {
  detail::GeodesicCoefficients gc{p, p.xi()};
  if (std::abs(std::sin(s.theta)) < 1e-12 && s.L != 0.0)
    throw PolarSingularity("geodesic_rhs: polar coordinate singularity with L != 0");
  const double rho2 = gc.rho2(s.r, s.theta);
  GeodesicDerivatives d;
  d.dt = gc.T(s.r, s.theta, s.E, s.L) / rho2;
  d.dphi = gc.Phi(s.r, s.theta, s.E, s.L) / rho2;
  d.dr = s.p_r / rho2;
  d.dtheta = s.p_theta / rho2;
  d.dp_r = gc.dR_dr(s.r, s.E, s.L, s.Q) / (2.0 * rho2);
  d.dp_theta = gc.dTheta_dtheta(s.theta, s.E, s.L, s.Q) / (2.0 * rho2);
  return d;
}

// K as printed in the conserved-quantity display (stored, never consumed).
inline double printed_carter_K(const BlackHoleParams& p, double E, double L, double Q) {
  const double Xi = p.xi();
  return Xi * Xi * (Q + p.a * p.a * E * E - 2.0 * p.a * Xi * L * E * Xi);
}

// Initialize momenta from the quadratures with explicit signs.
inline GeodesicState make_geodesic_state(const BlackHoleParams& p, double r, double theta,
                                         double E, double L, double Q, int sign_r,
                                         int sign_theta) {
  detail::GeodesicCoefficients gc{p, p.xi()};
  GeodesicState s;
  s.r = r;
  s.theta = theta;
  s.E = E;
  s.L = L;
  s.Q = Q;
  s.K = printed_carter_K(p, E, L, Q);
  const double R = gc.R(r, E, L, Q);
  const double Th = gc.Theta(theta, E, L, Q);
  if (R < -1e-10 * (1.0 + std::abs(R)))
    throw OutOfDomain("make_geodesic_state: R(r) < 0 at the seed");
  if (Th < -1e-10 * (1.0 + std::abs(Th)))
    throw OutOfDomain("make_geodesic_state: Theta(theta) < 0 at the seed");
  s.p_r = sign_r * std::sqrt(std::max(0.0, R));
  s.p_theta = sign_theta * std::sqrt(std::max(0.0, Th));
  return s;
}

struct GeodesicDiagnostics {
  double null_residual = 0.0;  // g(gdot, gdot), scaled by the affine normalization
  double E_metric = 0.0;       // g(gdot, dt) / Xi
  double L_metric = 0.0;       // -g(gdot, dphi) / Xi
  double Q_reconstructed = 0.0;
};

inline GeodesicDiagnostics geodesic_diagnostics(const BlackHoleParams& p,
                                                const GeodesicState& s) {
  detail::GeodesicCoefficients gc{p, p.xi()};
  const double Xi = gc.Xi;
  const double a = p.a;
  const double s2 = std::sin(s.theta) * std::sin(s.theta);
  const double c = std::cos(s.theta);
  const double dth = 1.0 + a * a / (p.l * p.l) * c * c;
  const double rho2 = gc.rho2(s.r, s.theta);
  const double D = delta_eval(p, s.r);
  const double u = s.r * s.r + a * a;

  const double tdot = gc.T(s.r, s.theta, s.E, s.L) / rho2;
  const double pdot = gc.Phi(s.r, s.theta, s.E, s.L) / rho2;
  const double rdot = s.p_r / rho2;
  const double thdot = s.p_theta / rho2;

  const double g_tt = -(D - dth * a * a * s2) / rho2;
  const double g_tp = -(dth * u - D) * a * s2 / (Xi * rho2);
  const double g_pp = (dth * u * u - D * a * a * s2) * s2 / (Xi * Xi * rho2);
  const double g_rr = rho2 / D;
  const double g_thth = rho2 / dth;

  GeodesicDiagnostics diag;
  diag.null_residual = g_tt * tdot * tdot + 2.0 * g_tp * tdot * pdot + g_pp * pdot * pdot +
                       g_rr * rdot * rdot + g_thth * thdot * thdot;
  diag.E_metric = (g_tt * tdot + g_tp * pdot) / Xi;
  diag.L_metric = -(g_tp * tdot + g_pp * pdot) / Xi;
  const double W = s2 > 0.0 ? Xi * s.L / std::sin(s.theta) - a * s.E * std::sin(s.theta) : 0.0;
  const double Kdyn = (s.p_theta * s.p_theta + Xi * Xi * W * W) / dth;
  diag.Q_reconstructed = Kdyn / (Xi * Xi) - a * a * s.E * s.E + 2.0 * a * Xi * s.L * s.E;
  return diag;
}

struct TrajectorySample {
  double v = 0.0;
  GeodesicState state;
  GeodesicDiagnostics diag;
};

struct GeodesicIntegrationResult {
  std::vector<TrajectorySample> samples;
  double max_r_deviation = 0.0;     // against the seed radius
  double max_conserved_drift = 0.0; // worst of E, L, Q drifts
  double max_null_residual = 0.0;
  double max_energy_residual = 0.0; // |g(gdot, dt)|/Xi for E = 0 orbits
  bool left_domain = false;
  double v_end = 0.0;
};

// Integrate an orbit for the given affine span, sampling at uniform times.
// Integration stops early if the orbit leaves (r_plus + margin,
// rbar_plus - margin).
inline GeodesicIntegrationResult integrate_geodesic(const BlackHoleParams& p,
                                                    const HorizonData& h,
                                                    const GeodesicState& seed,
                                                    double affine_span,
                                                    std::size_t samples = 1001,
                                                    double tol = 1e-10) {
  detail::GeodesicCoefficients gc{p, p.xi()};
  const double margin = 1e-4 * (h.rbar_plus - h.r_plus);

  auto rhs = [&gc, &p, &seed](double, const std::array<double, 6>& y,
                              std::array<double, 6>& dy) {
    GeodesicState s;
    s.t = y[0];
    s.r = y[1];
    s.theta = y[2];
    s.phi = y[3];
    s.p_r = y[4];
    s.p_theta = y[5];
    s.E = seed.E;
    s.L = seed.L;
    s.Q = seed.Q;
    auto d = geodesic_rhs(p, s);
    dy = {d.dt, d.dr, d.dtheta, d.dphi, d.dp_r, d.dp_theta};
  };
  auto integ = make_dopri<6>(rhs);
  OdeOptions<6> opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol;
  opt.max_step = 0.5;

  GeodesicIntegrationResult out;
  std::array<double, 6> y{seed.t, seed.r, seed.theta, seed.phi, seed.p_r, seed.p_theta};

  auto record = [&](double v, const std::array<double, 6>& yy) {
    GeodesicState s = seed;
    s.t = yy[0];
    s.r = yy[1];
    s.theta = yy[2];
    s.phi = yy[3];
    s.p_r = yy[4];
    s.p_theta = yy[5];
    auto diag = geodesic_diagnostics(p, s);
    out.samples.push_back({v, s, diag});
    out.max_r_deviation = std::max(out.max_r_deviation, std::abs(s.r - seed.r));
    out.max_conserved_drift = std::max({out.max_conserved_drift,
                                        std::abs(diag.E_metric - seed.E),
                                        std::abs(diag.L_metric - seed.L),
                                        std::abs(diag.Q_reconstructed - seed.Q)});
    out.max_null_residual = std::max(out.max_null_residual, std::abs(diag.null_residual));
    out.max_energy_residual = std::max(out.max_energy_residual, std::abs(diag.E_metric));
  };

  const double dv = affine_span / static_cast<double>(samples - 1);
  record(0.0, y);
  double v = 0.0;
  for (std::size_t i = 1; i < samples; ++i) {
    double v_next = i * dv;
    try {
      integ.integrate(y, v, v_next, opt);
    } catch (const StepSizeUnderflow&) {
      // the orbit ran into a horizon between samples
      out.left_domain = true;
      break;
    }
    v = v_next;
    if (y[1] <= h.r_plus + margin || y[1] >= h.rbar_plus - margin) {
      out.left_domain = true;
      break;
    }
    record(v, y);
  }
  out.v_end = v;
  return out;
}

// Existence of a dt-orthogonal trapped null geodesic: a != 0 together with
// max Delta/a^2 <= 1. When it exists, the orbit radius is the maximizer of
// Delta and theta0 solves Delta_theta sin^2(theta) = Delta(r_max)/a^2.
struct TrappedOrbit {
  bool exists = false;
  double r_orbit = 0.0;
  std::optional<double> theta0;
  double criterion = 0.0;  // max Delta / a^2
};

inline TrappedOrbit trapped_orthogonal_exists(const BlackHoleParams& p, const HorizonData& h) {
  TrappedOrbit out;
  out.criterion = max_delta_over_a2(p, h);
  if (p.a == 0.0 || !(out.criterion <= 1.0)) return out;
  auto sr = special_radii(p, h);
  out.exists = true;
  out.r_orbit = sr.r_delta_max;
  const double c = delta_eval(p, sr.r_delta_max) / (p.a * p.a);
  const double a2l2 = p.a * p.a / (p.l * p.l);
  auto g = [c, a2l2](double th) {
    double s2 = std::sin(th) * std::sin(th);
    return (1.0 + a2l2 * (1.0 - s2)) * s2 - c;
  };
  auto gd = [a2l2](double th) {
    double s = std::sin(th), cth = std::cos(th);
    return 2.0 * s * cth * (1.0 + a2l2) - 4.0 * a2l2 * s * s * s * cth;
  };
  out.theta0 = refine_root([&](double th) { return std::pair{g(th), gd(th)}; }, 1e-6,
                           2.0 * std::atan(1.0));
  return out;
}

// Integrate the E = 0 trapped orbit seeded at (r_delta_max, theta0).
inline GeodesicIntegrationResult integrate_trapped(const BlackHoleParams& p,
                                                   const HorizonData& h, double affine_span,
                                                   std::size_t samples = 1001,
                                                   double tol = 1e-10,
                                                   double r_seed_scale = 1.0,
                                                   double theta_seed = -1.0) {
  auto orbit = trapped_orthogonal_exists(p, h);
  if (!orbit.exists)
    throw OutOfDomain("integrate_trapped: no dt-orthogonal trapped orbit for these parameters");
  const double Q = 1.0;
  const double Xi = p.xi();
  const double L = std::sqrt(delta_eval(p, orbit.r_orbit) * Q) / (Xi * std::abs(p.a));
  const double theta = theta_seed > 0.0 ? theta_seed : *orbit.theta0;
  auto seed =
      make_geodesic_state(p, orbit.r_orbit * r_seed_scale, theta, 0.0, L, Q, 1, 1);
  auto res = integrate_geodesic(p, h, seed, affine_span, samples, tol);
  // Deviation measured against the trapped radius, not the (possibly
  // perturbed) seed.
  res.max_r_deviation = 0.0;
  for (const auto& smp : res.samples)
    res.max_r_deviation = std::max(res.max_r_deviation, std::abs(smp.state.r - orbit.r_orbit));
  return res;
}

// Geodesic-potential correspondence: with (E, L, Q) in place of (omega, m,
// lambda), rho^4 rdot^2 / (Xi^2 (r^2+a^2)^2) equals E^2 - V0. Returns the
// max relative deviation over the samples.
struct CorrespondenceSample {
  double E, L, Q, r, theta;
};

inline double correspondence_check(const BlackHoleParams& p, const HorizonData& h,
                                   const std::vector<CorrespondenceSample>& samples) {
  detail::GeodesicCoefficients gc{p, p.xi()};
  double worst = 0.0;
  for (const auto& s : samples) {
    const double R = gc.R(s.r, s.E, s.L, s.Q);
    const double u = s.r * s.r + p.a * p.a;
    const double lhs = R / (gc.Xi * gc.Xi * u * u);
    // V0 with the identifications lambda -> Q, m -> L, omega -> E
    const double lt = s.Q + p.a * p.a * s.E * s.E;
    const double D = delta_eval(p, s.r);
    const double shift = s.E - p.a * s.L * gc.Xi / u;
    const double V0 = D * (lt - 2.0 * p.a * s.L * s.E * gc.Xi) / (u * u) + s.E * s.E -
                      shift * shift;
    const double rhs = s.E * s.E - V0;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-12});
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
    (void)h;
  }
  return worst;
}

inline void write_trajectory_csv(const std::string& path,
                                 const GeodesicIntegrationResult& res) {
  CsvWriter csv(path);
  csv.header({"v", "t", "r", "theta", "phi", "E", "L", "Q", "null_residual"});
  for (const auto& s : res.samples)
    csv.row_strings({float17(s.v), float17(s.state.t), float17(s.state.r),
                     float17(s.state.theta), float17(s.state.phi), float17(s.diag.E_metric),
                     float17(s.diag.L_metric), float17(s.diag.Q_reconstructed),
                     float17(s.diag.null_residual)});
}

}  // namespace kds
