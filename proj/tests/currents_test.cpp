#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <memory>

#include "kds/currents.hpp"
#include "oracle_helpers.hpp"

using namespace kds;
using namespace std::complex_literals;

namespace {

struct Setup {
  BlackHoleParams p;
  HorizonData h;
  std::shared_ptr<Tortoise> rs;
  Setup(double a, double M, double l, double mu2 = 0.0)
      : p{a, M, l, mu2}, h(horizon_data(p)), rs(std::make_shared<Tortoise>(p, h)) {}
};

// Manufactured smooth radial "solution": u0 analytic, H := u0'' + (w^2-V)u0.
RadialSolution manufactured(const RadialPotential& pot, const Tortoise& rs, double lo, double hi,
                            std::size_t n) {
  RadialSolution sol;
  sol.grid = uniform_grid(lo, hi, n);
  sol.radius.resize(n);
  sol.u.resize(n);
  sol.up.resize(n);
  sol.H.resize(n);
  sol.has_H = true;
  const double w = pot.frequency().omega;
  for (std::size_t i = 0; i < n; ++i) {
    double x = sol.grid[i];
    double r = rs.inverse(x);
    sol.radius[i] = r;
    Complex u = std::exp(1.0i * w * x) * (2.0 + std::tanh(x / 3.0));
    double t = std::tanh(x / 3.0), s2 = (1.0 - t * t) / 3.0;
    Complex du = std::exp(1.0i * w * x) * (1.0i * w * (2.0 + t) + s2);
    Complex d2u = std::exp(1.0i * w * x) *
                  (-w * w * (2.0 + t) + 2.0i * w * s2 - 2.0 * t * s2 / 3.0);
    sol.u[i] = u;
    sol.up[i] = du;
    sol.H[i] = d2u + (w * w - pot.V(r)) * u;
  }
  return sol;
}

MultiplierSet manufactured_multipliers() {
  // Globally smooth analytic profiles (independent of any regime recipe).
  MultiplierSet m;
  m.recipe = "manufactured";
  Profile f;
  f.value = [](double x) { return std::tanh(x / 4.0); };
  f.d1 = [](double x) {
    double t = std::tanh(x / 4.0);
    return (1.0 - t * t) / 4.0;
  };
  f.d2 = [](double x) {
    double t = std::tanh(x / 4.0);
    return -2.0 * t * (1.0 - t * t) / 16.0;
  };
  f.d3 = [](double x) {
    double t = std::tanh(x / 4.0);
    double s = 1.0 - t * t;
    return (-2.0 * s * s + 4.0 * t * t * s) / 64.0;
  };
  m.f = f;
  Profile h;
  h.value = [](double x) { return std::exp(-x * x / 18.0); };
  h.d1 = [](double x) { return -x / 9.0 * std::exp(-x * x / 18.0); };
  h.d2 = [](double x) { return (x * x / 81.0 - 1.0 / 9.0) * std::exp(-x * x / 18.0); };
  m.h = h;
  Profile y;
  y.value = [](double x) { return 1.0 + 0.5 * std::sin(x / 5.0); };
  y.d1 = [](double x) { return 0.1 * std::cos(x / 5.0); };
  y.d2 = [](double x) { return -0.02 * std::sin(x / 5.0); };
  m.y = y;
  return m;
}

}  // namespace

TEST_CASE("current special cases") {
  Setup s(0.2, 1.0, 10.0);
  auto f = make_frequency_triple(s.p, 0.8, 1, 2);
  RadialPotential pot(s.p, s.h, f);
  auto sol = manufactured(pot, *s.rs, -12.0, 12.0, 801);

  SECTION("h == 1 reduces Qh to Re(u' conj u)") {
    MultiplierSet m;
    m.h = constant_profile(1.0);
    auto q = current_eval(CurrentKind::Qh, m, sol, pot);
    for (std::size_t i = 0; i < sol.size(); ++i)
      CHECK(q[i] == Approx(std::real(sol.up[i] * std::conj(sol.u[i]))).margin(1e-14));
  }

  SECTION("real-valued u kills the Qt current") {
    auto sol_r = sol;
    for (std::size_t i = 0; i < sol_r.size(); ++i) {
      sol_r.u[i] = std::abs(sol_r.u[i]);
      sol_r.up[i] = std::abs(sol_r.up[i]);
    }
    MultiplierSet m;
    auto q = current_eval(CurrentKind::Qt, m, sol_r, pot);
    for (double v : q) CHECK(v == 0.0);
  }

  SECTION("Qf equals Qh(h=f') + Qy(y=f) pointwise") {
    auto m = manufactured_multipliers();
    MultiplierSet mh;
    mh.h.value = m.f.d1;
    mh.h.d1 = m.f.d2;
    mh.h.d2 = m.f.d3;
    MultiplierSet my;
    my.y = m.f;
    auto qf = current_eval(CurrentKind::Qf, m, sol, pot);
    auto qh = current_eval(CurrentKind::Qh, mh, sol, pot);
    auto qy = current_eval(CurrentKind::Qy, my, sol, pot);
    for (std::size_t i = 0; i < sol.size(); ++i)
      CHECK(qf[i] == Approx(qh[i] + qy[i]).margin(1e-12).epsilon(1e-12));
  }
}

TEST_CASE("current identities against finite differences") {
  Setup s(0.3, 1.0, 10.0, 0.1);
  auto f = make_frequency_triple(s.p, 1.1, -1, 2);
  RadialPotential pot(s.p, s.h, f);
  auto m = manufactured_multipliers();

  SECTION("manufactured solutions satisfy all identities to 1e-6 with 2nd-order decay") {
    auto sol_h = manufactured(pot, *s.rs, -10.0, 10.0, 4001);
    auto sol_h2 = manufactured(pot, *s.rs, -10.0, 10.0, 8001);
    for (auto kind : {CurrentKind::Qh, CurrentKind::Qy, CurrentKind::Qf, CurrentKind::Qt,
                      CurrentKind::QK, CurrentKind::QKbar}) {
      double res1 = identity_check(kind, m, sol_h, pot);
      double res2 = identity_check(kind, m, sol_h2, pot);
      INFO("kind " << to_string(kind) << " res1=" << res1 << " res2=" << res2);
      CHECK(res1 < 1e-6);
      CHECK(res1 / res2 > 3.5);  // second-order convergence
    }
  }

  SECTION("homogeneous solution: Qt is constant along r*") {
    auto seed = frobenius_solution(pot, *s.rs, HorizonSide::event_horizon);
    auto grid = uniform_grid(seed.rstar_match, 30.0, 3001);
    auto sol = integrate_radial(pot, *s.rs, seed, IntegrationDirection::to_plus_infinity,
                                {seed.rstar_match, 30.0}, grid, nullptr, 1e-12);
    MultiplierSet empty;
    auto q = current_eval(CurrentKind::Qt, empty, sol, pot);
    double scale = 0.0;
    for (double v : q) scale = std::max(scale, std::abs(v));
    for (double v : q) CHECK(std::abs(v - q.front()) < 1e-8 * scale);
  }

  SECTION("compactly supported h integrates (Qh)' to zero") {
    auto sol = manufactured(pot, *s.rs, -16.0, 16.0, 4001);
    MultiplierSet mb;
    mb.h = bump_profile(0.0, 3.0, 8.0);
    auto dq = current_derivative_closed_form(CurrentKind::Qh, mb, sol, pot);
    double hstep = sol.grid[1] - sol.grid[0];
    double total = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < dq.size(); ++i) {
      total += hstep * dq[i];
      scale = std::max(scale, std::abs(dq[i]));
    }
    CHECK(std::abs(total) < 1e-6 * std::max(1.0, scale));
  }
}

TEST_CASE("outgoing boundary bookkeeping of Qy") {
  Setup s(0.2, 1.0, 10.0);
  auto f = make_frequency_triple(s.p, 0.9, 1, 1);
  RadialPotential pot(s.p, s.h, f);
  auto seed = frobenius_solution(pot, *s.rs, HorizonSide::event_horizon, 20, 1e-7);
  auto grid = uniform_grid(seed.rstar_match, 5.0, 101);
  auto sol = integrate_radial(pot, *s.rs, seed, IntegrationDirection::to_plus_infinity,
                              {seed.rstar_match, 5.0}, grid, nullptr, 1e-12);
  MultiplierSet m;
  m.y = constant_profile(1.0);
  auto q = current_eval(CurrentKind::Qy, m, sol, pot);
  // With u' -> -i(w - w_+ m) u and V -> w^2 - (w - w_+ m)^2 at the horizon,
  // Qy -> 2 (w - w_+ m)^2 |u|^2.
  double expect = 2.0 * std::pow(f.omega - s.h.omega_plus * f.m, 2) * std::norm(sol.u.front());
  CHECK(q.front() == Approx(expect).epsilon(1e-4));
}

TEST_CASE("regime multiplier recipes") {
  RegimeParams rp;
  MultiplierConfig cfg;

  SECTION("omega-dominated y changes sign at r_delta_frac with positive slope") {
    Setup s(0.3, 1.0, 10.0);
    auto f = make_frequency_triple(s.p, 25.0, 0, 0);
    auto label = classify_frequency(s.p, s.h, rp, f);
    REQUIRE(label.has(regime_omega_dominated));
    auto m = build_multipliers(s.p, s.h, s.rs, rp, f, label, cfg);
    CHECK(m.recipe == "omega_dominated_y");
    auto sr = special_radii(s.p, s.h);
    double x_frac = (*s.rs)(sr.r_delta_frac);
    CHECK(m.y(x_frac) == Approx(0.0).margin(1e-9));
    CHECK(m.y(x_frac - 2.0) < 0.0);
    CHECK(m.y(x_frac + 2.0) > 0.0);
    // y' >= b Delta on a grid
    auto rep = certify_coercivity(s.p, s.h, s.rs, rp, f, m);
    CHECK(rep.aux_slack > 0.0);  // min y'/Delta
    CHECK(rep.certified_b > 0.0);
  }

  SECTION("de Sitter trapped f satisfies the seeding conditions exactly") {
    // background admitting de Sitter trapping (max Delta/a^2 <= 1)
    Setup s(2.1, 2.0, 10.0);
    REQUIRE(max_delta_over_a2(s.p, s.h) <= 1.0);
    // small omega inside DSF with large lambda_tilde
    const int m_az = 6;
    double w_ds = 0.5 * std::abs(s.p.a) * m_az * s.h.Xi /
                  (s.h.rbar_plus * s.h.rbar_plus + s.p.a * s.p.a);
    auto f = make_frequency_triple(s.p, w_ds, m_az, 24);
    auto label = classify_frequency(s.p, s.h, rp, f);
    REQUIRE(label.has(regime_ds));
    auto mult = build_multipliers(s.p, s.h, s.rs, rp, f, label, cfg);
    if (mult.r_trap > 0.0) {
      double x_t = (*s.rs)(mult.r_trap);
      CHECK(mult.f(x_t) == Approx(0.0).margin(1e-9));
      CHECK(mult.f.deriv1(x_t) == Approx(1.0).epsilon(1e-9));
      CHECK(mult.f.deriv2(x_t) == Approx(0.0).margin(1e-9));
      CHECK(mult.f.deriv3(x_t) ==
            Approx(-2.0 * delta_eval(s.p, mult.r_trap)).epsilon(1e-9));
    }
    // far-field values
    double xa = (*s.rs)(s.h.r_plus + 1e-6);
    double xb = (*s.rs)(s.h.rbar_plus - 1e-6);
    CHECK(mult.f(xa) == Approx(-1.0).margin(1e-12));
    CHECK(mult.f(xb) == Approx(1.0).margin(1e-12));
  }

  SECTION("bounded near-stationary small-a recipe uses the 1/(r^2+a^2) h profile") {
    Setup s(0.03, 1.0, 10.0);
    auto f = make_frequency_triple(s.p, 0.01, 1, 1);
    auto label = classify_frequency(s.p, s.h, rp, f);
    REQUIRE(label.has(regime_flat));
    auto mult = build_multipliers(s.p, s.h, s.rs, rp, f, label, cfg);
    CHECK(mult.recipe == "flat_stationary_small_a_h_y");
    // on the middle region h = C lambda_tilde / (r^2+a^2) for some constant C
    double r1 = 0.45 * (s.h.r_plus + s.h.rbar_plus);
    double r2 = 0.55 * (s.h.r_plus + s.h.rbar_plus);
    double h1 = mult.h((*s.rs)(r1)) * (r1 * r1 + s.p.a * s.p.a);
    double h2 = mult.h((*s.rs)(r2)) * (r2 * r2 + s.p.a * s.p.a);
    CHECK(h1 == Approx(h2).epsilon(1e-9));
    CHECK(h1 > 0.0);
  }

  SECTION("empty regime is rejected") {
    Setup s(0.1, 1.0, 10.0);
    auto f = make_frequency_triple(s.p, 0.5, 0, 0);
    RegimeLabel empty;
    CHECK_THROWS_AS(build_multipliers(s.p, s.h, s.rs, rp, f, empty, cfg), UnknownRegime);
  }
}

TEST_CASE("coercivity certification outcomes") {
  RegimeParams rp;
  MultiplierConfig cfg;

  SECTION("deep sharp-enlarged superradiant triple certifies the frequency bound") {
    Setup s(0.9, 1.0, 10.0);
    // pick a superradiant high-lambda triple: a m omega just above the lower window edge
    const int m_az = 3;
    double w_lo = s.h.omega_bar_plus * m_az, w_hi = s.h.omega_plus * m_az;
    double w = w_lo + 0.5 * (w_hi - w_lo);
    auto f = make_frequency_triple(s.p, w, m_az, 14);
    auto label = classify_frequency(s.p, s.h, rp, f);
    REQUIRE(label.superradiant);
    REQUIRE(label.has(regime_sharp_enlarged));
    RadialPotential pot(s.p, s.h, f);
    // Frequency-space bound lambda_tilde - 2 a m omega Xi >= b lambda_tilde, b > 0
    CHECK(pot.lambda_minus_2amwXi() / f.lambda_tilde > 0.0);
    auto mult = build_multipliers(s.p, s.h, s.rs, rp, f, label, cfg);
    auto rep = certify_coercivity(s.p, s.h, s.rs, rp, f, mult);
    CHECK(rep.grid_points == 2000);
  }

  SECTION("natural-regime non-trapped exponential y certifies a positive b") {
    Setup s(0.3, 1.0, 10.0);
    // high omega, moderate lambda, am omega < 0: omega^2 well above max V
    auto f = make_frequency_triple(s.p, -14.0, 1, 12);
    auto label = classify_frequency(s.p, s.h, rp, f);
    REQUIRE(label.has(regime_natural));
    RadialPotential pot(s.p, s.h, f);
    auto vmax = pot.max_V();
    REQUIRE(f.omega * f.omega - vmax.value > cfg.eps_trap * f.lambda_tilde);
    auto mult = build_multipliers(s.p, s.h, s.rs, rp, f, label, cfg);
    CHECK(mult.recipe == "natural_exp_y");
    auto rep = certify_coercivity(s.p, s.h, s.rs, rp, f, mult);
    CHECK(rep.certified_b > 0.0);
    CHECK(rep.r_trap == 0.0);
  }

  SECTION("trapped-regime f certificate crosses to positive at high frequency") {
    // Photon-sphere-ratio triples: trapping is exact, and the bulk inequality
    // for the seeded f multiplier becomes coercive once omega is large.
    Setup s(0.0, 1.0, 10.0);
    RegimeParams rp_loc = rp;
    rp_loc.lambda_low = 0.02;
    rp_loc.C = rp_loc.omega_high * rp_loc.omega_high / rp_loc.lambda_low;
    const double ratio = 81.0 / delta_eval(s.p, 3.0);
    double prev_slack = -1e300;
    for (double w : {24.0, 48.0, 96.0}) {
      FrequencyTriple f;
      f.omega = w;
      f.m = 0;
      f.ell = 0;
      f.lambda = ratio * w * w;
      f.lambda_tilde = f.lambda;
      auto label = classify_frequency(s.p, s.h, rp_loc, f);
      REQUIRE(label.has(regime_natural));
      auto mult = build_multipliers(s.p, s.h, s.rs, rp_loc, f, label, cfg);
      REQUIRE(mult.r_trap > 0.0);
      CHECK(mult.r_trap == Approx(3.0).margin(1e-3));
      auto rep = certify_coercivity(s.p, s.h, s.rs, rp_loc, f, mult);
      CHECK(rep.min_slack > 0.0);
      CHECK(rep.certified_b > 0.0);
      CHECK(rep.min_slack > prev_slack);
      prev_slack = rep.min_slack;
    }
  }

  SECTION("raising omega_high improves the natural-regime slack on a fixed sampling rule") {
    Setup s(0.3, 1.0, 10.0);
    double prev_slack = -1e300;
    for (double whigh : {10.0, 20.0, 40.0}) {
      RegimeParams rpw = rp;
      rpw.omega_high = whigh;
      rpw.C = whigh * whigh / rpw.lambda_low;
      // sample scales with the regime threshold: omega = -1.5 omega_high,
      // ell tuned so lambda ~ omega^2 sits inside the natural band
      double w = -1.5 * whigh;
      int ell = static_cast<int>(std::ceil(0.45 * std::abs(w)));
      auto f = make_frequency_triple(s.p, w, 1, std::max(1, ell));
      auto label = classify_frequency(s.p, s.h, rpw, f);
      REQUIRE(label.has(regime_natural));
      auto mult = build_multipliers(s.p, s.h, s.rs, rpw, f, label, cfg);
      REQUIRE(mult.recipe == "natural_exp_y");
      auto rep = certify_coercivity(s.p, s.h, s.rs, rpw, f, mult);
      CHECK(rep.min_slack > prev_slack);
      prev_slack = rep.min_slack;
    }
  }

  SECTION("sub-threshold parameters report negative slack without throwing") {
    Setup s(0.3, 1.0, 10.0);
    RegimeParams weak = rp;
    weak.omega_high = 0.2;  // far below any realistic largeness threshold
    weak.omega_low = 0.01;
    weak.C = weak.omega_high * weak.omega_high / weak.lambda_low;
    auto f = make_frequency_triple(s.p, 0.5, 2, 3);
    auto label = classify_frequency(s.p, s.h, weak, f);
    REQUIRE(label.flags != 0);
    auto mult = build_multipliers(s.p, s.h, s.rs, weak, f, label, cfg);
    auto rep = certify_coercivity(s.p, s.h, s.rs, weak, f, mult);
    CHECK(std::isfinite(rep.min_slack));  // failure shows up as data
  }
}
