#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "kds/geodesics.hpp"
#include "oracle_helpers.hpp"

using namespace kds;

namespace {

struct Setup {
  BlackHoleParams p;
  HorizonData h;
  Setup(double a, double M, double l) : p{a, M, l, 0.0}, h(horizon_data(p)) {}
};

}  // namespace

TEST_CASE("photon-sphere circular orbit in Schwarzschild-de Sitter") {
  Setup s(0.0, 1.0, 10.0);
  // a = 0, E = 1, L = 0: R(r) = r^4 E^2 - Delta Q; circular at r = 3M needs
  // R(3M) = 0, i.e. Q = (3M)^4 / Delta(3M); R'(3M) = 0 then follows from the
  // maximum of Delta/r^4 at 3M.
  const double r0 = 3.0;
  const double Q = std::pow(r0, 4) / delta_eval(s.p, r0);
  auto st = make_geodesic_state(s.p, r0, M_PI / 2.0, 1.0, 0.0, Q, 1, 1);
  auto d = geodesic_rhs(s.p, st);
  CHECK(st.p_r == Approx(0.0).margin(1e-9));
  CHECK(d.dr == Approx(0.0).margin(1e-9));
  CHECK(d.dp_r == Approx(0.0).margin(1e-9));  // rddot = 0: genuine circular orbit
}

TEST_CASE("E=0 seed at the Delta maximum is a fixed point of the radial flow") {
  Setup s(2.1, 2.0, 10.0);
  auto orbit = trapped_orthogonal_exists(s.p, s.h);
  REQUIRE(orbit.exists);
  REQUIRE(orbit.theta0.has_value());
  const double Q = 1.0;
  const double L = std::sqrt(delta_eval(s.p, orbit.r_orbit) * Q) / (s.p.xi() * s.p.a);
  auto st = make_geodesic_state(s.p, orbit.r_orbit, *orbit.theta0, 0.0, L, Q, 1, 1);
  auto d = geodesic_rhs(s.p, st);
  CHECK(d.dr == Approx(0.0).margin(1e-9));
  CHECK(d.dtheta == Approx(0.0).margin(1e-7));
}

TEST_CASE("trapped orbit existence criterion") {
  SECTION("a = 0 has no dt-orthogonal trapped orbit") {
    Setup s(0.0, 1.0, 10.0);
    CHECK_FALSE(trapped_orthogonal_exists(s.p, s.h).exists);
  }
  SECTION("small a fails the criterion by continuity") {
    Setup s(0.05, 1.0, 10.0);
    auto orbit = trapped_orthogonal_exists(s.p, s.h);
    CHECK_FALSE(orbit.exists);
    CHECK(orbit.criterion > 1.0);
  }
  SECTION("grid-searched high-rotation parameters admit the orbit") {
    Setup s(2.1, 2.0, 10.0);
    auto orbit = trapped_orthogonal_exists(s.p, s.h);
    CHECK(orbit.exists);
    CHECK(orbit.criterion <= 1.0);
    REQUIRE(orbit.theta0.has_value());
    CHECK(*orbit.theta0 > 0.0);
    CHECK(*orbit.theta0 <= M_PI / 2.0 + 1e-12);
    // theta0 solves Delta_theta sin^2 = Delta(r_max)/a^2
    double c = std::cos(*orbit.theta0), s2 = 1.0 - c * c;
    double lhs = (1.0 + s.p.a * s.p.a / (s.p.l * s.p.l) * c * c) * s2;
    CHECK(lhs == Approx(delta_eval(s.p, orbit.r_orbit) / (s.p.a * s.p.a)).epsilon(1e-10));
  }
  SECTION("existence flips exactly at the criterion boundary") {
    // walk a downward through the boundary at fixed (M, l)
    double M = 1.85, l = 10.0;
    bool prev_exists = true;
    for (double a = 1.95; a >= 1.80; a -= 0.01) {
      if (classify_subextremal(a, M, l) != Subextremality::subextremal) continue;
      BlackHoleParams p{a, M, l, 0.0};
      auto h = horizon_data(p);
      auto orbit = trapped_orthogonal_exists(p, h);
      CHECK(orbit.exists == (orbit.criterion <= 1.0));
      if (!orbit.exists) prev_exists = false;
      if (!prev_exists) CHECK_FALSE(orbit.exists);  // monotone in a along this slice
    }
  }
}

TEST_CASE("trapped orbit integration") {
  Setup s(2.1, 2.0, 10.0);

  SECTION("seeded exactly: r pinned, conserved quantities flat, g(gdot, dt) = 0") {
    auto res = integrate_trapped(s.p, s.h, 100.0, 2001, 1e-11);
    CHECK_FALSE(res.left_domain);
    CHECK(res.max_r_deviation < 1e-6);
    CHECK(res.max_conserved_drift < 1e-8);
    CHECK(res.max_energy_residual < 1e-8);
    CHECK(res.max_null_residual < 1e-8);
  }

  SECTION("theta-dynamic orbit on the trapped sphere keeps everything conserved") {
    auto res = integrate_trapped(s.p, s.h, 100.0, 2001, 1e-11, 1.0, M_PI / 2.0);
    CHECK(res.max_r_deviation < 1e-6);
    CHECK(res.max_conserved_drift < 1e-8);
    CHECK(res.max_null_residual < 1e-8);
    // theta genuinely oscillates
    double th_min = 10.0, th_max = -10.0;
    for (auto& smp : res.samples) {
      th_min = std::min(th_min, smp.state.theta);
      th_max = std::max(th_max, smp.state.theta);
    }
    CHECK(th_max - th_min > 0.1);
  }

  SECTION("perturbed seed departs from the unstable maximum") {
    auto res = integrate_trapped(s.p, s.h, 100.0, 2001, 1e-11, 1.0 + 1e-3);
    CHECK(res.max_r_deviation > 1e-2);
  }
}

TEST_CASE("generic crossing orbit conserves E, L, Q and the null constraint") {
  Setup s(0.4, 1.0, 10.0);
  const double r0 = 0.5 * (s.h.r_plus + s.h.rbar_plus);
  const double th0 = 1.2;
  // choose Q so that Theta(theta0) > 0
  const double Xi = s.p.xi();
  const double E = 1.0, L = 0.7;
  const double sth = std::sin(th0);
  const double W = Xi * L / sth - s.p.a * E * sth;
  const double Kdyn = (0.4 + Xi * Xi * W * W) / (1.0 + s.p.a * s.p.a / 100.0 * std::cos(th0) * std::cos(th0));
  const double Q = Kdyn / (Xi * Xi) - s.p.a * s.p.a * E * E + 2.0 * s.p.a * Xi * L * E;
  auto seed = make_geodesic_state(s.p, r0, th0, E, L, Q, 1, 1);
  auto res = integrate_geodesic(s.p, s.h, seed, 100.0, 4001, 1e-11);
  // The orbit eventually exits toward a horizon; everything sampled inside
  // the domain must stay conserved.
  CHECK(res.samples.size() > 50);
  CHECK(res.max_conserved_drift < 1e-8);
  CHECK(res.max_null_residual < 1e-8);
}

TEST_CASE("stored Carter constant matches its printed combination") {
  BlackHoleParams p{0.5, 1.0, 10.0, 0.0};
  const double Xi = p.xi();
  auto st = make_geodesic_state(p, 4.0, 1.1, 0.8, -0.6, 2.5, 1, 1);
  double expect = Xi * Xi * (st.Q + p.a * p.a * st.E * st.E -
                             2.0 * p.a * Xi * st.L * st.E * Xi);
  CHECK(st.K == Approx(expect).epsilon(1e-14));
}

TEST_CASE("polar singularity guard") {
  Setup s(0.5, 1.0, 10.0);
  GeodesicState st;
  st.r = 4.0;
  st.theta = 1e-14;
  st.L = 0.3;
  st.E = 1.0;
  st.Q = 2.0;
  CHECK_THROWS_AS(geodesic_rhs(s.p, st), PolarSingularity);
}

TEST_CASE("geodesic-potential correspondence") {
  SECTION("a = 0 reduces to the same algebraic expression") {
    Setup s(0.0, 1.0, 10.0);
    std::vector<CorrespondenceSample> samples;
    auto rng = oracle::rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 50; ++i)
      samples.push_back({2.0 * U(rng) - 1.0, 2.0 * U(rng) - 1.0, 3.0 * U(rng),
                         s.h.r_plus + (s.h.rbar_plus - s.h.r_plus) * U(rng),
                         0.2 + 2.7 * U(rng)});
    CHECK(correspondence_check(s.p, s.h, samples) < 1e-10);
  }

  SECTION("generic rotating samples agree to 1e-8") {
    Setup s(0.45, 1.2, 11.0);
    std::vector<CorrespondenceSample> samples;
    auto rng = oracle::rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 100; ++i)
      samples.push_back({2.0 * U(rng) - 1.0, 2.0 * U(rng) - 1.0, 3.0 * U(rng),
                         s.h.r_plus + (s.h.rbar_plus - s.h.r_plus) * U(rng),
                         0.2 + 2.7 * U(rng)});
    CHECK(correspondence_check(s.p, s.h, samples) < 1e-8);
  }

  SECTION("E=0 at the Delta maximum with matched Q makes both sides vanish") {
    Setup s(2.1, 2.0, 10.0);
    auto orbit = trapped_orthogonal_exists(s.p, s.h);
    REQUIRE(orbit.exists);
    const double Q = 1.0;
    const double L = std::sqrt(delta_eval(s.p, orbit.r_orbit) * Q) / (s.p.xi() * s.p.a);
    detail::GeodesicCoefficients gc{s.p, s.p.xi()};
    CHECK(gc.R(orbit.r_orbit, 0.0, L, Q) == Approx(0.0).margin(1e-9));
  }
}
