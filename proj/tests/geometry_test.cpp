#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "kds/geometry.hpp"
#include "oracle_helpers.hpp"

using namespace kds;

static BlackHoleParams make(double a, double M, double l, double mu2 = 0.0) {
  BlackHoleParams p;
  p.a = a;
  p.M = M;
  p.l = l;
  p.mu2_kg = mu2;
  return p;
}

TEST_CASE("delta evaluation at simple points") {
  CHECK(delta_eval(make(0.0, 1.0, 10.0), 0.0) == 0.0);
  CHECK(delta_eval(make(0.1, 1.0, 10.0), 0.0) == Approx(0.01).epsilon(1e-15));
}

TEST_CASE("delta matches exact rational Horner oracle") {
  using oracle::bigq;
  const bigq a(3, 10), M(1), l(12), r(5, 2);
  const bigq exact = oracle::delta_exact(a, M, l, r);
  const double expect = static_cast<double>(exact);
  const double got = delta_eval(make(0.3, 1.0, 12.0), 2.5);
  CHECK(got == Approx(expect).epsilon(1e-15));
}

TEST_CASE("delta derivatives match finite differences") {
  auto p = make(0.42, 1.1, 9.0);
  auto rng = oracle::rng(7);
  std::uniform_real_distribution<double> U(-3.0, 8.0);
  for (int i = 0; i < 50; ++i) {
    double r = U(rng);
    for (int k = 1; k <= 3; ++k) {
      double fd = oracle::fd_derivative(
          [&](double x) { return delta_deriv(p, x, k - 1); }, r, 1e-5);
      CHECK(delta_deriv(p, r, k) == Approx(fd).margin(1e-6).epsilon(1e-7));
    }
  }
}

TEST_CASE("subextremality classification, Schwarzschild-de Sitter cases") {
  CHECK(classify_subextremal(0.0, 1.0, 10.0) == Subextremality::subextremal);
  // Exact extremal boundary M^2/l^2 = 1/27.
  CHECK(classify_subextremal(0.0, 1.0, std::sqrt(27.0)) == Subextremality::borderline);
  CHECK(classify_subextremal(0.0, 1.0, 5.0) == Subextremality::not_subextremal);
}

TEST_CASE("classifier agrees with direct quartic root counting on a grid") {
  // Reduced version of the acceptance sweep: 30 x 30 points, l = 1.
  const double l = 1.0;
  int checked = 0;
  for (int i = 1; i <= 30; ++i) {
    for (int j = 1; j <= 30; ++j) {
      double a = 0.5 * i / 31.0;
      double M = 0.3 * j / 31.0;
      double x = a * a, z = M * M;
      if (std::abs(subextremality_polynomial(x, z)) <= 1e-12) continue;
      auto got = classify_subextremal(a, M, l);
      auto p = make(a, M, l);
      auto c = delta_coeffs(p);
      int nroots = count_real_roots(c);
      bool subext = (nroots == 4);
      CHECK((got == Subextremality::subextremal) == subext);
      ++checked;
    }
  }
  CHECK(checked > 800);
}

TEST_CASE("horizon data for a=0 matches the cubic oracle") {
  auto p = make(0.0, 1.0, 10.0);
  auto h = horizon_data(p);
  // Delta factors as -(r/l^2)(r^3 - l^2 r + 2 M l^2) when a = 0.
  auto cubic = oracle::cubic_roots(1.0, 0.0, -100.0, 200.0);
  REQUIRE(cubic.size() == 3);
  CHECK(h.r_minus == Approx(0.0).margin(1e-12));
  CHECK(h.rbar_minus == Approx(cubic[0]).epsilon(1e-12));
  CHECK(h.r_plus == Approx(cubic[1]).epsilon(1e-12));
  CHECK(h.rbar_plus == Approx(cubic[2]).epsilon(1e-12));
  CHECK(h.r_plus == Approx(2.09).epsilon(1e-2));
  CHECK(h.rbar_plus == Approx(8.79).epsilon(1e-2));
  CHECK(h.rbar_minus == Approx(-10.88).epsilon(1e-2));
}

TEST_CASE("horizon data invariants") {
  auto p = make(0.2, 1.0, 10.0);
  auto h = horizon_data(p);

  SECTION("roots ordered and annihilate Delta") {
    CHECK(h.rbar_minus < 0.0);
    CHECK(h.r_minus >= 0.0);
    CHECK(h.r_minus < h.r_plus);
    CHECK(h.r_plus < h.rbar_plus);
    for (double r : h.roots) CHECK(std::abs(delta_eval(p, r)) < 1e-10 * (1.0 + r * r));
  }

  SECTION("root sum vanishes") {
    double s = h.roots[0] + h.roots[1] + h.roots[2] + h.roots[3];
    CHECK(std::abs(s) < 1e-10 * h.rbar_plus);
  }

  SECTION("Delta reconstructed from roots") {
    auto rng = oracle::rng(11);
    std::uniform_real_distribution<double> U(h.rbar_minus, h.rbar_plus);
    for (int i = 0; i < 100; ++i) {
      double r = U(rng);
      double rec = -1.0 / (p.l * p.l);
      for (double ri : h.roots) rec *= (r - ri);
      double direct = delta_eval(p, r);
      CHECK(rec == Approx(direct).margin(1e-10).epsilon(1e-10));
    }
  }

  SECTION("Delta positive strictly between the horizons") {
    for (int i = 1; i < 1000; ++i) {
      double r = h.r_plus + (h.rbar_plus - h.r_plus) * i / 1000.0;
      CHECK(delta_eval(p, r) > 0.0);
    }
  }

  SECTION("horizon derivative signs and angular velocities") {
    CHECK(delta_deriv(p, h.r_plus, 1) > 0.0);
    CHECK(delta_deriv(p, h.rbar_plus, 1) < 0.0);
    CHECK(h.kappa_plus > 0.0);
    CHECK(h.kappa_bar_plus > 0.0);
    CHECK(h.omega_bar_plus < h.omega_plus);  // a > 0, r_plus < rbar_plus
  }
}

TEST_CASE("horizon data refuses non-subextremal parameters") {
  CHECK_THROWS_AS(horizon_data(make(0.0, 1.0, 5.0)), NotSubextremal);
}

TEST_CASE("horizon inequalities hold for random subextremal parameters") {
  auto rng = oracle::rng(23);
  std::uniform_real_distribution<double> Ua(0.0, 0.5), Um(0.01, 0.3), Ul(1.0, 30.0);
  int accepted = 0;
  while (accepted < 200) {
    double l = Ul(rng);
    double a = Ua(rng) * l, M = Um(rng) * l;
    if (classify_subextremal(a, M, l) != Subextremality::subextremal) continue;
    auto p = make(a, M, l);
    auto h = horizon_data(p);
    ++accepted;
    CHECK(a * a / (l * l) < 0.25);
    CHECK(std::abs(a / M) < 1.2);
    CHECK(h.r_plus > std::abs(a));
    CHECK(M < h.r_plus);
    CHECK(h.r_plus < h.rbar_plus);
    CHECK(h.rbar_plus < l);
    CHECK(h.rbar_plus * h.rbar_plus > l * l / 7.0);
  }
}

TEST_CASE("special radii") {
  SECTION("a=0 gives r_delta_frac = 3M exactly") {
    auto p = make(0.0, 1.0, 10.0);
    auto s = special_radii(p);
    CHECK(s.r_delta_frac == Approx(3.0).epsilon(1e-12));
  }

  SECTION("r_delta_max solves dDelta/dr = 0 against the cubic oracle") {
    auto p = make(0.0, 1.0, 10.0);
    auto h = horizon_data(p);
    auto s = special_radii(p);
    // dDelta/dr = 2r - 4 r^3/l^2 - 2M  (a = 0)
    auto roots = oracle::cubic_roots(-4.0 / 100.0, 0.0, 2.0, -2.0);
    double expect = 0.0;
    for (double r : roots)
      if (r > h.r_plus && r < h.rbar_plus) expect = r;
    REQUIRE(expect != 0.0);
    CHECK(s.r_delta_max == Approx(expect).epsilon(1e-10));
  }

  SECTION("small-a quadratic displacement law") {
    // |r_frac - 3M| <= C a^2: check the ratio stabilizes over a in {0.01..0.1}.
    std::vector<double> ratio;
    for (int i = 1; i <= 10; ++i) {
      double a = 0.01 * i;
      auto s = special_radii(make(a, 1.0, 10.0));
      ratio.push_back(std::abs(s.r_delta_frac - 3.0) / (a * a));
    }
    for (double q : ratio) CHECK(q == Approx(ratio.front()).epsilon(0.02));
  }
}

TEST_CASE("tortoise coordinate") {
  auto p = make(0.2, 1.0, 10.0);
  auto h = horizon_data(p);
  Tortoise rs(p, h);

  SECTION("normalized to zero at r_delta_frac") {
    CHECK(rs(rs.r_delta_frac()) == Approx(0.0).margin(1e-12));
  }

  SECTION("monotone increasing on a fine grid") {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < 2000; ++i) {
      double r = h.r_plus + (h.rbar_plus - h.r_plus) * i / 2000.0;
      double v = rs(r);
      CHECK(v > prev);
      prev = v;
    }
  }

  SECTION("diverges toward the horizons") {
    CHECK(rs(h.r_plus + 1e-10 * (h.rbar_plus - h.r_plus)) < -30.0);
    CHECK(rs(h.rbar_plus - 1e-10 * (h.rbar_plus - h.r_plus)) > 30.0);
  }

  SECTION("out-of-domain rejection") {
    CHECK_THROWS_AS(rs(h.r_plus), OutOfDomain);
    CHECK_THROWS_AS(rs(h.rbar_plus + 0.1), OutOfDomain);
  }

  SECTION("inverse round-trips") {
    auto rng = oracle::rng(5);
    std::uniform_real_distribution<double> U(0.001, 0.999);
    for (int i = 0; i < 1000; ++i) {
      double r = h.r_plus + (h.rbar_plus - h.r_plus) * U(rng);
      double back = rs.inverse(rs(r));
      CHECK(back == Approx(r).epsilon(1e-9).margin(1e-9));
    }
    for (int i = 0; i < 50; ++i) {
      double x = -40.0 + 80.0 * U(rng);
      CHECK(rs(rs.inverse(x)) == Approx(x).margin(1e-10));
    }
  }
}

TEST_CASE("causal predicates") {
  SECTION("a=0: no ergoregion at the equator strictly inside") {
    auto p = make(0.0, 1.0, 10.0);
    auto h = horizon_data(p);
    double r = 0.5 * (h.r_plus + h.rbar_plus);
    auto c = causal_predicates(p, h, r, M_PI / 2.0);
    CHECK_FALSE(c.in_ergoregion);
    CHECK(c.w_timelike);
  }

  SECTION("W is null on the event horizon") {
    auto p = make(0.3, 1.0, 10.0);
    auto h = horizon_data(p);
    for (double th : {0.1, 1.0, M_PI / 2, 2.5}) {
      auto c = causal_predicates(p, h, h.r_plus, th);
      CHECK_FALSE(c.w_timelike);
      CHECK(std::abs(c.g_ww) < 1e-12);
    }
  }

  SECTION("axis never lies in the ergoregion") {
    auto p = make(0.4, 1.0, 10.0);
    auto h = horizon_data(p);
    for (int i = 1; i < 50; ++i) {
      double r = h.r_plus + (h.rbar_plus - h.r_plus) * i / 50.0;
      CHECK_FALSE(causal_predicates(p, h, r, 0.0).in_ergoregion);
    }
  }

  SECTION("ergoregion appears just outside the horizon for a != 0") {
    auto p = make(0.9, 1.0, 10.0);
    auto h = horizon_data(p);
    double r = h.r_plus + 1e-4 * (h.rbar_plus - h.r_plus);
    CHECK(causal_predicates(p, h, r, M_PI / 2.0).in_ergoregion);
  }
}

TEST_CASE("unit-l rescaling preserves classification") {
  auto p = make(0.25, 0.9, 7.0);
  auto q = p.rescaled_to_unit_l();
  CHECK(q.l == 1.0);
  CHECK(classify_subextremal(p.a, p.M, p.l) == classify_subextremal(q.a, q.M, q.l));
}
