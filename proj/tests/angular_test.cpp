#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "kds/angular.hpp"
#include "oracle_helpers.hpp"

using namespace kds;

static AngularProblem make_prob(double a, double l, double xi, int m, double mu2 = 0.0,
                                int resolution = 0) {
  AngularProblem prob;
  prob.params.a = a;
  prob.params.M = 1.0;
  prob.params.l = l;
  prob.params.mu2_kg = mu2;
  prob.m = m;
  prob.xi_oblate = xi;
  prob.resolution = resolution;
  return prob;
}

TEST_CASE("a=0 reduces to the round-sphere spectrum") {
  SECTION("m=2, ell=5 gives 30") {
    auto evs = solve_eigenvalues(make_prob(0.0, 10.0, 0.0, 2), 5);
    REQUIRE(evs.size() == 4);
    CHECK(evs.back().ell == 5);
    CHECK(evs.back().lambda == Approx(30.0).margin(1e-9));
  }
  SECTION("m=0, ell=0 gives 0") {
    auto evs = solve_eigenvalues(make_prob(0.0, 10.0, 0.0, 0), 0);
    REQUIRE(evs.size() == 1);
    CHECK(evs[0].lambda == Approx(0.0).margin(1e-10));
  }
  SECTION("ell(ell+1) across a small table") {
    for (int m = -3; m <= 3; ++m) {
      auto evs = solve_eigenvalues(make_prob(0.0, 10.0, 0.0, m), std::abs(m) + 4);
      for (const auto& e : evs)
        CHECK(e.lambda == Approx(static_cast<double>(e.ell) * (e.ell + 1)).margin(1e-8));
    }
  }
}

TEST_CASE("resolution refinement oracle at generic parameters") {
  // Dense solve at 4x resolution agrees to 1e-8.
  auto prob = make_prob(0.3, 10.0, 0.2, 1, 0.0, 24);
  auto evs = solve_eigenvalues(prob, 1);
  auto prob4 = prob;
  prob4.resolution = 96;
  auto evs4 = solve_eigenvalues(prob4, 1);
  CHECK(evs[0].lambda == Approx(evs4[0].lambda).margin(1e-8));
}

TEST_CASE("eigenvalue count and strict ordering") {
  auto evs = solve_eigenvalues(make_prob(0.45, 8.0, 0.7, -2, 0.1), 9);
  REQUIRE(evs.size() == 9 - 2 + 1);
  for (std::size_t k = 0; k < evs.size(); ++k) {
    CHECK(evs[k].ell == 2 + static_cast<int>(k));
    if (k) CHECK(evs[k].lambda > evs[k - 1].lambda);
  }
}

TEST_CASE("invalid mode is rejected") {
  CHECK_THROWS_AS(solve_eigenvalues(make_prob(0.1, 10.0, 0.0, 3), 2), InvalidMode);
}

TEST_CASE("under-resolved basis request is rejected") {
  auto prob = make_prob(0.1, 10.0, 0.0, 2, 0.0, 10);  // 10 < 4*(5+2)
  CHECK_THROWS_AS(solve_eigenvalues(prob, 5), InvalidMode);
}

TEST_CASE("a -> 0 continuity toward the sphere") {
  double prev_err = 1e9;
  for (int k = 1; k <= 4; ++k) {
    double a = std::pow(10.0, -k);
    auto evs = solve_eigenvalues(make_prob(a, 10.0, 0.1 * a, 2), 4);
    double err = 0.0;
    for (const auto& e : evs)
      err = std::max(err, std::abs(e.lambda - static_cast<double>(e.ell) * (e.ell + 1)));
    CHECK(err < prev_err + 1e-12);
    prev_err = err;
  }
  CHECK(prev_err < 1e-6);
}

TEST_CASE("lambda_tilde bookkeeping") {
  auto prob = make_prob(0.3, 12.0, 0.25, 1);
  auto evs = solve_eigenvalues(prob, 3);
  for (const auto& e : evs)
    CHECK(e.lambda_tilde == Approx(e.lambda + 0.25 * 0.25).margin(1e-14));
}

TEST_CASE("eigenvalue inequality suite") {
  SECTION("m=0 gives nonnegative shifted eigenvalue") {
    auto evs = solve_eigenvalues(make_prob(0.4, 9.0, 0.6, 0), 3);
    for (const auto& e : evs) {
      auto rep = check_lambda_inequalities(e, 0.6, 1.0 + 0.4 * 0.4 / 81.0, 0.4, 9.0);
      CHECK(rep.all_pass);
      CHECK(e.lambda_tilde >= 0.0);
    }
  }

  SECTION("m xi > 0 sample passes the strict branch") {
    auto evs = solve_eigenvalues(make_prob(0.5, 10.0, 0.8, 2), 5);
    double Xi = 1.0 + 0.25 / 100.0;
    for (const auto& e : evs) {
      auto rep = check_lambda_inequalities(e, 0.8, Xi, 0.5, 10.0);
      CHECK(rep.all_pass);
      REQUIRE(rep.entries.size() == 4);
    }
  }

  SECTION("random (m, xi) sweep has zero failures") {
    auto rng = oracle::rng(31);
    std::uniform_real_distribution<double> Uxi(-1.0, 1.0);
    std::uniform_int_distribution<int> Um(-5, 5);
    double a = 0.35, l = 10.0, Xi = 1.0 + a * a / (l * l);
    for (int trial = 0; trial < 100; ++trial) {
      int m = Um(rng);
      double xi = Uxi(rng);
      auto evs = solve_eigenvalues(make_prob(a, l, xi, m), std::abs(m) + 3);
      for (const auto& e : evs) {
        auto rep = check_lambda_inequalities(e, xi, Xi, a, l);
        for (const auto& entry : rep.entries) {
          INFO(entry.name << " slack=" << entry.slack << " m=" << m << " xi=" << xi
                          << " ell=" << e.ell);
          CHECK(entry.pass);
        }
      }
    }
  }
}

TEST_CASE("discretized operator is symmetric and eigenvalues real") {
  auto prob = make_prob(0.6, 7.0, -0.9, 3, 0.2, 32);
  auto A = detail::angular_matrix(prob, 32);
  double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  double scale = A.cwiseAbs().maxCoeff();
  CHECK(asym <= 1e-12 * std::max(1.0, scale));
}

TEST_CASE("Klein-Gordon mass term shifts eigenvalues upward") {
  auto ev0 = solve_eigenvalues(make_prob(0.4, 10.0, 0.3, 1, 0.0), 2);
  auto ev1 = solve_eigenvalues(make_prob(0.4, 10.0, 0.3, 1, 0.5), 2);
  for (std::size_t k = 0; k < ev0.size(); ++k) CHECK(ev1[k].lambda > ev0[k].lambda);
}
