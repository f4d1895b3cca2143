#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "kds/errors.hpp"

namespace kds {

// Embedded Dormand-Prince 5(4) with PI step control. The state is a fixed
// array; the RHS is rhs(x, y, dydx). Observers fire exactly at the requested
// checkpoints (steps are clipped to land on them).
template <std::size_t N>
struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  double max_step = 1.0;
  std::size_t max_steps = 50'000'000;
};

template <std::size_t N, class RHS>
class DormandPrince54 {
 public:
  using State = std::array<double, N>;

  explicit DormandPrince54(RHS rhs) : rhs_(std::move(rhs)) {}

  // Integrate y from x0 to x1 (either direction). checkpoints must be sorted
  // along the direction of travel and lie within [x0, x1]; on_checkpoint is
  // called with the state exactly there.
  template <class Observer>
  void integrate(State& y, double x0, double x1, const OdeOptions<N>& opt,
                 const std::vector<double>& checkpoints, Observer&& on_checkpoint) {
    const double dir = x1 >= x0 ? 1.0 : -1.0;
    double x = x0;
    double h_free = dir * std::min(opt.initial_step, opt.max_step);
    std::size_t next_cp = 0;
    while (next_cp < checkpoints.size() && dir * (checkpoints[next_cp] - x0) < 0.0) ++next_cp;
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == x0) {
      on_checkpoint(x0, y);
      ++next_cp;
    }

    State k1;
    rhs_(x, y, k1);
    double prev_err = 1.0;

    for (std::size_t step = 0; step < opt.max_steps; ++step) {
      if (dir * (x1 - x) <= 0.0) break;
      double target = x1;
      if (next_cp < checkpoints.size() && dir * (checkpoints[next_cp] - x1) <= 0.0)
        target = checkpoints[next_cp];

      double h = h_free;
      bool clipped = false;
      if (dir * (x + h - target) >= 0.0) {
        h = target - x;
        clipped = true;
      }
      if (std::abs(h) < 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) {
        // Degenerate clip: we are already at the target.
        x = target;
        if (next_cp < checkpoints.size() && target == checkpoints[next_cp]) {
          on_checkpoint(x, y);
          ++next_cp;
          rhs_(x, y, k1);
        }
        continue;
      }

      State ynew, k_last, yerr;
      double err = attempt(y, k1, x, h, ynew, k_last, yerr, opt);
      if (err <= 1.0) {
        y = ynew;
        k1 = k_last;  // FSAL
        if (clipped) {
          x = target;
          if (next_cp < checkpoints.size() && target == checkpoints[next_cp]) {
            on_checkpoint(x, y);
            ++next_cp;
            rhs_(x, y, k1);  // observer may rescale the state
          }
        } else {
          x += h;
        }
        double fac = 0.9 * std::pow(err > 1e-12 ? err : 1e-12, -0.2) *
                     std::pow(prev_err > 1e-12 ? prev_err : 1e-12, 0.08);
        prev_err = err;
        double mag = std::abs(clipped ? h_free : h) * std::clamp(fac, 0.2, 6.0);
        h_free = dir * std::min(mag, opt.max_step);
      } else {
        double mag = std::abs(h) * std::max(0.2, 0.9 * std::pow(err, -0.2));
        h_free = dir * mag;
        if (mag < 1e-15 * (1.0 + std::abs(x)))
          throw StepSizeUnderflow("ode: repeated rejection drove step to zero");
      }
    }
    if (dir * (x1 - x) > 1e-9 * (1.0 + std::abs(x1)))
      throw StepSizeUnderflow("ode: exceeded max step count");
  }

  void integrate(State& y, double x0, double x1, const OdeOptions<N>& opt) {
    integrate(y, x0, x1, opt, {}, [](double, const State&) {});
  }

 private:
  // One trial step; returns the scaled error norm and fills ynew/k7.
  double attempt(const State& y, const State& k1, double x, double h, State& ynew, State& k7,
                 State& yerr, const OdeOptions<N>& opt) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    State k2, k3, k4, k5, k6, ytmp;
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs_(x + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs_(x + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs_(x + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs_(x + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs_(x + h, ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs_(x + h, ynew, k7);

    double err2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sk = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      double q = yerr[i] / sk;
      err2 += q * q;
    }
    return std::sqrt(err2 / N);
  }

  RHS rhs_;
};

template <std::size_t N, class RHS>
DormandPrince54<N, RHS> make_dopri(RHS rhs) {
  return DormandPrince54<N, RHS>(std::move(rhs));
}

}  // namespace kds
