#pragma once

#include <array>
#include <cmath>

#include "kds/frequency.hpp"
#include "kds/geometry.hpp"

namespace kds {

struct PotentialValues {
  double V0 = 0.0;
  double V_SL = 0.0;
  double V_mu = 0.0;
  double V = 0.0;
  double dV0_dr = 0.0;
  double dV_dr = 0.0;
  double cross_check = 0.0;  // relative disagreement of the two V0 forms
};

// The radial potential V = V_SL + V0 + V_mu of the fixed-frequency ODE
// u'' + (omega^2 - V) u = H, with closed-form r-derivatives. V_SL and V_mu
// are frequency independent; V0 carries (omega, m, lambda).
class RadialPotential {
 public:
  RadialPotential(const BlackHoleParams& p, const HorizonData& h, const FrequencyTriple& f)
      : p_(p), h_(h), f_(f) {
    K1_ = f.lambda_tilde - 2.0 * p.a * f.m * f.omega * h.Xi;
    const double a = p_.a, Xi = h_.Xi, m = f_.m, w = f_.omega;
    const double a2 = a * a;
    // (r^2+a^2)^3 dV0/dr is the cubic c3 r^3 + c2 r^2 + c1 r + c0.
    cubic_[3] = -2.0 * Xi * K1_ - 4.0 * a * m * w * Xi;
    cubic_[2] = 6.0 * p_.M * K1_;
    cubic_[1] = -2.0 * a2 * Xi * K1_ - 4.0 * a2 * a * m * w * Xi + 4.0 * a2 * m * m * Xi * Xi;
    cubic_[0] = -2.0 * p_.M * a2 * K1_;
  }

  const BlackHoleParams& params() const { return p_; }
  const HorizonData& horizons() const { return h_; }
  const FrequencyTriple& frequency() const { return f_; }
  double lambda_minus_2amwXi() const { return K1_; }

  double V0(double r) const {
    const double a = p_.a, Xi = h_.Xi;
    const double u = r * r + a * a;
    const double D = delta_eval(p_, r);
    const double w = f_.omega, m = f_.m;
    const double shift = w - a * m * Xi / u;
    return D * K1_ / (u * u) + w * w - shift * shift;
  }

  // The other algebraic display of V0 (for the cross-form consistency check).
  double V0_alt(double r) const {
    const double a = p_.a, Xi = h_.Xi;
    const double u = r * r + a * a;
    const double D = delta_eval(p_, r);
    const double w = f_.omega, m = f_.m;
    return (D * (f_.lambda + w * w * a * a) - Xi * Xi * a * a * m * m -
            2.0 * m * w * a * Xi * (D - u)) /
           (u * u);
  }

  double V_SL(double r) const {
    const double a2 = p_.a * p_.a;
    const double u = r * r + a2;
    const double D = delta_eval(p_, r);
    const double Dp = delta_deriv(p_, r, 1);
    return D * (r * Dp * u - 2.0 * r * r * D + D * a2) / (u * u * u * u);
  }

  double V_mu(double r) const {
    return p_.mu2_kg * delta_eval(p_, r) / (r * r + p_.a * p_.a);
  }

  double V(double r) const { return V0(r) + V_SL(r) + V_mu(r); }

  // (r^2+a^2)^3 dV0/dr, exact cubic.
  double cubic_dV0(double r) const {
    return ((cubic_[3] * r + cubic_[2]) * r + cubic_[1]) * r + cubic_[0];
  }
  double cubic_dV0_deriv(double r) const {
    return (3.0 * cubic_[3] * r + 2.0 * cubic_[2]) * r + cubic_[1];
  }
  const std::array<double, 4>& cubic_coeffs() const { return cubic_; }

  double dV0(double r) const {
    const double u = r * r + p_.a * p_.a;
    return cubic_dV0(r) / (u * u * u);
  }

  double d2V0(double r) const {
    const double u = r * r + p_.a * p_.a;
    return cubic_dV0_deriv(r) / (u * u * u) - 6.0 * r * cubic_dV0(r) / (u * u * u * u);
  }

  double dV_SL(double r) const {
    const double a2 = p_.a * p_.a;
    const double u = r * r + a2;
    const double D = delta_eval(p_, r);
    const double Dp = delta_deriv(p_, r, 1);
    const double Dpp = delta_deriv(p_, r, 2);
    const double N = D * r * Dp * u + D * D * (a2 - 2.0 * r * r);
    const double Np = Dp * r * Dp * u + D * (Dp + r * Dpp) * u + D * r * Dp * 2.0 * r +
                      2.0 * D * Dp * (a2 - 2.0 * r * r) - 4.0 * r * D * D;
    return (Np * u - 8.0 * r * N) / (u * u * u * u * u);
  }

  double dV_mu(double r) const {
    const double u = r * r + p_.a * p_.a;
    const double D = delta_eval(p_, r);
    const double Dp = delta_deriv(p_, r, 1);
    return p_.mu2_kg * (Dp * u - 2.0 * r * D) / (u * u);
  }

  double dV(double r) const { return dV0(r) + dV_SL(r) + dV_mu(r); }

  // d/dr* = (Delta/(r^2+a^2)) d/dr
  double dV_drstar(double r) const {
    return delta_eval(p_, r) / (r * r + p_.a * p_.a) * dV(r);
  }

  PotentialValues eval(double r) const {
    if (!(r >= h_.r_plus && r <= h_.rbar_plus))
      throw OutOfDomain("potential_eval: r outside [r_plus, rbar_plus]");
    PotentialValues out;
    out.V0 = V0(r);
    out.V_SL = V_SL(r);
    out.V_mu = V_mu(r);
    out.V = out.V0 + out.V_SL + out.V_mu;
    out.dV0_dr = dV0(r);
    out.dV_dr = dV(r);
    const double alt = V0_alt(r);
    out.cross_check = std::abs(out.V0 - alt) / std::max({1.0, std::abs(out.V0), std::abs(alt)});
    return out;
  }

  // Maximum of V over [r_plus, rbar_plus]: dense scan plus local refinement.
  struct MaxInfo {
    double r_max = 0.0;
    double value = 0.0;
    bool interior = false;
  };
  MaxInfo max_V(int samples = 4000) const {
    MaxInfo best;
    best.r_max = h_.r_plus;
    best.value = V(h_.r_plus);
    for (int i = 1; i <= samples; ++i) {
      double r = h_.r_plus + (h_.rbar_plus - h_.r_plus) * i / static_cast<double>(samples);
      double v = V(r);
      if (v > best.value) {
        best.value = v;
        best.r_max = r;
      }
    }
    const double dr = (h_.rbar_plus - h_.r_plus) / samples;
    double lo = std::max(h_.r_plus, best.r_max - dr);
    double hi = std::min(h_.rbar_plus, best.r_max + dr);
    if (dV(lo) > 0.0 && dV(hi) < 0.0) {
      best.r_max = refine_root([this](double r) { return std::pair{dV(r), d2V0(r)}; }, lo, hi);
      best.value = V(best.r_max);
      best.interior = true;
    }
    return best;
  }

 private:
  BlackHoleParams p_;
  HorizonData h_;
  FrequencyTriple f_;
  double K1_ = 0.0;
  std::array<double, 4> cubic_{};
};

inline PotentialValues potential_eval(const BlackHoleParams& p, const HorizonData& h,
                                      const FrequencyTriple& f, double r) {
  return RadialPotential(p, h, f).eval(r);
}

}  // namespace kds
