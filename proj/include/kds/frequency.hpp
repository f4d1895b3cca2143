#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kds/angular.hpp"
#include "kds/errors.hpp"
#include "kds/params.hpp"

namespace kds {

// A fixed mode (omega, m, ell) together with its angular eigenvalue.
struct FrequencyTriple {
  double omega = 0.0;
  int m = 0;
  int ell = 0;
  double lambda = 0.0;
  double lambda_tilde = 0.0;  // lambda + a^2 omega^2, exactly
};

inline FrequencyTriple make_frequency_triple(const BlackHoleParams& p, double omega, int m,
                                             int ell) {
  AngularProblem prob;
  prob.params = p;
  prob.m = m;
  prob.xi_oblate = p.a * omega;
  auto evs = solve_eigenvalues(prob, ell);
  FrequencyTriple f;
  f.omega = omega;
  f.m = m;
  f.ell = ell;
  f.lambda = evs.back().lambda;
  f.lambda_tilde = f.lambda + p.a * p.a * omega * omega;
  return f;
}

// The fixed constants of the frequency decomposition. The defaults follow
// the toolkit configuration; all are overridable from the CLI config.
struct RegimeParams {
  double omega_high = 10.0;
  double omega_low = 0.05;
  double lambda_low = 0.05;
  double alpha = 0.05;
  double E = 100.0;
  double C = 2000.0;  // >= lambda_low^{-1} omega_high^2

  void validate() const {
    if (!(omega_low < omega_high)) throw ParseError("regime params: need omega_low < omega_high");
    if (!(lambda_low > 0.0 && lambda_low < 1.0))
      throw ParseError("regime params: need 0 < lambda_low < 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParseError("regime params: need 0 < alpha < 1");
    if (!(C >= omega_high * omega_high / lambda_low))
      throw ParseError("regime params: need C >= omega_high^2 / lambda_low");
    if (!(E > 0.0)) throw ParseError("regime params: need E > 0");
  }
};

enum RegimeFlag : std::uint8_t {
  regime_ds = 1 << 0,              // high de Sitter
  regime_sharp_enlarged = 1 << 1,  // enlarged high superradiant
  regime_flat = 1 << 2,            // bounded
  regime_lessflat = 1 << 3,        // lambda-dominated
  regime_natural = 1 << 4,         // high omega ~ lambda
  regime_omega_dominated = 1 << 5,
};

struct RegimeLabel {
  std::uint8_t flags = 0;
  bool superradiant = false;
  bool de_sitter = false;
  bool in_f_sf_c = false;

  bool has(RegimeFlag f) const { return flags & f; }
  int flag_count() const {
    int n = 0;
    for (int b = 0; b < 6; ++b) n += (flags >> b) & 1;
    return n;
  }
};

inline std::string regime_flags_string(const RegimeLabel& label) {
  std::string s;
  auto append = [&s](const char* name) {
    if (!s.empty()) s += '|';
    s += name;
  };
  if (label.has(regime_ds)) append("F_dS");
  if (label.has(regime_sharp_enlarged)) append("F_sharp_enlarged");
  if (label.has(regime_flat)) append("F_flat");
  if (label.has(regime_lessflat)) append("F_lessflat");
  if (label.has(regime_natural)) append("F_natural");
  if (label.has(regime_omega_dominated)) append("F_omega_dominated");
  if (s.empty()) s = "none";
  return s;
}

}  // namespace kds
