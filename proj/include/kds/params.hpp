#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "kds/errors.hpp"

namespace kds {

// Kerr-de Sitter black hole triad (a, M, l) with l^2 = 3/Lambda, plus the
// Klein-Gordon mass squared. Lengths are whatever unit the caller uses;
// nothing is normalized internally.
struct BlackHoleParams {
  double a = 0.0;       // specific angular momentum
  double M = 1.0;       // mass, > 0
  double l = 10.0;      // cosmological length scale, > 0
  double mu2_kg = 0.0;  // Klein-Gordon mass squared, >= 0

  double xi() const { return 1.0 + a * a / (l * l); }

  // Convenience: same physics with lengths rescaled so l = 1.
  BlackHoleParams rescaled_to_unit_l() const {
    BlackHoleParams q;
    q.a = a / l;
    q.M = M / l;
    q.l = 1.0;
    q.mu2_kg = mu2_kg * l * l;
    return q;
  }

  void validate() const {
    if (!(M > 0.0)) throw ParseError("M must be positive");
    if (!(l > 0.0)) throw ParseError("l must be positive");
    if (!(mu2_kg >= 0.0)) throw ParseError("mu2_kg must be nonnegative");
    if (!std::isfinite(a) || !std::isfinite(M) || !std::isfinite(l))
      throw ParseError("parameters must be finite");
  }
};

inline BlackHoleParams params_from_json(const nlohmann::json& j) {
  BlackHoleParams p;
  try {
    p.a = j.at("a").get<double>();
    p.M = j.at("M").get<double>();
    p.l = j.at("l").get<double>();
    p.mu2_kg = j.value("mu2_kg", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad parameter config: ") + e.what());
  }
  p.validate();
  return p;
}

inline BlackHoleParams params_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON config");
  return params_from_json(j);
}

}  // namespace kds
