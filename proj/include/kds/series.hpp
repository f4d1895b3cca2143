#pragma once

#include <cmath>
#include <vector>

#include "kds/errors.hpp"

namespace kds {

// Truncated real power series sum_k c[k] x^k with fixed order arithmetic,
// enough for assembling Frobenius coefficient functions.
class PowerSeries {
 public:
  PowerSeries() = default;
  PowerSeries(std::size_t order, double c0 = 0.0) : c_(order + 1, 0.0) { c_[0] = c0; }
  explicit PowerSeries(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  std::size_t order() const { return c_.empty() ? 0 : c_.size() - 1; }
  double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
  double& at(std::size_t k) { return c_[k]; }

  PowerSeries operator+(const PowerSeries& o) const {
    PowerSeries r(std::max(order(), o.order()));
    for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = (*this)[k] + o[k];
    return r;
  }
  PowerSeries operator-(const PowerSeries& o) const {
    PowerSeries r(std::max(order(), o.order()));
    for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = (*this)[k] - o[k];
    return r;
  }
  PowerSeries operator*(double s) const {
    PowerSeries r = *this;
    for (auto& v : r.c_) v *= s;
    return r;
  }
  PowerSeries mul(const PowerSeries& o, std::size_t order_out) const {
    PowerSeries r(order_out);
    for (std::size_t i = 0; i <= order_out && i < c_.size(); ++i) {
      if (c_[i] == 0.0) continue;
      for (std::size_t j = 0; i + j <= order_out && j < o.c_.size(); ++j)
        r.c_[i + j] += c_[i] * o.c_[j];
    }
    return r;
  }
  // Division by a series with nonzero constant term.
  PowerSeries div(const PowerSeries& o, std::size_t order_out) const {
    if (o[0] == 0.0) throw SeriesDiverged("series division by zero constant term");
    PowerSeries r(order_out);
    for (std::size_t k = 0; k <= order_out; ++k) {
      double s = (*this)[k];
      for (std::size_t j = 1; j <= k; ++j) s -= o[j] * r.c_[k - j];
      r.c_[k] = s / o[0];
    }
    return r;
  }
  // Shift down: series / x^n (requires the low coefficients to vanish;
  // they are zero analytically, so any residue is roundoff).
  PowerSeries shift_down(std::size_t n) const {
    PowerSeries r(order() >= n ? order() - n : 0);
    for (std::size_t k = 0; k + n < c_.size(); ++k) r.c_[k] = c_[k + n];
    return r;
  }

 private:
  std::vector<double> c_;
};

}  // namespace kds
