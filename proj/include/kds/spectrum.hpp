#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kds/frequency.hpp"
#include "kds/radial.hpp"
#include "kds/workpool.hpp"

namespace kds {

struct WronskianResult {
  FrequencyTriple frequency;
  Complex W;                  // scale-corrected value (may overflow to inf for huge barriers)
  double log_abs_W = 0.0;     // reliable log |W|
  double rstar_variation = 0.0;
  bool resonant = false;
};

namespace detail {

inline std::vector<double> wronskian_eval_points(double lo, double hi, int count) {
  std::vector<double> pts(count);
  double a = std::max(lo, -10.0), b = std::min(hi, 10.0);
  if (!(b > a)) {  // narrow overlap window: spread over what is available
    a = lo;
    b = hi;
  }
  for (int i = 0; i < count; ++i)
    pts[i] = a + (b - a) * (i + 0.5) / count;
  return pts;
}

}  // namespace detail

// W = u'_{cosmological} u_{event} - u_{cosmological} u'_{event}, evaluated at
// interior r* points; the spread across points is recorded (it must vanish
// for exact solutions of the same ODE).
inline WronskianResult wronskian(const BlackHoleParams& p, const HorizonData& h,
                                 const Tortoise& rs, const FrequencyTriple& f,
                                 double resonant_band = 1e-8, int eval_points = 10,
                                 double tol = 1e-11) {
  WronskianResult out;
  out.frequency = f;
  if (std::abs(f.omega - h.omega_plus * f.m) <= resonant_band ||
      std::abs(f.omega - h.omega_bar_plus * f.m) <= resonant_band) {
    out.resonant = true;
    throw ResonantFrequency("wronskian: frequency inside the resonant exclusion band");
  }

  RadialPotential pot(p, h, f);
  auto seed_ev = frobenius_solution(pot, rs, HorizonSide::event_horizon);
  auto seed_co = frobenius_solution(pot, rs, HorizonSide::cosmological_horizon);

  auto pts = detail::wronskian_eval_points(seed_ev.rstar_match + 0.5, seed_co.rstar_match - 0.5,
                                           eval_points);

  auto sol_ev = integrate_radial(pot, rs, seed_ev, IntegrationDirection::to_plus_infinity,
                                 {seed_ev.rstar_match, pts.back()}, pts, nullptr, tol);
  auto sol_co = integrate_radial(pot, rs, seed_co, IntegrationDirection::to_minus_infinity,
                                 {pts.front(), seed_co.rstar_match}, pts, nullptr, tol);
  if (sol_ev.size() != pts.size() || sol_co.size() != pts.size())
    throw GridMismatch("wronskian: evaluation grids disagree");

  std::vector<Complex> samples(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    samples[i] = sol_co.up[i] * sol_ev.u[i] - sol_co.u[i] * sol_ev.up[i];

  Complex mean = 0.0;
  for (auto w : samples) mean += w;
  mean /= static_cast<double>(samples.size());
  double spread = 0.0;
  for (auto w : samples) spread = std::max(spread, std::abs(w - mean));
  out.rstar_variation = spread / std::max(std::abs(mean), 1e-300);

  const double log_scale =
      512.0 * std::log(2.0) * (sol_ev.rescale_exponent + sol_co.rescale_exponent);
  out.log_abs_W = std::log(std::max(std::abs(mean), 1e-300)) + log_scale;
  const double factor = std::exp(std::min(log_scale, 700.0));
  out.W = mean * factor;
  return out;
}

// Residual of the outgoing-flux identity
//   (w - wbar_+ m) |u|^2(+inf) + (w - w_+ m) |u|^2(-inf) = int Im(conj(u) H),
// normalized by the largest participating term. Boundary moduli are taken
// from tail averages over the outer 2% of the grid.
inline double flux_identity_check(const HorizonData& h, const FrequencyTriple& f,
                                  const RadialSolution& sol) {
  if (!sol.has_H) throw GridMismatch("flux_identity_check: solution carries no inhomogeneity");
  const std::size_t n = sol.size();
  if (n < 50) throw GridMismatch("flux_identity_check: grid too small");

  auto tail_avg = [&](bool left) {
    std::size_t k = std::max<std::size_t>(4, n / 50);
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t idx = left ? i : n - 1 - i;
      s += std::norm(sol.u[idx]);
    }
    return s / k;
  };
  const double u2_minus = tail_avg(true);
  const double u2_plus = tail_avg(false);

  // Simpson rule on the uniform grid.
  const double hstep = sol.grid[1] - sol.grid[0];
  double integral = 0.0;
  auto f_at = [&](std::size_t i) { return std::imag(std::conj(sol.u[i]) * sol.H[i]); };
  std::size_t m = (n - 1) % 2 == 0 ? n : n - 1;  // even number of intervals
  for (std::size_t i = 0; i + 2 < m; i += 2)
    integral += hstep / 3.0 * (f_at(i) + 4.0 * f_at(i + 1) + f_at(i + 2));
  if (m != n) integral += 0.5 * hstep * (f_at(n - 2) + f_at(n - 1));

  const double term_plus = (f.omega - h.omega_bar_plus * f.m) * u2_plus;
  const double term_minus = (f.omega - h.omega_plus * f.m) * u2_minus;
  const double scale =
      std::max({std::abs(term_plus), std::abs(term_minus), std::abs(integral), 1e-30});
  return std::abs(term_plus + term_minus - integral) / scale;
}

namespace detail {

// One-sided homogeneous solution together with the running quadrature
// I(x) = int u H along the direction of travel, all carried as ODE state so
// the samples are smooth to integrator accuracy.
struct SideSolution {
  std::vector<Complex> u, up, I;
  std::vector<double> radius;
};

inline SideSolution integrate_with_quadrature(const RadialPotential& pot,
                                              const FrobeniusSeed& seed, bool forward,
                                              const std::vector<double>& grid,
                                              const Inhomogeneity& H, double tol) {
  const BlackHoleParams& p = pot.params();
  const double w = pot.frequency().omega;
  auto rhs = [&pot, &p, &H, w](double x, const std::array<double, 7>& s,
                               std::array<double, 7>& dy) {
    const double r = s[4];
    const double coef = pot.V(r) - w * w;
    const Complex u(s[0], s[1]);
    dy[0] = s[2];
    dy[1] = s[3];
    dy[2] = coef * u.real();
    dy[3] = coef * u.imag();
    dy[4] = delta_eval(p, r) / (r * r + p.a * p.a);
    const Complex q = u * H(x);
    dy[5] = q.real();
    dy[6] = q.imag();
  };
  auto integ = make_dopri<7>(rhs);
  OdeOptions<7> opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol * 1e-2;
  opt.max_step = 0.25;
  opt.initial_step = 1e-4;

  std::array<double, 7> y{seed.u.real(),         seed.u.imag(), seed.du_drstar.real(),
                          seed.du_drstar.imag(), seed.r_match,  0.0,
                          0.0};
  std::vector<double> cps = grid;
  if (!forward) std::reverse(cps.begin(), cps.end());
  SideSolution out;
  integ.integrate(y, seed.rstar_match, forward ? grid.back() : grid.front(), opt, cps,
                  [&](double, std::array<double, 7>& yc) {
                    out.u.push_back(Complex(yc[0], yc[1]));
                    out.up.push_back(Complex(yc[2], yc[3]));
                    out.radius.push_back(yc[4]);
                    out.I.push_back(Complex(yc[5], yc[6]));
                  });
  if (!forward) {
    std::reverse(out.u.begin(), out.u.end());
    std::reverse(out.up.begin(), out.up.end());
    std::reverse(out.radius.begin(), out.radius.end());
    std::reverse(out.I.begin(), out.I.end());
  }
  return out;
}

}  // namespace detail

// Particular solution of u'' + (w^2 - V) u = H with outgoing behaviour at
// both ends, built from the two one-sided homogeneous solutions by variation
// of parameters. H should decay (or vanish) toward the ends of the grid.
inline RadialSolution representation_solution(const BlackHoleParams& p, const HorizonData& h,
                                              const Tortoise& rs, const FrequencyTriple& f,
                                              const Inhomogeneity& H, double rstar_halfwidth,
                                              std::size_t grid_size, double tol = 1e-12) {
  RadialPotential pot(p, h, f);
  // Seeds pinned very close to the horizons so the boundary moduli converge.
  const double gap = h.rbar_plus - h.r_plus;
  auto seed_ev = frobenius_solution(pot, rs, HorizonSide::event_horizon, 20, 1e-8 * gap);
  auto seed_co = frobenius_solution(pot, rs, HorizonSide::cosmological_horizon, 20, 1e-8 * gap);
  const double lo = std::max(seed_ev.rstar_match, -rstar_halfwidth);
  const double hi = std::min(seed_co.rstar_match, rstar_halfwidth);
  auto grid = uniform_grid(lo, hi, grid_size);
  // the quadratures accumulate from the seeds: I_ev = int_{seed}^x u_ev H,
  // I_co = int_x^{seed} u_co H
  auto ev = detail::integrate_with_quadrature(pot, seed_ev, true, grid, H, tol);
  auto co = detail::integrate_with_quadrature(pot, seed_co, false, grid, H, tol);
  if (ev.u.size() != grid.size() || co.u.size() != grid.size())
    throw GridMismatch("representation_solution: unreachable grid points");

  const std::size_t n = grid.size();
  const std::size_t mid = n / 2;
  const Complex W = co.up[mid] * ev.u[mid] - co.u[mid] * ev.up[mid];

  RadialSolution out;
  out.grid = grid;
  out.radius = ev.radius;
  out.boundary = HorizonSide::event_horizon;
  out.has_H = true;
  out.u.resize(n);
  out.up.resize(n);
  out.H.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex IL = ev.I[i];         // int_{-inf}^{x} u_ev H
    const Complex IR = -co.I[i];        // int_{x}^{+inf} u_co H (sign from direction)
    out.u[i] = (co.u[i] * IL + ev.u[i] * IR) / W;
    out.up[i] = (co.up[i] * IL + ev.up[i] * IR) / W;
    out.H[i] = H(grid[i]);
  }
  return out;
}

// Frequency-regime classification per the covering family of regimes, plus
// superradiance, de Sitter and compact-set membership flags.
inline RegimeLabel classify_frequency(const BlackHoleParams& p, const HorizonData& h,
                                      const RegimeParams& rp, const FrequencyTriple& f) {
  RegimeLabel out;
  const double a = p.a, Xi = h.Xi;
  const double w = f.omega, lt = f.lambda_tilde;
  const double m = f.m;
  const double amw = a * m * w;
  const double sr_lo = a * a * m * m * Xi / (h.rbar_plus * h.rbar_plus + a * a);
  const double sr_hi = a * a * m * m * Xi / (h.r_plus * h.r_plus + a * a);

  out.superradiant = (w - h.omega_plus * m) * (w - h.omega_bar_plus * m) < 0.0;
  out.de_sitter = std::abs(w) <= std::abs(a * m) * Xi / (h.rbar_plus * h.rbar_plus + a * a);

  const double window_hi = sr_hi + std::abs(a) * rp.alpha * lt;
  // The enlarged-superradiant exclusion window [0, window_hi) never applies
  // to axisymmetric modes (a m w = 0 identically for m = 0).
  const bool excluded = (f.m != 0) && amw >= 0.0 && amw < window_hi;

  const double omega2 = w * w + a * a * m * m;

  if (lt >= rp.omega_high && out.de_sitter && amw >= 0.0) out.flags |= regime_ds;

  const double sharp_threshold =
      rp.omega_high / (std::abs(a) * Xi / (h.r_plus * h.r_plus + a * a) + rp.alpha);
  if (lt >= sharp_threshold && amw > sr_lo && amw < window_hi) out.flags |= regime_sharp_enlarged;

  if (std::abs(w) <= rp.omega_high && std::abs(lt) < rp.omega_high * rp.omega_high / rp.lambda_low)
    out.flags |= regime_flat;

  if (lt >= rp.omega_high * rp.omega_high / rp.lambda_low && lt > omega2 / rp.lambda_low &&
      !excluded)
    out.flags |= regime_lessflat;

  if (std::abs(w) >= rp.omega_high && rp.lambda_low * lt <= omega2 &&
      omega2 <= lt / rp.lambda_low && !excluded)
    out.flags |= regime_natural;

  if (std::abs(w) >= rp.omega_high && std::abs(lt) < rp.lambda_low * omega2 && !excluded)
    out.flags |= regime_omega_dominated;

  out.in_f_sf_c = std::abs(w) >= 1.0 / rp.C && std::abs(w) <= rp.C && lt <= rp.C &&
                  out.superradiant && std::abs(w - h.omega_plus * m) > 1.0 / rp.C &&
                  std::abs(w - h.omega_bar_plus * m) > 1.0 / rp.C;
  return out;
}

// One row of a mode-stability scan table.
struct ScanRow {
  double omega = 0.0;
  int m = 0;
  int ell = 0;
  double lambda = 0.0;
  Complex W;
  double log_abs_W = 0.0;
  double rstar_variation = 0.0;
  RegimeLabel label;
  bool skipped_resonant = false;
  bool failed = false;
  std::string error;
};

struct ScanCandidate {
  double omega = 0.0;
  int m = 0;
  int ell = 0;
  double abs_W = 0.0;
  bool refined = false;
};

struct ScanResult {
  std::vector<ScanRow> rows;  // ordered by (m, ell, omega)
  std::vector<ScanCandidate> candidates;
  std::size_t failures = 0;
  std::size_t skipped = 0;
};

// Candidate detector on one fixed-(m, ell) row of |W| samples: a strict local
// minimum below threshold*median at which both Re W and Im W change sign in a
// +-2 neighbourhood.
inline std::vector<std::size_t> detect_candidates(const std::vector<ScanRow>& row,
                                                  double threshold = 1e-4) {
  std::vector<std::size_t> hits;
  std::vector<double> mags;
  for (const auto& r : row)
    if (!r.failed && !r.skipped_resonant) mags.push_back(std::exp(r.log_abs_W));
  if (mags.size() < 5) return hits;
  std::vector<double> sorted = mags;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];

  auto sign_change_near = [&row](std::size_t i, auto proj) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(row.size() - 1, i + 2);
    double mn = 1e300, mx = -1e300;
    for (std::size_t k = lo; k <= hi; ++k) {
      if (row[k].failed || row[k].skipped_resonant) continue;
      double v = proj(row[k].W);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    return mn < 0.0 && mx > 0.0;
  };

  for (std::size_t i = 1; i + 1 < row.size(); ++i) {
    const auto& r = row[i];
    if (r.failed || r.skipped_resonant) continue;
    if (row[i - 1].failed || row[i - 1].skipped_resonant) continue;
    if (row[i + 1].failed || row[i + 1].skipped_resonant) continue;
    double w = std::exp(r.log_abs_W);
    if (!(w < std::exp(row[i - 1].log_abs_W) && w < std::exp(row[i + 1].log_abs_W))) continue;
    if (!(w < threshold * median)) continue;
    if (!sign_change_near(i, [](Complex z) { return z.real(); })) continue;
    if (!sign_change_near(i, [](Complex z) { return z.imag(); })) continue;
    hits.push_back(i);
  }
  return hits;
}

struct ScanConfig {
  double omega_min = 0.05;
  double omega_max = 2.0;
  double omega_step = 0.01;
  std::vector<int> m_set{0, 1, -1, 2, -2};
  int ell_max = 4;
  int workers = 1;
  double candidate_threshold = 1e-4;
  double resonant_band = 1e-8;
  double failure_budget = 1e-3;  // fraction of triples allowed to fail hard
  double tol = 1e-11;
  int refine_factor = 4;
  int refine_depth = 3;
  int inject_failures = 0;  // test hook: fail every k-th triple when k > 0
};

namespace detail {

struct TripleKey {
  int m;
  int ell;
  double omega;
};

inline double scan_lambda(const BlackHoleParams& p, std::map<std::pair<int, double>,
                          std::vector<AngularEigenvalue>>& cache, std::mutex& cache_mutex,
                          int m, int ell_max, double omega, int ell) {
  const double xi = p.a * omega;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find({m, xi});
    if (it != cache.end()) return it->second[ell - std::abs(m)].lambda;
  }
  AngularProblem prob;
  prob.params = p;
  prob.m = m;
  prob.xi_oblate = xi;
  auto evs = solve_eigenvalues(prob, ell_max);
  double lambda = evs[ell - std::abs(m)].lambda;
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(std::pair<int, double>{m, xi}, std::move(evs));
  return lambda;
}

}  // namespace detail

// Rectangular (omega, m, ell) scan of the Wronskian. Rows are produced in a
// deterministic (m, ell, omega) order independent of the worker count.
inline ScanResult mode_scan(const BlackHoleParams& p, const HorizonData& h, const Tortoise& rs,
                            const RegimeParams& rp, const ScanConfig& cfg,
                            const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  std::vector<detail::TripleKey> keys;
  const int n_omega =
      cfg.omega_step > 0.0
          ? static_cast<int>(std::floor((cfg.omega_max - cfg.omega_min) / cfg.omega_step + 1e-9)) + 1
          : 0;
  std::vector<int> ms = cfg.m_set;
  std::sort(ms.begin(), ms.end());
  for (int m : ms)
    for (int ell = std::abs(m); ell <= cfg.ell_max; ++ell)
      for (int i = 0; i < n_omega; ++i)
        keys.push_back({m, ell, cfg.omega_min + i * cfg.omega_step});

  ScanResult result;
  result.rows.resize(keys.size());

  std::map<std::pair<int, double>, std::vector<AngularEigenvalue>> cache;
  std::mutex cache_mutex;
  std::atomic<std::size_t> done{0};

  auto job = [&](std::size_t i) {
    const auto& key = keys[i];
    ScanRow& row = result.rows[i];
    row.omega = key.omega;
    row.m = key.m;
    row.ell = key.ell;
    try {
      if (cfg.inject_failures > 0 && i % static_cast<std::size_t>(cfg.inject_failures) == 0)
        throw Error("injected failure");
      if (std::abs(key.omega - h.omega_plus * key.m) <= cfg.resonant_band ||
          std::abs(key.omega - h.omega_bar_plus * key.m) <= cfg.resonant_band) {
        row.skipped_resonant = true;
      } else {
        FrequencyTriple f;
        f.omega = key.omega;
        f.m = key.m;
        f.ell = key.ell;
        f.lambda = detail::scan_lambda(p, cache, cache_mutex, key.m, cfg.ell_max, key.omega,
                                       key.ell);
        f.lambda_tilde = f.lambda + p.a * p.a * key.omega * key.omega;
        row.lambda = f.lambda;
        auto wr = wronskian(p, h, rs, f, cfg.resonant_band, 10, cfg.tol);
        row.W = wr.W;
        row.log_abs_W = wr.log_abs_W;
        row.rstar_variation = wr.rstar_variation;
        row.label = classify_frequency(p, h, rp, f);
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    std::size_t d = done.fetch_add(1) + 1;
    if (progress && d % 500 == 0) progress(d, keys.size());
  };
  parallel_for(keys.size(), cfg.workers, job);

  for (const auto& row : result.rows) {
    result.failures += row.failed ? 1 : 0;
    result.skipped += row.skipped_resonant ? 1 : 0;
  }

  // Candidate pass per (m, ell) row, with local grid refinement.
  std::size_t begin = 0;
  while (begin < result.rows.size()) {
    std::size_t end = begin;
    while (end < result.rows.size() && result.rows[end].m == result.rows[begin].m &&
           result.rows[end].ell == result.rows[begin].ell)
      ++end;
    std::vector<ScanRow> rowvec(result.rows.begin() + begin, result.rows.begin() + end);
    for (std::size_t idx : detect_candidates(rowvec, cfg.candidate_threshold)) {
      const ScanRow& c = rowvec[idx];
      ScanCandidate cand;
      cand.m = c.m;
      cand.ell = c.ell;
      cand.omega = c.omega;
      cand.abs_W = std::exp(c.log_abs_W);
      // factor-refine around the dip
      double lo = rowvec[idx - 1].omega, hi = rowvec[idx + 1].omega;
      double best_w = cand.abs_W, best_omega = cand.omega;
      for (int depth = 0; depth < cfg.refine_depth; ++depth) {
        int nn = cfg.refine_factor * 2;
        for (int k = 0; k <= nn; ++k) {
          double om = lo + (hi - lo) * k / nn;
          if (std::abs(om - h.omega_plus * c.m) <= cfg.resonant_band ||
              std::abs(om - h.omega_bar_plus * c.m) <= cfg.resonant_band)
            continue;
          try {
            FrequencyTriple f;
            f.omega = om;
            f.m = c.m;
            f.ell = c.ell;
            f.lambda = detail::scan_lambda(p, cache, cache_mutex, c.m, cfg.ell_max, om, c.ell);
            f.lambda_tilde = f.lambda + p.a * p.a * om * om;
            auto wr = wronskian(p, h, rs, f, cfg.resonant_band, 10, cfg.tol);
            double w = std::exp(wr.log_abs_W);
            if (w < best_w) {
              best_w = w;
              best_omega = om;
            }
          } catch (const std::exception&) {
          }
        }
        double width = (hi - lo) / cfg.refine_factor;
        lo = best_omega - 0.5 * width;
        hi = best_omega + 0.5 * width;
      }
      cand.omega = best_omega;
      cand.abs_W = best_w;
      cand.refined = true;
      result.candidates.push_back(cand);
    }
    begin = end;
  }
  return result;
}

inline void write_scan_csv(const std::string& path, const ScanResult& scan) {
  CsvWriter csv(path);
  csv.header({"omega", "m", "ell", "lambda", "re_W", "im_W", "abs_W", "regime_flags",
              "superradiant", "de_sitter"});
  for (const auto& r : scan.rows) {
    if (r.skipped_resonant || r.failed) continue;
    csv.row_strings({float17(r.omega), std::to_string(r.m), std::to_string(r.ell),
                     float17(r.lambda), float17(r.W.real()), float17(r.W.imag()),
                     float17(std::exp(r.log_abs_W)), regime_flags_string(r.label),
                     r.label.superradiant ? "1" : "0", r.label.de_sitter ? "1" : "0"});
  }
}

inline nlohmann::json candidates_json(const ScanResult& scan) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : scan.candidates)
    arr.push_back({{"omega", c.omega},
                   {"m", c.m},
                   {"ell", c.ell},
                   {"abs_W", c.abs_W},
                   {"refined", c.refined}});
  return arr;
}

// Quantitative scan over the compact superradiant set: |omega| in [1/C, C],
// lambda_tilde <= C, superradiant, outside the resonant 1/C-bands.
struct QuantitativeScanResult {
  double min_abs_W = 0.0;
  double min_log_abs_W = 0.0;
  FrequencyTriple argmin;
  std::size_t points = 0;
};

inline QuantitativeScanResult quantitative_ms_scan(const BlackHoleParams& p,
                                                   const HorizonData& h, const Tortoise& rs,
                                                   const RegimeParams& rp, int n_omega = 8,
                                                   int workers = 1) {
  if (!is_subextremal(p)) throw NotSubextremal("quantitative_ms_scan");
  if (p.a == 0.0) throw EmptySet("quantitative_ms_scan: superradiant set is empty for a = 0");

  struct Point {
    FrequencyTriple f;
  };
  std::vector<Point> points;
  const int m_cap = static_cast<int>(std::floor(std::sqrt(rp.C) / h.Xi)) + 1;

  std::map<std::pair<int, double>, std::vector<AngularEigenvalue>> cache;
  std::mutex cache_mutex;

  for (int m = -m_cap; m <= m_cap; ++m) {
    if (m == 0) continue;
    // superradiant omega-window is the open interval between the resonant lines
    double w_lo = h.omega_bar_plus * m, w_hi = h.omega_plus * m;
    if (w_lo > w_hi) std::swap(w_lo, w_hi);
    w_lo += 1.0 / rp.C;
    w_hi -= 1.0 / rp.C;
    if (!(w_hi > w_lo)) continue;
    for (int i = 0; i < n_omega; ++i) {
      double omega = w_lo + (w_hi - w_lo) * (i + 0.5) / n_omega;
      if (std::abs(omega) < 1.0 / rp.C || std::abs(omega) > rp.C) continue;
      int ell_cap = static_cast<int>(std::ceil(std::sqrt(rp.C))) + std::abs(m) + 1;
      std::vector<AngularEigenvalue> evs;
      AngularProblem prob;
      prob.params = p;
      prob.m = m;
      prob.xi_oblate = p.a * omega;
      evs = solve_eigenvalues(prob, ell_cap);
      for (const auto& ev : evs) {
        double lt = ev.lambda + p.a * p.a * omega * omega;
        if (lt > rp.C) break;
        FrequencyTriple f;
        f.omega = omega;
        f.m = m;
        f.ell = ev.ell;
        f.lambda = ev.lambda;
        f.lambda_tilde = lt;
        auto label = classify_frequency(p, h, rp, f);
        if (label.in_f_sf_c) points.push_back({f});
      }
    }
  }
  if (points.empty()) throw EmptySet("quantitative_ms_scan: no grid point in F_{SF,C}");

  std::vector<std::optional<double>> logs(points.size());
  parallel_for(points.size(), workers, [&](std::size_t i) {
    try {
      auto wr = wronskian(p, h, rs, points[i].f, 1e-10, 10, 1e-10);
      logs[i] = wr.log_abs_W;
    } catch (const std::exception&) {
      logs[i] = std::nullopt;
    }
  });

  QuantitativeScanResult out;
  bool found = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!logs[i]) continue;
    if (!found || *logs[i] < out.min_log_abs_W) {
      out.min_log_abs_W = *logs[i];
      out.argmin = points[i].f;
      found = true;
    }
  }
  if (!found) throw EmptySet("quantitative_ms_scan: every grid point failed");
  out.min_abs_W = std::exp(out.min_log_abs_W);
  out.points = points.size();
  return out;
}

}  // namespace kds
