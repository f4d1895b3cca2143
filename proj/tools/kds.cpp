// kds: command-line front end for the Kerr-de Sitter fixed-frequency toolkit.
//
// Subcommands: params-check, angular-eig, radial-solve, wronskian-scan,
// regime-classify, certify, geodesic-trap. Each takes a JSON config plus
// --key value overrides; KDS_WORKERS overrides the worker count.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kds/kds.hpp"

using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_parse = 2;
constexpr int exit_not_subextremal = 3;
constexpr int exit_failure_budget = 4;

struct CommonOptions {
  std::string config_path;
  std::optional<double> a, M, l, mu2_kg;
  std::optional<double> omega_high, omega_low, lambda_low, alpha, E_const, C_const;

  json load() const {
    json j = json::object();
    if (!config_path.empty()) {
      j = json::parse(kds::read_file(config_path), nullptr, false);
      if (j.is_discarded()) throw kds::ParseError("malformed JSON config: " + config_path);
    }
    auto set = [&j](const char* key, const std::optional<double>& v) {
      if (v) j[key] = *v;
    };
    set("a", a);
    set("M", M);
    set("l", l);
    set("mu2_kg", mu2_kg);
    if (omega_high || omega_low || lambda_low || alpha || E_const || C_const) {
      if (!j.contains("regime")) j["regime"] = json::object();
      auto setr = [&j](const char* key, const std::optional<double>& v) {
        if (v) j["regime"][key] = *v;
      };
      setr("omega_high", omega_high);
      setr("omega_low", omega_low);
      setr("lambda_low", lambda_low);
      setr("alpha", alpha);
      setr("E", E_const);
      setr("C", C_const);
    }
    return j;
  }
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file");
  cmd->add_option("--a", opt.a, "specific angular momentum");
  cmd->add_option("--M", opt.M, "black hole mass");
  cmd->add_option("--l", opt.l, "cosmological length scale");
  cmd->add_option("--mu2_kg", opt.mu2_kg, "Klein-Gordon mass squared");
  cmd->add_option("--omega_high", opt.omega_high, "regime constant omega_high");
  cmd->add_option("--omega_low", opt.omega_low, "regime constant omega_low");
  cmd->add_option("--lambda_low", opt.lambda_low, "regime constant lambda_low");
  cmd->add_option("--alpha", opt.alpha, "regime constant alpha");
  cmd->add_option("--E", opt.E_const, "regime constant E");
  cmd->add_option("--C", opt.C_const, "regime constant C");
}

kds::BlackHoleParams params_from(const json& j) {
  kds::BlackHoleParams p;
  try {
    p.a = j.value("a", 0.0);
    p.M = j.value("M", 1.0);
    p.l = j.value("l", 10.0);
    p.mu2_kg = j.value("mu2_kg", 0.0);
  } catch (const json::exception& e) {
    throw kds::ParseError(std::string("bad parameter config: ") + e.what());
  }
  p.validate();
  return p;
}

kds::RegimeParams regime_from(const json& j) {
  kds::RegimeParams rp;
  if (j.contains("regime")) {
    const auto& r = j["regime"];
    rp.omega_high = r.value("omega_high", rp.omega_high);
    rp.omega_low = r.value("omega_low", rp.omega_low);
    rp.lambda_low = r.value("lambda_low", rp.lambda_low);
    rp.alpha = r.value("alpha", rp.alpha);
    rp.E = r.value("E", rp.E);
    double default_C = rp.omega_high * rp.omega_high / rp.lambda_low;
    rp.C = r.value("C", default_C);
  }
  rp.validate();
  return rp;
}

int workers_from(const json& j, int flag_value) {
  int w = flag_value > 0 ? flag_value : j.value("scan", json::object()).value("workers", 1);
  if (const char* env = std::getenv("KDS_WORKERS")) {
    try {
      w = std::max(1, std::stoi(env));
    } catch (...) {
      throw kds::ParseError("KDS_WORKERS is not an integer");
    }
  }
  return std::max(1, w);
}

void ensure_parent_dir(const std::string& path) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::exists(parent))
    throw kds::ParseError("output directory does not exist: " + parent.string());
}

// ---------------------------------------------------------------------------

int cmd_params_check(const CommonOptions& opt) {
  json j = opt.load();
  auto p = params_from(j);
  auto verdict = kds::classify_subextremal(p.a, p.M, p.l);
  std::cout << "subextremality: " << kds::to_string(verdict) << "\n";
  if (verdict != kds::Subextremality::subextremal) {
    std::cout << "P(a^2/l^2, M^2/l^2) = "
              << kds::float17(kds::subextremality_polynomial(p.a * p.a / (p.l * p.l),
                                                             p.M * p.M / (p.l * p.l)))
              << "\n";
    return exit_not_subextremal;
  }
  auto h = kds::horizon_data(p);
  auto sr = kds::special_radii(p, h);
  std::cout << "roots: rbar_minus=" << kds::float17(h.rbar_minus)
            << " r_minus=" << kds::float17(h.r_minus) << " r_plus=" << kds::float17(h.r_plus)
            << " rbar_plus=" << kds::float17(h.rbar_plus) << "\n";
  std::cout << "kappa_plus=" << kds::float17(h.kappa_plus)
            << " kappa_bar_plus=" << kds::float17(h.kappa_bar_plus) << "\n";
  std::cout << "omega_plus=" << kds::float17(h.omega_plus)
            << " omega_bar_plus=" << kds::float17(h.omega_bar_plus)
            << " Xi=" << kds::float17(h.Xi) << "\n";
  std::cout << "r_delta_frac=" << kds::float17(sr.r_delta_frac)
            << " r_delta_max=" << kds::float17(sr.r_delta_max) << "\n";
  double crit = kds::max_delta_over_a2(p, h);
  bool connected = p.a != 0.0 && crit <= 1.0;
  std::cout << "max_delta_over_a2=" << (p.a == 0.0 ? "inf" : kds::float17(crit))
            << " ergoregion_connected=" << (connected ? "true" : "false") << "\n";
  return exit_ok;
}

int cmd_angular_eig(const CommonOptions& opt, int m, int ell_max, double omega, double xi,
                    bool xi_given, const std::string& output) {
  json j = opt.load();
  auto p = params_from(j);
  kds::AngularProblem prob;
  prob.params = p;
  prob.m = m;
  prob.xi_oblate = xi_given ? xi : p.a * omega;
  auto evs = kds::solve_eigenvalues(prob, ell_max);
  if (output.empty()) {
    std::cout << "m,ell,xi,lambda,lambda_tilde\n";
    for (const auto& e : evs)
      std::cout << e.m << "," << e.ell << "," << kds::float17(prob.xi_oblate) << ","
                << kds::float17(e.lambda) << "," << kds::float17(e.lambda_tilde) << "\n";
  } else {
    ensure_parent_dir(output);
    kds::write_eigenvalue_csv(output, evs, prob.xi_oblate);
    std::cerr << "wrote " << evs.size() << " eigenvalues to " << output << "\n";
  }
  return exit_ok;
}

int cmd_radial_solve(const CommonOptions& opt, double omega, int m, int ell,
                     const std::string& side, double rstar_min, double rstar_max, int points,
                     const std::string& output) {
  json j = opt.load();
  auto p = params_from(j);
  auto h = kds::horizon_data(p);
  kds::Tortoise rs(p, h);
  auto f = kds::make_frequency_triple(p, omega, m, ell);
  kds::RadialPotential pot(p, h, f);
  const bool from_event = side != "cosmological";
  const auto horizon_side =
      from_event ? kds::HorizonSide::event_horizon : kds::HorizonSide::cosmological_horizon;
  // Seed outside the requested window when the series reaches that far, so
  // every grid point is sampled.
  auto seed = kds::frobenius_solution(pot, rs, horizon_side);
  const double want = from_event ? rstar_min - 1.0 : rstar_max + 1.0;
  if ((from_event && seed.rstar_match > rstar_min) ||
      (!from_event && seed.rstar_match < rstar_max)) {
    double radius = from_event ? rs.inverse(want) - h.r_plus : h.rbar_plus - rs.inverse(want);
    if (radius > 0.0) {
      try {
        seed = kds::frobenius_solution(pot, rs, horizon_side, 16, radius);
      } catch (const kds::Error&) {
        std::cerr << "note: series seed cannot reach rstar=" << kds::float17(want)
                  << "; grid points behind " << kds::float17(seed.rstar_match)
                  << " are skipped\n";
      }
    }
  }
  auto grid = kds::uniform_grid(rstar_min, rstar_max, points);
  auto sol = kds::integrate_radial(pot, rs, seed,
                                   from_event ? kds::IntegrationDirection::to_plus_infinity
                                              : kds::IntegrationDirection::to_minus_infinity,
                                   {rstar_min, rstar_max}, grid);
  if (!output.empty()) {
    ensure_parent_dir(output);
    kds::write_radial_csv(output, sol);
    std::cerr << "wrote " << sol.size() << " samples to " << output << "\n";
  } else {
    kds::write_radial_csv("/dev/stdout", sol);
  }
  std::cerr << "lambda=" << kds::float17(f.lambda) << " seed at rstar="
            << kds::float17(seed.rstar_match) << "\n";
  return exit_ok;
}

int cmd_wronskian_scan(const CommonOptions& opt, kds::ScanConfig cfg, int workers_flag,
                       const std::string& output, const std::string& candidates_path,
                       bool quantitative, int n_omega_quant) {
  json j = opt.load();
  auto p = params_from(j);
  auto rp = regime_from(j);
  auto h = kds::horizon_data(p);
  kds::Tortoise rs(p, h);

  if (j.contains("scan")) {
    const auto& s = j["scan"];
    cfg.omega_min = s.value("omega_min", cfg.omega_min);
    cfg.omega_max = s.value("omega_max", cfg.omega_max);
    cfg.omega_step = s.value("omega_step", cfg.omega_step);
    if (s.contains("m_set")) cfg.m_set = s["m_set"].get<std::vector<int>>();
    cfg.ell_max = s.value("ell_max", cfg.ell_max);
    cfg.candidate_threshold = s.value("candidate_threshold", cfg.candidate_threshold);
    cfg.failure_budget = s.value("failure_budget", cfg.failure_budget);
  }
  cfg.workers = workers_from(j, workers_flag);

  if (quantitative) {
    try {
      auto res = kds::quantitative_ms_scan(p, h, rs, rp, n_omega_quant, cfg.workers);
      std::cout << "min_abs_W=" << kds::float17(res.min_abs_W)
                << " log_abs_W=" << kds::float17(res.min_log_abs_W)
                << " at omega=" << kds::float17(res.argmin.omega) << " m=" << res.argmin.m
                << " ell=" << res.argmin.ell << " grid_points=" << res.points << "\n";
      return exit_ok;
    } catch (const kds::EmptySet& e) {
      std::cout << "empty_set: " << e.what() << "\n";
      return exit_ok;
    }
  }

  auto progress = [](std::size_t done, std::size_t total) {
    std::cerr << "scan " << done << "/" << total << "\r";
  };
  auto scan = kds::mode_scan(p, h, rs, rp, cfg, progress);
  std::cerr << "\n";

  const std::size_t attempted = scan.rows.size() - scan.skipped;
  if (!output.empty()) {
    ensure_parent_dir(output);
    kds::write_scan_csv(output, scan);
  }
  if (!candidates_path.empty()) {
    ensure_parent_dir(candidates_path);
    kds::write_file(candidates_path, kds::candidates_json(scan).dump(2) + "\n");
  }
  std::cerr << "rows=" << scan.rows.size() << " skipped_resonant=" << scan.skipped
            << " failures=" << scan.failures << " candidates=" << scan.candidates.size() << "\n";
  if (attempted > 0 &&
      static_cast<double>(scan.failures) > cfg.failure_budget * static_cast<double>(attempted)) {
    std::cerr << "failure budget exceeded\n";
    return exit_failure_budget;
  }
  return exit_ok;
}

int cmd_regime_classify(const CommonOptions& opt, double omega, int m, int ell, long samples,
                        unsigned seed) {
  json j = opt.load();
  auto p = params_from(j);
  auto rp = regime_from(j);
  auto h = kds::horizon_data(p);

  if (samples > 0) {
    // Randomized coverage audit; the eigenvalue is replaced by the
    // admissible surrogate Xi^2 ell(ell+1) + a^2 omega^2.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<int> Um(-30, 30);
    long uncovered = 0, bad_pairs = 0;
    std::map<std::string, long> counts;
    for (long i = 0; i < samples; ++i) {
      kds::FrequencyTriple f;
      double mag = std::pow(10.0, -3.0 + 5.0 * U(rng));
      f.omega = (U(rng) < 0.5 ? -1.0 : 1.0) * mag;
      f.m = Um(rng);
      f.ell = std::abs(f.m) + static_cast<int>(170.0 * U(rng) * U(rng));
      f.lambda_tilde = h.Xi * h.Xi * static_cast<double>(f.ell) * (f.ell + 1.0) +
                       p.a * p.a * f.omega * f.omega;
      f.lambda = f.lambda_tilde - p.a * p.a * f.omega * f.omega;
      auto label = kds::classify_frequency(p, h, rp, f);
      if (label.flags == 0) ++uncovered;
      if (label.flag_count() >= 2) {
        bool ok = (label.has(kds::regime_flat) && label.has(kds::regime_sharp_enlarged)) ||
                  (label.has(kds::regime_flat) && label.has(kds::regime_ds));
        if (!ok) ++bad_pairs;
      }
      counts[kds::regime_flags_string(label)]++;
    }
    std::cout << "samples=" << samples << " uncovered=" << uncovered
              << " unexpected_pairs=" << bad_pairs << "\n";
    for (const auto& [k, v] : counts) std::cout << k << " " << v << "\n";
    return exit_ok;
  }

  auto f = kds::make_frequency_triple(p, omega, m, ell);
  auto label = kds::classify_frequency(p, h, rp, f);
  json out{{"omega", f.omega},
           {"m", f.m},
           {"ell", f.ell},
           {"lambda", f.lambda},
           {"lambda_tilde", f.lambda_tilde},
           {"flags", kds::regime_flags_string(label)},
           {"superradiant", label.superradiant},
           {"de_sitter", label.de_sitter},
           {"in_F_SF_C", label.in_f_sf_c}};
  std::cout << out.dump(2) << "\n";
  return exit_ok;
}

// Candidate frequency triples aimed at one regime; classification decides
// membership afterwards.
std::vector<kds::FrequencyTriple> regime_candidates(const kds::BlackHoleParams& p,
                                                    const kds::HorizonData& h,
                                                    const kds::RegimeParams& rp,
                                                    kds::RegimeFlag flag) {
  std::vector<kds::FrequencyTriple> out;
  auto push = [&](double omega, int m, int ell) {
    if (ell < std::abs(m)) ell = std::abs(m);
    try {
      out.push_back(kds::make_frequency_triple(p, omega, m, ell));
    } catch (const std::exception&) {
    }
  };
  switch (flag) {
    case kds::regime_ds: {
      if (p.a == 0.0) return {};
      int ell_base = static_cast<int>(std::ceil(std::sqrt(rp.omega_high))) + 2;
      for (int m = 1; m <= 6; ++m) {
        double edge = std::abs(p.a) * m * h.Xi / (h.rbar_plus * h.rbar_plus + p.a * p.a);
        for (double frac : {0.3, 0.7}) push(frac * edge, m, ell_base + m + 4);
      }
      break;
    }
    case kds::regime_sharp_enlarged: {
      if (p.a == 0.0) return {};
      int ell_base = static_cast<int>(std::ceil(
                         std::sqrt(rp.omega_high * (h.r_plus / std::max(1e-9, std::abs(p.a)))))) +
                     2;
      for (int m = 1; m <= 6; ++m) {
        double w_lo = h.omega_bar_plus * m, w_hi = h.omega_plus * m;
        for (double frac : {0.35, 0.65}) push(w_lo + frac * (w_hi - w_lo), m, ell_base + m);
      }
      break;
    }
    case kds::regime_flat:
      for (double w : {0.4 * rp.omega_low, 2.0 * rp.omega_low, 0.3 * rp.omega_high,
                       0.8 * rp.omega_high})
        for (int m : {0, 1, -2}) push(w, m, std::abs(m) + 1);
      break;
    case kds::regime_lessflat: {
      int ell = static_cast<int>(
                    std::ceil(std::sqrt(rp.omega_high * rp.omega_high / rp.lambda_low))) +
                2;
      for (double w : {0.2, 0.6 * rp.omega_high})
        for (int m : {0, 1, 2, -1, -2, 3}) push(p.a * m >= 0.0 ? -w : w, m, ell);
      break;
    }
    case kds::regime_natural:
      for (double w : {1.1 * rp.omega_high, 1.6 * rp.omega_high, 2.5 * rp.omega_high})
        for (int m : {0, 1, -1, 2}) {
          int ell = std::max(std::abs(m), static_cast<int>(std::ceil(w)));
          push(p.a * m > 0.0 ? -w : w, m, ell);
        }
      break;
    default:
      for (double w : {1.5 * rp.omega_high, 2.5 * rp.omega_high, 4.0 * rp.omega_high})
        for (int m : {0, 1, -1}) push(p.a * m > 0.0 ? -w : w, m, std::abs(m));
      break;
  }
  return out;
}

int cmd_certify(const CommonOptions& opt, const std::string& output, int per_regime) {
  json j = opt.load();
  auto p = params_from(j);
  auto rp = regime_from(j);
  auto h = kds::horizon_data(p);
  auto rs = std::make_shared<kds::Tortoise>(p, h);
  kds::MultiplierConfig cfg;

  const std::vector<std::pair<kds::RegimeFlag, std::string>> regimes = {
      {kds::regime_ds, "F_dS"},
      {kds::regime_sharp_enlarged, "F_sharp_enlarged"},
      {kds::regime_flat, "F_flat"},
      {kds::regime_lessflat, "F_lessflat"},
      {kds::regime_natural, "F_natural"},
      {kds::regime_omega_dominated, "F_omega_dominated"}};

  json rows = json::array();
  json records = json::array();
  for (const auto& [flag, name] : regimes) {
    auto cands = regime_candidates(p, h, rp, flag);
    int used = 0;
    double min_slack = 1e300, min_b = 1e300;
    for (const auto& f : cands) {
      if (used >= per_regime) break;
      auto label = kds::classify_frequency(p, h, rp, f);
      if (!label.has(flag)) continue;
      try {
        auto mult = kds::build_multipliers(p, h, rs, rp, f, label, cfg);
        auto rep = kds::certify_coercivity(p, h, rs, rp, f, mult);
        json rec = kds::coercivity_report_json(rep);
        rec["omega"] = f.omega;
        rec["m"] = f.m;
        rec["ell"] = f.ell;
        rec["lambda_tilde"] = f.lambda_tilde;
        records.push_back(rec);
        min_slack = std::min(min_slack, rep.min_slack);
        min_b = std::min(min_b, rep.certified_b);
        ++used;
      } catch (const std::exception& e) {
        records.push_back({{"regime", name}, {"error", e.what()}});
      }
    }
    json row{{"regime", name}, {"empty", used == 0}, {"samples", used}};
    if (used > 0) {
      row["min_slack"] = min_slack;
      row["min_certified_b"] = min_b;
    }
    rows.push_back(row);
  }
  json report{{"regimes", rows}, {"records", records}};
  if (!output.empty()) {
    ensure_parent_dir(output);
    kds::write_file(output, report.dump(2) + "\n");
    std::cerr << "wrote certification report to " << output << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return exit_ok;
}

int cmd_geodesic_trap(const CommonOptions& opt, const std::string& trajectory, double span,
                      int samples) {
  json j = opt.load();
  auto p = params_from(j);
  auto h = kds::horizon_data(p);
  auto orbit = kds::trapped_orthogonal_exists(p, h);
  std::cout << "exists=" << (orbit.exists ? "true" : "false")
            << " criterion_max_delta_over_a2="
            << (p.a == 0.0 ? "inf" : kds::float17(orbit.criterion));
  if (orbit.exists)
    std::cout << " r_orbit=" << kds::float17(orbit.r_orbit)
              << " theta0=" << kds::float17(*orbit.theta0);
  std::cout << "\n";
  if (orbit.exists && !trajectory.empty()) {
    ensure_parent_dir(trajectory);
    auto res = kds::integrate_trapped(p, h, span, samples);
    kds::write_trajectory_csv(trajectory, res);
    std::cout << "max_r_deviation=" << kds::float17(res.max_r_deviation)
              << " max_conserved_drift=" << kds::float17(res.max_conserved_drift)
              << " max_null_residual=" << kds::float17(res.max_null_residual) << "\n";
    std::cerr << "wrote trajectory to " << trajectory << "\n";
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kds-spectra: fixed-frequency Klein-Gordon analysis on Kerr-de Sitter"};
  app.require_subcommand(1);

  CommonOptions opt_params, opt_angular, opt_radial, opt_scan, opt_regime, opt_certify,
      opt_geodesic;

  auto* c_params = app.add_subcommand("params-check", "validate parameters and print horizon data");
  add_common(c_params, opt_params);

  auto* c_angular = app.add_subcommand("angular-eig", "angular eigenvalues for fixed m");
  add_common(c_angular, opt_angular);
  int ang_m = 0, ang_ell_max = 4;
  double ang_omega = 0.0, ang_xi = 0.0;
  std::string ang_output;
  c_angular->add_option("--m", ang_m, "azimuthal number");
  c_angular->add_option("--ell-max", ang_ell_max, "largest ell");
  c_angular->add_option("--omega", ang_omega, "frequency (xi = a omega)");
  auto* xi_opt = c_angular->add_option("--xi", ang_xi, "oblateness parameter directly");
  c_angular->add_option("--output", ang_output, "CSV output path");

  auto* c_radial = app.add_subcommand("radial-solve", "integrate an outgoing radial solution");
  add_common(c_radial, opt_radial);
  double rad_omega = 0.5, rad_min = -30.0, rad_max = 30.0;
  int rad_m = 0, rad_ell = 1, rad_points = 2001;
  std::string rad_side = "event", rad_output;
  c_radial->add_option("--omega", rad_omega, "frequency");
  c_radial->add_option("--m", rad_m, "azimuthal number");
  c_radial->add_option("--ell", rad_ell, "angular number");
  c_radial->add_option("--side", rad_side, "seed horizon: event | cosmological");
  c_radial->add_option("--rstar-min", rad_min, "grid start");
  c_radial->add_option("--rstar-max", rad_max, "grid end");
  c_radial->add_option("--points", rad_points, "grid size");
  c_radial->add_option("--output", rad_output, "CSV output path");

  auto* c_scan = app.add_subcommand("wronskian-scan", "mode-stability Wronskian scan");
  add_common(c_scan, opt_scan);
  kds::ScanConfig scan_cfg;
  int scan_workers = 0, quant_n = 8;
  bool quantitative = false;
  std::string scan_output = "scan.csv", scan_candidates = "candidates.json";
  c_scan->add_option("--omega-min", scan_cfg.omega_min, "scan start");
  c_scan->add_option("--omega-max", scan_cfg.omega_max, "scan end");
  c_scan->add_option("--omega-step", scan_cfg.omega_step, "scan step");
  c_scan->add_option("--m-set", scan_cfg.m_set, "azimuthal numbers");
  c_scan->add_option("--ell-max", scan_cfg.ell_max, "largest ell");
  c_scan->add_option("--workers", scan_workers, "worker threads");
  c_scan->add_option("--threshold", scan_cfg.candidate_threshold, "candidate threshold");
  c_scan->add_option("--failure-budget", scan_cfg.failure_budget, "allowed hard-failure fraction");
  c_scan->add_option("--output", scan_output, "CSV output path");
  c_scan->add_option("--candidates", scan_candidates, "candidates JSON path");
  c_scan->add_flag("--quantitative", quantitative, "min |W| over the compact superradiant set");
  c_scan->add_option("--quantitative-omega-points", quant_n, "omega grid per window");
  c_scan->add_option("--inject-failures", scan_cfg.inject_failures,
                     "testing aid: fail every k-th triple");

  auto* c_regime = app.add_subcommand("regime-classify", "frequency regime classification");
  add_common(c_regime, opt_regime);
  double reg_omega = 0.5;
  int reg_m = 0, reg_ell = 1;
  long reg_samples = 0;
  unsigned reg_seed = 12345;
  c_regime->add_option("--omega", reg_omega, "frequency");
  c_regime->add_option("--m", reg_m, "azimuthal number");
  c_regime->add_option("--ell", reg_ell, "angular number");
  c_regime->add_option("--sample", reg_samples, "randomized coverage audit size");
  c_regime->add_option("--seed", reg_seed, "audit RNG seed");

  auto* c_certify = app.add_subcommand("certify", "per-regime multiplier coercivity report");
  add_common(c_certify, opt_certify);
  std::string cert_output;
  int cert_per_regime = 10;
  c_certify->add_option("--output", cert_output, "JSON report path");
  c_certify->add_option("--per-regime", cert_per_regime, "samples per regime");

  auto* c_geodesic = app.add_subcommand("geodesic-trap", "dt-orthogonal trapped null geodesics");
  add_common(c_geodesic, opt_geodesic);
  std::string traj_output;
  double traj_span = 100.0;
  int traj_samples = 1001;
  c_geodesic->add_option("--trajectory", traj_output, "trajectory CSV path");
  c_geodesic->add_option("--span", traj_span, "affine span");
  c_geodesic->add_option("--samples", traj_samples, "trajectory samples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_params->parsed()) return cmd_params_check(opt_params);
    if (c_angular->parsed())
      return cmd_angular_eig(opt_angular, ang_m, ang_ell_max, ang_omega, ang_xi,
                             xi_opt->count() > 0, ang_output);
    if (c_radial->parsed())
      return cmd_radial_solve(opt_radial, rad_omega, rad_m, rad_ell, rad_side, rad_min, rad_max,
                              rad_points, rad_output);
    if (c_scan->parsed())
      return cmd_wronskian_scan(opt_scan, scan_cfg, scan_workers, scan_output, scan_candidates,
                                quantitative, quant_n);
    if (c_regime->parsed())
      return cmd_regime_classify(opt_regime, reg_omega, reg_m, reg_ell, reg_samples, reg_seed);
    if (c_certify->parsed()) return cmd_certify(opt_certify, cert_output, cert_per_regime);
    if (c_geodesic->parsed())
      return cmd_geodesic_trap(opt_geodesic, traj_output, traj_span, traj_samples);
  } catch (const kds::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_parse;
  } catch (const kds::NotSubextremal& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_not_subextremal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_error;
  }
  return exit_ok;
}
