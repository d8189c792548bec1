#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include "semilin/constants.hpp"
#include "semilin/modelspace.hpp"
#include "semilin/nonlinearity.hpp"
#include "semilin/pdelab.hpp"
#include "semilin/relations.hpp"

namespace semilin {

// The acceptance battery: one entry per numbered criterion, shared by the
// command line `suite` and the test binary.

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct BatteryOptions {
  std::uint64_t seed = 20240917;
};

// ---------------------------------------------------------------------------
// Reusable checks.
// ---------------------------------------------------------------------------

struct EigenCheck {
  double max_deviation = 0.0;
  int points = 0;
};

/// Dense symmetric eigenvalues of the curvature tensor against the radial and
/// tangential closed forms at `count` random points of the ball of radius `r_max`.
inline EigenCheck eigen_cross_check(const WeightedSpace& space, double r_max, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.0, r_max);
  EigenCheck out;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd x(space.n);
    for (int i = 0; i < space.n; ++i) x[i] = gauss(rng);
    x *= radius(rng) / x.norm();
    const double r = x.norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ricci_tensor(space, x));
    std::vector<double> numeric(solver.eigenvalues().data(), solver.eigenvalues().data() + space.n);
    std::vector<double> closed(static_cast<std::size_t>(space.n - 1), tangential_eigenvalue(space, r));
    closed.push_back(radial_eigenvalue(space, r));
    std::sort(closed.begin(), closed.end());
    for (int i = 0; i < space.n; ++i) {
      out.max_deviation = std::max(out.max_deviation, std::abs(numeric[static_cast<std::size_t>(i)] -
                                                               closed[static_cast<std::size_t>(i)]));
    }
    ++out.points;
  }
  return out;
}

/// μ solve, residual, eigenvalue cross-check and sharpness for one family member.
inline nlohmann::json appendix_bundle(double N, double alpha, double K, std::uint64_t seed, bool& all_ok) {
  const auto a = appendix_space(N, alpha, K);
  const auto space = a.space();
  const double residual = appendix_relative_residual(a, 100.0, 4001);
  const auto eig = eigen_cross_check(space, 5.0 * a.scale, 100, seed);
  const auto curv = curvature_bound(space, 10.0 * std::max(a.scale, 1.0));
  const double predicted_min = appendix_minimum_coefficient(a.n, N, alpha) / (a.scale * a.scale);
  const auto sharp = sharpness_quantity(a);
  const double sharp_closed = sharpness_closed_form(a) / K;
  const bool ok = residual <= 1e-10 && eig.max_deviation <= 1e-10 && std::abs(curv.minimum - predicted_min) <= 1e-8 &&
                  std::abs(curv.effective_K - K) <= 1e-10 * std::max(1.0, K) &&
                  std::abs(sharp.ratio - sharp_closed) <= 1e-8 * std::max(1.0, sharp_closed);
  all_ok = ok;
  return {{"space", to_json(a)},
          {"relative_residual", residual},
          {"eigen_max_deviation", eig.max_deviation},
          {"eigen_points", eig.points},
          {"curvature", to_json(curv)},
          {"predicted_minimum", predicted_min},
          {"sharpness", {{"supremum", sharp.supremum}, {"ratio", sharp.ratio}, {"attained_at", sharp.attained_at},
                         {"closed_form_ratio", sharp_closed}}},
          {"pass", ok}};
}

/// The defect of an elliptic inequality at three grid levels: negative parts
/// D_k = max(0, −min defect) must follow c·h_k² with c fitted on the coarsest level.
struct DefectSeries {
  std::vector<double> h, negative, scale;
  bool second_order = false;
};

inline DefectSeries defect_series(const std::function<DefectReport(int)>& at_level, const std::vector<int>& levels) {
  DefectSeries s;
  for (int m : levels) {
    const auto r = at_level(m);
    s.h.push_back(r.h);
    s.negative.push_back(positive_part(-r.min_defect));
    s.scale.push_back(r.scale);
  }
  const double fitted = s.negative.front() / (s.h.front() * s.h.front());
  s.second_order = true;
  for (std::size_t k = 1; k < s.h.size(); ++k) {
    const double allowed = 1.5 * fitted * s.h[k] * s.h[k] + 1e-12 * s.scale[k];
    s.second_order = s.second_order && s.negative[k] <= allowed;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Criteria.
// ---------------------------------------------------------------------------

namespace battery {

inline CriterionResult appendix_exactness() {
  CriterionResult r{1, "appendix exactness", false, "", 0.0};
  const auto a = appendix_space(5.0, 2.0, 1.0);
  const double residual = appendix_relative_residual(a, 100.0, 4001);
  const auto sharp = sharpness_quantity(a);
  r.pass = a.n == 4 && a.weight_strength == -1.0 && std::abs(a.scale - std::sqrt(2.0)) <= 1e-12 &&
           residual <= 1e-10 && std::abs(sharp.ratio - 8.0) <= 1e-8;
  r.detail = fmt::format("n={} strength={} mu={:.15g} residual={:.3g} ratio={:.15g}", a.n, a.weight_strength, a.scale,
                         residual, sharp.ratio);
  return r;
}

inline CriterionResult eigenvalue_cross_check(std::uint64_t seed) {
  CriterionResult r{2, "eigenvalue cross-check", false, "", 0.0};
  const auto first = appendix_space(5.0, 2.0, 1.0);    // tangential minimum at the origin
  const auto second = appendix_space(4.5, 2.0, 1.0);   // interior radial minimum
  double worst_eig = 0.0, worst_min = 0.0;
  std::string branches;
  for (const auto& a : {first, second}) {
    const auto space = a.space();
    worst_eig = std::max(worst_eig, eigen_cross_check(space, 5.0 * a.scale, 100, seed).max_deviation);
    const auto curv = curvature_bound(space, 10.0 * std::max(a.scale, 1.0));
    const double predicted = appendix_minimum_coefficient(a.n, a.N, a.alpha) / (a.scale * a.scale);
    worst_min = std::max(worst_min, std::abs(curv.minimum - predicted));
    branches += fmt::format("{}@{:.4g} ", curv.direction, curv.attained_at);
  }
  const bool distinct_branches = first.N - first.n >= -2.0 * first.weight_strength / 3.0 &&
                                 second.N - second.n < -2.0 * second.weight_strength / 3.0;
  r.pass = worst_eig <= 1e-10 && worst_min <= 1e-8 && distinct_branches;
  r.detail = fmt::format("eig dev={:.3g} min dev={:.3g} minima: {}", worst_eig, worst_min, branches);
  return r;
}

inline CriterionResult cross_term_identity() {
  CriterionResult r{3, "cross-term identity", false, "", 0.0};
  double worst = 0.0;
  int cases = 0;
  for (int N = 2; N <= 10; ++N) {
    const double beta = 2.0 / (N - 1.0);
    const double p = gradient_threshold(N);
    for (double upper : linear_grid(-1.0, p - 1e-3, 20)) {
      const double h = cross_term_bound(beta, 0.0, 0.0, N, upper, upper * (upper - 1.0));
      worst = std::max(worst, std::abs(h - 2.0 * (p - upper)));
      ++cases;
    }
  }
  r.pass = worst <= 1e-12;
  r.detail = fmt::format("{} cases, max deviation {:.3g}", cases, worst);
  return r;
}

inline CriterionResult large_exponent_recipe() {
  CriterionResult r{4, "large-exponent recipe", false, "", 0.0};
  const auto sample = signed_monotone_recipe(3.0, 2.5);
  bool ok = !sample.small_exponent && std::abs(sample.level - 6.0) <= 1e-12 &&
            std::abs(sample.transform_power - 0.25) <= 1e-12 && std::abs(sample.gain - 4.0) <= 1e-12;
  double worst = 0.0;
  int cases = 0, sign_errors = 0;
  for (double N : {2.0, 3.0, 4.0, 5.0, 8.0}) {
    const double p = gradient_threshold(N);
    const double start = 1.0 + 4.0 / N;
    for (double alpha : linear_grid(start + 1e-3, p + (p - start), 40)) {
      if (std::abs(alpha - p) < 1e-9) continue;
      const auto rec = signed_monotone_recipe(N, alpha);
      worst = std::max(worst, std::abs(4.0 * rec.level / (N * rec.level - 2.0) - (alpha - 1.0)));
      if ((rec.gain > 0.0) != (alpha < p)) ++sign_errors;
      ++cases;
    }
  }
  ok = ok && worst <= 1e-12 && sign_errors == 0;
  r.pass = ok;
  r.detail = fmt::format("N=3,a=2.5: l={} beta={} gain={}; {} cases, max dev {:.3g}, sign errors {}", sample.level,
                         sample.transform_power, sample.gain, cases, worst, sign_errors);
  return r;
}

struct CertificateCase {
  double N;
  std::string f;
  Theorem theorem;
  std::optional<double> alpha;
};

inline std::vector<CertificateCase> certificate_cases() {
  return {
      {3.0, "power:2", Theorem::positive_subcritical, {}},
      {1.0, "power:3", Theorem::positive_subcritical, {}},
      {2.0, "power:3", Theorem::positive_subcritical, {}},
      {4.0, "powersum:1,1.5;1,2", Theorem::positive_subcritical, {}},
      {6.0, "powersum:1,0.5;2,1.5", Theorem::positive_subcritical, {}},
      {3.0, "power:2.5", Theorem::signed_monotone, {}},
      {3.0, "power:1.5", Theorem::signed_monotone, {}},
      {3.0, "lichnerowicz:1,1,1.5,0,0", Theorem::signed_monotone, 1.5},
      {5.0, "power:2", Theorem::shifted, {}},
      {3.0, "power:3.5", Theorem::shifted, {}},
      {3.5, "power:3", Theorem::shifted, {}},
      {2.0, "power:6", Theorem::shifted, {}},
      {6.0, "powersum:1,1.5;1,1.9", Theorem::shifted, {}},
      {4.0, "power:2", Theorem::lane_emden, {}},
      {5.0, "power:2", Theorem::lane_emden, {}},
      {3.0, "power:4", Theorem::lane_emden, {}},
      {4.0, "lichnerowicz:1,1,1.3,0,0.5", Theorem::lichnerowicz, {}},
      {4.0, "lichnerowicz:1,1,1.8,0,0.5", Theorem::lichnerowicz, {}},
      {4.0, "lichnerowicz:1,1,3,0.5,0.5", Theorem::lichnerowicz, {}},
  };
}

inline CriterionResult certificate_floors() {
  CriterionResult r{5, "certificate floors", true, "", 0.0};
  double worst = kInf, slowest = 0.0;
  std::string failures;
  for (const auto& c : certificate_cases()) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto nonlin = parse_nonlinearity(c.f);
      SynthesisOptions opt;
      opt.alpha = c.alpha;
      const auto cert = certify(synthesize(c.N, nonlin, c.theorem, opt), nonlin);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      slowest = std::max(slowest, secs);
      worst = std::min(worst, cert.worst_margin);
      if (!cert.certified || !(cert.worst_margin > 0.0) || secs >= 10.0) {
        r.pass = false;
        failures += fmt::format(" [{} N={} {}]", to_string(c.theorem), c.N, c.f);
      }
    } catch (const std::exception& e) {
      r.pass = false;
      failures += fmt::format(" [{} N={} {}: {}]", to_string(c.theorem), c.N, c.f, e.what());
    }
  }
  r.detail = fmt::format("{} certificates, min worst margin {:.4g}, slowest {:.3g}s{}", certificate_cases().size(),
                         worst, slowest, failures);
  return r;
}

inline double appendix_solver_error(const AppendixSpace& a, double R, int intervals) {
  SolverConfig cfg;
  cfg.intervals = intervals;
  const auto p = solve_radial_bvp(a.space(), Nonlinearity::power(a.alpha), R, appendix_profile(a, 2.0 * R).u, cfg);
  double err = 0.0;
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    err = std::max(err, std::abs(p.u[i] / appendix_profile(a, p.grid.r[i]).u - 1.0));
  }
  return err;
}

inline CriterionResult solver_order() {
  CriterionResult r{6, "solver order", false, "", 0.0};
  const auto a = appendix_space(5.0, 2.0, 1.0);
  const double R = 0.5;
  const double coarse = appendix_solver_error(a, R, 2048);
  const double fine = appendix_solver_error(a, R, 4096);
  const double ratio = coarse / fine;
  r.pass = coarse <= 1e-6 && std::abs(ratio - 4.0) <= 0.2;
  r.detail = fmt::format("R={} err(2048)={:.4g} err(4096)={:.4g} ratio={:.4f}", R, coarse, fine, ratio);
  return r;
}

inline CriterionResult elliptic_defect() {
  CriterionResult r{7, "elliptic-inequality defect", true, "", 0.0};
  const std::vector<int> levels{64, 128, 256};
  int series = 0, failed = 0;
  double worst_ratio = kInf;
  auto tally = [&](const DefectSeries& s) {
    ++series;
    if (!s.second_order) ++failed;
    if (s.negative[1] > 1e-12 * s.scale[1]) worst_ratio = std::min(worst_ratio, s.negative[1] / s.negative[2]);
  };

  // Explicit solution on the sharpness family, first kind without shift.
  const auto a = appendix_space(5.0, 2.0, 1.0);
  const double K = curvature_bound(a.space(), 10.0 * std::max(a.scale, 1.0)).effective_K;
  const auto f5 = Nonlinearity::power(2.0);
  const auto c5 = certify(synthesize(5.0, f5, Theorem::lane_emden), f5);
  for (double d : {0.0, c5.source_weight}) {
    tally(defect_series(
        [&](int m) {
          return verify_elliptic_inequality(appendix_profile_on_grid(a, 1.0, m), {c5.transform_power, 0, d, 0, false},
                                            false, K);
        },
        levels));
  }

  // Ten flat Lane-Emden profiles in ℝ⁴.
  const auto f4 = Nonlinearity::power(2.0);
  const auto c4 = certify(synthesize(4.0, f4, Theorem::lane_emden), f4);
  for (double b : linear_grid(0.2, 0.8, 10)) {
    tally(defect_series(
        [&](int m) {
          SolverConfig cfg;
          cfg.intervals = m;
          const auto p = solve_radial_bvp(flat_space(4), f4, 1.0, b, cfg);
          return verify_elliptic_inequality(p, {c4.transform_power, 0, c4.source_weight, 0, false}, false, 0.0);
        },
        levels));
  }

  // Second kind in dimension 3 with shifts.
  const auto f3 = Nonlinearity::power(3.5);
  const auto c3 = certify(synthesize(3.0, f3, Theorem::shifted), f3);
  for (double b : {0.2, 0.4, 0.6}) {
    for (double e : {1e-3, 0.1, 1.0}) {
      tally(defect_series(
          [&](int m) {
            SolverConfig cfg;
            cfg.intervals = m;
            const auto p = solve_radial_bvp(flat_space(3), f3, 1.0, b, cfg);
            return verify_elliptic_inequality(p, {c3.transform_power, 1.0, c3.source_weight, e, true}, true, 0.0);
          },
          levels));
    }
  }
  r.pass = failed == 0 && c3.second_kind;
  r.detail = fmt::format("{} series over h=2R/{{64,128,256}}, {} off second order, smallest refinement ratio {:.3f}",
                         series, failed, worst_ratio);
  return r;
}

inline std::vector<SolutionProfile> lane_emden_corpus() {
  return boundary_sweep(flat_space(4), Nonlinearity::power(2.0), 1.0, 0.01, 0.8, 20);
}

inline CriterionResult estimate_battery(const std::vector<SolutionProfile>& corpus) {
  CriterionResult r{8, "estimate battery", false, "", 0.0};
  const auto f = Nonlinearity::power(2.0);
  const auto cert = certify(synthesize(4.0, f, Theorem::lane_emden), f);
  const double K = curvature_bound(flat_space(4), 2.0).effective_K;
  const double R = 1.0;
  bool below = cert.certified, monotone = true;
  double largest = 0.0;
  const auto factors = log_grid(1e-8, 1e2, 11);
  for (const auto& p : corpus) {
    const auto rep = check_estimate(p, cert, K, R, EstimateKind::gradient_strong);
    largest = std::max(largest, rep.measured * R * R);
    below = below && rep.pass && rep.measured * R * R < cert.constant;
    bool seen_pass = false;
    for (double k : factors) {
      const bool pass = check_estimate(p, cert, K, R, EstimateKind::gradient_strong, std::nullopt, k).pass;
      if (seen_pass && !pass) monotone = false;
      seen_pass = seen_pass || pass;
    }
  }
  r.pass = below && monotone && corpus.size() == 20;
  r.detail = fmt::format("{} profiles, max measured*R^2={:.4g}, C={:.4g}, monotone={}", corpus.size(), largest,
                         cert.constant, monotone);
  return r;
}

inline CriterionResult harnack_arrow(const std::vector<SolutionProfile>& corpus) {
  CriterionResult r{9, "harnack arrow", false, "", 0.0};
  const auto rep = implication_suite(corpus, 4.0, Nonlinearity::power(2.0), 0.0);
  double tightest = 0.0;
  for (const auto& c : rep.profiles) tightest = std::max(tightest, c.oscillation / c.harnack_bound);

  const auto a = appendix_space(5.0, 2.0, 1.0);
  const auto p = appendix_profile_on_grid(a, 1.0, 2048);
  const auto c = measure_constants(p, a.K);
  const double mu2 = a.scale * a.scale;
  const double closed = std::pow((mu2 + 1.0) / mu2, 2.0);
  const bool appendix_ok = c.oscillation <= c.harnack_bound * (1.0 + 1e-8) && std::abs(c.oscillation - closed) <= 1e-12 * closed;
  tightest = std::max(tightest, c.oscillation / c.harnack_bound);
  r.pass = rep.arrow_b && appendix_ok;
  r.detail = fmt::format("{} corpus profiles + explicit solution, max oscillation/bound={:.4g}", rep.profiles.size(),
                         tightest);
  return r;
}

inline CriterionResult lichnerowicz_thresholds() {
  CriterionResult r{10, "lichnerowicz thresholds", false, "", 0.0};
  bool table = liouville_threshold(4, 1, 3) == 1.0 && liouville_threshold(4, 3, 1.5) == 1.5;
  for (double n : {1.0, 2.0, 4.0, 9.0})
    for (double s : {1.2, 2.0, 5.0}) table = table && liouville_threshold(n, 0.0, s) == 0.0;
  // Curvature allowance: 2(σ−1)a below the edge, δ beyond it.
  const auto below = lichnerowicz_constants(4, 1, 1.3, 0.5, 1.0);
  const auto beyond = lichnerowicz_constants(4, 1, 3.0, 0.5, 1.0);
  table = table && std::abs(below.allowance - 0.6) <= 1e-15 && beyond.allowance == 1.0;

  const auto f = Nonlinearity::lichnerowicz(1, 1, 3, 0, 0.5);
  const auto p = solve_radial_bvp(flat_space(4), f, 1.0, 1.0);
  double drift = 0.0;
  for (double u : p.u) drift = std::max(drift, std::abs(u - 1.0));
  const auto cert = certify(synthesize(4.0, f, Theorem::lichnerowicz), f);
  const auto est = check_estimate(p, cert, 0.0, 1.0, EstimateKind::lichnerowicz);
  const bool equilibrium = drift == 0.0 && p.residual_norm == 0.0 && est.measured == 0.0 && est.pass;
  r.pass = table && equilibrium && cert.certified;
  r.detail = fmt::format("L(4,1,3)={} L(4,3,1.5)={} allowance {} / {}; Allen-Cahn max|u-1|={} diagnostic={}",
                         liouville_threshold(4, 1, 3), liouville_threshold(4, 3, 1.5), below.allowance,
                         beyond.allowance, drift, est.measured);
  return r;
}

inline CriterionResult scaling_property(const std::vector<SolutionProfile>& corpus) {
  CriterionResult r{11, "scaling property", false, "", 0.0};
  double worst = 0.0;
  int checks = 0;
  for (std::size_t i = 0; i < corpus.size(); i += 4) {
    for (double s : {0.5, 2.0}) {
      worst = std::max(worst, scaling_check(corpus[i], s).deviation);
      ++checks;
    }
  }
  r.pass = worst <= 1e-8;
  r.detail = fmt::format("{} checks, max deviation {:.3g}", checks, worst);
  return r;
}

}  // namespace battery

inline std::vector<CriterionResult> run_battery(const BatteryOptions& opt = {}) {
  std::vector<CriterionResult> out;
  auto timed = [&out](const std::function<CriterionResult()>& fn, int id, const char* title) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = CriterionResult{id, title, false, std::string("exception: ") + e.what(), 0.0};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  };
  timed([] { return battery::appendix_exactness(); }, 1, "appendix exactness");
  if (out.back().pass && out.back().seconds >= 1.0) out.back().pass = false;
  timed([&opt] { return battery::eigenvalue_cross_check(opt.seed); }, 2, "eigenvalue cross-check");
  if (out.back().pass && out.back().seconds >= 1.0) out.back().pass = false;
  timed([] { return battery::cross_term_identity(); }, 3, "cross-term identity");
  timed([] { return battery::large_exponent_recipe(); }, 4, "large-exponent recipe");
  timed([] { return battery::certificate_floors(); }, 5, "certificate floors");
  timed([] { return battery::solver_order(); }, 6, "solver order");
  timed([] { return battery::elliptic_defect(); }, 7, "elliptic-inequality defect");

  std::vector<SolutionProfile> corpus;
  std::string corpus_error;
  try {
    corpus = battery::lane_emden_corpus();
  } catch (const std::exception& e) {
    corpus_error = e.what();
  }
  timed([&] { return battery::estimate_battery(corpus); }, 8, "estimate battery");
  timed([&] { return battery::harnack_arrow(corpus); }, 9, "harnack arrow");
  timed([] { return battery::lichnerowicz_thresholds(); }, 10, "lichnerowicz thresholds");
  timed([&] { return battery::scaling_property(corpus); }, 11, "scaling property");
  if (!corpus_error.empty()) {
    for (auto& r : out) {
      if (r.id >= 8 && r.id != 10) {
        r.pass = false;
        r.detail = "corpus failed: " + corpus_error;
      }
    }
  }
  return out;
}

inline nlohmann::json to_json(const CriterionResult& r) {
  return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}};
}

}  // namespace semilin
