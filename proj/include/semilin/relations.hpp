#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "semilin/error.hpp"
#include "semilin/nonlinearity.hpp"
#include "semilin/numeric.hpp"
#include "semilin/pdelab.hpp"

namespace semilin {

// Empirical checks of how the three basic estimates imply one another:
//   (a) universal bound on B(2R)  ->  log-gradient bound on B(R)
//   (b) log-gradient bound on B(R) ->  Harnack inequality on B(R)
//   (c) Harnack on B(2R)           ->  universal bound on B(R)
// Each measured constant is the smallest one making the display true for that profile.

struct ProfileConstants {
  double boundary_value = 0.0;
  double universal_outer = 0.0;   // C_U measured on B(2R)
  double log_gradient = 0.0;      // C_L measured on B(R)
  double oscillation = 0.0;       // sup/inf of u on B(R)
  double harnack_bound = 0.0;     // e^{2√(C_L(KR²+1))}
  bool harnack_holds = false;
  double oscillation_outer = 0.0; // C_H measured on B(2R)
  double universal_inner = 0.0;   // C_U measured on B(R)
};

struct ImplicationReport {
  double N = 0.0;
  double K = 0.0;
  double R = 0.0;
  std::string nonlin;
  std::vector<ProfileConstants> profiles;
  bool log_gradient_hypothesis = false;  // t^{-c} f non-increasing, f ≥ 0
  bool universal_hypothesis = false;     // f > 0, Λ < Sobolev exponent, t f'/f non-decreasing
  bool arrow_a = false;  // C_L finite everywhere and under the fitted affine envelope of C_U
  bool arrow_b = false;
  bool arrow_c = false;
  double affine_intercept = 0.0;  // C_L ≤ intercept + slope·C_U
  double affine_slope = 0.0;
  double harnack_tolerance = 1e-8;
};

namespace detail {

struct BallSup {
  double grad = 0.0;    // sup |u'|²/u²
  double source = 0.0;  // sup f(u)/u
  double lo = kInf;
  double hi = 0.0;
};

inline BallSup ball_sup(const SolutionProfile& p, double radius) {
  BallSup s;
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    if (p.grid.r[i] > radius * (1.0 + 1e-12)) break;
    const double u = p.u[i];
    s.grad = std::max(s.grad, p.du[i] * p.du[i] / (u * u));
    s.source = std::max(s.source, evaluate(p.nonlin, u).value / u);
    s.lo = std::min(s.lo, u);
    s.hi = std::max(s.hi, u);
  }
  return s;
}

}  // namespace detail

inline ProfileConstants measure_constants(const SolutionProfile& p, double K) {
  const double R = p.grid.R;
  const auto inner = detail::ball_sup(p, R);
  const auto outer = detail::ball_sup(p, 2.0 * R);
  ProfileConstants c;
  c.boundary_value = p.boundary_value;
  c.universal_outer = outer.source / (K + 1.0 / (4.0 * R * R));
  c.log_gradient = inner.grad / (K + 1.0 / (R * R));
  c.oscillation = inner.hi / inner.lo;
  c.harnack_bound = harnack_constant(c.log_gradient, K, R);
  c.oscillation_outer = outer.hi / outer.lo;
  c.universal_inner = inner.source / (K + 1.0 / (R * R));
  return c;
}

/// Solves the boundary value problem for `count` log-spaced boundary values.
inline std::vector<SolutionProfile> boundary_sweep(const WeightedSpace& space, const Nonlinearity& nonlin, double R,
                                                   double b_min, double b_max, int count,
                                                   const SolverConfig& config = {}) {
  std::vector<SolutionProfile> out;
  for (double b : log_grid(b_min, b_max, count)) out.push_back(solve_radial_bvp(space, nonlin, R, b, config));
  return out;
}

inline ImplicationReport implication_suite(const std::vector<SolutionProfile>& corpus, double N,
                                           const Nonlinearity& nonlin, double K, bool strict = false) {
  if (corpus.empty()) throw Error(ErrorKind::InvalidParameter, "empty corpus");
  ImplicationReport rep;
  rep.N = N;
  rep.K = K;
  rep.R = corpus.front().grid.R;
  rep.nonlin = nonlin.describe();

  const SamplingGrid grid;
  // Sign of f only matters when the monotonicity exponent is at most 1.
  const auto exponent = detail::least_monotone_power(nonlin, grid);
  rep.log_gradient_hypothesis = exponent.has_value() && (nonlin.positive() || *exponent > 1.0);
  if (nonlin.positive()) {
    const auto ix = compute_indices(nonlin, grid, false);
    rep.universal_hypothesis = ix.upper < sobolev_exponent(N) && detail::ratio_nondecreasing(nonlin, grid).first;
  }
  if (strict && !(rep.log_gradient_hypothesis && rep.universal_hypothesis)) {
    throw Error(ErrorKind::HypothesisViolation, "nonlinearity outside the hypotheses of the implication lemmas");
  }

  rep.arrow_b = true;
  rep.arrow_c = true;
  bool finite_gradient = true;
  for (const auto& p : corpus) {
    if (*std::min_element(p.u.begin(), p.u.end()) <= 0.0) throw Error(ErrorKind::PositivityLost, "corpus profile not positive");
    auto c = measure_constants(p, K);
    c.harnack_holds = c.oscillation <= c.harnack_bound * (1.0 + rep.harnack_tolerance);
    rep.arrow_b = rep.arrow_b && c.harnack_holds;
    rep.arrow_c = rep.arrow_c && std::isfinite(c.universal_inner);
    finite_gradient = finite_gradient && std::isfinite(c.log_gradient);
    rep.profiles.push_back(c);
  }

  // Least-squares line through (C_U, C_L), lifted so every point lies below it.
  const double n = static_cast<double>(rep.profiles.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& c : rep.profiles) {
    sx += c.universal_outer;
    sy += c.log_gradient;
    sxx += c.universal_outer * c.universal_outer;
    sxy += c.universal_outer * c.log_gradient;
  }
  const double denom = n * sxx - sx * sx;
  rep.affine_slope = denom > 0.0 ? std::max(0.0, (n * sxy - sx * sy) / denom) : 0.0;
  double lift = -kInf;
  for (const auto& c : rep.profiles) lift = std::max(lift, c.log_gradient - rep.affine_slope * c.universal_outer);
  rep.affine_intercept = lift;
  rep.arrow_a = finite_gradient && std::isfinite(rep.affine_intercept);
  return rep;
}

inline nlohmann::json to_json(const ImplicationReport& r) {
  nlohmann::json profiles = nlohmann::json::array();
  for (const auto& c : r.profiles) {
    profiles.push_back({{"boundary_value", c.boundary_value},
                        {"universal_outer", c.universal_outer},
                        {"log_gradient", c.log_gradient},
                        {"oscillation", c.oscillation},
                        {"harnack_bound", c.harnack_bound},
                        {"harnack_holds", c.harnack_holds},
                        {"oscillation_outer", c.oscillation_outer},
                        {"universal_inner", c.universal_inner}});
  }
  return {{"N", r.N},
          {"K", r.K},
          {"R", r.R},
          {"f", r.nonlin},
          {"hypotheses", {{"log_gradient_from_universal", r.log_gradient_hypothesis},
                          {"universal_from_harnack", r.universal_hypothesis},
                          {"continuity", "smooth radial profiles"}}},
          {"arrows", {{"universal_to_log_gradient", r.arrow_a},
                      {"log_gradient_to_harnack", r.arrow_b},
                      {"harnack_to_universal", r.arrow_c}}},
          {"affine_envelope", {{"intercept", r.affine_intercept}, {"slope", r.affine_slope}}},
          {"profiles", profiles}};
}

/// One row per profile, one column per arrow.
inline void write_implication_csv(std::ostream& os, const ImplicationReport& r) {
  os << "boundary_value,universal_to_log_gradient,log_gradient_to_harnack,harnack_to_universal\n";
  for (const auto& c : r.profiles) {
    const bool a = std::isfinite(c.log_gradient) && c.log_gradient <= r.affine_intercept + r.affine_slope * c.universal_outer;
    os << fmt::format("{:.17g},{},{},{}\n", c.boundary_value, a ? 1 : 0, c.harnack_holds ? 1 : 0,
                      std::isfinite(c.universal_inner) ? 1 : 0);
  }
}

}  // namespace semilin
