#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semilin/error.hpp"
#include "semilin/nonlinearity.hpp"
#include "semilin/numeric.hpp"

namespace semilin {

// ---------------------------------------------------------------------------
// Coefficients of the elliptic inequalities satisfied by the two auxiliary
// functions. With w the transformed solution, a = |∇w|²/w² and b = f(u)/u,
// each inequality carries the quadratic form  quartic·a² + mixed·a·b + square·b².
// ---------------------------------------------------------------------------

struct CoefficientState {
  double dimension = 1.0;        // synthetic dimension N
  double transform_power = 1.0;  // w = u^{-power} or (u+ε)^{-power}
  double prefactor_power = 0.0;  // exponent on the (u+ε) or w prefactor
  double source_weight = 0.0;    // weight of f(u)/u inside the auxiliary function
  double shift = 0.0;            // ε
  double u = 1.0;
  double first_ratio = 0.0;   // u f'/f
  double second_ratio = 0.0;  // u² f''/f
};

struct QuadraticCoefficients {
  double quartic = 0.0;
  double mixed = 0.0;
  double square = 0.0;
};

namespace detail {
inline void validate(const CoefficientState& s) {
  if (s.transform_power == 0.0) throw Error(ErrorKind::InvalidParameter, "transform power must be non-zero");
  if (!(s.u + s.shift > 0.0)) throw Error(ErrorKind::InvalidParameter, "u + shift must be positive");
  if (!(s.dimension >= 1.0)) throw Error(ErrorKind::InvalidParameter, "dimension must be >= 1");
}
}  // namespace detail

/// Coefficients for F = (u+ε)^{-βγ}(|∇w|²/w² + d f/u), w = u^{-β}.
inline QuadraticCoefficients first_kind_coefficients(const CoefficientState& s) {
  detail::validate(s);
  const double N = s.dimension, b = s.transform_power, g = s.prefactor_power, d = s.source_weight;
  const double q = s.u / (s.u + s.shift);
  const double r1 = s.first_ratio, r2 = s.second_ratio;
  const double ib = 1.0 / b;
  QuadraticCoefficients c;
  c.quartic = 2.0 / N * (1.0 + ib) * (1.0 + ib) + (g * ib - g * g) * q * q + 2.0 * (1.0 - ib) * g * q - 2.0;
  c.mixed = 4.0 / N * (1.0 + b) + 2.0 * (1.0 - r1) + d * (r2 * ib * ib - 2.0 * ib * (r1 - 1.0)) +
            g * q * (b + d * ((ib - g) * q + 2.0 - 2.0 * ib));
  c.square = 2.0 * b * b / N + d * (b * g * q + 1.0 - r1);
  return c;
}

/// Coefficients for G = w^γ(|∇w|²/w² + d f/u), w = (u+ε)^{-β}; needs ε > 0
/// unless u alone is used.
inline QuadraticCoefficients second_kind_coefficients(const CoefficientState& s) {
  detail::validate(s);
  const double N = s.dimension, b = s.transform_power, g = s.prefactor_power, d = s.source_weight;
  const double q = s.u / (s.u + s.shift);
  const double p = (s.u + s.shift) / s.u;
  const double r1 = s.first_ratio, r2 = s.second_ratio;
  const double ib = 1.0 / b;
  QuadraticCoefficients c;
  c.quartic = 2.0 / N * (1.0 + ib) * (1.0 + ib) + 2.0 * g - g * g - g * ib - 2.0;
  c.mixed = (4.0 / N * (1.0 + b) + 2.0 + g * b) * q - 2.0 * r1 +
            2.0 * d * (g - 1.0 + ib) * (ib * p * (r1 - 1.0) - g) +
            d * (ib * ib * p * p * (r2 + 2.0 - 2.0 * r1) + g * (g + ib) - 2.0 * g * ib * p * (r1 - 1.0));
  c.square = 2.0 * b * b / N * q * q + d * (b * g * q + 1.0 - r1);
  return c;
}

/// Lower bound for the cross coefficient after extracting l(a² + b²) from the
/// quadratic form with the shift and prefactor switched off.
inline double cross_term_bound(double beta, double d, double l, double N, double upper, double second) {
  const double ra = 2.0 / N * (1.0 + 1.0 / beta) * (1.0 + 1.0 / beta) - 2.0 - l;
  const double rb = 2.0 / N * beta * beta + d * (1.0 - upper) - l;
  const double tol = 1e-14 * (1.0 + std::abs(l));
  if (ra < -tol || rb < -tol) throw Error(ErrorKind::NegativeRadicand, "cross-term radicand is negative");
  return 2.0 * std::sqrt(std::max(ra, 0.0) * std::max(rb, 0.0)) + 4.0 / N * (1.0 + beta) +
         (2.0 + 2.0 * d / beta) * (1.0 - upper) + d * second / (beta * beta);
}

/// Lower envelope of the mixed coefficient as a quadratic in x = u f'/f once
/// t² f''/f ≥ x(x−1) is used; upward parabola in x for d > 0.
inline double mixed_polynomial(double x, double beta, double d, double N) {
  return 4.0 / N * (1.0 + beta) + beta + 2.0 * (1.0 - x) + d * (x / beta - 1.0) * ((x - 1.0) / beta - 1.0);
}

inline double mixed_polynomial_axis(double beta, double d) { return 0.5 + beta + beta * beta / d; }

/// Minimum of the mixed polynomial over x ∈ [lo, hi].
inline double mixed_polynomial_min(double lo, double hi, double beta, double d, double N) {
  double best = std::min(mixed_polynomial(lo, beta, d, N), mixed_polynomial(hi, beta, d, N));
  const double axis = mixed_polynomial_axis(beta, d);
  if (axis > lo && axis < hi) best = std::min(best, mixed_polynomial(axis, beta, d, N));
  return best;
}

// ---------------------------------------------------------------------------
// Parameter recipes.
// ---------------------------------------------------------------------------

struct SignedMonotoneRecipe {
  bool small_exponent = true;  // α ≤ 1 + 4/N
  double level = 0.0;          // l solving 4l/(Nl−2) = α−1 (large-exponent case)
  double transform_power = 0.0;
  double gain = 0.0;
};

/// β and the F² gain for the estimate that only needs t^{-α} f non-increasing.
/// Evaluated for any α > 1 so the sign of the gain can be inspected past the
/// gradient threshold.
inline SignedMonotoneRecipe signed_monotone_recipe(double N, double alpha) {
  if (!(alpha > 1.0)) throw Error(ErrorKind::InvalidAlpha, "exponent must exceed 1");
  SignedMonotoneRecipe r;
  if (alpha <= 1.0 + 4.0 / N) {
    r.small_exponent = true;
    r.transform_power = std::min(1.0 / N, N / 2.0 * (alpha - 1.0));
    r.gain = 2.0;
    return r;
  }
  r.small_exponent = false;
  r.level = 2.0 * (alpha - 1.0) / (N * (alpha - 1.0) - 4.0);
  r.transform_power = 4.0 / (N * r.level - 2.0);
  r.gain = r.level - 2.0;
  return r;
}

/// Threshold below which positive solutions of the Lichnerowicz equation on a
/// space with Ricci bounded below by −K (K ≤ threshold) are constant.
inline double liouville_threshold(double n, double a, double sigma) {
  if (a == 0.0) return 0.0;
  if (n == 1.0) return (sigma - 1.0) * a;
  const double edge = 2.0 / (std::sqrt(n) * (std::sqrt(n) - 1.0));
  return sigma < 1.0 + edge ? (sigma - 1.0) * a : edge;
}

struct LichnerowiczConstants {
  double allowance = 0.0;   // curvature allowance entering (2K − allowance)+
  double threshold = 0.0;   // Liouville threshold
  double transform_power = 0.0;
  double square_gain = 0.0;  // coefficient of F²
  int regime = 1;            // 1: σ ≤ 1+2/N, 2: up to the edge, 3: beyond
};

inline double delta_ceiling(double N) { return N == 1.0 ? kInf : 4.0 / (std::sqrt(N) * (std::sqrt(N) - 1.0)); }

inline LichnerowiczConstants lichnerowicz_constants(double N, double a, double sigma, double tau, double delta) {
  if (!(N >= 1.0)) throw Error(ErrorKind::InvalidParameter, "dimension must be >= 1");
  if (!(sigma > 1.0) || !(tau < 1.0) || a < 0.0) throw Error(ErrorKind::InvalidParameter, "need sigma > 1 > tau, a >= 0");
  if (!(delta > 0.0) || !(delta < delta_ceiling(N))) throw Error(ErrorKind::InvalidDelta, "delta outside admissible range");
  LichnerowiczConstants out;
  const double edge = N == 1.0 ? kInf : 2.0 / (std::sqrt(N) * (std::sqrt(N) - 1.0));
  out.allowance = sigma < 1.0 + edge ? 2.0 * (sigma - 1.0) * a : delta;
  out.threshold = liouville_threshold(N, a, sigma);
  auto quartic = [N](double b) { return 2.0 / N * (1.0 + 1.0 / b) * (1.0 + 1.0 / b) - 2.0; };
  if (sigma <= 1.0 + 2.0 / N) {
    out.regime = 1;
    const double top = 1.0 / (std::sqrt(2.0 * N) - 1.0);
    auto gap = [N, sigma](double b) {
      const double rad = std::max(0.0, (1.0 + b) * (1.0 + b) - 2.0 * N * b * b);
      return 4.0 / N * (1.0 + b) - 4.0 / N * std::sqrt(rad) - 2.0 * (sigma - 1.0);
    };
    out.transform_power = bisect_root(gap, 1e-300, top, 1e-14);
    out.square_gain = 2.0;
  } else if (sigma < 1.0 + edge) {
    out.regime = 2;
    out.transform_power = N / 2.0 * (sigma - 1.0) - 1.0;
    out.square_gain = quartic(out.transform_power);
  } else {
    out.regime = 3;
    const double lo = std::max(1.0 / N, N * delta / 4.0 - 1.0);
    const double hi = N == 1.0 ? kInf : 1.0 / (std::sqrt(N) - 1.0);
    out.transform_power = std::isinf(hi) ? lo + 1.0 : 0.5 * (lo + hi);
    out.square_gain = quartic(out.transform_power);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Certificates.
// ---------------------------------------------------------------------------

struct FloorCheck {
  std::string name;
  double claimed = 0.0;   // floor asserted by the recipe
  double observed = kInf; // minimum over the verification grid (region-restricted)
  double margin = kInf;   // distance from the sign boundary the end-game needs
};

struct Certificate {
  Theorem theorem = Theorem::positive_subcritical;
  std::string recipe;
  double dimension = 1.0;
  IndexReport indices;
  bool second_kind = false;

  double transform_power = 0.0;
  double prefactor_power = 0.0;
  double source_weight = 0.0;
  double floor_level = 0.0;     // l
  double gain = 0.0;            // coefficient of the squared auxiliary function
  double cutoff_factor = 0.0;   // L in f(Lε) and in the small set {u < Lε}
  double mixed_target = 0.0;

  std::optional<double> alpha;
  std::optional<double> delta;
  std::optional<double> inverse_power;   // β for which t^{-1-β} f is inverse bounded
  std::optional<double> allowance;       // Lichnerowicz curvature allowance
  std::optional<double> threshold;       // Liouville threshold
  std::optional<double> lichnerowicz_linear;

  double quartic_floor = 0.0;
  double mixed_floor = 0.0;
  double square_floor = 0.0;

  double envelope = 100.0;
  double constant = 0.0;
  nlohmann::json constant_breakdown = nlohmann::json::object();

  bool certified = false;
  double worst_margin = kInf;
  double tight_slack = kInf;
  std::string worst_check;
  std::vector<FloorCheck> checks;
  nlohmann::json verification = nlohmann::json::object();
};

struct SynthesisOptions {
  std::optional<double> transform_power;  // pin β instead of the interval midpoint
  std::optional<double> alpha;
  std::optional<double> delta;
  std::optional<double> inverse_power;
  std::function<double(double)> inverse_witness;
  double envelope = 100.0;
};

namespace detail {

// Cut-off bookkeeping shared by every end-game: with drift coefficient κ and
// gain G the cut-off terms contribute 2(κ²/G + 1) + 1 times (√K/R + 1/R²).
inline double cutoff_coefficient(double drift, double gain) { return 2.0 * (drift * drift / gain + 1.0) + 1.0; }

// sup F ≤ (2/G)(c_K K + envelope·cut·(√K/R + 1/R²) + c_s·source) and
// √K/R + 1/R² ≤ (3/2)(K + 1/R²).
inline double max_principle_constant(double gain, double drift, double envelope, double curvature_weight) {
  return 2.0 / gain * (curvature_weight + 1.5 * envelope * cutoff_coefficient(drift, gain));
}

inline std::pair<double, double> admissible_shift_interval(double N, double upper) {
  const double rho = removal_threshold(N, upper);
  double hi = kInf;
  if (N > 2.0) {
    hi = 2.0 / (N - 2.0);
    if (N < 4.0 && !removal_branches(N, upper).uses_low) hi = std::min(hi, upper - (N - 1.0) / (N - 2.0));
  }
  return {rho, hi};
}

struct WeightChoice {
  double weight = 0.0;
  double mixed = 0.0;   // minimum of the mixed polynomial over [λ, Λ]
  double square = 0.0;  // 2β²/N + d(β + 1 − Λ)
};

// Maximin choice of the source weight d ∈ (0, cap]: keeps the mixed and
// square floors and d itself as far from zero as possible.
inline WeightChoice choose_shift_weight(double N, double lower, double upper, double beta) {
  const double room = upper - 1.0 - beta;
  const double cap = room > 0.0 ? 2.0 * beta * beta / (N * room) : 1.0;
  auto score = [&](double d) {
    const double m = mixed_polynomial_min(lower, upper, beta, d, N);
    const double s = 2.0 * beta * beta / N + d * (beta + 1.0 - upper);
    return std::min({m, s, d});
  };
  auto best = scan_maximum(score, cap * 1e-6, cap * (1.0 - 1e-9), 513);
  WeightChoice w;
  w.weight = best.where;
  w.mixed = mixed_polynomial_min(lower, upper, beta, w.weight, N);
  w.square = 2.0 * beta * beta / N + w.weight * (beta + 1.0 - upper);
  return w;
}

inline void synthesize_positive_subcritical(Certificate& c, const SynthesisOptions& opt) {
  const double N = c.dimension;
  const auto& ix = c.indices;
  const double beta = opt.transform_power.value_or(N > 1.0 ? 2.0 / (N - 1.0) : std::max(ix.upper, 1.0));
  const double target = N > 1.0 ? (N + 3.0) / (N - 1.0) - ix.upper : 2.0;
  const double quartic = 2.0 / N * (1.0 + 1.0 / beta) * (1.0 + 1.0 / beta) - 2.0;
  if (!(target > 0.0) || !(quartic > 0.0)) throw Error(ErrorKind::Infeasible, "upper index not below the gradient threshold");

  // Joint search over the product grid of (l, d) ∈ (0, l_max) × (0, 1).
  auto score = [&](double l, double d) {
    const double sq = 2.0 / N * beta * beta + d * (1.0 - ix.upper);
    if (l >= quartic || l >= sq) return -kInf;
    const double h = cross_term_bound(beta, d, l, N, ix.upper, ix.second);
    return std::min({l, quartic - l, sq - l, h - target, d, 1.0 - d});
  };
  const double lmax = std::min(quartic, 2.0 / N * beta * beta + std::max(0.0, 1.0 - ix.upper));
  double l_lo = 0.0, l_hi = lmax, d_lo = 0.0, d_hi = 1.0;
  double best_l = 0.0, best_d = 0.0, best = -kInf;
  for (int round = 0; round < 4; ++round) {
    const int n = 64;
    for (int i = 1; i < n; ++i) {
      for (int j = 1; j < n; ++j) {
        const double l = l_lo + (l_hi - l_lo) * i / n;
        const double d = d_lo + (d_hi - d_lo) * j / n;
        const double s = score(l, d);
        if (s > best) {
          best = s;
          best_l = l;
          best_d = d;
        }
      }
    }
    const double wl = (l_hi - l_lo) / 8.0, wd = (d_hi - d_lo) / 8.0;
    l_lo = std::max(0.0, best_l - wl);
    l_hi = std::min(lmax, best_l + wl);
    d_lo = std::max(0.0, best_d - wd);
    d_hi = std::min(1.0, best_d + wd);
  }
  if (!(best > 0.0)) throw Error(ErrorKind::Infeasible, "no (l, d) pair keeps the cross term above target");

  c.recipe = "cross-term search from the zero corner";
  c.transform_power = beta;
  c.prefactor_power = 0.0;
  c.source_weight = best_d;
  c.floor_level = best_l;
  c.mixed_target = target;
  c.gain = best_l / 2.0;
  c.quartic_floor = best_l;
  c.square_floor = best_l;
  c.mixed_floor = target;

  const double drift = 1.0 / beta - 1.0;
  const double sup_f = max_principle_constant(c.gain, drift, c.envelope, 2.0);
  const double convert = 1.0 / std::min(beta * beta, best_d);
  c.constant = sup_f * convert;
  c.constant_breakdown = {{"auxiliary_sup_factor", sup_f}, {"conversion", convert},
                          {"cutoff_coefficient", cutoff_coefficient(drift, c.gain)}};
}

inline void synthesize_signed_monotone(Certificate& c, const SynthesisOptions& opt) {
  const double N = c.dimension;
  if (!opt.alpha) throw Error(ErrorKind::HypothesisViolation, "monotonicity exponent alpha required");
  const double alpha = *opt.alpha;
  if (!(alpha > 1.0) || !(alpha < gradient_threshold(N))) {
    throw Error(ErrorKind::Infeasible, "alpha must lie in (1, gradient threshold)");
  }
  const auto r = signed_monotone_recipe(N, alpha);
  c.alpha = alpha;
  c.recipe = r.small_exponent ? "small exponent" : "large exponent";
  c.transform_power = opt.transform_power.value_or(r.transform_power);
  c.floor_level = r.small_exponent ? 4.0 : r.level;
  c.gain = r.gain;
  c.quartic_floor = r.gain;
  c.square_floor = 2.0 * c.transform_power * c.transform_power / N;
  c.mixed_floor = 0.0;
  const double drift = 1.0 / c.transform_power - 1.0;
  const double sup_f = max_principle_constant(c.gain, drift, c.envelope, 2.0);
  const double convert = 1.0 / (c.transform_power * c.transform_power);
  c.constant = sup_f * convert;
  c.constant_breakdown = {{"auxiliary_sup_factor", sup_f}, {"conversion", convert},
                          {"cutoff_coefficient", cutoff_coefficient(drift, c.gain)}};
}

inline void synthesize_shifted(Certificate& c, const SynthesisOptions& opt) {
  const double N = c.dimension;
  const auto& ix = c.indices;
  if (N == 1.0) throw Error(ErrorKind::RhoUndefined, "shifted recipe needs N > 1");
  const auto [lo, hi] = admissible_shift_interval(N, ix.upper);
  if (!(hi > std::max(lo, 0.0))) throw Error(ErrorKind::Infeasible, "admissible transform interval is empty");
  double beta;
  if (opt.transform_power) {
    beta = *opt.transform_power;
  } else if (std::isinf(hi)) {
    beta = std::max(lo, 0.0) + 1.0;
  } else {
    beta = 0.5 * (std::max(lo, 0.0) + hi);
  }
  c.second_kind = N < 4.0;
  c.prefactor_power = 1.0;
  c.transform_power = beta;

  const auto w = choose_shift_weight(N, ix.lower, ix.upper, beta);
  c.source_weight = w.weight;
  const double d = w.weight;
  if (!(w.mixed > 0.0) || !(w.square > 0.0)) throw Error(ErrorKind::Infeasible, "mixed or square floor not positive");
  const double q0 = w.mixed, s0 = w.square;

  double L = 1.0;
  if (!c.second_kind) {
    c.recipe = "first kind, shifted";
    c.quartic_floor = (2.0 / N * (1.0 + 1.0 / beta) - 1.0) * (1.0 + 1.0 / beta);
    L = std::max({L, 2.0 * beta / q0, 2.0 * d * beta / s0, beta, d * beta});
  } else {
    c.recipe = "second kind, shifted";
    c.quartic_floor = 2.0 / N * (1.0 + 1.0 / beta) * (1.0 + 1.0 / beta) + 2.0 - 1.0 - 1.0 / beta - 2.0;
    const double lam = ix.lower;
    if (!(lam > 2.0)) throw Error(ErrorKind::HypothesisViolation, "second-kind recipe needs lower index > 2");
    const double A = beta + 2.0 + 4.0 / N * (1.0 + beta);
    const double curv = (lam - 1.0) * (lam - 2.0);
    const double excess = std::max(0.0, ix.upper * beta - curv);
    const double worst_on_set = excess * excess / (curv * beta * beta);
    L = std::max({L, 2.0 * (A + 2.0 * d * ix.upper / beta) / q0, A + d * worst_on_set,
                  2.0 * (d * beta + 4.0 * beta * beta / N) / s0, d * beta + 2.0 * beta * beta / N});
  }
  if (!(c.quartic_floor > 0.0)) throw Error(ErrorKind::Infeasible, "quartic floor not positive");
  c.cutoff_factor = L;
  c.mixed_floor = q0 / 2.0;
  c.square_floor = s0 / 2.0;
  c.mixed_target = q0;

  // Quadratic form ≥ ½ min(U₀, W₀/d²)(a + d b)² once the mixed term is dropped.
  c.gain = 0.5 * std::min(c.quartic_floor, c.square_floor / (d * d));
  const double drift = 1.0 / beta;
  const double sup_f = max_principle_constant(c.gain, drift, c.envelope, 4.0);
  const double convert = 1.0 / std::min(beta * beta, d);
  c.constant = sup_f * convert;
  c.constant_breakdown = {{"auxiliary_sup_factor", sup_f}, {"conversion", convert},
                          {"cutoff_coefficient", cutoff_coefficient(drift, c.gain)}};
}

inline void synthesize_supercritical(Certificate& c, const SynthesisOptions& opt) {
  const double N = c.dimension;
  const auto& ix = c.indices;
  if (!opt.inverse_power) throw Error(ErrorKind::HypothesisViolation, "inverse-bounded power required");
  const double rho = removal_threshold(N, ix.upper);
  const double beta_v2 = *opt.inverse_power;
  if (!(beta_v2 > rho)) throw Error(ErrorKind::HypothesisViolation, "inverse-bounded power must exceed threshold");
  const auto hi = admissible_shift_interval(N, ix.upper).second;
  const double beta0 = 0.5 * (rho + std::min(beta_v2, hi));
  SynthesisOptions inner = opt;
  inner.transform_power = beta0;
  synthesize_shifted(c, inner);
  c.inverse_power = beta_v2;

  // Removing ε with f(Lε)/(Lε) = K + 1/R²: points with u ≤ ε lose a factor 2^β₀,
  // points with u > ε are controlled through the inverse bound h.
  const double L = c.cutoff_factor;
  const double c1 = c.constant;
  const double c2 = std::pow(2.0, beta0) * c1 * (1.0 + L) * std::pow(L, beta0);
  double h = kInf;
  if (opt.inverse_witness) {
    h = opt.inverse_witness(c2);
  } else if (ix.lower - 1.0 - beta0 > 0.0) {
    h = std::max(1.0, std::pow(c2, 1.0 / (ix.lower - 1.0 - beta0)));
  }
  const double far = std::pow(1.0 + L * h, beta0);
  c.recipe += ", shift removed";
  c.constant = c1 * (1.0 + L) * std::max(std::pow(2.0, beta0), far);
  c.constant_breakdown["shifted_constant"] = c1;
  c.constant_breakdown["inverse_bound_argument"] = c2;
  c.constant_breakdown["inverse_bound_value"] = h;
}

inline void synthesize_lichnerowicz(Certificate& c, const Lichnerowicz& l, const SynthesisOptions& opt) {
  const double N = c.dimension;
  const double delta = opt.delta.value_or(N == 1.0 ? 1.0 : 0.5 * delta_ceiling(N));
  const auto k = lichnerowicz_constants(N, l.linear, l.absorption_exponent, l.source_exponent, delta);
  c.delta = delta;
  c.allowance = k.allowance;
  c.threshold = k.threshold;
  c.lichnerowicz_linear = l.linear;
  c.recipe = "lichnerowicz regime " + std::to_string(k.regime);
  c.transform_power = k.transform_power;
  c.gain = k.square_gain;
  c.quartic_floor = k.square_gain;
  c.mixed_floor = k.allowance;
  c.square_floor = 0.0;
  c.mixed_target = static_cast<double>(k.regime);
  const double drift = 1.0 / k.transform_power - 1.0;
  const double cut = cutoff_coefficient(drift, k.square_gain);
  c.constant = 2.0 / k.square_gain * std::max(c.envelope * cut, 1.0) / (k.transform_power * k.transform_power);
  c.constant_breakdown = {{"cutoff_coefficient", cut}, {"conversion", 1.0 / (k.transform_power * k.transform_power)}};
}

}  // namespace detail

/// Parameter tuple for an estimate from the structural indices alone.
inline Certificate synthesize(double N, const IndexReport& indices, Theorem theorem, const SynthesisOptions& opt = {}) {
  Certificate c;
  c.theorem = theorem;
  c.dimension = N;
  c.indices = indices;
  c.envelope = opt.envelope;
  switch (theorem) {
    case Theorem::positive_subcritical:
      if (!(indices.upper < gradient_threshold(N))) throw Error(ErrorKind::Infeasible, "upper index at or above threshold");
      if (!indices.second_finite) throw Error(ErrorKind::HypothesisViolation, "second-order index unbounded");
      detail::synthesize_positive_subcritical(c, opt);
      break;
    case Theorem::signed_monotone:
      detail::synthesize_signed_monotone(c, opt);
      break;
    case Theorem::shifted:
      if (!(indices.upper >= gradient_threshold(N) && indices.upper < sobolev_exponent(N))) {
        throw Error(ErrorKind::Infeasible, "upper index outside the supercritical window");
      }
      detail::synthesize_shifted(c, opt);
      break;
    case Theorem::supercritical:
      if (!(indices.upper >= gradient_threshold(N) && indices.upper < sobolev_exponent(N))) {
        throw Error(ErrorKind::Infeasible, "upper index outside the supercritical window");
      }
      detail::synthesize_supercritical(c, opt);
      break;
    case Theorem::lane_emden: {
      if (!(indices.upper == indices.lower)) throw Error(ErrorKind::HypothesisViolation, "pure power expected");
      const double alpha = indices.upper;
      if (!(alpha < sobolev_exponent(N))) throw Error(ErrorKind::Infeasible, "exponent not below Sobolev exponent");
      c.alpha = alpha;
      if (alpha < gradient_threshold(N)) {
        detail::synthesize_positive_subcritical(c, opt);
      } else {
        SynthesisOptions inner = opt;
        if (!inner.inverse_power) inner.inverse_power = 0.5 * (removal_threshold(N, alpha) + alpha - 1.0);
        const double e = alpha - 1.0 - 0.5 * (removal_threshold(N, alpha) +
                                              std::min(*inner.inverse_power,
                                                       detail::admissible_shift_interval(N, alpha).second));
        if (!inner.inverse_witness) inner.inverse_witness = [e](double C) { return std::pow(C, 1.0 / e); };
        detail::synthesize_supercritical(c, inner);
      }
      c.recipe = "pure power: " + c.recipe;
      break;
    }
    case Theorem::lichnerowicz:
      throw Error(ErrorKind::HypothesisViolation, "Lichnerowicz certificates need the equation's coefficients");
  }
  return c;
}

/// Checks the hypotheses, computes the indices and synthesises.
inline Certificate synthesize(double N, const Nonlinearity& nonlin, Theorem theorem, SynthesisOptions opt = {},
                              const SamplingGrid& grid = {}) {
  if (theorem == Theorem::lichnerowicz) {
    const auto* l = nonlin.as<Lichnerowicz>();
    if (!l) throw Error(ErrorKind::HypothesisViolation, "Lichnerowicz family required");
    Certificate c;
    c.theorem = theorem;
    c.dimension = N;
    c.envelope = opt.envelope;
    detail::synthesize_lichnerowicz(c, *l, opt);
    return c;
  }
  HypothesisAux aux{opt.alpha, opt.inverse_power};
  const auto cond = check_hypotheses(nonlin, N, theorem, aux, grid);
  if (!cond.all_hold()) {
    std::string failed;
    for (const auto& ch : cond.checks)
      if (!ch.holds) failed += (failed.empty() ? "" : "; ") + ch.name;
    throw Error(ErrorKind::HypothesisViolation, failed);
  }
  if (theorem == Theorem::signed_monotone) {
    opt.alpha = cond.alpha;
    IndexReport none;
    none.lower_finite = none.upper_finite = none.second_finite = false;
    return synthesize(N, none, theorem, opt);
  }
  if (theorem == Theorem::supercritical) {
    opt.inverse_power = cond.beta;
    if (!opt.inverse_witness) opt.inverse_witness = cond.inverse_witness;
  }
  return synthesize(N, cond.indices, theorem, opt);
}

// ---------------------------------------------------------------------------
// Grid certification.
// ---------------------------------------------------------------------------

struct CertifyRanges {
  double u_min = 1e-6;
  double u_max = 1e6;
  int u_points = 241;
  double eps_min = 1e-6;
  double eps_max = 1.0;
  int eps_points = 61;
};

namespace detail {

struct CheckAccumulator {
  std::vector<FloorCheck> checks;
  double tight = kInf;
  std::string violation;

  FloorCheck& get(const std::string& name, double claimed) {
    for (auto& c : checks)
      if (c.name == name) return c;
    checks.push_back({name, claimed, kInf, kInf});
    return checks.back();
  }

  // Records one evaluation: `value` must stay ≥ `claimed` (within rounding) and its
  // margin is `value − boundary`.
  void record(const std::string& name, double claimed, double value, double boundary, double u, double eps) {
    auto& c = get(name, claimed);
    c.observed = std::min(c.observed, value);
    c.margin = std::min(c.margin, value - boundary);
    const double tol = 1e-10 * (1.0 + std::abs(claimed));
    if (value < claimed - tol && violation.empty()) {
      violation = name + " below claimed floor at u=" + std::to_string(u) + ", eps=" + std::to_string(eps) +
                  " (value " + std::to_string(value) + " < " + std::to_string(claimed) + ")";
    }
  }

  void record_tight(const std::string& name, double slack, double scale, double u) {
    const double rel = slack / std::max(scale, 1e-300);
    tight = std::min(tight, rel);
    if (rel < -1e-9 && violation.empty()) {
      violation = name + " constraint violated at u=" + std::to_string(u);
    }
  }
};

}  // namespace detail

/// Re-evaluates the coefficient formulas on a log grid of (u, ε) with the
/// actual ratios u f'/f, u² f''/f and confirms every floor of the certificate.
inline Certificate certify(Certificate cert, const Nonlinearity& nonlin, const CertifyRanges& ranges = {}) {
  const double N = cert.dimension;
  const auto us = log_grid(ranges.u_min, ranges.u_max, ranges.u_points);
  const bool shifted = cert.prefactor_power != 0.0;
  const std::vector<double> eps = shifted ? log_grid(ranges.eps_min, ranges.eps_max, ranges.eps_points)
                                          : std::vector<double>{0.0};
  detail::CheckAccumulator acc;

  for (double u : us) {
    const auto d = evaluate(nonlin, u);
    if (cert.theorem == Theorem::lichnerowicz) {
      const double beta = cert.transform_power;
      const double g = d.value / u;  // f/u
      const double h = d.first;      // f'
      const double U = 2.0 / N * (1.0 + 1.0 / beta) * (1.0 + 1.0 / beta) - 2.0;
      const double W = 2.0 * beta * beta / N;
      acc.record("quartic", cert.quartic_floor, U, 0.0, u, 0.0);
      double P = (4.0 / N * (1.0 + beta) + 2.0) * g - 2.0 * h;
      if (cert.mixed_target == 1.0) {
        const double rad = std::max(0.0, (U - cert.gain) * W);
        P += 2.0 * std::sqrt(rad) * std::abs(g);
      }
      const double scale = std::abs(g) + std::abs(h) + std::abs(*cert.allowance);
      acc.record_tight("first-order coefficient", P - *cert.allowance, scale, u);
      continue;
    }
    if (!(d.value != 0.0)) continue;
    const double r1 = u * d.first / d.value;
    const double r2 = u * u * d.second / d.value;
    for (double e : eps) {
      CoefficientState s{N, cert.transform_power, cert.prefactor_power, cert.source_weight, e, u, r1, r2};
      switch (cert.theorem) {
        case Theorem::positive_subcritical:
        case Theorem::lane_emden:
          if (!shifted) {
            const auto c = first_kind_coefficients(s);
            const double l = cert.floor_level;
            acc.record("quartic", cert.quartic_floor, c.quartic, l, u, e);
            acc.record("square", cert.square_floor, c.square, l, u, e);
            const double cross = c.mixed + 2.0 * std::sqrt(std::max(0.0, (c.quartic - l) * (c.square - l)));
            acc.record("mixed", cert.mixed_floor, cross, 0.0, u, e);
            break;
          }
          [[fallthrough]];
        case Theorem::shifted:
        case Theorem::supercritical: {
          const auto c = cert.second_kind ? second_kind_coefficients(s) : first_kind_coefficients(s);
          const bool small = u < cert.cutoff_factor * e;
          const double L = cert.cutoff_factor;
          acc.record("quartic", cert.quartic_floor, c.quartic, 0.0, u, e);
          if (small) {
            acc.record("mixed (small set)", cert.mixed_floor - L, c.mixed, -L, u, e);
            acc.record("square (small set)", cert.square_floor - L, c.square, -L, u, e);
          } else {
            acc.record("mixed", cert.mixed_floor, c.mixed, 0.0, u, e);
            acc.record("square", cert.square_floor, c.square, 0.0, u, e);
          }
          break;
        }
        case Theorem::signed_monotone: {
          const auto c = first_kind_coefficients(s);
          const double L = cert.gain;
          acc.record("quartic", cert.quartic_floor, c.quartic, L, u, e);
          acc.record("square", cert.square_floor, c.square, 0.0, u, e);
          // (U−L)a² + W b² ≥ 2√((U−L)W) a|b|, then the remaining a·b terms must be
          // non-negative: (4(1+β)/N + 2) b + 2√((U−L)W)|b| − 2 f' ≥ 0.
          const double b = d.value / u;
          const double lead = 4.0 / N * (1.0 + cert.transform_power) + 2.0;
          const double cross = lead * b + 2.0 * std::sqrt(std::max(0.0, (c.quartic - L) * c.square)) * std::abs(b) -
                               2.0 * d.first;
          acc.record_tight("mixed", cross, std::abs(lead * b) + std::abs(2.0 * d.first), u);
          break;
        }
        case Theorem::lichnerowicz:
          break;
      }
    }
  }

  cert.checks = acc.checks;
  cert.tight_slack = acc.tight;
  cert.worst_margin = kInf;
  for (const auto& c : acc.checks) {
    if (c.margin < cert.worst_margin) {
      cert.worst_margin = c.margin;
      cert.worst_check = c.name;
    }
  }
  if (cert.theorem == Theorem::lichnerowicz) {
    cert.worst_margin = std::min(cert.worst_margin, cert.gain);
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : acc.checks) {
    checks.push_back({{"name", c.name}, {"claimed", c.claimed}, {"observed", c.observed}, {"margin", c.margin}});
  }
  cert.verification = {{"u_range", {ranges.u_min, ranges.u_max, ranges.u_points}},
                       {"eps_range", shifted ? nlohmann::json{ranges.eps_min, ranges.eps_max, ranges.eps_points}
                                             : nlohmann::json("not used")},
                       {"checks", checks},
                       {"tight_slack", extended_to_json(acc.tight)}};
  const bool floors_positive = cert.worst_margin > 1e-9;
  cert.certified = acc.violation.empty() && floors_positive;
  if (!cert.certified) {
    const std::string why = !acc.violation.empty()
                                ? acc.violation
                                : "worst margin " + std::to_string(cert.worst_margin) + " at " + cert.worst_check;
    cert.verification["failure"] = why;
  }
  return cert;
}

/// Same as certify() but raises Infeasible instead of returning an unverified certificate.
inline Certificate certify_or_throw(const Certificate& cert, const Nonlinearity& nonlin, const CertifyRanges& ranges = {}) {
  auto out = certify(cert, nonlin, ranges);
  if (!out.certified) throw Error(ErrorKind::Infeasible, out.verification.value("failure", std::string("certification failed")));
  return out;
}

// ---------------------------------------------------------------------------
// Parameters for the Harnack-to-bound implication (γ = 1, ε = 0).
// ---------------------------------------------------------------------------

struct HarnackBoundParameters {
  int regime = 1;
  double transform_power = 0.0;
  double source_weight = 0.0;
  double quartic = 0.0;
  double mixed_floor = 0.0;
  double square_floor = 0.0;
  double gain = 0.0;
  double weight_lo = 0.0;  // feasible d interval found by the scan
  double weight_hi = 0.0;
};

inline HarnackBoundParameters harnack_bound_parameters(double N, const IndexReport& ix) {
  HarnackBoundParameters p;
  const double lam = ix.lower, up = ix.upper;
  auto square = [&](double b, double d) { return 2.0 * b * b / N + d * (b + 1.0 - up); };
  auto feasible_interval = [&](double b, double cap, const std::function<bool(double)>& ok) {
    double lo = kInf, hi = -kInf;
    for (int i = 1; i < 2000; ++i) {
      const double d = cap * i / 2000.0;
      if (ok(d)) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    }
    (void)b;
    if (!(hi >= lo)) throw Error(ErrorKind::Infeasible, "no admissible source weight");
    return std::pair{lo, hi};
  };
  if (N <= 2.0) {
    p.regime = 1;
    const double b = std::max(1.0, up);
    auto ok = [&](double d) { return mixed_polynomial_min(lam, up, b, d, N) >= 1.0 && square(b, d) >= 2.0 / N; };
    auto [lo, hi] = feasible_interval(b, 1.0, ok);
    p.transform_power = b;
    p.weight_lo = lo;
    p.weight_hi = hi;
    p.source_weight = 0.5 * (lo + hi);
  } else if (up < (N + 1.0) / (N - 2.0)) {
    p.regime = 2;
    const double top = 2.0 / (N - 2.0);
    auto v0 = [&](double b) { return 4.0 / N * (1.0 + b) + b + 2.0 * (1.0 - up); };
    const double start = v0(0.0) > 0.0 ? 0.0 : bisect_root(v0, 0.0, top, 1e-12);
    const double b = 0.5 * (start + top);
    const double floor = v0(b);
    auto ok = [&](double d) {
      return mixed_polynomial_min(lam, up, b, d, N) > floor / 2.0 && square(b, d) >= b * b / N;
    };
    auto [lo, hi] = feasible_interval(b, 1.0, ok);
    p.transform_power = b;
    p.weight_lo = lo;
    p.weight_hi = hi;
    p.source_weight = 0.5 * (lo + hi);
  } else {
    p.regime = 3;
    const double top = 2.0 / (N - 2.0);
    auto at_cap = [&](double b) {
      const double d0 = 2.0 * b * b / (N * (up - 1.0 - b));
      return mixed_polynomial(up, b, d0, N);
    };
    const auto best = scan_maximum(at_cap, top * 1e-3, top * (1.0 - 1e-6), 1001);
    if (!(best.value > 0.0)) throw Error(ErrorKind::Infeasible, "mixed polynomial not positive at the cap");
    const double b = best.where;
    const double d0 = 2.0 * b * b / (N * (up - 1.0 - b));
    auto ok = [&](double d) { return mixed_polynomial(up, b, d, N) >= best.value / 2.0 && square(b, d) > 0.0; };
    auto [lo, hi] = feasible_interval(b, d0, ok);
    p.transform_power = b;
    p.weight_lo = lo;
    p.weight_hi = hi;
    p.source_weight = 0.5 * (lo + hi);
  }
  const double b = p.transform_power, d = p.source_weight;
  p.quartic = (2.0 / N * (1.0 + 1.0 / b) - 1.0) * (1.0 + 1.0 / b);
  p.mixed_floor = mixed_polynomial_min(lam, up, b, d, N);
  p.square_floor = square(b, d);
  p.gain = 0.5 * std::min({p.quartic, p.mixed_floor, p.square_floor});
  return p;
}

// ---------------------------------------------------------------------------
// Serialisation.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Certificate& c) {
  nlohmann::json j{{"theorem", to_string(c.theorem)},
                   {"recipe", c.recipe},
                   {"dimension", c.dimension},
                   {"indices", to_json(c.indices)},
                   {"auxiliary", c.second_kind ? "second-kind" : "first-kind"},
                   {"transform_power", c.transform_power},
                   {"prefactor_power", c.prefactor_power},
                   {"source_weight", c.source_weight},
                   {"floor_level", c.floor_level},
                   {"gain", c.gain},
                   {"cutoff_factor", c.cutoff_factor},
                   {"floors", {{"quartic", c.quartic_floor}, {"mixed", c.mixed_floor}, {"square", c.square_floor}}},
                   {"envelope", c.envelope},
                   {"constant", extended_to_json(c.constant)},
                   {"constant_breakdown", c.constant_breakdown},
                   {"certified", c.certified},
                   {"worst_margin", extended_to_json(c.worst_margin)},
                   {"worst_check", c.worst_check},
                   {"verification", c.verification}};
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.delta) j["delta"] = *c.delta;
  if (c.inverse_power) j["inverse_power"] = *c.inverse_power;
  if (c.allowance) j["curvature_allowance"] = *c.allowance;
  if (c.threshold) j["liouville_threshold"] = *c.threshold;
  return j;
}

}  // namespace semilin
