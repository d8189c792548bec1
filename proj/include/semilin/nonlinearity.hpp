#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "semilin/error.hpp"
#include "semilin/numeric.hpp"

namespace semilin {

// ---------------------------------------------------------------------------
// Families of nonlinear terms f in  Δu + f(u) = 0.
// ---------------------------------------------------------------------------

struct PowerLaw {
  double exponent = 1.0;
};

/// f(t) = Σ coefficient_i · t^{exponent_i}, every coefficient strictly positive.
struct PowerSum {
  std::vector<std::pair<double, double>> terms;  // (coefficient, exponent)
};

/// f(t) = linear·t − absorption·t^{absorption_exponent} + source·t^{source_exponent}
/// with absorption_exponent > 1 > source_exponent and non-negative weights.
struct Lichnerowicz {
  double linear = 0.0;
  double absorption = 0.0;
  double absorption_exponent = 2.0;
  double source = 0.0;
  double source_exponent = 0.0;
};

struct CustomTerm {
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;
  std::string label = "custom";
};

using Family = std::variant<PowerLaw, PowerSum, Lichnerowicz, CustomTerm>;

class Nonlinearity {
 public:
  static Nonlinearity power(double exponent) { return Nonlinearity(PowerLaw{exponent}, true); }

  static Nonlinearity power_sum(std::vector<std::pair<double, double>> terms) {
    if (terms.empty()) throw Error(ErrorKind::InvalidParameter, "power sum needs at least one term");
    for (const auto& [k, a] : terms) {
      if (!(k > 0.0)) throw Error(ErrorKind::InvalidParameter, "power sum coefficients must be positive");
      if (!std::isfinite(a)) throw Error(ErrorKind::InvalidParameter, "power sum exponents must be finite");
    }
    return Nonlinearity(PowerSum{std::move(terms)}, true);
  }

  static Nonlinearity lichnerowicz(double a, double b, double sigma, double c, double tau) {
    if (!(sigma > 1.0)) throw Error(ErrorKind::InvalidParameter, "absorption exponent must exceed 1");
    if (!(tau < 1.0)) throw Error(ErrorKind::InvalidParameter, "source exponent must be below 1");
    if (a < 0.0 || b < 0.0 || c < 0.0) throw Error(ErrorKind::InvalidParameter, "weights must be non-negative");
    const bool positive = b == 0.0 && (a > 0.0 || c > 0.0);
    return Nonlinearity(Lichnerowicz{a, b, sigma, c, tau}, positive);
  }

  static Nonlinearity custom(CustomTerm term, bool positive) {
    if (!term.value || !term.first || !term.second) {
      throw Error(ErrorKind::InvalidParameter, "custom nonlinearity needs f, f' and f''");
    }
    return Nonlinearity(std::move(term), positive);
  }

  const Family& family() const { return family_; }
  bool positive() const { return positive_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&family_);
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    if (auto p = as<PowerLaw>()) {
      os << "power:" << p->exponent;
    } else if (auto s = as<PowerSum>()) {
      os << "powersum:";
      for (std::size_t i = 0; i < s->terms.size(); ++i) {
        os << (i ? ";" : "") << s->terms[i].first << "," << s->terms[i].second;
      }
    } else if (auto l = as<Lichnerowicz>()) {
      os << "lichnerowicz:" << l->linear << "," << l->absorption << "," << l->absorption_exponent << ","
         << l->source << "," << l->source_exponent;
    } else {
      os << std::get<CustomTerm>(family_).label;
    }
    return os.str();
  }

 private:
  Nonlinearity(Family family, bool positive) : family_(std::move(family)), positive_(positive) {}

  Family family_;
  bool positive_;
};

struct Derivatives {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

inline Derivatives evaluate(const Nonlinearity& nonlin, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::NonPositiveArgument, "nonlinearity evaluated at t <= 0");
  struct Visitor {
    double t;
    Derivatives operator()(const PowerLaw& p) const {
      const double a = p.exponent;
      const double v = std::pow(t, a);
      return {v, a * v / t, a * (a - 1.0) * v / (t * t)};
    }
    Derivatives operator()(const PowerSum& s) const {
      Derivatives d;
      for (const auto& [k, a] : s.terms) {
        const double v = k * std::pow(t, a);
        d.value += v;
        d.first += a * v / t;
        d.second += a * (a - 1.0) * v / (t * t);
      }
      return d;
    }
    Derivatives operator()(const Lichnerowicz& l) const {
      const double s = l.absorption_exponent;
      const double q = l.source_exponent;
      const double ts = std::pow(t, s);
      const double tq = std::pow(t, q);
      return {l.linear * t - l.absorption * ts + l.source * tq,
              l.linear - l.absorption * s * ts / t + l.source * q * tq / t,
              -l.absorption * s * (s - 1.0) * ts / (t * t) + l.source * q * (q - 1.0) * tq / (t * t)};
    }
    Derivatives operator()(const CustomTerm& c) const {
      Derivatives d;
      try {
        d = {c.value(t), c.first(t), c.second(t)};
      } catch (const std::exception& e) {
        throw Error(ErrorKind::EvaluationFailure, std::string("custom handle threw: ") + e.what());
      }
      if (!std::isfinite(d.value) || !std::isfinite(d.first) || !std::isfinite(d.second)) {
        throw Error(ErrorKind::EvaluationFailure, "custom handle returned a non-finite value");
      }
      return d;
    }
  };
  return std::visit(Visitor{t}, nonlin.family());
}

// ---------------------------------------------------------------------------
// Structural indices: lower/upper index of t f'/f and lower index of t² f''/f.
// ---------------------------------------------------------------------------

enum class IndexMethod { analytic, sampled };

inline const char* to_string(IndexMethod m) { return m == IndexMethod::analytic ? "analytic" : "sampled"; }

struct SamplingGrid {
  double t_min = 1e-8;
  double t_max = 1e8;
  int points = 4096;
};

struct IndexReport {
  double lower = 0.0;   // inf t f'/f
  double upper = 0.0;   // sup t f'/f
  double second = 0.0;  // inf t² f''/f
  bool lower_finite = true;
  bool upper_finite = true;
  bool second_finite = true;
  IndexMethod method = IndexMethod::analytic;
  double slack = 0.0;  // widening applied to sampled values (one grid step of the ratio)
};

struct Ratios {
  double first = 0.0;   // t f'/f
  double second = 0.0;  // t² f''/f
};

inline Ratios ratios_at(const Nonlinearity& nonlin, double t) {
  const auto d = evaluate(nonlin, t);
  return {t * d.first / d.value, t * t * d.second / d.value};
}

namespace detail {

// A ratio is only meaningful away from zeros of f.
inline bool well_conditioned(const Derivatives& d, double t) {
  const double scale = std::abs(d.value) + std::abs(t * d.first);
  return std::abs(d.value) > 1e-12 * scale && d.value != 0.0;
}

struct SampledExtreme {
  double value = 0.0;
  bool finite = true;
  double step = 0.0;
};

// Extreme of g(log t) over the grid, polished by Brent's method between the
// neighbours of the best node, with a probe beyond the grid when the extreme
// sits on an endpoint to decide whether the true value is unbounded.
inline SampledExtreme sampled_extreme(const std::function<std::optional<double>(double)>& g,
                                      const std::vector<double>& ts, bool minimum) {
  const double sign = minimum ? 1.0 : -1.0;
  std::vector<double> vals(ts.size(), kInf);
  std::size_t best = ts.size();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (auto v = g(ts[i])) {
      vals[i] = sign * *v;
      if (best == ts.size() || vals[i] < vals[best]) best = i;
    }
  }
  if (best == ts.size()) throw Error(ErrorKind::SignChange, "no sample point with f away from zero");

  SampledExtreme out;
  double step = 0.0;
  if (best > 0 && std::isfinite(vals[best - 1])) step = std::max(step, std::abs(vals[best - 1] - vals[best]));
  if (best + 1 < ts.size() && std::isfinite(vals[best + 1])) step = std::max(step, std::abs(vals[best + 1] - vals[best]));
  out.step = step;

  double v = vals[best];
  if (best > 0 && best + 1 < ts.size()) {
    auto h = [&](double s) {
      auto r = g(std::exp(s));
      return r ? sign * *r : kInf;
    };
    auto polished = minimize_on(h, std::log(ts[best - 1]), std::log(ts[best + 1]));
    v = std::min(v, polished.value);
  } else {
    // Endpoint extreme: march outward by decades. Shrinking increments mean a
    // finite limit; increments that do not shrink mean the ratio is unbounded.
    const bool left = best == 0;
    double t = ts[best];
    double prev = v;
    double prev_inc = kInf;
    bool diverging = false;
    for (int k = 0; k < 8; ++k) {
      t = left ? t / 10.0 : t * 10.0;
      auto r = g(t);
      if (!r || !std::isfinite(*r)) break;
      const double cur = sign * *r;
      const double inc = prev - cur;
      if (inc > 0.0 && inc >= 0.9 * prev_inc && inc > 1e-9 * (1.0 + std::abs(cur))) diverging = true;
      if (inc > 0.0) prev_inc = inc;
      prev = std::min(prev, cur);
    }
    v = prev;
    out.finite = !diverging;
  }
  out.value = sign * v;
  if (!out.finite) out.value = minimum ? -kInf : kInf;
  return out;
}

}  // namespace detail

inline IndexReport compute_indices(const Nonlinearity& nonlin, const SamplingGrid& grid = {},
                                   bool require_second_finite = false) {
  IndexReport rep;
  if (auto p = nonlin.as<PowerLaw>()) {
    rep.lower = rep.upper = p->exponent;
    rep.second = p->exponent * (p->exponent - 1.0);
    return rep;
  }

  const auto ts = log_grid(grid.t_min, grid.t_max, grid.points);
  if (nonlin.positive()) {
    for (double t : ts) {
      if (!(evaluate(nonlin, t).value > 0.0)) {
        throw Error(ErrorKind::SignChange, "f declared positive but f(" + std::to_string(t) + ") <= 0");
      }
    }
  }

  auto first_ratio = [&](double t) -> std::optional<double> {
    const auto d = evaluate(nonlin, t);
    if (!detail::well_conditioned(d, t)) return std::nullopt;
    return t * d.first / d.value;
  };
  auto second_ratio = [&](double t) -> std::optional<double> {
    const auto d = evaluate(nonlin, t);
    if (!detail::well_conditioned(d, t)) return std::nullopt;
    return t * t * d.second / d.value;
  };

  if (auto s = nonlin.as<PowerSum>()) {
    // t f'/f is a weighted mean of the exponents with weights k_i t^{a_i}; it
    // increases from the smallest exponent (t → 0) to the largest (t → ∞).
    double lo = kInf, hi = -kInf;
    double at_lo = 0.0, at_hi = 0.0, least = kInf;
    for (const auto& [k, a] : s->terms) {
      (void)k;
      const double c = a * (a - 1.0);
      least = std::min(least, c);
      if (a < lo) {
        lo = a;
        at_lo = c;
      }
      if (a > hi) {
        hi = a;
        at_hi = c;
      }
    }
    rep.lower = lo;
    rep.upper = hi;
    // t² f''/f is the weighted mean of a_i(a_i − 1); its infimum is the smallest
    // such value whenever that value belongs to an extreme exponent.
    if (std::min(at_lo, at_hi) <= least) {
      rep.second = least;
    } else {
      auto ext = detail::sampled_extreme(second_ratio, ts, true);
      rep.second = std::max(least, ext.value - ext.step);
      rep.slack = ext.step;
      rep.method = IndexMethod::sampled;
    }
    return rep;
  }

  rep.method = IndexMethod::sampled;
  auto lo = detail::sampled_extreme(first_ratio, ts, true);
  auto hi = detail::sampled_extreme(first_ratio, ts, false);
  auto sec = detail::sampled_extreme(second_ratio, ts, true);
  rep.slack = std::max({lo.step, hi.step, sec.step});
  rep.lower = lo.finite ? lo.value - lo.step : -kInf;
  rep.upper = hi.finite ? hi.value + hi.step : kInf;
  rep.second = sec.finite ? sec.value - sec.step : -kInf;
  rep.lower_finite = lo.finite;
  rep.upper_finite = hi.finite;
  rep.second_finite = sec.finite;
  if (require_second_finite && !rep.second_finite) {
    throw Error(ErrorKind::Divergence, "t^2 f''/f is unbounded below");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Critical exponents.
// ---------------------------------------------------------------------------

struct ExponentSet {
  double gradient_threshold = kInf;  // (N+3)/(N−1), ∞ for N = 1
  double sobolev = kInf;             // (N+2)/(N−2), ∞ for N ≤ 2
  std::optional<double> removal_threshold;  // lower limit for the ε-removal power
};

inline double gradient_threshold(double N) {
  if (!(N >= 1.0)) throw Error(ErrorKind::InvalidParameter, "dimension must be >= 1");
  return N == 1.0 ? kInf : (N + 3.0) / (N - 1.0);
}

inline double sobolev_exponent(double N) {
  if (!(N >= 1.0)) throw Error(ErrorKind::InvalidParameter, "dimension must be >= 1");
  return N <= 2.0 ? kInf : (N + 2.0) / (N - 2.0);
}

struct RemovalBranches {
  double low_dimension = 0.0;   // 2N/(N+4)·(Λ − 1 − 2/N)
  double high_dimension = 0.0;  // 2(N−1)/(N+2)·Λ − 2
  bool uses_low = false;
};

inline RemovalBranches removal_branches(double N, double upper) {
  if (!(N >= 1.0)) throw Error(ErrorKind::InvalidParameter, "dimension must be >= 1");
  if (N == 1.0) throw Error(ErrorKind::RhoUndefined, "removal threshold is not defined for N = 1");
  RemovalBranches b;
  b.low_dimension = 2.0 * N / (N + 4.0) * (upper - 1.0 - 2.0 / N);
  b.high_dimension = 2.0 * (N - 1.0) / (N + 2.0) * upper - 2.0;
  b.uses_low = N <= 2.0 || (N < 3.0 && upper < (N + 1.0) / (N - 2.0));
  return b;
}

inline double removal_threshold(double N, double upper) {
  const auto b = removal_branches(N, upper);
  return b.uses_low ? b.low_dimension : b.high_dimension;
}

inline ExponentSet critical_exponents(double N, std::optional<double> upper = std::nullopt) {
  ExponentSet e;
  e.gradient_threshold = gradient_threshold(N);
  e.sobolev = sobolev_exponent(N);
  if (upper) e.removal_threshold = removal_threshold(N, *upper);
  return e;
}

// ---------------------------------------------------------------------------
// Hypotheses of the estimates.
// ---------------------------------------------------------------------------

enum class Theorem {
  positive_subcritical,  // f > 0, upper index below the gradient threshold
  signed_monotone,       // t^{-α} f non-increasing, f of any sign
  shifted,               // supercritical, ε-regularised estimate
  supercritical,         // supercritical with the ε removed
  lane_emden,            // pure powers below the Sobolev exponent
  lichnerowicz,          // a t − b t^σ + c t^τ
};

inline const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::positive_subcritical: return "positive-subcritical";
    case Theorem::signed_monotone: return "signed-monotone";
    case Theorem::shifted: return "shifted";
    case Theorem::supercritical: return "supercritical";
    case Theorem::lane_emden: return "lane-emden";
    case Theorem::lichnerowicz: return "lichnerowicz";
  }
  return "unknown";
}

/// Accepts the descriptive names above and the short numeric aliases used on
/// the command line ("1.3", "Thm1.3", ...).
inline Theorem parse_theorem(std::string id) {
  if (id.rfind("Thm", 0) == 0) id = id.substr(3);
  if (id == "1.3" || id == "positive-subcritical") return Theorem::positive_subcritical;
  if (id == "1.5" || id == "signed-monotone") return Theorem::signed_monotone;
  if (id == "1.7" || id == "shifted") return Theorem::shifted;
  if (id == "1.8" || id == "supercritical") return Theorem::supercritical;
  if (id == "1.9" || id == "lane-emden") return Theorem::lane_emden;
  if (id == "8" || id == "8.3" || id == "lichnerowicz") return Theorem::lichnerowicz;
  throw Error(ErrorKind::UnsupportedTheorem, "unknown estimate identifier '" + id + "'");
}

struct HypothesisAux {
  std::optional<double> alpha;  // exponent for the t^{-α} f monotonicity test
  std::optional<double> beta;   // exponent for the inverse-boundedness test
};

struct HypothesisCheck {
  std::string name;
  bool holds = false;
  bool sampled = false;
};

struct ConditionReport {
  Theorem theorem = Theorem::positive_subcritical;
  bool f_positive = false;
  bool upper_below_gradient_threshold = false;
  bool upper_in_supercritical_window = false;  // gradient threshold ≤ Λ < Sobolev exponent
  bool second_finite = false;
  std::optional<bool> power_monotone;  // t^{-α} f non-increasing for the chosen α
  std::optional<double> alpha;
  bool ratio_nondecreasing = false;
  bool lower_index_ok = false;
  bool vanishes_at_zero = false;  // t^{-1} f(t) → 0 as t → 0+
  bool inverse_bounded = false;   // t^{-1-β} f is h-inverse bounded
  std::optional<double> beta;
  std::function<double(double)> inverse_witness;  // h
  bool sampled = false;
  IndexReport indices;
  std::vector<HypothesisCheck> checks;

  bool all_hold() const {
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.holds; });
  }
};

namespace detail {

// t f' − α f ≤ 0 on (0,∞). Exact for power families; for the Lichnerowicz family
// the termwise sign test is sufficient and the grid decides otherwise.
inline std::pair<bool, bool> power_monotone(const Nonlinearity& nonlin, double alpha, const SamplingGrid& grid) {
  if (auto p = nonlin.as<PowerLaw>()) return {p->exponent <= alpha, false};
  if (auto s = nonlin.as<PowerSum>()) {
    double top = -kInf;
    for (const auto& term : s->terms) top = std::max(top, term.second);
    return {top <= alpha, false};
  }
  if (auto l = nonlin.as<Lichnerowicz>()) {
    const bool termwise = (l->linear == 0.0 || alpha >= 1.0) &&
                          (l->absorption == 0.0 || alpha <= l->absorption_exponent) &&
                          (l->source == 0.0 || alpha >= l->source_exponent);
    if (termwise) return {true, false};
  }
  for (double t : log_grid(grid.t_min, grid.t_max, grid.points)) {
    const auto d = evaluate(nonlin, t);
    const double g = t * d.first - alpha * d.value;
    if (g > 1e-12 * (std::abs(t * d.first) + std::abs(alpha * d.value))) return {false, true};
  }
  return {true, true};
}

// Smallest α making t f' − α f ≤ 0 wherever f > 0, or nullopt if f < 0
// somewhere forces an incompatible upper limit.
inline std::optional<double> least_monotone_power(const Nonlinearity& nonlin, const SamplingGrid& grid) {
  if (auto p = nonlin.as<PowerLaw>()) return p->exponent;
  if (auto s = nonlin.as<PowerSum>()) {
    double top = -kInf;
    for (const auto& term : s->terms) top = std::max(top, term.second);
    return top;
  }
  double need = -kInf, cap = kInf;
  for (double t : log_grid(grid.t_min, grid.t_max, grid.points)) {
    const auto d = evaluate(nonlin, t);
    if (d.value > 0.0) need = std::max(need, t * d.first / d.value);
    if (d.value < 0.0) cap = std::min(cap, t * d.first / d.value);
  }
  if (need > cap) return std::nullopt;
  return need;
}

inline std::pair<bool, bool> ratio_nondecreasing(const Nonlinearity& nonlin, const SamplingGrid& grid) {
  if (nonlin.as<PowerLaw>()) return {true, false};
  // For positive power sums t f'/f is a weighted mean whose derivative is a
  // variance, hence never negative.
  if (nonlin.as<PowerSum>()) return {true, false};
  for (double t : log_grid(grid.t_min, grid.t_max, grid.points)) {
    const auto d = evaluate(nonlin, t);
    if (!well_conditioned(d, t)) continue;
    const double r1 = t * d.first / d.value;
    const double r2 = t * t * d.second / d.value;
    if (r2 < r1 * (r1 - 1.0) - 1e-9 * (1.0 + std::abs(r1 * (r1 - 1.0)))) return {false, true};
  }
  return {true, true};
}

inline std::pair<bool, bool> vanishes_at_zero(const Nonlinearity& nonlin, const SamplingGrid& grid) {
  if (auto p = nonlin.as<PowerLaw>()) return {p->exponent > 1.0, false};
  if (auto s = nonlin.as<PowerSum>()) {
    double lo = kInf;
    for (const auto& term : s->terms) lo = std::min(lo, term.second);
    return {lo > 1.0, false};
  }
  if (auto l = nonlin.as<Lichnerowicz>()) return {l->linear == 0.0 && l->source == 0.0, false};
  // Custom: the ratio must be small at the bottom of the grid and shrinking.
  const double t0 = grid.t_min;
  const double a = std::abs(evaluate(nonlin, t0).value / t0);
  const double b = std::abs(evaluate(nonlin, 10.0 * t0).value / (10.0 * t0));
  return {a < b && a < 1e-6, true};
}

}  // namespace detail

inline ConditionReport check_hypotheses(const Nonlinearity& nonlin, double N, Theorem theorem,
                                        const HypothesisAux& aux = {}, const SamplingGrid& grid = {}) {
  if (!(N >= 1.0)) throw Error(ErrorKind::InvalidParameter, "dimension must be >= 1");
  ConditionReport rep;
  rep.theorem = theorem;
  rep.f_positive = nonlin.positive();

  const double p = gradient_threshold(N);
  const double ps = sobolev_exponent(N);

  const bool needs_indices = theorem != Theorem::signed_monotone && theorem != Theorem::lichnerowicz;
  if (needs_indices && rep.f_positive) {
    rep.indices = compute_indices(nonlin, grid);
    rep.sampled = rep.indices.method == IndexMethod::sampled;
  } else if (needs_indices) {
    // Ratios are meaningless for sign-changing f; leave indices empty.
    rep.indices.lower_finite = rep.indices.upper_finite = rep.indices.second_finite = false;
  }
  const auto& ix = rep.indices;
  rep.upper_below_gradient_threshold = rep.f_positive && ix.upper_finite && ix.upper < p;
  rep.upper_in_supercritical_window = rep.f_positive && ix.upper_finite && ix.upper >= p && ix.upper < ps;
  rep.second_finite = rep.f_positive && ix.second_finite;
  rep.lower_index_ok = rep.f_positive && (N >= 4.0 ? ix.lower >= 1.0 : ix.lower > 2.0);

  auto add = [&rep](std::string name, bool holds, bool sampled = false) {
    rep.checks.push_back({std::move(name), holds, sampled});
    rep.sampled = rep.sampled || sampled;
  };

  switch (theorem) {
    case Theorem::positive_subcritical:
      add("f positive", rep.f_positive);
      add("upper index below gradient threshold", rep.upper_below_gradient_threshold);
      add("second-order index finite", rep.second_finite);
      break;

    case Theorem::signed_monotone: {
      std::optional<double> alpha = aux.alpha;
      if (!alpha) {
        if (auto least = detail::least_monotone_power(nonlin, grid)) {
          alpha = *least > 1.0 ? *least : 1.0 + 2.0 / N;
        }
      }
      if (!alpha) {
        add("t^-alpha f non-increasing for some alpha", false, true);
        break;
      }
      rep.alpha = alpha;
      auto [mono, sampled] = detail::power_monotone(nonlin, *alpha, grid);
      rep.power_monotone = mono;
      add("alpha in (1, gradient threshold)", *alpha > 1.0 && *alpha < p);
      add("t^-alpha f non-increasing", mono, sampled);
      break;
    }

    case Theorem::shifted:
    case Theorem::supercritical: {
      auto [nondecr, s1] = rep.f_positive ? detail::ratio_nondecreasing(nonlin, grid) : std::pair{false, false};
      rep.ratio_nondecreasing = nondecr;
      add("f positive", rep.f_positive);
      add("upper index in [gradient threshold, Sobolev exponent)", rep.upper_in_supercritical_window);
      add("t f'/f non-decreasing", nondecr, s1);
      add(N >= 4.0 ? "lower index >= 1" : "lower index > 2", rep.lower_index_ok);
      if (theorem == Theorem::shifted) break;

      auto [v1, s2] = detail::vanishes_at_zero(nonlin, grid);
      rep.vanishes_at_zero = v1;
      add("t^-1 f -> 0 at 0+", v1, s2);

      if (N == 1.0) {
        add("removal threshold defined", false);
        break;
      }
      const double rho = removal_threshold(N, rep.f_positive ? ix.upper : 0.0);
      const double beta = aux.beta.value_or(0.5 * (rho + ix.lower - 1.0));
      rep.beta = beta;
      add("beta above removal threshold", beta > rho);
      // t^{-1-β} f has logarithmic slope t f'/f − 1 − β ≥ λ − 1 − β =: e, so for
      // t ≥ ε the ratio grows at least like (t/ε)^e; h(C) = max(1, C^{1/e}).
      const double e = ix.lower - 1.0 - beta;
      rep.inverse_bounded = rep.f_positive && e > 0.0;
      if (rep.inverse_bounded) {
        if (nonlin.as<PowerLaw>()) {
          rep.inverse_witness = [e](double C) { return std::pow(C, 1.0 / e); };
        } else {
          rep.inverse_witness = [e](double C) { return std::max(1.0, std::pow(C, 1.0 / e)); };
        }
      }
      add("t^(-1-beta) f inverse bounded", rep.inverse_bounded, ix.method == IndexMethod::sampled);
      break;
    }

    case Theorem::lane_emden: {
      const auto* pw = nonlin.as<PowerLaw>();
      add("pure power nonlinearity", pw != nullptr);
      add("exponent below Sobolev exponent", pw != nullptr && pw->exponent < ps);
      break;
    }

    case Theorem::lichnerowicz: {
      const auto* l = nonlin.as<Lichnerowicz>();
      add("Lichnerowicz family", l != nullptr);
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON input.
// ---------------------------------------------------------------------------

inline Nonlinearity nonlinearity_from_json(const nlohmann::json& j) {
  try {
    const auto family = j.at("family").get<std::string>();
    if (family == "power") return Nonlinearity::power(j.at("alpha").get<double>());
    if (family == "powersum") {
      std::vector<std::pair<double, double>> terms;
      for (const auto& t : j.at("terms")) terms.emplace_back(t.at(0).get<double>(), t.at(1).get<double>());
      return Nonlinearity::power_sum(std::move(terms));
    }
    if (family == "lichnerowicz") {
      return Nonlinearity::lichnerowicz(j.value("a", 0.0), j.value("b", 0.0), j.at("sigma").get<double>(),
                                        j.value("c", 0.0), j.value("tau", 0.0));
    }
    throw Error(ErrorKind::ParseError, "unknown family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

inline nlohmann::json to_json(const Nonlinearity& nonlin) {
  if (auto p = nonlin.as<PowerLaw>()) return {{"family", "power"}, {"alpha", p->exponent}};
  if (auto s = nonlin.as<PowerSum>()) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [k, a] : s->terms) terms.push_back({k, a});
    return {{"family", "powersum"}, {"terms", terms}};
  }
  if (auto l = nonlin.as<Lichnerowicz>()) {
    return {{"family", "lichnerowicz"}, {"a", l->linear},  {"b", l->absorption}, {"sigma", l->absorption_exponent},
            {"c", l->source},           {"tau", l->source_exponent}};
  }
  return {{"family", "custom"}, {"label", std::get<CustomTerm>(nonlin.family()).label}};
}

/// Short command-line form: "power:2", "powersum:1,2;1,3", "lichnerowicz:1,1,3,0,0.5".
inline Nonlinearity parse_nonlinearity(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    if (!text.empty() && text.front() == '{') return nonlinearity_from_json(nlohmann::json::parse(text));
    throw Error(ErrorKind::ParseError, "expected family:parameters, got '" + text + "'");
  }
  const std::string family = text.substr(0, colon);
  std::vector<std::vector<double>> groups(1);
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    try {
      groups.back().push_back(std::stod(token));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "bad number '" + token + "'");
    }
    token.clear();
  };
  for (char ch : text.substr(colon + 1)) {
    if (ch == ',') {
      flush();
    } else if (ch == ';') {
      flush();
      groups.emplace_back();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  if (family == "power" && groups.size() == 1 && groups[0].size() == 1) return Nonlinearity::power(groups[0][0]);
  if (family == "powersum") {
    std::vector<std::pair<double, double>> terms;
    for (const auto& g : groups) {
      if (g.size() != 2) throw Error(ErrorKind::ParseError, "powersum terms are coefficient,exponent pairs");
      terms.emplace_back(g[0], g[1]);
    }
    return Nonlinearity::power_sum(std::move(terms));
  }
  if (family == "lichnerowicz" && groups.size() == 1 && groups[0].size() == 5) {
    const auto& g = groups[0];
    return Nonlinearity::lichnerowicz(g[0], g[1], g[2], g[3], g[4]);
  }
  throw Error(ErrorKind::ParseError, "cannot parse nonlinearity '" + text + "'");
}

inline nlohmann::json to_json(const IndexReport& r) {
  return {{"lower_index", extended_to_json(r.lower)},
          {"upper_index", extended_to_json(r.upper)},
          {"second_index", extended_to_json(r.second)},
          {"lower_finite", r.lower_finite},
          {"upper_finite", r.upper_finite},
          {"second_finite", r.second_finite},
          {"method", to_string(r.method)},
          {"slack", r.slack}};
}

inline nlohmann::json to_json(const ExponentSet& e) {
  nlohmann::json j{{"gradient_threshold", extended_to_json(e.gradient_threshold)},
                   {"sobolev_exponent", extended_to_json(e.sobolev)}};
  if (e.removal_threshold) j["removal_threshold"] = *e.removal_threshold;
  return j;
}

inline nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"holds", c.holds}, {"sampled", c.sampled}});
  nlohmann::json j{{"theorem", to_string(r.theorem)}, {"all_hold", r.all_hold()}, {"sampled", r.sampled},
                   {"checks", checks}};
  if (r.alpha) j["alpha"] = *r.alpha;
  if (r.beta) j["beta"] = *r.beta;
  return j;
}

}  // namespace semilin
