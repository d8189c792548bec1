#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <boost/math/interpolators/cubic_hermite.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "semilin/constants.hpp"
#include "semilin/error.hpp"
#include "semilin/modelspace.hpp"
#include "semilin/nonlinearity.hpp"
#include "semilin/numeric.hpp"

namespace semilin {

// Radial boundary value problem  u'' + ((n−1)/r − φ')u' + f(u) = 0 on [0, 2R],
// u'(0) = 0, u(2R) = boundary value.

struct RadialGrid {
  std::vector<double> r;
  double h = 0.0;
  double R = 0.0;  // estimate radius; the grid covers [0, 2R]

  std::size_t size() const { return r.size(); }
  std::size_t intervals() const { return r.size() - 1; }
};

inline RadialGrid make_grid(double R, int intervals) {
  if (!(R > 0.0)) throw Error(ErrorKind::InvalidParameter, "radius must be positive");
  if (intervals < 4) throw Error(ErrorKind::InvalidParameter, "grid needs at least 4 intervals");
  RadialGrid g;
  g.R = R;
  g.h = 2.0 * R / intervals;
  g.r.resize(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) g.r[static_cast<std::size_t>(i)] = g.h * i;
  g.r.back() = 2.0 * R;
  return g;
}

struct SolverConfig {
  int intervals = 2048;
  double tolerance = 1e-10;  // Newton step relative to max |u|
  int max_iterations = 100;
  double damping = 1.0;      // first trial step length
  int max_halvings = 40;
  double blowup_factor = 1e8;
  std::function<double(double)> initial_guess;  // defaults to the boundary value
};

struct SolutionProfile {
  WeightedSpace space;
  Nonlinearity nonlin = Nonlinearity::power(1.0);
  RadialGrid grid;
  std::vector<double> u, du, d2u;
  double boundary_value = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool analytic_derivatives = false;
};

namespace detail {

inline double drift_coefficient(const WeightedSpace& space, double r) {
  return (space.n - 1.0) / r - space.weight(r).first;
}

// Discrete residual of the scheme; entry i for i < M, the last node is Dirichlet.
inline std::vector<double> bvp_residual(const WeightedSpace& space, const Nonlinearity& nonlin, const RadialGrid& g,
                                        const std::vector<double>& u, std::vector<double>* fvals = nullptr) {
  const std::size_t M = g.intervals();
  const double h2 = g.h * g.h;
  std::vector<double> res(M);
  for (std::size_t i = 0; i < M; ++i) {
    const double f = evaluate(nonlin, u[i]).value;
    if (fvals) (*fvals)[i] = f;
    if (i == 0) {
      res[i] = 2.0 * space.n * (u[1] - u[0]) / h2 + f;
    } else {
      const double c = drift_coefficient(space, g.r[i]);
      res[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2 + c * (u[i + 1] - u[i - 1]) / (2.0 * g.h) + f;
    }
  }
  return res;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Central differences inside, symmetry at the origin, one-sided second-order
// formulas at the outer boundary.
inline void differentiate(const RadialGrid& g, const std::vector<double>& u, std::vector<double>& du,
                          std::vector<double>& d2u) {
  const std::size_t M = g.intervals();
  const double h = g.h;
  du.assign(M + 1, 0.0);
  d2u.assign(M + 1, 0.0);
  d2u[0] = 2.0 * (u[1] - u[0]) / (h * h);
  for (std::size_t i = 1; i < M; ++i) {
    du[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    d2u[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
  }
  du[M] = (3.0 * u[M] - 4.0 * u[M - 1] + u[M - 2]) / (2.0 * h);
  d2u[M] = (2.0 * u[M] - 5.0 * u[M - 1] + 4.0 * u[M - 2] - u[M - 3]) / (h * h);
}

}  // namespace detail

/// Damped Newton on the centred scheme with a ghost node at the origin. Trial
/// steps are halved until the iterate stays positive and the residual drops.
inline SolutionProfile solve_radial_bvp(const WeightedSpace& space, const Nonlinearity& nonlin, double R,
                                        double boundary_value, const SolverConfig& config = {}) {
  if (!(boundary_value > 0.0)) throw Error(ErrorKind::InvalidParameter, "boundary value must be positive");
  SolutionProfile p;
  p.space = space;
  p.nonlin = nonlin;
  p.boundary_value = boundary_value;
  p.grid = make_grid(R, config.intervals);
  const auto& g = p.grid;
  const std::size_t M = g.intervals();
  const double h = g.h, h2 = h * h;
  const double cap = config.blowup_factor * boundary_value;

  std::vector<double> u(M + 1, boundary_value);
  if (config.initial_guess) {
    for (std::size_t i = 0; i < M; ++i) u[i] = config.initial_guess(g.r[i]);
  }
  u[M] = boundary_value;
  if (*std::min_element(u.begin(), u.end()) <= 0.0) {
    throw Error(ErrorKind::InvalidParameter, "initial guess must be positive");
  }

  std::vector<double> fvals(M);
  // Residual level at which rounding in the second difference dominates.
  auto floor_of = [&](const std::vector<double>& v, const std::vector<double>& f) {
    return 64.0 * std::numeric_limits<double>::epsilon() * std::max(detail::max_abs(v) / h2, detail::max_abs(f));
  };

  std::vector<double> drift(M, 0.0);
  for (std::size_t i = 1; i < M; ++i) drift[i] = detail::drift_coefficient(space, g.r[i]);

  auto res = detail::bvp_residual(space, nonlin, g, u, &fvals);
  double norm = detail::max_abs(res);
  bool converged = norm == 0.0;

  Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  int it = 0;
  for (; it < config.max_iterations && !converged; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * M);
    for (std::size_t i = 0; i < M; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double fp = evaluate(nonlin, u[i]).first;
      if (i == 0) {
        trip.emplace_back(0, 0, -2.0 * space.n / h2 + fp);
        trip.emplace_back(0, 1, 2.0 * space.n / h2);
        continue;
      }
      trip.emplace_back(ii, ii - 1, 1.0 / h2 - drift[i] / (2.0 * h));
      trip.emplace_back(ii, ii, -2.0 / h2 + fp);
      if (i + 1 < M) trip.emplace_back(ii, ii + 1, 1.0 / h2 + drift[i] / (2.0 * h));
    }
    J.setFromTriplets(trip.begin(), trip.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "singular Newton matrix");
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(M));
    for (std::size_t i = 0; i < M; ++i) rhs[static_cast<Eigen::Index>(i)] = -res[i];
    const Eigen::VectorXd step = lu.solve(rhs);
    const bool tiny_step = step.cwiseAbs().maxCoeff() <= config.tolerance * detail::max_abs(u);

    double t = config.damping;
    bool accepted = false, ever_positive = false;
    std::vector<double> trial(u);
    std::vector<double> trial_f(M);
    for (int k = 0; k <= config.max_halvings; ++k, t *= 0.5) {
      bool positive = true;
      for (std::size_t i = 0; i < M; ++i) {
        trial[i] = u[i] + t * step[static_cast<Eigen::Index>(i)];
        if (!(trial[i] > 0.0)) positive = false;
      }
      if (!positive) continue;
      ever_positive = true;
      auto trial_res = detail::bvp_residual(space, nonlin, g, trial, &trial_f);
      const double trial_norm = detail::max_abs(trial_res);
      if (trial_norm < (1.0 - 1e-4 * t) * norm || trial_norm <= floor_of(trial, trial_f)) {
        u = trial;
        res = std::move(trial_res);
        fvals = trial_f;
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Already at the rounding floor: nothing left to gain.
      if (ever_positive && (tiny_step || norm <= floor_of(u, fvals))) {
        converged = true;
        break;
      }
      throw Error(ever_positive ? ErrorKind::NoConvergence : ErrorKind::PositivityLost,
                  "no acceptable Newton step after " + std::to_string(config.max_halvings) + " halvings");
    }
    if (detail::max_abs(u) > cap) throw Error(ErrorKind::BlowUp, "solution exceeds the blow-up cap");
    converged = tiny_step;
  }
  if (!converged) throw Error(ErrorKind::NoConvergence, "iteration budget exhausted");

  p.u = std::move(u);
  p.residual_norm = norm;
  p.iterations = it;
  detail::differentiate(g, p.u, p.du, p.d2u);
  return p;
}

/// Samples the explicit solution of the sharpness family with exact derivatives.
inline SolutionProfile appendix_profile_on_grid(const AppendixSpace& a, double R, int intervals) {
  SolutionProfile p;
  p.space = a.space();
  p.nonlin = Nonlinearity::power(a.alpha);
  p.grid = make_grid(R, intervals);
  p.analytic_derivatives = true;
  for (double r : p.grid.r) {
    const auto j = appendix_profile(a, r);
    p.u.push_back(j.u);
    p.du.push_back(j.du);
    p.d2u.push_back(j.d2u);
  }
  p.boundary_value = p.u.back();
  return p;
}

inline SolutionProfile constant_profile(const WeightedSpace& space, const Nonlinearity& nonlin, double R, double c,
                                        int intervals = 256) {
  SolutionProfile p;
  p.space = space;
  p.nonlin = nonlin;
  p.grid = make_grid(R, intervals);
  p.u.assign(p.grid.size(), c);
  p.du.assign(p.grid.size(), 0.0);
  p.d2u.assign(p.grid.size(), 0.0);
  p.boundary_value = c;
  p.analytic_derivatives = true;
  return p;
}

// ---------------------------------------------------------------------------
// Auxiliary fields.
// ---------------------------------------------------------------------------

struct AuxiliaryParams {
  double transform_power = 1.0;
  double prefactor_power = 0.0;
  double source_weight = 0.0;
  double shift = 0.0;
  bool second_kind = false;
};

inline AuxiliaryParams auxiliary_params(const Certificate& c, double shift = 0.0) {
  return {c.transform_power, c.prefactor_power, c.source_weight, shift, c.second_kind};
}

struct DiagnosticField {
  std::vector<double> w, F, G, Q;
};

/// Q = |∇u|²/u² + weight·f(u)/u and both auxiliary functions at every node.
inline DiagnosticField diagnostics(const SolutionProfile& p, const AuxiliaryParams& a, double q_weight = 1.0) {
  if (*std::min_element(p.u.begin(), p.u.end()) <= 0.0) throw Error(ErrorKind::PositivityLost, "profile not positive");
  DiagnosticField d;
  const double b = a.transform_power, g = a.prefactor_power, e = a.shift;
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    const double u = p.u[i], du = p.du[i];
    const double fu = evaluate(p.nonlin, u).value / u;
    const double grad = du * du / (u * u);
    d.Q.push_back(grad + q_weight * fu);
    const double w_first = std::pow(u, -b);
    const double w_second = std::pow(u + e, -b);
    d.w.push_back(a.second_kind ? w_second : w_first);
    d.F.push_back(std::pow(u + e, -b * g) * (b * b * grad + a.source_weight * fu));
    const double grad_shift = du * du / ((u + e) * (u + e));
    d.G.push_back(std::pow(w_second, g) * (b * b * grad_shift + a.source_weight * fu));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Estimate checks.
// ---------------------------------------------------------------------------

enum class EstimateKind { gradient_strong, gradient_weak, eps_first, eps_second, universal_bound, harnack, lichnerowicz };

inline const char* to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::gradient_strong: return "gradient-strong";
    case EstimateKind::gradient_weak: return "gradient-weak";
    case EstimateKind::eps_first: return "eps-I";
    case EstimateKind::eps_second: return "eps-II";
    case EstimateKind::universal_bound: return "universal-bound";
    case EstimateKind::harnack: return "harnack";
    case EstimateKind::lichnerowicz: return "lichnerowicz";
  }
  return "unknown";
}

inline EstimateKind parse_estimate_kind(const std::string& s) {
  for (auto k : {EstimateKind::gradient_strong, EstimateKind::gradient_weak, EstimateKind::eps_first,
                 EstimateKind::eps_second, EstimateKind::universal_bound, EstimateKind::harnack,
                 EstimateKind::lichnerowicz}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorKind::ParseError, "unknown estimate kind '" + s + "'");
}

/// The estimate each certificate naturally controls.
inline EstimateKind default_kind(const Certificate& c) {
  switch (c.theorem) {
    case Theorem::signed_monotone: return EstimateKind::gradient_weak;
    case Theorem::shifted: return c.second_kind ? EstimateKind::eps_second : EstimateKind::eps_first;
    case Theorem::lichnerowicz: return EstimateKind::lichnerowicz;
    default: return EstimateKind::gradient_strong;
  }
}

struct EstimateReport {
  EstimateKind kind = EstimateKind::gradient_strong;
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool pass = false;
  double constant = 0.0;
  double K = 0.0;
  double R = 0.0;
  std::optional<double> shift;
  double attained_at = 0.0;
};

inline double harnack_constant(double log_gradient_constant, double K, double R) {
  return std::exp(2.0 * std::sqrt(log_gradient_constant * (K * R * R + 1.0)));
}

/// Largest root-free ε with f(Lε)/(Lε) = K + 1/R².
inline double choose_epsilon(const Nonlinearity& nonlin, double L, double K, double R) {
  if (!(L > 0.0) || !(R > 0.0) || K < 0.0) throw Error(ErrorKind::InvalidParameter, "need L > 0, R > 0, K >= 0");
  const double target = K + 1.0 / (R * R);
  auto gap = [&](double t) { return evaluate(nonlin, t).value / t - target; };
  if (gap(1.0) == 0.0) return 1.0 / L;
  double lo = 1.0, hi = 1.0;
  if (gap(1.0) > 0.0) {
    while (gap(lo) > 0.0) {
      lo *= 0.5;
      if (lo < 1e-150) throw Error(ErrorKind::NoRoot, "f(t)/t does not fall to the target near 0");
    }
    hi = 2.0 * lo;
  } else {
    while (gap(hi) < 0.0) {
      hi *= 2.0;
      if (hi > 1e150) throw Error(ErrorKind::NoRoot, "f(t)/t stays below the target");
    }
    lo = 0.5 * hi;
  }
  return bisect_root(gap, lo, hi, 1e-13) / L;
}

namespace detail {
inline bool kind_allowed(Theorem t, EstimateKind k, bool second_kind) {
  switch (t) {
    case Theorem::positive_subcritical:
    case Theorem::supercritical:
    case Theorem::lane_emden:
      return k == EstimateKind::gradient_strong || k == EstimateKind::gradient_weak ||
             k == EstimateKind::universal_bound || k == EstimateKind::harnack;
    case Theorem::signed_monotone:
      return k == EstimateKind::gradient_weak || k == EstimateKind::harnack;
    case Theorem::shifted:
      return k == (second_kind ? EstimateKind::eps_second : EstimateKind::eps_first);
    case Theorem::lichnerowicz:
      return k == EstimateKind::lichnerowicz || k == EstimateKind::harnack;
  }
  return false;
}
}  // namespace detail

/// Measures the estimate's left side over {r ≤ R} and assembles its right side
/// with the certificate constant scaled by `constant_factor`.
inline EstimateReport check_estimate(const SolutionProfile& p, const Certificate& cert, double K, double R,
                                     EstimateKind kind, std::optional<double> shift = std::nullopt,
                                     double constant_factor = 1.0) {
  if (!detail::kind_allowed(cert.theorem, kind, cert.second_kind)) {
    throw Error(ErrorKind::KindMismatch, std::string(to_string(kind)) + " is not controlled by this certificate");
  }
  const bool eps_kind = kind == EstimateKind::eps_first || kind == EstimateKind::eps_second;
  if (eps_kind && !(shift && *shift > 0.0)) throw Error(ErrorKind::InvalidParameter, "shifted estimates need eps > 0");
  EstimateReport rep;
  rep.kind = kind;
  rep.constant = cert.constant * constant_factor;
  rep.K = K;
  rep.R = R;
  rep.shift = shift;
  const double beta = cert.transform_power;
  double lo = kInf, hi = 0.0;
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    if (p.grid.r[i] > R * (1.0 + 1e-12)) break;
    const double u = p.u[i], du = p.du[i];
    const double fu = evaluate(p.nonlin, u).value / u;
    double value = 0.0;
    switch (kind) {
      case EstimateKind::gradient_strong: value = du * du / (u * u) + fu; break;
      case EstimateKind::gradient_weak:
      case EstimateKind::lichnerowicz: value = du * du / (u * u); break;
      case EstimateKind::universal_bound: value = fu; break;
      case EstimateKind::eps_first: value = std::pow(u + *shift, -beta) * (du * du / (u * u) + fu); break;
      case EstimateKind::eps_second:
        value = std::pow(u + *shift, -beta) * (du * du / ((u + *shift) * (u + *shift)) + fu);
        break;
      case EstimateKind::harnack:
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        continue;
    }
    if (value > rep.measured) {
      rep.measured = value;
      rep.attained_at = p.grid.r[i];
    }
  }
  const double base = K + 1.0 / (R * R);
  switch (kind) {
    case EstimateKind::gradient_strong:
    case EstimateKind::gradient_weak:
    case EstimateKind::universal_bound:
      rep.bound = rep.constant * base;
      break;
    case EstimateKind::eps_first:
    case EstimateKind::eps_second: {
      const double e = *shift;
      const double source = evaluate(p.nonlin, cert.cutoff_factor * e).value / e;
      rep.bound = rep.constant * std::pow(e, -beta) * (base + source);
      break;
    }
    case EstimateKind::lichnerowicz:
      rep.bound = rep.constant * (1.0 / (R * R) + std::sqrt(K) / R + positive_part(2.0 * K - cert.allowance.value_or(0.0)));
      break;
    case EstimateKind::harnack:
      rep.measured = hi / lo;
      rep.bound = harnack_constant(rep.constant, K, R);
      break;
  }
  rep.ratio = rep.bound > 0.0 ? rep.measured / rep.bound : (rep.measured > 0.0 ? kInf : 0.0);
  rep.pass = rep.measured <= rep.bound;
  return rep;
}

/// Shifted estimate over log-spaced ε ∈ [1e−6, 1]·u(0) together with the
/// balancing ε of f(Lε)/(Lε) = K + 1/R² when it exists.
inline std::vector<EstimateReport> check_shifted_sweep(const SolutionProfile& p, const Certificate& cert, double K,
                                                       double R, int count = 13) {
  std::vector<double> shifts = log_grid(1e-6 * p.u.front(), p.u.front(), count);
  try {
    shifts.push_back(choose_epsilon(p.nonlin, cert.cutoff_factor, K, R));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoRoot) throw;
  }
  std::vector<EstimateReport> out;
  for (double e : shifts) out.push_back(check_estimate(p, cert, K, R, default_kind(cert), e));
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise check of the elliptic inequalities for the auxiliary functions.
// ---------------------------------------------------------------------------

struct DefectReport {
  double min_defect = kInf;  // min over nodes of ΔF − right side
  double at_r = 0.0;
  double scale = 0.0;        // max F² over the checked nodes
  double h = 0.0;
  std::size_t nodes = 0;
};

inline DefectReport verify_elliptic_inequality(const SolutionProfile& p, const AuxiliaryParams& a, bool second_kind,
                                               double K, std::optional<double> dimension = std::nullopt) {
  const double N = dimension.value_or(p.space.N);
  const auto& g = p.grid;
  const std::size_t M = g.intervals();
  const double h = g.h;
  const double b = a.transform_power, gm = a.prefactor_power, d = a.source_weight, e = a.shift;

  std::vector<double> field(M + 1), a_val(M + 1), b_val(M + 1), log_w(M + 1), pref(M + 1);
  std::vector<QuadraticCoefficients> coef(M + 1);
  for (std::size_t i = 0; i <= M; ++i) {
    const double u = p.u[i], du = p.du[i];
    const auto fd = evaluate(p.nonlin, u);
    if (!(fd.value > 0.0)) throw Error(ErrorKind::RangeViolation, "f must be positive on the profile's range");
    CoefficientState s{N, b, gm, d, e, u, u * fd.first / fd.value, u * u * fd.second / fd.value};
    b_val[i] = fd.value / u;
    if (!second_kind) {
      a_val[i] = b * b * du * du / (u * u);
      pref[i] = std::pow(u + e, -b * gm);
      log_w[i] = -b * du / u;
      coef[i] = first_kind_coefficients(s);
    } else {
      a_val[i] = b * b * du * du / ((u + e) * (u + e));
      pref[i] = std::pow(u + e, -b * gm);  // w^γ with w = (u+ε)^{−β}
      log_w[i] = -b * du / (u + e);
      coef[i] = second_kind_coefficients(s);
    }
    field[i] = pref[i] * (a_val[i] + d * b_val[i]);
  }

  DefectReport rep;
  rep.h = h;
  for (std::size_t i = 0; i < M; ++i) {
    if (g.r[i] > 1.5 * g.R * (1.0 + 1e-12)) break;
    double lap, slope;
    if (i == 0) {
      lap = 2.0 * p.space.n * (field[1] - field[0]) / (h * h);
      slope = 0.0;
    } else {
      slope = (field[i + 1] - field[i - 1]) / (2.0 * h);
      lap = (field[i + 1] - 2.0 * field[i] + field[i - 1]) / (h * h) + detail::drift_coefficient(p.space, g.r[i]) * slope;
    }
    const double q = p.u[i] / (p.u[i] + e);
    const double drift = second_kind ? 2.0 * (1.0 / b - 1.0 + gm) : 2.0 * (1.0 / b - 1.0 + gm * q);
    const auto& c = coef[i];
    const double A = a_val[i], B = b_val[i];
    const double rhs =
        pref[i] * (-2.0 * K * A + c.quartic * A * A + c.mixed * A * B + c.square * B * B) + drift * slope * log_w[i];
    const double defect = lap - rhs;
    if (defect < rep.min_defect) {
      rep.min_defect = defect;
      rep.at_r = g.r[i];
    }
    rep.scale = std::max(rep.scale, field[i] * field[i]);
    ++rep.nodes;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Scaling structure of Δu + u^α = 0 on flat space.
// ---------------------------------------------------------------------------

struct ScalingReport {
  double interpolated_deviation = 0.0;  // rescaled interpolant against s²Q(u)(s·)
  double resolved_deviation = 0.0;      // independent solve of the rescaled problem
  double deviation = 0.0;
  double rescaled_residual = 0.0;       // relative discrete residual of the interpolant
};

inline ScalingReport scaling_check(const SolutionProfile& p, double s, const SolverConfig& config = {}) {
  const auto* pw = p.nonlin.as<PowerLaw>();
  if (!pw || !p.space.weight.is_flat()) throw Error(ErrorKind::InvalidParameter, "scaling needs flat space and a power");
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidParameter, "scale factor must be positive");
  const double alpha = pw->exponent;
  const double k = 2.0 / (alpha - 1.0);
  const double R = p.grid.R;
  const int M = static_cast<int>(p.grid.intervals());

  boost::math::interpolators::cubic_hermite<std::vector<double>> interp(std::vector<double>(p.grid.r),
                                                                        std::vector<double>(p.u),
                                                                        std::vector<double>(p.du));
  auto q_of = [alpha](double u, double du) { return du * du / (u * u) + std::pow(u, alpha - 1.0); };

  // u_s(ρ) = s^k u(sρ) lives on [0, 2R/s]; sample it on a grid with the same node count.
  const RadialGrid gs = make_grid(R / s, M);
  std::vector<double> us(gs.size()), dus(gs.size());
  double top = 0.0;
  ScalingReport rep;
  std::vector<double> reference(gs.size());
  for (std::size_t j = 0; j < gs.size(); ++j) {
    const double x = std::min(s * gs.r[j], p.grid.r.back());
    us[j] = std::pow(s, k) * interp(x);
    dus[j] = std::pow(s, k + 1.0) * interp.prime(x);
    reference[j] = s * s * q_of(interp(x), interp.prime(x));
    top = std::max(top, reference[j]);
  }
  for (std::size_t j = 0; j < gs.size(); ++j) {
    rep.interpolated_deviation = std::max(rep.interpolated_deviation, std::abs(q_of(us[j], dus[j]) - reference[j]));
  }

  SolverConfig cfg = config;
  cfg.intervals = M;
  const auto solved = solve_radial_bvp(p.space, p.nonlin, R / s, us.back(), cfg);
  for (std::size_t j = 0; j < gs.size(); ++j) {
    rep.resolved_deviation =
        std::max(rep.resolved_deviation, std::abs(q_of(solved.u[j], solved.du[j]) - reference[j]));
  }
  rep.interpolated_deviation /= top;
  rep.resolved_deviation /= top;
  rep.deviation = std::max(rep.interpolated_deviation, rep.resolved_deviation);

  std::vector<double> f_unused(gs.intervals());
  const auto res = detail::bvp_residual(p.space, p.nonlin, gs, us, &f_unused);
  rep.rescaled_residual = detail::max_abs(res) / std::max(detail::max_abs(f_unused), 1e-300);
  return rep;
}

// ---------------------------------------------------------------------------
// Export.
// ---------------------------------------------------------------------------

inline void write_profile_csv(std::ostream& os, const SolutionProfile& p, const AuxiliaryParams& a) {
  const auto d = diagnostics(p, a);
  os << "r,u,du,Q,F,G\n";
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.grid.r[i], p.u[i], p.du[i], d.Q[i],
                      d.F[i], d.G[i]);
  }
}

inline nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json j{{"kind", to_string(r.kind)}, {"measured", r.measured},
                   {"bound", extended_to_json(r.bound)}, {"ratio", extended_to_json(r.ratio)},
                   {"pass", r.pass}, {"constant", extended_to_json(r.constant)},
                   {"K", r.K}, {"R", r.R}, {"attained_at", r.attained_at}};
  if (r.shift) j["eps"] = *r.shift;
  return j;
}

inline nlohmann::json to_json(const DefectReport& r) {
  return {{"min_defect", r.min_defect}, {"at_r", r.at_r}, {"scale", r.scale}, {"h", r.h}, {"nodes", r.nodes}};
}

inline nlohmann::json profile_summary(const SolutionProfile& p) {
  return {{"space", to_json(p.space)}, {"f", p.nonlin.describe()}, {"R", p.grid.R},
          {"intervals", p.grid.intervals()}, {"boundary_value", p.boundary_value},
          {"u_center", p.u.front()}, {"residual_norm", p.residual_norm}, {"iterations", p.iterations}};
}

}  // namespace semilin
