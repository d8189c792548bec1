#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <json.hpp>

#include "semilin/error.hpp"
#include "semilin/nonlinearity.hpp"
#include "semilin/numeric.hpp"

namespace semilin {

// Weighted model spaces (ℝⁿ, dx², e^{−φ(|x|)} dx) with a radial weight φ.

struct WeightDerivatives {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

class RadialWeight {
 public:
  using Evaluator = std::function<WeightDerivatives(double)>;

  static RadialWeight flat() {
    RadialWeight w;
    w.kind_ = "flat";
    w.eval_ = [](double) { return WeightDerivatives{}; };
    w.params_ = nlohmann::json::object();
    return w;
  }

  /// φ(r) = strength · ln(scale² + r²).
  static RadialWeight logarithmic(double strength, double scale) {
    if (!(scale > 0.0)) throw Error(ErrorKind::InvalidParameter, "weight scale must be positive");
    RadialWeight w;
    w.kind_ = "appendix";
    w.eval_ = [strength, scale](double r) {
      const double s = scale * scale + r * r;
      return WeightDerivatives{strength * std::log(s), 2.0 * strength * r / s,
                               2.0 * strength * (scale * scale - r * r) / (s * s)};
    };
    w.params_ = {{"strength", strength}, {"mu", scale}};
    return w;
  }

  /// Cubic B-spline through φ tabulated on the uniform grid r_k = k·step,
  /// clamped to φ'(0) = 0.
  static RadialWeight tabulated(std::vector<double> values, double step) {
    if (values.size() < 4 || !(step > 0.0)) throw Error(ErrorKind::InvalidParameter, "table needs >= 4 samples");
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        values.data(), values.size(), 0.0, step, 0.0);
    RadialWeight w;
    w.kind_ = "custom-radial";
    const double r_end = step * static_cast<double>(values.size() - 1);
    w.eval_ = [spline, r_end](double r) {
      if (r > r_end) throw Error(ErrorKind::RangeViolation, "radius beyond the tabulated weight");
      return WeightDerivatives{(*spline)(r), spline->prime(r), spline->double_prime(r)};
    };
    w.params_ = {{"phi", "table"}, {"step", step}, {"values", values}};
    return w;
  }

  static RadialWeight from_function(Evaluator eval, std::string label) {
    RadialWeight w;
    w.kind_ = std::move(label);
    w.eval_ = std::move(eval);
    w.params_ = nlohmann::json::object();
    return w;
  }

  /// r ↦ φ(s r).
  RadialWeight rescaled(double s) const {
    RadialWeight w = *this;
    auto inner = eval_;
    w.eval_ = [inner, s](double r) {
      const auto d = inner(s * r);
      return WeightDerivatives{d.value, s * d.first, s * s * d.second};
    };
    w.params_["rescaled_by"] = s;
    return w;
  }

  WeightDerivatives operator()(double r) const { return eval_(r); }
  const std::string& kind() const { return kind_; }
  const nlohmann::json& params() const { return params_; }
  bool is_flat() const { return kind_ == "flat"; }

 private:
  std::string kind_;
  Evaluator eval_;
  nlohmann::json params_;
};

struct WeightedSpace {
  int n = 1;           // ambient dimension
  double N = 1.0;      // synthetic dimension
  RadialWeight weight = RadialWeight::flat();

  double extra_dimension() const { return N - static_cast<double>(n); }
};

inline WeightedSpace make_space(int n, double N, RadialWeight weight) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "ambient dimension must be >= 1");
  if (N < n) throw Error(ErrorKind::InvalidParameter, "synthetic dimension below ambient dimension");
  if (N == n && !weight.is_flat()) {
    for (double r : {0.0, 0.5, 1.0, 2.0}) {
      const auto d = weight(r);
      if (d.first != 0.0 || d.second != 0.0) {
        throw Error(ErrorKind::InvalidParameter, "non-constant weight requires N > n");
      }
    }
  }
  if (std::abs(weight(0.0).first) > 1e-8) throw Error(ErrorKind::InvalidParameter, "weight not smooth at the origin");
  return WeightedSpace{n, N, std::move(weight)};
}

inline WeightedSpace flat_space(int n) { return make_space(n, n, RadialWeight::flat()); }

// ---------------------------------------------------------------------------
// Curvature.
// ---------------------------------------------------------------------------

/// Hess φ − dφ⊗dφ/(N−n) at x (the ambient Ricci tensor vanishes).
inline Eigen::MatrixXd ricci_tensor(const WeightedSpace& space, const Eigen::VectorXd& x) {
  if (x.size() != space.n) throw Error(ErrorKind::DimensionMismatch, "point has the wrong dimension");
  const double r = x.norm();
  const auto w = space.weight(r);
  const Eigen::Index n = space.n;
  if (r == 0.0) return w.second * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd e = x / r;
  const Eigen::MatrixXd radial = e * e.transpose();
  Eigen::MatrixXd out = w.second * radial + (w.first / r) * (Eigen::MatrixXd::Identity(n, n) - radial);
  if (space.extra_dimension() > 0.0) out -= (w.first * w.first / space.extra_dimension()) * radial;
  return out;
}

inline double radial_eigenvalue(const WeightedSpace& space, double r) {
  const auto w = space.weight(r);
  const double m = space.extra_dimension();
  return w.second - (m > 0.0 ? w.first * w.first / m : 0.0);
}

inline double tangential_eigenvalue(const WeightedSpace& space, double r) {
  const auto w = space.weight(r);
  return r == 0.0 ? w.second : w.first / r;
}

struct CurvatureReport {
  double minimum = 0.0;
  double effective_K = 0.0;
  double attained_at = 0.0;
  std::string direction;  // "radial" or "tangential"
  double r_max = 0.0;
};

inline CurvatureReport curvature_bound(const WeightedSpace& space, double r_max, int samples = 4001) {
  if (!(r_max > 0.0)) throw Error(ErrorKind::InvalidParameter, "r_max must be positive");
  CurvatureReport rep;
  rep.r_max = r_max;
  auto radial = scan_minimum([&](double r) { return radial_eigenvalue(space, r); }, 0.0, r_max, samples);
  rep.minimum = radial.value;
  rep.attained_at = radial.where;
  rep.direction = "radial";
  if (space.n >= 2) {
    auto tangential = scan_minimum([&](double r) { return tangential_eigenvalue(space, r); }, 0.0, r_max, samples);
    if (tangential.value < rep.minimum) {
      rep.minimum = tangential.value;
      rep.attained_at = tangential.where;
      rep.direction = "tangential";
    }
  }
  rep.effective_K = positive_part(-rep.minimum);
  return rep;
}

// ---------------------------------------------------------------------------
// The explicit family showing the supercritical estimate is sharp.
// ---------------------------------------------------------------------------

struct AppendixSpace {
  double N = 5.0;
  double alpha = 2.0;
  int n = 4;
  double weight_strength = -1.0;  // Γ(n, α)
  double scale = 1.0;             // μ
  double K = 1.0;

  WeightedSpace space() const { return make_space(n, N, RadialWeight::logarithmic(weight_strength, scale)); }
};

inline int ambient_dimension_below(double N) { return static_cast<int>(std::ceil(N)) - 1; }

inline double weight_strength(int n, double alpha) { return 0.5 * (n - 2.0 - 4.0 / (alpha - 1.0)); }

/// c with min eigenvalue = c/μ²: the tangential value 2Γ/μ² at the origin, or an
/// interior radial minimum when the extra dimension is small.
inline double appendix_minimum_coefficient(int n, double N, double alpha) {
  const double g = weight_strength(n, alpha);
  const double m = N - n;
  if (m >= -2.0 * g / 3.0) return 2.0 * g;
  return -g * (m + 2.0 * g) * (m + 2.0 * g) / (4.0 * m * (m + g));
}

/// Builds the family member without the Sobolev restriction on α; only needs the
/// weight strength to be negative so the explicit solution and μ exist.
inline AppendixSpace appendix_family_member(double N, double alpha, double K) {
  if (!(N > 3.0)) throw Error(ErrorKind::InvalidParameter, "family requires N > 3");
  if (!(K > 0.0)) throw Error(ErrorKind::InvalidParameter, "K must be positive");
  AppendixSpace a;
  a.N = N;
  a.alpha = alpha;
  a.n = ambient_dimension_below(N);
  a.weight_strength = weight_strength(a.n, alpha);
  if (!(alpha > 1.0) || !(a.weight_strength < 0.0)) {
    throw Error(ErrorKind::InvalidAlpha, "alpha must lie in (1, (n+2)/(n-2))");
  }
  a.K = K;
  a.scale = std::sqrt(-appendix_minimum_coefficient(a.n, N, alpha) / K);
  return a;
}

inline AppendixSpace appendix_space(double N, double alpha, double K) {
  if (!(N > 3.0)) throw Error(ErrorKind::InvalidParameter, "family requires N > 3");
  if (!(alpha > 1.0) || !(alpha < sobolev_exponent(N))) {
    throw Error(ErrorKind::InvalidAlpha, "alpha must lie in (1, (N+2)/(N-2))");
  }
  return appendix_family_member(N, alpha, K);
}

struct RadialJet {
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;
};

inline double weighted_laplacian(const WeightedSpace& space, const RadialJet& jet, double r) {
  if (r == 0.0) return space.n * jet.d2u;
  return jet.d2u + (space.n - 1.0) / r * jet.du - space.weight(r).first * jet.du;
}

struct AppendixPoint {
  RadialJet jet;
  double laplacian = 0.0;
  double residual = 0.0;  // Δ_w u + u^α
};

inline RadialJet appendix_profile(const AppendixSpace& a, double r) {
  const double k = 2.0 / (a.alpha - 1.0);
  const double s = a.scale * a.scale + r * r;
  const double amp = a.scale * std::sqrt(4.0 * a.n / (a.alpha - 1.0));
  const double u = std::pow(amp / s, k);
  return {u, -2.0 * k * r * u / s, -2.0 * k * u * (1.0 / s - 2.0 * (k + 1.0) * r * r / (s * s))};
}

inline AppendixPoint appendix_solution(const AppendixSpace& a, double r) {
  AppendixPoint p;
  p.jet = appendix_profile(a, r);
  p.laplacian = weighted_laplacian(a.space(), p.jet, r);
  p.residual = p.laplacian + std::pow(p.jet.u, a.alpha);
  return p;
}

/// max |Δ_w u + u^α| / max u^α over `points` radii in [0, r_max].
inline double appendix_relative_residual(const AppendixSpace& a, double r_max = 100.0, int points = 2001) {
  double worst = 0.0, top = 0.0;
  for (double r : linear_grid(0.0, r_max, points)) {
    const auto p = appendix_solution(a, r);
    worst = std::max(worst, std::abs(p.residual));
    top = std::max(top, std::pow(p.jet.u, a.alpha));
  }
  return worst / top;
}

struct Sharpness {
  double supremum = 0.0;
  double ratio = 0.0;  // supremum / K
  double attained_at = 0.0;
};

/// sup over r of |∇u|²/u² + u^{α−1} for the explicit solution.
inline Sharpness sharpness_quantity(const AppendixSpace& a) {
  auto q = [&a](double r) {
    const auto j = appendix_profile(a, r);
    return j.du * j.du / (j.u * j.u) + std::pow(j.u, a.alpha - 1.0);
  };
  auto best = scan_maximum(q, 0.0, 20.0 * a.scale, 4001);
  return {best.value, best.value / a.K, best.where};
}

inline double sharpness_closed_form(const AppendixSpace& a) {
  const double k = 2.0 / (a.alpha - 1.0);
  const double mu2 = a.scale * a.scale;
  return k <= a.n ? 2.0 * k * a.n / mu2 : 2.0 * k * k * k / ((2.0 * k - a.n) * mu2);
}

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

inline WeightedSpace space_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const double N = j.value("N", static_cast<double>(n));
    const auto& w = j.contains("weight") ? j.at("weight") : nlohmann::json{{"kind", "flat"}};
    const auto kind = w.at("kind").get<std::string>();
    if (kind == "flat") return make_space(n, N, RadialWeight::flat());
    if (kind == "appendix") {
      const double strength = w.contains("strength") ? w.at("strength").get<double>()
                                                     : weight_strength(n, w.at("alpha").get<double>());
      return make_space(n, N, RadialWeight::logarithmic(strength, w.at("mu").get<double>()));
    }
    if (kind == "custom-radial") {
      return make_space(n, N, RadialWeight::tabulated(w.at("values").get<std::vector<double>>(),
                                                      w.at("step").get<double>()));
    }
    throw Error(ErrorKind::ParseError, "unknown weight kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

/// "flat:4", "appendix:N,alpha,K" or a JSON object.
inline WeightedSpace parse_space(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    try {
      return space_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, e.what());
    }
  }
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "flat") return flat_space(std::stoi(tail));
    if (head == "appendix") {
      std::vector<double> v;
      std::size_t pos = 0;
      while (pos <= tail.size()) {
        const auto comma = tail.find(',', pos);
        v.push_back(std::stod(tail.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      if (v.size() != 3) throw Error(ErrorKind::ParseError, "appendix space needs N,alpha,K");
      return appendix_space(v[0], v[1], v[2]).space();
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::ParseError, "malformed space '" + text + "'");
  }
  throw Error(ErrorKind::ParseError, "unknown space '" + text + "'");
}

inline nlohmann::json to_json(const WeightedSpace& s) {
  nlohmann::json w = s.weight.params();
  w["kind"] = s.weight.kind();
  return {{"n", s.n}, {"N", s.N}, {"weight", w}};
}

inline nlohmann::json to_json(const CurvatureReport& c) {
  return {{"minimum", c.minimum}, {"effective_K", c.effective_K}, {"attained_at", c.attained_at},
          {"direction", c.direction}, {"r_max", c.r_max}};
}

inline nlohmann::json to_json(const AppendixSpace& a) {
  return {{"N", a.N}, {"alpha", a.alpha}, {"n", a.n}, {"weight_strength", a.weight_strength},
          {"mu", a.scale}, {"K", a.K}};
}

}  // namespace semilin
