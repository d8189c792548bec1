#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include "semilin/error.hpp"

namespace semilin {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// `count` points spaced evenly in log t between `lo` and `hi` (inclusive).
inline std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[static_cast<std::size_t>(i)] = std::exp(a + s * (b - a));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline std::vector<double> linear_grid(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[static_cast<std::size_t>(i)] = lo + s * (hi - lo);
  }
  out.back() = hi;
  return out;
}

/// Root of a sign-changing function on [lo, hi], stopping once the bracket's
/// relative width drops below `rel_tol`.
inline double bisect_root(const std::function<double(double)>& fn, double lo, double hi,
                          double rel_tol = 1e-12) {
  const double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw Error(ErrorKind::NoRoot, "function does not change sign on the bracket");
  }
  auto done = [rel_tol](double a, double b) {
    return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b));
  };
  std::uintmax_t iterations = 400;
  auto bracket = boost::math::tools::bisect(fn, lo, hi, done, iterations);
  return 0.5 * (bracket.first + bracket.second);
}

struct Extremum {
  double where = 0.0;
  double value = 0.0;
};

/// Brent minimisation of `fn` on [lo, hi] to near machine precision.
inline Extremum minimize_on(const std::function<double(double)>& fn, double lo, double hi) {
  std::uintmax_t iterations = 500;
  auto best = boost::math::tools::brent_find_minima(fn, lo, hi, std::numeric_limits<double>::digits / 2,
                                                     iterations);
  return {best.first, best.second};
}

inline Extremum maximize_on(const std::function<double(double)>& fn, double lo, double hi) {
  auto neg = [&fn](double x) { return -fn(x); };
  auto found = minimize_on(neg, lo, hi);
  return {found.where, -found.value};
}

/// Scans `fn` on an even grid, then polishes the best sample with Brent's method
/// on the neighbouring cell. The polished result is never worse than the scan.
inline Extremum scan_minimum(const std::function<double(double)>& fn, double lo, double hi, int samples) {
  const auto xs = linear_grid(lo, hi, samples);
  std::size_t best = 0;
  double best_value = kInf;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = fn(xs[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double a = xs[best == 0 ? 0 : best - 1];
  const double b = xs[std::min(best + 1, xs.size() - 1)];
  Extremum out{xs[best], best_value};
  if (b > a) {
    auto polished = minimize_on(fn, a, b);
    if (polished.value < out.value) out = polished;
  }
  return out;
}

inline Extremum scan_maximum(const std::function<double(double)>& fn, double lo, double hi, int samples) {
  auto neg = [&fn](double x) { return -fn(x); };
  auto found = scan_minimum(neg, lo, hi, samples);
  return {found.where, -found.value};
}

/// Numbers that may legitimately be infinite serialise as the strings
/// "inf" / "-inf" since JSON has no literal for them.
inline nlohmann::json extended_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? nlohmann::json("inf") : nlohmann::json("-inf");
  if (std::isnan(x)) return nlohmann::json("nan");
  return nlohmann::json(x);
}

inline double extended_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace semilin
