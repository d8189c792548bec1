#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "semilin/battery.hpp"
#include "semilin/constants.hpp"

using namespace semilin;

namespace {

CoefficientState state(double N, double beta, double gamma, double d, double eps, double u, double r1, double r2) {
  CoefficientState s;
  s.dimension = N;
  s.transform_power = beta;
  s.prefactor_power = gamma;
  s.source_weight = d;
  s.shift = eps;
  s.u = u;
  s.first_ratio = r1;
  s.second_ratio = r2;
  return s;
}

double shifted_floor(double N, double beta) { return (2.0 / N * (1.0 + 1.0 / beta) - 1.0) * (1.0 + 1.0 / beta); }

}  // namespace

TEST(Coefficients, FirstKindPlainSquare) {
  const auto c = first_kind_coefficients(state(2, 1, 0, 0, 0, 0.7, 2, 2));
  EXPECT_DOUBLE_EQ(c.quartic, 2.0);
  EXPECT_DOUBLE_EQ(c.square, 1.0);
  EXPECT_DOUBLE_EQ(c.mixed, 2.0);
}

TEST(Coefficients, FirstKindVanishingShiftLimit) {
  for (double beta : {0.2, 0.5, 1.0, 1.7}) {
    for (double N : {3.0, 5.0}) {
      const double u = 0.8;
      const auto c = first_kind_coefficients(state(N, beta, 1, 0, 1e-12 * u, u, 2, 2));
      EXPECT_NEAR(c.quartic, shifted_floor(N, beta), 1e-8);
    }
  }
}

TEST(Coefficients, SecondKindQuarticIsShiftFree) {
  for (double beta : {0.3, 0.9}) {
    for (double eps : {0.0, 1e-3, 1.0}) {
      for (double u : {1e-3, 1.0, 50.0}) {
        const auto c = second_kind_coefficients(state(3, beta, 1, 0.2, eps, u, 2.5, 3.75));
        EXPECT_NEAR(c.quartic, shifted_floor(3, beta), 1e-13);
      }
    }
  }
}

TEST(Coefficients, KindsAgreeAtDegenerateCorner) {
  for (double beta : {0.25, 1.0, 3.0}) {
    const auto f = first_kind_coefficients(state(4, beta, 0, 0, 0, 1.3, 2, 2));
    const auto g = second_kind_coefficients(state(4, beta, 0, 0, 0, 1.3, 2, 2));
    EXPECT_NEAR(g.quartic, 2.0 / 4.0 * std::pow(1 + 1 / beta, 2) - 2.0, 1e-14);
    EXPECT_NEAR(f.quartic, g.quartic, 1e-14);
  }
}

TEST(Coefficients, SecondKindBoundaryOfAdmissibleInterval) {
  const auto c = second_kind_coefficients(state(4, 1, 1, 0, 0.1, 1, 2, 2));
  EXPECT_NEAR(c.quartic, 0.0, 1e-15);
}

TEST(Coefficients, UnshiftedCoefficientsIgnoreShift) {
  const auto a = first_kind_coefficients(state(5, 0.4, 0, 0, 1e-6, 2.0, 2, 2));
  for (double eps : {1e-4, 1e-2, 1.0}) {
    const auto b = first_kind_coefficients(state(5, 0.4, 0, 0, eps, 2.0, 2, 2));
    EXPECT_EQ(a.quartic, b.quartic);
    EXPECT_EQ(a.mixed, b.mixed);
    EXPECT_EQ(a.square, b.square);
  }
}

TEST(CrossTerm, ClosedFormAtBalancedPower) {
  EXPECT_NEAR(cross_term_bound(1.0, 0, 0, 3, 2, 2), 2.0, 1e-14);
  for (int N = 2; N <= 10; ++N) {
    const double beta = 2.0 / (N - 1.0);
    for (double L : linear_grid(1.1, gradient_threshold(N) - 0.01, 20)) {
      EXPECT_NEAR(cross_term_bound(beta, 0, 0, N, L, L * (L - 1)), 2.0 * ((N + 3.0) / (N - 1.0) - L), 1e-12);
    }
  }
}

TEST(CrossTerm, OneDimensionStaysAboveFour) {
  for (double L : {0.3, 1.0, 2.0, 5.0, 40.0}) {
    const double beta = std::max(L, 1.0);
    EXPECT_GE(cross_term_bound(beta, 0, 0, 1, L, L * (L - 1)), 4.0);
  }
}

TEST(CrossTerm, RadicalVanishesAtLargestLevel) {
  const double N = 4, beta = 0.7, L = 1.8;
  const double l = std::min(2.0 / N * std::pow(1 + 1 / beta, 2) - 2.0, 2.0 / N * beta * beta);
  EXPECT_NEAR(cross_term_bound(beta, 0, l, N, L, 0), 4.0 * (1 + beta) / N + 2.0 * (1 - L), 1e-12);
  EXPECT_THROW(cross_term_bound(beta, 0, l * 1.01, N, L, 0), Error);
}

TEST(CrossTerm, ShrinkingParametersKeepsFloorsFeasible) {
  const auto f = Nonlinearity::power(2.0);
  const auto cert = certify(synthesize(3.0, f, Theorem::positive_subcritical), f);
  ASSERT_TRUE(cert.certified);
  const double top = cross_term_bound(cert.transform_power, cert.source_weight, cert.floor_level, 3, 2, 2);
  for (double k : {0.9, 0.5, 0.1, 0.0}) {
    for (double m : {1.0, 0.5, 0.0}) {
      EXPECT_NO_THROW(cross_term_bound(cert.transform_power, k * cert.source_weight, m * cert.floor_level, 3, 2, 2));
    }
  }
  EXPECT_TRUE(std::isfinite(top));
}

TEST(MixedPolynomial, AxisFromBalancedWeight) {
  const double N = 5, L = 2, beta = 0.5;
  const double d = 2 * beta * beta / (N * (L - 1 - beta));
  EXPECT_NEAR(d, 0.2, 1e-15);
  EXPECT_NEAR(mixed_polynomial_axis(beta, d), 2.25, 1e-14);
  EXPECT_NEAR(mixed_polynomial_axis(beta, d), 0.5 + beta + N * (L - 1 - beta) / 2, 1e-14);
  // Axis ≥ Λ exactly when β ≤ Λ − (N−1)/(N−2).
  for (double b : linear_grid(0.05, 0.95, 19)) {
    const double dd = 2 * b * b / (N * (L - 1 - b));
    EXPECT_EQ(mixed_polynomial_axis(b, dd) >= L, b <= L - (N - 1) / (N - 2)) << b;
  }
}

TEST(MixedPolynomial, VertexIsMinimum) {
  const double beta = 0.4, d = 0.3, N = 5;
  const double axis = mixed_polynomial_axis(beta, d);
  const double vertex = mixed_polynomial(axis, beta, d, N);
  for (double x : linear_grid(axis - 5, axis + 5, 201)) EXPECT_GE(mixed_polynomial(x, beta, d, N), vertex - 1e-12);
  EXPECT_NEAR(mixed_polynomial_min(axis - 1, axis + 1, beta, d, N), vertex, 1e-15);
}

TEST(Recipe, LargeExponentCase) {
  const auto r = signed_monotone_recipe(3, 2.5);
  EXPECT_FALSE(r.small_exponent);
  EXPECT_NEAR(r.level, 6.0, 1e-12);
  EXPECT_NEAR(r.transform_power, 0.25, 1e-12);
  EXPECT_NEAR(r.gain, 4.0, 1e-12);
  EXPECT_NEAR(4 * r.level / (3 * r.level - 2), 1.5, 1e-12);
}

TEST(Recipe, GainSignTracksGradientThreshold) {
  for (double N : {2.0, 3.0, 5.0, 7.5}) {
    const double p = gradient_threshold(N);
    for (double a : linear_grid(1 + 4 / N + 1e-3, 2 * p, 60)) {
      if (std::abs(a - p) < 1e-9) continue;
      const auto r = signed_monotone_recipe(N, a);
      EXPECT_NEAR(4 * r.level / (N * r.level - 2), a - 1, 1e-12);
      EXPECT_EQ(r.gain > 0, a < p) << "N=" << N << " a=" << a;
    }
  }
}

TEST(Synthesis, SignedMonotoneSmallExponent) {
  const auto f = Nonlinearity::power(1.5);
  const auto c = certify(synthesize(4, f, Theorem::signed_monotone), f);
  EXPECT_NEAR(c.transform_power, 0.25, 1e-15);
  EXPECT_NEAR(c.gain, 2.0, 1e-15);
  EXPECT_TRUE(c.certified);
}

TEST(Synthesis, ShiftedFiveDimensionsQuadratic) {
  const auto [lo, hi] = detail::admissible_shift_interval(5, 2);
  EXPECT_NEAR(lo, 2.0 / 7.0, 1e-14);
  EXPECT_NEAR(hi, 2.0 / 3.0, 1e-14);
  const auto f = Nonlinearity::power(2.0);
  const auto c = certify(synthesize(5, f, Theorem::shifted), f);
  EXPECT_NEAR(c.transform_power, 0.5 * (lo + hi), 1e-14);
  EXPECT_GT(c.transform_power, lo);
  EXPECT_LT(c.transform_power, hi);
  EXPECT_FALSE(c.second_kind);
  EXPECT_GT(mixed_polynomial(2.0, c.transform_power, c.source_weight, 5), 0.0);
  EXPECT_TRUE(c.certified);
  EXPECT_GT(c.worst_margin, 0.0);
}

TEST(Synthesis, PinnedPowerOutsideIntervalIsRejected) {
  const auto f = Nonlinearity::power(2.0);
  SynthesisOptions opt;
  opt.transform_power = 2.0 / 3.0;
  try {
    synthesize(5, f, Theorem::shifted, opt);
    FAIL() << "expected Infeasible";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(Certify, BoundaryPowerHasZeroQuarticMargin) {
  const auto f = Nonlinearity::power(2.0);
  auto broken = synthesize(5, f, Theorem::shifted);
  broken.transform_power = 2.0 / 3.0;
  const auto c = certify(broken, f);
  EXPECT_FALSE(c.certified);
  EXPECT_EQ(c.worst_check, "quartic");
  EXPECT_NEAR(c.worst_margin, 0.0, 1e-12);
  try {
    certify_or_throw(broken, f);
    FAIL() << "expected Infeasible";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(Certify, EveryBatteryCertificateHasPositiveMargin) {
  for (const auto& c : battery::certificate_cases()) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto nonlin = parse_nonlinearity(c.f);
    SynthesisOptions opt;
    opt.alpha = c.alpha;
    const auto cert = certify(synthesize(c.N, nonlin, c.theorem, opt), nonlin);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_TRUE(cert.certified) << to_string(c.theorem) << " " << c.f << " N=" << c.N << " " << cert.worst_check;
    EXPECT_GT(cert.worst_margin, 0.0);
    EXPECT_LT(secs, 10.0);
    EXPECT_GT(cert.constant, 0.0);
  }
}

TEST(Certify, SynthesisRefusesUnmetHypotheses) {
  EXPECT_THROW(synthesize(5, Nonlinearity::power(2.0), Theorem::positive_subcritical), Error);
  EXPECT_THROW(synthesize(3, Nonlinearity::power(5.5), Theorem::lane_emden), Error);
}

TEST(Lichnerowicz, ThresholdTable) {
  EXPECT_DOUBLE_EQ(liouville_threshold(4, 1, 3), 1.0);
  EXPECT_DOUBLE_EQ(liouville_threshold(4, 3, 1.5), 1.5);
  for (double n : {1.0, 3.0, 6.0})
    for (double s : {1.1, 2.0, 9.0}) EXPECT_EQ(liouville_threshold(n, 0, s), 0.0);
}

TEST(Lichnerowicz, AllowanceBranches) {
  EXPECT_DOUBLE_EQ(lichnerowicz_constants(4, 1, 3, 0.5, 0.7).allowance, 0.7);
  EXPECT_DOUBLE_EQ(lichnerowicz_constants(4, 3, 1.5, 0.5, 0.7).allowance, 3.0);
  EXPECT_THROW(lichnerowicz_constants(4, 1, 3, 0.5, delta_ceiling(4)), Error);
  EXPECT_THROW(lichnerowicz_constants(4, 1, 3, 0.5, 0.0), Error);
}

TEST(Lichnerowicz, ThresholdIsHalfTheAllowanceSupremum) {
  for (double n : {2.0, 4.0, 9.0}) {
    for (double a : {0.5, 1.0, 3.0}) {
      for (double sigma : {1.05, 1.3, 2.0, 4.0}) {
        const double edge = 2.0 / (std::sqrt(n) * (std::sqrt(n) - 1.0));
        const double sup = sigma < 1.0 + edge ? 2.0 * (sigma - 1.0) * a : delta_ceiling(n);
        EXPECT_NEAR(liouville_threshold(n, a, sigma), 0.5 * sup, 1e-12);
        // Allowances approach the supremum from below.
        const auto c = lichnerowicz_constants(n, a, sigma, 0.5, 0.999999 * delta_ceiling(n));
        EXPECT_LE(c.allowance, sup);
      }
    }
  }
}

TEST(Lichnerowicz, RegimesCertify) {
  for (double sigma : {1.3, 1.8, 3.0}) {
    const auto f = Nonlinearity::lichnerowicz(1, 1, sigma, 0.5, 0.5);
    const auto c = certify(synthesize(4, f, Theorem::lichnerowicz), f);
    EXPECT_TRUE(c.certified) << sigma << " " << c.worst_check;
    EXPECT_GT(c.worst_margin, 0.0);
  }
}
