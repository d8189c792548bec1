#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "semilin/nonlinearity.hpp"

using namespace semilin;

namespace {

// Independent oracle: dense log-grid sampling of t f'(t)/f(t).
std::pair<double, double> sampled_ratio_range(const Nonlinearity& f, double lo, double hi, int n) {
  double mn = kInf, mx = -kInf;
  for (double t : log_grid(lo, hi, n)) {
    const auto d = evaluate(f, t);
    const double r = t * d.first / d.value;
    mn = std::min(mn, r);
    mx = std::max(mx, r);
  }
  return {mn, mx};
}

}  // namespace

TEST(Evaluate, MonomialDerivatives) {
  const auto d = evaluate(Nonlinearity::power(2.0), 3.0);
  EXPECT_DOUBLE_EQ(d.value, 9.0);
  EXPECT_DOUBLE_EQ(d.first, 6.0);
  EXPECT_DOUBLE_EQ(d.second, 2.0);
}

TEST(Evaluate, AllenCahnAtEquilibrium) {
  const auto d = evaluate(Nonlinearity::lichnerowicz(1, 1, 3, 0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(d.value, 0.0);
  EXPECT_DOUBLE_EQ(d.first, -2.0);
  EXPECT_DOUBLE_EQ(d.second, -6.0);
}

TEST(Evaluate, PowerSum) {
  const auto d = evaluate(Nonlinearity::power_sum({{1, 2}, {1, 3}}), 2.0);
  EXPECT_DOUBLE_EQ(d.value, 12.0);
  EXPECT_DOUBLE_EQ(d.first, 16.0);
  EXPECT_DOUBLE_EQ(d.second, 14.0);
}

TEST(Evaluate, RejectsNonPositiveArgument) {
  EXPECT_THROW(evaluate(Nonlinearity::power(2.0), 0.0), Error);
  EXPECT_THROW(evaluate(Nonlinearity::power(2.0), -1.0), Error);
}

TEST(Evaluate, DerivativesMatchCentredDifferences) {
  // Richardson-extrapolated centred differences, accurate to O(h⁴).
  auto richardson = [](const std::function<double(double)>& g, double t, double h) {
    auto centred = [&](double s) { return (g(t + s) - g(t - s)) / (2 * s); };
    return (4 * centred(h / 2) - centred(h)) / 3;
  };
  for (const auto& f : {Nonlinearity::power(2.7), Nonlinearity::power_sum({{2, 0.5}, {0.3, 3.2}})}) {
    for (double t : log_grid(1e-6, 1e6, 61)) {
      const auto d = evaluate(f, t);
      const double fd1 = richardson([&](double s) { return evaluate(f, s).value; }, t, 1e-3 * t);
      const double fd2 = richardson([&](double s) { return evaluate(f, s).first; }, t, 1e-3 * t);
      EXPECT_NEAR(fd1 / d.first, 1.0, 1e-8) << f.describe() << " t=" << t;
      EXPECT_NEAR(fd2 / d.second, 1.0, 1e-8) << f.describe() << " t=" << t;
    }
  }
}

TEST(Nonlinearity, LichnerowiczParameterValidation) {
  EXPECT_THROW(Nonlinearity::lichnerowicz(1, 1, 1.0, 0, 0.5), Error);
  EXPECT_THROW(Nonlinearity::lichnerowicz(1, 1, 3, 0, 1.0), Error);
  EXPECT_THROW(Nonlinearity::lichnerowicz(-1, 1, 3, 0, 0.5), Error);
  EXPECT_FALSE(Nonlinearity::lichnerowicz(1, 1, 3, 0, 0.5).positive());
  EXPECT_TRUE(Nonlinearity::lichnerowicz(1, 0, 3, 1, 0.5).positive());
}

TEST(Indices, PowerLawIsExact) {
  for (double a : {0.5, 1.0, 2.0, 3.7}) {
    const auto ix = compute_indices(Nonlinearity::power(a));
    EXPECT_EQ(ix.lower, a);
    EXPECT_EQ(ix.upper, a);
    EXPECT_EQ(ix.second, a * (a - 1.0));
  }
}

TEST(Indices, PowerSumEndpointsAgreeWithSampling) {
  const auto f = Nonlinearity::power_sum({{1, 2}, {1, 3}});
  const auto ix = compute_indices(f);
  EXPECT_DOUBLE_EQ(ix.lower, 2.0);
  EXPECT_DOUBLE_EQ(ix.upper, 3.0);
  EXPECT_NEAR(ix.second, 2.0, 1e-12);
  const auto [mn, mx] = sampled_ratio_range(f, 1e-8, 1e8, 20001);
  EXPECT_NEAR(mn, 2.0, 1e-7);
  EXPECT_NEAR(mx, 3.0, 1e-7);

  const auto g = compute_indices(Nonlinearity::power_sum({{1, 0.5}, {1, 2}}));
  EXPECT_DOUBLE_EQ(g.lower, 0.5);
  EXPECT_DOUBLE_EQ(g.upper, 2.0);
}

TEST(Indices, RatioStaysInsideIndicesAtRandomPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logt(std::log(1e-6), std::log(1e6));
  const std::vector<Nonlinearity> family{Nonlinearity::power(2.5), Nonlinearity::power_sum({{3, 1.1}, {0.2, 2.9}}),
                                         Nonlinearity::lichnerowicz(1, 0, 3, 2, 0.3)};
  for (const auto& f : family) {
    const auto ix = compute_indices(f);
    const double slack = ix.method == IndexMethod::sampled ? 1e-9 + ix.slack : 0.0;
    EXPECT_LE(ix.lower, ix.upper);
    for (int k = 0; k < 10000; ++k) {
      const double t = std::exp(logt(rng));
      const auto d = evaluate(f, t);
      const double r = t * d.first / d.value;
      EXPECT_GE(r, ix.lower - slack - 1e-12);
      EXPECT_LE(r, ix.upper + slack + 1e-12);
    }
  }
}

TEST(Indices, SampledCustomFamilyIsTagged) {
  CustomTerm term{[](double t) { return t * t + std::log1p(t); }, [](double t) { return 2 * t + 1 / (1 + t); },
                  [](double t) { return 2 - 1 / ((1 + t) * (1 + t)); }, "t^2+log(1+t)"};
  const auto ix = compute_indices(Nonlinearity::custom(term, true));
  EXPECT_EQ(ix.method, IndexMethod::sampled);
  EXPECT_NEAR(ix.lower, 1.0, 1e-3);
  EXPECT_NEAR(ix.upper, 2.0, 1e-3);
}

TEST(Exponents, FourDimensions) {
  const auto e = critical_exponents(4.0);
  EXPECT_DOUBLE_EQ(e.sobolev, 3.0);
  EXPECT_DOUBLE_EQ(e.gradient_threshold, 7.0 / 3.0);
}

TEST(Exponents, OneDimensionIsUnbounded) {
  const auto e = critical_exponents(1.0);
  EXPECT_TRUE(std::isinf(e.sobolev));
  EXPECT_TRUE(std::isinf(e.gradient_threshold));
  EXPECT_THROW(removal_threshold(1.0, 2.0), Error);
}

TEST(Exponents, RemovalThresholdFiveDimensions) {
  EXPECT_NEAR(*critical_exponents(5.0, 2.0).removal_threshold, 2.0 / 7.0, 1e-15);
}

TEST(Exponents, MonotoneInDimension) {
  double prev_s = kInf, prev_p = kInf;
  for (double N : linear_grid(1.01, 30.0, 400)) {
    const double p = gradient_threshold(N);
    EXPECT_LE(p, prev_p);
    prev_p = p;
    if (N > 2.0) {
      const double s = sobolev_exponent(N);
      EXPECT_LE(s, prev_s);
      EXPECT_LT(p, s);
      prev_s = s;
    }
  }
  EXPECT_TRUE(std::isinf(sobolev_exponent(2.0)));
}

TEST(Exponents, RemovalThresholdBelowUpperMinusOne) {
  for (double N : {2.5, 3.0, 4.0, 6.0, 11.0}) {
    const double p = gradient_threshold(N), ps = sobolev_exponent(N);
    for (double L : linear_grid(p, std::isinf(ps) ? p + 5 : ps, 50)) {
      if (L >= ps) continue;
      EXPECT_LT(1.0 + removal_threshold(N, L), L) << "N=" << N << " L=" << L;
    }
  }
}

TEST(Exponents, RemovalBranchesAtInternalBoundary) {
  // Both branches evaluated on the switching line; the jump is reported, not assumed away.
  for (double N : {2.2, 2.5, 2.8}) {
    const double edge = (N + 1.0) / (N - 2.0);
    const auto b = removal_branches(N, edge);
    const double expected_jump = 2.0 * (N - 1.0) / (N + 2.0) * edge - 2.0 -
                                 2.0 * N / (N + 4.0) * (edge - 1.0 - 2.0 / N);
    EXPECT_NEAR(b.high_dimension - b.low_dimension, expected_jump, 1e-12);
    EXPECT_GT(std::abs(b.high_dimension - b.low_dimension), 1e-3);
  }
}

TEST(Hypotheses, QuadraticAtFiveDimensions) {
  const auto f = Nonlinearity::power(2.0);
  EXPECT_FALSE(check_hypotheses(f, 5.0, Theorem::positive_subcritical).all_hold());
  const auto shifted = check_hypotheses(f, 5.0, Theorem::shifted);
  EXPECT_TRUE(shifted.all_hold());
  EXPECT_TRUE(shifted.ratio_nondecreasing);
  EXPECT_TRUE(shifted.upper_in_supercritical_window);
}

TEST(Hypotheses, AllenCahnMonotoneExponent) {
  const auto f = Nonlinearity::lichnerowicz(1, 1, 3, 0, 0.5);
  HypothesisAux aux;
  aux.alpha = 3.0;
  const auto low = check_hypotheses(f, 1.5, Theorem::signed_monotone, aux);
  EXPECT_TRUE(low.power_monotone.value());
  EXPECT_TRUE(low.all_hold());  // 3 < (N+3)/(N−1) = 9 at N = 1.5
  EXPECT_FALSE(check_hypotheses(f, 3.0, Theorem::signed_monotone, aux).all_hold());  // 3 is not below 3
}

TEST(Hypotheses, InverseBoundedPower) {
  HypothesisAux aux;
  aux.beta = 0.5;
  const auto rep = check_hypotheses(Nonlinearity::power(2.0), 5.0, Theorem::supercritical, aux);
  EXPECT_TRUE(rep.inverse_bounded);
  ASSERT_TRUE(rep.inverse_witness);
  EXPECT_DOUBLE_EQ(rep.inverse_witness(3.0), 9.0);
  // t^{0.5} ≤ C forces t ≤ C².
  for (double C : {0.5, 2.0, 10.0}) EXPECT_LE(std::pow(rep.inverse_witness(C), 0.5), C * (1 + 1e-15));
}

TEST(Hypotheses, RatioMonotonicityMatchesSecondIndexCriterion) {
  // t f'/f non-decreasing iff t² f''/f ≥ r(r−1) pointwise.
  const std::vector<Nonlinearity> family{Nonlinearity::power_sum({{1, 2}, {1, 3}}),
                                         Nonlinearity::power_sum({{1, 0.5}, {1, 2}}),
                                         Nonlinearity::lichnerowicz(1, 0, 3, 1, 0.5)};
  for (const auto& f : family) {
    bool pointwise = true;
    for (double t : log_grid(1e-8, 1e8, 4096)) {
      const auto d = evaluate(f, t);
      const double r = t * d.first / d.value;
      pointwise = pointwise && t * t * d.second / d.value >= r * (r - 1.0) - 1e-12;
    }
    EXPECT_EQ(detail::ratio_nondecreasing(f, {}).first, pointwise) << f.describe();
  }
}

TEST(Parsing, ShortFormsAndJson) {
  EXPECT_EQ(parse_nonlinearity("power:2").describe(), "power:2");
  EXPECT_EQ(parse_nonlinearity("powersum:1,2;1,3").describe(), "powersum:1,2;1,3");
  EXPECT_EQ(parse_nonlinearity("lichnerowicz:1,1,3,0,0.5").describe(), "lichnerowicz:1,1,3,0,0.5");
  const auto f = parse_nonlinearity("power:2.5");
  EXPECT_EQ(nonlinearity_from_json(to_json(f)).describe(), f.describe());
  EXPECT_THROW(parse_nonlinearity("cubic"), Error);
  EXPECT_THROW(parse_nonlinearity("power:a"), Error);
}

TEST(Parsing, TheoremIdentifiers) {
  EXPECT_EQ(parse_theorem("1.9"), Theorem::lane_emden);
  EXPECT_EQ(parse_theorem("Thm1.7"), Theorem::shifted);
  EXPECT_EQ(parse_theorem("signed-monotone"), Theorem::signed_monotone);
  EXPECT_THROW(parse_theorem("2.4"), Error);
}
