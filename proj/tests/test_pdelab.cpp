#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "semilin/battery.hpp"
#include "semilin/pdelab.hpp"

using namespace semilin;

namespace {

Certificate certificate(double N, const Nonlinearity& f, Theorem t, std::optional<double> alpha = std::nullopt) {
  SynthesisOptions opt;
  opt.alpha = alpha;
  return certify(synthesize(N, f, t, opt), f);
}

SolverConfig with_intervals(int m) {
  SolverConfig c;
  c.intervals = m;
  return c;
}

}  // namespace

TEST(Solver, HarmonicConstant) {
  const auto p = solve_radial_bvp(flat_space(3), Nonlinearity::lichnerowicz(0, 0, 2, 0, 0.5), 1.0, 1.0);
  for (double u : p.u) EXPECT_EQ(u, 1.0);
}

TEST(Solver, AllenCahnEquilibriumIsExact) {
  const auto p = solve_radial_bvp(flat_space(4), Nonlinearity::lichnerowicz(1, 1, 3, 0, 0.5), 1.0, 1.0);
  for (double u : p.u) EXPECT_EQ(u, 1.0);
  EXPECT_EQ(p.residual_norm, 0.0);
}

TEST(Solver, ReproducesExplicitSolution) {
  const auto a = appendix_space(5, 2, 1);
  EXPECT_LE(battery::appendix_solver_error(a, 0.5, 2048), 1e-6);
}

TEST(Solver, SecondOrderConvergence) {
  const auto a = appendix_space(5, 2, 1);
  const double ratio = battery::appendix_solver_error(a, 0.5, 1024) / battery::appendix_solver_error(a, 0.5, 2048);
  EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(Solver, ProfilesStayPositive) {
  for (double b : log_grid(0.01, 0.8, 8)) {
    const auto p = solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), 1.0, b);
    EXPECT_GE(*std::min_element(p.u.begin(), p.u.end()), 1e-12 * b);
    EXPECT_GE(p.u.front(), b);  // superharmonic, so the centre is the maximum
  }
}

TEST(Solver, ResidualBelowTolerance) {
  const auto p = solve_radial_bvp(flat_space(3), Nonlinearity::power_sum({{1, 1.5}, {0.5, 2.5}}), 1.0, 0.1);
  double top = 0;
  for (double u : p.u) top = std::max(top, evaluate(p.nonlin, u).value);
  EXPECT_LE(p.residual_norm, 1e-8 * top);
}

TEST(Solver, LargeBoundaryDataHasNoPositiveSolution) {
  // Past the fold of the Lane-Emden branch in ℝ⁴ on [0, 2].
  EXPECT_THROW(solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), 1.0, 5.0), Error);
}

TEST(Solver, RejectsBadInput) {
  EXPECT_THROW(solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), 1.0, 0.0), Error);
  EXPECT_THROW(solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), -1.0, 0.5), Error);
  EXPECT_THROW(solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), 1.0, 0.5, with_intervals(2)), Error);
}

TEST(Diagnostics, ConstantProfile) {
  const auto f = Nonlinearity::power(3.0);
  const auto p = constant_profile(flat_space(4), f, 1.0, 0.7);
  const auto d = diagnostics(p, {0.5, 0, 0, 0, false});
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    EXPECT_NEAR(d.Q[i], 0.49, 1e-15);
    EXPECT_EQ(d.F[i], 0.0);
  }
}

TEST(Diagnostics, ChainRuleForPlainTransform) {
  const auto p = solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), 1.0, 0.5, with_intervals(256));
  const double beta = 0.6;
  const auto d = diagnostics(p, {beta, 0, 0, 0, false});
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    const double ratio = p.du[i] / p.u[i];
    EXPECT_NEAR(d.F[i], beta * beta * ratio * ratio, 1e-15);
  }
}

TEST(Diagnostics, ExplicitSolutionQ) {
  const auto a = appendix_space(5, 2, 1);
  const auto p = appendix_profile_on_grid(a, 1.0, 512);
  const auto d = diagnostics(p, {1, 0, 0, 0, false});
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    const double r = p.grid.r[i];
    EXPECT_NEAR(d.Q[i], 16.0 / (a.scale * a.scale + r * r), 1e-8);
  }
}

TEST(Estimates, LaneEmdenSweepBelowCertificate) {
  const auto f = Nonlinearity::power(2.0);
  const auto cert = certificate(4, f, Theorem::lane_emden);
  for (double b : log_grid(0.01, 0.8, 6)) {
    const auto p = solve_radial_bvp(flat_space(4), f, 1.0, b);
    const auto rep = check_estimate(p, cert, 0.0, 1.0, EstimateKind::gradient_strong);
    EXPECT_TRUE(rep.pass);
    EXPECT_LT(rep.measured, cert.constant);
  }
}

TEST(Estimates, ExplicitSolutionOnLargeBall) {
  const auto a = appendix_space(5, 2, 1);
  const auto f = Nonlinearity::power(2.0);
  const auto cert = certificate(5, f, Theorem::lane_emden);
  const double R = 1e3 * a.scale;
  const auto p = appendix_profile_on_grid(a, R, 4096);
  const auto rep = check_estimate(p, cert, a.K, R, EstimateKind::gradient_strong);
  EXPECT_NEAR(rep.measured, 8.0 * a.K, 1e-10);
  EXPECT_GE(cert.constant, 8.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.ratio, 8.0 / cert.constant, 1e-6 * 8.0 / cert.constant);
}

TEST(Estimates, AllenCahnWeakGradientVanishes) {
  const auto f = Nonlinearity::lichnerowicz(1, 1, 3, 0, 0.5);
  const auto cert = certificate(1.5, f, Theorem::signed_monotone, 3.0);
  ASSERT_TRUE(cert.certified);
  const auto p = solve_radial_bvp(flat_space(1), f, 1.0, 1.0);
  const auto rep = check_estimate(p, cert, 0.0, 1.0, EstimateKind::gradient_weak);
  EXPECT_EQ(rep.measured, 0.0);
  EXPECT_TRUE(rep.pass);
}

TEST(Estimates, PassFlagMonotoneInConstant) {
  const auto f = Nonlinearity::power(2.0);
  const auto cert = certificate(4, f, Theorem::lane_emden);
  const auto p = solve_radial_bvp(flat_space(4), f, 1.0, 0.6);
  bool seen = false;
  for (double k : log_grid(1e-12, 1e3, 46)) {
    const bool pass = check_estimate(p, cert, 0.0, 1.0, EstimateKind::gradient_strong, std::nullopt, k).pass;
    EXPECT_FALSE(seen && !pass) << k;
    seen = seen || pass;
  }
  EXPECT_TRUE(seen);
}

TEST(Estimates, KindMustMatchCertificate) {
  const auto f = Nonlinearity::power(2.0);
  const auto cert = certificate(4, f, Theorem::lane_emden);
  const auto p = solve_radial_bvp(flat_space(4), f, 1.0, 0.3, with_intervals(64));
  try {
    check_estimate(p, cert, 0.0, 1.0, EstimateKind::eps_first, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::KindMismatch);
  }
}

TEST(Estimates, ShiftedSweepsPass) {
  for (const auto& [N, alpha] : std::vector<std::pair<int, double>>{{5, 2.0}, {3, 3.5}}) {
    const auto f = Nonlinearity::power(alpha);
    const auto cert = certificate(N, f, Theorem::shifted);
    const auto p = solve_radial_bvp(flat_space(N), f, 1.0, 0.3);
    const auto reports = check_shifted_sweep(p, cert, 0.0, 1.0);
    EXPECT_EQ(reports.size(), 14u);
    for (const auto& r : reports) {
      EXPECT_TRUE(r.pass) << N << " eps=" << *r.shift;
      EXPECT_EQ(r.kind, cert.second_kind ? EstimateKind::eps_second : EstimateKind::eps_first);
    }
  }
}

TEST(Epsilon, ClosedForms) {
  EXPECT_NEAR(choose_epsilon(Nonlinearity::power(2.0), 1.0, 0.0, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(choose_epsilon(Nonlinearity::power(2.0), 1.0, 3.0, 0.5), 7.0, 1e-11);
  EXPECT_NEAR(choose_epsilon(Nonlinearity::power(3.0), 2.0, 2.0, 1.0), std::sqrt(3.0) / 2.0, 1e-12);
  try {
    choose_epsilon(Nonlinearity::power(1.0), 1.0, 0.5, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoRoot);
  }
}

TEST(Defect, ExplicitSolutionFineGrid) {
  const auto a = appendix_space(5, 2, 1);
  const auto f = Nonlinearity::power(2.0);
  const auto cert = certificate(5, f, Theorem::lane_emden);
  const double K = curvature_bound(a.space(), 10 * a.scale).effective_K;
  const auto rep = verify_elliptic_inequality(appendix_profile_on_grid(a, 1.0, 4096),
                                              {cert.transform_power, 0, 0, 0, false}, false, K);
  EXPECT_GE(rep.min_defect, -1e-4 * rep.scale);
  EXPECT_GT(rep.nodes, 0u);
}

TEST(Defect, ConstantProfileSignBookkeeping) {
  // Not a solution: every gradient term vanishes and the defect is −W·(f(c)/c)²,
  // negative or positive with the sign of W.
  const auto f = Nonlinearity::power(2.0);
  const double c = 0.8, beta = 0.5;
  const auto p = constant_profile(flat_space(4), f, 1.0, c, 64);
  for (double d : {0.05, 0.3}) {
    const auto rep = verify_elliptic_inequality(p, {beta, 0, d, 0, false}, false, 0.0);
    CoefficientState s;
    s.dimension = 4;
    s.transform_power = beta;
    s.source_weight = d;
    s.u = c;
    s.first_ratio = 2;
    s.second_ratio = 2;
    const double W = first_kind_coefficients(s).square;
    EXPECT_NEAR(W, 2 * beta * beta / 4 - d, 1e-15);
    EXPECT_NEAR(rep.min_defect, -W * c * c, 1e-14);
  }
}

TEST(Defect, SecondOrderUnderRefinement) {
  const auto f = Nonlinearity::power(3.5);
  const auto cert = certificate(3, f, Theorem::shifted);
  ASSERT_TRUE(cert.second_kind);
  const auto series = defect_series(
      [&](int m) {
        const auto p = solve_radial_bvp(flat_space(3), f, 1.0, 0.4, with_intervals(m));
        return verify_elliptic_inequality(p, {cert.transform_power, 1, cert.source_weight, 0.1, true}, true, 0.0);
      },
      {64, 128, 256});
  EXPECT_TRUE(series.second_order);
}

TEST(Defect, RequiresPositiveSource) {
  const auto p = constant_profile(flat_space(4), Nonlinearity::lichnerowicz(1, 1, 3, 0, 0.5), 1.0, 1.0, 16);
  EXPECT_THROW(verify_elliptic_inequality(p, {0.5, 0, 0, 0, false}, false, 0.0), Error);
}

TEST(Scaling, IdentityScale) {
  const auto p = solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), 1.0, 0.5, with_intervals(512));
  EXPECT_EQ(scaling_check(p, 1.0).deviation, 0.0);
}

TEST(Scaling, DoubledScaleFineGrid) {
  const auto p = solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), 1.0, 0.5, with_intervals(4096));
  const auto rep = scaling_check(p, 2.0);
  EXPECT_LE(rep.deviation, 1e-8);
  EXPECT_LE(rep.interpolated_deviation, 1e-12);
}

TEST(Scaling, ExplicitFamilyMapsToItself) {
  const auto a = appendix_space(5, 2.2, 1);
  const double k = 2.0 / (a.alpha - 1.0);
  for (double s : {0.5, 2.0}) {
    AppendixSpace b = a;
    b.scale = a.scale / s;
    for (double r : {0.0, 0.3, 1.7, 9.0}) {
      const double lhs = appendix_profile(b, r).u;
      const double rhs = std::pow(s, k) * appendix_profile(a, s * r).u;
      EXPECT_NEAR(lhs / rhs, 1.0, 1e-13);
    }
  }
}

TEST(Scaling, RejectsWeightedSpaces) {
  const auto a = appendix_space(5, 2, 1);
  EXPECT_THROW(scaling_check(appendix_profile_on_grid(a, 1.0, 64), 2.0), Error);
}

TEST(Export, ProfileCsvColumns) {
  const auto p = solve_radial_bvp(flat_space(4), Nonlinearity::power(2.0), 1.0, 0.5, with_intervals(8));
  std::ostringstream os;
  write_profile_csv(os, p, {0.5, 0, 0.1, 0, false});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "r,u,du,Q,F,G");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 9);
}
