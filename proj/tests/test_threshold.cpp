#include <nlocal/errors.hpp>
#include <nlocal/threshold.hpp>
#include <nlocal/units.hpp>

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace nlocal;

namespace {

SpinSystemSpec coupling_free(int n, double M) {
  SpinSystemSpec s = default_spec(n, 0, {.M = M, .with_couplings = false});
  s.coupler_on = true;
  return s;
}

}  // namespace

TEST(fit_line, exact_line_and_intersection) {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  const LineFit a = fit_line(x, y);
  EXPECT_NEAR(a.slope, 2.0, 1e-14);
  EXPECT_NEAR(a.intercept, 1.0, 1e-14);
  const LineFit b{-1.0, 10.0};
  EXPECT_NEAR(intersect(a, b), 3.0, 1e-14);
  EXPECT_THROW(intersect(a, LineFit{2.0, 0.0}), NoIntersectionError);
  EXPECT_THROW(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}), DimensionMismatchError);
}

TEST(default_sigma_grid, log_spaced) {
  const auto g = default_sigma_grid();
  ASSERT_EQ(g.size(), 12u);
  EXPECT_NEAR(g.front(), 0.5e-3, 1e-15);
  EXPECT_NEAR(g.back(), 50e-3, 1e-15);
  for (std::size_t i = 2; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
}

TEST(mean_cos_theta, default_regime) {
  const double c = mean_cos_theta(units::ghz(2.0), units::ghz(10.0));
  EXPECT_NEAR(c, 0.8198039027185569, 1e-12);
  // Trapezoid quadrature of eps / sqrt(delta^2 + eps^2).
  const int k = 200000;
  double sum = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double e = 10.0 * i / k;
    const double w = (i == 0 || i == k) ? 0.5 : 1.0;
    sum += w * e / std::hypot(2.0, e);
  }
  EXPECT_NEAR(c, sum / k, 1e-9);
}

TEST(analytic_bound, four_spins) {
  const double b = analytic_bound(4, units::mhz(50.0), units::ghz(2.0), units::ghz(10.0));
  EXPECT_NEAR(units::to_mhz(b), 2.0 * 50.0 / 15.0 * std::pow(0.8198039027185569, 4), 1e-9);
  EXPECT_NEAR(units::to_mhz(b), 3.0, 0.1);
}

TEST(perturbative_oracle, sign_and_magnitude) {
  for (int n : {2, 3}) {
    const SpinSystemSpec s = coupling_free(n, units::mhz(5.0));
    FieldConfiguration all;
    for (int i = 0; i < n; ++i) all.active.push_back(i);
    const double eps = s.epsilon_max;
    const double cos_t = eps / std::hypot(s.delta[0], eps);
    const double expected = 2.0 * s.M * std::pow(-cos_t, n);
    EXPECT_NEAR(perturbative_deviation_oracle(s, all, eps), expected, 1e-12);
    EXPECT_NEAR(exact_curve_difference(s, all, eps), expected, 0.05 * std::abs(expected)) << n;
    EXPECT_EQ(perturbative_deviation_oracle(s, {{0}}, eps), 0.0);
  }
}

TEST(perturbative_oracle, exact_difference_matches_dense_oracle) {
  const SpinSystemSpec s = coupling_free(3, units::mhz(5.0));
  SpinSystemSpec constructed = s;
  constructed.M = 0.0;
  const double eps = 6.0;
  const double expected =
      oracle::gap(oracle::jacobi_eigenvalues(oracle::dense_hamiltonian(constructed, {0, 1, 2}, eps))) -
      oracle::gap(oracle::jacobi_eigenvalues(oracle::dense_hamiltonian(s, {0, 1, 2}, eps)));
  EXPECT_NEAR(exact_curve_difference(s, {{0, 1, 2}}, eps), expected, 1e-9);
}

TEST(perturbative_oracle, unsupported_regimes) {
  SpinSystemSpec s = coupling_free(3, units::mhz(5.0));
  s.delta[1] *= 1.1;
  EXPECT_THROW(perturbative_deviation_oracle(s, {{0, 1, 2}}, 1.0), UnsupportedRegimeError);
  EXPECT_THROW(perturbative_deviation_oracle(default_spec(3, 1), {{0, 1, 2}}, 1.0), UnsupportedRegimeError);
}

TEST(threshold_scan, small_scan_is_well_formed_and_reproducible) {
  const SpinSystemSpec s = noisy_study_spec(2, 3, {});
  const std::vector<double> grid{1e-3, 2e-3, 4e-3, 8e-3, 16e-3, 32e-3};
  ThresholdOptions opt;
  opt.grid_points = 7;
  opt.head_points = 2;
  opt.fit.starts = 1;
  const ThresholdCurve a = threshold_scan(s, grid, 2, 11, opt);
  ASSERT_EQ(a.mean_dev_nlocal.size(), grid.size());
  EXPECT_EQ(a.realizations, 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_GT(a.mean_dev_nlocal[i], 0.0);
    EXPECT_GT(a.mean_dev_sublocal[i], a.mean_dev_nlocal[i]);
  }
  opt.jobs = 3;
  const ThresholdCurve b = threshold_scan(s, grid, 2, 11, opt);
  EXPECT_EQ(a.mean_dev_nlocal, b.mean_dev_nlocal);
  EXPECT_EQ(a.sigma_c, b.sigma_c);
}

TEST(spurious_sensitivity, eta_zero_matches_pure_noise_and_grid_order) {
  const SpinSystemSpec s = default_spec(2, 4);
  SpuriousOptions opt;
  opt.threshold.grid_points = 7;
  opt.threshold.fit.starts = 1;
  const auto pts = spurious_sensitivity(s, {0.0, 1.0}, 5e-3, 1, 2, opt);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].eta, 0.0);
  EXPECT_EQ(pts[1].eta, 1.0);
  for (const auto& p : pts) EXPECT_GT(p.gap(), 0.0);
}
