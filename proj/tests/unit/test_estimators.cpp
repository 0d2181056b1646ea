#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "paretotab/error.hpp"
#include "paretotab/estimators.hpp"
#include "paretotab/minimize.hpp"
#include "test_support.hpp"

namespace paretotab {
namespace {

using testing::data_path;
using testing::exact_pareto_tabulation;
using testing::make_tabulation;

// Population of potential units for 2019 (adults less joint returns).
constexpr double kN2019 = 192'300'000;

Tabulation agi2019() { return parse_tabulation(data_path("2019_agi.csv")); }

Tabulation capital2019() {
  return derive_capital(agi2019(), parse_tabulation(data_path("2019_wages.csv"))).capital;
}

std::vector<double> geometric_fractiles(int L, double p1 = 0.001, double ratio = 2.0) {
  std::vector<double> p{p1};
  for (int k = 0; k < L; ++k) p.push_back(p.back() * ratio);
  return p;
}

TEST(MethodNames, RoundTrip) {
  for (auto m : {Method::kTw, Method::kMl, Method::kFp, Method::kAp}) {
    EXPECT_EQ(method_from_string(to_string(m)), m);
  }
  EXPECT_EQ(method_from_string("TW"), Method::kTw);
  EXPECT_THROW(method_from_string("ols"), ValidationError);
}

TEST(TwEstimateMoments, RecoversAlphaFromExactRatios) {
  for (double a : {1.2, 1.5, 2.0, 3.0, 6.0}) {
    for (int L = 2; L <= 8; ++L) {
      const auto p = geometric_fractiles(L);
      const auto est = tw_estimate_moments(p, moment_ratios(a, p), 1e8);
      EXPECT_NEAR(est.alpha_hat, a, 1e-6) << "alpha " << a << " L " << L;
      EXPECT_EQ(est.L_used, L);
      EXPECT_NEAR(*est.objective_value, 0.0, 1e-12);
    }
  }
}

TEST(TwEstimate, RecoversAlphaFromExactParetoTable) {
  TwConfig cfg;
  cfg.top_fraction = 0.5;
  for (double a : {1.3, 1.7, 2.5, 4.0}) {
    const auto t = exact_pareto_tabulation(a, 12, 1.0);
    const auto est = tw_estimate(t, std::ldexp(1.0, 50), cfg);
    EXPECT_NEAR(est.alpha_hat, a, 1e-6);
    EXPECT_EQ(est.L_used, 10);
  }
}

// Reference values from an independent implementation (numpy/scipy) of the
// same estimator on the bundled table.
TEST(TwEstimate, Bundled2019Agi) {
  const auto est = tw_estimate(agi2019(), kN2019);
  EXPECT_EQ(est.L_used, 5);
  EXPECT_NEAR(est.alpha_hat, 1.5316473349, 1e-6);
  ASSERT_TRUE(est.se);
  EXPECT_NEAR(*est.se, 0.0014533956, 1e-7);
  EXPECT_GE(est.iterations, 1);
}

TEST(TwEstimate, Bundled2019Capital) {
  const auto est = tw_estimate(capital2019(), kN2019);
  EXPECT_EQ(est.L_used, 5);
  EXPECT_NEAR(est.alpha_hat, 1.1366080536, 1e-6);
  ASSERT_TRUE(est.se);
  EXPECT_NEAR(*est.se, 0.0010896454, 1e-7);
}

TEST(TwEstimate, Bundled2019AgiUnaffectedByAltPopulationAtSameL) {
  // A - M is smaller than A - J, but the top 1% still spans the same groups.
  const auto a = tw_estimate(agi2019(), kN2019);
  const auto b = tw_estimate(agi2019(), 184'300'000);
  EXPECT_EQ(a.L_used, b.L_used);
  EXPECT_NEAR(a.alpha_hat, b.alpha_hat, 1e-9);
}

TEST(TwEstimate, SeScalesWithInverseRootN) {
  const auto p = geometric_fractiles(5);
  const auto s = moment_ratios(1.8, p);
  const auto a = tw_estimate_moments(p, s, 1e6);
  const auto b = tw_estimate_moments(p, s, 2e6);
  EXPECT_NEAR(a.alpha_hat, b.alpha_hat, 1e-12);
  EXPECT_NEAR(*a.se / *b.se, std::sqrt(2.0), 1e-9);
}

TEST(TwEstimate, InvariantToIncomeScale) {
  auto t = agi2019();
  for (auto& g : t.groups) g.total *= 1000;
  EXPECT_NEAR(tw_estimate(t, kN2019).alpha_hat, tw_estimate(agi2019(), kN2019).alpha_hat, 1e-9);
}

TEST(TwEstimate, BoundaryMinimizerIsAnError) {
  // Group incomes that grow towards the top faster than any alpha > 1 allows.
  const auto p = geometric_fractiles(3);
  Eigen::VectorXd s(2);
  s << 50.0, 20.0;
  EXPECT_THROW(tw_estimate_moments(p, s, 1e6), EstimationError);
}

TEST(TwEstimate, WrongRatioLengthThrows) {
  EXPECT_THROW(tw_estimate_moments(geometric_fractiles(4), Eigen::VectorXd::Ones(2), 1e6),
               EstimationError);
}

TEST(TwConfig, Validation) {
  TwConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.top_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.alpha_lo = 0.9;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.max_iterations = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(SelectTopGroups, Bundled2019) {
  const auto cv = cumulate(agi2019());
  EXPECT_EQ(select_top_groups(cv, kN2019, 0.01), 5);
  EXPECT_THROW(select_top_groups(cv, kN2019, 0.0002), EstimationError);
  EXPECT_THROW(select_top_groups(cv, 1e6, 0.01), EstimationError);
}

TEST(SelectTopGroups, WholeFractionUsesEveryGroup) {
  const auto t = exact_pareto_tabulation(2.0, 9);
  EXPECT_EQ(select_top_groups(cumulate(t), std::ldexp(1.0, 50), 1.0), 8);
}

TEST(Variance, EfficientWeightingIsNoWorse) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  for (double a : {1.3, 2.0, 3.5}) {
    const auto p = geometric_fractiles(5);
    const auto ms = build_moment_system(a, p);
    const Eigen::VectorXd R = moment_ratio_gradient(a, p);
    const double best = efficient_variance(R, ms.Omega);
    EXPECT_NEAR(best, sandwich_variance(R, ms.Omega.inverse(), ms.Omega), 1e-9 * best);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::MatrixXd B(4, 4);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) B(i, j) = z(rng);
      }
      const Eigen::MatrixXd W = B * B.transpose() + 1e-3 * Eigen::MatrixXd::Identity(4, 4);
      EXPECT_GE(sandwich_variance(R, W, ms.Omega), best * (1.0 - 1e-9));
    }
  }
}

TEST(Variance, AsymptoticSeMatchesEfficientVariance) {
  const auto p = geometric_fractiles(4);
  const auto ms = build_moment_system(2.2, p);
  const double v = efficient_variance(moment_ratio_gradient(2.2, p), ms.Omega);
  EXPECT_NEAR(asymptotic_se(2.2, p, 1e7), std::sqrt(v / 1e7), 1e-12);
}

TEST(MlGrouped, TwoGroupExample) {
  const std::vector<double> t{2.0, 1.0}, m{1.0, 3.0};
  const auto est = ml_grouped(t, m, 2);
  EXPECT_NEAR(est.alpha_hat, 2.0, 1e-9);
  EXPECT_EQ(est.method, Method::kMl);
  ASSERT_TRUE(est.se);
}

TEST(MlGrouped, ExactProbabilitiesRecoverAlpha) {
  for (double a : {0.8, 1.5, 2.5, 4.0}) {
    const auto tab = exact_pareto_tabulation(a, 10);
    std::vector<double> t, m;
    for (const auto& g : tab.groups) {
      t.push_back(*g.lower_threshold);
      m.push_back(static_cast<double>(g.count));
    }
    for (int L = 2; L <= 10; ++L) EXPECT_NEAR(ml_grouped(t, m, L).alpha_hat, a, 1e-8);
  }
}

TEST(MlGrouped, LikelihoodIsConcave) {
  const auto tab = agi2019();
  std::vector<double> t, m;
  for (const auto& g : tab.threshold_groups()) {
    t.push_back(*g.lower_threshold);
    m.push_back(static_cast<double>(g.count));
  }
  const double h = 0.01;
  for (double a = 0.2; a < 8.0; a += 0.1) {
    const double d2 = grouped_log_likelihood(t, m, 6, a + h) - 2.0 * grouped_log_likelihood(t, m, 6, a) +
                      grouped_log_likelihood(t, m, 6, a - h);
    EXPECT_LT(d2, 0.0) << "alpha " << a;
  }
}

TEST(MlGrouped, InputErrors) {
  const std::vector<double> t{4.0, 2.0, 1.0};
  EXPECT_THROW(ml_grouped(t, std::vector<double>{1, 0, 3}, 3), EstimationError);
  EXPECT_THROW(ml_grouped(t, std::vector<double>{1, 2, 3}, 4), EstimationError);
  EXPECT_THROW(ml_grouped(std::vector<double>{1.0, 2.0}, std::vector<double>{1, 2}, 2), DomainError);
}

TEST(MlEstimate, Bundled2019AgiTopSixGroups) {
  const auto est = ml_estimate(agi2019(), 6);
  EXPECT_NEAR(est.alpha_hat, 1.5686448641, 1e-6);
  EXPECT_EQ(est.L_used, 6);
}

TEST(MlEstimate, RefusesTablesRankedByAnotherConcept) {
  EXPECT_THROW(ml_estimate(capital2019(), 6), EstimationError);
}

TEST(FpEstimate, ExactOnParetoTable) {
  for (double a : {1.2, 2.0, 3.3}) {
    const auto t = exact_pareto_tabulation(a, 12);
    const auto est = fp_estimate(cumulate(t), std::ldexp(1.0, 50));
    EXPECT_NEAR(est.alpha_hat, a, 1e-12);
    EXPECT_EQ(est.method, Method::kFp);
    EXPECT_FALSE(est.se);
  }
}

TEST(FpEstimate, NeedsABracket) {
  const auto t = make_tabulation({{100, 10, 5000}, {50, 30, 3000}});
  EXPECT_THROW(fp_estimate(cumulate(t), 100.0), EstimationError);
}

TEST(ApEstimate, ExactOnParetoTable) {
  for (double a : {1.2, 2.0, 3.3}) {
    const auto t = exact_pareto_tabulation(a, 12, 1.0);
    const auto curve = share_curve_from_tabulation(t, std::ldexp(1.0, 50));
    EXPECT_NEAR(ap_estimate(curve).alpha_hat, a, 1e-8);
  }
}

TEST(ApEstimate, RejectsSlopeAtOrAboveOne) {
  const ShareCurve curve({{0.0005, 0.01}, {0.001, 0.02}, {0.01, 0.3}, {0.05, 0.9}});
  EXPECT_THROW(ap_estimate(curve), EstimationError);
}

TEST(TailScan, FlatOnExactDataAndDeterministic) {
  const auto t = exact_pareto_tabulation(1.8, 12, 1.0);
  const double n = std::ldexp(1.0, 50);
  const auto scan = tail_scan(t, n);
  EXPECT_EQ(scan, tail_scan(t, n));
  ASSERT_EQ(scan.size(), 10u);
  for (const auto& pt : scan) {
    if (pt.fractile < 1.0) {
      ASSERT_TRUE(pt.alpha_hat) << pt.error;
      EXPECT_NEAR(*pt.alpha_hat, 1.8, 1e-6);
    } else {
      EXPECT_FALSE(pt.error.empty());
    }
  }
}

TEST(TailScan, Bundled2019RecordsFailuresWithoutThrowing) {
  const auto scan = tail_scan(capital2019(), kN2019);
  EXPECT_EQ(scan.size(), 16u);
  EXPECT_EQ(scan.front().L, 2);
  const auto l5 = std::find_if(scan.begin(), scan.end(), [](const ScanPoint& p) { return p.L == 5; });
  ASSERT_NE(l5, scan.end());
  ASSERT_TRUE(l5->alpha_hat);
  EXPECT_NEAR(*l5->alpha_hat, 1.1366080536, 1e-6);
}

TEST(GoldenBisect, QuadraticAndBracketFallback) {
  auto f = [](double x) { return (x - 1.234) * (x - 1.234); };
  auto df = [](double x) { return 2.0 * (x - 1.234); };
  EXPECT_NEAR(golden_bisect_minimize(f, df, 0.0, 5.0, 1e-12).x, 1.234, 1e-10);
  // A useless derivative leaves golden-section to finish the job.
  auto bad = [](double) { return 1.0; };
  EXPECT_NEAR(golden_bisect_minimize(f, bad, 0.0, 5.0, 1e-9).x, 1.234, 1e-7);
  const auto edge = golden_bisect_minimize(f, df, 2.0, 3.0, 1e-10);
  EXPECT_NEAR(edge.x, 2.0, 1e-8);
}

}  // namespace
}  // namespace paretotab
