#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "paretotab/error.hpp"
#include "paretotab/sampleframe.hpp"
#include "test_support.hpp"

namespace paretotab {
namespace {

using testing::data_path;

DemographicSeries bundled() { return fill_intercensal(load_demographics(data_path("demographics.csv"))); }

DemographicRecord rec(std::optional<double> a, std::optional<double> j, std::optional<double> m,
                      std::optional<double> t = std::nullopt) {
  return {a, j, m, t};
}

// Noiseless series with log(J/A) = b0 + b1 log(M/A).
DemographicSeries synthetic(double b0, double b1, double scale = 1.0) {
  std::map<int, DemographicRecord> r;
  for (int y = 1940; y <= 2000; y += 5) {
    const double a = scale * (100.0 + 2.0 * (y - 1940));
    const double m = a * (0.30 + 0.002 * (y - 1940) - 0.00004 * (y - 1940) * (y - 1940));
    const double j = a * std::exp(b0 + b1 * std::log(m / a));
    r[y] = rec(a, y >= 1950 ? std::optional<double>(j) : std::nullopt, m);
  }
  return DemographicSeries(r);
}

TEST(PotentialUnits, AdultsLessJointReturns) {
  DemographicSeries s({{2000, rec(100, 20, 30)}});
  EXPECT_EQ(potential_units(s, 2000), 80.0);
  EXPECT_EQ(alt_units(s, 2000), 70.0);
}

TEST(PotentialUnits, MissingFieldNamesIt) {
  DemographicSeries s({{2000, rec(100, std::nullopt, 30)}});
  try {
    potential_units(s, 2000);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("missing J for 2000"), std::string::npos);
  }
}

TEST(JointShareRegression, RecoversNoiselessCoefficients) {
  const auto fit = fit_joint_share_regression(synthetic(0.1, 1.15), 1950);
  EXPECT_NEAR(fit.intercept, 0.1, 1e-12);
  EXPECT_NEAR(fit.slope, 1.15, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.observations, 11);
  EXPECT_TRUE(fit.warnings.empty());
}

TEST(JointShareRegression, BackcastUsesFittedJointReturns) {
  const auto s = synthetic(0.1, 1.15);
  const auto a = *s.get(1940, DemographicField::kAdults);
  const auto m = *s.get(1940, DemographicField::kMarriedCouples);
  EXPECT_NEAR(potential_units(s, 1940), a - a * std::exp(0.1 + 1.15 * std::log(m / a)), 1e-9);
}

TEST(JointShareRegression, ScaleEquivariant) {
  const auto base = synthetic(-0.2, 0.9);
  const auto scaled = synthetic(-0.2, 0.9, 1000.0);
  const auto f1 = fit_joint_share_regression(base), f2 = fit_joint_share_regression(scaled);
  EXPECT_NEAR(f1.slope, f2.slope, 1e-10);
  EXPECT_NEAR(f1.intercept, f2.intercept, 1e-10);
  EXPECT_NEAR(potential_units(scaled, 1940), 1000.0 * potential_units(base, 1940), 1e-6);
}

TEST(JointShareRegression, ResidualsSumToZero) {
  const auto s = bundled();
  const auto fit = fit_joint_share_regression(s);
  double sum = 0.0;
  for (const auto& [y, r] : s.records()) {
    if (y < 1950 || !r.adults || !r.joint_returns || !r.married_couples) continue;
    sum += std::log(*r.joint_returns / *r.adults) - fit.intercept -
           fit.slope * std::log(*r.married_couples / *r.adults);
  }
  EXPECT_NEAR(sum, 0.0, 1e-12);
}

TEST(JointShareRegression, TwoPointsWarnAndOnePointThrows) {
  DemographicSeries two({{1950, rec(100, 20, 30)}, {1960, rec(120, 30, 40)}});
  const auto fit = fit_joint_share_regression(two);
  EXPECT_EQ(fit.observations, 2);
  EXPECT_EQ(fit.warnings.size(), 1u);
  DemographicSeries one({{1950, rec(100, 20, 30)}});
  EXPECT_THROW(fit_joint_share_regression(one), EstimationError);
  DemographicSeries flat({{1950, rec(100, 20, 30)}, {1960, rec(200, 30, 60)}});
  EXPECT_THROW(fit_joint_share_regression(flat), EstimationError);
}

TEST(JointShareRegression, BundledFitIsTight) {
  const auto fit = fit_joint_share_regression(bundled());
  EXPECT_NEAR(fit.r_squared, 0.989, 0.01);
  EXPECT_GT(fit.slope, 0.0);
}

TEST(PotentialUnits, Bundled2019) {
  const auto s = bundled();
  const double n = potential_units(s, 2019);
  EXPECT_DOUBLE_EQ(n, 192'300'000.0);
  // Band around the published 2019 frame of potential tax units.
  EXPECT_GT(n, 1.8e8);
  EXPECT_LT(n, 2.0e8);
  EXPECT_GE(n, 0.8 * *s.get(2019, DemographicField::kTotalReturns));
}

TEST(PotentialUnits, AltNeverExceedsMain) {
  const auto s = bundled();
  for (const auto& [y, r] : s.records()) {
    if (!r.adults || !r.married_couples) continue;
    if (y >= 1950 && !r.joint_returns) continue;
    EXPECT_LE(alt_units(s, y), potential_units(s, y) + 1e-6) << y;
  }
}

TEST(PotentialUnits, YearsFromCutoverNeverConsultM) {
  DemographicSeries s({{1950, rec(100, 20, 30)}, {1960, rec(120, 30, 40)}, {1970, rec(140, 35, std::nullopt)}});
  EXPECT_EQ(potential_units(s, 1970), 105.0);
  EXPECT_THROW(alt_units(s, 1970), ValidationError);
}

TEST(Intercensal, GeometricMidpointAndKnots) {
  DemographicSeries s({{1900, rec(100, std::nullopt, 10)}, {1910, rec(400, std::nullopt, 40)},
                       {1905, rec(std::nullopt, std::nullopt, std::nullopt, 5)}});
  EXPECT_NEAR(interpolate_intercensal(s, DemographicField::kAdults, 1905), 200.0, 1e-9);
  EXPECT_EQ(interpolate_intercensal(s, DemographicField::kAdults, 1910), 400.0);
  double prev = 0.0;
  for (int y = 1900; y <= 1910; ++y) {
    const double v = interpolate_intercensal(s, DemographicField::kAdults, y);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_THROW(interpolate_intercensal(s, DemographicField::kAdults, 1911), ValidationError);
  const auto filled = fill_intercensal(s);
  EXPECT_NEAR(*filled.get(1905, DemographicField::kMarriedCouples), 20.0, 1e-9);
}

TEST(Demographics, ParseWriteRoundTrip) {
  const auto s = load_demographics(data_path("demographics.csv"));
  std::stringstream out;
  write_demographics_csv(out, s);
  EXPECT_EQ(parse_demographics(out).records(), s.records());
}

TEST(Demographics, RejectsBadInput) {
  std::stringstream dup("year,A,J,M,T\n2000,1,,,\n2000,2,,,\n");
  EXPECT_THROW(parse_demographics(dup), ParseError);
  std::stringstream missing("year,A,J,M\n2000,1,,\n");
  EXPECT_THROW(parse_demographics(missing), ParseError);
  std::stringstream negative("year,A,J,M,T\n2000,-1,,,\n");
  EXPECT_THROW(parse_demographics(negative), ValidationError);
  std::stringstream jt("year,A,J,M,T\n2000,100,50,40,30\n");
  EXPECT_THROW(parse_demographics(jt), ValidationError);
}

}  // namespace
}  // namespace paretotab
