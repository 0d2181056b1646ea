#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paretotab {

// Per-year demographic and filing counts used to size the population of
// potential tax units.
struct DemographicRecord {
  std::optional<double> adults;           // A: population aged 20+
  std::optional<double> joint_returns;    // J
  std::optional<double> married_couples;  // M
  std::optional<double> total_returns;    // T

  bool operator==(const DemographicRecord&) const = default;
};

enum class DemographicField { kAdults, kJointReturns, kMarriedCouples, kTotalReturns };

std::string_view to_string(DemographicField f);  // "A", "J", "M", "T"

class DemographicSeries {
 public:
  DemographicSeries() = default;
  explicit DemographicSeries(std::map<int, DemographicRecord> records);

  const std::map<int, DemographicRecord>& records() const { return records_; }
  void set(int year, const DemographicRecord& r);
  std::optional<double> get(int year, DemographicField f) const;
  bool contains(int year) const { return records_.contains(year); }

 private:
  std::map<int, DemographicRecord> records_;
};

// CSV with header year,A,J,M,T; blank cells are missing values.
DemographicSeries parse_demographics(std::istream& in);
DemographicSeries load_demographics(const std::filesystem::path& path);
void write_demographics_csv(std::ostream& out, const DemographicSeries& series);

// Geometric (log-linear) interpolation of `field` between the nearest years
// that have it. Returns the stored value at a knot year.
double interpolate_intercensal(const DemographicSeries& series, DemographicField field, int year);

// Copy of `series` with missing A and M filled by interpolate_intercensal for
// every listed year that is bracketed by knots.
DemographicSeries fill_intercensal(const DemographicSeries& series);

struct JointShareRegression {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  int observations = 0;
  std::vector<std::string> warnings;

  // Fitted joint returns A * exp(intercept + slope * log(M / A)).
  double fitted_joint_returns(double adults, double married_couples) const;
};

// OLS of log(J/A) on log(M/A) over years >= from_year with A, J and M present.
JointShareRegression fit_joint_share_regression(const DemographicSeries& series,
                                                int from_year = 1950);

inline constexpr int kDefaultCutoverYear = 1950;

// A - J from the cutover year on; before it A - J_hat with J_hat from the
// joint-share regression fitted on years >= cutover.
double potential_units(const DemographicSeries& series, int year, int cutover = kDefaultCutoverYear);
double potential_units(const DemographicSeries& series, int year, int cutover,
                       const JointShareRegression& regression);

// A - M (every married couple files jointly): a lower bound on the units.
double alt_units(const DemographicSeries& series, int year);

}  // namespace paretotab
