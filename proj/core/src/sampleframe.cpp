#include "paretotab/sampleframe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "paretotab/error.hpp"
#include "text_util.hpp"

namespace paretotab {

std::string_view to_string(DemographicField f) {
  switch (f) {
    case DemographicField::kAdults: return "A";
    case DemographicField::kJointReturns: return "J";
    case DemographicField::kMarriedCouples: return "M";
    case DemographicField::kTotalReturns: return "T";
  }
  return "?";
}

namespace {

std::optional<double> DemographicRecord::*member(DemographicField f) {
  switch (f) {
    case DemographicField::kAdults: return &DemographicRecord::adults;
    case DemographicField::kJointReturns: return &DemographicRecord::joint_returns;
    case DemographicField::kMarriedCouples: return &DemographicRecord::married_couples;
    case DemographicField::kTotalReturns: return &DemographicRecord::total_returns;
  }
  return &DemographicRecord::adults;
}

void check_record(int year, const DemographicRecord& r) {
  for (auto f : {DemographicField::kAdults, DemographicField::kJointReturns,
                 DemographicField::kMarriedCouples, DemographicField::kTotalReturns}) {
    const auto& v = r.*member(f);
    if (v && !(*v > 0.0)) {
      throw ValidationError(std::to_string(year) + ": " + std::string(to_string(f)) +
                            " must be positive");
    }
  }
  if (r.joint_returns && r.total_returns && *r.joint_returns > *r.total_returns) {
    throw ValidationError(std::to_string(year) + ": joint returns exceed total returns");
  }
}

double require(const DemographicSeries& s, int year, DemographicField f) {
  const auto v = s.get(year, f);
  if (!v) {
    throw ValidationError("missing " + std::string(to_string(f)) + " for " + std::to_string(year));
  }
  return *v;
}

}  // namespace

DemographicSeries::DemographicSeries(std::map<int, DemographicRecord> records)
    : records_(std::move(records)) {
  for (const auto& [year, r] : records_) check_record(year, r);
}

void DemographicSeries::set(int year, const DemographicRecord& r) {
  check_record(year, r);
  records_[year] = r;
}

std::optional<double> DemographicSeries::get(int year, DemographicField f) const {
  const auto it = records_.find(year);
  if (it == records_.end()) return std::nullopt;
  return it->second.*member(f);
}

DemographicSeries parse_demographics(std::istream& in) {
  std::map<int, DemographicRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  int col[5] = {-1, -1, -1, -1, -1};  // year, A, J, M, T
  std::size_t n_columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split_fields(body);
    if (!have_header) {
      static constexpr std::string_view names[5] = {"year", "a", "j", "m", "t"};
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto name = detail::to_lower(fields[i]);
        for (int c = 0; c < 5; ++c) {
          if (name == names[c]) col[c] = static_cast<int>(i);
        }
      }
      for (int c = 0; c < 5; ++c) {
        if (col[c] < 0) throw ParseError("missing column '" + std::string(names[c]) + "'", line_no);
      }
      n_columns = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != n_columns) throw ParseError("wrong number of fields", line_no);
    const auto year = detail::parse_int64(fields[static_cast<std::size_t>(col[0])]);
    if (!year) throw ParseError("bad year", line_no);
    auto value = [&](int c) -> std::optional<double> {
      const auto f = fields[static_cast<std::size_t>(col[c])];
      if (f.empty()) return std::nullopt;
      const auto v = detail::parse_double(f);
      if (!v) throw ParseError("bad number '" + std::string(f) + "'", line_no);
      return v;
    };
    DemographicRecord r{value(1), value(2), value(3), value(4)};
    if (records.contains(static_cast<int>(*year))) throw ParseError("duplicate year", line_no);
    records[static_cast<int>(*year)] = r;
  }
  if (!have_header) throw ParseError("empty demographic file");
  return DemographicSeries(std::move(records));
}

DemographicSeries load_demographics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return parse_demographics(in);
  } catch (const ParseError& e) {
    throw ParseError::with_context(path.string(), e);
  }
}

void write_demographics_csv(std::ostream& out, const DemographicSeries& series) {
  out << "year,A,J,M,T\n";
  for (const auto& [year, r] : series.records()) {
    out << year;
    for (const auto& v : {r.adults, r.joint_returns, r.married_couples, r.total_returns}) {
      out << ',';
      if (v) out << detail::format_double(*v);
    }
    out << '\n';
  }
}

double interpolate_intercensal(const DemographicSeries& series, DemographicField field, int year) {
  if (const auto v = series.get(year, field)) return *v;
  std::optional<std::pair<int, double>> before, after;
  for (const auto& [y, r] : series.records()) {
    const auto v = r.*member(field);
    if (!v) continue;
    if (y < year) before = std::pair{y, *v};
    if (y > year && !after) after = std::pair{y, *v};
  }
  if (!before || !after) {
    throw ValidationError("no bracketing " + std::string(to_string(field)) + " values around " +
                          std::to_string(year));
  }
  const double w = static_cast<double>(year - before->first) /
                   static_cast<double>(after->first - before->first);
  return std::exp((1.0 - w) * std::log(before->second) + w * std::log(after->second));
}

DemographicSeries fill_intercensal(const DemographicSeries& series) {
  auto records = series.records();
  for (auto& [year, r] : records) {
    for (auto f : {DemographicField::kAdults, DemographicField::kMarriedCouples}) {
      auto& v = r.*member(f);
      if (v) continue;
      try {
        v = interpolate_intercensal(series, f, year);
      } catch (const ValidationError&) {
        // Left missing outside the knot range.
      }
    }
  }
  return DemographicSeries(std::move(records));
}

double JointShareRegression::fitted_joint_returns(double adults, double married_couples) const {
  return adults * std::exp(intercept + slope * std::log(married_couples / adults));
}

JointShareRegression fit_joint_share_regression(const DemographicSeries& series, int from_year) {
  std::vector<double> x, y;
  for (const auto& [year, r] : series.records()) {
    if (year < from_year || !r.adults || !r.joint_returns || !r.married_couples) continue;
    x.push_back(std::log(*r.married_couples / *r.adults));
    y.push_back(std::log(*r.joint_returns / *r.adults));
  }
  JointShareRegression fit;
  fit.observations = static_cast<int>(x.size());
  if (x.size() < 2) {
    throw EstimationError("joint-share regression needs at least two complete years from " +
                          std::to_string(from_year));
  }
  const double nobs = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= nobs;
  my /= nobs;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw EstimationError("log(M/A) does not vary; regression is degenerate");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    ssr += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  if (x.size() < 3) fit.warnings.push_back("regression has no residual degrees of freedom");
  return fit;
}

double potential_units(const DemographicSeries& series, int year, int cutover,
                       const JointShareRegression& regression) {
  const double adults = require(series, year, DemographicField::kAdults);
  if (year >= cutover) return adults - require(series, year, DemographicField::kJointReturns);
  const double married = require(series, year, DemographicField::kMarriedCouples);
  return adults - regression.fitted_joint_returns(adults, married);
}

double potential_units(const DemographicSeries& series, int year, int cutover) {
  if (year >= cutover) {
    return require(series, year, DemographicField::kAdults) -
           require(series, year, DemographicField::kJointReturns);
  }
  return potential_units(series, year, cutover, fit_joint_share_regression(series, cutover));
}

double alt_units(const DemographicSeries& series, int year) {
  return require(series, year, DemographicField::kAdults) -
         require(series, year, DemographicField::kMarriedCouples);
}

}  // namespace paretotab
