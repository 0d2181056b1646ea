#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace paretotab {

enum class IncomeConcept { kAgi, kWages, kCapital, kOther };

std::string_view to_string(IncomeConcept c);
// Accepts "agi", "wages", "capital", "other" (case-insensitive).
IncomeConcept income_concept_from_string(std::string_view s);

// One row of a published tabulation. Amounts are kept in the published unit
// (thousands of dollars for SOI tables) as exact integers; thresholds are in
// dollars.
struct IncomeGroup {
  std::optional<double> lower_threshold;
  std::int64_t count = 0;
  std::int64_t total = 0;

  bool has_threshold() const { return lower_threshold.has_value(); }
  bool operator==(const IncomeGroup&) const = default;
};

// Grouped income summary for one year and one income concept.
//
// Groups are ordered richest first. A single row without a threshold (the
// deficit / bottom row of an SOI table) may appear, always last; it is kept
// for conservation checks but never enters estimation.
//
// `ranked_by` names the concept whose thresholds define the groups. For wage
// or capital tables grouped by AGI the thresholds are AGI thresholds, so
// threshold-based estimators must not treat them as thresholds of the concept
// itself.
struct Tabulation {
  int year = 0;
  IncomeConcept income_concept = IncomeConcept::kAgi;
  IncomeConcept ranked_by = IncomeConcept::kAgi;
  std::vector<IncomeGroup> groups;
  std::optional<std::int64_t> grand_total_count;
  std::optional<std::int64_t> grand_total_income;
  std::optional<std::int64_t> population_n;

  bool has_bottom_row() const {
    return !groups.empty() && !groups.back().has_threshold();
  }
  // Groups carrying a threshold (everything but the bottom row).
  std::span<const IncomeGroup> threshold_groups() const;
  // True when the thresholds measure the tabulated concept itself.
  bool thresholds_measure_concept() const { return income_concept == ranked_by; }

  bool operator==(const Tabulation&) const = default;
};

// Cumulative counts and partial sums from the top: n[k] is the number of
// units in groups 0..k and S[k] their total income (published units).
// thresholds[k] is group k's lower threshold when known.
struct CumulativeView {
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> S;
  std::vector<std::optional<double>> thresholds;

  std::size_t size() const { return n.size(); }
  // Income of group k (0-based), i.e. S[k] - S[k-1].
  std::int64_t group_total(std::size_t k) const {
    return k == 0 ? S[0] : S[k] - S[k - 1];
  }
};

struct ColumnSchema {
  std::string threshold = "threshold";
  std::string count = "count";
  std::string total = "total_thousands";
};

// Reads a tabulation CSV. If a sidecar file with the same stem and the
// extension ".meta" exists, its key=value metadata (year, concept, ranked_by,
// grand_total_count, grand_total_income, population_n) is applied.
// Rows are sorted richest first on load.
Tabulation parse_tabulation(const std::filesystem::path& path,
                            const ColumnSchema& schema = {});
// Reads only the CSV body from a stream; metadata is left defaulted.
Tabulation parse_tabulation_csv(std::istream& in, const ColumnSchema& schema = {});
// Applies key=value metadata lines to `t`.
void apply_metadata(std::istream& in, Tabulation& t);

// Canonical CSV (header threshold,count,total_thousands; richest first).
void write_tabulation_csv(std::ostream& out, const Tabulation& t);
void write_metadata(std::ostream& out, const Tabulation& t);
// Writes `path` and its ".meta" sidecar.
void save_tabulation(const std::filesystem::path& path, const Tabulation& t);

struct ColumnCheck {
  std::string column;
  std::int64_t group_sum = 0;
  std::optional<std::int64_t> published;
  bool ok = false;

  std::int64_t delta() const { return published ? group_sum - *published : 0; }
};

struct ValidationReport {
  bool passed = false;
  std::vector<ColumnCheck> columns;

  std::vector<std::string> offending_columns() const;
};

// Largest tolerated |sum of groups - published total|, in units of the last
// published digit.
inline constexpr std::int64_t kRoundingTolerance = 5;

ValidationReport validate_totals(const Tabulation& t);

// Folds every zero-count group into the next lower-income nonzero group. A
// trailing zero group with no lower neighbour is folded into the nearest
// higher-income nonzero group. Throws ValidationError if every group is empty.
Tabulation merge_zero_count_groups(const Tabulation& t);

// Coarsens both tables to the thresholds they share. Rows below the lowest
// shared threshold are folded into the bottom row. Throws ValidationError when
// fewer than two shared thresholds remain.
std::pair<Tabulation, Tabulation> merge_to_common_thresholds(const Tabulation& a,
                                                             const Tabulation& b);

struct CapitalDerivation {
  Tabulation capital;
  // Indices of groups with a negative capital total.
  std::vector<std::size_t> negative_groups;
};

// Capital income as AGI minus salaries and wages, group by group. Counts are
// taken from the AGI table.
CapitalDerivation derive_capital(const Tabulation& agi, const Tabulation& wages);

// When `drop_nonpositive` is set the bottom row and any trailing groups with a
// nonpositive total are left out.
CumulativeView cumulate(const Tabulation& t, bool drop_nonpositive = true);

}  // namespace paretotab
