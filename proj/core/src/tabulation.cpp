#include "paretotab/tabulation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "paretotab/error.hpp"
#include "text_util.hpp"

namespace paretotab {

using detail::parse_double;
using detail::parse_int64;
using detail::split_fields;
using detail::trim;

std::string_view to_string(IncomeConcept c) {
  switch (c) {
    case IncomeConcept::kAgi: return "agi";
    case IncomeConcept::kWages: return "wages";
    case IncomeConcept::kCapital: return "capital";
    case IncomeConcept::kOther: return "other";
  }
  return "other";
}

IncomeConcept income_concept_from_string(std::string_view s) {
  const auto v = detail::to_lower(trim(s));
  if (v == "agi") return IncomeConcept::kAgi;
  if (v == "wages") return IncomeConcept::kWages;
  if (v == "capital") return IncomeConcept::kCapital;
  if (v == "other") return IncomeConcept::kOther;
  throw ValidationError("unknown income concept '" + std::string(s) + "'");
}

std::span<const IncomeGroup> Tabulation::threshold_groups() const {
  std::span<const IncomeGroup> all(groups);
  return has_bottom_row() ? all.first(all.size() - 1) : all;
}

namespace {

// Richest first, bottom row last; rejects duplicate thresholds and more than
// one bottom row.
void normalize_order(std::vector<IncomeGroup>& groups) {
  std::stable_sort(groups.begin(), groups.end(), [](const IncomeGroup& a, const IncomeGroup& b) {
    if (a.has_threshold() != b.has_threshold()) return a.has_threshold();
    return a.has_threshold() && *a.lower_threshold > *b.lower_threshold;
  });
  std::size_t bottom_rows = 0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (!groups[k].has_threshold()) {
      ++bottom_rows;
      continue;
    }
    if (k > 0 && groups[k - 1].has_threshold() &&
        !(*groups[k].lower_threshold < *groups[k - 1].lower_threshold)) {
      throw ValidationError("thresholds must be distinct; duplicate " +
                            detail::format_double(*groups[k].lower_threshold));
    }
  }
  if (bottom_rows > 1) throw ValidationError("more than one row without a threshold");
}

void check_group_invariants(const std::vector<IncomeGroup>& groups) {
  for (const auto& g : groups) {
    if (g.count < 0) throw ValidationError("negative group count");
    if (g.lower_threshold && !(*g.lower_threshold > 0.0)) {
      throw ValidationError("thresholds must be positive");
    }
  }
}

}  // namespace

Tabulation parse_tabulation_csv(std::istream& in, const ColumnSchema& schema) {
  Tabulation t;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> col_threshold, col_count, col_total;
  std::size_t n_columns = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = split_fields(body);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto name = detail::to_lower(fields[i]);
        if (name == detail::to_lower(schema.threshold)) col_threshold = i;
        if (name == detail::to_lower(schema.count)) col_count = i;
        if (name == detail::to_lower(schema.total)) col_total = i;
      }
      if (!col_count) throw ParseError("missing column '" + schema.count + "'", line_no);
      if (!col_total) throw ParseError("missing column '" + schema.total + "'", line_no);
      n_columns = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != n_columns) {
      throw ParseError("expected " + std::to_string(n_columns) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    IncomeGroup g;
    if (col_threshold && !fields[*col_threshold].empty()) {
      const auto thr = parse_double(fields[*col_threshold]);
      if (!thr) throw ParseError("bad threshold '" + std::string(fields[*col_threshold]) + "'", line_no);
      if (!(*thr > 0.0)) throw ParseError("threshold must be positive", line_no);
      g.lower_threshold = *thr;
    }
    const auto count = parse_int64(fields[*col_count]);
    if (!count) throw ParseError("bad count '" + std::string(fields[*col_count]) + "'", line_no);
    if (*count < 0) throw ParseError("negative count", line_no);
    const auto total = parse_int64(fields[*col_total]);
    if (!total) throw ParseError("bad total '" + std::string(fields[*col_total]) + "'", line_no);
    g.count = *count;
    g.total = *total;
    t.groups.push_back(g);
  }
  if (!have_header) throw ParseError("empty tabulation file");
  if (t.groups.empty()) throw ParseError("tabulation has a header but no rows");
  normalize_order(t.groups);
  return t;
}

void apply_metadata(std::istream& in, Tabulation& t) {
  std::string line;
  std::size_t line_no = 0;
  bool ranked_given = false;
  bool concept_given = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    const auto key = detail::to_lower(trim(body.substr(0, eq)));
    const auto value = trim(body.substr(eq + 1));
    auto as_int = [&]() {
      const auto v = parse_int64(value);
      if (!v) throw ParseError("bad integer for '" + key + "'", line_no);
      return *v;
    };
    if (key == "year") {
      t.year = static_cast<int>(as_int());
    } else if (key == "concept") {
      t.income_concept = income_concept_from_string(value);
      concept_given = true;
    } else if (key == "ranked_by") {
      t.ranked_by = income_concept_from_string(value);
      ranked_given = true;
    } else if (key == "grand_total_count") {
      t.grand_total_count = as_int();
    } else if (key == "grand_total_income") {
      t.grand_total_income = as_int();
    } else if (key == "population_n") {
      const auto v = as_int();
      if (v <= 0) throw ParseError("population_n must be positive", line_no);
      t.population_n = v;
    } else {
      throw ParseError("unknown metadata key '" + key + "'", line_no);
    }
  }
  // Without ranked_by the thresholds are taken to measure the concept itself.
  if (concept_given && !ranked_given) t.ranked_by = t.income_concept;
}

Tabulation parse_tabulation(const std::filesystem::path& path, const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Tabulation t;
  try {
    t = parse_tabulation_csv(in, schema);
  } catch (const ParseError& e) {
    throw ParseError::with_context(path.string(), e);
  }
  auto meta_path = path;
  meta_path.replace_extension(".meta");
  if (std::filesystem::exists(meta_path)) {
    std::ifstream meta(meta_path);
    try {
      apply_metadata(meta, t);
    } catch (const ParseError& e) {
      throw ParseError::with_context(meta_path.string(), e);
    }
  }
  check_group_invariants(t.groups);
  return t;
}

void write_tabulation_csv(std::ostream& out, const Tabulation& t) {
  out << "threshold,count,total_thousands\n";
  for (const auto& g : t.groups) {
    if (g.lower_threshold) out << detail::format_double(*g.lower_threshold);
    out << ',' << g.count << ',' << g.total << '\n';
  }
}

void write_metadata(std::ostream& out, const Tabulation& t) {
  out << "year=" << t.year << '\n';
  out << "concept=" << to_string(t.income_concept) << '\n';
  out << "ranked_by=" << to_string(t.ranked_by) << '\n';
  if (t.grand_total_count) out << "grand_total_count=" << *t.grand_total_count << '\n';
  if (t.grand_total_income) out << "grand_total_income=" << *t.grand_total_income << '\n';
  if (t.population_n) out << "population_n=" << *t.population_n << '\n';
}

void save_tabulation(const std::filesystem::path& path, const Tabulation& t) {
  {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_tabulation_csv(out, t);
  }
  auto meta_path = path;
  meta_path.replace_extension(".meta");
  std::ofstream meta(meta_path);
  if (!meta) throw Error("cannot write " + meta_path.string());
  write_metadata(meta, t);
}

std::vector<std::string> ValidationReport::offending_columns() const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (!c.ok) out.push_back(c.column);
  }
  return out;
}

ValidationReport validate_totals(const Tabulation& t) {
  ValidationReport report;
  auto check = [](std::string name, std::int64_t sum, std::optional<std::int64_t> published) {
    ColumnCheck c{std::move(name), sum, published, false};
    c.ok = published.has_value() &&
           (sum > *published ? sum - *published : *published - sum) <= kRoundingTolerance;
    return c;
  };
  std::int64_t count_sum = 0;
  std::int64_t total_sum = 0;
  for (const auto& g : t.groups) {
    count_sum += g.count;
    total_sum += g.total;
  }
  report.columns.push_back(check("count", count_sum, t.grand_total_count));
  report.columns.push_back(check("total", total_sum, t.grand_total_income));
  report.passed = std::all_of(report.columns.begin(), report.columns.end(),
                              [](const ColumnCheck& c) { return c.ok; });
  return report;
}

Tabulation merge_zero_count_groups(const Tabulation& t) {
  const auto& in = t.groups;
  if (std::none_of(in.begin(), in.end(), [](const IncomeGroup& g) { return g.count > 0; })) {
    throw ValidationError("every group has zero count");
  }
  Tabulation out = t;
  out.groups.clear();
  std::int64_t carried = 0;  // totals of zero groups awaiting a lower neighbour
  for (const auto& g : in) {
    if (g.count == 0) {
      carried += g.total;
      continue;
    }
    IncomeGroup merged = g;
    merged.total += carried;
    carried = 0;
    out.groups.push_back(merged);
  }
  if (carried != 0) out.groups.back().total += carried;
  return out;
}

namespace {

Tabulation coarsen(const Tabulation& t, const std::vector<double>& keep) {
  // `keep` is sorted descending.
  Tabulation out = t;
  out.groups.clear();
  std::set<double> kept(keep.begin(), keep.end());
  IncomeGroup pending;  // accumulates rows until a kept threshold closes the span
  bool have_pending = false;
  for (const auto& g : t.threshold_groups()) {
    pending.count += g.count;
    pending.total += g.total;
    have_pending = true;
    if (kept.contains(*g.lower_threshold)) {
      pending.lower_threshold = g.lower_threshold;
      out.groups.push_back(pending);
      pending = IncomeGroup{};
      have_pending = false;
    }
  }
  IncomeGroup bottom;
  bool have_bottom = false;
  if (have_pending) {
    bottom.count += pending.count;
    bottom.total += pending.total;
    have_bottom = true;
  }
  if (t.has_bottom_row()) {
    bottom.count += t.groups.back().count;
    bottom.total += t.groups.back().total;
    have_bottom = true;
  }
  if (have_bottom) out.groups.push_back(bottom);
  return out;
}

std::vector<double> thresholds_of(const Tabulation& t) {
  std::vector<double> out;
  for (const auto& g : t.threshold_groups()) out.push_back(*g.lower_threshold);
  return out;
}

}  // namespace

std::pair<Tabulation, Tabulation> merge_to_common_thresholds(const Tabulation& a,
                                                             const Tabulation& b) {
  const auto ta = thresholds_of(a);
  const auto tb = thresholds_of(b);
  if (ta.empty() || tb.empty()) throw ValidationError("both tabulations need thresholds");
  std::vector<double> common;
  // Both lists are descending.
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common),
                        std::greater<>());
  if (common.size() < 2) {
    throw ValidationError("tabulations share " + std::to_string(common.size()) +
                          " threshold(s); at least 2 are required");
  }
  return {coarsen(a, common), coarsen(b, common)};
}

CapitalDerivation derive_capital(const Tabulation& agi, const Tabulation& wages) {
  if (agi.year != wages.year) {
    throw ValidationError("AGI and wage tables are for different years (" +
                          std::to_string(agi.year) + " vs " + std::to_string(wages.year) + ")");
  }
  if (agi.groups.size() != wages.groups.size()) {
    throw ValidationError("AGI and wage tables have different group counts (" +
                          std::to_string(agi.groups.size()) + " vs " +
                          std::to_string(wages.groups.size()) + "); merge them first");
  }
  CapitalDerivation result;
  Tabulation& cap = result.capital;
  cap.year = agi.year;
  cap.income_concept = IncomeConcept::kCapital;
  cap.ranked_by = agi.ranked_by;
  cap.population_n = agi.population_n;
  cap.grand_total_count = agi.grand_total_count;
  if (agi.grand_total_income && wages.grand_total_income) {
    cap.grand_total_income = *agi.grand_total_income - *wages.grand_total_income;
  }
  for (std::size_t k = 0; k < agi.groups.size(); ++k) {
    const auto& a = agi.groups[k];
    const auto& w = wages.groups[k];
    if (a.has_threshold() != w.has_threshold() ||
        (a.has_threshold() && *a.lower_threshold != *w.lower_threshold)) {
      throw ValidationError("group " + std::to_string(k) +
                            " thresholds differ between AGI and wage tables; merge them first");
    }
    IncomeGroup g;
    g.lower_threshold = a.lower_threshold;
    g.count = a.count;
    g.total = a.total - w.total;
    if (g.total < 0) result.negative_groups.push_back(k);
    cap.groups.push_back(g);
  }
  return result;
}

CumulativeView cumulate(const Tabulation& t, bool drop_nonpositive) {
  std::span<const IncomeGroup> groups(t.groups);
  if (drop_nonpositive) {
    groups = t.threshold_groups();
    while (!groups.empty() && groups.back().total <= 0) groups = groups.first(groups.size() - 1);
  }
  CumulativeView cv;
  std::int64_t n = 0;
  std::int64_t s = 0;
  for (const auto& g : groups) {
    n += g.count;
    s += g.total;
    cv.n.push_back(n);
    cv.S.push_back(s);
    cv.thresholds.push_back(g.lower_threshold);
  }
  return cv;
}

}  // namespace paretotab
