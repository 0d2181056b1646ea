#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "paretotab/estimators.hpp"
#include "paretotab/simulate.hpp"

namespace paretotab::cli {

enum class Command { kIngest, kEstimate, kScan, kShares, kSampleframe, kSimulate };

std::string_view to_string(Command c);

// Inclusive year ranges from text like "2019", "1950-2019" or "1916,1950-1960".
class YearFilter {
 public:
  YearFilter() = default;
  static YearFilter parse(std::string_view text);

  bool empty() const { return ranges_.empty(); }
  bool contains(int year) const;
  // Every year covered, ascending.
  std::vector<int> years() const;

 private:
  std::vector<std::pair<int, int>> ranges_;
};

// Everything that determines a run's output. The output directory and the
// thread count are excluded from the hash because they do not change what is
// written.
struct RunManifest {
  Command command = Command::kEstimate;
  std::vector<std::string> inputs;
  std::string concept_filter = "all";  // agi, wages, capital or all
  std::string years_spec;
  YearFilter years;
  std::vector<Method> methods;
  TwConfig tw;
  std::optional<double> population;
  std::string population_csv;
  bool alt_population = false;
  int cutover = 1950;
  std::optional<double> implied_alpha;
  SimConfig sim;
  Method sim_method = Method::kTw;
  bool dump_replications = false;
  unsigned threads = 0;
  std::string out_dir = ".";
  std::set<std::string> formats{"csv"};

  bool wants(std::string_view format) const { return formats.contains(std::string(format)); }

  // Sorted key=value lines describing the run.
  std::string canonical() const;
  // FNV-1a (64-bit) of canonical(), as 16 hex digits.
  std::string hash() const;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace paretotab::cli
