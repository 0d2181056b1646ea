#include "manifest.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include <fmt/format.h>

#include "paretotab/error.hpp"

namespace paretotab::cli {

std::string_view to_string(Command c) {
  switch (c) {
    case Command::kIngest: return "ingest";
    case Command::kEstimate: return "estimate";
    case Command::kScan: return "scan";
    case Command::kShares: return "shares";
    case Command::kSampleframe: return "sampleframe";
    case Command::kSimulate: return "simulate";
  }
  return "?";
}

namespace {

int parse_year(std::string_view s, std::string_view text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("bad year '" + std::string(s) + "' in --years " + std::string(text));
  }
  return v;
}

}  // namespace

YearFilter YearFilter::parse(std::string_view text) {
  YearFilter f;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? comma : comma - start);
    if (!item.empty()) {
      const auto dash = item.find('-', 1);
      const int lo = parse_year(item.substr(0, dash), text);
      const int hi = dash == std::string_view::npos ? lo : parse_year(item.substr(dash + 1), text);
      if (hi < lo) throw ValidationError("empty year range in --years " + std::string(text));
      f.ranges_.emplace_back(lo, hi);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return f;
}

bool YearFilter::contains(int year) const {
  if (ranges_.empty()) return true;
  return std::any_of(ranges_.begin(), ranges_.end(),
                     [year](const auto& r) { return year >= r.first && year <= r.second; });
}

std::vector<int> YearFilter::years() const {
  std::set<int> out;
  for (const auto& [lo, hi] : ranges_) {
    for (int y = lo; y <= hi; ++y) out.insert(y);
  }
  return {out.begin(), out.end()};
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunManifest::canonical() const {
  std::map<std::string, std::string> kv;
  auto join = [](const auto& items, auto&& fn) {
    std::string s;
    for (const auto& it : items) {
      if (!s.empty()) s += ',';
      s += fn(it);
    }
    return s;
  };
  auto num = [](double v) { return fmt::format("{}", v); };
  kv["command"] = to_string(command);
  kv["input"] = join(inputs, [](const std::string& s) { return s; });
  kv["concept"] = concept_filter;
  kv["years"] = years_spec;
  kv["method"] = join(methods, [](Method m) { return std::string(paretotab::to_string(m)); });
  kv["format"] = join(formats, [](const std::string& s) { return s; });
  kv["top_fraction"] = num(tw.top_fraction);
  kv["tw.alpha_init"] = num(tw.alpha_init);
  kv["tw.alpha_lo"] = num(tw.alpha_lo);
  kv["tw.alpha_hi"] = num(tw.alpha_hi);
  kv["tw.iteration_tol"] = num(tw.iteration_tol);
  kv["tw.max_iterations"] = std::to_string(tw.max_iterations);
  kv["tw.objective_tol"] = num(tw.objective_tol);
  kv["population"] = population ? num(*population) : "";
  kv["population_csv"] = population_csv;
  kv["alt_population"] = alt_population ? "true" : "false";
  kv["cutover"] = std::to_string(cutover);
  kv["implied_alpha"] = implied_alpha ? num(*implied_alpha) : "";
  kv["seed"] = std::to_string(sim.seed);
  kv["sim.alpha"] = num(sim.alpha_true);
  kv["sim.cutoff"] = num(sim.cutoff);
  kv["sim.n_draws"] = std::to_string(sim.n_draws);
  kv["sim.replications"] = std::to_string(sim.replications);
  kv["sim.resolution"] = num(sim.resolution);
  kv["sim.top_fraction"] = num(sim.top_fraction);
  kv["sim.fractiles"] = join(sim.fractile_grid, num);
  kv["sim.thresholds"] = join(sim.threshold_grid, num);
  kv["sim.method"] = paretotab::to_string(sim_method);
  kv["sim.dump_replications"] = dump_replications ? "true" : "false";
  std::string out;
  for (const auto& [k, v] : kv) out += k + '=' + v + '\n';
  return out;
}

std::string RunManifest::hash() const { return fmt::format("{:016x}", fnv1a64(canonical())); }

}  // namespace paretotab::cli
