#include "paretotab/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

#include "paretotab/error.hpp"

namespace paretotab {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGoldenGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream * 0xD1B54A32D192ED03ULL + 1))) {}

std::uint64_t CounterRng::next() { return splitmix64(key_ + kGoldenGamma * counter_++); }

double CounterRng::uniform() {
  // 53 random bits, centred in their cell so 0 and 1 never occur.
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> SimConfig::default_fractile_grid() { return {0.001, 0.002, 0.004, 0.008, 0.016}; }

void SimConfig::validate() const {
  if (!(alpha_true > 1.0)) throw DomainError("alpha_true must exceed 1");
  if (!(cutoff > 0.0)) throw DomainError("cutoff must be positive");
  if (replications < 1) throw DomainError("replications must be at least 1");
  if (!(resolution > 0.0)) throw DomainError("resolution must be positive");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw DomainError("top_fraction must lie in (0, 1]");
  if (!fractile_grid.empty() && !threshold_grid.empty()) {
    throw DomainError("give either a fractile grid or a threshold grid, not both");
  }
  const std::size_t groups = std::max(fractile_grid.size(), threshold_grid.size()) + 1;
  if (n_draws < static_cast<std::int64_t>(10 * groups)) {
    throw DomainError("n_draws must be at least 10 times the number of groups");
  }
  for (std::size_t i = 0; i < fractile_grid.size(); ++i) {
    if (!(fractile_grid[i] > 0.0 && fractile_grid[i] < 1.0)) throw DomainError("fractiles must lie in (0, 1)");
    if (i > 0 && !(fractile_grid[i] > fractile_grid[i - 1])) {
      throw DomainError("fractile grid must increase strictly");
    }
  }
  for (double t : threshold_grid) {
    if (!(t > 0.0)) throw DomainError("thresholds must be positive");
  }
}

double pareto_quantile(double u, double alpha, double cutoff) {
  return cutoff * std::pow(1.0 - u, -1.0 / alpha);
}

std::vector<double> sample_pareto(const SimConfig& cfg, std::int64_t replication) {
  CounterRng rng(cfg.seed, static_cast<std::uint64_t>(replication));
  std::vector<double> out(static_cast<std::size_t>(cfg.n_draws));
  for (auto& y : out) y = pareto_quantile(rng.uniform(), cfg.alpha_true, cfg.cutoff);
  return out;
}

namespace {

std::int64_t to_units(double y, double resolution) {
  const double scaled = std::round(y * resolution);
  if (!(std::abs(scaled) < 9.0e18)) throw DomainError("draw too large to integerize at this resolution");
  return static_cast<std::int64_t>(scaled);
}

void add_checked(std::int64_t& acc, std::int64_t v) {
  if (__builtin_add_overflow(acc, v, &acc)) throw DomainError("integerized total overflows 64 bits");
}

void finish(Tabulation& t, std::size_t n) {
  t.income_concept = IncomeConcept::kOther;
  t.ranked_by = IncomeConcept::kOther;
  std::int64_t count = 0, total = 0;
  for (const auto& g : t.groups) {
    count += g.count;
    add_checked(total, g.total);
  }
  t.grand_total_count = count;
  t.grand_total_income = total;
  t.population_n = static_cast<std::int64_t>(n);
}

}  // namespace

Tabulation tabulate_by_thresholds(std::span<const double> sample, std::span<const double> thresholds,
                                  double resolution) {
  std::vector<double> desc(thresholds.begin(), thresholds.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());
  if (std::adjacent_find(desc.begin(), desc.end()) != desc.end()) {
    throw DomainError("thresholds must be distinct");
  }
  Tabulation t;
  t.groups.resize(desc.size());
  for (std::size_t k = 0; k < desc.size(); ++k) t.groups[k].lower_threshold = desc[k];
  IncomeGroup bottom;
  for (double y : sample) {
    // First threshold (descending) that y reaches.
    const auto it = std::lower_bound(desc.begin(), desc.end(), y, std::greater<>());
    auto& g = it == desc.end() ? bottom : t.groups[static_cast<std::size_t>(it - desc.begin())];
    ++g.count;
    add_checked(g.total, to_units(y, resolution));
  }
  if (bottom.count > 0) t.groups.push_back(bottom);
  finish(t, sample.size());
  return t;
}

Tabulation tabulate_by_fractiles(std::span<const double> sample, std::span<const double> fractiles,
                                 double resolution) {
  const std::size_t n = sample.size();
  std::vector<std::size_t> ranks;
  for (double p : fractiles) {
    const auto r = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
    if (r == 0 || r > n || (!ranks.empty() && r <= ranks.back())) {
      throw DomainError("fractile grid does not give increasing ranks for this sample size");
    }
    ranks.push_back(r);
  }
  std::vector<double> values(sample.begin(), sample.end());
  const std::size_t top = ranks.empty() ? 0 : ranks.back();
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(top) - (top > 0 ? 1 : 0),
                   values.end(), std::greater<>());
  std::sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(top), std::greater<>());

  Tabulation t;
  std::size_t start = 0;
  for (std::size_t r : ranks) {
    IncomeGroup g;
    g.lower_threshold = values[r - 1];
    for (std::size_t i = start; i < r; ++i) add_checked(g.total, to_units(values[i], resolution));
    g.count = static_cast<std::int64_t>(r - start);
    t.groups.push_back(g);
    start = r;
  }
  if (start < n) {
    IncomeGroup bottom;
    for (std::size_t i = start; i < n; ++i) add_checked(bottom.total, to_units(values[i], resolution));
    bottom.count = static_cast<std::int64_t>(n - start);
    t.groups.push_back(bottom);
  }
  finish(t, n);
  return t;
}

Tabulation tabulate_sample(std::span<const double> sample, const SimConfig& cfg) {
  if (!cfg.threshold_grid.empty()) return tabulate_by_thresholds(sample, cfg.threshold_grid, cfg.resolution);
  const auto grid = cfg.fractile_grid.empty() ? SimConfig::default_fractile_grid() : cfg.fractile_grid;
  return tabulate_by_fractiles(sample, grid, cfg.resolution);
}

namespace {

ReplicationRecord run_replication(const SimConfig& cfg, Method method, const TwConfig& tw,
                                  std::int64_t replication) {
  ReplicationRecord rec;
  rec.replication = replication;
  try {
    const auto sample = sample_pareto(cfg, replication);
    const auto t = tabulate_sample(sample, cfg);
    const double n = static_cast<double>(cfg.n_draws);
    EstimateResult est;
    switch (method) {
      case Method::kTw: {
        TwConfig c = tw;
        c.top_fraction = cfg.top_fraction;
        est = tw_estimate(t, n, c);
        break;
      }
      case Method::kMl:
        est = ml_estimate(t, static_cast<int>(t.threshold_groups().size()));
        break;
      case Method::kFp:
        est = fp_estimate(cumulate(t, true), n);
        break;
      case Method::kAp:
        est = ap_estimate(share_curve_from_tabulation(t, n));
        break;
    }
    rec.alpha_hat = est.alpha_hat;
    rec.se = est.se;
    rec.L_used = est.L_used;
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

McReport mc_study(const SimConfig& cfg, Method method, const TwConfig& tw, unsigned threads) {
  cfg.validate();
  McReport report;
  report.method = method;
  report.alpha_true = cfg.alpha_true;
  report.n_draws = cfg.n_draws;
  report.replications = cfg.replications;
  report.records.resize(static_cast<std::size_t>(cfg.replications));

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.replications));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (std::int64_t i = next++; i < cfg.replications; i = next++) {
      report.records[static_cast<std::size_t>(i)] = run_replication(cfg, method, tw, i);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }

  std::vector<double> alphas;
  double se_sum = 0.0;
  int se_count = 0;
  int covered = 0;
  for (const auto& rec : report.records) {
    if (!rec.alpha_hat) {
      ++report.failures;
      continue;
    }
    alphas.push_back(*rec.alpha_hat);
    if (rec.se) {
      se_sum += *rec.se;
      ++se_count;
      if (std::abs(*rec.alpha_hat - cfg.alpha_true) <= 1.96 * *rec.se) ++covered;
    }
  }
  if (report.failures * 10 > cfg.replications) {
    throw EstimationError(std::to_string(report.failures) + " of " + std::to_string(cfg.replications) +
                          " replications failed; first error: " +
                          std::find_if(report.records.begin(), report.records.end(),
                                       [](const ReplicationRecord& r) { return !r.error.empty(); })
                              ->error);
  }
  if (alphas.empty()) throw EstimationError("no replication succeeded");
  const double m = std::accumulate(alphas.begin(), alphas.end(), 0.0) / static_cast<double>(alphas.size());
  double ss = 0.0;
  for (double a : alphas) ss += (a - m) * (a - m);
  report.mean_alpha_hat = m;
  report.sd_alpha_hat = alphas.size() > 1 ? std::sqrt(ss / static_cast<double>(alphas.size() - 1)) : 0.0;
  if (se_count > 0) {
    report.mean_asymptotic_se = se_sum / se_count;
    report.ci_coverage_95 = static_cast<double>(covered) / se_count;
  }
  return report;
}

}  // namespace paretotab
