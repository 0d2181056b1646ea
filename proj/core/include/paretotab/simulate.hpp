#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paretotab/estimators.hpp"
#include "paretotab/tabulation.hpp"

namespace paretotab {

// Counter-based stream: output i is splitmix64(key + i * golden gamma), with
// the key derived from (seed, stream). Streams are independent of the order
// in which they are consumed.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  // Uniform on the open interval (0, 1).
  double uniform();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

struct SimConfig {
  double alpha_true = 1.5;
  double cutoff = 1.0;
  std::int64_t n_draws = 1'000'000;
  // Exactly one grid is used. A fractile grid (increasing top fractiles)
  // groups the sample by rank, giving partial sums of order statistics; a
  // threshold grid groups it by value.
  std::vector<double> fractile_grid;
  std::vector<double> threshold_grid;
  int replications = 200;
  std::uint64_t seed = 1;
  // Integer amount units per unit of income when totals are integerized.
  double resolution = 1e6;
  // Group selection for TW: the largest L with n_{L+1}/n within this fraction.
  double top_fraction = 1.0;

  static std::vector<double> default_fractile_grid();
  void validate() const;
};

// c * (1 - u)^(-1/alpha).
double pareto_quantile(double u, double alpha, double cutoff);

// n_draws Pareto(alpha_true, cutoff) values for replication `replication`.
std::vector<double> sample_pareto(const SimConfig& cfg, std::int64_t replication);

// Groups by value: [t_k, t_{k-1}) for descending thresholds, plus a bottom row
// for values below the lowest threshold when there are any. Totals are sums of
// llround(y * resolution), so they add up exactly.
Tabulation tabulate_by_thresholds(std::span<const double> sample,
                                  std::span<const double> thresholds, double resolution);

// Groups by rank: group k holds ranks n_{k-1}+1..n_k with n_k = round(p_k n);
// its lower threshold is the n_k-th largest value. The remainder forms a
// bottom row.
Tabulation tabulate_by_fractiles(std::span<const double> sample, std::span<const double> fractiles,
                                 double resolution);

// Dispatches on whichever grid `cfg` carries.
Tabulation tabulate_sample(std::span<const double> sample, const SimConfig& cfg);

struct ReplicationRecord {
  std::int64_t replication = 0;
  std::optional<double> alpha_hat;
  std::optional<double> se;
  int L_used = 0;
  std::string error;

  bool operator==(const ReplicationRecord&) const = default;
};

struct McReport {
  Method method = Method::kTw;
  double alpha_true = 0.0;
  std::int64_t n_draws = 0;
  int replications = 0;
  int failures = 0;
  double mean_alpha_hat = 0.0;
  double sd_alpha_hat = 0.0;
  std::optional<double> mean_asymptotic_se;
  std::optional<double> ci_coverage_95;
  std::vector<ReplicationRecord> records;

  double bias() const { return mean_alpha_hat - alpha_true; }
};

// Runs every replication end to end (sample, tabulate, estimate) and
// aggregates. Replications may run on `threads` workers (0: hardware
// concurrency); the report does not depend on the thread count. Throws
// EstimationError when more than 10% of replications fail.
McReport mc_study(const SimConfig& cfg, Method method, const TwConfig& tw = {}, unsigned threads = 0);

}  // namespace paretotab
