#include <algorithm>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "paretotab/error.hpp"
#include "paretotab/sampleframe.hpp"

namespace paretotab::cli {

namespace {

struct Options {
  std::vector<std::string> inputs;
  std::string concept_filter = "all";
  std::string years;
  std::vector<std::string> methods;
  std::vector<std::string> formats{"csv"};
  std::optional<double> top_fraction;
  std::optional<double> population;
  std::string population_csv;
  bool alt_population = false;
  int cutover = kDefaultCutoverYear;
  std::optional<double> implied_alpha;
  std::string out_dir = ".";
  TwConfig tw;
  SimConfig sim;
  bool dump_replications = false;
  unsigned threads = 0;
};

std::vector<Method> resolve_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& s : names) {
    if (s == "all") {
      out = {Method::kTw, Method::kMl, Method::kFp, Method::kAp};
      break;
    }
    out.push_back(method_from_string(s));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pareto exponent estimation from tabulated income summaries", "paretotab"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.set_config("--config", "", "Read flag values from a key=value file (flags on the command line win)");
  app.require_subcommand(1, 1);

  Options o;
  const auto method_names = CLI::IsMember({"tw", "ml", "fp", "ap", "all"}, CLI::ignore_case);
  app.add_option("-i,--input", o.inputs, "Tabulation CSV (repeatable); a .meta sidecar is read if present");
  app.add_option("--concept", o.concept_filter, "Income concept to process")
      ->check(CLI::IsMember({"agi", "wages", "capital", "all"}, CLI::ignore_case));
  app.add_option("--years", o.years, "Years to process, e.g. 2019, 1950-2019 or 1916,1950-1960");
  app.add_option("--method", o.methods, "Estimators: tw, ml, fp, ap or all (comma separated)")
      ->delimiter(',')
      ->transform(method_names);
  app.add_option("--top-fraction", o.top_fraction, "Fraction of the population used for estimation")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--population", o.population, "Population of potential tax units (overrides other sources)")
      ->check(CLI::PositiveNumber);
  app.add_option("--population-csv", o.population_csv, "Demographic series CSV (year,A,J,M,T)");
  app.add_flag("--alt-population", o.alt_population, "Use A - M instead of A - J for the population");
  app.add_option("--cutover", o.cutover, "First year for which A - J is used directly");
  app.add_option("--implied-alpha", o.implied_alpha, "Exponent for implied shares (default: the TW estimate)");
  app.add_option("--out", o.out_dir, "Output directory");
  app.add_option("--format", o.formats, "Output formats: csv, json, svg (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "svg"}, CLI::ignore_case));

  auto* tw = app.add_option_group("Minimum-distance estimator");
  tw->add_option("--alpha-init", o.tw.alpha_init, "Exponent for the first weighting matrix");
  tw->add_option("--alpha-lo", o.tw.alpha_lo, "Lower end of the search interval");
  tw->add_option("--alpha-hi", o.tw.alpha_hi, "Upper end of the search interval");
  tw->add_option("--iteration-tol", o.tw.iteration_tol, "Convergence tolerance on the exponent");
  tw->add_option("--max-iterations", o.tw.max_iterations, "Maximum reweighting iterations");
  tw->add_option("--objective-tol", o.tw.objective_tol, "Final bracket width of the scalar search");

  auto* sim = app.add_option_group("Simulation");
  sim->add_option("--alpha", o.sim.alpha_true, "True Pareto exponent");
  sim->add_option("--cutoff", o.sim.cutoff, "Pareto scale c");
  sim->add_option("--n-draws", o.sim.n_draws, "Draws per replication");
  sim->add_option("--replications", o.sim.replications, "Number of replications");
  sim->add_option("--seed", o.sim.seed, "Random seed");
  sim->add_option("--fractiles", o.sim.fractile_grid, "Top fractiles grouping the sample by rank")->delimiter(',');
  sim->add_option("--thresholds", o.sim.threshold_grid, "Thresholds grouping the sample by value")->delimiter(',');
  sim->add_option("--resolution", o.sim.resolution, "Integer units per unit of income");
  sim->add_flag("--dump-replications", o.dump_replications, "Write per-replication records");
  sim->add_option("--threads", o.threads, "Worker threads (0: all cores); does not affect results");

  const std::pair<const char*, Command> commands[] = {
      {"ingest", Command::kIngest},           {"estimate", Command::kEstimate},
      {"scan", Command::kScan},               {"shares", Command::kShares},
      {"sampleframe", Command::kSampleframe}, {"simulate", Command::kSimulate}};
  const char* descriptions[] = {
      "Validate, clean and re-emit tabulations (derives capital from AGI and wages)",
      "Estimate Pareto exponents per year, concept and method",
      "Estimate the exponent for every admissible tail cutoff",
      "Top-share curves and implied top 0.1% shares",
      "Potential tax units from a demographic series",
      "Monte Carlo study of an estimator on Pareto samples"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    subs.push_back(app.add_subcommand(commands[i].first, descriptions[i])->fallthrough());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunManifest m;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) m.command = commands[i].second;
  }
  auto usage = [&](const std::string& msg) {
    err << "usage error: " << msg << "\nRun with --help for more information.\n";
    return kExitUsage;
  };
  try {
    m.inputs = o.inputs;
    m.concept_filter = o.concept_filter;
    std::transform(m.concept_filter.begin(), m.concept_filter.end(), m.concept_filter.begin(), ::tolower);
    m.years_spec = o.years;
    m.years = YearFilter::parse(o.years);
    m.methods = resolve_methods(o.methods.empty() ? std::vector<std::string>{"tw"} : o.methods);
    m.tw = o.tw;
    if (o.top_fraction) m.tw.top_fraction = *o.top_fraction;
    m.tw.validate();
    m.population = o.population;
    m.population_csv = o.population_csv;
    m.alt_population = o.alt_population;
    m.cutover = o.cutover;
    m.implied_alpha = o.implied_alpha;
    m.sim = o.sim;
    if (o.top_fraction) m.sim.top_fraction = *o.top_fraction;
    m.dump_replications = o.dump_replications;
    m.threads = o.threads;
    m.out_dir = o.out_dir;
    m.formats.clear();
    for (auto f : o.formats) {
      std::transform(f.begin(), f.end(), f.begin(), ::tolower);
      m.formats.insert(f);
    }
    if (m.command == Command::kSimulate) {
      if (m.methods.size() != 1) return usage("simulate takes exactly one --method");
      m.sim_method = m.methods.front();
      m.sim.validate();
    } else if (m.command == Command::kSampleframe) {
      if (m.population_csv.empty()) return usage("sampleframe needs --population-csv");
    } else if (m.inputs.empty()) {
      return usage(std::string(to_string(m.command)) + " needs at least one --input");
    }
    if (m.implied_alpha && !(*m.implied_alpha > 1.0)) return usage("--implied-alpha must exceed 1");
  } catch (const Error& e) {
    return usage(e.what());
  }
  return run_command(m, out, err);
}

}  // namespace paretotab::cli
