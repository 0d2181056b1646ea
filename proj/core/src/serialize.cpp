#include "paretotab/serialize.hpp"

#include <sstream>

#include "json.hpp"
#include "text_util.hpp"

namespace paretotab {

using nlohmann::ordered_json;

namespace {

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string cell(const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); }

std::string join_warnings(const std::vector<std::string>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0) out += "; ";
    out += w[i];
  }
  return out;
}

ordered_json estimate_object(const EstimateResult& r) {
  ordered_json j;
  j["method"] = std::string(to_string(r.method));
  j["alpha_hat"] = r.alpha_hat;
  j["se"] = opt(r.se);
  j["L_used"] = r.L_used;
  j["iterations"] = r.iterations;
  j["objective_value"] = opt(r.objective_value);
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string to_json(const EstimateResult& r, int indent) { return estimate_object(r).dump(indent); }

std::string to_json(const McReport& r, bool include_records, int indent) {
  ordered_json j;
  j["method"] = std::string(to_string(r.method));
  j["alpha_true"] = r.alpha_true;
  j["n_draws"] = r.n_draws;
  j["replications"] = r.replications;
  j["failures"] = r.failures;
  j["mean_alpha_hat"] = r.mean_alpha_hat;
  j["bias"] = r.bias();
  j["sd_alpha_hat"] = r.sd_alpha_hat;
  j["mean_asymptotic_se"] = opt(r.mean_asymptotic_se);
  j["ci_coverage_95"] = opt(r.ci_coverage_95);
  if (include_records) {
    auto& recs = j["records"] = ordered_json::array();
    for (const auto& rec : r.records) {
      ordered_json e;
      e["replication"] = rec.replication;
      e["alpha_hat"] = opt(rec.alpha_hat);
      e["se"] = opt(rec.se);
      e["L_used"] = rec.L_used;
      e["error"] = rec.error;
      recs.push_back(std::move(e));
    }
  }
  return j.dump(indent);
}

std::string to_json(const std::vector<ScanPoint>& scan, int indent) {
  auto arr = ordered_json::array();
  for (const auto& p : scan) {
    ordered_json e;
    e["L"] = p.L;
    e["threshold"] = opt(p.threshold);
    e["fractile"] = p.fractile;
    e["alpha_hat"] = opt(p.alpha_hat);
    e["se"] = opt(p.se);
    e["error"] = p.error;
    arr.push_back(std::move(e));
  }
  return arr.dump(indent);
}

std::string estimate_csv_header() { return "method,alpha_hat,se,L_used,iterations,objective_value,warnings"; }

std::string estimate_csv_row(const EstimateResult& r) {
  std::ostringstream out;
  out << to_string(r.method) << ',' << detail::format_double(r.alpha_hat) << ',' << cell(r.se) << ','
      << r.L_used << ',' << r.iterations << ',' << cell(r.objective_value) << ','
      << csv_escape(join_warnings(r.warnings));
  return out.str();
}

std::string mc_report_csv_header() {
  return "method,alpha_true,n_draws,replications,failures,mean_alpha_hat,bias,sd_alpha_hat,"
         "mean_asymptotic_se,ci_coverage_95";
}

std::string mc_report_csv_row(const McReport& r) {
  std::ostringstream out;
  out << to_string(r.method) << ',' << detail::format_double(r.alpha_true) << ',' << r.n_draws << ','
      << r.replications << ',' << r.failures << ',' << detail::format_double(r.mean_alpha_hat) << ','
      << detail::format_double(r.bias()) << ',' << detail::format_double(r.sd_alpha_hat) << ','
      << cell(r.mean_asymptotic_se) << ',' << cell(r.ci_coverage_95);
  return out.str();
}

std::string replications_csv(const McReport& r) {
  std::ostringstream out;
  out << "replication,alpha_hat,se,L_used,error\n";
  for (const auto& rec : r.records) {
    out << rec.replication << ',' << cell(rec.alpha_hat) << ',' << cell(rec.se) << ',' << rec.L_used << ','
        << csv_escape(rec.error) << '\n';
  }
  return out.str();
}

std::string scan_csv(const std::vector<ScanPoint>& scan) {
  std::ostringstream out;
  out << "L,threshold,fractile,alpha_hat,se,error\n";
  for (const auto& p : scan) {
    out << p.L << ',' << cell(p.threshold) << ',' << detail::format_double(p.fractile) << ','
        << cell(p.alpha_hat) << ',' << cell(p.se) << ',' << csv_escape(p.error) << '\n';
  }
  return out.str();
}

}  // namespace paretotab
