#pragma once

#include <string>
#include <vector>

#include "paretotab/estimators.hpp"
#include "paretotab/simulate.hpp"

namespace paretotab {

// Pretty-printed JSON objects. Absent optionals become null.
std::string to_json(const EstimateResult& r, int indent = 2);
std::string to_json(const McReport& r, bool include_records = false, int indent = 2);
std::string to_json(const std::vector<ScanPoint>& scan, int indent = 2);

// Flat CSV: one header line and one row per value. Absent optionals and empty
// warning lists are empty cells; several warnings are joined with "; ".
std::string estimate_csv_header();
std::string estimate_csv_row(const EstimateResult& r);

std::string mc_report_csv_header();
std::string mc_report_csv_row(const McReport& r);

// replication,alpha_hat,se,L_used,error
std::string replications_csv(const McReport& r);

std::string scan_csv(const std::vector<ScanPoint>& scan);

// CSV cell quoting: wraps in double quotes when the text holds a comma, quote
// or newline.
std::string csv_escape(const std::string& s);

}  // namespace paretotab
