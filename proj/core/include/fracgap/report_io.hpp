#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "fracgap/bounds.hpp"
#include "fracgap/spectra.hpp"

namespace fracgap {

/// One JSON object carrying every field of the report. Field names are
/// stable; see schemas/bound_report.schema.json.
std::string to_json(const BoundReport& report, int indent = 2);
std::string to_json(const LevelSetReport& report, int indent = 2);
std::string to_json(const TwoBallResult& result, int indent = 2);

/// Aggregate CSV: domain,alpha,lambda1,lambda2,gap,sup_margin,gap_margin.
void write_summary_csv(std::ostream& out, std::span<const BoundReport> reports);

}  // namespace fracgap
