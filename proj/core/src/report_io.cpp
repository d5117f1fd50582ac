#include "fracgap/report_io.hpp"

#include <json.hpp>
#include <ostream>

namespace fracgap {

namespace {

using nlohmann::json;

template <class T>
json optional_value(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string to_json(const BoundReport& r, int indent) {
  json j;
  j["label"] = r.label;
  j["domain"] = r.domain;
  j["alpha"] = r.alpha;
  j["dim"] = r.dim;
  j["h"] = r.h;
  j["nodes"] = r.nodes;
  j["lambda1"] = r.lambda1;
  j["lambda2"] = r.lambda2;
  j["gap"] = r.gap;
  j["sup_phi1"] = r.sup_phi1;
  j["diameter"] = r.diameter;
  j["inscribed_radius"] = r.inscribed_radius;
  j["sup_bound_rhs"] = r.sup_bound_rhs;
  j["gap_bound_stated"] = r.gap_bound_stated;
  j["gap_bound_derived"] = r.gap_bound_derived;
  j["ball_bound_rhs"] = r.ball_bound_rhs;
  j["ball_bound_slack"] = r.ball_bound_slack;
  j["reference_value"] = optional_value(r.reference_value);
  j["reference_pipeline_value"] = optional_value(r.reference_pipeline_value);
  j["reference_mismatch"] = r.reference_mismatch;
  j["variational_energy"] = r.variational_energy;
  j["orthogonality_identity"] = r.orthogonality_identity;
  j["verdicts"] = {
      {"sup_bound", r.verdicts.sup_bound},
      {"gap_bound_derived", r.verdicts.gap_bound_derived},
      {"gap_bound_stated", r.verdicts.gap_bound_stated},
      {"ball_bound", r.verdicts.ball_bound},
  };
  j["passed"] = r.passed();
  return j.dump(indent);
}

std::string to_json(const LevelSetReport& r, int indent) {
  json j;
  j["lambda1"] = r.lambda1;
  j["sup_phi"] = r.sup_phi;
  j["level_set_size"] = r.level_set.size();
  j["measure"] = r.measure;
  j["sup_exit"] = r.sup_exit;
  j["sandwich"] = r.sandwich;
  j["sup_phi_limit"] = r.sup_phi_limit;
  j["sup_phi_ok"] = r.sup_phi_ok;
  j["ball_measure"] = r.ball_measure;
  j["measure_ok"] = r.measure_ok;
  return j.dump(indent);
}

std::string to_json(const TwoBallResult& r, int indent) {
  json j;
  j["alpha"] = r.params.alpha;
  j["dim"] = r.params.dim;
  j["h"] = r.h;
  j["lambda1_single"] = r.lambda1_single;
  j["slope"] = r.slope;
  j["intercept"] = r.intercept;
  j["target_slope"] = -(r.params.dim + r.params.alpha);
  j["all_bracketed"] = r.all_bracketed();
  j["all_monotone"] = r.all_monotone();
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({
        {"separation", row.separation},
        {"nodes", row.nodes},
        {"lambda1", row.lambda1},
        {"lambda2", row.lambda2},
        {"gap", row.gap},
        {"lower_bound", row.lower_bound},
        {"sign_energy", row.sign_energy},
        {"upper_bound_direct", row.upper_bound_direct},
        {"upper_bound_chain", row.upper_bound_chain},
        {"bracketed", row.bracketed},
        {"lambda1_monotone", row.lambda1_monotone},
    });
  }
  j["rows"] = std::move(rows);
  return j.dump(indent);
}

void write_summary_csv(std::ostream& out, std::span<const BoundReport> reports) {
  out.precision(12);
  out << "domain,alpha,lambda1,lambda2,gap,sup_margin,gap_margin\n";
  for (const auto& r : reports) {
    out << '"' << r.label << '"' << ',' << r.alpha << ',' << r.lambda1 << ',' << r.lambda2 << ',' << r.gap << ','
        << r.sup_margin() << ',' << r.gap_margin() << '\n';
  }
}

}  // namespace fracgap
