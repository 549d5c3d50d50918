#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "gridfree/harness.hpp"

namespace gridfree::harness {

namespace {

using Json = nlohmann::ordered_json;

// Significant digits kept in reports; enough for every tolerance in use while
// hiding last-bit differences between builds.
constexpr int kReportDigits = 12;

double round_sig(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kReportDigits, v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // drop negative zero
}

Json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig(v);
}

Json complex_json(Complex z) { return Json::array({num(z.real()), num(z.imag())}); }

Json complex_array(const CVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_json(v(i)));
  return a;
}

Json t_array(const std::vector<double>& t) {
  Json a = Json::array();
  for (double v : t) a.push_back(num(v));
  return a;
}

Json deg_array(const std::vector<double>& t) {
  Json a = Json::array();
  for (double v : t) a.push_back(num(t_to_deg(v)));
  return a;
}

Json geometry_json(const ArrayGeometry& g) {
  Json active = Json::array();
  for (bool b : g.active()) active.push_back(b ? 1 : 0);
  return Json{{"slots", g.slots()},
              {"active_count", g.active_count()},
              {"spacing_over_lambda", num(g.spacing_over_lambda())},
              {"active", active}};
}

Json estimate_json(const DoaEstimate& e) {
  Json notes = Json::array();
  for (const auto& n : e.notes) notes.push_back(n);
  return Json{{"dual_objective", num(e.dual_objective)},
              {"duality_gap_check", num(e.duality_gap_check)},
              {"solver_status", conic::to_string(e.solver_status)},
              {"solver_gap", num(e.solver_gap)},
              {"iterations", e.iterations},
              {"low_confidence", e.low_confidence},
              {"unresolvable", e.unresolvable},
              {"ill_conditioned", e.ill_conditioned},
              {"root_residuals", t_array(e.root_residuals)},
              {"dual_coefficients", complex_array(e.dual.c)},
              {"notes", notes}};
}

Json method_json(const MethodResult& r, const JsonOptions& opts) {
  Json m;
  m["method"] = to_string(r.method);
  m["ok"] = r.ok;
  if (!r.ok) m["error"] = r.error;
  m["support_t"] = t_array(r.support);
  m["support_deg"] = deg_array(r.support);
  m["amplitudes"] = complex_array(r.amplitudes);
  if (r.estimate) m["diagnostics"] = estimate_json(*r.estimate);
  if (r.expectation_met) m["expectation_met"] = *r.expectation_met;
  if (opts.timing) m["seconds"] = num(r.seconds);
  if (opts.include_curves && !r.grid.empty() && r.values.size() == static_cast<Eigen::Index>(r.grid.size())) {
    Json values = Json::array();
    for (Eigen::Index i = 0; i < r.values.size(); ++i) values.push_back(num(r.values(i)));
    m["curve"] = Json{{"grid_deg", deg_array(r.grid)}, {"values", values}};
  }
  return m;
}

}  // namespace

std::string report_json(const Report& r, const JsonOptions& opts) {
  Json j;
  j["schema"] = "gridfree-report/1";
  j["scenario"] = r.scenario.name;
  j["geometry"] = geometry_json(r.geometry);

  Json truth = Json::array();
  if (!r.scenario.ingest) {
    for (const auto& s : r.scenario.sources) {
      truth.push_back(Json{{"t", num(s.t)}, {"theta_deg", num(t_to_deg(s.t))},
                           {"amplitude", complex_json(s.amplitude)}});
    }
  }
  j["truth"] = truth;

  Json data;
  data["source"] = r.scenario.ingest ? "ingest" : "synthetic";
  data["snapshots"] = r.data.size();
  data["seed"] = r.scenario.seed;
  data["snr_db"] = r.scenario.snr_db ? num(*r.scenario.snr_db) : Json(nullptr);
  data["noise_norm"] = r.data.empty() ? Json(0.0) : num(r.data.front().noise_norm);
  j["data"] = data;

  Json methods = Json::array();
  for (const auto& m : r.results) methods.push_back(method_json(m, opts));
  j["methods"] = methods;
  j["expectations_met"] = r.expectations_met();
  return j.dump(2) + "\n";
}

}  // namespace gridfree::harness
