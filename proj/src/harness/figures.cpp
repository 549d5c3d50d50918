#include <future>

#include "gridfree/errors.hpp"
#include "gridfree/harness.hpp"

namespace gridfree::harness {

namespace {

// Step of the CBF curve drawn next to grid-free reconstructions.
constexpr double kOverlayStepDeg = 0.1;
constexpr double kExactTolDeg = 1e-3;
constexpr double kNoisyTolDeg = 0.5;

MethodSpec spec(Method m) {
  MethodSpec s;
  s.method = m;
  return s;
}

MethodSpec gridfree_exact() {
  auto s = spec(Method::gridfree);
  s.epsilon = 0.0;
  return s;
}

MethodSpec cbf_overlay(int sources) {
  auto s = spec(Method::cbf);
  s.grid_step_deg = kOverlayStepDeg;
  s.sources = sources;
  return s;
}

std::vector<Source> from_degrees(const std::vector<double>& deg, const std::vector<Complex>& amp) {
  std::vector<Source> out;
  for (std::size_t i = 0; i < deg.size(); ++i) out.push_back({deg_to_t(deg[i]), amp[i]});
  return out;
}

std::vector<Source> from_t(const std::vector<double>& t, const std::vector<Complex>& amp) {
  std::vector<Source> out;
  for (std::size_t i = 0; i < t.size(); ++i) out.push_back({t[i], amp[i]});
  return out;
}

std::vector<double> degrees_of(const std::vector<Source>& s) {
  std::vector<double> out;
  for (const auto& x : s) out.push_back(t_to_deg(x.t));
  return out;
}

Scenario ula21(std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.geometry.slots = 21;
  s.geometry.spacing_over_lambda = 0.5;
  return s;
}

Scenario three_source_scene(std::string name) {
  auto s = ula21(std::move(name));
  s.sources = from_degrees({-7.2385, 15.962, 42.0671}, {1.0, 0.01, 0.6});
  s.methods = {gridfree_exact(), cbf_overlay(3)};
  s.expect = Expectation{degrees_of(s.sources), kExactTolDeg, {Method::gridfree}};
  return s;
}

std::vector<Scenario> figure1() {
  std::vector<Scenario> out;
  const struct {
    const char* name;
    double second_deg;
    double step;
  } panels[] = {{"fig1a_on_grid", 15.0, 5.0}, {"fig1b_off_grid", 17.0, 5.0}, {"fig1c_fine_grid", 17.0, 1.0}};
  for (const auto& p : panels) {
    Scenario s;
    s.name = p.name;
    s.geometry.slots = 8;
    s.geometry.spacing_over_lambda = 0.5;
    s.sources = from_degrees({0.0, p.second_deg}, {1.0, 1.0});
    s.snr_db = 20.0;
    auto cs = spec(Method::cs_grid);
    cs.epsilon_from_noise = true;
    cs.grid_step_deg = p.step;
    auto cb = spec(Method::cbf);
    cb.grid_step_deg = p.step;
    cb.sources = 2;
    s.methods = {cb, cs};
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Scenario> figure4() {
  const std::vector<double> re = {0.8, 0.6, 0.9, 0.5, 1, 0.9, 0.1, 1, 0.4, 0.7};
  const std::vector<double> im = {-1.6, 0.5, -1.3, -2.6, 0.4, -1.2, -1.2, -0.6, -0.5, 0.6};
  std::vector<Complex> real_amp(re.begin(), re.end());
  std::vector<Complex> complex_amp;
  for (std::size_t i = 0; i < re.size(); ++i) complex_amp.emplace_back(re[i], im[i]);

  const std::vector<double> positions = {-0.85, -0.62, -0.55, -0.30, -0.12, 0.05, 0.22, 0.31, 0.58, 0.80};
  const std::vector<double> separated = {-0.88, -0.69, -0.49, -0.31, -0.12, 0.08, 0.27, 0.45, 0.64, 0.83};
  const std::vector<double> crowded = {-0.80, -0.74, -0.40, -0.35, -0.05, 0.0, 0.30, 0.36, 0.62, 0.68};

  std::vector<Scenario> out;
  auto add = [&](std::string name, std::vector<Source> src, bool assert_support) {
    auto s = ula21(std::move(name));
    s.sources = std::move(src);
    s.methods = {gridfree_exact(), cbf_overlay(static_cast<int>(s.sources.size()))};
    if (assert_support) s.expect = Expectation{degrees_of(s.sources), kExactTolDeg, {Method::gridfree}};
    out.push_back(std::move(s));
  };
  add("fig4ab_real10", from_t(positions, real_amp), true);
  auto eleven = from_t(positions, real_amp);
  eleven.push_back({deg_to_t(71.81), 0.1});
  add("fig4cd_real11", std::move(eleven), false);
  add("fig4ef_complex_separated", from_t(separated, complex_amp), true);
  add("fig4gh_complex_crowded", from_t(crowded, complex_amp), false);
  return out;
}

Scenario figure5() {
  auto s = ula21("fig5_random_array");
  s.geometry.random_count = 13;
  s.geometry.random_seed = 1;
  s.sources = from_degrees({-32.8881, 25.2773, 69.3903}, {0.67, 0.33, 1.0});
  s.methods = {gridfree_exact(), cbf_overlay(3)};
  s.expect = Expectation{degrees_of(s.sources), kExactTolDeg, {Method::gridfree}};
  return s;
}

Scenario figure6() {
  auto s = ula21("fig6_noisy");
  s.sources = from_degrees({-19.6942, 28.3594, 73.9457}, {0.6, 0.3, 0.3});
  s.snr_db = 20.0;
  auto gf = spec(Method::gridfree);
  gf.epsilon_from_noise = true;
  s.methods = {gf, cbf_overlay(3)};
  s.expect = Expectation{degrees_of(s.sources), kNoisyTolDeg, {Method::gridfree}};
  return s;
}

}  // namespace

std::vector<Scenario> figure_scenarios(int id) {
  switch (id) {
    case 1:
      return figure1();
    case 2: {
      auto s = three_source_scene("fig2_roots");
      s.methods = {gridfree_exact()};
      return {s};
    }
    case 3:
      return {three_source_scene("fig3_three_sources")};
    case 4:
      return figure4();
    case 5:
      return {figure5()};
    case 6:
      return {figure6()};
    default:
      throw DomainError("figure id must be in 1..6, got " + std::to_string(id));
  }
}

std::vector<std::filesystem::path> reproduce_figure(int id, const std::filesystem::path& dir,
                                                    const std::vector<Format>& formats, const JsonOptions& opts) {
  const auto scenarios = figure_scenarios(id);
  std::vector<std::future<Report>> jobs;
  for (const auto& s : scenarios) jobs.push_back(std::async(std::launch::async, run_scenario, s));
  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Report r = jobs[i].get();
    for (auto& p : write_report(r, dir, scenarios[i].name, formats, opts)) written.push_back(std::move(p));
  }
  return written;
}

}  // namespace gridfree::harness
