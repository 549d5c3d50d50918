// Command-line front end for the estimation toolkit.
//
// Exit codes: 0 success, 1 an expected support was not met, 2 parse error,
// 3 solver failure.

#include <cstdio>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridfree/errors.hpp"
#include "gridfree/harness.hpp"

namespace {

using namespace gridfree;
using namespace gridfree::harness;

constexpr int kExitOk = 0;
constexpr int kExitExpectation = 1;
constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;

struct Common {
  std::optional<double> snr;
  bool no_noise = false;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> formats{"json"};
  bool timing = false;
};

struct EstimateArgs {
  std::string method;
  std::string epsilon;
  std::optional<int> sources;
  std::optional<double> grid_step;
};

std::vector<Format> parse_formats(const std::vector<std::string>& names) {
  std::vector<Format> out;
  for (const auto& n : names) {
    if (n == "json") out.push_back(Format::json);
    else if (n == "csv") out.push_back(Format::csv);
    else if (n == "svg") out.push_back(Format::svg);
    else throw ParseError("unknown format '" + n + "'", 0, "--format");
  }
  return out;
}

void apply_overrides(Scenario& s, const Common& c) {
  if (c.snr) s.snr_db = *c.snr;
  if (c.no_noise) s.snr_db.reset();
  if (c.seed) s.seed = *c.seed;
}

bool is_snapshot_file(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".csv" || ext == ".CSV";
}

Scenario scenario_for_input(const std::string& input) {
  if (!is_snapshot_file(input)) return load_scenario(input);
  Scenario s;
  s.name = std::filesystem::path(input).stem().string();
  s.ingest = input;
  return s;
}

MethodSpec method_from_flags(const EstimateArgs& a) {
  MethodSpec spec;
  try {
    spec.method = parse_method(a.method);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), 0, "--method");
  }
  if (!a.epsilon.empty()) {
    if (a.epsilon == "noise-norm") {
      spec.epsilon_from_noise = true;
    } else {
      try {
        std::size_t used = 0;
        spec.epsilon = std::stod(a.epsilon, &used);
        if (used != a.epsilon.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ParseError("expected a number or \"noise-norm\"", 0, "--epsilon");
      }
      if (!(*spec.epsilon >= 0.0)) throw ParseError("must be >= 0", 0, "--epsilon");
    }
  }
  spec.sources = a.sources;
  spec.grid_step_deg = a.grid_step;
  validate_method_spec(spec, "");
  return spec;
}

int finish(const Report& r, const Common& c, const std::string& stem) {
  const JsonOptions opts{c.timing, true};
  if (c.out_dir.empty()) {
    std::cout << report_json(r, opts);
  } else {
    for (const auto& p : write_report(r, c.out_dir, stem, parse_formats(c.formats), opts))
      std::cerr << "wrote " << p.string() << '\n';
  }
  for (const auto& m : r.results)
    if (!m.ok) std::cerr << to_string(m.method) << ": " << m.error << '\n';
  if (r.any_failure()) return kExitSolver;
  if (!r.expectations_met()) {
    std::cerr << r.scenario.name << ": expected support not met\n";
    return kExitExpectation;
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, Common& c, bool overrides, bool outputs) {
  if (overrides) {
    cmd->add_option("--snr", c.snr, "SNR in dB (overrides the scenario)");
    cmd->add_flag("--no-noise", c.no_noise, "Disable noise regardless of the scenario");
    cmd->add_option("--seed", c.seed, "Noise seed (overrides the scenario)");
  }
  cmd->add_option("--out-dir", c.out_dir, "Directory for output files (default: JSON on stdout)");
  if (outputs) {
    cmd->add_option("--format", c.formats, "Output formats: json, csv, svg")->delimiter(',');
    cmd->add_flag("--timing", c.timing, "Include wall-clock seconds in reports");
  }
}

int run_simulate(const std::string& input, const Common& c) {
  Scenario s = load_scenario(input);
  apply_overrides(s, c);
  if (s.ingest) throw ParseError("simulate needs a synthetic scenario", 0, "ingest");
  SnapshotFile f;
  f.snapshots = simulate(s);
  f.geometry = f.snapshots.front().geometry;
  if (!f.geometry.is_uniform()) throw ParseError("snapshot files describe uniform arrays", 0, "geometry.active");
  f.frequency = "synthetic";
  const std::string text = format_snapshot_file(f);
  if (c.out_dir.empty()) {
    std::cout << text;
  } else {
    const auto path = std::filesystem::path(c.out_dir) / (s.name + "_snapshots.csv");
    atomic_write(path, text);
    std::cerr << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

int run_estimate(const std::string& input, const EstimateArgs& a, const Common& c) {
  Scenario s = scenario_for_input(input);
  apply_overrides(s, c);
  s.methods = {method_from_flags(a)};
  if (s.expect) s.expect->methods.clear();
  return finish(run_scenario(s), c, s.name + "_" + a.method);
}

int run_ingest(const std::string& input) {
  const auto data = ingest_snapshots(input);
  const auto& g = data.front().geometry;
  double energy = 0.0;
  for (const auto& s : data) energy += s.y.squaredNorm();
  std::printf("sensors %d\nsnapshots %zu\nspacing_over_lambda %.17g\nmean_power %.12g\n", g.slots(), data.size(),
              g.spacing_over_lambda(), energy / static_cast<double>(data.size() * static_cast<std::size_t>(g.slots())));
  return kExitOk;
}

int run_many(const std::vector<std::string>& inputs, const Common& c) {
  std::vector<Scenario> scenarios;
  for (const auto& in : inputs) {
    scenarios.push_back(load_scenario(in));
    apply_overrides(scenarios.back(), c);
  }
  std::vector<std::future<Report>> jobs;
  for (const auto& s : scenarios) jobs.push_back(std::async(std::launch::async, run_scenario, s));
  int code = kExitOk;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    Common each = c;
    if (each.out_dir.empty()) each.out_dir = ".";
    code = std::max(code, finish(jobs[i].get(), each, scenarios[i].name));
  }
  return code;
}

int run_figure(int id, const Common& c) {
  const auto dir = c.out_dir.empty() ? std::filesystem::path("figures") : std::filesystem::path(c.out_dir);
  const auto formats = parse_formats(c.formats);
  for (const auto& p : reproduce_figure(id, dir, formats, JsonOptions{c.timing, true}))
    std::cerr << "wrote " << p.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direction-of-arrival estimation: grid-free, grid-based and cross-spectral methods"};
  app.require_subcommand(1);

  Common common;
  EstimateArgs est;
  std::string input;
  std::vector<std::string> inputs;
  int figure = 0;

  auto* sim = app.add_subcommand("simulate", "Synthesize snapshots from a scenario and write a snapshot CSV");
  sim->add_option("scenario", input, "Scenario JSON")->required();
  add_common(sim, common, true, false);

  auto* estimate = app.add_subcommand("estimate", "Run one estimator on a scenario or a snapshot CSV");
  estimate->add_option("input", input, "Scenario JSON or snapshot CSV")->required();
  estimate->add_option("--method", est.method,
                       "cbf|l2|cs-grid|gridfree|mvdr|music|minnorm|root-mvdr|root-music|root-minnorm")
      ->required();
  estimate->add_option("--epsilon", est.epsilon, "Residual bound, or 'noise-norm' for the injected noise norm");
  estimate->add_option("--sources", est.sources, "Model order K");
  estimate->add_option("--grid-step", est.grid_step, "Grid step in degrees");
  add_common(estimate, common, true, true);

  auto* repro = app.add_subcommand("reproduce-figure", "Write the bundle for a simulation figure (1..6)");
  repro->add_option("id", figure, "Figure id")->required()->check(CLI::Range(1, 6));
  add_common(repro, common, false, true);

  auto* ingest = app.add_subcommand("ingest", "Validate a snapshot CSV and print a summary");
  ingest->add_option("file", input, "Snapshot CSV")->required();

  auto* run = app.add_subcommand("run", "Run scenario files in parallel");
  run->add_option("scenarios", inputs, "Scenario JSON files")->required();
  add_common(run, common, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*sim) return run_simulate(input, common);
    if (*estimate) return run_estimate(input, est, common);
    if (*repro) return run_figure(figure, common);
    if (*ingest) return run_ingest(input);
    if (*run) return run_many(inputs, common);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}
