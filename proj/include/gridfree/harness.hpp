#pragma once

// Scenario files, the experiment runner, figure bundles and snapshot files.
//
// Scenario files are JSON documents with "schema": "gridfree-scenario/1".
// Reports are JSON with "schema": "gridfree-report/1". Complex numbers are
// written as [re, im]; angles at this boundary are degrees.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gridfree/atomic_dual.hpp"
#include "gridfree/core_model.hpp"

namespace gridfree::harness {

enum class Method {
  cbf,
  l2,
  cs_grid,
  gridfree,
  mvdr,
  music,
  minnorm,
  root_mvdr,
  root_music,
  root_minnorm
};

const char* to_string(Method m);
// Throws ParseError for an unknown name.
Method parse_method(const std::string& name);
bool is_cross_spectral(Method m);

struct MethodSpec {
  Method method = Method::cbf;
  std::optional<double> epsilon;  // absolute value
  bool epsilon_from_noise = false;  // "noise-norm": use the injected ||n||
  std::optional<int> sources;
  std::optional<double> grid_step_deg;
};

// Throws ParseError naming `path`.<field> when the method lacks epsilon,
// grid_step_deg or sources it needs.
void validate_method_spec(const MethodSpec& spec, const std::string& path);

struct GeometrySpec {
  int slots = 2;
  double spacing_over_lambda = 0.5;
  std::optional<std::vector<bool>> mask;
  std::optional<int> random_count;
  std::uint64_t random_seed = 0;

  ArrayGeometry build() const;
};

struct Expectation {
  std::vector<double> support_deg;
  double tol_deg = 1e-3;
  std::vector<Method> methods;  // empty: every method that returns a support
};

struct Scenario {
  std::string name = "scenario";
  GeometrySpec geometry;
  std::vector<Source> sources;  // t-units
  std::optional<double> snr_db;
  std::uint64_t seed = 1;
  int snapshots = 1;  // > 1 draws a fresh random phase per source and snapshot
  std::optional<std::filesystem::path> ingest;  // replaces synthesis when set
  std::vector<MethodSpec> methods;
  std::optional<Expectation> expect;
};

// Throws ParseError with the failing line (syntax) or field path (content).
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct MethodResult {
  Method method = Method::cbf;
  bool ok = true;
  std::string error;
  std::vector<double> support;  // t-values, ascending
  CVector amplitudes;           // empty when the method yields none
  std::vector<double> grid;     // t grid of the spectrum / sparse vector
  RVector values;               // spectrum power, or |x| for grid solvers
  std::optional<DoaEstimate> estimate;  // grid-free diagnostics
  std::optional<bool> expectation_met;
  double seconds = 0.0;
};

struct Report {
  Scenario scenario;
  ArrayGeometry geometry = ArrayGeometry::ula(2, 0.5);
  std::vector<Snapshot> data;
  std::vector<MethodResult> results;

  bool any_failure() const;
  bool expectations_met() const;
};

Report run_scenario(const Scenario& s);

struct JsonOptions {
  bool timing = false;        // wall-clock seconds break byte-determinism
  bool include_curves = true; // spectra and dual-polynomial samples
};

std::string report_json(const Report& r, const JsonOptions& opts = {});

// Writes <stem>.json and, per requested format, CSV curves and SVG plots.
// Returns the written paths.
enum class Format { json, csv, svg };
std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir,
                                                const std::string& stem,
                                                const std::vector<Format>& formats,
                                                const JsonOptions& opts = {});

// Scenario set reproducing one of the simulation figures (1..6).
std::vector<Scenario> figure_scenarios(int id);
// Runs the figure's scenarios and writes the bundle; returns written paths.
std::vector<std::filesystem::path> reproduce_figure(int id, const std::filesystem::path& dir,
                                                    const std::vector<Format>& formats,
                                                    const JsonOptions& opts = {});

// Snapshot files: CSV with two header lines
//   M,L,spacing_over_lambda,frequency
//   <M>,<L>,<d/lambda>,<label>
// followed by L rows of 2M values re_0,im_0,re_1,im_1,...
struct SnapshotFile {
  ArrayGeometry geometry = ArrayGeometry::ula(2, 0.5);
  std::string frequency;
  std::vector<Snapshot> snapshots;
};

SnapshotFile parse_snapshot_file(const std::string& text);
std::string format_snapshot_file(const SnapshotFile& f);
std::vector<Snapshot> ingest_snapshots(const std::filesystem::path& path);
void write_snapshot_file(const std::filesystem::path& path, const SnapshotFile& f);

// Write to a sibling temporary file, then rename over the target.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

// Scenario data generation shared by run_scenario and the simulate command.
std::vector<Snapshot> simulate(const Scenario& s);

}  // namespace gridfree::harness
