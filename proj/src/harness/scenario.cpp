#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gridfree/errors.hpp"
#include "gridfree/harness.hpp"

namespace gridfree::harness {

namespace {

using nlohmann::json;

constexpr const char* kScenarioSchema = "gridfree-scenario/1";

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kMethodNames[] = {
    {Method::cbf, "cbf"},
    {Method::l2, "l2"},
    {Method::cs_grid, "cs-grid"},
    {Method::gridfree, "gridfree"},
    {Method::mvdr, "mvdr"},
    {Method::music, "music"},
    {Method::minnorm, "minnorm"},
    {Method::root_mvdr, "root-mvdr"},
    {Method::root_music, "root-music"},
    {Method::root_minnorm, "root-minnorm"},
};

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ParseError("unknown key", 0, path.empty() ? key : path + "." + key);
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("required field is missing", 0, path + key);
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ParseError("expected a number", 0, field);
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError("expected a finite number", 0, field);
  return x;
}

int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ParseError("expected an integer", 0, field);
  return v.get<int>();
}

std::uint64_t seed_value(const json& v, const std::string& field) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ParseError("expected a non-negative integer", 0, field);
  }
  return v.get<std::uint64_t>();
}

Complex complex_value(const json& v, const std::string& field) {
  if (v.is_number()) return {number(v, field), 0.0};
  if (v.is_array() && v.size() == 2) return {number(v[0], field + "[0]"), number(v[1], field + "[1]")};
  throw ParseError("expected a number or an [re, im] pair", 0, field);
}

GeometrySpec parse_geometry(const json& g) {
  const std::string path = "geometry";
  if (!g.is_object()) throw ParseError("expected an object", 0, path);
  reject_unknown(g, path, {"sensors", "spacing_over_lambda", "active"});
  GeometrySpec spec;
  spec.slots = integer(require(g, "sensors", path + "."), path + ".sensors");
  spec.spacing_over_lambda =
      number(require(g, "spacing_over_lambda", path + "."), path + ".spacing_over_lambda");
  if (spec.slots < 2) throw ParseError("need at least 2 sensors", 0, path + ".sensors");
  if (!(spec.spacing_over_lambda > 0.0)) {
    throw ParseError("must be positive", 0, path + ".spacing_over_lambda");
  }
  if (const auto it = g.find("active"); it != g.end()) {
    const std::string field = path + ".active";
    if (it->is_string()) {
      if (it->get<std::string>() != "all") throw ParseError("expected \"all\"", 0, field);
    } else if (it->is_array()) {
      std::vector<bool> mask;
      for (std::size_t i = 0; i < it->size(); ++i) {
        const int v = integer((*it)[i], field + "[" + std::to_string(i) + "]");
        if (v != 0 && v != 1) throw ParseError("mask entries must be 0 or 1", 0, field);
        mask.push_back(v == 1);
      }
      if (static_cast<int>(mask.size()) != spec.slots) {
        throw ParseError("mask length must equal sensors", 0, field);
      }
      spec.mask = std::move(mask);
    } else if (it->is_object()) {
      reject_unknown(*it, field, {"random"});
      const auto& r = require(*it, "random", field + ".");
      reject_unknown(r, field + ".random", {"count", "seed"});
      spec.random_count = integer(require(r, "count", field + ".random."), field + ".random.count");
      spec.random_seed = seed_value(require(r, "seed", field + ".random."), field + ".random.seed");
      if (*spec.random_count < 2 || *spec.random_count > spec.slots) {
        throw ParseError("count must lie in [2, sensors]", 0, field + ".random.count");
      }
    } else {
      throw ParseError("expected \"all\", a 0/1 mask or {\"random\": ...}", 0, field);
    }
  }
  return spec;
}

Source parse_source(const json& s, const std::string& path) {
  if (!s.is_object()) throw ParseError("expected an object", 0, path);
  reject_unknown(s, path, {"theta_deg", "t", "amplitude", "phase_deg"});
  Source src;
  const bool has_theta = s.contains("theta_deg");
  if (has_theta == s.contains("t")) throw ParseError("give exactly one of theta_deg and t", 0, path);
  if (has_theta) {
    const double deg = number(s["theta_deg"], path + ".theta_deg");
    if (deg < -90.0 || deg > 90.0) throw ParseError("must lie in [-90, 90]", 0, path + ".theta_deg");
    src.t = deg_to_t(deg);
  } else {
    src.t = number(s["t"], path + ".t");
    if (src.t < -1.0 || src.t > 1.0) throw ParseError("must lie in [-1, 1]", 0, path + ".t");
  }
  src.amplitude = complex_value(require(s, "amplitude", path + "."), path + ".amplitude");
  if (const auto it = s.find("phase_deg"); it != s.end()) {
    src.amplitude *= std::polar(1.0, number(*it, path + ".phase_deg") * kPi / 180.0);
  }
  return src;
}

MethodSpec parse_method_spec(const json& m, const std::string& path) {
  if (!m.is_object()) throw ParseError("expected an object", 0, path);
  reject_unknown(m, path, {"method", "epsilon", "sources", "grid_step_deg"});
  const auto& name = require(m, "method", path + ".");
  if (!name.is_string()) throw ParseError("expected a string", 0, path + ".method");
  MethodSpec spec;
  try {
    spec.method = parse_method(name.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(e.what(), 0, path + ".method");
  }
  if (const auto it = m.find("epsilon"); it != m.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "noise-norm") {
        throw ParseError("expected a number or \"noise-norm\"", 0, path + ".epsilon");
      }
      spec.epsilon_from_noise = true;
    } else {
      spec.epsilon = number(*it, path + ".epsilon");
      if (*spec.epsilon < 0.0) throw ParseError("must be >= 0", 0, path + ".epsilon");
    }
  }
  if (const auto it = m.find("sources"); it != m.end()) {
    spec.sources = integer(*it, path + ".sources");
    if (*spec.sources < 1) throw ParseError("must be >= 1", 0, path + ".sources");
  }
  if (const auto it = m.find("grid_step_deg"); it != m.end()) {
    spec.grid_step_deg = number(*it, path + ".grid_step_deg");
    if (!(*spec.grid_step_deg > 0.0)) throw ParseError("must be > 0", 0, path + ".grid_step_deg");
  }

  validate_method_spec(spec, path);
  return spec;
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

void validate_method_spec(const MethodSpec& spec, const std::string& path) {
  const std::string prefix = path.empty() ? std::string() : path + ".";
  const bool needs_eps = spec.method == Method::gridfree || spec.method == Method::cs_grid;
  const bool needs_grid = spec.method == Method::cbf || spec.method == Method::l2 ||
                          spec.method == Method::cs_grid || spec.method == Method::mvdr ||
                          spec.method == Method::music || spec.method == Method::minnorm;
  const bool needs_k = spec.method == Method::music || spec.method == Method::minnorm ||
                       spec.method == Method::root_mvdr || spec.method == Method::root_music ||
                       spec.method == Method::root_minnorm;
  const std::string method = to_string(spec.method);
  if (needs_eps && !spec.epsilon && !spec.epsilon_from_noise) {
    throw ParseError(method + " requires epsilon", 0, prefix + "epsilon");
  }
  if (needs_grid && !spec.grid_step_deg) {
    throw ParseError(method + " requires grid_step_deg", 0, prefix + "grid_step_deg");
  }
  if (needs_k && !spec.sources) throw ParseError(method + " requires sources", 0, prefix + "sources");
}

const char* to_string(Method m) {
  for (const auto& e : kMethodNames)
    if (e.method == m) return e.name;
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (const auto& e : kMethodNames)
    if (name == e.name) return e.method;
  throw ParseError("unknown method '" + name + "'");
}

bool is_cross_spectral(Method m) {
  switch (m) {
    case Method::mvdr:
    case Method::music:
    case Method::minnorm:
    case Method::root_mvdr:
    case Method::root_music:
    case Method::root_minnorm:
      return true;
    default:
      return false;
  }
}

ArrayGeometry GeometrySpec::build() const {
  if (random_count) return ArrayGeometry::random_subset(slots, *random_count, random_seed, spacing_over_lambda);
  if (mask) return ArrayGeometry::masked(*mask, spacing_over_lambda);
  return ArrayGeometry::ula(slots, spacing_over_lambda);
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_of(text, e.byte));
  }
  try {
    if (!doc.is_object()) throw ParseError("top level must be an object");
    reject_unknown(doc, "",
                   {"schema", "name", "geometry", "sources", "snr_db", "seed", "snapshots", "ingest",
                    "methods", "expect"});
    const auto& schema = require(doc, "schema", "");
    if (!schema.is_string() || schema.get<std::string>() != kScenarioSchema) {
      throw ParseError(std::string("expected \"") + kScenarioSchema + "\"", 0, "schema");
    }
    Scenario s;
    if (const auto it = doc.find("name"); it != doc.end()) {
      if (!it->is_string()) throw ParseError("expected a string", 0, "name");
      s.name = it->get<std::string>();
    }
    if (const auto it = doc.find("ingest"); it != doc.end()) {
      if (!it->is_string()) throw ParseError("expected a path", 0, "ingest");
      s.ingest = std::filesystem::path(it->get<std::string>());
      for (const char* key : {"geometry", "sources", "snr_db", "snapshots"}) {
        if (doc.contains(key)) throw ParseError("not allowed together with ingest", 0, key);
      }
    } else {
      s.geometry = parse_geometry(require(doc, "geometry", ""));
      const auto& sources = require(doc, "sources", "");
      if (!sources.is_array()) throw ParseError("expected an array", 0, "sources");
      for (std::size_t i = 0; i < sources.size(); ++i)
        s.sources.push_back(parse_source(sources[i], "sources[" + std::to_string(i) + "]"));
      try {
        (void)SourceScene(s.sources);
      } catch (const DomainError& e) {
        throw ParseError(e.what(), 0, "sources");
      }
    }
    if (const auto it = doc.find("snr_db"); it != doc.end()) {
      if (it->is_string()) {
        if (it->get<std::string>() != "none") throw ParseError("expected a number or \"none\"", 0, "snr_db");
      } else {
        s.snr_db = number(*it, "snr_db");
      }
    }
    if (const auto it = doc.find("seed"); it != doc.end()) s.seed = seed_value(*it, "seed");
    if (const auto it = doc.find("snapshots"); it != doc.end()) {
      s.snapshots = integer(*it, "snapshots");
      if (s.snapshots < 1) throw ParseError("must be >= 1", 0, "snapshots");
    }
    const auto& methods = require(doc, "methods", "");
    if (!methods.is_array() || methods.empty()) throw ParseError("expected a non-empty array", 0, "methods");
    for (std::size_t i = 0; i < methods.size(); ++i)
      s.methods.push_back(parse_method_spec(methods[i], "methods[" + std::to_string(i) + "]"));

    if (const auto it = doc.find("expect"); it != doc.end()) {
      reject_unknown(*it, "expect", {"support_deg", "tol_deg", "methods"});
      Expectation e;
      const auto& sup = require(*it, "support_deg", "expect.");
      if (!sup.is_array()) throw ParseError("expected an array", 0, "expect.support_deg");
      for (std::size_t i = 0; i < sup.size(); ++i)
        e.support_deg.push_back(number(sup[i], "expect.support_deg[" + std::to_string(i) + "]"));
      e.tol_deg = number(require(*it, "tol_deg", "expect."), "expect.tol_deg");
      if (const auto m = it->find("methods"); m != it->end()) {
        if (!m->is_array()) throw ParseError("expected an array", 0, "expect.methods");
        for (std::size_t i = 0; i < m->size(); ++i) {
          const std::string field = "expect.methods[" + std::to_string(i) + "]";
          if (!(*m)[i].is_string()) throw ParseError("expected a string", 0, field);
          try {
            e.methods.push_back(parse_method((*m)[i].get<std::string>()));
          } catch (const ParseError& err) {
            throw ParseError(err.what(), 0, field);
          }
        }
      }
      s.expect = std::move(e);
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str());
  if (s.ingest && s.ingest->is_relative()) s.ingest = path.parent_path() / *s.ingest;
  return s;
}

}  // namespace gridfree::harness
