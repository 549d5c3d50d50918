#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridfree/errors.hpp"
#include "gridfree/harness.hpp"

namespace gridfree::harness {

namespace {

constexpr const char* kHeader = "M,L,spacing_over_lambda,frequency";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& cell, int line, const std::string& field) {
  const std::string s = trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("not a number: '" + s + "'", line, field);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite value", line, field);
  return v;
}

int parse_int(const std::string& cell, int line, const std::string& field) {
  const std::string s = trim(cell);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("not an integer: '" + s + "'", line, field);
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SnapshotFile parse_snapshot_file(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  if (!next() || trim(line) != kHeader) {
    throw ParseError(std::string("first header line must be '") + kHeader + "'", lineno, "header");
  }
  if (!next()) throw ParseError("missing second header line", lineno + 1, "header");
  const auto head = split_csv(trim(line));
  if (head.size() != 4) throw ParseError("expected 4 header values", lineno, "header");
  const int m = parse_int(head[0], lineno, "M");
  const int l = parse_int(head[1], lineno, "L");
  const double d = parse_double(head[2], lineno, "spacing_over_lambda");
  if (m < 2) throw ParseError("M must be >= 2", lineno, "M");
  if (l < 1) throw ParseError("L must be >= 1", lineno, "L");
  if (!(d > 0.0)) throw ParseError("spacing must be positive", lineno, "spacing_over_lambda");

  SnapshotFile f;
  f.geometry = ArrayGeometry::ula(m, d);
  f.frequency = trim(head[3]);
  for (int row = 0; row < l; ++row) {
    if (!next()) throw ParseError("expected " + std::to_string(l) + " rows, found " + std::to_string(row), lineno + 1, "row");
    const auto cells = split_csv(trim(line));
    if (static_cast<int>(cells.size()) != 2 * m) {
      throw ParseError("expected " + std::to_string(2 * m) + " values, found " +
                           std::to_string(cells.size()),
                       lineno, "row " + std::to_string(row + 1));
    }
    Snapshot s;
    s.geometry = f.geometry;
    s.y.resize(m);
    for (int k = 0; k < m; ++k) {
      const std::string field = "row " + std::to_string(row + 1) + " column " + std::to_string(2 * k + 1);
      s.y(k) = Complex(parse_double(cells[2 * k], lineno, field),
                       parse_double(cells[2 * k + 1], lineno, field));
    }
    f.snapshots.push_back(std::move(s));
  }
  if (next()) throw ParseError("unexpected data after the last row", lineno, "row");
  return f;
}

std::string format_snapshot_file(const SnapshotFile& f) {
  if (!f.geometry.is_uniform()) throw DomainError("snapshot files describe uniform arrays");
  if (f.frequency.find(',') != std::string::npos) throw DomainError("frequency label may not contain ','");
  std::string out = std::string(kHeader) + "\n";
  const int m = f.geometry.slots();
  out += std::to_string(m) + "," + std::to_string(f.snapshots.size()) + "," +
         format_double(f.geometry.spacing_over_lambda()) + "," + f.frequency + "\n";
  for (const auto& s : f.snapshots) {
    if (s.y.size() != m) throw DomainError("snapshot length does not match M");
    for (int k = 0; k < m; ++k) {
      if (k) out += ',';
      out += format_double(s.y(k).real()) + "," + format_double(s.y(k).imag());
    }
    out += '\n';
  }
  return out;
}

std::vector<Snapshot> ingest_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open snapshot file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_snapshot_file(buf.str()).snapshots;
}

void write_snapshot_file(const std::filesystem::path& path, const SnapshotFile& f) {
  atomic_write(path, format_snapshot_file(f));
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gridfree::harness
