#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gridfree/errors.hpp"
#include "gridfree/harness.hpp"
#include "gridfree/rooting.hpp"

namespace gridfree::harness {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 360.0;
constexpr double kMargin = 48.0;
// Spectra are drawn in dB relative to their peak, clipped at this floor.
constexpr double kDbFloor = -60.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

class Svg {
 public:
  Svg(const std::string& title, const Frame& f, const std::string& xlabel, const std::string& ylabel)
      : frame_(f) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out_ << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
         << "</text>\n";
    axes(xlabel, ylabel);
  }

  void data_comment(const std::string& header, const std::vector<std::pair<double, double>>& pts) {
    out_ << "<!-- data " << header << '\n';
    for (const auto& [x, y] : pts) out_ << fmt(x) << ',' << fmt(y) << '\n';
    out_ << "-->\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
    if (pts.empty()) return;
    out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) out_ << fmt(frame_.px(x)) << ',' << fmt(frame_.py(y)) << ' ';
    out_ << "\"/>\n";
  }

  void stem(double x, double y, const std::string& color) {
    out_ << "<line x1=\"" << fmt(frame_.px(x)) << "\" y1=\"" << fmt(frame_.py(frame_.y0)) << "\" x2=\""
         << fmt(frame_.px(x)) << "\" y2=\"" << fmt(frame_.py(y)) << "\" stroke=\"" << color << "\"/>\n";
    marker(x, y, color, false);
  }

  void marker(double x, double y, const std::string& color, bool hollow) {
    out_ << "<circle cx=\"" << fmt(frame_.px(x)) << "\" cy=\"" << fmt(frame_.py(y)) << "\" r=\"3\" "
         << (hollow ? "fill=\"none\" stroke=\"" + color + "\"" : "fill=\"" + color + "\"") << "/>\n";
  }

  void circle(double cx, double cy, double radius) {
    out_ << "<ellipse cx=\"" << fmt(frame_.px(cx)) << "\" cy=\"" << fmt(frame_.py(cy)) << "\" rx=\""
         << fmt(frame_.px(cx + radius) - frame_.px(cx)) << "\" ry=\""
         << fmt(frame_.py(cy) - frame_.py(cy + radius)) << "\" fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  void axes(const std::string& xlabel, const std::string& ylabel) {
    const double l = kMargin, r = kWidth - kMargin, t = kMargin, b = kHeight - kMargin;
    out_ << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << r - l << "\" height=\"" << b - t
         << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = frame_.x0 + (frame_.x1 - frame_.x0) * i / 4.0;
      const double yv = frame_.y0 + (frame_.y1 - frame_.y0) * i / 4.0;
      out_ << "<text x=\"" << fmt(frame_.px(xv)) << "\" y=\"" << b + 14
           << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(std::round(xv * 100) / 100) << "</text>\n";
      out_ << "<text x=\"" << l - 4 << "\" y=\"" << fmt(frame_.py(yv) + 3)
           << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(std::round(yv * 100) / 100) << "</text>\n";
    }
    out_ << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
         << xlabel << "</text>\n";
    out_ << "<text x=\"14\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 14 " << kHeight / 2
         << ")\" text-anchor=\"middle\" font-size=\"12\">" << ylabel << "</text>\n";
  }

  Frame frame_;
  std::ostringstream out_;
};

bool is_spectrum(Method m) {
  return m == Method::cbf || m == Method::l2 || m == Method::mvdr || m == Method::music ||
         m == Method::minnorm;
}

std::vector<std::pair<double, double>> curve_points(const MethodResult& r) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    pts.emplace_back(t_to_deg(r.grid[i]), r.values(static_cast<Eigen::Index>(i)));
  return pts;
}

std::vector<std::pair<double, double>> to_db(std::vector<std::pair<double, double>> pts) {
  double top = 0.0;
  for (const auto& p : pts) top = std::max(top, p.second);
  for (auto& p : pts) {
    p.second = top > 0.0 && p.second > 0.0 ? std::max(kDbFloor, 10.0 * std::log10(p.second / top)) : kDbFloor;
  }
  return pts;
}

std::string truth_markers_comment(const Report& r) {
  std::string s;
  for (const auto& src : r.scenario.sources) s += " " + fmt(t_to_deg(src.t));
  return s;
}

std::string spectrum_svg(const Report& rep, const MethodResult& r) {
  const auto pts = to_db(curve_points(r));
  Svg svg(rep.scenario.name + ": " + to_string(r.method) + " spectrum", {-90, 90, kDbFloor, 0},
          "DOA (deg)", "power (dB re peak)");
  svg.data_comment("theta_deg,power_db truth:" + truth_markers_comment(rep), pts);
  svg.polyline(pts, "steelblue");
  for (const auto& src : rep.scenario.sources) svg.marker(t_to_deg(src.t), 0.0, "black", true);
  for (double t : r.support) svg.marker(t_to_deg(t), 0.0, "crimson", false);
  return svg.finish();
}

std::string stems_svg(const Report& rep, const MethodResult& r) {
  double top = 0.0;
  for (Eigen::Index i = 0; i < r.values.size(); ++i) top = std::max(top, r.values(i));
  for (const auto& s : rep.scenario.sources) top = std::max(top, std::abs(s.amplitude));
  for (Eigen::Index i = 0; i < r.amplitudes.size(); ++i) top = std::max(top, std::abs(r.amplitudes(i)));
  if (top <= 0.0) top = 1.0;
  Svg svg(rep.scenario.name + ": " + to_string(r.method) + " reconstruction", {-90, 90, 0, top * 1.1},
          "DOA (deg)", "|x|");
  std::vector<std::pair<double, double>> pts;
  if (r.method == Method::cs_grid) {
    pts = curve_points(r);
  } else {
    for (std::size_t i = 0; i < r.support.size(); ++i)
      pts.emplace_back(t_to_deg(r.support[i]), std::abs(r.amplitudes(static_cast<Eigen::Index>(i))));
  }
  svg.data_comment("theta_deg,abs_x", pts);
  for (const auto& [x, y] : pts)
    if (y > 0.0) svg.stem(x, y, "crimson");
  for (const auto& s : rep.scenario.sources) svg.marker(t_to_deg(s.t), std::abs(s.amplitude), "black", true);
  return svg.finish();
}

std::string dual_svg(const Report& rep, const MethodResult& r) {
  const auto pts = curve_points(r);
  Svg svg(rep.scenario.name + ": dual polynomial |H|", {-90, 90, 0, 1.1}, "DOA (deg)", "|H|");
  svg.data_comment("theta_deg,abs_H", pts);
  svg.polyline(pts, "steelblue");
  for (double t : r.support) svg.marker(t_to_deg(t), 1.0, "crimson", false);
  return svg.finish();
}

std::string roots_svg(const Report& rep, const MethodResult& r) {
  std::vector<std::pair<double, double>> pts;
  if (r.estimate && r.estimate->dual.c.size() > 0) {
    try {
      for (Complex z : poly_roots(build_p_plus(autocorrelation(r.estimate->dual.c))))
        pts.emplace_back(z.real(), z.imag());
    } catch (const Error&) {
      pts.clear();
    }
  }
  Svg svg(rep.scenario.name + ": roots of P+", {-2, 2, -1.125, 1.125}, "Re z", "Im z");
  svg.data_comment("re_z,im_z", pts);
  svg.circle(0.0, 0.0, 1.0);
  for (const auto& [x, y] : pts)
    if (std::abs(x) <= 2.0 && std::abs(y) <= 1.125) svg.marker(x, y, "steelblue", true);
  const double w = r.estimate ? r.estimate->dual.geometry.phase_rate() : 0.0;
  for (double t : r.support) svg.marker(std::cos(w * t), std::sin(w * t), "crimson", false);
  return svg.finish();
}

std::string curve_csv(const MethodResult& r) {
  std::string out = "theta_deg,t,value\n";
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    out += fmt(t_to_deg(r.grid[i])) + "," + fmt(r.grid[i]) + "," + fmt(r.values(static_cast<Eigen::Index>(i))) + "\n";
  return out;
}

std::string support_csv(const Report& rep) {
  std::string out = "method,theta_deg,t,re,im,abs\n";
  for (const auto& r : rep.results) {
    for (std::size_t i = 0; i < r.support.size(); ++i) {
      const bool has_amp = static_cast<Eigen::Index>(i) < r.amplitudes.size();
      const Complex a = has_amp ? r.amplitudes(static_cast<Eigen::Index>(i)) : Complex(0.0, 0.0);
      out += std::string(to_string(r.method)) + "," + fmt(t_to_deg(r.support[i])) + "," + fmt(r.support[i]) + "," +
             (has_amp ? fmt(a.real()) + "," + fmt(a.imag()) + "," + fmt(std::abs(a)) : ",,") + "\n";
    }
  }
  return out;
}

bool wants(const std::vector<Format>& f, Format x) { return std::find(f.begin(), f.end(), x) != f.end(); }

}  // namespace

std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir,
                                                const std::string& stem, const std::vector<Format>& formats,
                                                const JsonOptions& opts) {
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& contents) {
    const auto path = dir / name;
    atomic_write(path, contents);
    written.push_back(path);
  };
  if (wants(formats, Format::json)) put(stem + ".json", report_json(r, opts));
  if (wants(formats, Format::csv)) {
    put(stem + "_support.csv", support_csv(r));
    for (const auto& m : r.results)
      if (!m.grid.empty() && m.values.size() == static_cast<Eigen::Index>(m.grid.size()))
        put(stem + "_" + to_string(m.method) + ".csv", curve_csv(m));
  }
  if (wants(formats, Format::svg)) {
    for (const auto& m : r.results) {
      if (!m.ok) continue;
      const std::string base = stem + "_" + to_string(m.method);
      const bool has_curve = !m.grid.empty() && m.values.size() == static_cast<Eigen::Index>(m.grid.size());
      if (is_spectrum(m.method) && has_curve) put(base + ".svg", spectrum_svg(r, m));
      if (m.method == Method::cs_grid && has_curve) put(base + ".svg", stems_svg(r, m));
      if (m.method == Method::gridfree) {
        if (has_curve) put(base + "_dual.svg", dual_svg(r, m));
        put(base + "_stems.svg", stems_svg(r, m));
        put(base + "_roots.svg", roots_svg(r, m));
      }
    }
  }
  return written;
}

}  // namespace gridfree::harness
