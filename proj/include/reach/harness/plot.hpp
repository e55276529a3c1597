#pragma once

// SVG projections of tubes onto two state dimensions, and the runtime/volume plot of a
// μ sweep. All coordinates are printed with fixed precision so output is reproducible.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "reach/harness/artifact.hpp"
#include "reach/harness/commands.hpp"

namespace reach::harness {

namespace detail {

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 480.0;
inline constexpr double kMargin = 48.0;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;

  void include(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void pad() {
    const double dx = std::max(x1 - x0, 1e-12);
    const double dy = std::max(y1 - y0, 1e-12);
    x0 -= 0.05 * dx;
    x1 += 0.05 * dx;
    y0 -= 0.05 * dy;
    y1 += 0.05 * dy;
  }
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
  double sx(double r) const { return r / (x1 - x0) * (kWidth - 2 * kMargin); }
  double sy(double r) const { return r / (y1 - y0) * (kHeight - 2 * kMargin); }
};

inline Frame empty_frame() {
  const double inf = std::numeric_limits<double>::infinity();
  return {inf, -inf, inf, -inf};
}

// Boundary of the projection of B_M(c, δ) onto dims (i, j): the 2×2 block of δ²M⁻¹.
inline std::vector<std::pair<double, double>> projected_ellipse(const Ellipsoid& e, int i, int j, int points = 72) {
  const Mat& ainv = e.metric.factor_inverse();
  const Mat cov = ainv * ainv.transpose();
  Eigen::Matrix2d s;
  s << cov(i, i), cov(i, j), cov(j, i), cov(j, j);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt() * e.radius;
  const Eigen::Matrix2d v = es.eigenvectors();
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double th = 2.0 * std::numbers::pi * k / points;
    const Eigen::Vector2d p = v * Eigen::Vector2d(ev(0) * std::cos(th), ev(1) * std::sin(th));
    out.emplace_back(e.center(i) + p(0), e.center(j) + p(1));
  }
  return out;
}

inline std::string svg_open() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream os;
  os << "<g stroke=\"black\" stroke-width=\"1\">"
     << "<line x1=\"" << num(kMargin) << "\" y1=\"" << num(kHeight - kMargin) << "\" x2=\"" << num(kWidth - kMargin)
     << "\" y2=\"" << num(kHeight - kMargin) << "\"/>"
     << "<line x1=\"" << num(kMargin) << "\" y1=\"" << num(kMargin) << "\" x2=\"" << num(kMargin) << "\" y2=\""
     << num(kHeight - kMargin) << "\"/></g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\">"
     << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">" << xlabel
     << "</text>"
     << "<text x=\"14\" y=\"" << num(kHeight / 2) << "\" transform=\"rotate(-90 14 " << num(kHeight / 2)
     << ")\" text-anchor=\"middle\">" << ylabel << "</text>"
     << "<text x=\"" << num(kMargin) << "\" y=\"" << num(kHeight - kMargin + 14) << "\">" << num(f.x0) << "</text>"
     << "<text x=\"" << num(kWidth - kMargin) << "\" y=\"" << num(kHeight - kMargin + 14) << "\" text-anchor=\"end\">"
     << num(f.x1) << "</text>"
     << "<text x=\"" << num(kMargin - 4) << "\" y=\"" << num(kHeight - kMargin) << "\" text-anchor=\"end\">"
     << num(f.y0) << "</text>"
     << "<text x=\"" << num(kMargin - 4) << "\" y=\"" << num(kMargin + 8) << "\" text-anchor=\"end\">" << num(f.y1)
     << "</text></g>\n";
  return os.str();
}

inline std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts, bool closed,
                            const std::string& style) {
  std::ostringstream os;
  os << (closed ? "<polygon" : "<polyline") << " points=\"";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) os << ' ';
    os << num(f.px(pts[k].first)) << ',' << num(f.py(pts[k].second));
  }
  os << "\" " << style << "/>\n";
  return os.str();
}

}  // namespace detail

// Projection onto dims (i, j): ellipse outlines for LRT-NG, circles for GoTube/SLR,
// optionally with `overlay` sampled trajectories from the surface of B₀.
inline std::string plot_tube(const TubeArtifact& a, int i, int j, std::size_t overlay = 0, std::uint64_t seed = 1) {
  using namespace detail;
  if (a.size() == 0) throw InvalidInput("plot: empty artifact");
  const int n = static_cast<int>(a.center(0).size());
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw InvalidInput("plot: dims must be two distinct indices below the model dimension");

  std::vector<std::vector<std::pair<double, double>>> shapes;
  Frame f = empty_frame();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Vec& c = a.center(k);
    if (a.stochastic()) {
      const double r = a.stochastic_steps[k].radius;
      f.include(c(i) - r, c(j) - r);
      f.include(c(i) + r, c(j) + r);
    } else {
      shapes.push_back(projected_ellipse(a.lrtng_steps[k].ellipsoid, i, j));
      for (const auto& p : shapes.back()) f.include(p.first, p.second);
    }
  }

  std::vector<std::vector<std::pair<double, double>>> paths;
  if (overlay > 0) {
    const VectorFieldPtr field = a.config.field();
    std::vector<double> times;
    for (std::size_t k = 0; k < a.size(); ++k) times.push_back(a.time(k));
    const IntegratorConfig cfg = IntegratorConfig::adaptive(a.config.rtol, a.config.atol);
    for (std::size_t s = 0; s < overlay; ++s) {
      const Vec x = sample_sphere_point(a.config.x0, a.config.delta0, seed, s);
      std::vector<std::pair<double, double>> path;
      try {
        for (const Vec& p : trajectory(*field, x, 0.0, times, cfg)) {
          path.emplace_back(p(i), p(j));
          f.include(p(i), p(j));
        }
      } catch (const Error&) {
        // Diverging sample: draw the part that exists.
      }
      paths.push_back(std::move(path));
    }
  }
  f.pad();

  std::ostringstream os;
  os << svg_open();
  os << axes(f, "x" + std::to_string(i), "x" + std::to_string(j));
  os << "<g fill=\"none\">\n";
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.stochastic()) {
      const Vec& c = a.center(k);
      const double r = a.stochastic_steps[k].radius;
      // Circles are drawn as ellipses so unequal axis scales stay faithful.
      os << "<ellipse cx=\"" << num(f.px(c(i))) << "\" cy=\"" << num(f.py(c(j))) << "\" rx=\"" << num(f.sx(r))
         << "\" ry=\"" << num(f.sy(r)) << "\" stroke=\"#1f77b4\" stroke-width=\"0.8\"/>\n";
    } else {
      os << polyline(f, shapes[k], true, "stroke=\"#7b3294\" stroke-width=\"0.8\"");
    }
  }
  for (const auto& p : paths) {
    if (p.size() > 1) os << polyline(f, p, false, "stroke=\"#d62728\" stroke-width=\"0.6\" stroke-opacity=\"0.7\"");
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

// Runtime (x) against normalized volume (y), one marker per μ.
inline std::string plot_pareto(const ParetoResult& r) {
  using namespace detail;
  if (r.points.empty()) throw InvalidInput("plot: empty pareto curve");
  Frame f = empty_frame();
  for (const auto& p : r.points) f.include(p.runtime, p.normalized_volume);
  f.pad();
  std::ostringstream os;
  os << svg_open() << axes(f, "runtime (s)", "normalized volume");
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : r.points) pts.emplace_back(p.runtime, p.normalized_volume);
  os << polyline(f, pts, false, "fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\"");
  os << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (const auto& p : r.points) {
    os << "<circle cx=\"" << num(f.px(p.runtime)) << "\" cy=\"" << num(f.py(p.normalized_volume))
       << "\" r=\"3\" fill=\"#1f77b4\"/><text x=\"" << num(f.px(p.runtime) + 5) << "\" y=\""
       << num(f.py(p.normalized_volume) - 5) << "\">mu=" << p.mu << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace reach::harness
