#include <cmath>
#include <cstdio>
#include <fstream>

#include "billiard/harness.hpp"

namespace billiard::harness {

namespace {

constexpr double kPixelsPerUnit = 40.0;
constexpr double kPad = 1.0;
constexpr double kNormalLength = 0.6;

const char* const kPalette[] = {"#c0392b", "#2471a3", "#1e8449", "#b9770e", "#7d3c98", "#117a65"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string render_svg(const geometry::Scene& scene,
                       const std::vector<orbits::PeriodicOrbit>& orbits) {
  if (scene.dimension() != 2) throw RenderError("render: only planar scenes can be drawn");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& k : scene.obstacles()) {
    const double r = k.max_semi_axis();
    xmin = std::min(xmin, k.center()(0) - r);
    xmax = std::max(xmax, k.center()(0) + r);
    ymin = std::min(ymin, k.center()(1) - r);
    ymax = std::max(ymax, k.center()(1) + r);
  }
  xmin -= kPad;
  ymin -= kPad;
  xmax += kPad;
  ymax += kPad;
  const double s = kPixelsPerUnit;
  auto px = [&](double x) { return fmt((x - xmin) * s); };
  auto py = [&](double y) { return fmt((ymax - y) * s); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt((xmax - xmin) * s) +
         "\" height=\"" + fmt((ymax - ymin) * s) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i < scene.size(); ++i) {
    const auto& k = scene[i];
    const std::string style = " fill=\"#d5d8dc\" stroke=\"black\" stroke-width=\"1\"";
    if (k.is_sphere()) {
      svg += "<circle cx=\"" + px(k.center()(0)) + "\" cy=\"" + py(k.center()(1)) + "\" r=\"" +
             fmt(k.radius() * s) + "\"" + style + "/>\n";
    } else {
      // SVG rotates clockwise in screen space, which is counterclockwise
      // after the y flip, hence the sign.
      const double deg = std::atan2(k.rotation()(1, 0), k.rotation()(0, 0)) * 180.0 / kPi;
      svg += "<ellipse cx=\"" + px(k.center()(0)) + "\" cy=\"" + py(k.center()(1)) + "\" rx=\"" +
             fmt(k.semi_axes()(0) * s) + "\" ry=\"" + fmt(k.semi_axes()(1) * s) +
             "\" transform=\"rotate(" + fmt(-deg) + " " + px(k.center()(0)) + " " +
             py(k.center()(1)) + ")\"" + style + "/>\n";
    }
    svg += "<text x=\"" + px(k.center()(0)) + "\" y=\"" + py(k.center()(1)) +
           "\" font-size=\"14\" text-anchor=\"middle\">" + std::to_string(i + 1) + "</text>\n";
  }
  for (std::size_t o = 0; o < orbits.size(); ++o) {
    const auto& orbit = orbits[o];
    const char* color = kPalette[o % (sizeof kPalette / sizeof kPalette[0])];
    std::string pts;
    for (std::size_t j = 0; j <= orbit.points.size(); ++j) {
      const Vec& p = orbit.points[j % orbit.points.size()];
      if (!pts.empty()) pts += ' ';
      pts += px(p(0)) + "," + py(p(1));
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"><title>" + orbit.word.str() + "</title></polyline>\n";
    for (std::size_t j = 0; j < orbit.points.size(); ++j) {
      const Vec& p = orbit.points[j];
      const Vec q = p + kNormalLength * orbit.normals[j];
      svg += "<line x1=\"" + px(p(0)) + "\" y1=\"" + py(p(1)) + "\" x2=\"" + px(q(0)) +
             "\" y2=\"" + py(q(1)) + "\" stroke=\"" + color +
             "\" stroke-width=\"0.8\" stroke-dasharray=\"3,2\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

void write_svg(const geometry::Scene& scene, const std::vector<orbits::PeriodicOrbit>& orbits,
               const std::string& path) {
  const std::string svg = render_svg(scene, orbits);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("render: cannot write '" + path + "'");
  f << svg;
}

}  // namespace billiard::harness
