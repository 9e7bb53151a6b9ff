#include "rde/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rde::svg {

namespace {

constexpr double kWidth = 800, kHeight = 600;
constexpr double kMarginL = 70, kMarginR = 25, kMarginT = 40, kMarginB = 55;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string Plot::render() const {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double xv = log_x ? std::log10(s.x[i]) : s.x[i];
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmin <= xmax)) { xmin = 0; xmax = 1; }
  if (!(ymin <= ymax)) { ymin = 0; ymax = 1; }
  if (xmax == xmin) { xmax += 0.5; xmin -= 0.5; }
  if (ymax == ymin) { ymax += 0.5; ymin -= 0.5; }
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

  auto px = [&](double x) {
    const double v = log_x ? std::log10(x) : x;
    return kMarginL + (v - xmin) / (xmax - xmin) * (kWidth - kMarginL - kMarginR);
  };
  auto py = [&](double y) {
    return kHeight - kMarginB -
           (y - ymin) / (ymax - ymin) * (kHeight - kMarginT - kMarginB);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\">\n"
     << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
     << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << title << "</text>\n";

  // axes with 5 ticks each
  os << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB
     << "\" x2=\"" << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\""
     << kMarginL << "\" y2=\"" << kHeight - kMarginB
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + i * (xmax - xmin) / 4.0;
    const double fy = ymin + i * (ymax - ymin) / 4.0;
    const double sx = kMarginL + i * (kWidth - kMarginL - kMarginR) / 4.0;
    const double sy = kHeight - kMarginB -
                      i * (kHeight - kMarginT - kMarginB) / 4.0;
    os << "<text x=\"" << sx << "\" y=\"" << kHeight - kMarginB + 18
       << "\" text-anchor=\"middle\" font-size=\"11\">"
       << (log_x ? "1e" + fmt(fx) : fmt(fx)) << "</text>\n";
    os << "<text x=\"" << kMarginL - 8 << "\" y=\"" << sy + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy)
       << "</text>\n";
  }
  os << "<text x=\"" << (kMarginL + kWidth - kMarginR) / 2 << "\" y=\""
     << kHeight - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << xlabel << "</text>\n";
  os << "<text x=\"18\" y=\"" << (kMarginT + kHeight - kMarginB) / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << (kMarginT + kHeight - kMarginB) / 2 << ")\">" << ylabel
     << "</text>\n";

  for (const auto& s : series) {
    if (s.line && s.x.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color
         << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
      os << "\"/>\n";
    }
    if (s.marks)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
           << fmt(py(s.y[i])) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void Plot::write(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("svg: cannot open " + path);
  f << render();
}

}  // namespace rde::svg
