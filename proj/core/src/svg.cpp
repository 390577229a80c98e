#include "mgap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mgap/errors.hpp"

namespace mgap {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series, bool scatter) {
  require(!series.empty(), Errc::invalid_config, "plot needs at least one series");
  double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
  for (const PlotSeries& s : series) {
    require(s.x.size() == s.y.size() && !s.x.empty(), Errc::invalid_config,
            "series x/y lengths differ or are empty");
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  require(std::isfinite(xmin) && std::isfinite(ymin) && std::isfinite(xmax) && std::isfinite(ymax),
          Errc::invalid_config, "non-finite plot data");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  require(out.good(), Errc::io_error, "cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_xml(title) << "</text>\n";

  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw
      << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + ph << "\" stroke=\"black\"/>\n";

  out << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-size=\"11\">" << short_num(xmin) << "</text>\n"
      << "<text x=\"" << kLeft + pw << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-size=\"11\">" << short_num(xmax) << "</text>\n"
      << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + ph
      << "\" text-anchor=\"end\" font-size=\"11\">" << short_num(ymin) << "</text>\n"
      << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + 10
      << "\" text-anchor=\"end\" font-size=\"11\">" << short_num(ymax) << "</text>\n";

  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(xlabel) << "</text>\n"
      << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\""
      << " transform=\"rotate(-90 16 " << kTop + ph / 2 << ")\">" << escape_xml(ylabel)
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    if (scatter) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
            << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) out << ' ';
        out << px(s.x[i]) << ',' << py(s.y[i]);
      }
      out << "\"/>\n";
    }
    double ly = kTop + 6.0 + 16.0 * static_cast<double>(si);
    out << "<rect x=\"" << kLeft + pw - 130 << "\" y=\"" << ly - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n"
        << "<text x=\"" << kLeft + pw - 115 << "\" y=\"" << ly << "\" font-size=\"11\">"
        << escape_xml(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  require(out.good(), Errc::io_error, "write failed: " + path);
}

}  // namespace mgap
