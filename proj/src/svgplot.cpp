#include "qpot/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace qpot {
namespace {

constexpr int kWidth = 800, kHeight = 500, kMargin = 50;
constexpr int kMaxCells = 256;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Linear blue -> white -> red ramp over [0, 1].
std::string ramp_color(double u) {
  u = std::clamp(u, 0.0, 1.0);
  auto mix = [](int a, int b, double w) { return static_cast<int>(a + (b - a) * w); };
  int r, g, b;
  if (u < 0.5) {
    double w = u / 0.5;
    r = mix(0x21, 0xff, w);
    g = mix(0x66, 0xff, w);
    b = mix(0xac, 0xff, w);
  } else {
    double w = (u - 0.5) / 0.5;
    r = mix(0xff, 0xb2, w);
    g = mix(0xff, 0x18, w);
    b = mix(0xff, 0x2c, w);
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string polyline_svg(const CsvField& d, const std::vector<double>& vals) {
  double lo = *std::min_element(vals.begin(), vals.end());
  double hi = *std::max_element(vals.begin(), vals.end());
  if (hi == lo) {
    hi += 1.0;
    lo -= 1.0;
  }
  double xlo = d.xs.front(), xhi = d.xs.back();
  if (xhi == xlo) xhi = xlo + 1.0;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
         std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<polyline fill=\"none\" stroke=\"#2166ac\" stroke-width=\"1.5\" points=\"";
  for (int i = 0; i < d.nx(); ++i) {
    double px = kMargin + (d.xs[i] - xlo) / (xhi - xlo) * (kWidth - 2 * kMargin);
    double py = kHeight - kMargin - (vals[i] - lo) / (hi - lo) * (kHeight - 2 * kMargin);
    svg += fmt(px) + "," + fmt(py) + " ";
  }
  svg += "\"/>\n";
  svg += "<rect x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(kMargin) +
         "\" width=\"" + std::to_string(kWidth - 2 * kMargin) + "\" height=\"" +
         std::to_string(kHeight - 2 * kMargin) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"" + std::to_string(kMargin) + "\" y=\"" +
         std::to_string(kHeight - kMargin + 20) + "\" font-size=\"12\">x=" + fmt(xlo) +
         "</text>\n";
  svg += "<text x=\"" + std::to_string(kWidth - kMargin - 60) + "\" y=\"" +
         std::to_string(kHeight - kMargin + 20) + "\" font-size=\"12\">x=" + fmt(xhi) +
         "</text>\n";
  svg += "<text x=\"6\" y=\"" + std::to_string(kHeight - kMargin) +
         "\" font-size=\"12\">" + fmt(lo) + "</text>\n";
  svg += "<text x=\"6\" y=\"" + std::to_string(kMargin + 4) + "\" font-size=\"12\">" +
         fmt(hi) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string heatmap_svg(const CsvField& d, const std::vector<double>& vals) {
  int nx = d.nx(), nt = d.nt();
  int bx = (nx + kMaxCells - 1) / kMaxCells;  // mean-pooling block sizes
  int bt = (nt + kMaxCells - 1) / kMaxCells;
  int cx = (nx + bx - 1) / bx, ct = (nt + bt - 1) / bt;

  std::vector<double> pooled(static_cast<std::size_t>(cx) * ct, 0.0);
  for (int J = 0; J < ct; ++J)
    for (int I = 0; I < cx; ++I) {
      double sum = 0.0;
      int cnt = 0;
      for (int j = J * bt; j < std::min(nt, (J + 1) * bt); ++j)
        for (int i = I * bx; i < std::min(nx, (I + 1) * bx); ++i) {
          sum += vals[std::size_t(j) * nx + i];
          ++cnt;
        }
      pooled[std::size_t(J) * cx + I] = sum / cnt;
    }

  double lo = *std::min_element(pooled.begin(), pooled.end());
  double hi = *std::max_element(pooled.begin(), pooled.end());
  if (hi == lo) hi = lo + 1.0;

  double cw = double(kWidth - 2 * kMargin) / cx;
  double ch = double(kHeight - 2 * kMargin) / ct;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
         std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int J = 0; J < ct; ++J)
    for (int I = 0; I < cx; ++I) {
      double u = (pooled[std::size_t(J) * cx + I] - lo) / (hi - lo);
      double px = kMargin + I * cw;
      // t increases upward
      double py = kHeight - kMargin - (J + 1) * ch;
      svg += "<rect x=\"" + fmt(px) + "\" y=\"" + fmt(py) + "\" width=\"" + fmt(cw + 0.5) +
             "\" height=\"" + fmt(ch + 0.5) + "\" fill=\"" + ramp_color(u) + "\"/>\n";
    }
  svg += "<rect x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(kMargin) +
         "\" width=\"" + std::to_string(kWidth - 2 * kMargin) + "\" height=\"" +
         std::to_string(kHeight - 2 * kMargin) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"" + std::to_string(kMargin) + "\" y=\"" +
         std::to_string(kHeight - kMargin + 20) + "\" font-size=\"12\">x: " +
         fmt(d.xs.front()) + " to " + fmt(d.xs.back()) + "</text>\n";
  svg += "<text x=\"6\" y=\"" + std::to_string(kMargin - 10) + "\" font-size=\"12\">t: " +
         fmt(d.ts.front()) + " to " + fmt(d.ts.back()) + ", value " + fmt(lo) + " (blue) to " +
         fmt(hi) + " (red)</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::string render_svg(const CsvField& data) {
  std::vector<double> vals = data.values;
  if (data.is_complex())
    for (std::size_t k = 0; k < vals.size(); ++k)
      vals[k] = std::hypot(data.values[k], data.imag[k]);
  if (data.nt() <= 1) return polyline_svg(data, vals);
  return heatmap_svg(data, vals);
}

}  // namespace qpot
