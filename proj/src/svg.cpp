// Minimal self-contained SVG line chart for sweep summaries.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

#include "cbf/harness.hpp"

namespace cbf {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string sweep_svg(const SweepResult& r, const ExperimentConfig& cfg) {
  const double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& row : r.rows) {
    xlo = std::min(xlo, row.value);
    xhi = std::max(xhi, row.value);
    if (!std::isfinite(row.mean)) continue;
    ylo = std::min(ylo, row.mean - row.stderr_);
    yhi = std::max(yhi, row.mean + row.stderr_);
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
  if (!std::isfinite(ylo)) ylo = 0, yhi = 1;
  if (xhi <= xlo) xhi = xlo + 1;
  if (yhi <= ylo) yhi = ylo + 1;
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  auto X = [&](double v) { return left + pw * (v - xlo) / (xhi - xlo); };
  auto Y = [&](double v) { return top + ph * (1.0 - (v - ylo) / (yhi - ylo)); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%g", W) + "\" height=\"" + fmt("%g", H) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char title[160];
  std::snprintf(title, sizeof title, "K=%d Nt=%d beta=%g, %d instances per point", cfg.K, cfg.Nt, cfg.beta,
                cfg.instances);
  s += "<text x=\"" + fmt("%g", left) + "\" y=\"24\">" + escape(title) + "</text>\n";
  s += "<rect x=\"" + fmt("%g", left) + "\" y=\"" + fmt("%g", top) + "\" width=\"" + fmt("%g", pw) +
       "\" height=\"" + fmt("%g", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double xv = xlo + (xhi - xlo) * t / 4.0;
    const double yv = ylo + (yhi - ylo) * t / 4.0;
    s += "<text x=\"" + fmt("%.1f", X(xv)) + "\" y=\"" + fmt("%.1f", top + ph + 18) +
         "\" text-anchor=\"middle\">" + fmt("%.3g", xv) + "</text>\n";
    s += "<text x=\"" + fmt("%.1f", left - 6) + "\" y=\"" + fmt("%.1f", Y(yv) + 4) +
         "\" text-anchor=\"end\">" + fmt("%.3g", yv) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", H - 16) +
       "\" text-anchor=\"middle\">" + (cfg.axis == "eta" ? std::string("eta") : std::string("1/sigma^2 (dB)")) +
       "</text>\n";
  s += "<text transform=\"rotate(-90)\" x=\"" + fmt("%.1f", -(top + ph / 2)) +
       "\" y=\"18\" text-anchor=\"middle\">mean utility</text>\n";

  // Series in config order; NaN points (all instances failed) break nothing, they are skipped.
  std::map<std::string, size_t> series;
  for (const auto& m : cfg.methods) series.emplace(m, series.size());
  for (const auto& m : cfg.methods) {
    const size_t c = series[m] % (sizeof kPalette / sizeof kPalette[0]);
    std::string pts;
    for (const auto& row : r.rows) {
      if (row.method != m || !std::isfinite(row.mean)) continue;
      pts += fmt("%.2f", X(row.value)) + "," + fmt("%.2f", Y(row.mean)) + " ";
      s += "<line x1=\"" + fmt("%.2f", X(row.value)) + "\" x2=\"" + fmt("%.2f", X(row.value)) + "\" y1=\"" +
           fmt("%.2f", Y(row.mean - row.stderr_)) + "\" y2=\"" + fmt("%.2f", Y(row.mean + row.stderr_)) +
           "\" stroke=\"" + kPalette[c] + "\"/>\n";
      s += "<circle cx=\"" + fmt("%.2f", X(row.value)) + "\" cy=\"" + fmt("%.2f", Y(row.mean)) +
           "\" r=\"3\" fill=\"" + kPalette[c] + "\"/>\n";
    }
    if (!pts.empty()) pts.pop_back();
    s += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" + std::string(kPalette[c]) + "\" points=\"" + pts +
         "\"/>\n";
    const double ly = top + 16 + 20.0 * static_cast<double>(series[m]);
    s += "<line x1=\"" + fmt("%.1f", left + pw + 14) + "\" x2=\"" + fmt("%.1f", left + pw + 40) + "\" y1=\"" +
         fmt("%.1f", ly) + "\" y2=\"" + fmt("%.1f", ly) + "\" stroke-width=\"2\" stroke=\"" + kPalette[c] +
         "\"/>\n";
    s += "<text x=\"" + fmt("%.1f", left + pw + 46) + "\" y=\"" + fmt("%.1f", ly + 4) + "\">" + escape(m) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace cbf
