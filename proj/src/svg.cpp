#include "softguide/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace softguide::svg {

namespace {

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string render(const Chart& c, int width, int height) {
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  auto tx = [&](double x) { return c.log_x ? std::log10(x) : x; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : c.series)
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (c.log_x && s.x[k] <= 0)) continue;
      x0 = std::min(x0, tx(s.x[k]));
      x1 = std::max(x1, tx(s.x[k]));
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  if (c.hline) {
    y0 = std::min(y0, *c.hline);
    y1 = std::max(y1, *c.hline);
  }
  if (x0 > x1) x0 = 0, x1 = 1;
  if (y0 > y1) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double px = 0.05 * (x1 - x0), py = 0.08 * (y1 - y0);
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  const double W = width - ml - mr, H = height - mt - mb;
  auto sx = [&](double x) { return ml + (tx(x) - x0) / (x1 - x0) * W; };
  auto sy = [&](double y) { return mt + (y1 - y) / (y1 - y0) * H; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(c.title)
    << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W << "\" height=\"" << H
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    const double X = ml + W * k / 4, Y = mt + H - H * k / 4;
    o << "<text x=\"" << X << "\" y=\"" << mt + H + 16 << "\" text-anchor=\"middle\">"
      << g(c.log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">" << g(yv) << "</text>\n";
  }
  o << "<text x=\"" << ml + W / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << esc(c.xlabel)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << mt + H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << mt + H / 2 << ")\">" << esc(c.ylabel) << "</text>\n";
  if (c.hline) {
    o << "<line x1=\"" << ml << "\" x2=\"" << ml + W << "\" y1=\"" << sy(*c.hline) << "\" y2=\"" << sy(*c.hline)
      << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
    o << "<text x=\"" << ml + W - 4 << "\" y=\"" << sy(*c.hline) - 5 << "\" text-anchor=\"end\" fill=\"#d62728\">"
      << esc(c.hline_label) << "</text>\n";
  }
  int legend = 0;
  for (const auto& s : c.series) {
    std::ostringstream pts;
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (c.log_x && s.x[k] <= 0)) continue;
      if (s.markers)
        o << "<circle cx=\"" << sx(s.x[k]) << "\" cy=\"" << sy(s.y[k]) << "\" r=\"3.5\" fill=\"" << s.color
          << "\"/>\n";
      pts << sx(s.x[k]) << "," << sy(s.y[k]) << " ";
    }
    if (!s.markers)
      o << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << s.color << "\"/>\n";
    if (!s.label.empty()) {
      o << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 16 + 15 * legend << "\" fill=\"" << s.color << "\">"
        << esc(s.label) << "</text>\n";
      ++legend;
    }
  }
  o << "</svg>\n";
  return o.str();
}

bool write(const std::string& path, const Chart& c) {
  try {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) return false;
    out << render(c);
    return static_cast<bool>(out);
  } catch (...) {
    return false;
  }
}

}  // namespace softguide::svg
