#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gamow/core.hpp"

namespace gamow::svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Style {
  std::string stroke = "black";
  std::string fill = "none";
  double width = 1.0;
  std::string dash;
};

// Drawing in world coordinates mapped onto a fixed pixel canvas with y up.
class Document {
 public:
  Document(Vec2 lo, Vec2 hi, double width_px = 480.0, double margin_px = 24.0)
      : lo_(lo), hi_(hi), margin_(margin_px) {
    if (!(hi.x > lo.x) || !(hi.y > lo.y)) throw PreconditionError("svg::Document: empty view box");
    scale_ = (width_px - 2.0 * margin_px) / (hi.x - lo.x);
    width_ = width_px;
    height_ = scale_ * (hi.y - lo.y) + 2.0 * margin_px;
  }

  // Independent x and y scales, for plots.
  Document(Vec2 lo, Vec2 hi, double width_px, double height_px, double margin_px)
      : lo_(lo), hi_(hi), margin_(margin_px), width_(width_px), height_(height_px) {
    if (!(hi.x > lo.x) || !(hi.y > lo.y)) throw PreconditionError("svg::Document: empty view box");
    scale_ = (width_px - 2.0 * margin_px) / (hi.x - lo.x);
    yscale_ = (height_px - 2.0 * margin_px) / (hi.y - lo.y);
  }

  void polyline(const std::vector<Vec2>& pts, const Style& st = {}, bool closed = false) {
    if (pts.empty()) return;
    std::ostringstream o;
    o << (closed ? "<polygon" : "<polyline") << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2 p = map(pts[i]);
      o << (i ? " " : "") << num(p.x) << ',' << num(p.y);
    }
    o << '"' << attrs(st) << "/>";
    body_.push_back(o.str());
  }

  void circle(Vec2 c, double r, const Style& st = {}) {
    const Vec2 p = map(c);
    body_.push_back("<circle cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" + num(r * scale_) + '"' +
                    attrs(st) + "/>");
  }

  void dot(Vec2 c, double r_px = 2.5, const std::string& color = "black") {
    const Vec2 p = map(c);
    body_.push_back("<circle cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" + num(r_px) + "\" fill=\"" +
                    color + "\"/>");
  }

  void line(Vec2 a, Vec2 b, const Style& st = {}) { polyline({a, b}, st); }

  void text(Vec2 at, const std::string& s, double size_px = 12.0, const std::string& anchor = "start") {
    const Vec2 p = map(at);
    body_.push_back("<text x=\"" + num(p.x) + "\" y=\"" + num(p.y) + "\" font-size=\"" + num(size_px) +
                    "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>");
  }

  void comment(const std::string& s) { body_.push_back("<!-- " + escape(s) + " -->"); }

  std::string str() const {
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
      << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& b : body_) o << b << '\n';
    o << "</svg>\n";
    return o.str();
  }

  void write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("svg: cannot write " + path);
    f << str();
  }

 private:
  Vec2 map(Vec2 p) const {
    const double ys = yscale_ > 0.0 ? yscale_ : scale_;
    return {margin_ + (p.x - lo_.x) * scale_, height_ - margin_ - (p.y - lo_.y) * ys};
  }

  static std::string attrs(const Style& st) {
    std::string a = " stroke=\"" + st.stroke + "\" fill=\"" + st.fill + "\" stroke-width=\"" + num(st.width) + '"';
    if (!st.dash.empty()) a += " stroke-dasharray=\"" + st.dash + '"';
    return a;
  }

  Vec2 lo_, hi_;
  double margin_;
  double width_ = 0.0, height_ = 0.0;
  double scale_ = 1.0, yscale_ = 0.0;
  std::vector<std::string> body_;
};

struct Series {
  std::string label;
  std::vector<Vec2> points;
  std::string color = "black";
};

// Line plot with a box frame, tick labels at the ends of each axis and
// optional vertical markers.
inline std::string line_plot(const std::vector<Series>& series, const std::string& xlabel, const std::string& ylabel,
                             const std::vector<std::pair<double, std::string>>& markers = {}) {
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& s : series)
    for (const Vec2& p : s.points) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  if (lo.x > hi.x) lo = {0, 0}, hi = {1, 1};
  if (hi.x - lo.x <= 0.0) hi.x = lo.x + 1.0;
  if (hi.y - lo.y <= 0.0) hi.y = lo.y + 1.0;
  const double px = 0.05 * (hi.x - lo.x), py = 0.08 * (hi.y - lo.y);
  lo = {lo.x - px, lo.y - py};
  hi = {hi.x + px, hi.y + py};
  Document d(lo, hi, 640.0, 420.0, 56.0);
  d.polyline({lo, {hi.x, lo.y}, hi, {lo.x, hi.y}}, {"#444", "none", 1.0, ""}, true);
  for (const auto& [x, name] : markers) {
    d.line({x, lo.y}, {x, hi.y}, {"#999", "none", 1.0, "4,3"});
    d.text({x, hi.y - 0.04 * (hi.y - lo.y)}, name, 10.0, "middle");
  }
  for (const auto& s : series) d.polyline(s.points, {s.color, "none", 1.5, ""});
  d.text({lo.x, lo.y - 0.1 * (hi.y - lo.y)}, num(lo.x), 10.0, "start");
  d.text({hi.x, lo.y - 0.1 * (hi.y - lo.y)}, num(hi.x), 10.0, "end");
  d.text({0.5 * (lo.x + hi.x), lo.y - 0.1 * (hi.y - lo.y)}, xlabel, 12.0, "middle");
  d.text({lo.x, hi.y + 0.03 * (hi.y - lo.y)}, ylabel + "  [" + num(lo.y) + ", " + num(hi.y) + "]", 12.0, "start");
  double ly = hi.y - 0.08 * (hi.y - lo.y);
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    d.line({hi.x - 0.25 * (hi.x - lo.x), ly}, {hi.x - 0.2 * (hi.x - lo.x), ly}, {s.color, "none", 1.5, ""});
    d.text({hi.x - 0.19 * (hi.x - lo.x), ly}, s.label, 10.0, "start");
    ly -= 0.06 * (hi.y - lo.y);
  }
  return d.str();
}

}  // namespace gamow::svg
