//------------------------------------------------------------------------------
//
//   Copyright 2026 The Tempora Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "tempora/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tempora {

namespace {

constexpr double kWidth  = 800.0;
constexpr double kHeight = 420.0;
constexpr double kLeft   = 64.0;
constexpr double kRight  = 150.0;
constexpr double kTop    = 40.0;
constexpr double kBottom = 56.0;

std::string escape(std::string const &s)
{
  std::string out;
  for (char ch : s)
  {
    switch (ch)
    {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out.push_back(ch);
    }
  }
  return out;
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Maps data coordinates into the plot rectangle.
struct Frame
{
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame make_frame(double x0, double x1, double y0, double y1)
{
  if (!(x1 > x0))
  {
    x1 = x0 + 1.0;
  }
  if (!(y1 > y0))
  {
    y0 -= 0.5;
    y1 += 0.5;
  }
  double const pad = 0.05 * (y1 - y0);
  return {x0, x1, y0 - pad, y1 + pad};
}

void open_svg(std::ostream &os, std::string const &title)
{
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << escape(title) << "</text>\n";
}

void axes(std::ostream &os, Frame const &f, std::string const &xlabel, std::string const &ylabel)
{
  double const bx = kLeft;
  double const by = kHeight - kBottom;
  double const ex = kWidth - kRight;
  os << "<g stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << ex << "\" y2=\"" << by << "\"/>\n"
     << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << bx << "\" y2=\"" << kTop << "\"/>\n"
     << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i)
  {
    double const xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    double const yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    os << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << by + 16 << "\" text-anchor=\"middle\">"
       << label(xv) << "</text>\n"
       << "<text x=\"" << bx - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">"
       << label(yv) << "</text>\n";
  }
  os << "<text x=\"" << (bx + ex) / 2 << "\" y=\"" << kHeight - 14 << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n"
     << "<text x=\"16\" y=\"" << (kTop + by) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (kTop + by) / 2 << ")\">" << escape(ylabel) << "</text>\n</g>\n";
}

void polyline(std::ostream &os, Frame const &f, std::vector<double> const &xs,
              std::vector<double> const &ys, char const *color)
{
  if (xs.empty())
  {
    return;
  }
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i)
  {
    os << (i ? " " : "") << num(f.px(xs[i])) << ',' << num(f.py(ys[i]));
  }
  os << "\"/>\n";
}

void points(std::ostream &os, Frame const &f, std::vector<double> const &xs,
            std::vector<double> const &ys, char const *color)
{
  os << "<g fill=\"" << color << "\">\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
  {
    os << "<circle cx=\"" << num(f.px(xs[i])) << "\" cy=\"" << num(f.py(ys[i])) << "\" r=\"2.5\"/>\n";
  }
  os << "</g>\n";
}

void legend(std::ostream &os, std::vector<std::pair<std::string, char const *>> const &entries)
{
  double const x = kWidth - kRight + 16;
  double       y = kTop + 10;
  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (auto const &[name, color] : entries)
  {
    os << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"10\" fill=\"" << color
       << "\"/>\n"
       << "<text x=\"" << x + 18 << "\" y=\"" << y << "\">" << escape(name) << "</text>\n";
    y += 20;
  }
  os << "</g>\n";
}

void write_file(std::string const &path, std::string const &content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content))
  {
    throw DataError("cannot write '" + path + "'");
  }
}

}  // namespace

void write_forecast_csv(ForecastResult const &r, std::string const &csv_path)
{
  std::ostringstream os;
  os << "offset,timestamp,history,predicted,actual\n";
  char              buf[128];
  std::size_t const H = r.history.size();
  for (std::size_t i = 0; i < H; ++i)
  {
    auto const off = static_cast<long long>(i) - static_cast<long long>(H) + 1;
    std::snprintf(buf, sizeof buf, "%lld,%s,%.17g,,\n", off, format_timestamp(r.origin + off).c_str(),
                  r.history[i]);
    os << buf;
  }
  for (std::size_t k = 0; k < r.predicted.size(); ++k)
  {
    auto const off = static_cast<long long>(k) + 1;
    std::snprintf(buf, sizeof buf, "%lld,%s,,%.17g,%.17g\n", off,
                  format_timestamp(r.origin + off).c_str(), r.predicted[k], r.actual.at(k));
    os << buf;
  }
  write_file(csv_path, os.str());
}

void emit_forecast_plot(ForecastResult const &r, std::string const &svg_path, std::string const &title)
{
  if (r.predicted.size() != r.actual.size() || r.predicted.empty())
  {
    throw ShapeError("forecast plot: predicted and actual must have equal non-zero length");
  }
  std::vector<double> hx, hy, fx;
  auto const          H = static_cast<double>(r.history.size());
  for (std::size_t i = 0; i < r.history.size(); ++i)
  {
    hx.push_back(static_cast<double>(i) - H + 1.0);
    hy.push_back(r.history[i]);
  }
  for (std::size_t k = 0; k < r.predicted.size(); ++k)
  {
    fx.push_back(static_cast<double>(k) + 1.0);
  }
  double lo = *std::min_element(r.predicted.begin(), r.predicted.end());
  double hi = *std::max_element(r.predicted.begin(), r.predicted.end());
  for (auto const *v : {&r.history, &r.actual})
  {
    for (double x : *v)
    {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  Frame const f = make_frame(hx.empty() ? 1.0 : hx.front(), fx.back(), lo, hi);

  std::ostringstream os;
  open_svg(os, title + " (origin " + format_timestamp(r.origin) + ")");
  axes(os, f, "hours relative to origin", "temperature (\xC2\xB0" "C)");
  polyline(os, f, hx, hy, "#444444");
  points(os, f, fx, r.actual, "#1f5fbf");
  points(os, f, fx, r.predicted, "#d62728");
  legend(os, {{"history", "#444444"}, {"actual", "#1f5fbf"}, {"predicted", "#d62728"}});
  os << "</svg>\n";
  write_file(svg_path, os.str());

  write_forecast_csv(r, std::filesystem::path(svg_path).replace_extension(".csv").string());
}

void emit_loss_plot(LossHistory const &h, std::string const &svg_path, std::string const &title)
{
  std::vector<double> xs;
  double              lo = 0.0;
  double              hi = 0.0;
  for (std::size_t e = 0; e < h.epochs(); ++e)
  {
    xs.push_back(static_cast<double>(e + 1));
    hi = std::max({hi, h.train[e], h.val[e]});
  }
  Frame const f = make_frame(1.0, std::max<double>(2.0, static_cast<double>(h.epochs())), lo, hi);

  std::ostringstream os;
  open_svg(os, title);
  axes(os, f, "epoch", "MSE (normalized units)");
  polyline(os, f, xs, h.train, "#1f5fbf");
  polyline(os, f, xs, h.val, "#ff7f0e");
  legend(os, {{"training", "#1f5fbf"}, {"validation", "#ff7f0e"}});
  os << "</svg>\n";
  write_file(svg_path, os.str());
}

}  // namespace tempora
