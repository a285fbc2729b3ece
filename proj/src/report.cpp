// Copyright 2026 The PriorForecast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "priorforecast/report.hpp"

#include "priorforecast/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <sstream>

namespace priorforecast
{
namespace
{

constexpr std::array<const char *, 8> kPalette{
  "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

const char * colour(std::size_t i) { return kPalette[i % kPalette.size()]; }

std::string escape(const std::string & s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string optional_number(const std::optional<double> & v)
{
  return v ? format_number(*v) : std::string();
}

const std::array<std::pair<const char *, std::optional<ActionClass>>, 4> kRows{{
  {"straight", ActionClass::straight},
  {"left", ActionClass::left},
  {"right", ActionClass::right},
  {"all", std::nullopt},
}};

std::optional<ClassMetrics> row_metrics(
  const MetricsReport & r, const std::optional<ActionClass> & cls)
{
  if (!cls) {
    return r.overall;
  }
  const auto it = r.classes.find(*cls);
  return it == r.classes.end() ? std::nullopt : std::optional<ClassMetrics>(it->second);
}

/// Axis-aligned plot frame with linear scales.
struct Frame
{
  double width{640};
  double height{400};
  double left{70};
  double right{150};
  double top{40};
  double bottom{50};
  double x0{0}, x1{1}, y0{0}, y1{1};

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void open_svg(std::ostringstream & os, double w, double h)
{
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\" "
     << "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void axes(
  std::ostringstream & os, const Frame & f, const std::string & title, const std::string & x_label,
  const std::string & y_label)
{
  os << "<text x=\"" << num(f.width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
  os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\""
     << num(f.width - f.right) << "\" y2=\"" << num(f.py(f.y0)) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top) << "\" x2=\"" << num(f.left)
     << "\" y2=\"" << num(f.py(f.y0)) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = f.y0 + (f.y1 - f.y0) * i / 4.0;
    os << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(f.py(v) + 4)
       << "\" text-anchor=\"end\">" << format_number(std::round(v * 1000) / 1000) << "</text>\n";
  }
  os << "<text x=\"" << num((f.left + f.width - f.right) / 2) << "\" y=\"" << num(f.height - 12)
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << num((f.top + f.height - f.bottom) / 2)
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num((f.top + f.height - f.bottom) / 2) << ")\">" << escape(y_label) << "</text>\n";
}

void legend(std::ostringstream & os, const Frame & f, std::span<const std::string> names)
{
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = f.top + 16.0 * i;
    os << "<rect x=\"" << num(f.width - f.right + 12) << "\" y=\"" << num(y) << "\" width=\"10\" "
       << "height=\"10\" fill=\"" << colour(i) << "\"/>\n<text x=\""
       << num(f.width - f.right + 28) << "\" y=\"" << num(y + 9) << "\">" << escape(names[i])
       << "</text>\n";
  }
}

}  // namespace

std::string forecast_comparison_csv(std::span<const NamedMetrics> models)
{
  std::ostringstream os;
  os << "model";
  for (const auto & [name, cls] : kRows) {
    os << ',' << name << "_count," << name << "_final_lane_error," << name << "_mean_ade," << name
       << "_min_ade";
  }
  os << ",samples\n";
  for (const auto & m : models) {
    os << m.name;
    for (const auto & [name, cls] : kRows) {
      const auto c = row_metrics(m.forecast, cls);
      os << ',' << (c ? c->count : 0) << ',' << (c ? optional_number(c->final_lane_error) : "")
         << ',' << (c ? format_number(c->mean_ade) : "") << ','
         << (c ? format_number(c->min_ade) : "");
    }
    os << ',' << m.forecast.samples << '\n';
  }
  return os.str();
}

std::string planning_comparison_csv(std::span<const NamedMetrics> models)
{
  std::vector<std::pair<std::string, PlanningReport>> rows;
  for (const auto & m : models) {
    rows.emplace_back(m.name, m.planning);
  }
  return planning_csv(rows);
}

std::string summary_table(std::span<const NamedMetrics> models)
{
  std::ostringstream os;
  std::size_t w = 8;
  for (const auto & m : models) {
    w = std::max(w, m.name.size() + 2);
  }
  auto cell = [](const std::optional<double> & v) {
    std::ostringstream c;
    c << std::setw(9);
    if (v) {
      c << std::fixed << std::setprecision(3) << *v;
    } else {
      c << "-";
    }
    return c.str();
  };
  os << "Forecasting (final lane error %, meanADE m, minADE m)\n";
  os << std::left << std::setw(static_cast<int>(w)) << "model" << std::right;
  for (const auto & [name, cls] : kRows) {
    os << " | " << std::setw(29) << name;
  }
  os << '\n';
  for (const auto & m : models) {
    os << std::left << std::setw(static_cast<int>(w)) << m.name << std::right;
    for (const auto & [name, cls] : kRows) {
      const auto c = row_metrics(m.forecast, cls);
      os << " | " << cell(c ? c->final_lane_error : std::nullopt) << ' '
         << cell(c ? std::optional<double>(c->mean_ade) : std::nullopt) << ' '
         << cell(c ? std::optional<double>(c->min_ade) : std::nullopt);
    }
    os << '\n';
  }
  os << "\nPlanning (collision %, L2 human m, lat. acc. m/s^2, jerk m/s^3, progress m)\n";
  os << std::left << std::setw(static_cast<int>(w)) << "model" << std::right;
  for (const char * h : {"collision", "l2_human", "lat_acc", "jerk", "progress"}) {
    os << ' ' << std::setw(9) << h;
  }
  os << '\n';
  for (const auto & m : models) {
    const auto & p = m.planning;
    os << std::left << std::setw(static_cast<int>(w)) << m.name << std::right;
    for (double v : {p.collision_rate, p.l2_human_at_5s, p.lateral_accel, p.jerk, p.progress_at_5s}) {
      os << ' ' << cell(v);
    }
    os << '\n';
  }
  return os.str();
}

std::string svg_line_chart(
  std::span<const Series> series, const std::string & title, const std::string & x_label,
  const std::string & y_label)
{
  Frame f;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto & s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) {
        continue;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  }
  f.x0 = xmin;
  f.x1 = xmax > xmin ? xmax : xmin + 1.0;
  f.y0 = std::min(0.0, ymin);
  f.y1 = ymax > f.y0 ? ymax * 1.05 : f.y0 + 1.0;
  if (ymin < 0.0) {
    f.y0 = ymin * 1.05;
  }
  std::ostringstream os;
  open_svg(os, f.width, f.height);
  axes(os, f, title, x_label, y_label);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto & s = series[k];
    names.push_back(s.name);
    os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colour(k) << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.y[i])) {
        os << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
      }
    }
    os << "\"/>\n";
  }
  legend(os, f, names);
  os << "</svg>\n";
  return os.str();
}

std::string svg_bar_chart(
  std::span<const std::string> groups, std::span<const std::string> models,
  const std::vector<std::vector<double>> & values, const std::string & title,
  const std::string & y_label)
{
  Frame f;
  double ymax = 0.0;
  for (const auto & row : values) {
    for (double v : row) {
      if (std::isfinite(v)) {
        ymax = std::max(ymax, v);
      }
    }
  }
  f.x0 = 0.0;
  f.x1 = static_cast<double>(std::max<std::size_t>(1, groups.size()));
  f.y0 = 0.0;
  f.y1 = ymax > 0.0 ? ymax * 1.1 : 1.0;
  std::ostringstream os;
  open_svg(os, f.width, f.height);
  axes(os, f, title, "", y_label);
  const double group_w = f.px(1.0) - f.px(0.0);
  const double bar_w = 0.8 * group_w / static_cast<double>(std::max<std::size_t>(1, models.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t m = 0; m < models.size() && m < values.size(); ++m) {
      const double v = g < values[m].size() ? values[m][g] : std::nan("");
      if (!std::isfinite(v)) {
        continue;
      }
      const double x = f.px(static_cast<double>(g)) + 0.1 * group_w + bar_w * m;
      os << "<rect x=\"" << num(x) << "\" y=\"" << num(f.py(v)) << "\" width=\"" << num(bar_w)
         << "\" height=\"" << num(f.py(0.0) - f.py(v)) << "\" fill=\"" << colour(m) << "\"/>\n";
    }
    os << "<text x=\"" << num(f.px(g + 0.5)) << "\" y=\"" << num(f.py(0.0) + 16)
       << "\" text-anchor=\"middle\">" << escape(groups[g]) << "</text>\n";
  }
  legend(os, f, models);
  os << "</svg>\n";
  return os.str();
}

std::string svg_history(std::span<const std::pair<std::string, TrainingHistory>> runs)
{
  std::vector<Series> series;
  for (const auto & [name, h] : runs) {
    Series sym{name + " symmetric", {}, {}};
    Series prior{name + " prior", {}, {}};
    for (const auto & e : h.epochs) {
      if (e.epoch == 0) {
        continue;  // the initial loss dwarfs the rest of the curve
      }
      sym.x.push_back(e.epoch);
      sym.y.push_back(e.loss.symmetric);
      prior.x.push_back(e.epoch);
      prior.y.push_back(e.loss.prior);
    }
    series.push_back(std::move(sym));
    series.push_back(std::move(prior));
  }
  return svg_line_chart(series, "Training losses", "epoch", "loss");
}

TrainingHistory parse_history_csv(const std::string & text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("epoch,", 0) != 0) {
    throw Error(ErrorCode::parse_error, "history csv: missing header");
  }
  TrainingHistory h;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      cols.push_back(c);
    }
    while (cols.size() < 7) {
      cols.emplace_back();
    }
    try {
      EpochRecord e;
      e.epoch = std::stoi(cols[0]);
      e.loss.total = std::stod(cols[1]);
      e.loss.symmetric = std::stod(cols[2]);
      e.loss.prior = std::stod(cols[3]);
      if (!cols[5].empty()) {
        ClassMetrics m;
        if (!cols[4].empty()) {
          m.final_lane_error = std::stod(cols[4]);
        }
        m.mean_ade = std::stod(cols[5]);
        m.min_ade = std::stod(cols[6]);
        e.eval = m;
      }
      h.epochs.push_back(e);
    } catch (const std::exception &) {
      throw Error(ErrorCode::parse_error, "history csv: bad row '" + line + "'");
    }
  }
  return h;
}

std::string svg_scene(
  const Scene & scene, std::span<const ForecastSet> forecasts, const std::string & title)
{
  // View: everything the actors and samples touch, plus a margin.
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto grow = [&](const Vec2 & p) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  };
  for (const auto * a : {&scene.sdv}) {
    for (const auto & p : a->future_gt) grow(p);
  }
  for (const auto & a : scene.actors) {
    for (const auto & p : a.future_gt) grow(p);
    grow(a.past.front().position);
  }
  const double margin = 20.0;
  x0 -= margin, x1 += margin, y0 -= margin, y1 += margin;
  const double scale = 800.0 / std::max(x1 - x0, y1 - y0);
  const double w = (x1 - x0) * scale;
  const double h = (y1 - y0) * scale + 30.0;
  auto sx = [&](double x) { return num((x - x0) * scale); };
  auto sy = [&](double y) { return num(30.0 + (y1 - y) * scale); };
  auto points = [&](std::span<const Vec2> pts) {
    std::string s;
    for (const auto & p : pts) {
      s += sx(p.x) + "," + sy(p.y) + " ";
    }
    return s;
  };

  std::ostringstream os;
  open_svg(os, w, h);
  os << "<text x=\"8\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (const auto & [id, seg] : scene.world.segments()) {
    const bool red = scene.world.light_state(id) == LightState::red;
    os << "<polygon points=\"" << points(seg.polygon) << "\" fill=\"" << (red ? "#f5d0d0" : "#eeeeee")
       << "\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
    os << "<polyline points=\"" << points(seg.centerline)
       << "\" fill=\"none\" stroke=\"#cccccc\" stroke-dasharray=\"4 4\" stroke-width=\"0.7\"/>\n";
  }
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    for (const auto & s : forecasts[i].samples) {
      os << "<polyline points=\"" << points(s) << "\" fill=\"none\" stroke=\"" << colour(i + 1)
         << "\" stroke-opacity=\"0.25\" stroke-width=\"1\"/>\n";
    }
  }
  auto box = [&](const OrientedBox & b, const char * fill) {
    const auto c = b.corners();
    os << "<polygon points=\"" << points(c) << "\" fill=\"" << fill << "\" stroke=\"black\" "
       << "stroke-width=\"0.8\"/>\n";
  };
  for (std::size_t i = 0; i < scene.actors.size(); ++i) {
    const auto & a = scene.actors[i];
    os << "<polyline points=\"" << points(a.future_gt) << "\" fill=\"none\" stroke=\"black\" "
       << "stroke-width=\"1.5\"/>\n";
    box(a.box, colour(i + 1));
  }
  os << "<polyline points=\"" << points(scene.sdv.future_gt) << "\" fill=\"none\" stroke=\"black\" "
     << "stroke-dasharray=\"3 2\" stroke-width=\"1.5\"/>\n";
  box(scene.sdv.box, "#000000");
  os << "</svg>\n";
  return os.str();
}

}  // namespace priorforecast
