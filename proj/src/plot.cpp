#include "tla/plot.hpp"

#include "tla/xml.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tla {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// 1, 2 or 5 times a power of ten, giving roughly `target` ticks.
double tick_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

struct Series {
  std::vector<double> y;
  const char* color;
  const char* label;
  bool dashed;
};

class Chart {
 public:
  Chart(const std::vector<double>& x, double y_min, double y_max)
      : x_(x), x_max_(std::max(x.back(), x.front() + 1e-9)), x_min_(x.front()) {
    y_min_ = y_min;
    y_max_ = y_max > y_min ? y_max : y_min + 1.0;
  }

  double px(double x) const { return kLeft + (x - x_min_) / (x_max_ - x_min_) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y_min_) / (y_max_ - y_min_) * (kHeight - kTop - kBottom);
  }

  std::string render(const std::string& title, const char* x_label, const char* y_label,
                     const std::vector<Series>& series) const {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         xml::escape(title) + "</text>\n";

    const double xs = tick_step(x_max_ - x_min_, 8);
    for (double t = std::ceil(x_min_ / xs) * xs; t <= x_max_ + 1e-9; t += xs) {
      s += "<line x1=\"" + num(px(t)) + "\" y1=\"" + num(py(y_min_)) + "\" x2=\"" + num(px(t)) +
           "\" y2=\"" + num(py(y_max_)) + "\" stroke=\"#e0e0e0\"/>\n";
      s += "<text x=\"" + num(px(t)) + "\" y=\"" + num(kHeight - kBottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + num(t) +
           "</text>\n";
    }
    const double ys = tick_step(y_max_ - y_min_, 6);
    for (double v = std::ceil(y_min_ / ys) * ys; v <= y_max_ + 1e-9; v += ys) {
      s += "<line x1=\"" + num(px(x_min_)) + "\" y1=\"" + num(py(v)) + "\" x2=\"" +
           num(px(x_max_)) + "\" y2=\"" + num(py(v)) + "\" stroke=\"#e0e0e0\"/>\n";
      s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(v) +
           "</text>\n";
    }
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
         num(kWidth - kLeft - kRight) + "\" height=\"" + num(kHeight - kTop - kBottom) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label +
         "</text>\n";
    s += "<text x=\"16\" y=\"" + num((kTop + kHeight - kBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num((kTop + kHeight - kBottom) / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
      const Series& ser = series[i];
      // Non-finite samples (no active bound) split the line into pieces.
      std::string d;
      bool pen_down = false;
      for (std::size_t k = 0; k < x_.size(); ++k) {
        if (!std::isfinite(ser.y[k])) {
          pen_down = false;
          continue;
        }
        const double y = std::clamp(ser.y[k], y_min_, y_max_);
        d += (pen_down ? " L" : " M") + num(px(x_[k])) + " " + num(py(y));
        pen_down = true;
      }
      if (!d.empty()) {
        s += "<path d=\"" + d.substr(1) + "\" fill=\"none\" stroke=\"" + ser.color +
             "\" stroke-width=\"1.6\"" + (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") +
             "/>\n";
      }
      const double ly = kTop + 16 + 16 * static_cast<double>(i);
      s += "<line x1=\"" + num(kLeft + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kLeft + 34) +
           "\" y2=\"" + num(ly) + "\" stroke=\"" + ser.color + "\" stroke-width=\"1.6\"" +
           (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
      s += "<text x=\"" + num(kLeft + 40) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + ser.label + "</text>\n";
    }
    s += "</svg>\n";
    return s;
  }

 private:
  const std::vector<double>& x_;
  double x_max_;
  double x_min_;
  double y_min_ = 0.0;
  double y_max_ = 1.0;
};

void require_rows(const std::vector<LogRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("plot: log is empty");
}

std::vector<double> column(const std::vector<LogRow>& rows, double LogRow::*field) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const LogRow& r : rows) out.push_back(r.*field);
  return out;
}

}  // namespace

std::string distance_plot_svg(const std::vector<LogRow>& rows, const std::string& title) {
  require_rows(rows);
  const auto t = column(rows, &LogRow::time);
  const auto p = column(rows, &LogRow::position);
  const auto b = column(rows, &LogRow::position_bound);
  const auto r = column(rows, &LogRow::reference_position);
  double lo = std::min(0.0, *std::min_element(p.begin(), p.end()));
  double hi = *std::max_element(p.begin(), p.end());
  for (double v : r) hi = std::max(hi, v);
  hi *= 1.05;
  Chart c(t, lo, hi);
  return c.render(title, "time [s]", "distance [m]",
                  {{p, "#1f4e99", "ego position", false},
                   {b, "#c62828", "position bound", true},
                   {r, "#2e7d32", "reference", true}});
}

std::string speed_plot_svg(const std::vector<LogRow>& rows, const std::string& title) {
  require_rows(rows);
  const auto t = column(rows, &LogRow::time);
  const auto v = column(rows, &LogRow::velocity);
  const double hi = std::max(1.0, *std::max_element(v.begin(), v.end()) * 1.1);
  Chart c(t, 0.0, hi);
  return c.render(title, "time [s]", "speed [m/s]", {{v, "#1f4e99", "ego speed", false}});
}

std::vector<std::filesystem::path> emit_plots(const std::vector<LogRow>& rows,
                                              const std::filesystem::path& dir,
                                              const std::string& title) {
  require_rows(rows);
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::filesystem::path, std::string>> files{
      {dir / "distance_time.svg", distance_plot_svg(rows, title + ": distance over time")},
      {dir / "speed_time.svg", speed_plot_svg(rows, title + ": speed over time")}};
  std::vector<std::filesystem::path> written;
  for (const auto& [path, content] : files) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("plot: cannot write " + path.string());
    out << content;
    written.push_back(path);
  }
  return written;
}

}  // namespace tla
