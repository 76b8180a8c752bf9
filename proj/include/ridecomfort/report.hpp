#pragma once

// Confusion-matrix metrics and dependency-free SVG figures: the trip overview
// (acceleration, jerk, discomfort pulses), the prediction overlay and the
// discomfort-index bar chart. All renderers are pure: identical input gives
// identical bytes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridecomfort/detail/text.hpp"
#include "ridecomfort/error.hpp"
#include "ridecomfort/index.hpp"
#include "ridecomfort/ingest.hpp"
#include "ridecomfort/signal.hpp"

namespace ridecomfort {

struct ConfusionMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  std::optional<double> precision;  // absent when nothing was predicted positive
  std::optional<double> recall;     // absent when nothing was actually positive

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

inline ConfusionMetrics evaluate(std::span<const std::uint8_t> predicted,
                                 std::span<const std::uint8_t> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorKind::LengthMismatch, "predicted and actual labels differ in length");
  }
  if (predicted.empty()) throw Error(ErrorKind::LengthMismatch, "no labels to evaluate");
  ConfusionMetrics m;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool a = actual[i] != 0;
    if (p && a) ++m.tp;
    else if (p) ++m.fp;
    else if (a) ++m.fn;
    else ++m.tn;
  }
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  return m;
}

struct FigureOptions {
  double width = 960.0;
  double panel_height = 110.0;
  std::size_t max_points = 2000;    // per trace, after min/max decimation
  std::size_t smoothing_window = 51;  // probability overlay, ~1 s at 50 Hz
};

namespace svg {

inline std::string num(double v) { return detail::format_fixed(v, 2); }

inline std::string escape(std::string_view s) {
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

inline std::string header(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n"
         "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"white\"/>\n";
}

inline std::string text(double x, double y, std::string_view s, std::string_view anchor = "start") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) +
         "\">" + escape(s) + "</text>\n";
}

/// Indices to draw: all of them when short, otherwise the first, min, max and
/// last of each bucket in time order.
inline std::vector<std::size_t> decimate(std::span<const double> v, std::size_t max_points) {
  std::vector<std::size_t> idx;
  const std::size_t n = v.size();
  if (n <= max_points || max_points < 8) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  const std::size_t buckets = max_points / 4;
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t lo = b * n / buckets;
    const std::size_t hi = (b + 1) * n / buckets;
    if (lo >= hi) continue;
    std::size_t mn = lo, mx = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (v[i] < v[mn]) mn = i;
      if (v[i] > v[mx]) mx = i;
    }
    std::size_t pick[4] = {lo, std::min(mn, mx), std::max(mn, mx), hi - 1};
    for (std::size_t p : pick) {
      if (idx.empty() || idx.back() < p) idx.push_back(p);
    }
  }
  return idx;
}

struct Frame {
  double x0, y0, w, h;  // plot area
  double t0, t1;        // time range
  double lo, hi;        // value range

  double px(double t) const { return x0 + (t1 > t0 ? (t - t0) / (t1 - t0) : 0.0) * w; }
  double py(double v) const { return y0 + h - (hi > lo ? (v - lo) / (hi - lo) : 0.5) * h; }
};

inline std::pair<double, double> value_range(std::span<const double> v) {
  double lo = 0.0, hi = 0.0;
  if (!v.empty()) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    lo = *mn;
    hi = *mx;
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  return {lo, hi};
}

inline std::string polyline(const Frame& f, double start_t, double rate, std::span<const double> v,
                            std::size_t max_points, std::string_view color, bool step = false) {
  std::string pts;
  const auto idx = decimate(v, max_points);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const std::size_t i = idx[j];
    const double t = start_t + static_cast<double>(i) / rate;
    if (step && j > 0 && v[idx[j - 1]] != v[i]) {
      pts += num(f.px(t)) + "," + num(f.py(v[idx[j - 1]])) + " ";
    }
    pts += num(f.px(t)) + "," + num(f.py(v[i])) + " ";
  }
  if (!pts.empty()) pts.pop_back();
  return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
}

inline std::string frame_box(const Frame& f, std::string_view title) {
  std::string s = "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) +
                  "\" height=\"" + num(f.h) + "\" fill=\"none\" stroke=\"#888\"/>\n";
  s += text(f.x0 + 4, f.y0 + 12, title);
  s += text(f.x0 - 4, f.y0 + 10, detail::format_fixed(f.hi, 2), "end");
  s += text(f.x0 - 4, f.y0 + f.h, detail::format_fixed(f.lo, 2), "end");
  if (f.lo < 0.0 && f.hi > 0.0) {
    s += "<line x1=\"" + num(f.x0) + "\" y1=\"" + num(f.py(0.0)) + "\" x2=\"" + num(f.x0 + f.w) +
         "\" y2=\"" + num(f.py(0.0)) + "\" stroke=\"#ddd\"/>\n";
  }
  return s;
}

inline std::string time_axis(const Frame& f, double y) {
  std::string s;
  for (int i = 0; i <= 5; ++i) {
    const double t = f.t0 + (f.t1 - f.t0) * i / 5.0;
    s += text(f.px(t), y, detail::format_fixed(t, 1), "middle");
  }
  s += text(f.x0 + f.w / 2, y + 14, "time (s)", "middle");
  return s;
}

struct Trace {
  std::span<const double> values;
  std::string color;
  bool step = false;
};

inline std::string panel(const Frame& f, std::string_view title, std::span<const Trace> traces,
                         double start_t, double rate, std::size_t max_points) {
  std::string s = "<g class=\"panel\">\n" + frame_box(f, title);
  for (const Trace& tr : traces) {
    s += polyline(f, start_t, rate, tr.values, max_points, tr.color, tr.step);
  }
  return s + "</g>\n";
}

inline std::vector<double> as_doubles(std::span<const std::uint8_t> labels) {
  return {labels.begin(), labels.end()};
}

}  // namespace svg

/// Seven stacked panels on a shared time axis: ax, ay, az, jerk x/y/z and
/// the discomfort pulse train.
inline std::string render_trip_figure(const UniformSeries& accel, const UniformSeries& jerk_series,
                                      std::span<const std::uint8_t> labels,
                                      const FigureOptions& opt = {}) {
  if (accel.size() != jerk_series.size() || accel.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "trip figure inputs are not aligned");
  }
  const double left = 70.0, top = 30.0, gap = 12.0;
  const double plot_w = opt.width - left - 20.0;
  const double height = top + 7 * (opt.panel_height + gap) + 40.0;
  const double t0 = accel.start_t(), t1 = accel.end_t();

  std::string s = svg::header(opt.width, height);
  s += svg::text(opt.width / 2, 18, "Acceleration, jerk and discomfort instances", "middle");

  const char* titles[] = {"ax (m/s^2)", "ay (m/s^2)", "az (m/s^2)", "jx (m/s^3)",
                          "jy (m/s^3)", "jz (m/s^3)", "discomfort"};
  const auto pulses = svg::as_doubles(labels);
  for (std::size_t p = 0; p < 7; ++p) {
    std::span<const double> v = p < 3 ? std::span<const double>(accel.channel(p))
                                : p < 6 ? std::span<const double>(jerk_series.channel(p - 3))
                                        : std::span<const double>(pulses);
    auto [lo, hi] = p == 6 ? std::pair{0.0, 1.0} : svg::value_range(v);
    const svg::Frame f{left, top + p * (opt.panel_height + gap), plot_w, opt.panel_height,
                       t0, t1, lo, hi};
    const svg::Trace tr[] = {{v, p == 6 ? "#c0392b" : "#1f4e79", p == 6}};
    s += svg::panel(f, titles[p], tr, t0, accel.rate_hz(), opt.max_points);
  }
  const double axis_y = top + 7 * (opt.panel_height + gap) + 4.0;
  s += svg::time_axis({left, 0, plot_w, 0, t0, t1, 0, 1}, axis_y);
  return s + "</svg>\n";
}

/// Smoothed probability with predicted and (when given) actual pulse trains.
inline std::string render_prediction_figure(std::span<const double> probability,
                                            std::span<const std::uint8_t> predicted,
                                            std::span<const std::uint8_t> actual,
                                            double start_t, double rate_hz,
                                            const FigureOptions& opt = {}) {
  if (probability.size() != predicted.size() ||
      (!actual.empty() && actual.size() != probability.size())) {
    throw Error(ErrorKind::LengthMismatch, "prediction figure inputs are not aligned");
  }
  if (probability.empty()) throw Error(ErrorKind::LengthMismatch, "empty prediction");
  std::size_t window = std::min(opt.smoothing_window, probability.size());
  if (window % 2 == 0) --window;
  const auto smoothed = moving_average(probability, window);

  // pulse trains drawn slightly inside the unit band so they stay visible
  std::vector<double> pred(predicted.size()), act(actual.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) pred[i] = predicted[i] ? 0.95 : 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) act[i] = actual[i] ? 1.0 : 0.02;

  const double left = 70.0, top = 30.0, h = 3 * opt.panel_height;
  const double plot_w = opt.width - left - 20.0;
  const double t0 = start_t, t1 = start_t + static_cast<double>(probability.size() - 1) / rate_hz;
  std::string s = svg::header(opt.width, top + h + 60.0);
  s += svg::text(opt.width / 2, 18, "Predicted and actual discomfort", "middle");
  const svg::Frame f{left, top, plot_w, h, t0, t1, 0.0, 1.0};
  std::vector<svg::Trace> traces;
  if (!actual.empty()) traces.push_back({act, "#c0392b", true});
  traces.push_back({pred, "#27ae60", true});
  traces.push_back({smoothed, "#1f4e79", false});
  s += svg::panel(f, "probability (smoothed, window " + std::to_string(window) + ")", traces,
                  t0, rate_hz, opt.max_points);
  s += svg::time_axis(f, top + h + 16.0);
  double lx = left;
  const double ly = top + h + 46.0;
  for (const auto& [label, color] : {std::pair{"probability", "#1f4e79"},
                                     std::pair{"predicted", "#27ae60"},
                                     std::pair{"actual", "#c0392b"}}) {
    if (std::string_view(label) == "actual" && actual.empty()) continue;
    s += "<rect x=\"" + svg::num(lx) + "\" y=\"" + svg::num(ly - 9) +
         "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
    s += svg::text(lx + 14, ly, label);
    lx += 110.0;
  }
  return s + "</svg>\n";
}

/// Bars in the given (ranked) order with D printed to three decimals.
inline std::string render_index_figure(std::span<const LineIndexReport> reports,
                                       const FigureOptions& opt = {}) {
  if (reports.empty()) throw Error(ErrorKind::EmptyReport, "no index reports to draw");
  const double left = 60.0, top = 40.0, plot_h = 260.0;
  const double slot = 90.0;
  const double width = std::max(opt.width / 2, left + slot * reports.size() + 20.0);
  std::string s = svg::header(width, top + plot_h + 50.0);
  s += svg::text(width / 2, 20, "Discomfort index by line", "middle");
  s += "<line x1=\"" + svg::num(left) + "\" y1=\"" + svg::num(top + plot_h) + "\" x2=\"" +
       svg::num(width - 10) + "\" y2=\"" + svg::num(top + plot_h) + "\" stroke=\"#888\"/>\n";
  s += svg::text(left - 6, top + 4, "1.0", "end");
  s += svg::text(left - 6, top + plot_h, "0.0", "end");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const LineIndexReport& r = reports[i];
    const double x = left + 15.0 + slot * i;
    const double bh = r.D * plot_h;
    s += "<g class=\"bar\">\n<rect x=\"" + svg::num(x) + "\" y=\"" + svg::num(top + plot_h - bh) +
         "\" width=\"" + svg::num(slot - 30.0) + "\" height=\"" + svg::num(bh) +
         "\" fill=\"#1f4e79\"/>\n";
    s += svg::text(x + (slot - 30.0) / 2, top + plot_h - bh - 5, detail::format_fixed(r.D, 3),
                   "middle");
    s += svg::text(x + (slot - 30.0) / 2, top + plot_h + 16, r.line_id, "middle");
    s += "</g>\n";
  }
  return s + "</svg>\n";
}

/// CSV with header t_s,probability,predicted,actual. `actual` may be empty, in
/// which case the column is left blank.
inline std::string format_prediction_csv(std::span<const double> probability,
                                         std::span<const std::uint8_t> predicted,
                                         std::span<const std::uint8_t> actual, double start_t,
                                         double rate_hz) {
  if (probability.size() != predicted.size() ||
      (!actual.empty() && actual.size() != probability.size())) {
    throw Error(ErrorKind::LengthMismatch, "prediction columns are not aligned");
  }
  std::string out = "t_s,probability,predicted,actual\n";
  for (std::size_t k = 0; k < probability.size(); ++k) {
    out += detail::format_double(start_t + static_cast<double>(k) / rate_hz);
    out += ',';
    out += detail::format_double(probability[k]);
    out += predicted[k] ? ",1," : ",0,";
    if (!actual.empty()) out += actual[k] ? '1' : '0';
    out += '\n';
  }
  return out;
}

struct PredictionTable {
  std::vector<double> t;
  std::vector<double> probability;
  LabelVector predicted;
  LabelVector actual;  // empty when the column was blank
};

inline PredictionTable parse_prediction_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines.front() != "t_s,probability,predicted,actual") {
    throw Error(ErrorKind::FormatError, "expected header 't_s,probability,predicted,actual'", 1);
  }
  PredictionTable tab;
  bool has_actual = true;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i + 1);
    if (detail::trim(lines[i]).empty()) continue;
    const auto f = detail::split(lines[i], ',');
    if (f.size() != 4) throw Error(ErrorKind::ParseError, "expected 4 fields", line_no);
    const auto t = detail::parse_double(f[0]);
    const auto p = detail::parse_double(f[1]);
    const auto pred = detail::parse_int(f[2]);
    if (!t) throw Error(ErrorKind::ParseError, "bad t_s", line_no, 1);
    if (!p || *p < 0.0 || *p > 1.0) throw Error(ErrorKind::ParseError, "bad probability", line_no, 2);
    if (!pred || (*pred != 0 && *pred != 1)) throw Error(ErrorKind::ParseError, "bad predicted", line_no, 3);
    const bool blank = detail::trim(f[3]).empty();
    if (tab.t.empty()) has_actual = !blank;
    if (blank == has_actual) throw Error(ErrorKind::ParseError, "actual column partially blank", line_no, 4);
    if (has_actual) {
      const auto a = detail::parse_int(f[3]);
      if (!a || (*a != 0 && *a != 1)) throw Error(ErrorKind::ParseError, "bad actual", line_no, 4);
      tab.actual.push_back(static_cast<std::uint8_t>(*a));
    }
    tab.t.push_back(*t);
    tab.probability.push_back(*p);
    tab.predicted.push_back(static_cast<std::uint8_t>(*pred));
  }
  return tab;
}

}  // namespace ridecomfort
