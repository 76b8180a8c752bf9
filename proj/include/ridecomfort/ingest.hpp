#pragma once

// Device-log and stopwatch-event parsing, clock alignment, and construction
// of labelled datasets.
//
// Accelerometer log CSV:
//   t_ms,ax,ay,az
//   0,0.0,0.1,9.8
//   20,0.0,0.2,9.8
// t_ms is an integer millisecond count from journey start; LF or CRLF.
//
// Event file: one decimal seconds value per line, '#' lines are comments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridecomfort/detail/text.hpp"
#include "ridecomfort/error.hpp"
#include "ridecomfort/signal.hpp"

namespace ridecomfort {

struct RawLog {
  std::string device_id;
  std::vector<Sample> samples;
};

struct EventLog {
  std::vector<double> events;  // seconds, strictly increasing
};

using LabelVector = std::vector<std::uint8_t>;
using FeatureRow = std::array<double, 3>;

struct LabeledDataset {
  std::vector<FeatureRow> features;  // normalized, dimensionless
  LabelVector labels;
  FeatureSet feature_set = FeatureSet::Acceleration;
  NormalizationParams norm;
  double rate_hz = kDefaultRateHz;
  double start_t = 0.0;
  std::string passenger_id;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t positives() const noexcept {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  }
};

inline void check_dataset(const LabeledDataset& d) {
  if (d.features.size() != d.labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ in count");
  }
  for (std::uint8_t l : d.labels) {
    if (l > 1) throw Error(ErrorKind::ParseError, "labels must be 0 or 1");
  }
  for (const FeatureRow& r : d.features) {
    for (double v : r) {
      if (!std::isfinite(v)) throw Error(ErrorKind::ParseError, "non-finite feature value");
    }
  }
  validated(d.norm);
}

struct IngestConfig {
  double rate_hz = kDefaultRateHz;
  double pulse_width_s = 1.0;
  FeatureSet feature_set = FeatureSet::Acceleration;
  double clock_offset_s = 0.0;  // added to every stopwatch instant
  bool mean_subtract = false;
  std::string passenger_id;
};

inline RawLog parse_accel_log(std::string_view text, std::string device_id = {}) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines.front().empty()) {
    throw Error(ErrorKind::FormatError, "missing header, expected 't_ms,ax,ay,az'", 1);
  }
  if (lines.front() != "t_ms,ax,ay,az") {
    throw Error(ErrorKind::FormatError,
                "unknown header '" + std::string(lines.front()) + "', expected 't_ms,ax,ay,az'",
                1);
  }

  RawLog log{std::move(device_id), {}};
  long long prev_ms = -1;
  std::size_t dup_count = 1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i + 1);
    const std::string_view line = detail::trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != 4) {
      throw Error(ErrorKind::ParseError,
                  "expected 4 fields, got " + std::to_string(fields.size()), line_no);
    }
    const auto t_ms = detail::parse_int(fields[0]);
    if (!t_ms || *t_ms < 0) {
      throw Error(ErrorKind::ParseError,
                  "bad t_ms '" + std::string(fields[0]) + "'", line_no, 1);
    }
    std::array<double, 3> acc{};
    for (std::size_t c = 0; c < 3; ++c) {
      const auto v = detail::parse_double(fields[c + 1]);
      if (!v) {
        throw Error(ErrorKind::ParseError,
                    "non-numeric field '" + std::string(fields[c + 1]) + "'", line_no,
                    static_cast<long>(c + 2));
      }
      acc[c] = *v;
    }
    if (*t_ms < prev_ms) {
      throw Error(ErrorKind::NonMonotonicTime, "timestamp goes backwards", line_no, 1);
    }
    if (*t_ms == prev_ms) {
      // running mean over the run of duplicates
      Sample& s = log.samples.back();
      ++dup_count;
      const double w = 1.0 / static_cast<double>(dup_count);
      s.ax += (acc[0] - s.ax) * w;
      s.ay += (acc[1] - s.ay) * w;
      s.az += (acc[2] - s.az) * w;
      continue;
    }
    dup_count = 1;
    prev_ms = *t_ms;
    log.samples.push_back({static_cast<double>(*t_ms) / 1000.0, acc[0], acc[1], acc[2]});
  }
  if (log.samples.empty()) throw Error(ErrorKind::EmptySignal, "log has no data rows");
  return log;
}

inline std::string format_accel_log(std::span<const Sample> samples) {
  std::string out = "t_ms,ax,ay,az\n";
  for (const Sample& s : samples) {
    out += std::to_string(std::llround(s.t * 1000.0));
    out += ',';
    out += detail::format_double(s.ax);
    out += ',';
    out += detail::format_double(s.ay);
    out += ',';
    out += detail::format_double(s.az);
    out += '\n';
  }
  return out;
}

inline std::vector<Sample> to_samples(const UniformSeries& series) {
  std::vector<Sample> out(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    out[k] = {series.time(k), series.ax()[k], series.ay()[k], series.az()[k]};
  }
  return out;
}

inline EventLog parse_events(std::string_view text) {
  EventLog log;
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i + 1);
    const std::string_view line = detail::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto v = detail::parse_double(line);
    if (!v) {
      throw Error(ErrorKind::ParseError, "not a number: '" + std::string(line) + "'", line_no);
    }
    if (*v < 0.0) {
      throw Error(ErrorKind::ParseError, "negative event time", line_no);
    }
    log.events.push_back(*v);
  }
  std::sort(log.events.begin(), log.events.end());
  log.events.erase(std::unique(log.events.begin(), log.events.end()), log.events.end());
  return log;
}

inline std::string format_events(const EventLog& log) {
  std::string out;
  for (double e : log.events) {
    out += detail::format_double(e);
    out += '\n';
  }
  return out;
}

/// label[k] = 1 iff series.time(k) lies in [e, e + pulse_width) for some event e.
inline LabelVector build_labels(const EventLog& events, const UniformSeries& series,
                                double pulse_width) {
  if (!(pulse_width > 0.0) || !std::isfinite(pulse_width)) {
    throw Error(ErrorKind::InvalidWindow, "pulse width must be positive");
  }
  const std::size_t n = series.size();
  LabelVector labels(n, 0);
  for (double e : events.events) {
    const double end = e + pulse_width;
    // first grid index with time >= e, found arithmetically then fixed up
    // against the exact timestamps the membership test uses
    const double guess = std::ceil((e - series.start_t()) * series.rate_hz());
    std::size_t k = guess <= 0.0 ? 0
                    : guess >= static_cast<double>(n) ? n
                                                      : static_cast<std::size_t>(guess);
    while (k > 0 && series.time(k - 1) >= e) --k;
    while (k < n && series.time(k) < e) ++k;
    for (; k < n && series.time(k) < end; ++k) labels[k] = 1;
  }
  return labels;
}

/// Resampled, optionally mean-subtracted and differentiated series, ready for
/// normalization. This is the part of the pipeline shared by training and
/// prediction.
inline UniformSeries prepare_series(std::span<const Sample> samples, double rate_hz,
                                    FeatureSet feature_set, bool mean_subtract) {
  UniformSeries series = resample(samples, rate_hz);
  if (mean_subtract) series = subtract_mean(series);
  if (feature_set == FeatureSet::Jerk) series = jerk(series);
  return series;
}

inline std::vector<FeatureRow> feature_rows(const UniformSeries& normalized) {
  std::vector<FeatureRow> rows(normalized.size());
  for (std::size_t k = 0; k < normalized.size(); ++k) rows[k] = normalized.row(k);
  return rows;
}

inline EventLog align_events(const EventLog& events, double clock_offset_s) {
  EventLog out;
  out.events.reserve(events.events.size());
  for (double e : events.events) out.events.push_back(e + clock_offset_s);
  return out;
}

inline LabeledDataset build_dataset(const RawLog& log, const EventLog& events,
                                    const IngestConfig& config) {
  if (log.samples.size() < 2) throw Error(ErrorKind::EmptySignal, "log needs at least 2 samples");
  const EventLog aligned = align_events(events, config.clock_offset_s);
  const double first = log.samples.front().t;
  const double last = log.samples.back().t;
  for (double e : aligned.events) {
    if (e < first || e > last) {
      throw Error(ErrorKind::EventOutOfRange,
                  "event at " + detail::format_double(e) + " s is outside the log span [" +
                      detail::format_double(first) + ", " + detail::format_double(last) + "]");
    }
  }

  const UniformSeries series =
      prepare_series(log.samples, config.rate_hz, config.feature_set, config.mean_subtract);
  const NormalizationParams params = fit_normalization(series);
  const UniformSeries normalized = normalize(series, params);

  LabeledDataset d;
  d.features = feature_rows(normalized);
  d.labels = build_labels(aligned, normalized, config.pulse_width_s);
  d.feature_set = config.feature_set;
  d.norm = params;
  d.rate_hz = config.rate_hz;
  d.start_t = normalized.start_t();
  d.passenger_id = config.passenger_id;
  return d;
}

}  // namespace ridecomfort
