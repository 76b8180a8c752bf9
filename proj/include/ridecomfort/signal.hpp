#pragma once

// Uniform three-axis time series and the numeric transforms applied to it.
//
// Axis convention (vehicle frame): X lateral, Y along the direction of
// motion, Z vertical. Acceleration in m/s^2, jerk in m/s^3.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ridecomfort/error.hpp"

namespace ridecomfort {

/// Sample rate used throughout unless configured otherwise (100 s ~ 5000 samples).
inline constexpr double kDefaultRateHz = 50.0;

enum class Axis { X = 0, Y = 1, Z = 2 };

enum class UnitTag { Acceleration, Jerk, Normalized };

constexpr std::string_view to_string(UnitTag u) {
  switch (u) {
    case UnitTag::Acceleration: return "acceleration";
    case UnitTag::Jerk: return "jerk";
    case UnitTag::Normalized: return "normalized";
  }
  return "unknown";
}

inline UnitTag unit_tag_from_string(std::string_view s) {
  if (s == "acceleration") return UnitTag::Acceleration;
  if (s == "jerk") return UnitTag::Jerk;
  if (s == "normalized") return UnitTag::Normalized;
  throw Error(ErrorKind::ParseError, "unknown unit tag '" + std::string(s) + "'");
}

/// Which physical quantity feeds the classifier.
enum class FeatureSet { Acceleration, Jerk };

constexpr std::string_view to_string(FeatureSet f) {
  return f == FeatureSet::Acceleration ? "acceleration" : "jerk";
}

inline FeatureSet feature_set_from_string(std::string_view s) {
  if (s == "acceleration") return FeatureSet::Acceleration;
  if (s == "jerk") return FeatureSet::Jerk;
  throw Error(ErrorKind::ParseError, "unknown feature set '" + std::string(s) + "'");
}

constexpr UnitTag unit_of(FeatureSet f) {
  return f == FeatureSet::Acceleration ? UnitTag::Acceleration : UnitTag::Jerk;
}

struct Sample {
  double t = 0.0;  // seconds from journey start
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;
};

using Channel = std::vector<double>;

class UniformSeries {
 public:
  UniformSeries(double start_t, double rate_hz, Channel ax, Channel ay, Channel az,
                UnitTag unit)
      : start_t_(start_t),
        rate_hz_(rate_hz),
        channels_{std::move(ax), std::move(ay), std::move(az)},
        unit_(unit) {
    if (!(rate_hz_ > 0.0) || !std::isfinite(rate_hz_)) {
      throw Error(ErrorKind::InvalidWindow, "sample rate must be positive and finite");
    }
    if (channels_[0].size() != channels_[1].size() ||
        channels_[0].size() != channels_[2].size()) {
      throw Error(ErrorKind::LengthMismatch, "channel lengths differ");
    }
    if (channels_[0].size() < 2) {
      throw Error(ErrorKind::EmptySignal, "a series needs at least 2 samples");
    }
  }

  double start_t() const noexcept { return start_t_; }
  double rate_hz() const noexcept { return rate_hz_; }
  UnitTag unit() const noexcept { return unit_; }
  std::size_t size() const noexcept { return channels_[0].size(); }

  /// Implicit timestamp of sample k.
  double time(std::size_t k) const noexcept {
    return start_t_ + static_cast<double>(k) / rate_hz_;
  }
  double end_t() const noexcept { return time(size() - 1); }

  const Channel& channel(Axis a) const noexcept {
    return channels_[static_cast<std::size_t>(a)];
  }
  const Channel& channel(std::size_t i) const noexcept { return channels_[i]; }
  const Channel& ax() const noexcept { return channels_[0]; }
  const Channel& ay() const noexcept { return channels_[1]; }
  const Channel& az() const noexcept { return channels_[2]; }

  std::array<double, 3> row(std::size_t k) const noexcept {
    return {channels_[0][k], channels_[1][k], channels_[2][k]};
  }

  friend bool operator==(const UniformSeries&, const UniformSeries&) = default;

 private:
  double start_t_;
  double rate_hz_;
  std::array<Channel, 3> channels_;
  UnitTag unit_;
};

/// Per-axis scale factors; `source` records which unit the scales apply to.
struct NormalizationParams {
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;
  UnitTag source = UnitTag::Acceleration;

  double scale(std::size_t axis) const noexcept {
    return axis == 0 ? sx : (axis == 1 ? sy : sz);
  }
  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

/// Number of points on the inclusive grid t0, t0 + 1/rate, ... that fit in `span`.
/// A relative slack of a few ulps absorbs spans such as 399.98 s * 50 Hz.
inline std::size_t grid_points(double span, double rate_hz) {
  const double steps = span * rate_hz;
  return static_cast<std::size_t>(std::floor(steps * (1.0 + 1e-12) + 1e-9)) + 1;
}

/// Linear interpolation of irregular samples onto a uniform grid spanning
/// [first t, last t]. Never extrapolates.
inline UniformSeries resample(std::span<const Sample> samples, double rate_hz) {
  if (samples.size() < 2) {
    throw Error(ErrorKind::EmptySignal, "resample needs at least 2 samples");
  }
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw Error(ErrorKind::InvalidWindow, "sample rate must be positive and finite");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (!std::isfinite(s.t) || s.t < 0.0 || !std::isfinite(s.ax) || !std::isfinite(s.ay) ||
        !std::isfinite(s.az)) {
      throw Error(ErrorKind::ParseError, "non-finite or negative sample at index " +
                                             std::to_string(i));
    }
    if (i > 0 && !(s.t > samples[i - 1].t)) {
      throw Error(ErrorKind::NonMonotonicTime,
                  "timestamps must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }

  const double t0 = samples.front().t;
  const double t1 = samples.back().t;
  const std::size_t n = grid_points(t1 - t0, rate_hz);

  Channel ax(n), ay(n), az(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = std::min(t0 + static_cast<double>(k) / rate_hz, t1);
    while (seg + 2 < samples.size() && samples[seg + 1].t < t) ++seg;
    const Sample& a = samples[seg];
    const Sample& b = samples[seg + 1];
    if (t == a.t) {
      ax[k] = a.ax, ay[k] = a.ay, az[k] = a.az;
    } else if (t == b.t) {
      ax[k] = b.ax, ay[k] = b.ay, az[k] = b.az;
    } else {
      const double w = (t - a.t) / (b.t - a.t);
      ax[k] = a.ax + w * (b.ax - a.ax);
      ay[k] = a.ay + w * (b.ay - a.ay);
      az[k] = a.az + w * (b.az - a.az);
    }
  }
  return UniformSeries(t0, rate_hz, std::move(ax), std::move(ay), std::move(az),
                       UnitTag::Acceleration);
}

/// Time derivative of an acceleration series. Central differences inside,
/// first-order one-sided differences at both ends so the output keeps the
/// input length.
inline UniformSeries jerk(const UniformSeries& series) {
  if (series.unit() != UnitTag::Acceleration) {
    throw Error(ErrorKind::UnitMismatch, "jerk expects an acceleration series, got " +
                                             std::string(to_string(series.unit())));
  }
  const std::size_t n = series.size();
  if (n < 3) throw Error(ErrorKind::SignalTooShort, "jerk needs at least 3 samples");

  const double rate = series.rate_hz();
  std::array<Channel, 3> out;
  for (std::size_t c = 0; c < 3; ++c) {
    const Channel& v = series.channel(c);
    Channel& d = out[c];
    d.resize(n);
    d[0] = (v[1] - v[0]) * rate;
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k - 1]) * rate / 2.0;
    d[n - 1] = (v[n - 1] - v[n - 2]) * rate;
  }
  return UniformSeries(series.start_t(), rate, std::move(out[0]), std::move(out[1]),
                       std::move(out[2]), UnitTag::Jerk);
}

/// Max-abs scale per axis; an identically zero channel gets scale 1.
inline NormalizationParams fit_normalization(const UniformSeries& series) {
  std::array<double, 3> s{};
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0.0;
    for (double v : series.channel(c)) m = std::max(m, std::abs(v));
    s[c] = m > 0.0 ? m : 1.0;
  }
  return {s[0], s[1], s[2], series.unit()};
}

inline NormalizationParams validated(const NormalizationParams& p) {
  for (std::size_t c = 0; c < 3; ++c) {
    const double s = p.scale(c);
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::InvalidNormalization, "normalization scales must be positive");
    }
  }
  return p;
}

inline UniformSeries normalize(const UniformSeries& series, const NormalizationParams& params) {
  validated(params);
  if (series.unit() == UnitTag::Normalized || series.unit() != params.source) {
    throw Error(ErrorKind::UnitMismatch,
                "cannot normalize a " + std::string(to_string(series.unit())) +
                    " series with " + std::string(to_string(params.source)) + " scales");
  }
  std::array<Channel, 3> out;
  for (std::size_t c = 0; c < 3; ++c) {
    const double s = params.scale(c);
    out[c].reserve(series.size());
    for (double v : series.channel(c)) out[c].push_back(v / s);
  }
  return UniformSeries(series.start_t(), series.rate_hz(), std::move(out[0]), std::move(out[1]),
                       std::move(out[2]), UnitTag::Normalized);
}

/// Per-axis mean removal (optional gravity handling; off by default in configs).
inline UniformSeries subtract_mean(const UniformSeries& series) {
  std::array<Channel, 3> out;
  for (std::size_t c = 0; c < 3; ++c) {
    const Channel& v = series.channel(c);
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    out[c].reserve(v.size());
    for (double x : v) out[c].push_back(x - mean);
  }
  return UniformSeries(series.start_t(), series.rate_hz(), std::move(out[0]), std::move(out[1]),
                       std::move(out[2]), series.unit());
}

/// Centered moving average; near the edges the window is truncated to the
/// samples that exist. Each mean is taken relative to the window's first value
/// and clamped to the window's range, so constants come back bit-exact.
inline std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
  if (window == 0 || window % 2 == 0) {
    throw Error(ErrorKind::InvalidWindow, "window must be odd and positive, got " +
                                              std::to_string(window));
  }
  if (window > values.size()) {
    throw Error(ErrorKind::InvalidWindow, "window longer than the signal");
  }
  const std::size_t n = values.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k >= half ? k - half : 0;
    const std::size_t hi = std::min(n - 1, k + half);
    const double base = values[lo];
    double sum = 0.0;
    double lo_v = base;
    double hi_v = base;
    for (std::size_t i = lo; i <= hi; ++i) {
      sum += values[i] - base;
      lo_v = std::min(lo_v, values[i]);
      hi_v = std::max(hi_v, values[i]);
    }
    out[k] = std::clamp(base + sum / static_cast<double>(hi - lo + 1), lo_v, hi_v);
  }
  return out;
}

inline UniformSeries smooth(const UniformSeries& series, std::size_t window) {
  std::array<Channel, 3> out;
  for (std::size_t c = 0; c < 3; ++c) out[c] = moving_average(series.channel(c), window);
  return UniformSeries(series.start_t(), series.rate_hz(), std::move(out[0]), std::move(out[1]),
                       std::move(out[2]), series.unit());
}

}  // namespace ridecomfort
