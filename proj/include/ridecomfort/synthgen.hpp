#pragma once

// Deterministic synthetic trips with known ground truth.
//
// Randomness is counter-based: draw(seed, stream, k) is a SplitMix64 hash of
// the triple, so sample k of any stream can be produced independently and the
// output is the same on every platform with IEEE doubles. Streams: 1 lateral
// noise, 2 vertical noise, 3 Bernoulli labels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ridecomfort/error.hpp"
#include "ridecomfort/ingest.hpp"
#include "ridecomfort/logit.hpp"
#include "ridecomfort/signal.hpp"

namespace ridecomfort {

namespace rng {

inline constexpr std::uint64_t kLateralStream = 1;
inline constexpr std::uint64_t kVerticalStream = 2;
inline constexpr std::uint64_t kLabelStream = 3;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(stream * 0xD1B54A32D192ED03ULL));
  return splitmix64(key ^ splitmix64(counter));
}

/// Uniform on the open interval (0, 1).
constexpr double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return (static_cast<double>(draw(seed, stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on counters 2k and 2k+1.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t k) {
  const double u1 = uniform(seed, stream, 2 * k);
  const double u2 = uniform(seed, stream, 2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

enum class Phase { Accelerate, Cruise, Brake, Dwell };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Accelerate: return "accelerate";
    case Phase::Cruise: return "cruise";
    case Phase::Brake: return "brake";
    case Phase::Dwell: return "dwell";
  }
  return "unknown";
}

inline Phase phase_from_string(std::string_view s) {
  if (s == "accelerate") return Phase::Accelerate;
  if (s == "cruise") return Phase::Cruise;
  if (s == "brake") return Phase::Brake;
  if (s == "dwell") return Phase::Dwell;
  throw Error(ErrorKind::InvalidProfile, "unknown phase '" + std::string(s) + "'");
}

struct Segment {
  Phase phase = Phase::Dwell;
  double duration_s = 0.0;
  double peak_ay_ms2 = 0.0;  // magnitude; the phase decides the sign

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct TripProfile {
  std::vector<Segment> segments;
  double lateral_sigma = 0.0;
  double vertical_sigma = 0.0;
  double jerk_limit_ms3 = 1.0;
  std::uint64_t seed = 0;

  double duration() const {
    double d = 0.0;
    for (const Segment& s : segments) d += s.duration_s;
    return d;
  }
  friend bool operator==(const TripProfile&, const TripProfile&) = default;
};

inline void check_profile(const TripProfile& p) {
  if (p.segments.empty()) throw Error(ErrorKind::EmptyProfile, "profile has no segments");
  for (const Segment& s : p.segments) {
    if (!(s.duration_s > 0.0) || !std::isfinite(s.duration_s)) {
      throw Error(ErrorKind::InvalidProfile, "segment durations must be positive");
    }
    if (!std::isfinite(s.peak_ay_ms2)) {
      throw Error(ErrorKind::InvalidProfile, "segment peak must be finite");
    }
  }
  if (!(p.lateral_sigma >= 0.0) || !(p.vertical_sigma >= 0.0) ||
      !std::isfinite(p.lateral_sigma) || !std::isfinite(p.vertical_sigma)) {
    throw Error(ErrorKind::InvalidProfile, "noise sigmas must be non-negative");
  }
  if (!(p.jerk_limit_ms3 > 0.0) || !std::isfinite(p.jerk_limit_ms3)) {
    throw Error(ErrorKind::InvalidProfile, "jerk limit must be positive");
  }
}

/// Longitudinal acceleration at local time u within a segment: a trapezoid
/// rising and falling with slope jerk_limit, flat at the peak. Segments too
/// short to reach the peak become triangles.
inline double segment_ay(const Segment& s, double u, double jerk_limit) {
  if (s.phase == Phase::Cruise || s.phase == Phase::Dwell) return 0.0;
  const double sign = s.phase == Phase::Accelerate ? 1.0 : -1.0;
  const double peak = std::min(std::abs(s.peak_ay_ms2), jerk_limit * s.duration_s / 2.0);
  const double v = std::min({jerk_limit * u, peak, jerk_limit * (s.duration_s - u)});
  return sign * std::max(v, 0.0);
}

/// round(duration * rate) samples at t = k / rate, starting at 0.
inline UniformSeries generate_trip(const TripProfile& profile, double rate_hz) {
  check_profile(profile);
  if (!(rate_hz > 0.0)) throw Error(ErrorKind::InvalidWindow, "rate must be positive");
  const auto n = static_cast<std::size_t>(
      std::max<long long>(2, std::llround(profile.duration() * rate_hz)));

  Channel ax(n), ay(n), az(n);
  std::size_t seg = 0;
  double seg_start = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    while (seg + 1 < profile.segments.size() &&
           t >= seg_start + profile.segments[seg].duration_s) {
      seg_start += profile.segments[seg].duration_s;
      ++seg;
    }
    const Segment& s = profile.segments[seg];
    const double u = std::min(t - seg_start, s.duration_s);
    ay[k] = segment_ay(s, u, profile.jerk_limit_ms3);
    ax[k] = profile.lateral_sigma == 0.0
                ? 0.0
                : profile.lateral_sigma * rng::normal(profile.seed, rng::kLateralStream, k);
    az[k] = profile.vertical_sigma == 0.0
                ? 0.0
                : profile.vertical_sigma * rng::normal(profile.seed, rng::kVerticalStream, k);
  }
  return UniformSeries(0.0, rate_hz, std::move(ax), std::move(ay), std::move(az),
                       UnitTag::Acceleration);
}

enum class LabelRule { Bernoulli, Threshold };

constexpr std::string_view to_string(LabelRule r) {
  return r == LabelRule::Bernoulli ? "bernoulli" : "threshold";
}

inline LabelRule label_rule_from_string(std::string_view s) {
  if (s == "bernoulli") return LabelRule::Bernoulli;
  if (s == "threshold") return LabelRule::Threshold;
  throw Error(ErrorKind::ParseError, "unknown label rule '" + std::string(s) + "'");
}

struct GroundTruth {
  LineModel model;
  LabelVector labels;
  std::vector<double> probability;
  LabelRule rule = LabelRule::Bernoulli;
};

/// Labels a series with a known model: Bernoulli(P) draws or P > threshold.
inline GroundTruth label_with_truth(const UniformSeries& series, const LineModel& truth,
                                    LabelRule rule, std::uint64_t seed) {
  Prediction p = predict(truth, series);
  GroundTruth g{truth, {}, std::move(p.probability), rule};
  if (rule == LabelRule::Threshold) {
    g.labels = std::move(p.labels);
    return g;
  }
  g.labels.resize(g.probability.size());
  for (std::size_t k = 0; k < g.probability.size(); ++k) {
    g.labels[k] = rng::uniform(seed, rng::kLabelStream, k) < g.probability[k] ? 1 : 0;
  }
  return g;
}

}  // namespace ridecomfort
