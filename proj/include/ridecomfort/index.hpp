#pragma once

// Per-line discomfort index: D = sigmoid(Z), Z = A . (b1, b2, b3) + b4, where A
// holds the mean normalized feature values of the line's data.

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ridecomfort/error.hpp"
#include "ridecomfort/ingest.hpp"
#include "ridecomfort/logit.hpp"
#include "ridecomfort/signal.hpp"

namespace ridecomfort {

/// Absolute: mean of |value| per axis (default). Signed: plain mean, which is
/// close to zero for any oscillating channel.
enum class MeanRule { Absolute, Signed };

constexpr std::string_view to_string(MeanRule r) {
  return r == MeanRule::Absolute ? "absolute" : "signed";
}

inline MeanRule mean_rule_from_string(std::string_view s) {
  if (s == "absolute") return MeanRule::Absolute;
  if (s == "signed") return MeanRule::Signed;
  throw Error(ErrorKind::ParseError, "unknown mean rule '" + std::string(s) + "'");
}

struct LineIndexReport {
  std::string line_id;
  std::array<double, 3> A{};
  double Z = 0.0;
  double D = 0.5;
  std::size_t n_samples = 0;

  friend bool operator==(const LineIndexReport&, const LineIndexReport&) = default;
};

inline std::array<double, 3> mean_features(std::span<const FeatureRow> rows,
                                           MeanRule rule = MeanRule::Absolute) {
  if (rows.empty()) throw Error(ErrorKind::EmptySignal, "no samples to average");
  std::array<detail::CompensatedSum, 3> sums;
  for (const FeatureRow& r : rows) {
    for (std::size_t c = 0; c < 3; ++c) sums[c].add(rule == MeanRule::Absolute ? std::abs(r[c]) : r[c]);
  }
  std::array<double, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) out[c] = sums[c].value() / static_cast<double>(rows.size());
  return out;
}

inline std::array<double, 3> mean_features(const UniformSeries& normalized,
                                           MeanRule rule = MeanRule::Absolute) {
  if (normalized.unit() != UnitTag::Normalized) {
    throw Error(ErrorKind::UnitMismatch, "mean_features expects a normalized series");
  }
  return mean_features(feature_rows(normalized), rule);
}

inline LineIndexReport discomfort_index(const LineModel& model, const std::array<double, 3>& A,
                                        std::size_t n_samples = 0) {
  for (double v : A) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NumericalFailure, "non-finite mean feature");
  }
  LineIndexReport r;
  r.line_id = model.line_id;
  r.A = A;
  r.Z = z_value(model, A);
  r.D = sigmoid(r.Z);
  r.n_samples = n_samples;
  return r;
}

/// Descending by D, ties by line_id.
inline std::vector<LineIndexReport> compare_lines(std::vector<LineIndexReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::EmptyReport, "no lines to compare");
  std::set<std::string> seen;
  for (const auto& r : reports) {
    if (!seen.insert(r.line_id).second) {
      throw Error(ErrorKind::DuplicateLine, "line '" + r.line_id + "' appears twice");
    }
  }
  std::sort(reports.begin(), reports.end(), [](const LineIndexReport& a, const LineIndexReport& b) {
    if (a.D != b.D) return a.D > b.D;
    return a.line_id < b.line_id;
  });
  return reports;
}

}  // namespace ridecomfort
