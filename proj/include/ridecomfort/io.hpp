#pragma once

// JSON and archive file formats: model files, dataset archives, trip
// profiles, index reports and metrics.

#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ridecomfort/detail/text.hpp"
#include "ridecomfort/error.hpp"
#include "ridecomfort/index.hpp"
#include "ridecomfort/ingest.hpp"
#include "ridecomfort/logit.hpp"
#include "ridecomfort/report.hpp"
#include "ridecomfort/synthgen.hpp"

namespace ridecomfort {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

namespace detail {

inline Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string(what) + ": " + e.what());
  }
}

template <typename T>
T get(const Json& j, const char* key, std::string_view what) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::FormatError, std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::FormatError, std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

// ---------------------------------------------------------------- models

inline Json to_json(const NormalizationParams& p) {
  return Json{{"sx", p.sx}, {"sy", p.sy}, {"sz", p.sz}};
}

inline Json to_json(const LineModel& m) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["line_id"] = m.line_id;
  j["coefficients"] = {{"b1", m.b[0]}, {"b2", m.b[1]}, {"b3", m.b[2]}, {"b4", m.b[3]}};
  j["normalization"] = to_json(m.norm);
  j["feature_set"] = std::string(to_string(m.feature_set));
  j["threshold"] = m.threshold;
  j["train_meta"] = {{"n_samples", m.train_meta.n_samples},
                     {"n_positive", m.train_meta.n_positive},
                     {"final_log_likelihood", m.train_meta.final_log_likelihood},
                     {"iterations", m.train_meta.iterations},
                     {"converged", m.train_meta.converged}};
  if (m.normalization_unknown) j["normalization_unknown"] = true;
  return j;
}

inline std::string format_model(const LineModel& m) { return detail::dump(to_json(m)); }

inline LineModel model_from_json(const Json& j) {
  constexpr std::string_view what = "model";
  const int version = detail::get<int>(j, "schema_version", what);
  if (version != kSchemaVersion) {
    throw Error(ErrorKind::FormatError, "unsupported model schema_version " + std::to_string(version));
  }
  LineModel m;
  m.line_id = detail::get<std::string>(j, "line_id", what);
  const Json& c = j.at("coefficients");
  m.b = {detail::get<double>(c, "b1", what), detail::get<double>(c, "b2", what),
         detail::get<double>(c, "b3", what), detail::get<double>(c, "b4", what)};
  m.feature_set = feature_set_from_string(detail::get<std::string>(j, "feature_set", what));
  const Json& n = j.at("normalization");
  m.norm = {detail::get<double>(n, "sx", what), detail::get<double>(n, "sy", what),
            detail::get<double>(n, "sz", what), unit_of(m.feature_set)};
  m.threshold = detail::get<double>(j, "threshold", what);
  if (j.contains("train_meta")) {
    const Json& t = j.at("train_meta");
    m.train_meta.n_samples = detail::get<std::size_t>(t, "n_samples", what);
    m.train_meta.n_positive = detail::get<std::size_t>(t, "n_positive", what);
    m.train_meta.final_log_likelihood = detail::get<double>(t, "final_log_likelihood", what);
    m.train_meta.iterations = detail::get<int>(t, "iterations", what);
    m.train_meta.converged = detail::get<bool>(t, "converged", what);
  }
  m.normalization_unknown = j.value("normalization_unknown", false);
  check_model(m);
  return m;
}

inline LineModel parse_model(std::string_view text) {
  const Json j = detail::parse_json(text, "model");
  if (!j.is_object() || !j.contains("coefficients") || !j.contains("normalization")) {
    throw Error(ErrorKind::FormatError, "model: missing coefficients or normalization");
  }
  return model_from_json(j);
}

/// A model path, or `builtin:<line>` for one of the reference equations.
inline LineModel load_model(const std::string& source) {
  constexpr std::string_view prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) return builtin_model(source.substr(prefix.size()));
  return parse_model(read_file(source));
}

// ---------------------------------------------------------------- datasets
//
// Archive layout: one line of JSON header, then a CSV block
//   t_s,fx,fy,fz,label

inline std::string format_dataset(const LabeledDataset& d) {
  check_dataset(d);
  Json h;
  h["schema_version"] = kSchemaVersion;
  h["kind"] = "ridecomfort-dataset";
  h["feature_set"] = std::string(to_string(d.feature_set));
  h["normalization"] = to_json(d.norm);
  h["rate_hz"] = d.rate_hz;
  h["start_t"] = d.start_t;
  h["n_samples"] = d.size();
  h["n_positive"] = d.positives();
  h["passenger_id"] = d.passenger_id;
  std::string out = h.dump() + "\n";
  out += "t_s,fx,fy,fz,label\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    out += detail::format_double(d.start_t + static_cast<double>(k) / d.rate_hz);
    for (double v : d.features[k]) {
      out += ',';
      out += detail::format_double(v);
    }
    out += d.labels[k] ? ",1\n" : ",0\n";
  }
  return out;
}

inline LabeledDataset parse_dataset(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.size() < 2) throw Error(ErrorKind::FormatError, "dataset: truncated archive", 1);
  const Json h = detail::parse_json(lines[0], "dataset header");
  constexpr std::string_view what = "dataset header";
  if (detail::get<std::string>(h, "kind", what) != "ridecomfort-dataset") {
    throw Error(ErrorKind::FormatError, "dataset: not a dataset archive", 1);
  }
  LabeledDataset d;
  d.feature_set = feature_set_from_string(detail::get<std::string>(h, "feature_set", what));
  const Json& n = h.at("normalization");
  d.norm = {detail::get<double>(n, "sx", what), detail::get<double>(n, "sy", what),
            detail::get<double>(n, "sz", what), unit_of(d.feature_set)};
  d.rate_hz = detail::get<double>(h, "rate_hz", what);
  d.start_t = detail::get<double>(h, "start_t", what);
  d.passenger_id = h.value("passenger_id", std::string{});
  const auto expected = detail::get<std::size_t>(h, "n_samples", what);

  if (lines[1] != "t_s,fx,fy,fz,label") {
    throw Error(ErrorKind::FormatError, "dataset: expected CSV header 't_s,fx,fy,fz,label'", 2);
  }
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i + 1);
    if (detail::trim(lines[i]).empty()) continue;
    const auto f = detail::split(lines[i], ',');
    if (f.size() != 5) throw Error(ErrorKind::ParseError, "dataset: expected 5 fields", line_no);
    FeatureRow r{};
    for (std::size_t c = 0; c < 3; ++c) {
      const auto v = detail::parse_double(f[c + 1]);
      if (!v) {
        throw Error(ErrorKind::ParseError, "dataset: non-numeric feature", line_no,
                    static_cast<long>(c + 2));
      }
      r[c] = *v;
    }
    const auto label = detail::parse_int(f[4]);
    if (!label || (*label != 0 && *label != 1)) {
      throw Error(ErrorKind::ParseError, "dataset: label must be 0 or 1", line_no, 5);
    }
    d.features.push_back(r);
    d.labels.push_back(static_cast<std::uint8_t>(*label));
  }
  if (d.size() != expected) {
    throw Error(ErrorKind::FormatError, "dataset: header says " + std::to_string(expected) +
                                            " rows, found " + std::to_string(d.size()));
  }
  check_dataset(d);
  return d;
}

// ---------------------------------------------------------------- profiles

inline Json to_json(const TripProfile& p) {
  Json segs = Json::array();
  for (const Segment& s : p.segments) {
    segs.push_back({{"phase", std::string(to_string(s.phase))},
                    {"duration_s", s.duration_s},
                    {"peak_ay_ms2", s.peak_ay_ms2}});
  }
  return Json{{"segments", segs},
              {"lateral_sigma", p.lateral_sigma},
              {"vertical_sigma", p.vertical_sigma},
              {"jerk_limit_ms3", p.jerk_limit_ms3},
              {"seed", p.seed}};
}

inline TripProfile parse_profile(std::string_view text) {
  const Json j = detail::parse_json(text, "profile");
  constexpr std::string_view what = "profile";
  TripProfile p;
  if (!j.is_object() || !j.contains("segments") || !j.at("segments").is_array()) {
    throw Error(ErrorKind::FormatError, "profile: 'segments' must be an array");
  }
  for (const Json& s : j.at("segments")) {
    Segment seg;
    seg.phase = phase_from_string(detail::get<std::string>(s, "phase", what));
    seg.duration_s = detail::get<double>(s, "duration_s", what);
    seg.peak_ay_ms2 = s.value("peak_ay_ms2", 0.0);
    p.segments.push_back(seg);
  }
  p.lateral_sigma = j.value("lateral_sigma", 0.0);
  p.vertical_sigma = j.value("vertical_sigma", 0.0);
  p.jerk_limit_ms3 = j.value("jerk_limit_ms3", 1.0);
  p.seed = j.value("seed", std::uint64_t{0});
  check_profile(p);
  return p;
}

// ---------------------------------------------------------------- reports

inline Json to_json(const LineIndexReport& r) {
  return Json{{"line_id", r.line_id},
              {"A", {r.A[0], r.A[1], r.A[2]}},
              {"Z", r.Z},
              {"D", r.D},
              {"n_samples", r.n_samples}};
}

inline std::string format_index_report(std::span<const LineIndexReport> reports,
                                       const Json& config) {
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return detail::dump(Json{{"schema_version", kSchemaVersion}, {"reports", arr}, {"config", config}});
}

inline std::vector<LineIndexReport> parse_index_report(std::string_view text) {
  const Json j = detail::parse_json(text, "index report");
  constexpr std::string_view what = "index report";
  std::vector<LineIndexReport> out;
  for (const Json& r : j.at("reports")) {
    LineIndexReport x;
    x.line_id = detail::get<std::string>(r, "line_id", what);
    const auto a = detail::get<std::vector<double>>(r, "A", what);
    if (a.size() != 3) throw Error(ErrorKind::FormatError, "index report: A must have 3 entries");
    x.A = {a[0], a[1], a[2]};
    x.Z = detail::get<double>(r, "Z", what);
    x.D = detail::get<double>(r, "D", what);
    x.n_samples = detail::get<std::size_t>(r, "n_samples", what);
    out.push_back(x);
  }
  return out;
}

inline Json to_json(const ConfusionMetrics& m) {
  // undefined ratios are left out rather than written as 0
  Json ratios{{"accuracy", m.accuracy}};
  if (m.precision) ratios["precision"] = *m.precision;
  if (m.recall) ratios["recall"] = *m.recall;
  return Json{{"counts", {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}, {"n", m.total()}}},
              {"ratios", ratios}};
}

inline std::string format_metrics(const ConfusionMetrics& m, const Json& config) {
  Json j = to_json(m);
  j["config"] = config;
  return detail::dump(j);
}

}  // namespace ridecomfort
