#pragma once

// Run configuration: every key has a default, a JSON config file overrides
// the defaults, and command-line flags override the file.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ridecomfort/index.hpp"
#include "ridecomfort/ingest.hpp"
#include "ridecomfort/io.hpp"
#include "ridecomfort/logit.hpp"
#include "ridecomfort/synthgen.hpp"

namespace ridecomfort {

struct RunConfig {
  IngestConfig ingest;
  FitConfig fit;
  std::string line_id = "line";
  std::size_t smoothing_window = 51;
  MeanRule mean_rule = MeanRule::Absolute;
  LabelRule label_rule = LabelRule::Bernoulli;
  std::optional<std::uint64_t> seed;  // overrides the profile seed when set
  int jobs = 1;
};

/// Applies the keys present in `j` on top of `cfg`. Unknown keys are rejected
/// so that typos don't silently fall back to defaults.
inline void apply_json(RunConfig& cfg, const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::FormatError, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "rate_hz") cfg.ingest.rate_hz = value.get<double>();
      else if (key == "pulse_width_s") cfg.ingest.pulse_width_s = value.get<double>();
      else if (key == "feature_set") cfg.ingest.feature_set = feature_set_from_string(value.get<std::string>());
      else if (key == "clock_offset_s") cfg.ingest.clock_offset_s = value.get<double>();
      else if (key == "mean_subtract") cfg.ingest.mean_subtract = value.get<bool>();
      else if (key == "passenger_id") cfg.ingest.passenger_id = value.get<std::string>();
      else if (key == "max_iterations") cfg.fit.max_iterations = value.get<int>();
      else if (key == "tolerance") cfg.fit.tolerance = value.get<double>();
      else if (key == "ridge") cfg.fit.ridge = value.get<double>();
      else if (key == "step_halving_limit") cfg.fit.step_halving_limit = value.get<int>();
      else if (key == "threshold") cfg.fit.threshold = value.get<double>();
      else if (key == "positive_weight") cfg.fit.positive_weight = value.get<double>();
      else if (key == "line_id") cfg.line_id = value.get<std::string>();
      else if (key == "smoothing_window") cfg.smoothing_window = value.get<std::size_t>();
      else if (key == "mean_rule") cfg.mean_rule = mean_rule_from_string(value.get<std::string>());
      else if (key == "label_rule") cfg.label_rule = label_rule_from_string(value.get<std::string>());
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "jobs") cfg.jobs = value.get<int>();
      else throw Error(ErrorKind::FormatError, "unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::FormatError, "config key '" + key + "' has the wrong type");
    }
  }
}

inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  apply_json(cfg, detail::parse_json(text, "config"));
  return cfg;
}

/// The effective configuration, embedded in every report for provenance.
inline Json to_json(const RunConfig& c) {
  Json j{{"rate_hz", c.ingest.rate_hz},
         {"pulse_width_s", c.ingest.pulse_width_s},
         {"feature_set", std::string(to_string(c.ingest.feature_set))},
         {"clock_offset_s", c.ingest.clock_offset_s},
         {"mean_subtract", c.ingest.mean_subtract},
         {"passenger_id", c.ingest.passenger_id},
         {"max_iterations", c.fit.max_iterations},
         {"tolerance", c.fit.tolerance},
         {"ridge", c.fit.ridge},
         {"step_halving_limit", c.fit.step_halving_limit},
         {"threshold", c.fit.threshold},
         {"positive_weight", c.fit.positive_weight},
         {"line_id", c.line_id},
         {"smoothing_window", c.smoothing_window},
         {"mean_rule", std::string(to_string(c.mean_rule))},
         {"label_rule", std::string(to_string(c.label_rule))}};
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

}  // namespace ridecomfort
