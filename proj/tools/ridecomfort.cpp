// ridecomfort: batch front end for the discomfort pipeline.
//
//   ridecomfort simulate --profile trip.json --truth-model builtin:Circle
//   ridecomfort ingest   --log log.csv --events events.txt
//   ridecomfort train    --dataset dataset.rcd
//   ridecomfort predict  --model model.json --log log.csv [--events events.txt]
//   ridecomfort index    --model a.json --dataset a.rcd --model b.json --dataset b.rcd
//   ridecomfort report   --log log.csv [--events events.txt] | --predictions prediction.csv
//
// Exit codes: 0 success, 2 I/O, 3 parse, 4 degenerate data, 5 invalid invocation.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ridecomfort/ridecomfort.hpp"

namespace fs = std::filesystem;
using namespace ridecomfort;

namespace {

enum ExitCode { kOk = 0, kIo = 2, kParse = 3, kDegenerate = 4, kInvocation = 5 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
      return kIo;
    case ErrorKind::FormatError:
    case ErrorKind::ParseError:
    case ErrorKind::NonMonotonicTime:
    case ErrorKind::InvalidProfile:
      return kParse;
    case ErrorKind::EmptySignal:
    case ErrorKind::SignalTooShort:
    case ErrorKind::DegenerateLabels:
    case ErrorKind::SeparationDetected:
    case ErrorKind::NumericalFailure:
    case ErrorKind::EventOutOfRange:
    case ErrorKind::EmptyProfile:
      return kDegenerate;
    case ErrorKind::InvalidNormalization:
    case ErrorKind::InvalidWindow:
    case ErrorKind::UnitMismatch:
    case ErrorKind::DuplicateLine:
    case ErrorKind::LengthMismatch:
    case ErrorKind::EmptyReport:
    case ErrorKind::UnknownLine:
      return kInvocation;
  }
  return kInvocation;
}

struct Overrides {
  std::optional<double> rate_hz, pulse_width_s, clock_offset_s, threshold, ridge, tolerance,
      positive_weight;
  std::optional<std::string> feature_set, line_id, passenger_id, mean_rule, label_rule;
  std::optional<std::size_t> smoothing_window;
  std::optional<int> max_iterations;
  bool mean_subtract = false;
};

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int jobs = 0;
  Overrides o;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig c;
  if (!g.config_path.empty()) c = parse_config(read_file(g.config_path));
  const Overrides& o = g.o;
  if (o.rate_hz) c.ingest.rate_hz = *o.rate_hz;
  if (o.pulse_width_s) c.ingest.pulse_width_s = *o.pulse_width_s;
  if (o.clock_offset_s) c.ingest.clock_offset_s = *o.clock_offset_s;
  if (o.feature_set) c.ingest.feature_set = feature_set_from_string(*o.feature_set);
  if (o.passenger_id) c.ingest.passenger_id = *o.passenger_id;
  if (o.mean_subtract) c.ingest.mean_subtract = true;
  if (o.threshold) c.fit.threshold = *o.threshold;
  if (o.ridge) c.fit.ridge = *o.ridge;
  if (o.tolerance) c.fit.tolerance = *o.tolerance;
  if (o.positive_weight) c.fit.positive_weight = *o.positive_weight;
  if (o.max_iterations) c.fit.max_iterations = *o.max_iterations;
  if (o.line_id) c.line_id = *o.line_id;
  if (o.smoothing_window) c.smoothing_window = *o.smoothing_window;
  if (o.mean_rule) c.mean_rule = mean_rule_from_string(*o.mean_rule);
  if (o.label_rule) c.label_rule = label_rule_from_string(*o.label_rule);
  if (g.seed) c.seed = g.seed;
  if (g.jobs > 0) c.jobs = g.jobs;
  if (!(c.ingest.rate_hz > 0.0)) throw Error(ErrorKind::InvalidWindow, "rate_hz must be positive");
  if (!(c.fit.threshold > 0.0 && c.fit.threshold < 1.0)) {
    throw Error(ErrorKind::InvalidWindow, "threshold must lie in (0, 1)");
  }
  if (c.jobs < 1) throw Error(ErrorKind::InvalidWindow, "jobs must be at least 1");
  return c;
}

// --out-dir, else $RIDECOMFORT_OUT_DIR, else the working directory.
fs::path output_dir(const Globals& g) {
  fs::path dir = ".";
  if (!g.out_dir.empty()) {
    dir = g.out_dir;
  } else if (const char* env = std::getenv("RIDECOMFORT_OUT_DIR"); env && *env) {
    dir = env;
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

void emit(const fs::path& path, std::string_view content) {
  write_file(path.string(), content);
  std::cout << "wrote " << path.string() << "\n";
}

std::string sample_csv(const UniformSeries& s) { return format_accel_log(to_samples(s)); }

// ------------------------------------------------------------------ commands

int cmd_ingest(const Globals& g, const std::string& log_path, const std::string& events_path,
               const std::string& output) {
  const RunConfig cfg = resolve_config(g);
  const RawLog log = parse_accel_log(read_file(log_path), log_path);
  const EventLog events = parse_events(read_file(events_path));
  const LabeledDataset d = build_dataset(log, events, cfg.ingest);
  emit(output_dir(g) / output, format_dataset(d));
  std::cout << "samples " << d.size() << ", positive " << d.positives() << "\n";
  return kOk;
}

int cmd_train(const Globals& g, const std::string& dataset_path, const std::string& output) {
  const RunConfig cfg = resolve_config(g);
  const LabeledDataset d = parse_dataset(read_file(dataset_path));
  const LineModel m = fit(d, cfg.fit, cfg.line_id);
  emit(output_dir(g) / output, format_model(m));
  std::cout << "line " << m.line_id << ": b = (" << m.b[0] << ", " << m.b[1] << ", " << m.b[2]
            << ", " << m.b[3] << "), iterations " << m.train_meta.iterations
            << ", converged=" << (m.train_meta.converged ? "true" : "false") << "\n";
  return kOk;
}

int cmd_predict(const Globals& g, const std::string& model_path, const std::string& log_path,
                const std::string& events_path) {
  const RunConfig cfg = resolve_config(g);
  const LineModel model = load_model(model_path);
  const RawLog log = parse_accel_log(read_file(log_path), log_path);
  const UniformSeries series = prepare_series(log.samples, cfg.ingest.rate_hz, model.feature_set,
                                              cfg.ingest.mean_subtract);
  const Prediction p = predict(model, series);

  LabelVector actual;
  if (!events_path.empty()) {
    const EventLog events = align_events(parse_events(read_file(events_path)),
                                         cfg.ingest.clock_offset_s);
    actual = build_labels(events, series, cfg.ingest.pulse_width_s);
  }

  const fs::path dir = output_dir(g);
  emit(dir / "prediction.csv", format_prediction_csv(p.probability, p.labels, actual,
                                                     series.start_t(), series.rate_hz()));
  FigureOptions fo;
  fo.smoothing_window = cfg.smoothing_window;
  emit(dir / "prediction.svg", render_prediction_figure(p.probability, p.labels, actual,
                                                        series.start_t(), series.rate_hz(), fo));
  if (!actual.empty()) {
    const ConfusionMetrics m = evaluate(p.labels, actual);
    emit(dir / "metrics.json", format_metrics(m, to_json(cfg)));
    std::cout << "accuracy " << m.accuracy << "\n";
  }
  if (model.normalization_unknown) {
    std::cout << "note: model '" << model.line_id
              << "' ships without its original feature scaling; probabilities are illustrative\n";
  }
  return kOk;
}

int cmd_index(const Globals& g, const std::vector<std::string>& models,
              const std::vector<std::string>& datasets) {
  const RunConfig cfg = resolve_config(g);
  if (models.size() != datasets.size()) {
    throw Error(ErrorKind::LengthMismatch, "give one --dataset per --model");
  }
  auto one = [&](std::size_t i) {
    const LineModel m = load_model(models[i]);
    const LabeledDataset d = parse_dataset(read_file(datasets[i]));
    if (d.feature_set != m.feature_set) {
      throw Error(ErrorKind::UnitMismatch, "dataset '" + datasets[i] + "' and model '" +
                                               models[i] + "' use different feature sets");
    }
    return discomfort_index(m, mean_features(d.features, cfg.mean_rule), d.size());
  };

  // lines are independent; results are gathered by position so output order
  // never depends on scheduling
  std::vector<LineIndexReport> reports(models.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, cfg.jobs));
  for (std::size_t base = 0; base < models.size(); base += jobs) {
    std::vector<std::future<LineIndexReport>> batch;
    for (std::size_t i = base; i < std::min(models.size(), base + jobs); ++i) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, one, i));
    }
    for (std::size_t j = 0; j < batch.size(); ++j) reports[base + j] = batch[j].get();
  }

  const auto ranked = compare_lines(std::move(reports));
  const fs::path dir = output_dir(g);
  emit(dir / "index.json", format_index_report(ranked, to_json(cfg)));
  emit(dir / "index.svg", render_index_figure(ranked));
  for (const auto& r : ranked) std::cout << r.line_id << "  D = " << r.D << "\n";
  return kOk;
}

int cmd_simulate(const Globals& g, const std::string& profile_path, const std::string& truth_path) {
  const RunConfig cfg = resolve_config(g);
  TripProfile profile = parse_profile(read_file(profile_path));
  if (cfg.seed) profile.seed = *cfg.seed;
  LineModel truth = load_model(truth_path);

  const UniformSeries trip = generate_trip(profile, cfg.ingest.rate_hz);
  const GroundTruth gt = label_with_truth(trip, truth, cfg.label_rule, profile.seed);

  // one stopwatch instant per positive sample; ingest with a pulse width
  // below one sample period reproduces the truth labels exactly
  EventLog events;
  std::string truth_csv = "t_s,label\n";
  for (std::size_t k = 0; k < trip.size(); ++k) {
    truth_csv += detail::format_double(trip.time(k));
    truth_csv += gt.labels[k] ? ",1\n" : ",0\n";
    if (gt.labels[k]) events.events.push_back(trip.time(k));
  }

  const fs::path dir = output_dir(g);
  emit(dir / "log.csv", sample_csv(trip));
  emit(dir / "events.txt", format_events(events));
  emit(dir / "truth_labels.csv", truth_csv);
  const std::size_t pos = events.events.size();
  Json meta{{"seed", profile.seed},
            {"label_rule", std::string(to_string(gt.rule))},
            {"truth_line_id", truth.line_id},
            {"n_samples", trip.size()},
            {"n_positive", pos},
            {"positive_rate", static_cast<double>(pos) / static_cast<double>(trip.size())},
            {"suggested_pulse_width_s", 0.5 / cfg.ingest.rate_hz},
            {"profile", to_json(profile)}};
  emit(dir / "simulate.json", detail::dump(meta));
  std::cout << "samples " << trip.size() << ", positive " << pos << ", seed " << profile.seed
            << "\n";
  return kOk;
}

int cmd_report(const Globals& g, const std::string& log_path, const std::string& events_path,
               const std::string& predictions_path) {
  const RunConfig cfg = resolve_config(g);
  if (log_path.empty() && predictions_path.empty()) {
    throw Error(ErrorKind::InvalidWindow, "report needs --log or --predictions");
  }
  const fs::path dir = output_dir(g);
  if (!log_path.empty()) {
    const RawLog log = parse_accel_log(read_file(log_path), log_path);
    UniformSeries accel = resample(log.samples, cfg.ingest.rate_hz);
    if (cfg.ingest.mean_subtract) accel = subtract_mean(accel);
    const UniformSeries j = jerk(accel);
    LabelVector labels(accel.size(), 0);
    if (!events_path.empty()) {
      const EventLog events = align_events(parse_events(read_file(events_path)),
                                           cfg.ingest.clock_offset_s);
      labels = build_labels(events, accel, cfg.ingest.pulse_width_s);
    }
    emit(dir / "trip.svg", render_trip_figure(accel, j, labels));
  }
  if (!predictions_path.empty()) {
    const PredictionTable tab = parse_prediction_csv(read_file(predictions_path));
    if (tab.actual.empty()) {
      throw Error(ErrorKind::LengthMismatch, "prediction file has no actual labels to score");
    }
    const ConfusionMetrics m = evaluate(tab.predicted, tab.actual);
    emit(dir / "metrics.json", format_metrics(m, to_json(cfg)));
    std::cout << "accuracy " << m.accuracy << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standing-passenger discomfort from accelerometer trips"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--seed", g.seed, "random seed (overrides profile and config)");
  app.add_option("--out-dir", g.out_dir, "output directory (default $RIDECOMFORT_OUT_DIR or .)");
  app.add_option("--jobs", g.jobs, "parallel jobs across independent lines");
  Overrides& o = g.o;
  app.add_option("--rate-hz", o.rate_hz, "resampling rate");
  app.add_option("--pulse-width", o.pulse_width_s, "discomfort pulse width in seconds");
  app.add_option("--clock-offset", o.clock_offset_s, "seconds added to stopwatch instants");
  app.add_option("--feature-set", o.feature_set, "acceleration | jerk");
  app.add_flag("--mean-subtract", o.mean_subtract, "remove per-axis means before use");
  app.add_option("--passenger-id", o.passenger_id, "tag stored with datasets");
  app.add_option("--line-id", o.line_id, "line identifier for trained models");
  app.add_option("--threshold", o.threshold, "probability threshold for a discomfort label");
  app.add_option("--ridge", o.ridge, "L2 penalty on the slope coefficients");
  app.add_option("--tolerance", o.tolerance, "log-likelihood convergence tolerance");
  app.add_option("--max-iterations", o.max_iterations, "Newton iteration cap");
  app.add_option("--positive-weight", o.positive_weight, "weight of positive samples");
  app.add_option("--smoothing-window", o.smoothing_window, "odd window for the probability trace");
  app.add_option("--mean-rule", o.mean_rule, "absolute | signed");
  app.add_option("--label-rule", o.label_rule, "bernoulli | threshold");

  std::string log_path, events_path, dataset_path, model_path, profile_path, truth_path,
      predictions_path, dataset_output, model_output;
  std::vector<std::string> models, datasets;

  auto* ingest = app.add_subcommand("ingest", "build a labelled dataset from a log and events");
  ingest->add_option("--log", log_path, "accelerometer CSV")->required();
  ingest->add_option("--events", events_path, "stopwatch event file")->required();
  ingest->add_option("-o,--output", dataset_output, "archive name inside the output directory")
      ->default_val("dataset.rcd");

  auto* train = app.add_subcommand("train", "fit a logistic discomfort model");
  train->add_option("--dataset", dataset_path, "dataset archive")->required();
  train->add_option("-o,--output", model_output, "model file name")->default_val("model.json");

  auto* pred = app.add_subcommand("predict", "per-sample discomfort probability for a trip");
  pred->add_option("--model", model_path, "model file or builtin:<line>")->required();
  pred->add_option("--log", log_path, "accelerometer CSV")->required();
  pred->add_option("--events", events_path, "stopwatch events for the actual trace");

  auto* index = app.add_subcommand("index", "discomfort index per line, ranked");
  index->add_option("--model", models, "model file or builtin:<line> (repeat)")->required();
  index->add_option("--dataset", datasets, "dataset archive, paired with --model (repeat)")
      ->required();

  auto* sim = app.add_subcommand("simulate", "synthetic trip with ground-truth labels");
  sim->add_option("--profile", profile_path, "trip profile JSON")->required();
  sim->add_option("--truth-model", truth_path, "model file or builtin:<line>")->required();

  auto* rep = app.add_subcommand("report", "trip figure and/or prediction metrics");
  rep->add_option("--log", log_path, "accelerometer CSV");
  rep->add_option("--events", events_path, "stopwatch event file");
  rep->add_option("--predictions", predictions_path, "prediction CSV to score");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvocation;
  }

  try {
    if (*ingest) return cmd_ingest(g, log_path, events_path, dataset_output);
    if (*train) return cmd_train(g, dataset_path, model_output);
    if (*pred) return cmd_predict(g, model_path, log_path, events_path);
    if (*index) return cmd_index(g, models, datasets);
    if (*sim) return cmd_simulate(g, profile_path, truth_path);
    if (*rep) return cmd_report(g, log_path, events_path, predictions_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvocation;
  }
  return kInvocation;
}
