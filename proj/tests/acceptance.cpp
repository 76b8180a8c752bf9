// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli_harness.hpp"
#include "ridecomfort/ridecomfort.hpp"

using namespace ridecomfort;
namespace fs = std::filesystem;

namespace {

// mpmath at 50 digits, tests/oracles/sigmoid_fixture.py
constexpr double kCircleAtRest = 0.23997802330126128;
constexpr double kEastWestAtRest = 0.87180352107200945;

constexpr Coefficients kTruth{0.5, 2.0, -1.0, -2.0};
constexpr std::uint64_t kTrainSeed = 2024;
constexpr std::uint64_t kHeldOutSeed = 2025;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome* o;
  void operator()(bool ok, const std::string& why) const {
    if (!ok && o->pass) {
      o->pass = false;
      o->detail = why;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

LabeledDataset synthetic_dataset(std::uint64_t seed) {
  TripProfile prof = parse_profile(read_file(harness::data("acceptance_profile.json")));
  prof.seed = seed;
  const LineModel truth = parse_model(read_file(harness::data("truth_model.json")));
  const UniformSeries trip = generate_trip(prof, kDefaultRateHz);
  const GroundTruth gt = label_with_truth(trip, truth, LabelRule::Bernoulli, seed);
  LabeledDataset d;
  d.features = feature_rows(normalize(trip, truth.norm));
  d.labels = gt.labels;
  d.feature_set = FeatureSet::Acceleration;
  d.norm = truth.norm;
  d.rate_hz = trip.rate_hz();
  d.start_t = trip.start_t();
  return d;
}

Eigen::Matrix4d inverse_fisher(const LabeledDataset& d, const Coefficients& b) {
  const Eigen::Vector4d beta(b[0], b[1], b[2], b[3]);
  Eigen::Matrix4d info = Eigen::Matrix4d::Zero();
  for (const FeatureRow& r : d.features) {
    const Eigen::Vector4d x(r[0], r[1], r[2], 1.0);
    const double p = 1.0 / (1.0 + std::exp(-x.dot(beta)));
    info += p * (1.0 - p) * x * x.transpose();
  }
  return info.inverse();
}

Outcome ac1_reference_equations() {
  Outcome o;
  Check check{&o};
  const FeatureRow zero{0.0, 0.0, 0.0};
  const double circle = probability(builtin_model("Circle"), zero);
  const double east_west = probability(builtin_model("East-West"), zero);
  check(std::abs(circle - 0.2400) <= 1e-4, fmt("Circle P = %.6f", circle));
  check(std::abs(east_west - 0.8718) <= 1e-4, fmt("East-West P = %.6f", east_west));
  check(std::abs(circle - kCircleAtRest) <= 1e-15, fmt("Circle off oracle by %.3g", circle - kCircleAtRest));
  check(std::abs(east_west - kEastWestAtRest) <= 1e-15,
        fmt("East-West off oracle by %.3g", east_west - kEastWestAtRest));
  if (o.pass) o.detail = fmt("Circle %.4f, East-West %.4f", circle, east_west);
  return o;
}

std::vector<LineModel> g_fitted;  // reused by AC3 and AC5
std::vector<FitTrace> g_traces;

Outcome ac2_recovery() {
  Outcome o;
  Check check{&o};
  const LabeledDataset d = synthetic_dataset(kTrainSeed);
  FitTrace trace;
  const LineModel m = fit(d, FitConfig{}, "synthetic", &trace);
  g_fitted.push_back(m);
  g_traces.push_back(trace);
  const Eigen::Matrix4d cov = inverse_fisher(d, kTruth);
  std::ostringstream summary;
  summary << "n=" << d.size();
  for (int j = 0; j < 4; ++j) {
    const double err = m.b[j] - kTruth[j];
    const double se = std::sqrt(cov(j, j));
    summary << fmt(", b%.0f %+.4f (3se %.4f)", j + 1.0, err, 3 * se);
    check(std::abs(err) <= 3 * se, fmt("b%.0f error %.4f beyond 3se %.4f", j + 1.0, err, 3 * se));
    check(std::abs(err) <= 0.1, fmt("b%.0f error %.4f beyond 0.1", j + 1.0, err));
  }
  check(d.size() >= 20000, "fewer than 20000 samples");
  if (o.pass) o.detail = summary.str();
  return o;
}

Outcome ac3_held_out_accuracy() {
  Outcome o;
  Check check{&o};
  if (g_fitted.empty()) return {false, "no fitted model from AC2"};
  const LabeledDataset held = synthetic_dataset(kHeldOutSeed);
  const Prediction p = predict_rows(g_fitted.front(), held.features);
  const ConfusionMetrics m = evaluate(p.labels, held.labels);
  check(m.accuracy >= 0.80, fmt("accuracy %.4f", m.accuracy));
  if (o.pass) o.detail = fmt("held-out accuracy %.4f on %.0f samples", m.accuracy, double(held.size()));
  return o;
}

std::vector<LabeledDataset> random_datasets() {
  std::vector<LabeledDataset> out;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 5; ++s) {
    LabeledDataset d;
    for (int i = 0; i < 200; ++i) {
      const FeatureRow r{u(gen), u(gen), u(gen)};
      const double p = sigmoid(z_value(kTruth, r));
      d.features.push_back(r);
      d.labels.push_back(std::uniform_real_distribution<double>(0, 1)(gen) < p ? 1 : 0);
    }
    out.push_back(std::move(d));
  }
  return out;
}

Outcome ac4_gradient() {
  Outcome o;
  Check check{&o};
  std::mt19937_64 gen(15);
  std::normal_distribution<double> nd(0.0, 1.5);
  double worst = 0.0;
  for (const LabeledDataset& d : random_datasets()) {
    const LogisticObjective obj(d.features, d.labels, 0.0, 1.0, false);
    for (int point = 0; point < 20; ++point) {
      const Coefficients b{nd(gen), nd(gen), nd(gen), nd(gen)};
      const auto g = obj.gradient(b);
      for (int j = 0; j < 4; ++j) {
        const double h = 1e-5;
        Coefficients hi = b, lo = b;
        hi[j] += h;
        lo[j] -= h;
        const double fd = (obj.value(hi) - obj.value(lo)) / (2 * h);
        // relative to the gradient scale, floored at one unit of the summed terms
        const double rel = std::abs(fd - g[j]) / std::max({std::abs(g[j]), std::abs(fd), 1.0});
        worst = std::max(worst, rel);
      }
    }
  }
  check(worst <= 1e-6, fmt("worst relative error %.3g", worst));
  if (o.pass) o.detail = fmt("worst relative error %.3g over 100 points", worst);
  return o;
}

Outcome ac5_monotone_trace() {
  Outcome o;
  Check check{&o};
  std::vector<FitTrace> traces = g_traces;
  {
    const LabeledDataset held = synthetic_dataset(kHeldOutSeed);
    FitTrace t;
    fit(held, FitConfig{}, "held", &t);
    traces.push_back(t);
  }
  for (const LabeledDataset& d : random_datasets()) {
    FitTrace t;
    fit(d, FitConfig{}, "random", &t);
    traces.push_back(t);
  }
  {
    IngestConfig cfg;
    const LabeledDataset tut =
        build_dataset(parse_accel_log(read_file(harness::data("tutorial_log.csv"))),
                      parse_events(read_file(harness::data("tutorial_events.txt"))), cfg);
    FitTrace t;
    fit(tut, FitConfig{}, "tutorial", &t);
    traces.push_back(t);
  }
  int most = 0;
  for (const FitTrace& t : traces) {
    most = std::max(most, static_cast<int>(t.size()));
    check(!t.empty() && t.size() <= 25, fmt("trace of %.0f iterations", double(t.size())));
    for (std::size_t i = 1; i < t.size(); ++i) {
      check(t[i].penalized_log_likelihood >= t[i - 1].penalized_log_likelihood,
            fmt("log-likelihood fell at iteration %.0f", double(i)));
    }
  }
  if (o.pass) o.detail = fmt("%.0f fits, at most %.0f iterations", double(traces.size()), most);
  return o;
}

Outcome ac6_jerk() {
  Outcome o;
  Check check{&o};
  const double rate = 50.0, pi = std::acos(-1.0);
  const std::size_t n = 501;
  Channel x(n), zero(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) x[k] = std::sin(2 * pi * (k / rate));
  const UniformSeries j = jerk(UniformSeries(0.0, rate, x, zero, zero, UnitTag::Acceleration));
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    worst = std::max(worst, std::abs(j.ax()[k] - 2 * pi * std::cos(2 * pi * (k / rate))));
  }
  check(worst <= 2e-2, fmt("max interior error %.4g", worst));
  if (o.pass) o.detail = fmt("max interior error %.4g", worst);
  return o;
}

Outcome ac7_index() {
  Outcome o;
  Check check{&o};
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd(0.0, 3.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    LineModel m;
    m.b = {nd(gen), nd(gen), nd(gen), nd(gen)};
    const LineIndexReport r = discomfort_index(m, {u(gen), u(gen), u(gen)}, 100);
    check(r.D > 0.0 && r.D < 1.0, fmt("D = %.17g", r.D));
    const LineIndexReport z = discomfort_index(m, {0.0, 0.0, 0.0}, 100);
    check(std::abs(z.D - sigmoid(m.b[3])) <= 1e-12, "D at A = 0 differs from sigmoid(b4)");
  }
  for (int t = 0; t < 200; ++t) {
    std::vector<LineIndexReport> reports;
    const int n = 1 + t % 9;
    for (int i = 0; i < n; ++i) {
      LineIndexReport r;
      r.line_id = "line-" + std::to_string(i);
      // coarse values so ties are common
      r.D = std::round(std::abs(u(gen)) * 4) / 4;
      reports.push_back(r);
    }
    const auto ranked = compare_lines(reports);
    // a report's rank is the number of others that beat it
    for (const auto& r : reports) {
      std::size_t rank = 0;
      for (const auto& s : reports) {
        if (s.D > r.D || (s.D == r.D && s.line_id < r.line_id)) ++rank;
      }
      check(ranked[rank].line_id == r.line_id, "ranking differs from brute force");
    }
  }
  if (o.pass) o.detail = "500 random models, 200 rankings";
  return o;
}

Outcome ac8_determinism() {
  Outcome o;
  Check check{&o};
  using harness::quote;
  const std::string cfg = " --config " + quote(harness::data("simulated_pipeline.json"));
  auto pipeline = [&](const fs::path& dir) {
    const std::string out = " --out-dir " + quote(dir.string());
    const std::string log = quote((dir / "log.csv").string());
    const std::string ev = quote((dir / "events.txt").string());
    const std::string ds = quote((dir / "dataset.rcd").string());
    const std::string model = quote((dir / "model.json").string());
    for (const std::string& args :
         {"simulate --profile " + quote(harness::data("tutorial_profile.json")) +
              " --truth-model " + quote(harness::data("truth_model.json")) + " --seed 31" + cfg + out,
          "ingest --log " + log + " --events " + ev + cfg + out,
          "train --dataset " + ds + cfg + out,
          "index --model " + model + " --dataset " + ds + " --model builtin:LRT --dataset " + ds +
              cfg + out}) {
      const auto r = harness::run(args);
      check(r.code == 0, "'" + args.substr(0, args.find(' ')) + "' exited " + std::to_string(r.code));
    }
  };
  const fs::path a = harness::scratch("accept-a"), b = harness::scratch("accept-b");
  pipeline(a);
  pipeline(b);
  int files = 0;
  for (const char* f : {"log.csv", "events.txt", "dataset.rcd", "model.json", "index.json", "index.svg"}) {
    check(fs::exists(a / f) && harness::slurp(a / f) == harness::slurp(b / f),
          std::string(f) + " differs between runs");
    ++files;
  }
  fs::remove_all(a);
  fs::remove_all(b);
  if (o.pass) o.detail = fmt("%.0f files byte-identical across two runs", files);
  return o;
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<Outcome()> run;
  double budget_s;  // 0 means unbudgeted
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "reference equations at rest", ac1_reference_equations, 1.0},
      {"AC2", "coefficient recovery on a synthetic trip", ac2_recovery, 5.0},
      {"AC3", "held-out accuracy", ac3_held_out_accuracy, 5.0},
      {"AC4", "analytic gradient against finite differences", ac4_gradient, 0.0},
      {"AC5", "monotone Newton trace within 25 iterations", ac5_monotone_trace, 0.0},
      {"AC6", "jerk accuracy on a sinusoid", ac6_jerk, 0.0},
      {"AC7", "discomfort index range, baseline and ranking", ac7_index, 0.0},
      {"AC8", "end-to-end determinism", ac8_determinism, 0.0},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail = fmt("took %.2f s, budget %.0f s", secs, c.budget_s);
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %s %s: %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
