#pragma once

// Logistic discomfort model: P = 1 / (1 + exp(-z)) with
// z = b1*ax + b2*ay + b3*az + b4 on normalized features, a Newton/IRLS
// maximum-likelihood trainer, and the per-sample predictor.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridecomfort/error.hpp"
#include "ridecomfort/ingest.hpp"
#include "ridecomfort/signal.hpp"

namespace ridecomfort {

/// b1, b2, b3 multiply the normalized x, y, z features; b4 is the intercept.
using Coefficients = std::array<double, 4>;

struct TrainMeta {
  std::size_t n_samples = 0;
  std::size_t n_positive = 0;
  double final_log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;

  friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

struct LineModel {
  std::string line_id;
  Coefficients b{};
  NormalizationParams norm;
  FeatureSet feature_set = FeatureSet::Acceleration;
  double threshold = 0.5;
  TrainMeta train_meta;
  // Set on shipped reference equations whose original feature scaling is not
  // known; predictions with them are illustrative only.
  bool normalization_unknown = false;

  friend bool operator==(const LineModel&, const LineModel&) = default;
};

inline void check_model(const LineModel& m) {
  for (double v : m.b) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NumericalFailure, "non-finite coefficient");
  }
  if (!(m.threshold > 0.0 && m.threshold < 1.0)) {
    throw Error(ErrorKind::InvalidWindow, "threshold must lie in (0, 1)");
  }
  if (m.train_meta.n_positive > m.train_meta.n_samples) {
    throw Error(ErrorKind::ParseError, "n_positive exceeds n_samples");
  }
  validated(m.norm);
  if (m.norm.source != unit_of(m.feature_set)) {
    throw Error(ErrorKind::UnitMismatch, "normalization unit does not match feature set");
  }
}

struct FitConfig {
  int max_iterations = 100;
  double tolerance = 1e-8;  // on the change in penalized log-likelihood
  double ridge = 0.0;       // L2 penalty on b1..b3
  int step_halving_limit = 30;
  double threshold = 0.5;
  double positive_weight = 1.0;
  double separation_bound = 1e3;  // coefficient L2 norm treated as divergence
};

/// Sigmoid that never overflows: exp is only ever taken of a non-positive value.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double z_value(const Coefficients& b, const FeatureRow& a) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + b[3];
}
inline double z_value(const LineModel& m, const FeatureRow& a) { return z_value(m.b, a); }
inline double probability(const LineModel& m, const FeatureRow& a) {
  return sigmoid(z_value(m, a));
}

inline Axis dominant_axis(const LineModel& m) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (std::abs(m.b[i]) > std::abs(m.b[best])) best = i;
  }
  return static_cast<Axis>(best);
}

namespace detail {

// Neumaier-compensated running sum; keeps the reduction stable against
// row reordering.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

/// Solves A x = rhs for a 4x4 system by Gaussian elimination with partial
/// pivoting. Returns nullopt when a pivot vanishes relative to the matrix scale.
inline std::optional<std::array<double, 4>> solve4(std::array<std::array<double, 4>, 4> a,
                                                   std::array<double, 4> rhs) {
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (!(scale > 0.0) || !std::isfinite(scale)) return std::nullopt;

  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 4; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) <= scale * 1e-13) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = col + 1; r < 4; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::array<double, 4> x{};
  for (std::size_t i = 4; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < 4; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace detail

/// Weighted Bernoulli log-likelihood of the logistic model, with an optional
/// L2 penalty. Weights are 1 for negatives and `positive_weight` for positives.
class LogisticObjective {
 public:
  struct Evaluation {
    double value = 0.0;
    std::array<double, 4> gradient{};
    std::array<std::array<double, 4>, 4> hessian{};
  };

  LogisticObjective(std::span<const FeatureRow> rows, std::span<const std::uint8_t> labels,
                    double ridge = 0.0, double positive_weight = 1.0,
                    bool penalize_intercept = false)
      : rows_(rows),
        labels_(labels),
        ridge_(ridge),
        positive_weight_(positive_weight),
        penalize_intercept_(penalize_intercept) {
    if (rows_.size() != labels_.size()) {
      throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ in count");
    }
  }

  double value(const Coefficients& b) const {
    detail::CompensatedSum ll;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const double z = z_value(b, rows_[i]);
      const double y = labels_[i];
      ll.add(weight(i) * (y * z - softplus(z)));
    }
    return ll.value() - penalty(b);
  }

  std::array<double, 4> gradient(const Coefficients& b) const { return evaluate(b).gradient; }

  Evaluation evaluate(const Coefficients& b) const {
    detail::CompensatedSum ll;
    std::array<detail::CompensatedSum, 4> g;
    std::array<detail::CompensatedSum, 10> h;  // upper triangle, row-major
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const FeatureRow& r = rows_[i];
      const std::array<double, 4> x{r[0], r[1], r[2], 1.0};
      const double z = z_value(b, r);
      const double p = sigmoid(z);
      const double y = labels_[i];
      const double w = weight(i);
      ll.add(w * (y * z - softplus(z)));
      const double resid = w * (y - p);
      const double curv = w * p * (1.0 - p);
      std::size_t idx = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        g[j].add(resid * x[j]);
        for (std::size_t k = j; k < 4; ++k) h[idx++].add(-curv * x[j] * x[k]);
      }
    }
    Evaluation e;
    e.value = ll.value() - penalty(b);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      e.gradient[j] = g[j].value() - (penalized(j) ? ridge_ * b[j] : 0.0);
      for (std::size_t k = j; k < 4; ++k) {
        const double v = h[idx++].value() - (j == k && penalized(j) ? ridge_ : 0.0);
        e.hessian[j][k] = v;
        e.hessian[k][j] = v;
      }
    }
    return e;
  }

 private:
  double weight(std::size_t i) const { return labels_[i] ? positive_weight_ : 1.0; }
  bool penalized(std::size_t j) const { return j < 3 || penalize_intercept_; }
  double penalty(const Coefficients& b) const {
    double s = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    if (penalize_intercept_) s += b[3] * b[3];
    return 0.5 * ridge_ * s;
  }

  std::span<const FeatureRow> rows_;
  std::span<const std::uint8_t> labels_;
  double ridge_;
  double positive_weight_;
  bool penalize_intercept_;
};

/// One accepted Newton step.
struct FitIteration {
  int iteration = 0;
  double penalized_log_likelihood = 0.0;
  int step_halvings = 0;
};

using FitTrace = std::vector<FitIteration>;

namespace detail {

inline double norm2(const Coefficients& b) {
  return std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2] + b[3] * b[3]);
}

inline bool separates(const Coefficients& b, std::span<const FeatureRow> rows,
                      std::span<const std::uint8_t> labels) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = z_value(b, rows[i]);
    if (labels[i] ? !(z > 0.0) : !(z < 0.0)) return false;
  }
  return true;
}

struct NewtonResult {
  Coefficients b{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  bool singular = false;
};

inline NewtonResult newton(const LogisticObjective& obj, Coefficients start,
                           const FitConfig& cfg, FitTrace* trace) {
  NewtonResult res;
  res.b = start;
  res.value = obj.value(start);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto e = obj.evaluate(res.b);
    std::array<std::array<double, 4>, 4> neg_h{};
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) neg_h[j][k] = -e.hessian[j][k];
    const auto delta = solve4(neg_h, e.gradient);
    if (!delta) {
      res.singular = true;
      return res;
    }

    double step = 1.0;
    int halvings = 0;
    bool accepted = false;
    Coefficients cand{};
    double cand_value = 0.0;
    for (;;) {
      for (std::size_t j = 0; j < 4; ++j) cand[j] = res.b[j] + step * (*delta)[j];
      cand_value = obj.value(cand);
      if (std::isfinite(cand_value) && cand_value >= res.value) {
        accepted = true;
        break;
      }
      if (halvings >= cfg.step_halving_limit) break;
      step *= 0.5;
      ++halvings;
    }
    if (!accepted) {
      // no ascent left at round-off level: the current point is the optimum
      res.converged = true;
      return res;
    }

    const double change = cand_value - res.value;
    res.b = cand;
    res.value = cand_value;
    res.iterations = it;
    if (trace) trace->push_back({it, cand_value, halvings});
    if (norm2(res.b) > cfg.separation_bound) {
      res.diverged = true;
      return res;
    }
    if (std::abs(change) < cfg.tolerance) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace detail

/// Maximum-likelihood fit by Newton/IRLS with step halving.
///
/// Errors: DegenerateLabels for fewer than 10 rows or a single label class;
/// SeparationDetected when the unpenalized optimum does not exist (the
/// coefficients run past `separation_bound`, or the fitted hyperplane splits
/// the labels perfectly); NumericalFailure for a singular Newton system.
inline LineModel fit(const LabeledDataset& dataset, const FitConfig& config,
                     std::string line_id, FitTrace* trace = nullptr) {
  check_dataset(dataset);
  if (config.max_iterations < 1 || !(config.tolerance > 0.0) || config.ridge < 0.0 ||
      config.step_halving_limit < 1 || !(config.positive_weight > 0.0)) {
    throw Error(ErrorKind::InvalidWindow, "invalid fit configuration");
  }
  const std::size_t n = dataset.size();
  const std::size_t pos = dataset.positives();
  if (n < 10) throw Error(ErrorKind::DegenerateLabels, "need at least 10 samples to fit");
  if (pos == 0 || pos == n) {
    throw Error(ErrorKind::DegenerateLabels, "labels contain a single class");
  }

  const double rate = static_cast<double>(pos) / static_cast<double>(n);
  const Coefficients start{0.0, 0.0, 0.0, std::log(rate / (1.0 - rate))};

  LogisticObjective objective(dataset.features, dataset.labels, config.ridge,
                              config.positive_weight, false);
  if (trace) trace->clear();
  detail::NewtonResult r = detail::newton(objective, start, config, trace);

  if (r.diverged && config.ridge > 0.0) {
    // slopes are bounded by the penalty, so the intercept is what ran off
    LogisticObjective full(dataset.features, dataset.labels, config.ridge,
                           config.positive_weight, true);
    if (trace) trace->clear();
    r = detail::newton(full, start, config, trace);
  }
  const bool separated =
      config.ridge == 0.0 && detail::separates(r.b, dataset.features, dataset.labels);
  if (r.diverged || separated) {
    throw Error(ErrorKind::SeparationDetected,
                "labels are completely separable, the maximum-likelihood estimate does not "
                "exist; retry with a positive ridge");
  }
  if (r.singular) {
    throw Error(ErrorKind::NumericalFailure,
                "singular information matrix (constant or collinear features?)");
  }

  LineModel m;
  m.line_id = std::move(line_id);
  m.b = r.b;
  m.norm = dataset.norm;
  m.feature_set = dataset.feature_set;
  m.threshold = config.threshold;
  m.train_meta = {n, pos, r.value, r.iterations, r.converged};
  check_model(m);
  return m;
}

struct Prediction {
  std::vector<double> probability;
  LabelVector labels;
};

inline Prediction predict_rows(const LineModel& model, std::span<const FeatureRow> rows) {
  Prediction p;
  p.probability.reserve(rows.size());
  p.labels.reserve(rows.size());
  for (const FeatureRow& r : rows) {
    const double prob = probability(model, r);
    p.probability.push_back(prob);
    p.labels.push_back(prob > model.threshold ? 1 : 0);
  }
  return p;
}

/// Normalizes with the model's stored scales, then applies the model per sample.
inline Prediction predict(const LineModel& model, const UniformSeries& series) {
  if (series.unit() != unit_of(model.feature_set)) {
    throw Error(ErrorKind::UnitMismatch,
                "model expects " + std::string(to_string(model.feature_set)) +
                    " features, series is " + std::string(to_string(series.unit())));
  }
  const UniformSeries normalized = normalize(series, model.norm);
  return predict_rows(model, feature_rows(normalized));
}

/// Reference discomfort equations for the five Singapore rail lines
/// (Circle, North-South, North-East, East-West MRT and the LRT).
inline std::vector<LineModel> builtin_models() {
  struct Entry {
    const char* id;
    Coefficients b;
  };
  static constexpr Entry kTable[] = {
      {"Circle", {0.1728, 1.2064, -0.9458, -1.1528}},
      {"North-South", {-1.1764, -0.2396, -1.0849, -3.283}},
      {"North-East", {0.8223, 0.2607, -0.7349, -0.9995}},
      {"East-West", {-0.2867, 3.3714, 0.4978, 1.9170}},
      {"LRT", {-0.7117, 0.4723, -0.2185, -1.2651}},
  };
  std::vector<LineModel> out;
  for (const Entry& e : kTable) {
    LineModel m;
    m.line_id = e.id;
    m.b = e.b;
    m.normalization_unknown = true;
    out.push_back(std::move(m));
  }
  return out;
}

inline LineModel builtin_model(std::string_view line_id) {
  for (LineModel& m : builtin_models()) {
    if (m.line_id == line_id) return m;
  }
  throw Error(ErrorKind::UnknownLine, "no built-in model named '" + std::string(line_id) + "'");
}

}  // namespace ridecomfort
