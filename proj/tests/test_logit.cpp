#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "ridecomfort/logit.hpp"

using namespace ridecomfort;

namespace {

// Reference values from tests/oracles/sigmoid_fixture.py (50-digit arithmetic).
constexpr double kCircleP0 = 0.23997802330126128;
constexpr double kEastWestP0 = 0.87180352107200945;

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::Io;
}

LabeledDataset random_dataset(std::mt19937_64& gen, std::size_t n, const Coefficients& truth) {
  std::uniform_real_distribution<double> x(-1.0, 1.0), u(0.0, 1.0);
  LabeledDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const FeatureRow r{x(gen), x(gen), x(gen)};
    d.features.push_back(r);
    d.labels.push_back(u(gen) < sigmoid(z_value(truth, r)) ? 1 : 0);
  }
  return d;
}

// Inverse Fisher information at the truth, via Eigen (independent of the
// trainer's own elimination routine).
Eigen::Matrix4d inverse_fisher(const LabeledDataset& d, const Coefficients& b) {
  Eigen::Matrix4d info = Eigen::Matrix4d::Zero();
  for (const FeatureRow& r : d.features) {
    const Eigen::Vector4d x(r[0], r[1], r[2], 1.0);
    const double p = 1.0 / (1.0 + std::exp(-(x.dot(Eigen::Vector4d(b[0], b[1], b[2], b[3])))));
    info += p * (1 - p) * x * x.transpose();
  }
  return info.inverse();
}

const Coefficients kTruth{0.5, 2.0, -1.0, -2.0};

LineModel circle() { return builtin_model("Circle"); }

}  // namespace

TEST(ZValue, CircleInterceptAndSum) {
  EXPECT_DOUBLE_EQ(z_value(circle(), {0, 0, 0}), -1.1528);
  EXPECT_NEAR(z_value(circle(), {1, 1, 1}), -0.7194, 1e-12);
}

TEST(ZValue, ConstructedCancellation) {
  LineModel m;
  m.b = {2.0, -1.0, 0.5, -3.0};
  EXPECT_NEAR(z_value(m, {1.0, 0.0, 2.0}), 0.0, 1e-15);  // 2 + 1 - 3
}

TEST(Probability, TableValues) {
  LineModel m;
  m.b = {1.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(probability(m, {0, 0, 0}), 0.5);
  EXPECT_NEAR(probability(circle(), {0, 0, 0}), kCircleP0, 1e-15);
  EXPECT_NEAR(probability(builtin_model("East-West"), {0, 0, 0}), kEastWestP0, 1e-15);
  EXPECT_NEAR(probability(circle(), {0, 0, 0}), 0.2400, 1e-4);
  EXPECT_NEAR(probability(builtin_model("East-West"), {0, 0, 0}), 0.8718, 1e-4);
}

TEST(SigmoidProperty, SymmetricMonotoneAndStable) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> z(-40, 40);
  for (int i = 0; i < 1000; ++i) {
    const double a = z(gen), b = z(gen);
    EXPECT_NEAR(sigmoid(a) + sigmoid(-a), 1.0, 1e-12);
    if (a < b) {
      EXPECT_LE(sigmoid(a), sigmoid(b));
    }
  }
  EXPECT_GT(sigmoid(-700.0), 0.0);
  EXPECT_LT(sigmoid(-30.0), sigmoid(-29.0));
  EXPECT_TRUE(std::isfinite(sigmoid(1e6)));
  EXPECT_TRUE(std::isfinite(sigmoid(-1e6)));
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
}

TEST(Builtins, TableCoefficients) {
  const auto all = builtin_models();
  ASSERT_EQ(all.size(), 5u);
  EXPECT_EQ(builtin_model("East-West").b, (Coefficients{-0.2867, 3.3714, 0.4978, 1.9170}));
  EXPECT_EQ(builtin_model("LRT").b, (Coefficients{-0.7117, 0.4723, -0.2185, -1.2651}));
  EXPECT_EQ(builtin_model("North-South").b, (Coefficients{-1.1764, -0.2396, -1.0849, -3.283}));
  EXPECT_EQ(builtin_model("North-East").b, (Coefficients{0.8223, 0.2607, -0.7349, -0.9995}));
  for (const auto& m : all) {
    EXPECT_TRUE(m.normalization_unknown);
    EXPECT_EQ(m.norm, NormalizationParams{});
  }
  EXPECT_EQ(dominant_axis(builtin_model("East-West")), Axis::Y);
  EXPECT_EQ(kind_of([] { builtin_model("Downtown"); }), ErrorKind::UnknownLine);
}

TEST(Solve4, AgreesWithEigen) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> d;
  for (int t = 0; t < 100; ++t) {
    std::array<std::array<double, 4>, 4> a{};
    std::array<double, 4> rhs{};
    Eigen::Matrix4d A;
    Eigen::Vector4d B;
    for (int i = 0; i < 4; ++i) {
      rhs[i] = B(i) = d(gen);
      for (int j = 0; j < 4; ++j) a[i][j] = A(i, j) = d(gen);
    }
    const auto x = detail::solve4(a, rhs);
    ASSERT_TRUE(x.has_value());
    const Eigen::Vector4d ref = A.partialPivLu().solve(B);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR((*x)[i], ref(i), 1e-8 * (1 + std::abs(ref(i))));
  }
  std::array<std::array<double, 4>, 4> singular{};
  singular[0] = {1, 2, 3, 4};
  singular[1] = {2, 4, 6, 8};
  singular[2] = {0, 1, 0, 0};
  singular[3] = {0, 0, 1, 0};
  EXPECT_FALSE(detail::solve4(singular, {1, 1, 1, 1}).has_value());
}

TEST(GradientProperty, MatchesCentralDifferences) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> coef(0.0, 1.5);
  for (int ds = 0; ds < 5; ++ds) {
    const LabeledDataset d = random_dataset(gen, 200, kTruth);
    for (double ridge : {0.0, 0.7}) {
      const LogisticObjective obj(d.features, d.labels, ridge);
      for (int p = 0; p < 20; ++p) {
        const Coefficients b{coef(gen), coef(gen), coef(gen), coef(gen)};
        const auto g = obj.gradient(b);
        double diff = 0.0, norm = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
          Coefficients hi = b, lo = b;
          hi[j] += 1e-5;
          lo[j] -= 1e-5;
          const double fd = (obj.value(hi) - obj.value(lo)) / 2e-5;
          diff += (g[j] - fd) * (g[j] - fd);
          norm += g[j] * g[j];
        }
        EXPECT_LE(std::sqrt(diff) / std::max(1.0, std::sqrt(norm)), 1e-6);
      }
    }
  }
}

TEST(Fit, RecoversKnownCoefficients) {
  std::mt19937_64 gen(20000);
  const LabeledDataset d = random_dataset(gen, 20000, kTruth);
  FitTrace trace;
  const LineModel m = fit(d, FitConfig{}, "synthetic", &trace);
  const Eigen::Matrix4d cov = inverse_fisher(d, kTruth);
  for (int j = 0; j < 4; ++j) {
    const double se = std::sqrt(cov(j, j));
    EXPECT_LE(std::abs(m.b[j] - kTruth[j]), 3 * se) << "b" << j + 1 << " se " << se;
    EXPECT_LE(std::abs(m.b[j] - kTruth[j]), 0.1) << "b" << j + 1;
    std::printf("b%d = %.4f (truth %.1f, se %.4f)\n", j + 1, m.b[j], kTruth[j], se);
  }
  EXPECT_TRUE(m.train_meta.converged);
  EXPECT_EQ(m.train_meta.n_samples, 20000u);
  EXPECT_EQ(m.train_meta.n_positive, d.positives());
  EXPECT_LE(m.train_meta.iterations, 25);

  // predicting on the training set with threshold 0.5
  const Prediction p = predict_rows(m, d.features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.size(); ++i) hits += p.labels[i] == d.labels[i];
  EXPECT_GE(static_cast<double>(hits) / d.size(), 0.80);
}

TEST(Fit, MonotoneTraceAndFastConvergence) {
  std::mt19937_64 gen(31);
  for (int t = 0; t < 10; ++t) {
    const LabeledDataset d = random_dataset(gen, 500 + 300 * t, kTruth);
    for (double ridge : {0.0, 0.5}) {
      FitConfig cfg;
      cfg.ridge = ridge;
      FitTrace trace;
      const LineModel m = fit(d, cfg, "x", &trace);
      ASSERT_FALSE(trace.empty());
      const LogisticObjective obj(d.features, d.labels, ridge);
      double prev = obj.value({0, 0, 0, std::log(double(d.positives()) / (d.size() - d.positives()))});
      for (const auto& it : trace) {
        EXPECT_GE(it.penalized_log_likelihood, prev);
        prev = it.penalized_log_likelihood;
      }
      EXPECT_TRUE(m.train_meta.converged);
      EXPECT_LE(m.train_meta.iterations, 25);
    }
  }
}

TEST(Fit, GradientVanishesAtOptimum) {
  std::mt19937_64 gen(8);
  const LabeledDataset d = random_dataset(gen, 3000, kTruth);
  const LineModel m = fit(d, FitConfig{}, "x");
  const auto g = LogisticObjective(d.features, d.labels).gradient(m.b);
  for (double v : g) EXPECT_LT(std::abs(v), 1e-6 * d.size());
}

TEST(Fit, AntisymmetricDataHasZeroIntercept) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> x(-1.0, 1.0), u(0, 1);
  LabeledDataset d;
  for (int i = 0; i < 400; ++i) {
    const FeatureRow r{x(gen), x(gen), x(gen)};
    // noisy labels so the classes overlap; the mirrored row gets the opposite label
    const std::uint8_t y = u(gen) < sigmoid(2 * r[0] - r[2]) ? 1 : 0;
    d.features.push_back(r);
    d.labels.push_back(y);
    d.features.push_back({-r[0], -r[1], -r[2]});
    d.labels.push_back(1 - y);
  }
  const LineModel m = fit(d, FitConfig{}, "sym");
  EXPECT_NEAR(m.b[3], 0.0, 1e-8);
}

TEST(Fit, RowOrderInvariance) {
  std::mt19937_64 gen(44);
  LabeledDataset d = random_dataset(gen, 5000, kTruth);
  const LineModel a = fit(d, FitConfig{}, "x");
  std::vector<std::size_t> perm(d.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  LabeledDataset p = d;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    p.features[i] = d.features[perm[i]];
    p.labels[i] = d.labels[perm[i]];
  }
  const LineModel b = fit(p, FitConfig{}, "x");
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(a.b[j], b.b[j], 1e-9);
}

TEST(Fit, AffineAbsorption) {
  std::mt19937_64 gen(45);
  const LabeledDataset d = random_dataset(gen, 4000, kTruth);
  const LineModel a = fit(d, FitConfig{}, "x");
  for (std::size_t col = 0; col < 3; ++col) {
    const double c = 2.5;
    LabeledDataset s = d;
    for (auto& r : s.features) r[col] *= c;
    const LineModel b = fit(s, FitConfig{}, "x");
    EXPECT_NEAR(b.b[col], a.b[col] / c, 1e-8);
    for (std::size_t i = 0; i < d.size(); i += 37) {
      EXPECT_NEAR(probability(a, d.features[i]), probability(b, s.features[i]), 1e-8);
    }
  }
}

TEST(Fit, PositiveWeightEqualsDuplication) {
  std::mt19937_64 gen(46);
  const LabeledDataset d = random_dataset(gen, 2000, kTruth);
  FitConfig weighted;
  weighted.positive_weight = 2.0;
  LabeledDataset dup = d;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i]) {
      dup.features.push_back(d.features[i]);
      dup.labels.push_back(1);
    }
  }
  const LineModel a = fit(d, weighted, "w");
  const LineModel b = fit(dup, FitConfig{}, "w");
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(a.b[j], b.b[j], 1e-7);
}

TEST(Fit, Errors) {
  std::mt19937_64 gen(5);
  LabeledDataset ones = random_dataset(gen, 50, kTruth);
  std::fill(ones.labels.begin(), ones.labels.end(), 1);
  EXPECT_EQ(kind_of([&] { fit(ones, FitConfig{}, "x"); }), ErrorKind::DegenerateLabels);

  LabeledDataset tiny = random_dataset(gen, 9, kTruth);
  tiny.labels[0] = 0;
  tiny.labels[1] = 1;
  EXPECT_EQ(kind_of([&] { fit(tiny, FitConfig{}, "x"); }), ErrorKind::DegenerateLabels);

  // completely separated on the x feature
  LabeledDataset sep = random_dataset(gen, 200, kTruth);
  for (std::size_t i = 0; i < sep.size(); ++i) sep.labels[i] = sep.features[i][0] > 0.1 ? 1 : 0;
  EXPECT_EQ(kind_of([&] { fit(sep, FitConfig{}, "x"); }), ErrorKind::SeparationDetected);
  FitConfig ridge;
  ridge.ridge = 1.0;
  const LineModel m = fit(sep, ridge, "x");
  EXPECT_GT(m.b[0], 0.0);
  EXPECT_LT(std::hypot(m.b[0], m.b[1], m.b[2]), 1e3);

  // an all-zero feature column makes the Newton system singular
  LabeledDataset flat = random_dataset(gen, 200, kTruth);
  for (auto& r : flat.features) r[2] = 0.0;
  EXPECT_EQ(kind_of([&] { fit(flat, FitConfig{}, "x"); }), ErrorKind::NumericalFailure);
}

TEST(Predict, CircleOnZeroInput) {
  const std::size_t n = 50;
  const UniformSeries s(0, 50, Channel(n, 0.0), Channel(n, 0.0), Channel(n, 0.0),
                        UnitTag::Acceleration);
  const Prediction p = predict(circle(), s);
  ASSERT_EQ(p.probability.size(), n);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(p.probability[i], kCircleP0, 1e-15);
    EXPECT_EQ(p.labels[i], 0);
  }
}

TEST(Predict, ThresholdNearOneGivesNoPositives) {
  LineModel m = builtin_model("East-West");
  m.threshold = 1.0 - 1e-9;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> v(-3.0, 3.0);
  Channel x(500), y(500), z(500);
  for (std::size_t i = 0; i < 500; ++i) x[i] = v(gen), y[i] = v(gen), z[i] = v(gen);
  const Prediction p = predict(m, UniformSeries(0, 50, x, y, z, UnitTag::Acceleration));
  EXPECT_EQ(std::accumulate(p.labels.begin(), p.labels.end(), 0), 0);
}

TEST(Predict, UnitMismatch) {
  const UniformSeries s(0, 50, {0, 1, 2}, {0, 1, 2}, {0, 1, 2}, UnitTag::Jerk);
  EXPECT_EQ(kind_of([&] { predict(circle(), s); }), ErrorKind::UnitMismatch);
}
