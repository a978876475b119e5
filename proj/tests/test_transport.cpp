#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "freelab/errors.hpp"
#include "freelab/logpotential.hpp"
#include "freelab/transport.hpp"

using namespace freelab;

namespace {

constexpr double kPi = std::numbers::pi;

AtomicMeasure random_atoms(std::mt19937_64& rng, int max_atoms) {
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_real_distribution<double> location(-3.0, 3.0);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  const int n = count(rng);
  std::vector<double> xs(n);
  std::vector<double> ws(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    xs[i] = location(rng);
    ws[i] = mass(rng);
    total += ws[i];
  }
  std::sort(xs.begin(), xs.end());
  for (double& w : ws) w /= total;
  return AtomicMeasure(std::move(xs), std::move(ws));
}

std::vector<GridMeasure> probe_family() {
  return {make_semicircular(0.0, 1.0),          make_semicircular(0.4, 2.5),
          make_arcsine(1.0),                     make_arcsine(0.7, kDefaultNodes, -0.5),
          make_marchenko_pastur_family(1.0),     make_marchenko_pastur_family(0.3),
          translate(make_semicircular(0.0, 0.2), 1.5)};
}

}  // namespace

TEST(Transport, SemicircleExamples) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  EXPECT_EQ(w2(sigma, sigma).cost, 0.0);
  const TransportValue value = w2(make_semicircular(0.0, 4.0), make_semicircular(0.0, 0.25));
  EXPECT_NEAR(value.squared(), 2.25, 1e-10);
  EXPECT_EQ(value.descriptor, "comonotone");
  EXPECT_EQ(value.resolution, kQuantileGridSize);
  for (double a : {-1.5, 0.3, 2.0}) EXPECT_NEAR(w2(sigma, translate(sigma, a)).cost, std::abs(a), 1e-12);
}

TEST(Transport, OracleExamples) {
  EXPECT_NEAR(w2_atomic_oracle(AtomicMeasure({0.0}, {1.0}), AtomicMeasure({1.0}, {1.0})).cost, 1.0, 1e-15);
  const AtomicMeasure coin({0.0, 1.0}, {0.5, 0.5});
  const TransportValue same = w2_atomic_oracle(coin, coin);
  EXPECT_NEAR(same.cost, 0.0, 1e-15);
  EXPECT_EQ(same.descriptor, "lp-oracle");
  std::vector<double> many(9, 0.0);
  for (int i = 0; i < 9; ++i) many[i] = i;
  const AtomicMeasure nine(many, std::vector<double>(9, 1.0 / 9));
  EXPECT_THROW(w2_atomic_oracle(nine, coin), DomainError);
}

TEST(Transport, QuantileFormulaMatchesTheOracle) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const AtomicMeasure mu = random_atoms(rng, 6);
    const AtomicMeasure nu = random_atoms(rng, 6);
    const double formula = w2(mu, nu).squared();
    const double oracle = w2_atomic_oracle(mu, nu).squared();
    worst = std::max(worst, std::abs(formula - oracle));
  }
  EXPECT_LT(worst, 1e-12);
  // Five-atom pairs too, as the examples list them separately.
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> xs(5);
    std::vector<double> ys(5);
    std::uniform_real_distribution<double> location(-2.0, 2.0);
    for (int i = 0; i < 5; ++i) {
      xs[i] = location(rng);
      ys[i] = location(rng);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const AtomicMeasure mu(xs, std::vector<double>(5, 0.2));
    const AtomicMeasure nu(ys, std::vector<double>(5, 0.2));
    EXPECT_NEAR(w2(mu, nu).squared(), w2_atomic_oracle(mu, nu).squared(), 1e-12);
  }
}

TEST(Transport, QuantileQuadratureOracle) {
  // Independent: integrate (Q_mu - Q_nu)^2 with the closed-form semicircle quantile by bisection.
  const auto semicircle_quantile = [](double p) {
    double a = -2.0;
    double b = 2.0;
    for (int i = 0; i < 80; ++i) {
      const double m = 0.5 * (a + b);
      const double f = 0.5 + m * std::sqrt(4 - m * m) / (4 * kPi) + std::asin(m / 2) / kPi;
      (f < p ? a : b) = m;
    }
    return 0.5 * (a + b);
  };
  const GridMeasure arc = make_arcsine(1.0);
  const int steps = 20000;
  double oracle = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double p = (i + 0.5) / steps;
    const double d = semicircle_quantile(p) + std::cos(kPi * p);  // arcsine quantile is -cos(pi p)
    oracle += d * d / steps;
  }
  EXPECT_NEAR(w2(make_semicircular(0.0, 1.0), arc).squared(), oracle, 1e-7);
}

TEST(Transport, MaxCorrelation) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  EXPECT_NEAR(max_correlation(sigma, sigma), 1.0, 1e-12);
  EXPECT_NEAR(max_correlation(make_semicircular(0.0, 4.0), make_semicircular(0.0, 0.25)), 1.0, 1e-12);
  const GridMeasure shifted = make_semicircular(0.3, 1.0);
  EXPECT_NEAR(max_correlation(shifted, AtomicMeasure({2.0}, {1.0})), 0.6, 1e-12);
}

TEST(Transport, Polarization) {
  const std::vector<GridMeasure> family = probe_family();
  int pairs = 0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i; j < family.size(); ++j) {
      const QuantileSamples a = quantile_samples(family[i]);
      const QuantileSamples b = quantile_samples(family[j]);
      const double lhs = a.second_moment() + b.second_moment() - 2 * max_correlation(family[i], family[j]);
      EXPECT_NEAR(lhs, w2(family[i], family[j]).squared(), 1e-8) << i << "," << j;
      // Same identity with the measures' own moments.
      EXPECT_NEAR(moment(family[i], 2) + moment(family[j], 2) - 2 * max_correlation(family[i], family[j]),
                  w2(family[i], family[j]).squared(), 1e-8);
      ++pairs;
    }
  }
  EXPECT_GE(pairs, 20);
}

TEST(Transport, MetricAxiomsAndScaling) {
  const std::vector<GridMeasure> family = probe_family();
  for (const auto& a : family)
    for (const auto& b : family) {
      EXPECT_EQ(w2(a, b).cost, w2(b, a).cost);
      for (const auto& c : family) EXPECT_LE(w2(a, c).cost, w2(a, b).cost + w2(b, c).cost + 1e-8);
    }
  for (double s : {0.5, 2.0}) {
    const auto scale = [s](double x) { return s * x; };
    const auto slope = [s](double) { return s; };
    const GridMeasure& mu = family[1];
    const GridMeasure& nu = family[3];
    EXPECT_NEAR(w2(pushforward_monotone(mu, scale, slope), pushforward_monotone(nu, scale, slope)).cost,
                s * w2(mu, nu).cost, 1e-10);
  }
}

TEST(Transport, TranslationIdentity) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  EXPECT_LT(translation_identity_check(sigma, sigma, 1.0), 1e-6);
  EXPECT_NEAR(0.5 * w2(translate(sigma, 1.0), sigma).squared(), 0.5, 1e-12);
  EXPECT_LT(translation_identity_check(make_arcsine(1.0), sigma, 0.0), 1e-13);
  EXPECT_LT(translation_identity_check(make_arcsine(1.0), sigma, -0.7), 1e-6);

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> draw(-2.0, 2.0);
  const std::vector<GridMeasure> family = probe_family();
  std::uniform_int_distribution<std::size_t> pick(0, family.size() - 1);
  for (int probe = 0; probe < 10; ++probe)
    EXPECT_LT(translation_identity_check(family[pick(rng)], family[pick(rng)], draw(rng)), 1e-6);
}

TEST(Transport, SsftiFunctional) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  // 1/2 m2 - chi at the standard semicircle.
  EXPECT_NEAR(ssfti_functional(sigma, sigma), -0.5 * std::log(2 * kPi), 1e-12);

  for (double c : {0.5, 2.0}) {
    const GridMeasure mu = make_semicircular(0.0, c);
    const double at_optimum = ssfti_functional(mu, make_semicircular(0.0, 1.0 / c));
    for (const GridMeasure& probe : {make_semicircular(0.0, 1.0 / c * 1.2), make_semicircular(0.0, 1.0 / c * 0.8),
                                     make_arcsine(std::sqrt(2.0 / c)), sigma})
      EXPECT_LE(at_optimum, ssfti_functional(mu, probe) + 1e-9) << c;
  }
  // Translating nu leaves the value unchanged for centered mu.
  const GridMeasure narrow = make_semicircular(0.0, 0.1);
  EXPECT_NEAR(ssfti_functional(narrow, translate(sigma, 5.0)), ssfti_functional(narrow, sigma), 1e-9);
}
