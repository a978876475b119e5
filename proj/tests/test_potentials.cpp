#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "freelab/errors.hpp"
#include "freelab/potentials.hpp"

using namespace freelab;

namespace {

// sup_x (x y - u(x)) by a fine scan of [-span, span] followed by golden-section refinement of
// the best cell; the objective is concave in x.
double sup_scan(const Potential& u, double y, double span = 40.0) {
  const auto objective = [&](double x) {
    const double v = u(x);
    return std::isinf(v) ? -std::numeric_limits<double>::infinity() : x * y - v;
  };
  constexpr int kSteps = 200000;
  const double h = 2 * span / kSteps;
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSteps; ++i) {
    const double v = objective(-span + h * i);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = -span + h * std::max(best - 1, 0);
  double b = -span + h * std::min(best + 1, kSteps);
  const double ratio = (std::sqrt(5.0) - 1) / 2;
  for (int iter = 0; iter < 100; ++iter) {
    const double c = b - ratio * (b - a);
    const double d = a + ratio * (b - a);
    (objective(c) > objective(d) ? b : a) = objective(c) > objective(d) ? d : c;
  }
  return std::max(best_value, objective(0.5 * (a + b)));
}

// min_y (u(y) + (y - x)^2 / (2 lambda)) by the same scan-and-refine scheme.
double inner_min(const Potential& u, double x, double lambda) {
  const Potential negated({.value = [&](double y) { return -(-u(y) - (y - x) * (y - x) / (2 * lambda)); },
                           .derivative = [](double) { return 0.0; },
                           .label = "oracle"});
  return -sup_scan(negated, 0.0);
}

}  // namespace

TEST(Potentials, Certificates) {
  EXPECT_TRUE(make_quadratic(1.0).is_convex());
  EXPECT_TRUE(make_quadratic(1.0).growth_ok());
  EXPECT_TRUE(make_abs().is_convex());
  EXPECT_TRUE(make_abs().growth_ok());
  EXPECT_TRUE(make_arcsine_potential(1.0).growth_ok());

  const Potential cubic = make_polynomial({0.0, 0.0, 0.0, 1.0});
  EXPECT_FALSE(cubic.is_convex());
  const Potential linear = make_polynomial({0.0, 1.0});
  EXPECT_TRUE(linear.is_convex());
  EXPECT_FALSE(linear.growth_ok());
  // Grows, but only like log|x|.
  const Potential logarithmic({.value = [](double x) { return std::log1p(x * x); },
                               .derivative = [](double x) { return 2 * x / (1 + x * x); },
                               .label = "log1p"});
  EXPECT_FALSE(logarithmic.growth_ok());
  EXPECT_FALSE(make_polynomial({0.0, 0.0, -1.0, 0.0, 1.0}).is_convex());
}

TEST(Potentials, LegendreFixedPointAndScaling) {
  const Potential half_square = legendre_transform(make_quadratic(1.0));
  for (double y : {-3.0, -0.4, 0.0, 1.1, 5.0}) EXPECT_NEAR(half_square(y), y * y / 2, 1e-10);

  for (double c : {0.3, 2.5}) {
    const Potential conjugate = legendre_transform(make_quadratic(c));
    for (double y : {-2.0, 0.5, 1.7}) {
      EXPECT_NEAR(conjugate(y), y * y / (2 * c), 1e-10);
      EXPECT_NEAR(conjugate(y), sup_scan(make_quadratic(c), y), 1e-9);
    }
  }
}

TEST(Potentials, LegendreOfTheQuarticAgainstSupScan) {
  const Potential quartic = make_quartic(0.25);
  const Potential conjugate = legendre_transform(quartic);
  for (double y : {-4.0, -1.0, -0.2, 0.0, 0.6, 2.5, 8.0}) {
    EXPECT_NEAR(conjugate(y), sup_scan(quartic, y), 1e-9) << y;
    // Closed form 3/4 |y|^{4/3}.
    EXPECT_NEAR(conjugate(y), 0.75 * std::pow(std::abs(y), 4.0 / 3.0), 1e-9) << y;
  }
  // (u*)' inverts u' = x^3.
  for (double x : {-1.3, 0.4, 2.0}) EXPECT_NEAR(conjugate.derivative(x * x * x), x, 1e-6);
}

TEST(Potentials, LegendreOfAbsIsTheIndicator) {
  const Potential indicator = legendre_transform(make_abs());
  for (double y : {-1.0, -0.5, 0.0, 0.99, 1.0}) EXPECT_NEAR(indicator(y), sup_scan(make_abs(), y), 1e-9);
  EXPECT_NEAR(indicator(0.3), 0.0, 1e-12);
  EXPECT_TRUE(std::isinf(indicator(1.01)));
  EXPECT_TRUE(std::isinf(indicator(-2.0)));
}

TEST(Potentials, FenchelYoungAndInvolution) {
  const Potential f = make_polynomial({0.0, 0.3, 0.5, 0.0, 0.1});
  const Potential g = legendre_transform(f);
  const Potential back = legendre_transform(g);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> draw(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double x = draw(rng);
    const double y = draw(rng);
    EXPECT_GE(f(x) + g(y) - x * y, -1e-9);
  }
  for (double x : {-2.0, -0.7, 0.0, 0.9, 2.2}) EXPECT_NEAR(back(x), f(x), 1e-6);
  EXPECT_TRUE(g.is_convex());
}

TEST(Potentials, LegendreRejectsInfinitePotential) {
  const Potential nowhere({.value = [](double) { return std::numeric_limits<double>::infinity(); },
                           .derivative = [](double) { return 0.0; },
                           .label = "inf"});
  EXPECT_THROW(legendre_transform(nowhere), DomainError);
}

TEST(Potentials, MoreauYosidaClosedFormAndOracle) {
  for (double lambda : {0.25, 1.0, 3.0}) {
    const Potential envelope = moreau_yosida(make_quadratic(1.0), lambda);
    for (double x : {-2.0, 0.0, 1.5}) {
      EXPECT_NEAR(envelope(x), x * x / (2 * (1 + lambda)), 1e-10);
      EXPECT_NEAR(envelope(x), inner_min(make_quadratic(1.0), x, lambda), 1e-9);
    }
  }
  const Potential huber = moreau_yosida(make_abs(), 1.0);
  EXPECT_NEAR(huber(0.0), 0.0, 1e-14);
  for (double x : {-3.0, -0.5, 0.2, 2.0}) {
    EXPECT_NEAR(huber(x), inner_min(make_abs(), x, 1.0), 1e-9);
    EXPECT_LE(huber(x), std::abs(x) + 1e-15);
  }
  EXPECT_TRUE(huber.is_convex());
}

TEST(Potentials, MoreauYosidaLimitAndLipschitzGradient) {
  const Potential quartic = make_quartic(0.25);
  EXPECT_NEAR(moreau_yosida(quartic, 1e-6)(1.3), quartic(1.3), 1e-4);
  const double lambda = 0.5;
  const Potential envelope = moreau_yosida(quartic, lambda);
  for (double x = -3.0; x < 3.0; x += 0.25) {
    const double y = x + 0.1;
    EXPECT_LE(std::abs(envelope.derivative(y) - envelope.derivative(x)), 0.1 / lambda + 1e-9);
    EXPECT_LE(envelope(x), quartic(x) + 1e-12);
  }
  EXPECT_THROW(moreau_yosida(make_polynomial({0.0, 0.0, -1.0, 0.0, 1.0}), 1.0), PreconditionError);
  EXPECT_THROW(moreau_yosida(quartic, 0.0), DomainError);
}

TEST(Potentials, ShiftAndTilt) {
  const Potential half_square = make_quadratic(1.0);
  for (double x : {-1.0, 0.0, 2.5}) {
    EXPECT_DOUBLE_EQ(shift_potential(half_square, 0.0)(x), x * x / 2);
    EXPECT_DOUBLE_EQ(shift_potential(half_square, 1.0)(x), (x + 1) * (x + 1) / 2);
    EXPECT_DOUBLE_EQ(tilt_linear(half_square, 0.0)(x), x * x / 2);
    EXPECT_DOUBLE_EQ(tilt_linear(half_square, 0.7)(x), x * x / 2 + 0.7 * x);
  }
  EXPECT_NEAR(tilt_linear(half_square, 0.7).derivative(-0.7), 0.0, 1e-15);

  const Potential arcsine = make_arcsine_potential(1.0);
  const Potential same = shift_potential(arcsine, 0.0);
  EXPECT_EQ(same.domain_lo(), arcsine.domain_lo());
  EXPECT_EQ(same.domain_hi(), arcsine.domain_hi());
  for (double x : {-0.9, 0.0, 0.5}) EXPECT_DOUBLE_EQ(same(x), arcsine(x));
  const Potential moved = shift_potential(arcsine, 0.5);
  EXPECT_DOUBLE_EQ(moved.domain_lo(), -1.5);
  EXPECT_DOUBLE_EQ(moved.domain_hi(), 0.5);

  EXPECT_TRUE(tilt_linear(make_quartic(0.25), 1.0).growth_ok());
  EXPECT_TRUE(tilt_linear(make_quartic(0.25), 1.0).is_convex());
}

TEST(Potentials, RestrictAndCombine) {
  const Potential restricted = restrict_domain(make_quadratic(1.0), -1.0, 2.0);
  EXPECT_TRUE(std::isinf(restricted(2.5)));
  EXPECT_DOUBLE_EQ(restricted(1.0), 0.5);
  const Potential mix = combine(make_quadratic(1.0), make_quartic(0.25), 0.25);
  for (double x : {-1.0, 0.3, 2.0}) EXPECT_NEAR(mix(x), 0.25 * x * x / 2 + 0.75 * std::pow(x, 4) / 4, 1e-14);
}
