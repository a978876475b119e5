#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "freelab/errors.hpp"
#include "freelab/logpotential.hpp"

using namespace freelab;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

namespace {

constexpr double kPi = std::numbers::pi;

double semicircle_density(double x) { return std::abs(x) < 2 ? std::sqrt(4 - x * x) / (2 * kPi) : 0.0; }

// Double integral of log|x - y| p(x) p(y) for p(x) = 3/4 (1 - x^2) on [-1, 1], by nested
// quadrature with the inner log singularity placed at an endpoint.
double parabolic_log_energy_oracle() {
  const auto p = [](double x) { return 0.75 * (1 - x * x); };
  tanh_sinh<double> inner;
  const auto potential = [&](double x) {
    const auto f = [&](double y) { return std::log(std::abs(x - y)) * p(y); };
    return inner.integrate(f, -1.0, x) + inner.integrate(f, x, 1.0);
  };
  return gauss_kronrod<double, 61>::integrate([&](double x) { return potential(x) * p(x); }, -1.0,
                                               1.0, 10, 1e-13);
}

// Double integral of log(x^2 + xy + y^2) under sigma x sigma in polar coordinates, so the only
// singular point sits at rho = 0 where rho log rho is integrable.
double quartic_jacobian_oracle() {
  const auto angular = [](double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double reach = 2.0 / std::max(std::abs(c), std::abs(s));
    const double shape = std::log(1 + c * s);
    const auto radial = [&](double rho) {
      return rho * semicircle_density(rho * c) * semicircle_density(rho * s) *
             (2 * std::log(rho) + shape);
    };
    return tanh_sinh<double>().integrate(radial, 0.0, reach);
  };
  double total = 0.0;
  for (int k = 0; k < 8; ++k)
    total += gauss_kronrod<double, 61>::integrate(angular, k * kPi / 4, (k + 1) * kPi / 4, 12, 1e-12);
  return total;
}

// PV integral of p(x) / (t - x) by subtracting p(t), for the parabolic density.
double parabolic_hilbert_oracle(double t) {
  const auto p = [](double x) { return 0.75 * (1 - x * x); };
  const auto smooth = [&](double x) { return (p(x) - p(t)) / (t - x); };
  const double regular = gauss_kronrod<double, 61>::integrate(smooth, -1.0, 1.0, 10, 1e-14);
  return (regular + p(t) * std::log((t + 1) / (1 - t))) / kPi;
}

// Log energy of y = x^3 under sigma from the explicit image density, split at its singular
// point 0 and at the crossing y = x.
double cubed_semicircle_log_energy_oracle() {
  const auto density = [](double y) {
    if (y == 0.0) return 0.0;
    const double root = std::cbrt(y);
    return semicircle_density(root) / (3 * root * root);
  };
  tanh_sinh<double> quad;
  const auto potential = [&](double x) {
    const auto f = [&](double y) { return y == x ? 0.0 : std::log(std::abs(x - y)) * density(y); };
    double total = 0.0;
    const double lo = std::min(0.0, x);
    const double hi = std::max(0.0, x);
    total += quad.integrate(f, -8.0, lo) + quad.integrate(f, hi, 8.0);
    if (hi > lo) total += quad.integrate(f, lo, hi);
    return total;
  };
  const auto outer = [&](double x) { return potential(x) * density(x); };
  return quad.integrate(outer, -8.0, 0.0) + quad.integrate(outer, 0.0, 8.0);
}

}  // namespace

TEST(LogPotential, SemicircleAndArcsineConstants) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  EXPECT_NEAR(chi(sigma), 0.5 * std::log(2 * kPi * std::numbers::e), 1e-12);
  EXPECT_NEAR(log_energy(sigma).value, -0.25, 1e-12);
  EXPECT_NEAR(log_energy(make_arcsine(1.0)).value, -std::log(2.0), 1e-12);
  EXPECT_NEAR(relative_entropy_semicircular(sigma), 0.0, 1e-12);
}

TEST(LogPotential, ScalingOfTheEnergy) {
  for (double v : {0.25, 2.0, 9.0}) {
    const GridMeasure mu = make_semicircular(0.7, v);
    EXPECT_NEAR(log_energy(mu).value, 0.5 * std::log(v) - 0.25, 1e-11);
    EXPECT_NEAR(relative_entropy_semicircular(make_semicircular(0.0, v)),
                0.5 * v - 0.5 * std::log(v) - 0.5, 1e-11);
  }
  for (double r : {0.5, 3.0}) EXPECT_NEAR(log_energy(make_arcsine(r)).value, std::log(r / 2), 1e-11);
}

TEST(LogPotential, EnergyAgainstNestedQuadrature) {
  const double oracle = parabolic_log_energy_oracle();
  EXPECT_NEAR(oracle, -1.0568528194400535, 1e-12);  // frozen; equals log 2 - 7/4
  const GridMeasure mu =
      GridMeasure::from_density(-1.0, 1.0, [](double x) { return 0.75 * (1 - x * x); });
  EXPECT_NEAR(log_energy(mu).value, oracle, 1e-9);
}

TEST(LogPotential, PotentialOfTheSemicircle) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  for (double x : {-1.9, -1.0, 0.0, 0.3, 1.7}) EXPECT_NEAR(log_potential(sigma, x), x * x / 4 - 0.5, 1e-10);
  EXPECT_THROW(log_potential(sigma, 2.5), DomainError);
}

TEST(LogPotential, HilbertTransform) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  for (double t : {-1.5, 0.0, 0.7, 1.99}) EXPECT_NEAR(hilbert_transform(sigma, t), t / (2 * kPi), 1e-9);
  EXPECT_NEAR(hilbert_transform(sigma, 3.0), (3 - std::sqrt(5.0)) / (2 * kPi), 1e-10);

  const GridMeasure parabolic =
      GridMeasure::from_density(-1.0, 1.0, [](double x) { return 0.75 * (1 - x * x); });
  for (double t : {-0.8, -0.1, 0.45, 0.9})
    EXPECT_NEAR(hilbert_transform(parabolic, t), parabolic_hilbert_oracle(t), 1e-8) << t;
}

TEST(LogPotential, LogJacobianOfTheCube) {
  const double oracle = quartic_jacobian_oracle();
  EXPECT_NEAR(oracle, 0.2267912112512447, 1e-9);  // frozen
  EXPECT_NEAR(log_jacobian(make_semicircular(0.0, 1.0), make_quartic(0.25)), oracle, 1e-6);
}

TEST(LogPotential, LogJacobianMatchesChangeOfVariables) {
  const double pushed = cubed_semicircle_log_energy_oracle();
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  EXPECT_NEAR(log_jacobian(sigma, make_quartic(0.25)), pushed - log_energy(sigma).value, 2e-4);
}

TEST(LogPotential, LogJacobianOfQuadraticsAndFlatMaps) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  for (double c : {0.25, 1.0, 4.0}) EXPECT_NEAR(log_jacobian(sigma, make_quadratic(c)), std::log(c), 1e-12);
  EXPECT_EQ(log_jacobian(sigma, make_abs()), -std::numeric_limits<double>::infinity());
}

TEST(LogPotential, EulerLagrangeAndSchwingerDyson) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  const Potential half_square = make_quadratic(1.0);
  EXPECT_LT(euler_lagrange_residual(sigma, half_square), 1e-10);
  EXPECT_LT(schwinger_dyson_residual(sigma, half_square, default_schwinger_dyson_tests()), 1e-10);
  // Wrong potential: the residuals see it.
  EXPECT_GT(euler_lagrange_residual(sigma, make_quadratic(2.0)), 0.1);
  EXPECT_GT(schwinger_dyson_residual(sigma, make_quadratic(2.0), default_schwinger_dyson_tests()), 0.1);
}

TEST(LogPotential, ArcsineIsTheFreeEquilibriumOfTheInterval) {
  const GridMeasure arc = make_arcsine(1.0);
  EXPECT_LT(euler_lagrange_residual(arc, restrict_domain(make_polynomial({0.0}), -1.0, 1.0)), 1e-4);
  EXPECT_NEAR(chi(arc), -std::log(2.0) + 0.75 + 0.5 * std::log(2 * kPi), 1e-12);
  EXPECT_NEAR(hilbert_transform(make_semicircular(0.0, 1.0), 0.0), 0.0, 1e-15);
}

TEST(LogPotential, SchwingerDysonDefects) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  EXPECT_NEAR(schwinger_dyson_residual(sigma, make_quadratic(1.0), {{1.0}}), 0.0, 1e-14);
  EXPECT_LT(schwinger_dyson_residual(sigma, make_quadratic(1.0), {{0.0, 1.0}}), 1e-8);
  EXPECT_NEAR(schwinger_dyson_residual(sigma, make_quartic(0.25), {{0.0, 1.0}}), 1.0, 1e-10);
  EXPECT_GT(euler_lagrange_residual(sigma, make_quartic(0.25)), 0.1);
}

TEST(LogPotential, RelativeEntropies) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  EXPECT_NEAR(chi_rel(sigma, make_quadratic(1.0)), 0.5 * std::log(2 * kPi), 1e-12);
  EXPECT_NEAR(chi_rel(sigma, make_polynomial({0.0})), chi(sigma), 1e-14);
  for (double a : {-1.0, 0.5, 2.0})
    EXPECT_NEAR(chi_rel(translate(sigma, a), make_quadratic(1.0)), 0.5 * std::log(2 * kPi) - a * a / 2, 1e-11);
  EXPECT_GT(relative_entropy_semicircular(make_arcsine(2.0)), 0.0);
  const GridMeasure arc = make_arcsine(1.5);
  EXPECT_DOUBLE_EQ(chi_plus(translate(arc, 2.0)) - chi(translate(arc, 2.0)), 0.5 * std::log(kPi / 2) + 0.75);
}

TEST(LogPotential, ChiPlusOfMarchenkoPastur) {
  const GridMeasure mp = make_marchenko_pastur_family(1.0);
  EXPECT_NEAR(chi_plus(mp), std::log(kPi * std::numbers::e), 1e-8);
  EXPECT_NEAR(chi_plus(make_marchenko_pastur_family(2.0)), std::log(2 * kPi * std::numbers::e), 1e-8);
  EXPECT_THROW(chi_plus(make_semicircular(0.0, 1.0)), DomainError);
}

TEST(LogPotential, AtomicEnergyIsRejected) {
  EXPECT_THROW(log_energy(AtomicMeasure({0.0, 1.0}, {0.5, 0.5})), DomainError);
}
