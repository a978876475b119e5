#pragma once

#include <Eigen/Core>
#include <string>

#include "freelab/measures.hpp"

namespace freelab {

inline constexpr int kQuantileGridSize = 8192;

struct TransportValue {
  double cost = 0.0;
  // "comonotone" for the quantile formula, "lp-oracle" for the transportation simplex.
  std::string descriptor;
  int resolution = 0;

  double squared() const { return cost * cost; }
};

// Quantile function sampled on the shared Gauss-Legendre grid of (0, 1).
struct QuantileSamples {
  Eigen::VectorXd values;
  const Eigen::VectorXd& weights() const;

  double mean() const;
  double second_moment() const;
};

QuantileSamples quantile_samples(const GridMeasure& mu);

TransportValue w2(const GridMeasure& mu, const GridMeasure& nu);
TransportValue w2(const QuantileSamples& mu, const QuantileSamples& nu);
// Exact for step quantile functions: the unit interval is cut at both cumulative weight lists.
TransportValue w2(const AtomicMeasure& mu, const AtomicMeasure& nu);

// Optimal discrete plan by north-west corner start and MODI pivoting. At most 8 atoms a side.
TransportValue w2_atomic_oracle(const AtomicMeasure& mu, const AtomicMeasure& nu);

double max_correlation(const GridMeasure& mu, const GridMeasure& nu);
double max_correlation(const GridMeasure& mu, const AtomicMeasure& nu);

// |lhs - rhs| of 1/2 W2(mu_a, nu)^2 = 1/2 W2(mu, nu)^2 + a bar(mu) - a bar(nu) + a^2/2,
// barycenters taken on the same quantile grid.
double translation_identity_check(const GridMeasure& mu, const GridMeasure& nu, double a);

// 1/2 m2(nu) - chi(nu) - 1/2 W2(mu, nu)^2; minimized over nu by the moment-map equilibrium of mu.
double ssfti_functional(const GridMeasure& mu, const GridMeasure& nu);

}  // namespace freelab
