#pragma once

#include <vector>

#include "freelab/measures.hpp"
#include "freelab/potentials.hpp"

namespace freelab {

struct EnergyValue {
  double value = 0.0;
  double quadrature_error_estimate = 0.0;
};

// Double integral of log|x - y|. Atomic measures have energy -inf and are rejected.
EnergyValue log_energy(const GridMeasure& mu);
EnergyValue log_energy(const AtomicMeasure& mu);

// Logarithmic potential x -> integral of log|x - y| dmu(y), for x on the support.
double log_potential(const GridMeasure& mu, double x);

double chi(const GridMeasure& mu);
double chi_rel(const GridMeasure& mu, const Potential& u);
double chi_plus(const GridMeasure& mu);
double relative_entropy_semicircular(const GridMeasure& mu);

// (1/pi) PV integral of dmu(x) / (t - x). Evaluation at a support endpoint is an error.
double hilbert_transform(const GridMeasure& mu, double t);

// Double integral of log((u'(x) - u'(y)) / (x - y)); -inf when u' is constant on a
// set of positive mass.
double log_jacobian(const GridMeasure& rho, const Potential& u);

double euler_lagrange_residual(const GridMeasure& mu, const Potential& u);

// Polynomials as coefficient lists, lowest degree first.
using Polynomial = std::vector<double>;
double schwinger_dyson_residual(const GridMeasure& mu, const Potential& u,
                                const std::vector<Polynomial>& test_functions);
std::vector<Polynomial> default_schwinger_dyson_tests();

}  // namespace freelab
