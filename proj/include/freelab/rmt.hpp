#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freelab/equilibrium.hpp"
#include "freelab/potentials.hpp"

namespace freelab {

struct SamplerOptions {
  int chains = 1;
  // Sweeps discarded before recording; the proposal scale is tuned only during these.
  int burn_in = 500;
  // Eigenvalues are confined to [-box, box] when finite.
  double box = kInfinity;
};

// beta = 2 eigenvalue configurations. eigenvalue_sets holds the retained sweeps of chain 0,
// then chain 1, and so on; each set is sorted ascending.
struct EnsembleSample {
  int n = 0;
  std::string potential;
  int chains = 0;
  int sweeps = 0;
  std::vector<std::vector<double>> eigenvalue_sets;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
};

struct ConvergenceSeries {
  std::vector<int> n_values;
  std::vector<double> statistic;
  std::optional<double> target;
  std::string label;
};

// Seed of chain `index`: the (index + 1)-th output of splitmix64 started at `master`.
std::uint64_t chain_seed(std::uint64_t master, int index);

// 2 sum_{i<j} log|x_i - x_j| - n sum_i V(x_i), the log of the unnormalized joint density.
double ensemble_log_density(const Potential& v, std::span<const double> eigenvalues);

EnsembleSample sample_eigenvalues(const Potential& v, int n, int sweeps, std::uint64_t seed,
                                  const SamplerOptions& options = {});

// (1/N^2) S(sigma_N) + 1/2 log N minus 1/2 log(2 pi e), S the differential entropy of the
// Gaussian matrix density exp(-(N/2) Tr M^2) normalized, in the isometric real coordinates.
double gue_entropy_identity(int n);

enum class PressurePath { direct, thermodynamic_integration };

struct MicroPressure {
  double value = 0.0;
  double standard_error = 0.0;
  bool low_confidence = false;
  PressurePath path = PressurePath::direct;
};

struct MicroPressureOptions {
  PressurePath path = PressurePath::direct;
  int sweeps = 400;
  int chains = 2;
  int burn_in = 200;
  // Standard error above which a thermodynamic-integration estimate is flagged.
  double max_standard_error = 1e-2;
};

// (1/N^2) log of the matrix integral of exp(-N Tr V(M)) over self-adjoint M with spectrum in
// [-R, R], plus 1/2 log N. The direct path evaluates the eigenvalue integral by Heine's
// identity with orthogonal polynomials; the other path integrates from a quadratic reference.
MicroPressure micro_pressure_estimate(const Potential& v, double box, int n, std::uint64_t seed,
                                      const MicroPressureOptions& options = {});

// Logarithm of the integral over [-R, R]^N of prod_{i<j} |x_i - x_j|^2 exp(-N sum V(x_i)).
double log_eigenvalue_partition(const Potential& v, double box, int n);

// Minimum over random self-adjoint pairs of N Tr f(x) + N Tr g(y) - N Tr(xy).
double matrix_fenchel_young_check(const Potential& f, const Potential& g, int n, int trials,
                                  std::uint64_t seed);

struct EmpiricalComparison {
  // KS distance of the sweep-averaged empirical CDF to the equilibrium CDF.
  ConvergenceSeries ks;
  // Mean over sweeps of J_V(empirical) - J_V(equilibrium), diagonal excluded.
  ConvergenceSeries rate_surrogate;
};

// Samples must be ordered by increasing N. With require_matching the sample, potential and
// equilibrium descriptors must agree.
EmpiricalComparison empirical_vs_equilibrium(std::span<const EnsembleSample> samples,
                                             const EquilibriumResult& eq, const Potential& v,
                                             bool require_matching = true);

// (integral of e^{-f}) * (integral of e^{-g}) over the domains, the N = 1 Santalo product.
double classical_santalo_product(const Potential& f, const Potential& g);

}  // namespace freelab
