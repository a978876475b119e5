#include "freelab/rmt.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "freelab/errors.hpp"
#include "freelab/format.hpp"
#include "freelab/inequalities.hpp"
#include "freelab/logpotential.hpp"
#include "freelab/numerics.hpp"
#include "freelab/parallel.hpp"

namespace freelab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTargetAcceptance = 0.4;
constexpr int kTuneWindow = 20;
constexpr double kCollapsedAcceptance = 0.01;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Evenly spaced start inside the domain, the box, and a unit-scale window.
std::vector<double> initial_configuration(const Potential& v, int n, double box) {
  double a = std::max({v.domain_lo(), -box, -2.0});
  double b = std::min({v.domain_hi(), box, 2.0});
  if (!(b > a)) {
    a = std::max(v.domain_lo(), -box);
    b = std::min({v.domain_hi(), box, a + 4.0});
  }
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("no admissible starting configuration for '" + v.label() + "'");
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a + (b - a) * (i + 1) / (n + 1);
  return x;
}

struct ChainOutput {
  std::vector<std::vector<double>> sets;
  long long accepted = 0;
  long long proposed = 0;
};

ChainOutput run_chain(const Potential& v, int n, int sweeps, int burn_in, double box,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<double> x = initial_configuration(v, n, box);
  std::vector<double> vx(n);
  for (int i = 0; i < n; ++i) vx[i] = v(x[i]);
  double scale = 1.0 / n;

  ChainOutput out;
  out.sets.reserve(sweeps);
  long long window_accepted = 0;
  long long window_proposed = 0;
  for (int sweep = 0; sweep < burn_in + sweeps; ++sweep) {
    const bool tuning = sweep < burn_in;
    for (int i = 0; i < n; ++i) {
      const double y = x[i] + scale * gauss(rng);
      const double u = uniform01(rng);
      if (std::abs(y) > box) {
        ++window_proposed;
        continue;
      }
      const double vy = v(y);
      ++window_proposed;
      if (!std::isfinite(vy)) continue;
      double delta = -n * (vy - vx[i]);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        delta += 2.0 * (std::log(std::abs(y - x[j])) - std::log(std::abs(x[i] - x[j])));
      }
      if (delta >= 0.0 || u < std::exp(delta)) {
        x[i] = y;
        vx[i] = vy;
        ++window_accepted;
      }
    }
    if (tuning) {
      if ((sweep + 1) % kTuneWindow == 0) {
        const double rate = static_cast<double>(window_accepted) / window_proposed;
        scale *= std::exp(2.0 * (rate - kTargetAcceptance));
        window_accepted = 0;
        window_proposed = 0;
      }
      if (sweep + 1 == burn_in) {
        window_accepted = 0;
        window_proposed = 0;
      }
      continue;
    }
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    out.sets.push_back(std::move(sorted));
  }
  out.accepted = window_accepted;
  out.proposed = window_proposed;
  return out;
}

double log_factorial(int k) { return std::lgamma(k + 1.0); }

// log of the Weyl constant relating Lebesgue measure on self-adjoint N x N matrices (in the
// isometric real coordinates) to prod |Delta|^2 on eigenvalues.
double log_weyl_constant(int n) {
  double value = 0.5 * n * (n - 1) * std::log(2.0 * kPi);
  for (int k = 1; k <= n; ++k) value -= log_factorial(k);
  return value;
}

double pressure_from_partition(double log_partition, int n) {
  const double n2 = static_cast<double>(n) * n;
  return (log_weyl_constant(n) + log_partition) / n2 + 0.5 * std::log(static_cast<double>(n));
}

double integrate_weight(const Potential& f, double lo, double hi) {
  std::vector<double> breaks;
  for (double k : f.kinks())
    if (k > lo && k < hi) breaks.push_back(k);
  return numerics::integrate([&](double x) { return std::exp(-f(x)); }, lo, hi, breaks, 1e-13);
}

// Interval outside which e^{-f} is negligible (relative 1e-30 below its value at the anchor).
std::pair<double, double> effective_domain(const Potential& f) {
  const double anchor = std::clamp(0.0, f.domain_lo(), f.domain_hi());
  const double base = f(anchor);
  auto reach = [&](double direction, double limit) {
    if (std::isfinite(limit)) return limit;
    double t = 1.0;
    while (t < 1e6 && f(anchor + direction * t) - base < 70.0) t *= 2.0;
    return anchor + direction * t;
  };
  return {reach(-1.0, f.domain_lo()), reach(1.0, f.domain_hi())};
}

}  // namespace

std::uint64_t chain_seed(std::uint64_t master, int index) {
  std::uint64_t state = master;
  std::uint64_t out = 0;
  for (int i = 0; i <= index; ++i) out = splitmix64(state);
  return out;
}

double ensemble_log_density(const Potential& v, std::span<const double> eigenvalues) {
  const auto n = static_cast<int>(eigenvalues.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total -= n * v(eigenvalues[i]);
    for (int j = i + 1; j < n; ++j) total += 2.0 * std::log(std::abs(eigenvalues[i] - eigenvalues[j]));
  }
  return total;
}

EnsembleSample sample_eigenvalues(const Potential& v, int n, int sweeps, std::uint64_t seed,
                                  const SamplerOptions& options) {
  if (n < 1 || n > 512) throw DomainError("matrix size must lie in [1, 512]");
  if (sweeps < 1 || options.chains < 1 || options.burn_in < kTuneWindow)
    throw DomainError("sampler needs sweeps >= 1, chains >= 1 and burn-in >= " +
                      std::to_string(kTuneWindow));
  if (!v.growth_ok() && !std::isfinite(options.box))
    throw PreconditionError("potential lacks the logarithmic growth certificate", v.label());

  std::vector<ChainOutput> chains(options.chains);
  parallel_for(options.chains, [&](int c) {
    chains[c] = run_chain(v, n, sweeps, options.burn_in, options.box, chain_seed(seed, c));
  });

  EnsembleSample sample;
  sample.n = n;
  sample.potential = v.label();
  sample.chains = options.chains;
  sample.sweeps = sweeps;
  sample.seed = seed;
  long long accepted = 0;
  long long proposed = 0;
  for (auto& chain : chains) {
    accepted += chain.accepted;
    proposed += chain.proposed;
    for (auto& set : chain.sets) sample.eigenvalue_sets.push_back(std::move(set));
  }
  sample.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposed);
  if (sample.acceptance_rate < kCollapsedAcceptance)
    throw SolverError("sampler acceptance collapsed to " + format_number(sample.acceptance_rate) +
                      " for '" + v.label() + "' at N=" + std::to_string(n));
  return sample;
}

double gue_entropy_identity(int n) {
  if (n < 1) throw DomainError("matrix size must be positive");
  const double nn = n;
  // Diagonal entries have variance 1/N. Real and imaginary parts off the diagonal have
  // variance 1/(2N); the isometry scales them by sqrt 2, adding log sqrt 2 each.
  const double diagonal = nn * 0.5 * std::log(2.0 * kPi * std::numbers::e / nn);
  const double off_diagonal =
      nn * (nn - 1.0) * (0.5 * std::log(2.0 * kPi * std::numbers::e / (2.0 * nn)) + 0.5 * std::log(2.0));
  const double entropy = diagonal + off_diagonal;
  return entropy / (nn * nn) + 0.5 * std::log(nn) - 0.5 * std::log(2.0 * kPi * std::numbers::e);
}

double log_eigenvalue_partition(const Potential& v, double box, int n) {
  if (n < 1) throw DomainError("matrix size must be positive");
  const double lo = std::max(v.domain_lo(), -box);
  const double hi = std::min(v.domain_hi(), box);
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("eigenvalue box must be a finite interval inside the domain");

  // Composite Gauss-Legendre grid, split at kinks.
  std::vector<double> cuts{lo};
  for (double k : v.kinks())
    if (k > lo && k < hi) cuts.push_back(k);
  cuts.push_back(hi);
  constexpr int kPanels = 128;
  constexpr int kPanelRule = 32;
  const auto& rule = numerics::gauss_legendre(kPanelRule);
  std::vector<double> xs;
  std::vector<double> log_w;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const int panels = std::max(4, static_cast<int>(kPanels * (cuts[s + 1] - cuts[s]) / (hi - lo)));
    const double width = (cuts[s + 1] - cuts[s]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = cuts[s] + (p + 0.5) * width;
      for (int k = 0; k < kPanelRule; ++k) {
        const double x = mid + 0.5 * width * rule.nodes[k];
        xs.push_back(x);
        log_w.push_back(std::log(0.5 * width * rule.weights[k]) - n * v(x));
      }
    }
  }
  const double shift = *std::max_element(log_w.begin(), log_w.end());
  const Eigen::Map<const Eigen::VectorXd> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
  Eigen::VectorXd w(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) w[i] = std::exp(log_w[i] - shift);

  // Stieltjes procedure with orthonormal polynomials: h_k = h_0 prod_{j<=k} beta_j^2.
  const double h0 = w.sum();
  Eigen::VectorXd previous = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd current = Eigen::VectorXd::Constant(x.size(), 1.0 / std::sqrt(h0));
  double log_h = std::log(h0);
  double total = log_h;
  double beta = 0.0;
  for (int k = 1; k < n; ++k) {
    const double alpha = (w.array() * x.array() * current.array().square()).sum();
    Eigen::VectorXd next = (x.array() - alpha) * current.array() - beta * previous.array();
    beta = std::sqrt((w.array() * next.array().square()).sum());
    if (!(beta > 0.0)) throw SolverError("orthogonal polynomial recurrence broke down");
    next /= beta;
    previous = std::move(current);
    current = std::move(next);
    log_h += 2.0 * std::log(beta);
    total += log_h;
  }
  return log_factorial(n) + total + n * shift;
}

MicroPressure micro_pressure_estimate(const Potential& v, double box, int n, std::uint64_t seed,
                                      const MicroPressureOptions& options) {
  if (n < 1 || n > 256) throw DomainError("matrix size must lie in [1, 256]");
  if (!(box > 0.0)) throw DomainError("box radius must be positive");
  MicroPressure result;
  result.path = options.path;
  if (options.path == PressurePath::direct) {
    result.value = pressure_from_partition(log_eigenvalue_partition(v, box, n), n);
    return result;
  }

  // Quadratic reference with the support width of the target equilibrium.
  SolverSettings coarse;
  coarse.nodes = 1025;
  coarse.tolerance = 1e-4;
  const EquilibriumResult eq = solve_equilibrium(v, coarse);
  const double width = eq.support_hi - eq.support_lo;
  const double stiffness = 16.0 / (width * width);
  const double center = 0.5 * (eq.support_lo + eq.support_hi);
  const Potential reference = shift_potential(make_quadratic(stiffness), -center);
  const double log_reference = log_eigenvalue_partition(reference, box, n);

  constexpr int kKnots = 16;
  constexpr int kBatches = 10;
  const auto& rule = numerics::gauss_legendre(kKnots);
  double integral = 0.0;
  double variance = 0.0;
  for (int k = 0; k < kKnots; ++k) {
    const double t = 0.5 * (1.0 + rule.nodes[k]);
    const Potential path = combine(v, reference, t);
    SamplerOptions sampler;
    sampler.chains = options.chains;
    sampler.burn_in = options.burn_in;
    sampler.box = box;
    const EnsembleSample sample =
        sample_eigenvalues(path, n, options.sweeps, chain_seed(seed, k), sampler);
    std::vector<double> defect;
    defect.reserve(sample.eigenvalue_sets.size());
    for (const auto& set : sample.eigenvalue_sets) {
      double sum = 0.0;
      for (double lambda : set) sum += v(lambda) - reference(lambda);
      defect.push_back(n * sum);
    }
    // Batch means for the standard error of the knot average.
    const int per_batch = std::max<int>(1, static_cast<int>(defect.size()) / kBatches);
    std::vector<double> batch_means;
    for (std::size_t start = 0; start + per_batch <= defect.size(); start += per_batch) {
      double s = 0.0;
      for (int i = 0; i < per_batch; ++i) s += defect[start + i];
      batch_means.push_back(s / per_batch);
    }
    double mean = 0.0;
    for (double d : batch_means) mean += d;
    mean /= static_cast<double>(batch_means.size());
    double spread = 0.0;
    for (double d : batch_means) spread += (d - mean) * (d - mean);
    const double batches = static_cast<double>(batch_means.size());
    const double knot_variance = batches > 1 ? spread / (batches - 1) / batches : 0.0;
    integral += 0.5 * rule.weights[k] * mean;
    variance += 0.25 * rule.weights[k] * rule.weights[k] * knot_variance;
  }
  const double n2 = static_cast<double>(n) * n;
  result.value = pressure_from_partition(log_reference - integral, n);
  result.standard_error = std::sqrt(variance) / n2;
  result.low_confidence = result.standard_error > options.max_standard_error;
  return result;
}

double matrix_fenchel_young_check(const Potential& f, const Potential& g, int n, int trials,
                                  std::uint64_t seed) {
  if (n < 1 || trials < 1) throw DomainError("need n >= 1 and trials >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  auto random_hermitian = [&] {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
      m(i, i) = sd * gauss(rng);
      for (int j = i + 1; j < n; ++j) {
        const std::complex<double> z(sd * gauss(rng) / std::sqrt(2.0), sd * gauss(rng) / std::sqrt(2.0));
        m(i, j) = z;
        m(j, i) = std::conj(z);
      }
    }
    return m;
  };

  struct Trial {
    Eigen::VectorXd spectrum_x;
    Eigen::VectorXd spectrum_y;
    double trace_xy;
  };
  std::vector<Trial> drawn;
  drawn.reserve(trials);
  double reach = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::MatrixXcd x = random_hermitian();
    const Eigen::MatrixXcd y = random_hermitian();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ex(x, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ey(y, Eigen::EigenvaluesOnly);
    drawn.push_back({ex.eigenvalues(), ey.eigenvalues(), (x * y).trace().real()});
    reach = std::max({reach, drawn.back().spectrum_x.cwiseAbs().maxCoeff(),
                      drawn.back().spectrum_y.cwiseAbs().maxCoeff()});
  }
  check_fenchel_young_lattice(f, g, 1.5 * reach);

  double worst = kInfinity;
  for (const Trial& trial : drawn) {
    double slack = -trial.trace_xy;
    for (int i = 0; i < n; ++i) slack += f(trial.spectrum_x[i]) + g(trial.spectrum_y[i]);
    worst = std::min(worst, n * slack);
  }
  return worst;
}

EmpiricalComparison empirical_vs_equilibrium(std::span<const EnsembleSample> samples,
                                             const EquilibriumResult& eq, const Potential& v,
                                             bool require_matching) {
  if (require_matching) {
    if (v.label() != eq.potential_label)
      throw PreconditionError("potential does not match the equilibrium",
                              v.label() + " vs " + eq.potential_label);
    for (const auto& sample : samples)
      if (sample.potential != eq.potential_label)
        throw PreconditionError("sample potential does not match the equilibrium",
                                sample.potential + " vs " + eq.potential_label);
  }
  EmpiricalComparison out;
  out.ks.label = "ks:" + eq.potential_label;
  out.ks.target = 0.0;
  out.rate_surrogate.label = "rate:" + eq.potential_label;
  out.rate_surrogate.target = 0.0;
  const GridMeasure& nu = eq.measure;
  const double equilibrium_rate =
      nu.integrate([&](double x) { return v(x); }) - log_energy(nu).value;

  for (const auto& sample : samples) {
    if (!out.ks.n_values.empty() && sample.n <= out.ks.n_values.back())
      throw DomainError("samples must be ordered by strictly increasing N");
    std::vector<double> pooled;
    pooled.reserve(sample.eigenvalue_sets.size() * static_cast<std::size_t>(sample.n));
    double rate = 0.0;
    const double n = sample.n;
    for (const auto& set : sample.eigenvalue_sets) {
      pooled.insert(pooled.end(), set.begin(), set.end());
      double potential_term = 0.0;
      double energy = 0.0;
      for (std::size_t i = 0; i < set.size(); ++i) {
        potential_term += v(set[i]);
        for (std::size_t j = i + 1; j < set.size(); ++j) energy += 2.0 * std::log(set[j] - set[i]);
      }
      rate += potential_term / n - energy / (n * n) - equilibrium_rate;
    }
    std::sort(pooled.begin(), pooled.end());
    const double total = static_cast<double>(pooled.size());
    double ks = 0.0;
    for (std::size_t k = 0; k < pooled.size(); ++k) {
      const double f = nu.cdf(pooled[k]);
      ks = std::max({ks, std::abs(f - k / total), std::abs(f - (k + 1) / total)});
    }
    out.ks.n_values.push_back(sample.n);
    out.ks.statistic.push_back(ks);
    out.rate_surrogate.n_values.push_back(sample.n);
    out.rate_surrogate.statistic.push_back(rate / static_cast<double>(sample.eigenvalue_sets.size()));
  }
  return out;
}

double classical_santalo_product(const Potential& f, const Potential& g) {
  const auto [f_lo, f_hi] = effective_domain(f);
  const auto [g_lo, g_hi] = effective_domain(g);
  return integrate_weight(f, f_lo, f_hi) * integrate_weight(g, g_lo, g_hi);
}

}  // namespace freelab
