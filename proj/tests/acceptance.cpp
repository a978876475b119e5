// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any line fails.
//
//   acceptance [manifest.csv]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "freelab/cli.hpp"
#include "freelab/equilibrium.hpp"
#include "freelab/inequalities.hpp"
#include "freelab/logpotential.hpp"
#include "freelab/rmt.hpp"
#include "freelab/specs.hpp"
#include "freelab/transport.hpp"
#include "support/particles.hpp"

using namespace freelab;

namespace {

constexpr double kPi = std::numbers::pi;
const double kHalfLogTwoPi = 0.5 * std::log(2 * kPi);

struct Line {
  bool pass = true;
  std::ostringstream detail;

  // Records one clause; a failing clause is marked in the detail text.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAILED]");
  }
};

std::string num(double x, int digits = 3) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.*g", digits, x);
  return buffer;
}

InequalityReport verify_with(InequalityKind kind, std::optional<GridMeasure> mu, std::optional<GridMeasure> nu,
                             std::optional<Potential> f, std::optional<Potential> g, double tolerance) {
  InequalityInputs inputs;
  inputs.mu = std::move(mu);
  inputs.nu = std::move(nu);
  inputs.f = std::move(f);
  inputs.g = std::move(g);
  return verify(kind, inputs, tolerance);
}

void entropy_constants(Line& line) {
  using Clock = std::chrono::steady_clock;
  auto start = Clock::now();
  const double chi_error = std::abs(chi(make_semicircular(0.0, 1.0, 4096)) - 0.5 * std::log(2 * kPi * std::numbers::e));
  const double chi_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  start = Clock::now();
  const double energy_error = std::abs(log_energy(make_arcsine(1.0, 4096)).value + std::log(2.0));
  const double energy_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  line.check(chi_error < 1e-5, "|chi(sigma) - 1/2 log(2 pi e)| = " + num(chi_error));
  line.check(energy_error < 1e-5, "|log_energy(arcsine) + log 2| = " + num(energy_error));
  line.check(chi_seconds < 5 && energy_seconds < 5,
             "times " + num(chi_seconds) + " s, " + num(energy_seconds) + " s (< 5 s each)");
}

void ssfti_equality_family(Line& line) {
  double worst_lhs = 0.0;
  double worst_deficit = 0.0;
  for (double s : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const InequalityReport r = verify_with(InequalityKind::ssfti, make_semicircular(0.0, s * s),
                                           make_semicircular(0.0, 1 / (s * s)), {}, {}, 1e-3);
    worst_lhs = std::max(worst_lhs, std::abs(r.lhs - std::pow(s - 1 / s, 2)));
    worst_deficit = std::max(worst_deficit, std::abs(r.deficit));
  }
  line.check(worst_lhs < 1e-3, "max |lhs - (s - 1/s)^2| = " + num(worst_lhs));
  line.check(worst_deficit < 1e-3, "max |deficit| = " + num(worst_deficit));
}

void barycenter_corrected(Line& line) {
  const GridMeasure sigma = make_semicircular(0.0, 1.0);
  const InequalityReport r = verify_with(InequalityKind::ssfti_general, translate(sigma, 1.0), translate(sigma, -1.0),
                                         {}, {}, 1e-3);
  line.check(std::abs(r.lhs - 4) < 1e-3 && std::abs(r.rhs - 4) < 1e-3,
             "lhs = " + num(r.lhs) + ", rhs = " + num(r.rhs));

  const std::vector<GridMeasure> family{make_semicircular(0.0, 1.0), make_semicircular(0.5, 2.0),
                                        make_arcsine(1.0),           make_arcsine(0.6, kDefaultNodes, 0.3),
                                        make_marchenko_pastur_family(1.0)};
  std::mt19937_64 rng(20240);
  std::uniform_int_distribution<std::size_t> pick(0, family.size() - 1);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  double worst = 0.0;
  for (int probe = 0; probe < 10; ++probe) {
    const GridMeasure& mu = family[pick(rng)];
    const GridMeasure& nu = family[pick(rng)];
    worst = std::max(worst, translation_identity_check(mu, nu, shift(rng)));
  }
  line.check(worst < 1e-6, "translation identity max defect " + num(worst) + " over 10 probes");
}

void inverse_free_lsi(Line& line) {
  double worst = 0.0;
  for (double c : {0.25, 1.0, 4.0}) {
    const InequalityReport r =
        verify_with(InequalityKind::inverse_free_lsi, {}, {}, make_quadratic(c), {}, 1e-3);
    worst = std::max(worst, std::abs(r.deficit));
  }
  line.check(worst < 1e-3, "quadratic max |deficit| = " + num(worst));
  const InequalityReport quartic =
      verify_with(InequalityKind::inverse_free_lsi, {}, {}, make_quartic(0.25), {}, 1e-6);
  line.check(quartic.pass && quartic.deficit > 0, "x^4/4 deficit " + num(quartic.deficit));
}

void free_santalo(Line& line) {
  const InequalityReport equality =
      verify_with(InequalityKind::free_santalo, {}, {}, make_quadratic(1.0), make_quadratic(1.0), 1e-3);
  line.check(std::abs(equality.lhs - std::log(2 * kPi)) < 1e-3,
             "|eta + eta - log 2 pi| = " + num(std::abs(equality.lhs - std::log(2 * kPi))));

  // theta * c x^2/2 + (1 - theta) * g x^4 paired with its Legendre transform.
  const std::vector<std::array<double, 3>> mixtures{
      {1.0, 0.25, 0.5}, {2.0, 1.0, 0.3},  {0.5, 0.5, 0.7}, {1.0, 2.0, 0.9}, {4.0, 0.1, 0.5},
      {0.25, 1.0, 0.2}, {1.5, 0.25, 0.8}, {3.0, 3.0, 0.4}, {1.0, 0.05, 0.6}, {0.8, 0.6, 0.1}};
  int passed = 0;
  double smallest = kInfinity;
  for (const auto& [c, g, theta] : mixtures) {
    const Potential f = combine(make_quadratic(c), make_quartic(g), theta);
    const InequalityReport r =
        verify_with(InequalityKind::free_santalo, {}, {}, f, legendre_transform(f), 1e-6);
    passed += r.pass ? 1 : 0;
    smallest = std::min(smallest, r.deficit);
  }
  line.check(passed == 10, std::to_string(passed) + "/10 conjugate pairs pass, min deficit " + num(smallest));

  const InequalityReport quadratic =
      verify_with(InequalityKind::inverse_santalo, {}, {}, make_quadratic(1.0), {}, 1e-6);
  const double expected = std::log(2 * kPi) - std::log(4.0);
  line.check(std::abs(quadratic.deficit - expected) < 1e-3,
             "inverse at quadratic |deficit - log(2 pi) + log 4| = " + num(std::abs(quadratic.deficit - expected)));
  const InequalityReport arcsine =
      verify_with(InequalityKind::inverse_santalo, {}, {}, make_arcsine_potential(1.0), {}, 1e-6);
  line.check(std::abs(arcsine.deficit) < 1e-3, "inverse at arcsine potential deficit " + num(arcsine.deficit, 6) +
                                                   " (eta + eta* = " + num(arcsine.lhs, 8) + ", log(pi^2/2) = " +
                                                   num(std::log(kPi * kPi / 2), 8) + ")");
}

double sup_difference(const Potential& a, const Potential& b, double lo, double hi) {
  double worst = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double x = lo + (hi - lo) * i / 4000;
    worst = std::max(worst, std::abs(a(x) - b(x)));
  }
  return worst;
}

void equilibrium_solver(Line& line) {
  const EquilibriumResult gaussian = solve_equilibrium(make_quadratic(1.0));
  const double ks = ks_distance(gaussian.measure, make_semicircular(0.0, 1.0));
  line.check(gaussian.el_residual < 1e-5 && ks < 1e-8,
             "quadratic EL residual " + num(gaussian.el_residual) + ", KS to sigma " + num(ks));

  const EquilibriumResult quartic = solve_equilibrium(make_quartic(0.25));
  const double oracle = testing::particle_edge_oracle();
  const double raw = testing::quartic_particles(400).maxCoeff();
  const double edge_error =
      std::max(std::abs(quartic.support_hi - oracle), std::abs(quartic.support_lo + oracle));
  line.check(edge_error < 1e-3, "quartic edge vs particle oracle (N = 100..800, extrapolated) " + num(edge_error) +
                                    "; largest of 400 particles alone is " + num(quartic.support_hi - raw) +
                                    " inside");

  double shift_error = 0.0;
  for (const auto& [u, z] : {std::pair{make_quadratic(1.0), 1.3}, std::pair{make_quartic(0.25), -0.8}})
    shift_error = std::max(shift_error, std::abs(free_pressure(shift_potential(u, z)) - free_pressure(u)));
  line.check(shift_error < 1e-6, "shift invariance " + num(shift_error));

  const std::vector<std::pair<Potential, Potential>> pairs{
      {make_quadratic(1.0), make_quadratic(1.2)},
      {make_quadratic(1.0), make_polynomial({0.0, 0.0, 0.5, 0.0, 0.05})},
      {make_quartic(0.25), tilt_linear(make_quartic(0.25), 0.2)}};
  double lipschitz_slack = kInfinity;
  for (const auto& [a, b] : pairs) {
    const EquilibriumResult ea = solve_equilibrium(a);
    const EquilibriumResult eb = solve_equilibrium(b);
    const double sup = sup_difference(a, b, std::min(ea.support_lo, eb.support_lo), std::max(ea.support_hi, eb.support_hi));
    lipschitz_slack = std::min(lipschitz_slack, sup - std::abs(ea.pressure - eb.pressure));
  }
  const Potential h1 = make_quadratic(0.5);
  const Potential h2 = make_quartic(0.25);
  const double p1 = free_pressure(h1);
  const double p2 = free_pressure(h2);
  double convexity_slack = kInfinity;
  for (double theta : {0.25, 0.5, 0.75})
    convexity_slack =
        std::min(convexity_slack, theta * p1 + (1 - theta) * p2 - free_pressure(combine(h1, h2, theta)));
  line.check(lipschitz_slack >= -1e-9 && convexity_slack >= -1e-9,
             "Lipschitz slack " + num(lipschitz_slack) + ", convexity slack " + num(convexity_slack));
}

AtomicMeasure random_atoms(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 8);
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

void transport_oracle(Line& line) {
  std::mt19937_64 rng(777);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const AtomicMeasure mu = random_atoms(rng);
    const AtomicMeasure nu = random_atoms(rng);
    worst = std::max(worst, std::abs(w2(mu, nu).squared() - w2_atomic_oracle(mu, nu).squared()));
  }
  line.check(worst < 1e-12, "quantile vs LP oracle max gap " + num(worst) + " on 50 pairs");

  const std::vector<GridMeasure> family{make_semicircular(0.0, 1.0),        make_semicircular(0.4, 2.5),
                                        make_arcsine(1.0),                  make_arcsine(0.7, kDefaultNodes, -0.5),
                                        make_marchenko_pastur_family(1.0), make_marchenko_pastur_family(0.3)};
  double polarization = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = i; j < family.size(); ++j, ++pairs)
      polarization = std::max(
          polarization, std::abs(moment(family[i], 2) + moment(family[j], 2) -
                                 2 * max_correlation(family[i], family[j]) - w2(family[i], family[j]).squared()));
  line.check(pairs >= 20 && polarization < 1e-8,
             "polarization max defect " + num(polarization) + " on " + std::to_string(pairs) + " pairs");
}

void rmt_suite(Line& line) {
  double gue = 0.0;
  for (int n : {1, 7, 128}) gue = std::max(gue, std::abs(gue_entropy_identity(n)));
  line.check(gue < 1e-12, "GUE identity max defect " + num(gue));

  MicroPressureOptions ti;
  ti.path = PressurePath::thermodynamic_integration;
  const std::vector<int> ns{8, 16, 32, 64};
  const std::vector<double> bounds{0.15, 0.08, 0.05, 0.03};
  bool within = true;
  std::string distances;
  double previous = kInfinity;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const MicroPressure p = micro_pressure_estimate(make_quadratic(1.0), 4.0, ns[i], 7, ti);
    const double distance = std::abs(p.value - kHalfLogTwoPi);
    within = within && distance < bounds[i] && distance <= previous + 1e-12;
    previous = distance;
    distances += (distances.empty() ? "" : ", ") + num(distance);
  }
  line.check(within, "micro-pressure distances " + distances + " (bounds 0.15, 0.08, 0.05, 0.03, monotone)");

  const double slack = matrix_fenchel_young_check(make_quadratic(1.0), make_quadratic(1.0), 8, 1000, 1);
  line.check(slack >= -1e-10, "matrix Fenchel-Young min slack " + num(slack) + " over 1000 trials");

  const Potential v = make_quadratic(1.0);
  const EquilibriumResult eq = solve_equilibrium(v);
  SamplerOptions options;
  options.chains = 8;
  const EnsembleSample pooled = sample_eigenvalues(v, 64, 400, 11, options);
  double mean_ks = 0.0;
  const std::size_t per_chain = pooled.eigenvalue_sets.size() / options.chains;
  for (int c = 0; c < options.chains; ++c) {
    EnsembleSample chain = pooled;
    chain.chains = 1;
    chain.eigenvalue_sets.assign(pooled.eigenvalue_sets.begin() + c * per_chain,
                                 pooled.eigenvalue_sets.begin() + (c + 1) * per_chain);
    const std::vector<EnsembleSample> one{chain};
    mean_ks += empirical_vs_equilibrium(one, eq, v).ks.statistic.front() / options.chains;
  }
  const std::vector<EnsembleSample> all{pooled};
  const double pooled_ks = empirical_vs_equilibrium(all, eq, v).ks.statistic.front();
  line.check(mean_ks < 0.08, "N = 64 KS mean over 8 chains " + num(mean_ks) + " (pooled " + num(pooled_ks) + ")");
}

void inequality_sweep(Line& line, const std::string& manifest) {
  std::ifstream in(manifest);
  std::set<std::string> kinds;
  int rows = 0;
  std::string text;
  bool header = true;
  while (std::getline(in, text)) {
    if (text.empty() || text[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    ++rows;
    kinds.insert(text.substr(0, text.find(',')));
  }
  line.check(rows >= 40 && kinds.size() == std::size(kAllInequalityKinds),
             std::to_string(rows) + " manifest lines, " + std::to_string(kinds.size()) + " kinds");

  std::vector<std::string> args{"freelab", "verify-suite", "--manifest", manifest, "--summary", "/dev/null"};
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_command_line(static_cast<int>(argv.size()), argv.data(), out, err);
  std::string summary = out.str();
  summary = summary.substr(0, summary.find('\n'));
  line.check(code == kExitOk && summary.find(" 0 failed") != std::string::npos,
             "exit " + std::to_string(code) + ", " + summary);
  if (!err.str().empty()) std::fprintf(stderr, "%s", err.str().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string manifest = argc > 1 ? argv[1] : FREELAB_DEFAULT_MANIFEST;
  struct Criterion {
    const char* title;
    double budget_seconds;
    std::function<void(Line&)> body;
  };
  const std::vector<Criterion> criteria{
      {"entropy constants", 0, entropy_constants},
      {"SSFTI equality family", 10, ssfti_equality_family},
      {"barycenter-corrected SSFTI", 0, barycenter_corrected},
      {"inverse free LSI", 20, inverse_free_lsi},
      {"free Santalo and inverse Santalo", 0, free_santalo},
      {"equilibrium solver", 60, equilibrium_solver},
      {"transport oracle equivalence", 0, transport_oracle},
      {"random-matrix suite", 300, rmt_suite},
      {"inequality sweep", 0, [&](Line& line) { inequality_sweep(line, manifest); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Line line;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].body(line);
    } catch (const std::exception& e) {
      line.check(false, std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].budget_seconds > 0)
      line.check(seconds < criteria[i].budget_seconds,
                 "runtime under " + num(criteria[i].budget_seconds) + " s");
    failed += line.pass ? 0 : 1;
    std::printf("%s %zu %s: %s (%.1f s)\n", line.pass ? "PASS" : "FAIL", i + 1, criteria[i].title,
                line.detail.str().c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
