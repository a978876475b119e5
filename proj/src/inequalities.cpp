#include "freelab/inequalities.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "freelab/errors.hpp"
#include "freelab/format.hpp"
#include "freelab/logpotential.hpp"
#include "freelab/transport.hpp"

namespace freelab {

namespace {

constexpr double kPi = std::numbers::pi;

struct KindInfo {
  InequalityKind kind;
  std::string_view name;
  bool upper_bound;
};

constexpr KindInfo kKinds[] = {
    {InequalityKind::free_talagrand, "FREE_TALAGRAND", true},
    {InequalityKind::ssfti, "SSFTI", true},
    {InequalityKind::ssfti_general, "SSFTI_GENERAL", true},
    {InequalityKind::inverse_free_lsi, "INVERSE_FREE_LSI", false},
    {InequalityKind::free_santalo, "FREE_SANTALO", true},
    {InequalityKind::free_santalo_shifted, "FREE_SANTALO_SHIFTED", true},
    {InequalityKind::inverse_santalo, "INVERSE_SANTALO", false},
    {InequalityKind::free_brunn_minkowski, "FREE_BRUNN_MINKOWSKI", false},
    {InequalityKind::free_log_prekopa, "FREE_LOG_PREKOPA", true},
    {InequalityKind::inverse_ssfti, "INVERSE_SSFTI", true},
};

const KindInfo& info(InequalityKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k;
  throw DomainError("unknown inequality kind");
}

template <class T>
const T& require(const std::optional<T>& value, InequalityKind kind, const char* name) {
  if (!value)
    throw DomainError(std::string(kind_name(kind)) + " needs input '" + name + "'");
  return *value;
}

double lattice_point(int i, double half_width) {
  return -half_width + 2.0 * half_width * i / (kHypothesisLattice - 1);
}

// Slack allowed for rounding in numerically evaluated potentials (Legendre transforms).
double lattice_slack(double a, double b, double c) {
  return 1e-9 * (1.0 + std::abs(a) + std::abs(b) + std::abs(c));
}

void require_centered(const GridMeasure& mu, const char* what) {
  const double bar = barycenter(mu);
  if (std::abs(bar) > kCenteringTolerance)
    throw PreconditionError(std::string(what) + " is not centered", "barycenter=" + format_number(bar));
}

void require_convex(const Potential& u, const char* what) {
  if (!u.is_convex())
    throw PreconditionError(std::string(what) + " has no convexity certificate", u.label());
}

void require_even(const Potential& u, double half_width, const char* what) {
  for (int i = 0; i < kHypothesisLattice; ++i) {
    const double x = lattice_point(i, half_width);
    const double a = u(x);
    const double b = u(-x);
    if (std::isinf(a) && std::isinf(b)) continue;
    if (!(std::abs(a - b) <= lattice_slack(a, b, 0.0)))
      throw PreconditionError(std::string(what) + " is not even", "x=" + format_number(x));
  }
}

double support_radius(const EquilibriumResult& eq) {
  return std::max(std::abs(eq.support_lo), std::abs(eq.support_hi));
}

double relative_pressure_plus(const EquilibriumResult& eq, const Potential& u) {
  return chi_plus(eq.measure) - eq.measure.integrate([&](double t) { return u(t); });
}

// Samples a potential on the lattice axis once; lattice checks then only combine samples.
std::vector<double> axis_samples(const Potential& u, double half_width,
                                 const std::function<double(double)>& argument) {
  std::vector<double> out(kHypothesisLattice);
  for (int i = 0; i < kHypothesisLattice; ++i) out[i] = u(argument(lattice_point(i, half_width)));
  return out;
}

std::string point_witness(double x, double y, double slack) {
  return "x=" + format_number(x) + ",y=" + format_number(y) + ",slack=" + format_number(slack);
}

}  // namespace

std::string_view kind_name(InequalityKind kind) { return info(kind).name; }

InequalityKind parse_kind(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return c == '-' ? '_' : static_cast<char>(std::toupper(c)); });
  for (const auto& k : kKinds)
    if (k.name == upper) return k.kind;
  throw DomainError("unknown inequality kind '" + std::string(name) + "'");
}

bool is_upper_bound(InequalityKind kind) { return info(kind).upper_bound; }

void check_fenchel_young_lattice(const Potential& f, const Potential& g, double half_width) {
  const auto identity = [](double t) { return t; };
  const std::vector<double> fx = axis_samples(f, half_width, identity);
  const std::vector<double> gy = axis_samples(g, half_width, identity);
  for (int i = 0; i < kHypothesisLattice; ++i) {
    const double x = lattice_point(i, half_width);
    for (int j = 0; j < kHypothesisLattice; ++j) {
      const double y = lattice_point(j, half_width);
      const double slack = fx[i] + gy[j] - x * y;
      if (!(slack >= -lattice_slack(fx[i], gy[j], x * y)))
        throw PreconditionError("f(x) + g(y) >= xy fails on the probe lattice",
                                point_witness(x, y, slack));
    }
  }
}

namespace {

void check_brunn_minkowski_lattice(const Potential& u1, const Potential& u2, const Potential& u3,
                                   double theta, double half_width) {
  const auto identity = [](double t) { return t; };
  const std::vector<double> a = axis_samples(u1, half_width, identity);
  const std::vector<double> b = axis_samples(u2, half_width, identity);
  for (int i = 0; i < kHypothesisLattice; ++i) {
    const double x = lattice_point(i, half_width);
    for (int j = 0; j < kHypothesisLattice; ++j) {
      const double y = lattice_point(j, half_width);
      const double bound = theta * a[i] + (1.0 - theta) * b[j];
      if (std::isinf(bound)) continue;
      const double mid = u3(theta * x + (1.0 - theta) * y);
      const double slack = bound - mid;
      if (!(slack >= -lattice_slack(bound, mid, 0.0)))
        throw PreconditionError("U3(theta x + (1 - theta) y) <= theta U1(x) + (1 - theta) U2(y) fails",
                                point_witness(x, y, slack));
    }
  }
}

void check_prekopa_lattice(const Potential& u1, const Potential& u2, double half_width) {
  const auto square = [](double t) { return t * t; };
  const std::vector<double> a = axis_samples(u1, half_width, square);
  const std::vector<double> b = axis_samples(u2, half_width, square);
  for (int i = 0; i < kHypothesisLattice; ++i) {
    const double x = lattice_point(i, half_width);
    for (int j = 0; j < kHypothesisLattice; ++j) {
      const double y = lattice_point(j, half_width);
      const double slack = 0.5 * a[i] + 0.5 * b[j] - x * y;
      if (!(slack >= -lattice_slack(a[i], b[j], x * y)))
        throw PreconditionError("xy <= U1(x^2)/2 + U2(y^2)/2 fails on the probe lattice",
                                point_witness(x, y, slack));
    }
  }
}

struct Sides {
  double lhs;
  double rhs;
};

Sides evaluate(InequalityKind kind, const InequalityInputs& in, const SolverSettings& cfg,
               std::map<std::string, std::string>& notes) {
  const double half_log_two_pi = 0.5 * std::log(2.0 * kPi);
  auto solve = [&](const Potential& u) { return solve_equilibrium(u, cfg); };

  switch (kind) {
    case InequalityKind::free_talagrand: {
      const GridMeasure& mu = require(in.mu, kind, "mu");
      const GridMeasure sigma = make_semicircular(0.0, 1.0, cfg.nodes);
      return {w2(mu, sigma).squared(), 2.0 * relative_entropy_semicircular(mu)};
    }
    case InequalityKind::ssfti:
    case InequalityKind::ssfti_general: {
      const GridMeasure& mu = require(in.mu, kind, "mu");
      const GridMeasure& nu = require(in.nu, kind, "nu");
      double rhs = 2.0 * relative_entropy_semicircular(mu) + 2.0 * relative_entropy_semicircular(nu);
      if (kind == InequalityKind::ssfti)
        require_centered(mu, "mu");
      else
        rhs -= 2.0 * barycenter(mu) * barycenter(nu);
      return {w2(mu, nu).squared(), rhs};
    }
    case InequalityKind::inverse_free_lsi: {
      const Potential& u = require(in.f, kind, "f");
      require_convex(u, "f");
      const EquilibriumResult eq = solve(u);
      const double chi_sigma = half_log_two_pi + 0.5;
      return {chi_sigma - chi(eq.measure), 0.5 * log_jacobian(eq.measure, u)};
    }
    case InequalityKind::free_santalo:
    case InequalityKind::free_santalo_shifted: {
      Potential f = require(in.f, kind, "f");
      Potential g = require(in.g, kind, "g");
      EquilibriumResult eq_f = solve(f);
      EquilibriumResult eq_g = solve(g);
      check_fenchel_young_lattice(f, g, 1.5 * std::max(support_radius(eq_f), support_radius(eq_g)));
      if (kind == InequalityKind::free_santalo_shifted) {
        // Santalo point: f(z + .) has a centered equilibrium and g(y) - zy keeps the
        // Fenchel-Young bound, so the pair stays admissible.
        const double z = barycenter(eq_f.measure);
        notes["santalo_shift"] = format_number(z);
        f = shift_potential(f, z);
        g = tilt_linear(g, -z);
        eq_f = solve(f);
        eq_g = solve(g);
      }
      require_centered(eq_f.measure, "equilibrium of f");
      return {eq_f.pressure + eq_g.pressure, std::log(2.0 * kPi)};
    }
    case InequalityKind::inverse_santalo:
    case InequalityKind::inverse_ssfti: {
      const Potential& f = require(in.f, kind, "f");
      require_convex(f, "f");
      const Potential dual = legendre_transform(f);
      const EquilibriumResult eq = solve(f);
      const EquilibriumResult eq_dual = solve(dual);
      require_even(f, 1.5 * std::max(support_radius(eq), support_radius(eq_dual)), "f");
      if (kind == InequalityKind::inverse_santalo)
        return {eq.pressure + eq_dual.pressure, std::log(4.0)};
      const double lhs = relative_entropy_semicircular(eq.measure) +
                         relative_entropy_semicircular(eq_dual.measure);
      return {lhs, 0.5 * w2(eq.measure, eq_dual.measure).squared() + 0.5 * std::log(kPi / 2.0)};
    }
    case InequalityKind::free_brunn_minkowski: {
      const Potential& u1 = require(in.f, kind, "f");
      const Potential& u2 = require(in.g, kind, "g");
      const Potential& u3 = require(in.h, kind, "h");
      const double theta = in.theta;
      if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
      const EquilibriumResult e1 = solve(u1);
      const EquilibriumResult e2 = solve(u2);
      const EquilibriumResult e3 = solve(u3);
      const double radius =
          std::max({support_radius(e1), support_radius(e2), support_radius(e3)});
      check_brunn_minkowski_lattice(u1, u2, u3, theta, 1.5 * radius);
      return {e3.pressure, theta * e1.pressure + (1.0 - theta) * e2.pressure};
    }
    case InequalityKind::free_log_prekopa: {
      const Potential& u1 = require(in.f, kind, "f");
      const Potential& u2 = require(in.g, kind, "g");
      for (const Potential* u : {&u1, &u2})
        if (u->domain_lo() < 0.0)
          throw PreconditionError("log-Prekopa potentials live on [0, inf)", u->label());
      const EquilibriumResult e1 = solve(u1);
      const EquilibriumResult e2 = solve(u2);
      // The lattice is in square-root coordinates: x^2 ranges over the supports.
      const double radius = std::sqrt(std::max(support_radius(e1), support_radius(e2)));
      check_prekopa_lattice(u1, u2, 1.5 * radius);
      return {0.5 * relative_pressure_plus(e1, u1) + 0.5 * relative_pressure_plus(e2, u2),
              std::log(kPi)};
    }
  }
  throw DomainError("unknown inequality kind");
}

}  // namespace

InequalityReport verify(InequalityKind kind, const InequalityInputs& inputs, double tolerance,
                        const SolverSettings& cfg) {
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
  const auto start = std::chrono::steady_clock::now();
  InequalityReport report;
  report.kind = kind;
  report.tolerance = tolerance;
  report.inputs = inputs.descriptors;
  report.resolution = cfg.nodes;
  if (kind == InequalityKind::free_brunn_minkowski) report.inputs["theta"] = format_number(inputs.theta);

  const Sides sides = evaluate(kind, inputs, cfg, report.inputs);
  report.lhs = sides.lhs;
  report.rhs = sides.rhs;
  if (!std::isfinite(sides.lhs) || !std::isfinite(sides.rhs)) {
    report.sentinel = true;
    report.deficit = -kInfinity;
    report.pass = false;
  } else {
    report.deficit = is_upper_bound(kind) ? sides.rhs - sides.lhs : sides.lhs - sides.rhs;
    report.pass = report.deficit >= -tolerance;
  }
  report.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return report;
}

}  // namespace freelab
