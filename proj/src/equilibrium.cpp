#include "freelab/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <memory>
#include <numeric>

#include "freelab/errors.hpp"
#include "freelab/format.hpp"
#include "freelab/logpotential.hpp"
#include "freelab/numerics.hpp"

namespace freelab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDensityRuleSize = 256;
constexpr int kDensityRefineDepth = 6;

struct Cut {
  double lo;
  double hi;
  EdgeKind lo_edge;
  EdgeKind hi_edge;
  double center() const { return 0.5 * (lo + hi); }
  double radius() const { return 0.5 * (hi - lo); }
};

// Endpoint conditions of the one-cut ansatz. With x = c + r cos(theta):
//   E0 = r/(2 pi) * integral u'(x) dtheta,  E1 = r/(2 pi) * integral cos(theta) u'(x) dtheta.
// A soft edge at hi needs 1 - E0 - E1 = 0, a soft edge at lo needs 1 + E0 - E1 = 0;
// at a hard edge the same quantity is pi times the limit of the angular weight and must be >= 0.
class OneCutProblem {
 public:
  explicit OneCutProblem(const Potential& u) : u_(u) {}

  double e0(double c, double r) const {
    ++evaluations_;
    const auto breaks = theta_breaks(c, r);
    return r / (2 * kPi) *
           numerics::integrate([&](double t) { return u_.derivative(c + r * std::cos(t)); }, 0.0, kPi,
                               breaks, 1e-10);
  }

  double e1(double c, double r) const {
    ++evaluations_;
    const auto breaks = theta_breaks(c, r);
    return r / (2 * kPi) *
           numerics::integrate(
               [&](double t) { return std::cos(t) * u_.derivative(c + r * std::cos(t)); }, 0.0, kPi,
               breaks, 1e-10);
  }

  double hi_slack(double c, double r) const { return 1.0 - e0(c, r) - e1(c, r); }
  double lo_slack(double c, double r) const { return 1.0 + e0(c, r) - e1(c, r); }

  std::vector<double> theta_breaks(double c, double r) const {
    std::vector<double> breaks;
    for (double k : u_.kinks()) {
      const double t = (k - c) / r;
      if (std::abs(t) < 1.0) breaks.push_back(std::acos(t));
    }
    return breaks;
  }

  int evaluations() const { return evaluations_; }

 private:
  const Potential& u_;
  mutable int evaluations_ = 0;
};

// Minimizer of u inside the Legendre box, and a length scale from the curvature there.
std::pair<double, double> laplace_guess(const Potential& u) {
  const double lo = std::max(u.domain_lo(), -kLegendreBox);
  const double hi = std::min(u.domain_hi(), kLegendreBox);
  double m;
  if (u.derivative(lo) >= 0) m = lo;
  else if (u.derivative(hi) <= 0) m = hi;
  else m = numerics::find_root([&](double x) { return u.derivative(x); }, lo, hi, 1e-12);
  const double curvature = u.second_derivative(m);
  double scale = curvature > 1e-12 ? 2.0 / std::sqrt(curvature) : 1.0;
  scale = std::clamp(scale, 1e-6, kLegendreBox / 2);
  return {m, scale};
}

std::optional<Cut> solve_soft_soft(const Potential& u, const OneCutProblem& problem) {
  const auto [m, r0] = laplace_guess(u);
  const double dlo = u.domain_lo();
  const double dhi = u.domain_hi();
  auto center_for = [&](double r) -> std::optional<double> {
    const double clo = std::isfinite(dlo) ? dlo + r : -1e6;
    const double chi = std::isfinite(dhi) ? dhi - r : 1e6;
    if (!(chi > clo)) return std::nullopt;
    const auto f = [&](double c) { return problem.e0(c, r); };
    double a = std::clamp(m - 0.5 * r, clo, chi);
    double b = std::clamp(m + 0.5 * r, clo, chi);
    if (b <= a) {
      a = clo;
      b = chi;
    }
    if (!numerics::expand_bracket(f, a, b, clo, chi)) return std::nullopt;
    return numerics::find_root(f, a, b, 1e-15);
  };
  auto phi = [&](double r) -> std::optional<double> {
    const auto c = center_for(r);
    if (!c) return std::nullopt;
    return problem.e1(*c, r) - 1.0;
  };

  double ra = r0;
  double rb = r0;
  auto value = phi(r0);
  if (!value) {
    // The guess does not fit in the domain; shrink until it does.
    for (int i = 0; i < 60 && !value; ++i) {
      ra *= 0.5;
      value = phi(ra);
    }
    if (!value) return std::nullopt;
    rb = ra;
  }
  if (*value < 0) {
    for (int i = 0; i < 80; ++i) {
      rb *= 2;
      const auto next = phi(rb);
      if (!next) {
        // Domain reached: look for the sign change between ra and the largest feasible radius.
        double good = ra;
        double bad = rb;
        for (int j = 0; j < 60; ++j) {
          const double mid = 0.5 * (good + bad);
          const auto pm = phi(mid);
          if (!pm) bad = mid;
          else if (*pm < 0) good = mid;
          else {
            rb = mid;
            break;
          }
        }
        if (rb == bad || !phi(rb) || *phi(rb) < 0) return std::nullopt;
        break;
      }
      if (*next >= 0) break;
      ra = rb;
      if (i == 79) return std::nullopt;
    }
  } else {
    for (int i = 0; i < 80; ++i) {
      ra *= 0.5;
      const auto next = phi(ra);
      if (next && *next < 0) break;
      rb = ra;
      if (i == 79) return std::nullopt;
    }
  }
  const double r = numerics::find_root([&](double x) { return phi(x).value_or(1.0); }, ra, rb, 1e-15);
  const auto c = center_for(r);
  if (!c) return std::nullopt;
  return Cut{*c - r, *c + r, EdgeKind::soft, EdgeKind::soft};
}

// One hard edge at the finite domain end `fixed`; the other end is soft.
std::optional<Cut> solve_one_hard(const Potential& u, const OneCutProblem& problem, bool hard_lo) {
  const double fixed = hard_lo ? u.domain_lo() : u.domain_hi();
  const double limit = hard_lo ? u.domain_hi() : u.domain_lo();
  if (!std::isfinite(fixed)) return std::nullopt;
  const auto [m, r0] = laplace_guess(u);
  (void)m;
  // Soft slack as a function of the free endpoint's distance from the hard edge.
  auto slack = [&](double width) {
    const double lo = hard_lo ? fixed : fixed - width;
    const double hi = hard_lo ? fixed + width : fixed;
    const double c = 0.5 * (lo + hi);
    const double r = 0.5 * width;
    return hard_lo ? problem.hi_slack(c, r) : problem.lo_slack(c, r);
  };
  const double max_width = std::isfinite(limit) ? std::abs(limit - fixed) : 1e6;
  double wa = std::min(r0, max_width);
  double wb = wa;
  double value = slack(wa);
  if (value > 0) {
    while (value > 0) {
      if (wb >= max_width) return std::nullopt;
      wa = wb;
      wb = std::min(2 * wb, max_width);
      value = slack(wb);
    }
  } else {
    while (value <= 0) {
      wb = wa;
      wa *= 0.5;
      if (wa < 1e-12) return std::nullopt;
      value = slack(wa);
    }
  }
  const double width = numerics::find_root(slack, wa, wb, 1e-15);
  const double lo = hard_lo ? fixed : fixed - width;
  const double hi = hard_lo ? fixed + width : fixed;
  const double other = hard_lo ? problem.lo_slack(0.5 * (lo + hi), 0.5 * width)
                               : problem.hi_slack(0.5 * (lo + hi), 0.5 * width);
  if (other < -1e-9) return std::nullopt;
  return hard_lo ? Cut{lo, hi, EdgeKind::hard, EdgeKind::soft} : Cut{lo, hi, EdgeKind::soft, EdgeKind::hard};
}

std::optional<Cut> solve_both_hard(const Potential& u, const OneCutProblem& problem) {
  if (!std::isfinite(u.domain_lo()) || !std::isfinite(u.domain_hi())) return std::nullopt;
  const Cut cut{u.domain_lo(), u.domain_hi(), EdgeKind::hard, EdgeKind::hard};
  if (problem.lo_slack(cut.center(), cut.radius()) < -1e-9) return std::nullopt;
  if (problem.hi_slack(cut.center(), cut.radius()) < -1e-9) return std::nullopt;
  return cut;
}

// Angular weight w(theta) = B(s)/pi at s = -cos(theta), where
// B(s) = (1 - s^2)/pi * integral D(s, cos phi) dphi + slack terms and D is r^2/2 times the
// divided difference of u'.
GridMeasure recover_density(const Potential& u, const OneCutProblem& problem, const Cut& cut, int nodes) {
  const double c = cut.center();
  const double r = cut.radius();
  const double slack_hi = problem.hi_slack(c, r);
  const double slack_lo = problem.lo_slack(c, r);
  // u' is sampled once on a composite Gauss-Legendre rule in phi, split at kinks and refined
  // where one panel does not resolve the curvature; every node reuses the samples.
  auto breaks = problem.theta_breaks(c, r);
  breaks.push_back(0.0);
  breaks.push_back(kPi);
  std::sort(breaks.begin(), breaks.end());
  const auto& rule = numerics::gauss_legendre(kDensityRuleSize);
  std::vector<double> t_samples;
  std::vector<double> slope_samples;
  std::vector<double> weight_samples;
  // Refinement probe: u'' where available (the divided differences inherit its features), else u'.
  const auto probe = [&](double x) {
    return u.has_second_derivative() ? u.second_derivative(x) : u.derivative(x);
  };
  const auto panel_sum = [&](double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (int k = 0; k < kDensityRuleSize; ++k) sum += half * rule.weights[k] * probe(c + r * std::cos(mid + half * rule.nodes[k]));
    return sum;
  };
  const double probe_scale = 1.0 + std::abs(panel_sum(0.0, kPi)) / kPi;
  std::vector<std::pair<double, double>> panels_phi;
  const std::function<void(double, double, int)> refine = [&](double a, double b, int depth) {
    if (depth < kDensityRefineDepth) {
      const double m = 0.5 * (a + b);
      if (std::abs(panel_sum(a, b) - panel_sum(a, m) - panel_sum(m, b)) > 1e-10 * probe_scale) {
        refine(a, m, depth + 1);
        refine(m, b, depth + 1);
        return;
      }
    }
    panels_phi.emplace_back(a, b);
  };
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p)
    if (breaks[p + 1] > breaks[p]) refine(breaks[p], breaks[p + 1], 0);
  for (const auto& [a, b] : panels_phi) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int k = 0; k < kDensityRuleSize; ++k) {
      const double t = std::cos(mid + half * rule.nodes[k]);
      t_samples.push_back(t);
      slope_samples.push_back(u.derivative(c + r * t));
      weight_samples.push_back(half * rule.weights[k]);
    }
  }
  const int panels = nodes - 1;
  Eigen::VectorXd w(nodes);
  double peak = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double s = -std::cos(kPi * i / panels);
    const double x = c + r * s;
    double bracket = 0.0;
    if (i != 0 && i != panels) {
      const double dx = u.derivative(x);
      double integral = 0.0;
      for (std::size_t k = 0; k < t_samples.size(); ++k) {
        const double t = t_samples[k];
        const double divided = std::abs(s - t) < 1e-6
                                   ? 0.5 * r * r * u.second_derivative(c + 0.5 * r * (s + t))
                                   : 0.5 * r * (dx - slope_samples[k]) / (s - t);
        integral += weight_samples[k] * divided;
      }
      bracket = (1 - s * s) / kPi * integral;
    }
    const double b = bracket + 0.5 * (slack_hi + slack_lo) + 0.5 * s * (slack_hi - slack_lo);
    w[i] = b / kPi;
    peak = std::max(peak, w[i]);
  }
  if (cut.lo_edge == EdgeKind::soft) w[0] = 0.0;
  if (cut.hi_edge == EdgeKind::soft) w[panels] = 0.0;
  for (int i = 0; i < nodes; ++i) {
    if (w[i] < -1e-7 * peak)
      throw MultiCutError("one-cut density is negative near x=" + format_number(c - r * std::cos(kPi * i / panels)) +
                          "; the equilibrium of the potential is not supported on one interval");
    w[i] = std::max(w[i], 0.0);
  }
  return GridMeasure::from_angular_weights(cut.lo, cut.hi, std::move(w));
}

// Projected gradient descent on the discrete energy, used when the one-cut root finding fails.
GridMeasure particle_equilibrium(const Potential& u, int particles, int& iterations) {
  const auto [m, scale] = laplace_guess(u);
  std::vector<double> x(particles);
  for (int i = 0; i < particles; ++i) x[i] = m + scale * (2.0 * (i + 0.5) / particles - 1.0);
  auto project = [&](double v) { return std::clamp(v, u.domain_lo(), u.domain_hi()); };
  for (double& v : x) v = project(v);
  auto energy = [&](const std::vector<double>& p) {
    double e = 0.0;
    for (int i = 0; i < particles; ++i) {
      e += u(p[i]) / particles;
      for (int j = i + 1; j < particles; ++j) e -= 2.0 * std::log(std::abs(p[i] - p[j])) / (double(particles) * particles);
    }
    return e;
  };
  double step = 0.1 * scale * scale;
  double current = energy(x);
  std::vector<double> grad(particles);
  std::vector<double> trial(particles);
  for (iterations = 0; iterations < 4000; ++iterations) {
    for (int i = 0; i < particles; ++i) {
      double repulsion = 0.0;
      for (int j = 0; j < particles; ++j)
        if (j != i) repulsion += 1.0 / (x[i] - x[j]);
      grad[i] = u.derivative(x[i]) / particles - 2.0 * repulsion / (double(particles) * particles);
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (int i = 0; i < particles; ++i) trial[i] = project(x[i] - step * particles * grad[i]);
      std::sort(trial.begin(), trial.end());
      const bool distinct = std::adjacent_find(trial.begin(), trial.end()) == trial.end();
      const double e = distinct ? energy(trial) : kInfinity;
      if (e < current) {
        const double gain = current - e;
        x.swap(trial);
        current = e;
        step *= 1.2;
        accepted = true;
        if (gain < 1e-14) iterations = 1 << 20;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  std::vector<double> gaps(particles - 1);
  for (int i = 0; i + 1 < particles; ++i) gaps[i] = x[i + 1] - x[i];
  std::vector<double> sorted_gaps = gaps;
  std::nth_element(sorted_gaps.begin(), sorted_gaps.begin() + sorted_gaps.size() / 2, sorted_gaps.end());
  const double median = sorted_gaps[sorted_gaps.size() / 2];
  for (int i = particles / 10; i < particles - particles / 10; ++i)
    if (gaps[i] > 20 * median)
      throw MultiCutError("particle equilibrium splits near x=" + format_number(0.5 * (x[i] + x[i + 1])));
  const double lo = std::max(u.domain_lo(), x.front() - 0.5 * gaps.front());
  const double hi = std::min(u.domain_hi(), x.back() + 0.5 * gaps.back());
  auto density = [&](double t) {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t k = std::clamp<std::size_t>(it - x.begin(), 1, x.size() - 1);
    return 1.0 / (particles * (x[k] - x[k - 1]));
  };
  return GridMeasure::from_density(lo, hi, density);
}

EquilibriumResult finish(const Potential& u, GridMeasure measure, const Cut& cut, int iterations,
                         std::string method) {
  EquilibriumResult result;
  result.support_lo = cut.lo;
  result.support_hi = cut.hi;
  result.lo_edge = cut.lo_edge;
  result.hi_edge = cut.hi_edge;
  result.iterations = iterations;
  result.method = std::move(method);
  result.potential_label = u.label();
  // Robin constant averaged over interior probes away from kinks.
  double sum = 0.0;
  int count = 0;
  for (int k = 1; k < 20; ++k) {
    const double x = measure.center() - measure.radius() * std::cos(kPi * k / 20);
    if (std::any_of(u.kinks().begin(), u.kinks().end(), [&](double kink) { return std::abs(kink - x) < 1e-6; }))
      continue;
    sum += 2 * log_potential(measure, x) - u(x);
    ++count;
  }
  result.el_constant = sum / std::max(count, 1);
  result.el_residual = euler_lagrange_residual(measure, u);
  result.sd_residual = schwinger_dyson_residual(measure, u, default_schwinger_dyson_tests());
  result.pressure = chi_rel(measure, u);
  result.measure = std::move(measure);
  return result;
}

}  // namespace

EquilibriumResult solve_equilibrium(const Potential& u, const SolverSettings& cfg) {
  if (!u.growth_ok())
    throw PreconditionError("potential '" + u.label() + "' fails the logarithmic growth certificate", u.label());
  if (!u.is_convex() && !cfg.allow_nonconvex)
    throw PreconditionError("potential '" + u.label() + "' fails the convexity certificate", u.label());
  if (cfg.nodes < 16) throw DomainError("solver needs at least 16 nodes");

  OneCutProblem problem(u);
  std::optional<Cut> cut;
  std::string method;
  try {
    if ((cut = solve_soft_soft(u, problem))) method = "one-cut:soft-soft";
    else if ((cut = solve_one_hard(u, problem, true))) method = "one-cut:hard-soft";
    else if ((cut = solve_one_hard(u, problem, false))) method = "one-cut:soft-hard";
    else if ((cut = solve_both_hard(u, problem))) method = "one-cut:hard-hard";
  } catch (const SolverError&) {
    cut.reset();
  }
  if (!cut) {
    int iterations = 0;
    GridMeasure measure = particle_equilibrium(u, 400, iterations);
    const Cut particle_cut{measure.support_lo(), measure.support_hi(), EdgeKind::soft, EdgeKind::soft};
    return finish(u, std::move(measure), particle_cut, iterations, "particle-fallback");
  }
  GridMeasure measure = recover_density(u, problem, *cut, cfg.nodes);
  auto result = finish(u, std::move(measure), *cut, problem.evaluations(), method);
  const bool kinked = std::any_of(u.kinks().begin(), u.kinks().end(),
                                  [&](double k) { return k > cut->lo && k < cut->hi; });
  const double gate = kinked ? std::max(cfg.tolerance, cfg.kinked_tolerance) : cfg.tolerance;
  if (!(result.el_residual <= gate))
    throw SolverError("equilibrium of '" + u.label() + "' has Euler-Lagrange residual " +
                      format_number(result.el_residual) + " above tolerance " + format_number(gate));
  return result;
}

double free_pressure(const Potential& u, const SolverSettings& cfg) { return solve_equilibrium(u, cfg).pressure; }

double entropy_duality_check(const GridMeasure& mu, std::span<const Potential> family,
                             const SolverSettings& cfg) {
  if (family.empty()) throw DomainError("entropy duality needs a nonempty potential family");
  double best = kInfinity;
  for (const auto& h : family) {
    const double mass = mu.integrate([&](double x) { return h(x); });
    best = std::min(best, mass + free_pressure(h, cfg));
  }
  return best - chi(mu);
}

namespace {

// Convex potential with u' = Q_mu o F_nu, extended by constants outside supp nu. The slope
// is tabulated on Chebyshev points of the support and interpolated monotonically, so u, u'
// and u'' are all closed-form between knots. `offset` is subtracted from the value.
Potential transport_potential(const GridMeasure& mu, const GridMeasure& nu, double offset = 0.0) {
  constexpr int kKnots = 4097;
  std::vector<double> grid(kKnots);
  std::vector<double> slopes(kKnots);
  for (int i = 0; i < kKnots; ++i) {
    grid[i] = nu.center() - nu.radius() * std::cos(kPi * i / (kKnots - 1));
    slopes[i] = mu.quantile(nu.cdf(grid[i]));
  }
  grid.front() = nu.support_lo();
  grid.back() = nu.support_hi();
  slopes.front() = mu.support_lo();
  slopes.back() = mu.support_hi();
  auto table = std::make_shared<const numerics::MonotoneCubic>(std::move(grid), std::move(slopes));
  const double anchor = table->integral(0.0) + offset;
  Potential::Parts parts;
  parts.value = [table, anchor](double x) { return table->integral(x) - anchor; };
  parts.derivative = [table](double x) { return (*table)(x); };
  parts.second_derivative = [table](double x) { return table->derivative(x); };
  parts.kinks = {nu.support_lo(), nu.support_hi()};
  parts.label = "moment-map";
  return Potential(std::move(parts));
}

}  // namespace

MomentMap moment_map(const GridMeasure& mu, const SolverSettings& cfg) {
  const double bar = barycenter(mu);
  if (std::abs(bar) >= 1e-8)
    throw PreconditionError("moment map needs a centered measure", "barycenter=" + format_number(bar));
  const double second = moment(mu, 2);
  if (!(second > 1e-12)) throw DomainError("moment map excludes the point mass at 0");

  // Fixed point nu = nu_u with u' = Q_mu o F_nu. Coarse grid first, then the requested one.
  SolverSettings coarse = cfg;
  coarse.nodes = std::min(cfg.nodes, 1025);
  coarse.tolerance = std::max(cfg.tolerance, 1e-4);
  GridMeasure nu = make_semicircular(0.0, 1.0 / second, coarse.nodes);
  int iterations = 0;
  for (const SolverSettings* stage : {static_cast<const SolverSettings*>(&coarse), &cfg}) {
    const int limit = stage == &coarse ? 200 : 8;
    for (int k = 0; k < limit; ++k, ++iterations) {
      const Potential u = transport_potential(mu, nu);
      auto result = solve_equilibrium(u, *stage);
      GridMeasure next = translate(result.measure, -barycenter(result.measure));
      const double change = ks_distance(next, nu);
      nu = std::move(next);
      if (change < (stage == &coarse ? 1e-6 : 1e-9)) break;
    }
  }
  const Potential raw = transport_potential(mu, nu);
  const auto first = solve_equilibrium(raw, cfg);
  const Potential u = transport_potential(mu, nu, raw(barycenter(first.measure)));
  auto equilibrium = solve_equilibrium(u, cfg);
  const double ks = ks_distance(
      pushforward_monotone(equilibrium.measure, [&u](double x) { return u.derivative(x); }), mu);
  return MomentMap{u, std::move(equilibrium), ks, iterations};
}

CenteringShift find_centering_shift(const Potential& f, double box_lo, double box_hi, const SolverSettings& cfg) {
  if (!f.growth_ok()) throw PreconditionError("potential '" + f.label() + "' fails the growth certificate", f.label());
  if (!(box_hi > box_lo)) throw DomainError("centering search box must satisfy lo < hi");
  CenteringShift shift;
  auto evaluate = [&](double lambda) {
    const double bar = barycenter(solve_equilibrium(tilt_linear(f, lambda), cfg).measure);
    shift.curve.emplace_back(lambda, bar);
    return bar;
  };
  constexpr int scan = 9;
  std::vector<double> bars(scan);
  for (int i = 0; i < scan; ++i) bars[i] = evaluate(box_lo + (box_hi - box_lo) * i / (scan - 1));
  for (int i = 1; i < scan; ++i)
    if (bars[i] > bars[i - 1] + 1e-9) shift.monotone = false;
  int bracket = -1;
  for (int i = 0; i + 1 < scan; ++i)
    if ((bars[i] <= 0) != (bars[i + 1] <= 0) || bars[i] == 0) {
      bracket = i;
      break;
    }
  if (bracket >= 0) {
    const double a = box_lo + (box_hi - box_lo) * bracket / (scan - 1);
    const double b = box_lo + (box_hi - box_lo) * (bracket + 1) / (scan - 1);
    const double lambda = numerics::find_root(evaluate, a, b, 1e-13);
    const double bar = evaluate(lambda);
    if (std::abs(bar) < 1e-6) shift.lambda = lambda;
  }
  std::sort(shift.curve.begin(), shift.curve.end());
  return shift;
}

}  // namespace freelab
