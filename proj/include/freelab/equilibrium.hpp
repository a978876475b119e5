#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freelab/measures.hpp"
#include "freelab/potentials.hpp"

namespace freelab {

struct SolverSettings {
  int nodes = kDefaultNodes;
  // Bound on the Euler-Lagrange residual accepted from the one-cut solver.
  double tolerance = 1e-6;
  // Bound used instead when the potential has kinks inside the support: the density then has
  // logarithmic singularities and the grid Hilbert transform converges slowly near them.
  double kinked_tolerance = 1e-2;
  // Accept potentials without a convexity certificate; uniqueness is then not guaranteed.
  bool allow_nonconvex = false;
};

enum class EdgeKind { soft, hard };

struct EquilibriumResult {
  GridMeasure measure;
  double support_lo = 0.0;
  double support_hi = 0.0;
  EdgeKind lo_edge = EdgeKind::soft;
  EdgeKind hi_edge = EdgeKind::soft;
  // C in 2 * integral log|x - y| dnu(y) - u(x) = C on the support.
  double el_constant = 0.0;
  double el_residual = 0.0;
  // Diagnostic only: hard edges add boundary terms the identity does not carry.
  double sd_residual = 0.0;
  double pressure = 0.0;
  int iterations = 0;
  std::string method;
  std::string potential_label;
};

EquilibriumResult solve_equilibrium(const Potential& u, const SolverSettings& cfg = {});
double free_pressure(const Potential& u, const SolverSettings& cfg = {});

// min over the family of mu(h) + free_pressure(h), minus chi(mu).
double entropy_duality_check(const GridMeasure& mu, std::span<const Potential> family,
                             const SolverSettings& cfg = {});

struct MomentMap {
  Potential potential;
  EquilibriumResult equilibrium;
  // KS distance between (u')# nu_u and the input measure.
  double pushforward_ks = 0.0;
  int iterations = 0;
};

MomentMap moment_map(const GridMeasure& mu, const SolverSettings& cfg = {});

struct CenteringShift {
  std::optional<double> lambda;
  // (lambda, barycenter of the tilted equilibrium) at every evaluated point, sorted by lambda.
  std::vector<std::pair<double, double>> curve;
  bool monotone = true;
};

// Searches lambda in [box_lo, box_hi] with the equilibrium of f + lambda * x centered.
CenteringShift find_centering_shift(const Potential& f, double box_lo, double box_hi,
                                    const SolverSettings& cfg = {});

}  // namespace freelab
