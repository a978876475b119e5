#include "freelab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "freelab/errors.hpp"
#include "freelab/logpotential.hpp"
#include "freelab/numerics.hpp"

namespace freelab {

namespace {

struct UnitGrid {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
};

const UnitGrid& unit_grid() {
  static const UnitGrid grid = [] {
    const auto& rule = numerics::gauss_legendre(kQuantileGridSize);
    UnitGrid g;
    g.points.resize(kQuantileGridSize);
    g.weights.resize(kQuantileGridSize);
    for (int i = 0; i < kQuantileGridSize; ++i) {
      g.points[i] = 0.5 * (1.0 + rule.nodes[i]);
      g.weights[i] = 0.5 * rule.weights[i];
    }
    return g;
  }();
  return grid;
}

constexpr int kMaxOracleAtoms = 8;

struct Cell {
  int row;
  int col;
  double flow;
};

// Path between two nodes of the basis tree; rows are nodes [0, m), columns [m, m + n).
// Returns the indices of the basis cells along the path, in order from `from`.
std::vector<int> tree_path(const std::vector<Cell>& basis, int m, int n, int from, int to) {
  const int count = m + n;
  std::vector<std::vector<std::pair<int, int>>> adjacent(count);
  for (int k = 0; k < static_cast<int>(basis.size()); ++k) {
    adjacent[basis[k].row].push_back({m + basis[k].col, k});
    adjacent[m + basis[k].col].push_back({basis[k].row, k});
  }
  std::vector<int> via(count, -1);
  std::vector<int> parent(count, -1);
  std::vector<int> queue{from};
  parent[from] = from;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int node = queue[head];
    for (auto [next, cell] : adjacent[node]) {
      if (parent[next] != -1) continue;
      parent[next] = node;
      via[next] = cell;
      queue.push_back(next);
    }
  }
  if (parent[to] == -1) throw SolverError("transportation basis is not a spanning tree");
  std::vector<int> path;
  for (int node = to; node != from; node = parent[node]) path.push_back(via[node]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

const Eigen::VectorXd& QuantileSamples::weights() const { return unit_grid().weights; }

double QuantileSamples::mean() const { return weights().dot(values); }

double QuantileSamples::second_moment() const { return weights().dot(values.cwiseAbs2()); }

QuantileSamples quantile_samples(const GridMeasure& mu) {
  const auto& grid = unit_grid();
  QuantileSamples q;
  q.values.resize(grid.points.size());
  for (Eigen::Index i = 0; i < grid.points.size(); ++i) q.values[i] = mu.quantile(grid.points[i]);
  return q;
}

TransportValue w2(const QuantileSamples& mu, const QuantileSamples& nu) {
  const double squared = mu.weights().dot((mu.values - nu.values).cwiseAbs2());
  return {std::sqrt(std::max(squared, 0.0)), "comonotone", kQuantileGridSize};
}

TransportValue w2(const GridMeasure& mu, const GridMeasure& nu) {
  return w2(quantile_samples(mu), quantile_samples(nu));
}

TransportValue w2(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  const auto& x = mu.locations();
  const auto& y = nu.locations();
  std::vector<double> left(mu.weights());
  std::vector<double> right(nu.weights());
  double squared = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < x.size() && j < y.size()) {
    const double step = std::min(left[i], right[j]);
    squared += step * (x[i] - y[j]) * (x[i] - y[j]);
    left[i] -= step;
    right[j] -= step;
    // The side with the smaller remainder is exhausted; on ties advance both.
    const bool done_left = left[i] <= right[j];
    const bool done_right = right[j] <= left[i];
    if (done_left) ++i;
    if (done_right) ++j;
  }
  return {std::sqrt(squared), "comonotone", mu.size() + nu.size()};
}

TransportValue w2_atomic_oracle(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  const int m = mu.size();
  const int n = nu.size();
  if (m > kMaxOracleAtoms || n > kMaxOracleAtoms)
    throw DomainError("transport oracle takes at most " + std::to_string(kMaxOracleAtoms) +
                      " atoms per side");
  auto cost = [&](int r, int c) {
    const double d = mu.locations()[r] - nu.locations()[c];
    return d * d;
  };

  std::vector<Cell> basis;
  {
    std::vector<double> supply(mu.weights());
    std::vector<double> demand(nu.weights());
    int r = 0;
    int c = 0;
    while (true) {
      const double q = std::min(supply[r], demand[c]);
      basis.push_back({r, c, q});
      supply[r] -= q;
      demand[c] -= q;
      if (r == m - 1 && c == n - 1) break;
      if ((supply[r] <= demand[c] && r < m - 1) || c == n - 1)
        ++r;
      else
        ++c;
    }
  }

  constexpr int kMaxPivots = 10000;
  for (int pivot = 0;; ++pivot) {
    if (pivot == kMaxPivots) throw SolverError("transportation simplex did not terminate");
    // Dual potentials with row potential 0 fixed at the first row.
    std::vector<double> row_pot(m, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> col_pot(n, std::numeric_limits<double>::quiet_NaN());
    row_pot[0] = 0.0;
    for (bool changed = true; changed;) {
      changed = false;
      for (const Cell& cell : basis) {
        const bool row_known = !std::isnan(row_pot[cell.row]);
        const bool col_known = !std::isnan(col_pot[cell.col]);
        if (row_known && !col_known) {
          col_pot[cell.col] = cost(cell.row, cell.col) - row_pot[cell.row];
          changed = true;
        } else if (col_known && !row_known) {
          row_pot[cell.row] = cost(cell.row, cell.col) - col_pot[cell.col];
          changed = true;
        }
      }
    }
    // Entering cell: first negative reduced cost in row-major order (Bland's rule).
    int enter_row = -1;
    int enter_col = -1;
    for (int r = 0; r < m && enter_row < 0; ++r) {
      for (int c = 0; c < n; ++c) {
        const bool in_basis = std::any_of(basis.begin(), basis.end(), [&](const Cell& cell) {
          return cell.row == r && cell.col == c;
        });
        if (in_basis) continue;
        const double scale = 1.0 + cost(r, c);
        if (cost(r, c) - row_pot[r] - col_pot[c] < -1e-14 * scale) {
          enter_row = r;
          enter_col = c;
          break;
        }
      }
    }
    if (enter_row < 0) break;

    // The cycle closes the tree path from the entering row to the entering column.
    const std::vector<int> path = tree_path(basis, m, n, enter_row, m + enter_col);
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (basis[path[k]].flow < theta) {
        theta = basis[path[k]].flow;
        leaving = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k)
      basis[path[k]].flow += (k % 2 == 0) ? -theta : theta;
    basis[leaving] = {enter_row, enter_col, theta};
  }

  double squared = 0.0;
  for (const Cell& cell : basis) squared += cell.flow * cost(cell.row, cell.col);
  return {std::sqrt(std::max(squared, 0.0)), "lp-oracle", m * n};
}

double max_correlation(const GridMeasure& mu, const GridMeasure& nu) {
  const QuantileSamples a = quantile_samples(mu);
  const QuantileSamples b = quantile_samples(nu);
  return a.weights().dot(a.values.cwiseProduct(b.values));
}

double max_correlation(const GridMeasure& mu, const AtomicMeasure& nu) {
  constexpr int kPieceRule = 256;
  const auto& rule = numerics::gauss_legendre(kPieceRule);
  double total = 0.0;
  double start = 0.0;
  for (int j = 0; j < nu.size(); ++j) {
    const double stop = (j + 1 == nu.size()) ? 1.0 : std::min(1.0, start + nu.weights()[j]);
    const double half = 0.5 * (stop - start);
    double piece = 0.0;
    for (int k = 0; k < kPieceRule; ++k)
      piece += rule.weights[k] * mu.quantile(start + half * (1.0 + rule.nodes[k]));
    total += nu.locations()[j] * half * piece;
    start = stop;
  }
  return total;
}

double translation_identity_check(const GridMeasure& mu, const GridMeasure& nu, double a) {
  const QuantileSamples q_mu = quantile_samples(mu);
  const QuantileSamples q_nu = quantile_samples(nu);
  const QuantileSamples q_shifted = quantile_samples(translate(mu, a));
  const double lhs = 0.5 * w2(q_shifted, q_nu).squared();
  const double rhs = 0.5 * w2(q_mu, q_nu).squared() + a * q_mu.mean() - a * q_nu.mean() + 0.5 * a * a;
  return std::abs(lhs - rhs);
}

double ssfti_functional(const GridMeasure& mu, const GridMeasure& nu) {
  return 0.5 * moment(nu, 2) - chi(nu) - 0.5 * w2(mu, nu).squared();
}

}  // namespace freelab
