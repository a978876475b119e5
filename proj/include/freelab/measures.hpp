#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace freelab {

inline constexpr int kDefaultNodes = 4096;

// Compactly supported probability measure sampled on a Chebyshev grid.
//
// Nodes are x_i = center - radius * cos(theta_i) with theta_i uniform on [0, pi].
// Besides the density we keep the angular weight w(theta) = density(x) * radius * sin(theta),
// which stays finite at inverse-square-root edges, and its cosine coefficients.
class GridMeasure {
 public:
  GridMeasure() = default;

  // Builds from angular weights at the nodes. Weights are renormalized to unit mass.
  static GridMeasure from_angular_weights(double lo, double hi, Eigen::VectorXd weights);

  // Samples a density on [lo, hi]. Non-finite endpoint values are extrapolated in theta.
  static GridMeasure from_density(double lo, double hi, const std::function<double(double)>& density,
                                  int nodes = kDefaultNodes);

  // Interpolates tabulated (x, density) pairs, ascending in x.
  static GridMeasure from_table(const std::vector<std::pair<double, double>>& table,
                                int nodes = kDefaultNodes);

  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  double center() const { return 0.5 * (lo_ + hi_); }
  double radius() const { return 0.5 * (hi_ - lo_); }
  int size() const { return static_cast<int>(nodes_.size()); }

  const Eigen::VectorXd& nodes() const { return nodes_; }
  // Density at the nodes; +inf where the measure has an integrable endpoint blow-up.
  const Eigen::VectorXd& density() const { return density_; }
  const Eigen::VectorXd& angular_weights() const { return weights_; }
  // Chebyshev coefficients c_k with w(theta) = sum_k c_k cos(k theta), c_0 = 1/pi after normalization.
  const Eigen::VectorXd& cosine_coefficients() const { return coefficients_; }
  // CDF at the nodes: the quantile table pairs (cdf_values()[i], nodes()[i]).
  const Eigen::VectorXd& cdf_values() const { return cdf_; }
  double total_mass_error() const { return mass_error_; }

  // Integral of f against the measure (trapezoid in theta).
  double integrate(const std::function<double(double)>& f) const;
  double cdf(double x) const;
  double quantile(double p) const;
  double density_at(double x) const;

 private:
  // Completes the grid. When `cdf` is supplied it is taken as the source of truth for the
  // CDF and the cosine coefficients are derived from it instead of from the weights.
  void finalize(const Eigen::VectorXd* cdf = nullptr);
  friend GridMeasure pushforward_monotone(const GridMeasure&, const std::function<double(double)>&,
                                          const std::function<double(double)>&);
  friend GridMeasure mixture(const GridMeasure&, const GridMeasure&, double, int);
  double theta_of(double x) const;
  double cdf_theta(double theta) const;

  double lo_ = 0.0;
  double hi_ = 0.0;
  Eigen::VectorXd thetas_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd density_;
  Eigen::VectorXd coefficients_;
  Eigen::VectorXd cdf_;
  double mass_error_ = 0.0;
};

// Finitely many atoms. Point masses live here, never in GridMeasure.
class AtomicMeasure {
 public:
  AtomicMeasure(std::vector<double> locations, std::vector<double> weights);

  const std::vector<double>& locations() const { return locations_; }
  const std::vector<double>& weights() const { return weights_; }
  int size() const { return static_cast<int>(locations_.size()); }
  double quantile(double p) const;
  double barycenter() const;

 private:
  std::vector<double> locations_;
  std::vector<double> weights_;
};

GridMeasure make_semicircular(double mean, double variance, int nodes = kDefaultNodes);
GridMeasure make_arcsine(double radius, int nodes = kDefaultNodes, double center = 0.0);
GridMeasure make_marchenko_pastur_family(double c, int nodes = kDefaultNodes);

double moment(const GridMeasure& mu, int k);
double barycenter(const GridMeasure& mu);
GridMeasure translate(const GridMeasure& mu, double a);

// Pushforward by a nondecreasing map. `derivative` may be empty, in which case
// T' is taken by central differences.
GridMeasure pushforward_monotone(const GridMeasure& mu, const std::function<double(double)>& map,
                                 const std::function<double(double)>& derivative = {});

// Convex combination weight * a + (1 - weight) * b on the hull of the supports. Cumulative
// values at the nodes are exact; moments are only accurate to about 1e-6 when a component edge
// falls inside the hull, and much worse if that edge carries an inverse square-root density.
GridMeasure mixture(const GridMeasure& a, const GridMeasure& b, double weight,
                    int nodes = kDefaultNodes);

double ks_distance(const GridMeasure& a, const GridMeasure& b);

}  // namespace freelab
