#include "freelab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "freelab/errors.hpp"

namespace freelab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_nodes(int nodes) {
  if (nodes < 16) throw DomainError("grid needs at least 16 nodes, got " + std::to_string(nodes));
}

// Extrapolates an endpoint angular weight from its two neighbours.
double extrapolate_edge(double next, double after) { return std::max(0.0, 2.0 * next - after); }

// Value of the cubic Hermite interpolant on [0, h] at s with end values/slopes.
double hermite(double s, double h, double f0, double f1, double d0, double d1) {
  const double t = s / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

}  // namespace

GridMeasure GridMeasure::from_angular_weights(double lo, double hi, Eigen::VectorXd weights) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("support must be a finite interval with lo < hi");
  require_nodes(static_cast<int>(weights.size()));
  const double peak = weights.cwiseAbs().maxCoeff();
  if (!std::isfinite(peak) || peak <= 0.0) throw DomainError("angular weights must be finite and not all zero");
  for (double& w : weights) {
    if (w < -1e-9 * peak) throw DomainError("negative density sample");
    w = std::max(w, 0.0);
  }
  GridMeasure mu;
  mu.lo_ = lo;
  mu.hi_ = hi;
  mu.weights_ = std::move(weights);
  mu.finalize();
  return mu;
}

void GridMeasure::finalize(const Eigen::VectorXd* cdf) {
  const int n = static_cast<int>(weights_.size());
  const int panels = n - 1;
  const double h = kPi / panels;
  const double c = center();
  const double r = radius();

  thetas_.resize(n);
  nodes_.resize(n);
  for (int i = 0; i < n; ++i) {
    thetas_[i] = h * i;
    nodes_[i] = c - r * std::cos(thetas_[i]);
  }
  nodes_[0] = lo_;
  nodes_[panels] = hi_;

  double mass = 0.5 * (weights_[0] + weights_[panels]);
  for (int i = 1; i < panels; ++i) mass += weights_[i];
  mass *= h;
  mass_error_ = mass - 1.0;
  weights_ /= mass;

  density_.resize(n);
  for (int i = 1; i < panels; ++i) density_[i] = weights_[i] / (r * std::sin(thetas_[i]));
  const double inf = std::numeric_limits<double>::infinity();
  density_[0] = weights_[0] > 0 ? inf : std::max(0.0, 2 * density_[1] - density_[2]);
  density_[panels] =
      weights_[panels] > 0 ? inf : std::max(0.0, 2 * density_[panels - 1] - density_[panels - 2]);

  // Discrete cosine transform (type I) through a lookup table indexed by k*i mod 2N.
  const int period = 2 * panels;
  std::vector<double> cos_table(period);
  std::vector<double> sin_table(period);
  for (int m = 0; m < period; ++m) {
    cos_table[m] = std::cos(kPi * m / panels);
    sin_table[m] = std::sin(kPi * m / panels);
  }
  coefficients_.resize(n);
  if (cdf != nullptr) {
    cdf_ = *cdf;
    cdf_[0] = 0.0;
    cdf_[panels] = 1.0;
    for (int i = 1; i < n; ++i) cdf_[i] = std::clamp(std::max(cdf_[i], cdf_[i - 1]), 0.0, 1.0);
    // integral of cos(k theta) w = k * integral of sin(k theta) (F(theta) - theta/pi).
    coefficients_[0] = 1.0 / kPi;
    for (int k = 1; k <= panels; ++k) {
      double sum = 0.0;
      int m = 0;
      for (int i = 1; i < panels; ++i) {
        m += k;
        if (m >= period) m -= period;
        sum += sin_table[m] * (cdf_[i] - thetas_[i] / kPi);
      }
      coefficients_[k] = 2.0 / kPi * k * sum * h;
    }
    coefficients_[panels] *= 0.5;
    return;
  }
  for (int k = 0; k <= panels; ++k) {
    double sum = 0.5 * (weights_[0] + (k % 2 == 0 ? 1.0 : -1.0) * weights_[panels]);
    int m = 0;
    for (int i = 1; i < panels; ++i) {
      m += k;
      if (m >= period) m -= period;
      sum += weights_[i] * cos_table[m];
    }
    coefficients_[k] = 2.0 * sum / panels;
  }
  coefficients_[0] *= 0.5;
  coefficients_[panels] *= 0.5;

  cdf_.resize(n);
  cdf_[0] = 0.0;
  for (int i = 1; i < panels; ++i) {
    double sum = coefficients_[0] * thetas_[i];
    int m = 0;
    for (int k = 1; k <= panels; ++k) {
      m += i;
      if (m >= period) m -= period;
      sum += coefficients_[k] * sin_table[m] / k;
    }
    cdf_[i] = std::clamp(sum, 0.0, 1.0);
  }
  cdf_[panels] = 1.0;
  for (int i = 1; i < n; ++i) cdf_[i] = std::max(cdf_[i], cdf_[i - 1]);
}

GridMeasure GridMeasure::from_density(double lo, double hi,
                                      const std::function<double(double)>& density, int nodes) {
  require_nodes(nodes);
  if (!(hi > lo)) throw DomainError("support must satisfy lo < hi");
  const int panels = nodes - 1;
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  Eigen::VectorXd w(nodes);
  for (int i = 1; i < panels; ++i) {
    const double theta = kPi * i / panels;
    w[i] = density(c - r * std::cos(theta)) * r * std::sin(theta);
  }
  w[0] = std::isfinite(density(lo)) ? 0.0 : extrapolate_edge(w[1], w[2]);
  w[panels] = std::isfinite(density(hi)) ? 0.0 : extrapolate_edge(w[panels - 1], w[panels - 2]);
  return from_angular_weights(lo, hi, std::move(w));
}

GridMeasure GridMeasure::from_table(const std::vector<std::pair<double, double>>& table, int nodes) {
  if (table.size() < 2) throw DomainError("density table needs at least two rows");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i].second >= 0.0) || !std::isfinite(table[i].second))
      throw DomainError("density table has a negative or non-finite value at row " + std::to_string(i + 1));
    if (i > 0 && !(table[i].first > table[i - 1].first))
      throw DomainError("density table x column must be strictly ascending");
  }
  auto interpolate = [&table](double x) {
    auto it = std::lower_bound(table.begin(), table.end(), x,
                               [](const auto& row, double v) { return row.first < v; });
    if (it == table.begin()) return table.front().second;
    if (it == table.end()) return table.back().second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  };
  return from_density(table.front().first, table.back().first, interpolate, nodes);
}

double GridMeasure::integrate(const std::function<double(double)>& f) const {
  const int panels = size() - 1;
  double sum = 0.0;
  if (weights_[0] > 0) sum += 0.5 * weights_[0] * f(nodes_[0]);
  if (weights_[panels] > 0) sum += 0.5 * weights_[panels] * f(nodes_[panels]);
  for (int i = 1; i < panels; ++i) sum += weights_[i] * f(nodes_[i]);
  return sum * kPi / panels;
}

double GridMeasure::theta_of(double x) const {
  return std::acos(std::clamp((center() - x) / radius(), -1.0, 1.0));
}

double GridMeasure::cdf_theta(double theta) const {
  const int panels = size() - 1;
  const double h = kPi / panels;
  const int j = std::clamp(static_cast<int>(theta / h), 0, panels - 1);
  const double value =
      hermite(theta - thetas_[j], h, cdf_[j], cdf_[j + 1], weights_[j], weights_[j + 1]);
  return std::clamp(value, cdf_[j], cdf_[j + 1]);
}

double GridMeasure::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  return cdf_theta(theta_of(x));
}

double GridMeasure::quantile(double p) const {
  if (p <= 0.0) return lo_;
  if (p >= 1.0) return hi_;
  const int panels = size() - 1;
  const auto begin = cdf_.data();
  int j = static_cast<int>(std::upper_bound(begin, begin + size(), p) - begin) - 1;
  j = std::clamp(j, 0, panels - 1);
  if (cdf_[j + 1] <= cdf_[j]) return nodes_[j];
  const double h = kPi / panels;
  double a = 0.0;
  double b = h;
  for (int iter = 0; iter < 60 && b - a > 1e-16; ++iter) {
    const double mid = 0.5 * (a + b);
    const double value = hermite(mid, h, cdf_[j], cdf_[j + 1], weights_[j], weights_[j + 1]);
    (value < p ? a : b) = mid;
  }
  return center() - radius() * std::cos(thetas_[j] + 0.5 * (a + b));
}

double GridMeasure::density_at(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  const double theta = theta_of(x);
  const double s = std::sin(theta);
  const int panels = size() - 1;
  const double h = kPi / panels;
  const int j = std::clamp(static_cast<int>(theta / h), 0, panels - 1);
  const double t = (theta - thetas_[j]) / h;
  if (s <= 0.0) {
    const double w = t < 0.5 ? weights_[j] : weights_[j + 1];
    return w > 0 ? std::numeric_limits<double>::infinity() : density_[j];
  }
  // Cubic Lagrange through nodes j-1 .. j+2; the weights are even about theta = 0 and pi.
  const auto at = [&](int i) { return weights_[i < 0 ? -i : (i > panels ? 2 * panels - i : i)]; };
  const double w = -t * (t - 1) * (t - 2) / 6 * at(j - 1) + (t + 1) * (t - 1) * (t - 2) / 2 * at(j) -
                   (t + 1) * t * (t - 2) / 2 * at(j + 1) + (t + 1) * t * (t - 1) / 6 * at(j + 2);
  return std::max(0.0, w) / (radius() * s);
}

AtomicMeasure::AtomicMeasure(std::vector<double> locations, std::vector<double> weights)
    : locations_(std::move(locations)), weights_(std::move(weights)) {
  if (locations_.empty() || locations_.size() != weights_.size())
    throw DomainError("atomic measure needs matching, nonempty locations and weights");
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0)) throw DomainError("atomic weights must be nonnegative");
    if (i > 0 && !(locations_[i] > locations_[i - 1]))
      throw DomainError("atom locations must be strictly ascending");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("atomic weights must sum to 1");
}

double AtomicMeasure::quantile(double p) const {
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < weights_.size(); ++i) {
    cumulative += weights_[i];
    if (p <= cumulative) return locations_[i];
  }
  return locations_.back();
}

double AtomicMeasure::barycenter() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) sum += weights_[i] * locations_[i];
  return sum;
}

GridMeasure make_semicircular(double mean, double variance, int nodes) {
  if (!(variance > 0.0)) throw DomainError("semicircular variance must be positive");
  require_nodes(nodes);
  const double r = 2.0 * std::sqrt(variance);
  Eigen::VectorXd w(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double s = std::sin(kPi * i / (nodes - 1));
    w[i] = 2.0 / kPi * s * s;
  }
  w[0] = 0.0;
  w[nodes - 1] = 0.0;
  return GridMeasure::from_angular_weights(mean - r, mean + r, std::move(w));
}

GridMeasure make_arcsine(double radius, int nodes, double center) {
  if (!(radius > 0.0)) throw DomainError("arcsine radius must be positive");
  require_nodes(nodes);
  return GridMeasure::from_angular_weights(center - radius, center + radius,
                                           Eigen::VectorXd::Constant(nodes, 1.0 / kPi));
}

GridMeasure make_marchenko_pastur_family(double c, int nodes) {
  if (!(c > 0.0)) throw DomainError("Marchenko-Pastur parameter must be positive");
  require_nodes(nodes);
  Eigen::VectorXd w(nodes);
  for (int i = 0; i < nodes; ++i) w[i] = (1.0 + std::cos(kPi * i / (nodes - 1))) / kPi;
  w[nodes - 1] = 0.0;
  return GridMeasure::from_angular_weights(0.0, 4.0 * c, std::move(w));
}

double moment(const GridMeasure& mu, int k) {
  if (k < 0) throw DomainError("moment order must be nonnegative");
  if (k == 0) return 1.0;
  return mu.integrate([k](double x) { return std::pow(x, k); });
}

double barycenter(const GridMeasure& mu) { return moment(mu, 1); }

GridMeasure translate(const GridMeasure& mu, double a) {
  return GridMeasure::from_angular_weights(mu.support_lo() + a, mu.support_hi() + a,
                                           mu.angular_weights());
}

GridMeasure pushforward_monotone(const GridMeasure& mu, const std::function<double(double)>& map,
                                 const std::function<double(double)>& derivative) {
  const int n = mu.size();
  const auto& x = mu.nodes();
  Eigen::VectorXd images(n);
  for (int i = 0; i < n; ++i) images[i] = map(x[i]);
  const double scale = std::max(1.0, images.cwiseAbs().maxCoeff());
  for (int i = 1; i < n; ++i) {
    if (!std::isfinite(images[i])) throw DomainError("map is not finite on the support");
    if (images[i] < images[i - 1] - 1e-12 * scale)
      throw PreconditionError("map is not nondecreasing on the support",
                              "x=" + std::to_string(x[i - 1]) + ", x'=" + std::to_string(x[i]));
  }
  const double lo = images[0];
  const double hi = images[n - 1];
  if (!(hi - lo > 1e-12 * scale)) throw DomainError("map collapses the support to a point");

  auto preimage = [&](double y) {
    double a = mu.support_lo();
    double b = mu.support_hi();
    for (int iter = 0; iter < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++iter) {
      const double mid = 0.5 * (a + b);
      (map(mid) < y ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };

  const int panels = n - 1;
  const double h = kPi / panels;
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  auto pulled_cdf = [&](double phi) { return mu.cdf(preimage(c - r * std::cos(phi))); };
  Eigen::VectorXd w(n);
  Eigen::VectorXd cdf(n);
  for (int j = 1; j < panels; ++j) {
    const double phi = h * j;
    const double xj = preimage(c - r * std::cos(phi));
    cdf[j] = mu.cdf(xj);
    if (derivative) {
      const double d = derivative(xj);
      const double source = mu.density_at(xj);
      w[j] = (d > 0 && std::isfinite(source)) ? source / d * r * std::sin(phi) : 0.0;
    } else {
      const double eps = 1e-3 * h;
      w[j] = std::max(0.0, (pulled_cdf(phi + eps) - pulled_cdf(phi - eps)) / (2 * eps));
    }
  }
  w[0] = extrapolate_edge(w[1], w[2]);
  w[panels] = extrapolate_edge(w[panels - 1], w[panels - 2]);
  GridMeasure result;
  result.lo_ = lo;
  result.hi_ = hi;
  result.weights_ = std::move(w);
  result.finalize(&cdf);
  return result;
}

GridMeasure mixture(const GridMeasure& a, const GridMeasure& b, double weight, int nodes) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("mixture weight must lie in [0, 1]");
  require_nodes(nodes);
  // The cumulative values are combined exactly; sampled densities alone lose the mass near an
  // interior singularity of either component.
  GridMeasure result;
  result.lo_ = std::min(a.support_lo(), b.support_lo());
  result.hi_ = std::max(a.support_hi(), b.support_hi());
  const int panels = nodes - 1;
  const double c = result.center();
  const double r = result.radius();
  Eigen::VectorXd w(nodes);
  Eigen::VectorXd cdf(nodes);
  for (int i = 1; i < panels; ++i) {
    const double theta = kPi * i / panels;
    const double x = c - r * std::cos(theta);
    const double density = weight * a.density_at(x) + (1 - weight) * b.density_at(x);
    w[i] = std::isfinite(density) ? density * r * std::sin(theta) : 0.0;
    cdf[i] = weight * a.cdf(x) + (1 - weight) * b.cdf(x);
  }
  w[0] = extrapolate_edge(w[1], w[2]);
  w[panels] = extrapolate_edge(w[panels - 1], w[panels - 2]);
  result.weights_ = std::move(w);
  result.finalize(&cdf);
  return result;
}

double ks_distance(const GridMeasure& a, const GridMeasure& b) {
  double worst = 0.0;
  for (const GridMeasure* m : {&a, &b})
    for (double x : m->nodes()) worst = std::max(worst, std::abs(a.cdf(x) - b.cdf(x)));
  return worst;
}

}  // namespace freelab
