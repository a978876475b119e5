#include "freelab/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "freelab/errors.hpp"

namespace freelab::numerics {

namespace {

QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints, double tol) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, cuts[i], cuts[i + 1],
                                                                           15, tol);
  }
  return total;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double xtol) {
  const double flo = f(lo);
  if (flo == 0.0) return lo;
  const double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw SolverError("root is not bracketed");
  std::uintmax_t max_iter = 200;
  auto tolerance = [xtol](double x, double y) {
    return std::abs(x - y) <= xtol * std::max(1.0, std::abs(x));
  };
  const auto [left, right] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tolerance, max_iter);
  return 0.5 * (left + right);
}

bool expand_bracket(const std::function<double(double)>& f, double& lo, double& hi,
                    double limit_lo, double limit_hi, int max_steps) {
  lo = std::max(lo, limit_lo);
  hi = std::min(hi, limit_hi);
  double flo = f(lo);
  double fhi = f(hi);
  for (int step = 0; step < max_steps; ++step) {
    if ((flo <= 0) != (fhi <= 0) || flo == 0 || fhi == 0) return true;
    const double width = hi - lo;
    if (lo <= limit_lo && hi >= limit_hi) return false;
    if (lo > limit_lo) {
      lo = std::max(limit_lo, lo - width);
      flo = f(lo);
    }
    if (hi < limit_hi) {
      hi = std::min(limit_hi, hi + width);
      fhi = f(hi);
    }
  }
  return (flo <= 0) != (fhi <= 0);
}

double central_second_derivative(const std::function<double(double)>& derivative, double x) {
  const double h = 1e-5 * std::max(1.0, std::abs(x));
  return (derivative(x + h) - derivative(x - h)) / (2.0 * h);
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw DomainError("monotone cubic needs matching tables of size >= 2");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw DomainError("monotone cubic knots must increase");
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  slope_.assign(n, 0.0);
  slope_[0] = secant[0];
  slope_[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (secant[i - 1] * secant[i] <= 0.0) continue;
    // Weighted harmonic mean keeps each cell monotone.
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    const double w0 = 2.0 * h1 + h0;
    const double w1 = h1 + 2.0 * h0;
    slope_[i] = (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i]);
  }
  for (std::size_t i : {std::size_t{0}, n - 1}) {
    const double s = secant[i == 0 ? 0 : n - 2];
    if (slope_[i] * s <= 0.0) slope_[i] = 0.0;
    if (std::abs(slope_[i]) > 3.0 * std::abs(s)) slope_[i] = 3.0 * s;
  }
  cumulative_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = x_[i + 1] - x_[i];
    cumulative_[i + 1] = cumulative_[i] + h * (0.5 * (y_[i] + y_[i + 1]) + h * (slope_[i] - slope_[i + 1]) / 12.0);
  }
}

std::size_t MonotoneCubic::cell(double t) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  return std::clamp<std::size_t>(static_cast<std::size_t>(it - x_.begin()), 1, x_.size() - 1) - 1;
}

double MonotoneCubic::operator()(double t) const {
  if (t <= x_.front()) return y_.front();
  if (t >= x_.back()) return y_.back();
  const std::size_t j = cell(t);
  const double h = x_[j + 1] - x_[j];
  const double s = (t - x_[j]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y_[j] + (s3 - 2 * s2 + s) * h * slope_[j] + (-2 * s3 + 3 * s2) * y_[j + 1] +
         (s3 - s2) * h * slope_[j + 1];
}

double MonotoneCubic::derivative(double t) const {
  if (t < x_.front() || t > x_.back()) return 0.0;
  const std::size_t j = cell(t);
  const double h = x_[j + 1] - x_[j];
  const double s = (t - x_[j]) / h;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * y_[j] + (6 * s - 6 * s2) * y_[j + 1]) / h + (3 * s2 - 4 * s + 1) * slope_[j] +
         (3 * s2 - 2 * s) * slope_[j + 1];
}

double MonotoneCubic::integral(double t) const {
  if (t <= x_.front()) return (t - x_.front()) * y_.front();
  if (t >= x_.back()) return cumulative_.back() + (t - x_.back()) * y_.back();
  const std::size_t j = cell(t);
  const double h = x_[j + 1] - x_[j];
  const double s = (t - x_[j]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s3 * s;
  return cumulative_[j] + h * (y_[j] * (s - s3 + 0.5 * s4) + h * slope_[j] * (0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4) +
                               y_[j + 1] * (s3 - 0.5 * s4) + h * slope_[j + 1] * (0.25 * s4 - s3 / 3.0));
}

}  // namespace freelab::numerics
