#include "freelab/logpotential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "freelab/errors.hpp"

namespace freelab {

namespace {

constexpr double kPi = std::numbers::pi;
const double kChiShift = 0.75 + 0.5 * std::log(2 * kPi);

double theta_of(const GridMeasure& mu, double x) {
  return std::acos(std::clamp((mu.center() - x) / mu.radius(), -1.0, 1.0));
}

}  // namespace

EnergyValue log_energy(const GridMeasure& mu) {
  // log|x - y| expands in products cos(k theta) cos(k phi); the energy is diagonal in k.
  const auto& coef = mu.cosine_coefficients();
  const int n = static_cast<int>(coef.size());
  double sum = 0.0;
  double tail = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    const double term = coef[k] * coef[k] / k;
    sum += term;
    if (k > n / 2) tail += term;
  }
  const double scale = kPi * kPi / 2;
  EnergyValue result;
  result.value = std::log(mu.radius() / 2) - scale * sum;
  result.quadrature_error_estimate = 2 * scale * tail + std::abs(mu.total_mass_error()) * 1e-8 + 1e-15;
  return result;
}

EnergyValue log_energy(const AtomicMeasure&) {
  throw DomainError("logarithmic energy of an atomic measure is -inf");
}

double log_potential(const GridMeasure& mu, double x) {
  if (x < mu.support_lo() || x > mu.support_hi())
    throw DomainError("log potential is only evaluated on the support");
  const double theta = theta_of(mu, x);
  const auto& coef = mu.cosine_coefficients();
  // cos(k theta) by the three-term recurrence.
  const double c1 = std::cos(theta);
  double prev = 1.0;
  double current = c1;
  double sum = 0.0;
  for (Eigen::Index k = 1; k < coef.size(); ++k) {
    sum += coef[k] / k * current;
    const double next = 2 * c1 * current - prev;
    prev = current;
    current = next;
  }
  return std::log(mu.radius() / 2) - kPi * sum;
}

double chi(const GridMeasure& mu) { return log_energy(mu).value + kChiShift; }

double chi_rel(const GridMeasure& mu, const Potential& u) {
  const double potential_mass = mu.integrate([&u](double x) { return u(x); });
  if (!std::isfinite(potential_mass))
    throw DomainError("potential '" + u.label() + "' is infinite on a set of positive mass");
  return chi(mu) - potential_mass;
}

double chi_plus(const GridMeasure& mu) {
  if (mu.support_lo() < -1e-12) throw DomainError("chi_plus needs a measure supported in [0, inf)");
  return chi(mu) + 0.5 * std::log(kPi / 2) + 0.75;
}

double relative_entropy_semicircular(const GridMeasure& mu) {
  return 0.5 * moment(mu, 2) - chi(mu) + 0.5 * std::log(2 * kPi);
}

double hilbert_transform(const GridMeasure& mu, double t) {
  const double r = mu.radius();
  const double s = (t - mu.center()) / r;
  if (std::abs(std::abs(s) - 1.0) < 1e-12) throw DomainError("Hilbert transform is singular at a support endpoint");
  const auto& coef = mu.cosine_coefficients();
  const int n = static_cast<int>(coef.size());
  if (std::abs(s) < 1.0) {
    // t = c - r cos(theta); PV integral of cos(k phi)/(cos phi - cos theta) = pi sin(k theta)/sin(theta).
    const double theta = std::acos(-s);
    const double cos_theta = std::cos(theta);
    // U_{k-1}(cos theta) = sin(k theta)/sin(theta), three-term recurrence.
    double u_prev = 0.0;
    double u_current = 1.0;
    double sum = 0.0;
    for (int k = 1; k < n; ++k) {
      sum += coef[k] * u_current;
      const double next = 2 * cos_theta * u_current - u_prev;
      u_prev = u_current;
      u_current = next;
    }
    return sum / r;
  }
  const double root = std::sqrt(s * s - 1.0);
  const double q = std::abs(s) - root;
  double power = 1.0;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double sign = (s > 0 && k % 2 == 1) ? -1.0 : 1.0;
    sum += sign * coef[k] * power;
    power *= q;
    if (power < 1e-300) break;
  }
  return (s > 0 ? 1.0 : -1.0) * sum / (r * root);
}

double log_jacobian(const GridMeasure& rho, const Potential& u) {
  const auto& x = rho.nodes();
  const auto& w = rho.angular_weights();
  const int n = rho.size();
  std::vector<int> active;
  for (int i = 0; i < n; ++i)
    if (w[i] > 0) active.push_back(i);
  std::vector<double> slope(n);
  std::vector<double> log_curvature(n);
  for (int i : active) slope[i] = u.derivative(x[i]);
  for (int i : active) {
    double curvature = u.second_derivative(x[i]);
    if (!(curvature > 0) && i > 0 && i + 1 < n)
      curvature = (slope[i + 1] - slope[i - 1]) / (x[i + 1] - x[i - 1]);
    log_curvature[i] = curvature > 0 ? std::log(curvature) : -kInfinity;
  }
  const double h = kPi / (n - 1);
  auto trapezoid = [n](int i) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
  double total = 0.0;
  for (int i : active) {
    double row = 0.0;
    for (int j : active) {
      double value;
      if (i == j) {
        value = log_curvature[i];
      } else {
        const double quotient = (slope[i] - slope[j]) / (x[i] - x[j]);
        value = quotient > 0 ? std::log(quotient) : -kInfinity;
      }
      row += trapezoid(j) * w[j] * value;
    }
    total += trapezoid(i) * w[i] * row;
    if (total == -kInfinity) return -kInfinity;
  }
  return total * h * h;
}

double euler_lagrange_residual(const GridMeasure& mu, const Potential& u) {
  constexpr int probes = 101;
  const double margin = 1e-3 * (mu.support_hi() - mu.support_lo());
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    const double theta = kPi * (0.05 + 0.9 * k / (probes - 1));
    const double t = mu.center() - mu.radius() * std::cos(theta);
    const bool near_kink = std::any_of(u.kinks().begin(), u.kinks().end(),
                                       [&](double kink) { return std::abs(kink - t) < margin; });
    if (near_kink) continue;
    worst = std::max(worst, std::abs(2 * kPi * hilbert_transform(mu, t) - u.derivative(t)));
  }
  return worst;
}

std::vector<Polynomial> default_schwinger_dyson_tests() {
  return {{1.0}, {0.0, 1.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, 0.0, 1.0}};
}

double schwinger_dyson_residual(const GridMeasure& mu, const Potential& u,
                                const std::vector<Polynomial>& test_functions) {
  int degree = 0;
  for (const auto& f : test_functions) degree = std::max<int>(degree, f.size());
  if (degree > 7) throw DomainError("Schwinger-Dyson test functions are limited to degree 6");
  std::vector<double> moments(degree + 1);
  for (int k = 0; k <= degree; ++k) moments[k] = moment(mu, k);
  double worst = 0.0;
  for (const auto& f : test_functions) {
    auto evaluate = [&f](double x) {
      double sum = 0.0;
      for (auto it = f.rbegin(); it != f.rend(); ++it) sum = sum * x + *it;
      return sum;
    };
    const double lhs = mu.integrate([&](double x) { return u.derivative(x) * evaluate(x); });
    // (x^k - y^k)/(x - y) = sum_j x^j y^(k-1-j), integrated against mu x mu.
    double rhs = 0.0;
    for (std::size_t k = 1; k < f.size(); ++k)
      for (std::size_t j = 0; j < k; ++j) rhs += f[k] * moments[j] * moments[k - 1 - j];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace freelab
