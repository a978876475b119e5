#include "freelab/potentials.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>

#include "freelab/errors.hpp"
#include "freelab/format.hpp"
#include "freelab/numerics.hpp"

namespace freelab {

namespace {

constexpr int kConvexityProbes = 2048;
constexpr double kProbeHalfWidth = 16.0;

bool certify_convex(const Potential& u) {
  const double lo = std::max(u.domain_lo(), -kProbeHalfWidth);
  const double hi = std::min(u.domain_hi(), kProbeHalfWidth);
  if (!(hi > lo)) return true;
  const double h = (hi - lo) / (kConvexityProbes - 1);
  double prev2 = u(lo);
  double prev = u(lo + h);
  for (int i = 2; i < kConvexityProbes; ++i) {
    const double next = u(lo + h * i);
    if (next - 2 * prev + prev2 < -1e-9) return false;
    prev2 = prev;
    prev = next;
  }
  return true;
}

bool certify_growth(const Potential& u) {
  const double anchor = u(std::clamp(0.0, u.domain_lo(), u.domain_hi()));
  if (!std::isfinite(anchor)) return false;
  for (double sign : {-1.0, 1.0}) {
    if ((sign > 0 ? u.domain_hi() : -u.domain_lo()) < kInfinity) continue;
    double previous = -kInfinity;
    for (double r : {1e2, 1e3, 1e4}) {
      const double g = u(sign * r) - 2.0 * std::log(r);
      if (!(g > previous) || !(g > anchor + 10.0)) return false;
      previous = g;
    }
  }
  return true;
}

ScalarFn numeric_derivative(ScalarFn value, double lo, double hi) {
  return [value = std::move(value), lo, hi](double x) {
    const double step = 1e-6 * std::max(1.0, std::abs(x));
    const double a = std::max(lo, x - step);
    const double b = std::min(hi, x + step);
    return (value(b) - value(a)) / (b - a);
  };
}

}  // namespace

Potential::Potential(Parts parts) : parts_(std::move(parts)) {
  if (!(parts_.domain_hi > parts_.domain_lo))
    throw DomainError("potential '" + parts_.label + "' is identically +inf");
  if (!parts_.value) throw DomainError("potential '" + parts_.label + "' has no value evaluator");
  if (!parts_.derivative)
    parts_.derivative = numeric_derivative(parts_.value, parts_.domain_lo, parts_.domain_hi);
  std::sort(parts_.kinks.begin(), parts_.kinks.end());
  parts_.kinks.erase(std::unique(parts_.kinks.begin(), parts_.kinks.end()), parts_.kinks.end());
  convex_ = certify_convex(*this);
  growth_ok_ = certify_growth(*this);
}

double Potential::operator()(double x) const {
  if (!in_domain(x)) return kInfinity;
  return parts_.value(x);
}

double Potential::derivative(double x) const {
  return parts_.derivative(std::clamp(x, parts_.domain_lo, parts_.domain_hi));
}

double Potential::second_derivative(double x) const {
  if (parts_.second_derivative) return parts_.second_derivative(x);
  const double step = 1e-5 * std::max(1.0, std::abs(x));
  const double a = std::max(parts_.domain_lo, x - step);
  const double b = std::min(parts_.domain_hi, x + step);
  return (parts_.derivative(b) - parts_.derivative(a)) / (b - a);
}

Potential make_quadratic(double c) {
  return Potential({.value = [c](double x) { return 0.5 * c * x * x; },
                    .derivative = [c](double x) { return c * x; },
                    .second_derivative = [c](double) { return c; },
                    .label = "quadratic:c=" + format_number(c)});
}

Potential make_quartic(double g) {
  return Potential({.value = [g](double x) { return g * x * x * x * x; },
                    .derivative = [g](double x) { return 4.0 * g * x * x * x; },
                    .second_derivative = [g](double x) { return 12.0 * g * x * x; },
                    .label = "quartic:g=" + format_number(g)});
}

Potential make_abs() {
  return Potential({.value = [](double x) { return std::abs(x); },
                    .derivative = [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); },
                    .second_derivative = [](double) { return 0.0; },
                    .label = "abs",
                    .kinks = {0.0}});
}

Potential make_polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) coefficients.push_back(0.0);
  std::string label = "poly:";
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (coefficients[k] == 0.0) continue;
    if (label.back() != ':') label += ',';
    label += "c" + std::to_string(k) + "=" + format_number(coefficients[k]);
  }
  if (label.back() == ':') label += "c0=0";
  auto horner = [](const std::vector<double>& c, double x) {
    double sum = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) sum = sum * x + *it;
    return sum;
  };
  std::vector<double> d1;
  for (std::size_t k = 1; k < coefficients.size(); ++k) d1.push_back(k * coefficients[k]);
  std::vector<double> d2;
  for (std::size_t k = 1; k < d1.size(); ++k) d2.push_back(k * d1[k]);
  return Potential({.value = [=](double x) { return horner(coefficients, x); },
                    .derivative = [=](double x) { return horner(d1, x); },
                    .second_derivative = [=](double x) { return horner(d2, x); },
                    .label = label});
}

Potential make_arcsine_potential(double radius) {
  if (!(radius > 0.0)) throw DomainError("arcsine potential radius must be positive");
  const double level = std::numbers::ln2;
  return Potential({.domain_lo = -radius,
                    .domain_hi = radius,
                    .value = [level](double) { return level; },
                    .derivative = [](double) { return 0.0; },
                    .second_derivative = [](double) { return 0.0; },
                    .label = "arcsine:radius=" + format_number(radius)});
}

Potential restrict_domain(const Potential& u, double lo, double hi) {
  auto parts = u.parts();
  parts.domain_lo = std::max(lo, u.domain_lo());
  parts.domain_hi = std::min(hi, u.domain_hi());
  parts.label = "restrict:" + u.label() + ",lo=" + format_number(lo) + ",hi=" + format_number(hi);
  return Potential(std::move(parts));
}

Potential combine(const Potential& a, const Potential& b, double theta) {
  Potential::Parts parts;
  parts.domain_lo = std::max(a.domain_lo(), b.domain_lo());
  parts.domain_hi = std::min(a.domain_hi(), b.domain_hi());
  parts.value = [=](double x) { return theta * a(x) + (1 - theta) * b(x); };
  parts.derivative = [=](double x) { return theta * a.derivative(x) + (1 - theta) * b.derivative(x); };
  parts.second_derivative = [=](double x) {
    return theta * a.second_derivative(x) + (1 - theta) * b.second_derivative(x);
  };
  parts.label = "combine(" + a.label() + "|" + b.label() + "|theta=" + format_number(theta) + ")";
  parts.kinks = a.kinks();
  parts.kinks.insert(parts.kinks.end(), b.kinks().begin(), b.kinks().end());
  return Potential(std::move(parts));
}

Potential make_table_potential(const std::vector<std::pair<double, double>>& table,
                               std::string label) {
  const std::size_t n = table.size();
  if (n < 3) throw DomainError("potential table needs at least three rows");
  for (std::size_t i = 1; i < n; ++i)
    if (!(table[i].first > table[i - 1].first))
      throw DomainError("potential table x column must be strictly ascending");
  // Three-point slopes on the non-uniform grid.
  auto slopes = std::make_shared<std::vector<double>>(n);
  auto rows = std::make_shared<std::vector<std::pair<double, double>>>(table);
  (*slopes)[0] = (table[1].second - table[0].second) / (table[1].first - table[0].first);
  (*slopes)[n - 1] =
      (table[n - 1].second - table[n - 2].second) / (table[n - 1].first - table[n - 2].first);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto [x0, y0] = table[i - 1];
    const auto [x1, y1] = table[i];
    const auto [x2, y2] = table[i + 1];
    const double h0 = x1 - x0;
    const double h1 = x2 - x1;
    (*slopes)[i] = (h1 * h1 * (y1 - y0) + h0 * h0 * (y2 - y1)) / (h0 * h1 * (h0 + h1));
  }
  auto locate = [rows](double x) {
    auto it = std::upper_bound(rows->begin(), rows->end(), x,
                               [](double v, const auto& row) { return v < row.first; });
    std::size_t j = it == rows->begin() ? 0 : static_cast<std::size_t>(it - rows->begin()) - 1;
    return std::min(j, rows->size() - 2);
  };
  auto value = [rows, slopes, locate](double x) {
    const std::size_t j = locate(x);
    const auto [x0, y0] = (*rows)[j];
    const auto [x1, y1] = (*rows)[j + 1];
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    return (2 * t * t * t - 3 * t * t + 1) * y0 + (t * t * t - 2 * t * t + t) * h * (*slopes)[j] +
           (-2 * t * t * t + 3 * t * t) * y1 + (t * t * t - t * t) * h * (*slopes)[j + 1];
  };
  auto derivative = [rows, slopes, locate](double x) {
    const std::size_t j = locate(x);
    const auto [x0, y0] = (*rows)[j];
    const auto [x1, y1] = (*rows)[j + 1];
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    return ((6 * t * t - 6 * t) * y0 + (-6 * t * t + 6 * t) * y1) / h +
           (3 * t * t - 4 * t + 1) * (*slopes)[j] + (3 * t * t - 2 * t) * (*slopes)[j + 1];
  };
  return Potential({.domain_lo = table.front().first,
                    .domain_hi = table.back().first,
                    .value = value,
                    .derivative = derivative,
                    .label = std::move(label)});
}

namespace {

// Legendre transform of a convex potential: the maximizer of x*y - u(x) solves u'(x) = y.
Potential legendre_convex(const Potential& u) {
  const double xlo = std::max(u.domain_lo(), -kLegendreBox);
  const double xhi = std::min(u.domain_hi(), kLegendreBox);
  const double slope_lo = u.derivative(xlo);
  const double slope_hi = u.derivative(xhi);
  const double ylo = std::isfinite(u.domain_lo()) ? -kLegendreBox : std::max(-kLegendreBox, slope_lo);
  const double yhi = std::isfinite(u.domain_hi()) ? kLegendreBox : std::min(kLegendreBox, slope_hi);
  if (!(yhi > ylo)) throw DomainError("Legendre transform of '" + u.label() + "' is finite at a single point");

  // One-sided slopes at each kink of u: every y between them is maximized exactly at the kink.
  std::vector<std::array<double, 3>> corners;
  for (double k : u.kinks()) {
    if (!(k > xlo && k < xhi)) continue;
    const double step = 1e-9 * std::max(1.0, std::abs(k));
    corners.push_back({k, u.derivative(k - step), u.derivative(k + step)});
  }
  auto argmax = [u, xlo, xhi, corners](double y) {
    if (u.derivative(xlo) >= y) return xlo;
    if (u.derivative(xhi) <= y) return xhi;
    for (const auto& [k, left, right] : corners)
      if (y >= left && y <= right) return k;
    return numerics::find_root([&](double x) { return u.derivative(x) - y; }, xlo, xhi, 1e-15);
  };

  std::vector<double> kinks;
  if (std::isfinite(u.domain_lo())) kinks.push_back(slope_lo);
  if (std::isfinite(u.domain_hi())) kinks.push_back(slope_hi);
  // Flat stretches of u' become kinks of the transform; zeros of u'' become points where
  // the transform's derivative is not Lipschitz.
  constexpr int samples = 1025;
  double previous = u.derivative(xlo);
  for (int i = 1; i < samples; ++i) {
    const double x = xlo + (xhi - xlo) * i / (samples - 1);
    const double d = u.derivative(x);
    if (std::abs(d - previous) <= 1e-13 * std::max(1.0, std::abs(d))) kinks.push_back(d);
    if (i + 1 < samples && u.has_second_derivative() && u.second_derivative(x) == 0.0) kinks.push_back(d);
    previous = d;
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }),
              kinks.end());

  Potential::Parts parts;
  parts.domain_lo = ylo;
  parts.domain_hi = yhi;
  parts.value = [u, argmax](double y) {
    const double x = argmax(y);
    return x * y - u(x);
  };
  parts.derivative = argmax;
  parts.second_derivative = [u, argmax](double y) {
    const double x = argmax(y);
    const double curvature = u.second_derivative(x);
    if (curvature > 1e-8) return 1.0 / curvature;
    const double step = 1e-6 * std::max(1.0, std::abs(y));
    return (argmax(y + step) - argmax(y - step)) / (2 * step);
  };
  parts.label = "legendre:" + u.label();
  parts.kinks = std::move(kinks);
  return Potential(std::move(parts));
}

// Legendre transform of an arbitrary lower semicontinuous potential on a grid: the supremum
// is read off the lower convex hull of the sampled graph.
Potential legendre_grid(const Potential& u) {
  constexpr int samples = (1 << 14) + 1;
  const double xlo = std::max(u.domain_lo(), -kLegendreBox);
  const double xhi = std::min(u.domain_hi(), kLegendreBox);
  auto hull = std::make_shared<std::vector<std::pair<double, double>>>();
  for (int i = 0; i < samples; ++i) {
    const double x = xlo + (xhi - xlo) * i / (samples - 1);
    const double y = u(x);
    if (!std::isfinite(y)) continue;
    while (hull->size() >= 2) {
      const auto& [x1, y1] = (*hull)[hull->size() - 2];
      const auto& [x2, y2] = hull->back();
      if ((y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1)) hull->pop_back();
      else break;
    }
    hull->emplace_back(x, y);
  }
  if (hull->size() < 2) throw DomainError("potential '" + u.label() + "' is +inf on the Legendre box");
  auto argmax = [hull](double y) {
    // First hull vertex whose outgoing slope is >= y is the smallest maximizer.
    std::size_t lo = 0;
    std::size_t hi = hull->size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      const double slope = ((*hull)[mid + 1].second - (*hull)[mid].second) /
                           ((*hull)[mid + 1].first - (*hull)[mid].first);
      if (slope >= y) hi = mid;
      else lo = mid + 1;
    }
    return (*hull)[lo];
  };
  const auto& first = hull->front();
  const auto& second = (*hull)[1];
  const auto& last = hull->back();
  const auto& penultimate = (*hull)[hull->size() - 2];
  const double ylo = xlo > -kLegendreBox ? -kLegendreBox
                                          : std::max(-kLegendreBox, (second.second - first.second) / (second.first - first.first));
  const double yhi = xhi < kLegendreBox ? kLegendreBox
                                         : std::min(kLegendreBox, (last.second - penultimate.second) / (last.first - penultimate.first));
  Potential::Parts parts;
  parts.domain_lo = ylo;
  parts.domain_hi = yhi;
  parts.value = [argmax](double y) {
    const auto [x, ux] = argmax(y);
    return x * y - ux;
  };
  parts.derivative = [argmax](double y) { return argmax(y).first; };
  parts.label = "legendre:" + u.label();
  return Potential(std::move(parts));
}

}  // namespace

Potential legendre_transform(const Potential& u) {
  return u.is_convex() ? legendre_convex(u) : legendre_grid(u);
}

Potential moreau_yosida(const Potential& u, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("Moreau-Yosida parameter must be positive");
  if (!u.is_convex())
    throw PreconditionError("Moreau-Yosida regularization needs a convex potential", u.label());
  auto prox = [u, lambda](double x) {
    auto g = [&](double y) { return u.derivative(y) + (y - x) / lambda; };
    double lo = std::isfinite(u.domain_lo()) ? u.domain_lo() : x - 1.0;
    double hi = std::isfinite(u.domain_hi()) ? u.domain_hi() : x + 1.0;
    if (std::isfinite(u.domain_lo()) && g(lo) >= 0) return lo;
    if (std::isfinite(u.domain_hi()) && g(hi) <= 0) return hi;
    lo = std::min(lo, hi);
    if (!numerics::expand_bracket(g, lo, hi, u.domain_lo(), u.domain_hi()))
      throw SolverError("proximal point is not bracketed for '" + u.label() + "'");
    // Bisection: u' may jump, so only the sign change is meaningful.
    double glo = g(lo);
    if (glo == 0.0) return lo;
    if (g(hi) == 0.0) return hi;
    for (int iter = 0; iter < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo)); ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if ((gm < 0) == (glo < 0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  Potential::Parts parts;
  parts.value = [u, lambda, prox](double x) {
    const double y = prox(x);
    return u(y) + (y - x) * (y - x) / (2 * lambda);
  };
  parts.derivative = [lambda, prox](double x) { return (x - prox(x)) / lambda; };
  // A jump of u' at k makes the curvature of the envelope jump where the prox reaches k.
  for (double k : u.kinks()) {
    const double step = 1e-9 * std::max(1.0, std::abs(k));
    parts.kinks.push_back(k + lambda * u.derivative(k - step));
    parts.kinks.push_back(k + lambda * u.derivative(k + step));
  }
  parts.label = "my:" + u.label() + ",lam=" + format_number(lambda);
  return Potential(std::move(parts));
}

Potential shift_potential(const Potential& u, double z) {
  Potential::Parts parts;
  parts.domain_lo = u.domain_lo() - z;
  parts.domain_hi = u.domain_hi() - z;
  parts.value = [u, z](double x) { return u(z + x); };
  parts.derivative = [u, z](double x) { return u.derivative(z + x); };
  if (u.has_second_derivative()) parts.second_derivative = [u, z](double x) { return u.second_derivative(z + x); };
  for (double k : u.kinks()) parts.kinks.push_back(k - z);
  parts.label = "shifted:" + u.label() + ",z=" + format_number(z);
  return Potential(std::move(parts));
}

Potential tilt_linear(const Potential& u, double lambda) {
  auto parts = u.parts();
  parts.value = [u, lambda](double x) { return u(x) + lambda * x; };
  parts.derivative = [u, lambda](double x) { return u.derivative(x) + lambda; };
  if (u.has_second_derivative()) parts.second_derivative = [u](double x) { return u.second_derivative(x); };
  parts.label = "tilted:" + u.label() + ",lam=" + format_number(lambda);
  return Potential(std::move(parts));
}

}  // namespace freelab
