#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace freelab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
// Box to which numerical Legendre transforms are restricted.
inline constexpr double kLegendreBox = 64.0;

using ScalarFn = std::function<double(double)>;

// Scalar potential on an interval (possibly the whole line); +inf outside its domain.
class Potential {
 public:
  struct Parts {
    double domain_lo = -kInfinity;
    double domain_hi = kInfinity;
    ScalarFn value;
    ScalarFn derivative;
    ScalarFn second_derivative;  // optional
    std::string label;
    std::vector<double> kinks;  // points where the derivative may jump
  };

  // Builds the potential and computes its convexity and growth certificates by sampling.
  explicit Potential(Parts parts);

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  bool has_second_derivative() const { return static_cast<bool>(parts_.second_derivative); }

  double domain_lo() const { return parts_.domain_lo; }
  double domain_hi() const { return parts_.domain_hi; }
  bool in_domain(double x) const { return x >= parts_.domain_lo && x <= parts_.domain_hi; }
  bool is_convex() const { return convex_; }
  bool growth_ok() const { return growth_ok_; }
  const std::string& label() const { return parts_.label; }
  const std::vector<double>& kinks() const { return parts_.kinks; }
  const Parts& parts() const { return parts_; }

 private:
  Parts parts_;
  bool convex_ = false;
  bool growth_ok_ = false;
};

Potential make_quadratic(double c);
Potential make_quartic(double g);
Potential make_abs();
// sum_k coefficients[k] x^k
Potential make_polynomial(std::vector<double> coefficients);
// Constant log 2 on [-radius, radius], +inf outside: the zero-field potential of an interval,
// whose equilibrium is the arcsine law.
Potential make_arcsine_potential(double radius = 1.0);
// Restriction of u to [lo, hi] (+inf outside).
Potential restrict_domain(const Potential& u, double lo, double hi);
// theta * a + (1 - theta) * b
Potential combine(const Potential& a, const Potential& b, double theta);
// Tabulated potential from ascending (x, u) rows, C1 cubic Hermite interpolation.
Potential make_table_potential(const std::vector<std::pair<double, double>>& table,
                               std::string label);

Potential legendre_transform(const Potential& u);
Potential moreau_yosida(const Potential& u, double lambda);
// value(x) = u(z + x)
Potential shift_potential(const Potential& u, double z);
// value(x) = u(x) + lambda * x
Potential tilt_linear(const Potential& u, double lambda);

}  // namespace freelab
