#pragma once

#include <functional>
#include <span>
#include <vector>

namespace freelab::numerics {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1]; rules are cached per size.
const QuadratureRule& gauss_legendre(int n);

// Adaptive Gauss-Kronrod on [a, b], split at any interior breakpoints.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints = {}, double tol = 1e-12);

// Root of f on [lo, hi]; f(lo) and f(hi) must have opposite signs (or one is zero).
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double xtol = 1e-14);

// Grows [lo, hi] geometrically around its midpoint until f changes sign, keeping
// inside [limit_lo, limit_hi]. Returns false if no sign change was found.
bool expand_bracket(const std::function<double(double)>& f, double& lo, double& hi,
                    double limit_lo, double limit_hi, int max_steps = 80);

// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of tabulated data, with its
// derivative and an exact antiderivative vanishing at the first knot. Constant extension
// outside the knots.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double t) const;
  double derivative(double t) const;
  double integral(double t) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  std::size_t cell(double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
  std::vector<double> cumulative_;
};

// Second derivative by central differences, used where no analytic one is supplied.
double central_second_derivative(const std::function<double(double)>& derivative, double x);

}  // namespace freelab::numerics
