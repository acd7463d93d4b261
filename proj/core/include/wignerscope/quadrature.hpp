#pragma once

#include <cstddef>
#include <functional>
#include <vector>

// Thin wrappers over Boost.Math quadrature with the tolerance semantics the
// rest of the library expects (absolute tolerances, explicit error reports).
namespace wignerscope::quad {

using Integrand = std::function<double(double)>;

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive bisection over a 61-point Gauss-Kronrod rule until the summed
/// error estimate is below `abs_tol`.
Estimate adaptive(const Integrand& f, double a, double b, double abs_tol,
                  int max_depth = 30);

/// Double-exponential rule for integrands with integrable endpoint
/// singularities. `f` receives the abscissa and its distance to the nearer
/// endpoint (signed as Boost does), which lets callers avoid cancellation.
Estimate tanh_sinh(const std::function<double(double, double)>& f, double a, double b,
                   double rel_tol);

/// Semi-infinite [a, inf) with exp-sinh.
Estimate exp_sinh(const Integrand& f, double a, double rel_tol);

/// Composite 16-node Gauss-Legendre with panels no wider than `max_width`.
double gauss_legendre_panels(const Integrand& f, double a, double b, double max_width);

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Hermite rule. Weights are returned pre-multiplied by
/// exp(x_i^2) so the rule integrates f(x) dx directly for f decaying like a
/// Gaussian (sum w_i f(x_i)).
Rule gauss_hermite_scaled(std::size_t n);

}  // namespace wignerscope::quad
