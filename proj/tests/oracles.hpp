#pragma once

// Independent reference computations shared by the test suites. None of these
// call into the library's quadrature or special-function code.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Composite Simpson rule on [a, b] with `panels` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * i);
  return s * h / 3.0;
}

/// Normalized Hermite function from the physicists' polynomial in long double.
inline double hermite_function(int j, double x) {
  long double h0 = 1.0L, h1 = 2.0L * x;
  long double hj = j == 0 ? h0 : h1;
  for (int k = 1; k < j; ++k) {
    long double h2 = 2.0L * x * h1 - 2.0L * k * h0;
    h0 = h1;
    h1 = h2;
    hj = h2;
  }
  const long double log_norm = 0.25L * std::log(pi) + 0.5L * (j * std::log(2.0L) + std::lgamma(j + 1.0L));
  return static_cast<double>(hj * std::exp(-0.5L * x * x - log_norm));
}

/// Associated Laguerre polynomial by its explicit series
/// sum_i (-1)^i C(k+a, k-i) x^i / i!, summed in 50-digit arithmetic.
inline double laguerre_series(int k, double x, int a = 0) {
  using big = boost::multiprecision::cpp_bin_float_50;
  big s = 0, binom = 1, power = 1;
  for (int m = 1; m <= a; ++m) binom = binom * (k + m) / m;  // C(k+a, k)
  for (int i = 0; i <= k; ++i) {
    s += (i % 2 ? -1 : 1) * binom * power;
    binom = binom * (k - i) / (a + i + 1);
    power = power * big(x) / (i + 1);
  }
  return static_cast<double>(s);
}

/// Gaussian ground-state wavefunction displaced to (q0, p0).
inline std::complex<double> coherent_wavefunction(double q0, double p0, double x) {
  return std::pow(pi, -0.25) * std::exp(-0.5 * (x - q0) * (x - q0)) *
         std::exp(std::complex<double>(0.0, p0 * (x - 0.5 * q0)));
}

}  // namespace oracle
