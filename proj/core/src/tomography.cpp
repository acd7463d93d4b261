#include "wignerscope/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wignerscope/errors.hpp"
#include "wignerscope/quadrature.hpp"

namespace wignerscope {

namespace {

constexpr double kNegativeDensityTol = 1e-9;
constexpr double pi = std::numbers::pi;

}  // namespace

NoiseModel::NoiseModel(double eta) : eta_(eta), gamma_(0.0) {
  if (!(eta > 0.0 && eta < 1.0)) {
    std::ostringstream msg;
    msg << "--eta must lie in (0, 1), got " << eta;
    throw ValidationError(msg.str());
  }
  gamma_ = (1.0 - eta) / (4.0 * eta);
}

double NoiseModel::noise_sd() const noexcept { return std::sqrt(0.5 * (1.0 - eta_)); }

void SmoothnessClass::validate() const {
  if (!(beta > 0.0 && std::isfinite(beta)))
    throw ValidationError("--beta must be positive and finite");
  if (!(r > 0.0 && r <= 2.0)) throw ValidationError("--r must lie in (0, 2]");
  if (!(L > 0.0 && std::isfinite(L))) throw ValidationError("--L must be positive and finite");
}

double SmoothnessClass::bound() const { return 4.0 * pi * pi * L; }

double x_max(std::size_t dim) { return std::sqrt(2.0 * static_cast<double>(dim)) + 6.0; }

void phase_harmonics(const DensityMatrix& rho, double x, std::span<std::complex<double>> out) {
  const std::size_t d = rho.dim();
  std::vector<double> psi(d);
  hermite_psi_all(x, psi);
  const std::size_t na = std::min(out.size(), d);
  for (std::size_t a = 0; a < na; ++a) {
    std::complex<double> acc{};
    for (std::size_t k = 0; k + a < d; ++k) acc += rho(k + a, k) * (psi[k + a] * psi[k]);
    out[a] = acc;
  }
  for (std::size_t a = na; a < out.size(); ++a) out[a] = {};
}

double density_from_harmonics(std::span<const std::complex<double>> harmonics, double phi) {
  if (harmonics.empty()) return 0.0;
  double sum = harmonics[0].real();
  const std::complex<double> step{std::cos(phi), -std::sin(phi)};
  std::complex<double> rot{1.0, 0.0};
  double off = 0.0;
  for (std::size_t a = 1; a < harmonics.size(); ++a) {
    rot *= step;
    off += (harmonics[a] * rot).real();
  }
  return sum + 2.0 * off;
}

double quad_density(const DensityMatrix& rho, double x, double phi) {
  std::vector<std::complex<double>> g(rho.dim());
  phase_harmonics(rho, x, g);
  double p = density_from_harmonics(g, phi);
  if (p < -kNegativeDensityTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "quadrature density is negative (" << p << ") at x=" << x << ", phi=" << phi;
    throw ModelError(msg.str());
  }
  return std::max(p, 0.0);
}

WignerField wigner_field(const DensityMatrix& rho) {
  return {[rho](double q, double p) { return wigner_eval(rho, {q, p}); }, x_max(rho.dim())};
}

double radon_numeric(const WignerField& field, double x, double phi) {
  const double R = field.radius;
  if (std::abs(x) >= R) return 0.0;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double half = std::sqrt(R * R - x * x);
  auto line = [&](double t) { return field.eval(x * c - t * s, x * s + t * c); };
  for (double t : {-half, half}) {
    double edge = std::abs(line(t));
    if (edge > 1e-10) {
      std::ostringstream msg;
      msg << "Wigner field is not negligible (" << edge << ") on its boundary radius " << R;
      throw CoverageError(msg.str());
    }
  }
  return quad::adaptive(line, -half, half, 1e-10).value;
}

double noisy_density(const DensityMatrix& rho, const NoiseModel& noise, double y, double phi) {
  const double eta = noise.eta();
  const double centre = y / std::sqrt(eta);
  const double sigma = std::sqrt((1.0 - eta) / (2.0 * eta));
  const double xm = x_max(rho.dim());
  const double lo = std::max(centre - 10.0 * sigma, -xm);
  const double hi = std::min(centre + 10.0 * sigma, xm);
  if (lo >= hi) return 0.0;
  const double pref = 1.0 / std::sqrt(pi * (1.0 - eta));
  const double k = eta / (1.0 - eta);
  std::vector<std::complex<double>> g(rho.dim());
  auto integrand = [&](double x) {
    phase_harmonics(rho, x, g);
    double p = std::max(density_from_harmonics(g, phi), 0.0);
    double dx = x - centre;
    return p * std::exp(-k * dx * dx);
  };
  double v = pref * quad::adaptive(integrand, lo, hi, 1e-11).value;
  return std::max(v, 0.0);
}

std::complex<double> fourier_slice(const DensityMatrix& rho, double t, double phi) {
  const double xm = x_max(rho.dim());
  std::vector<std::complex<double>> g(rho.dim());
  auto dens = [&](double x) {
    phase_harmonics(rho, x, g);
    return density_from_harmonics(g, phi);
  };
  double re = quad::adaptive([&](double x) { return std::cos(t * x) * dens(x); }, -xm, xm, 1e-12)
                  .value;
  double im = quad::adaptive([&](double x) { return std::sin(t * x) * dens(x); }, -xm, xm, 1e-12)
                  .value;
  return {re, im};
}

ClassIntegral class_integral_log(const std::function<double(double)>& log_abs_profile,
                                 const SmoothnessClass& cls) {
  cls.validate();
  constexpr double kNegligible = 1e-15;
  constexpr double kTMax = 1 << 20;
  const double ninf = -std::numeric_limits<double>::infinity();

  auto log_integrand = [&](double t) {
    if (t <= 0.0) return ninf;
    double lw = log_abs_profile(t);
    if (lw == ninf) return ninf;
    return std::log(2.0 * pi * t) + 2.0 * lw + 2.0 * cls.beta * std::pow(t, cls.r);
  };
  auto integrand = [&](double t) {
    double li = log_integrand(t);
    return li == ninf ? 0.0 : std::exp(li);
  };

  ClassIntegral out;
  double total = 0.0;
  double a = 0.0;
  double li_a = ninf;
  for (double b = 1.0; b <= kTMax; a = b, b *= 2.0) {
    double li_b = log_integrand(b);
    if (li_b > 700.0) {
      std::ostringstream msg;
      msg << "integrand overflows at t=" << b << " (log value " << li_b << ")";
      out.value = std::numeric_limits<double>::infinity();
      out.diagnostic = "divergent: " + msg.str();
      return out;
    }
    double crude = quad::adaptive(integrand, a, b, std::numeric_limits<double>::max()).value;
    double seg =
        quad::adaptive(integrand, a, b, 1e-12 * std::max(total + std::abs(crude), 1e-300)).value;
    total += seg;
    out.value = total;
    if (!std::isfinite(total)) {
      out.value = std::numeric_limits<double>::infinity();
      out.diagnostic = "divergent: integral overflows on [" + std::to_string(a) + ", " + std::to_string(b) + "]";
      return out;
    }

    const double floor = total > 0.0 ? std::log(kNegligible * total) : ninf;
    const double lw_b = log_abs_profile(b);
    if (lw_b == ninf) {
      if (li_a == ninf || li_a < floor || total == 0.0) {
        out.converged = true;
        out.diagnostic = "profile vanishes beyond t=" + std::to_string(b);
        return out;
      }
      std::ostringstream msg;
      msg << "undecidable: profile underflows near t=" << b
          << " while the integrand is still non-negligible";
      out.diagnostic = msg.str();
      return out;
    }
    if (li_b < li_a && li_b < floor && std::abs(seg) <= kNegligible * 1e2 * total) {
      out.converged = true;
      out.diagnostic = "integrand negligible beyond t=" + std::to_string(b);
      return out;
    }
    li_a = li_b;
  }
  std::ostringstream msg;
  msg << "divergent: integrand does not decay up to t=" << kTMax << " (partial value " << total
      << ")";
  out.diagnostic = msg.str();
  return out;
}

ClassIntegral class_integral(const std::function<double(double)>& profile,
                             const SmoothnessClass& cls) {
  return class_integral_log(
      [&](double t) {
        double v = std::abs(profile(t));
        return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
      },
      cls);
}

std::function<double(double)> radial_fourier_profile(const DensityMatrix& rho) {
  if (!rho.is_diagonal(1e-14))
    throw ValidationError("radial_fourier_profile needs a diagonal (rotation-invariant) state");
  std::vector<double> pops(rho.dim());
  for (std::size_t k = 0; k < rho.dim(); ++k) pops[k] = rho(k, k).real();
  return [pops](double t) {
    std::vector<double> ell(pops.size());
    laguerre_functions(0, 0.5 * t * t, ell);
    double sum = 0.0;
    for (std::size_t k = 0; k < pops.size(); ++k) sum += pops[k] * ell[k];
    return sum;
  };
}

}  // namespace wignerscope
