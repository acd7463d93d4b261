#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>

#include "wignerscope/fockspace.hpp"

namespace wignerscope {

/// Detection efficiency eta in (0, 1) and the deconvolution constant
/// gamma = (1 - eta) / (4 eta).
class NoiseModel {
 public:
  explicit NoiseModel(double eta);
  double eta() const noexcept { return eta_; }
  double gamma() const noexcept { return gamma_; }
  /// Standard deviation of the additive noise sqrt((1-eta)/2) xi.
  double noise_sd() const noexcept;

 private:
  double eta_;
  double gamma_;
};

/// Smoothness class A(beta, r, L):
///   int |W~(w)|^2 exp(2 beta |w|^r) dw <= (2 pi)^2 L.
struct SmoothnessClass {
  double beta = 0.2;
  double r = 2.0;
  double L = 1.0;

  void validate() const;
  double bound() const;  ///< (2 pi)^2 L
};

/// Quadrature range for x-integrals: |x| <= sqrt(2 dim) + 6.
double x_max(std::size_t dim);

/// p_rho(x | phi), a density in x for fixed phi (no 1/pi factor).
/// Throws ModelError if the value is below -1e-9; smaller negatives clamp to 0.
double quad_density(const DensityMatrix& rho, double x, double phi);

/// Phase harmonics of the quadrature density at a fixed x:
/// out[a] = sum_k rho_{k+a,k} psi_{k+a}(x) psi_k(x), so that
/// p_rho(x | phi) = Re(out[0]) + 2 Re sum_{a>=1} out[a] e^{-i a phi}.
void phase_harmonics(const DensityMatrix& rho, double x, std::span<std::complex<double>> out);
/// Raw (unclamped) density from harmonics.
double density_from_harmonics(std::span<const std::complex<double>> harmonics, double phi);

/// A Wigner function together with the radius outside which it is negligible.
struct WignerField {
  std::function<double(double, double)> eval;
  double radius = 0.0;
};

WignerField wigner_field(const DensityMatrix& rho);

/// Radon transform line integral of `field` by adaptive quadrature.
/// Throws CoverageError when the field is not negligible on its boundary.
double radon_numeric(const WignerField& field, double x, double phi);

/// p^eta_rho(y, phi): Gaussian convolution of the quadrature density.
double noisy_density(const DensityMatrix& rho, const NoiseModel& noise, double y, double phi);

/// F_1[p_rho(. | phi)](t) = int e^{itx} p_rho(x | phi) dx.
std::complex<double> fourier_slice(const DensityMatrix& rho, double t, double phi);

struct ClassIntegral {
  double value = 0.0;
  bool converged = false;
  std::string diagnostic;
  bool member_of(const SmoothnessClass& cls) const { return converged && value <= cls.bound(); }
};

/// Left-hand side of the class condition for a radial Fourier profile,
/// 2 pi int_0^inf t |W~(t)|^2 e^{2 beta t^r} dt. The profile is given as
/// log|W~(t)| so very small magnitudes do not underflow; -inf marks a zero.
ClassIntegral class_integral_log(const std::function<double(double)>& log_abs_profile,
                                 const SmoothnessClass& cls);
/// Same with a plain profile W~(t).
ClassIntegral class_integral(const std::function<double(double)>& profile,
                             const SmoothnessClass& cls);

/// Radial Fourier profile of a diagonal state:
/// W~(t) = sum_k rho_kk e^{-t^2/4} L_k(t^2/2). Throws for non-diagonal input.
std::function<double(double)> radial_fourier_profile(const DensityMatrix& rho);

}  // namespace wignerscope
