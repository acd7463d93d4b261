#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wignerscope/tomography.hpp"

namespace wignerscope {

/// Base family f(z) = alpha (1-z)^alpha (1-xi)^{-alpha} on [xi, 1].
struct AlphaXi {
  double alpha = 0.2;
  double xi = 0.95;
  void validate() const;
};

/// Diagonal elements rho_kk = int_xi^1 z^k f(z) dz for k = 0..k_max (k_max <= 5000).
std::vector<double> rho_alpha_xi_diag(const AlphaXi& axi, std::size_t k_max);
/// sum_{j >= k} rho_jj = int_xi^1 z^k f(z)/(1-z) dz.
double rho_alpha_xi_tail(const AlphaXi& axi, std::size_t k);

/// Quadrature density of the base state (phi-independent).
double p_alpha_xi(const AlphaXi& axi, double x);
/// The same density after detection noise: a Gaussian scale mixture.
double p_alpha_xi_noisy(const AlphaXi& axi, const NoiseModel& noise, double y);
/// Radial Fourier transform of the base Wigner function.
double wtilde_alpha_xi(const AlphaXi& axi, double t);

/// Smooth plateau J: 0 below delta, C^3 rise on [delta, 2 delta], 1 on
/// [2 delta, D - 2 delta], mirrored fall, 0 above D - delta.
struct BumpSpec {
  double delta = 0.1;
  double D = 1.0;
  void validate() const;
  double operator()(double u) const;
  double derivative(double u) const;
};

/// The perturbation's radial Fourier profile J_htilde(t).
double j_htilde(const BumpSpec& bump, const SmoothnessClass& cls, double htilde, double t);
double j_htilde_derivative(const BumpSpec& bump, const SmoothnessClass& cls, double htilde,
                           double t);
/// Interval of t outside which j_htilde vanishes.
std::pair<double, double> j_support(const BumpSpec& bump, const SmoothnessClass& cls,
                                    double htilde);

/// Root of 2 beta/h^r + 2 gamma/h^2 = log n + (log log n)^2, or the closed form
/// (log(n log n) / (2 (beta + gamma)))^{-1/2} when r = 2. Requires n >= 16.
double htilde_solve(const SmoothnessClass& cls, const NoiseModel& noise, std::size_t n);

/// Diagonal of the perturbation matrix: int t e^{-t^2/4} L_k(t^2/2) J_htilde(t) dt.
std::vector<double> tau_diag(const BumpSpec& bump, const SmoothnessClass& cls, double htilde,
                             std::size_t k_max);

/// Half the difference of the two noisy quadrature densities,
/// (1/pi) int_0^inf cos(t y) J_htilde(t sqrt(eta)) e^{-(1-eta) t^2 / 4} dt.
double perturbation_density_noisy(const BumpSpec& bump, const SmoothnessClass& cls,
                                  double htilde, const NoiseModel& noise, double y);

/// pi int (p2 - p1)^2 / p1 dy for the noisy densities of rho -+ scale * tau
/// (the phase integral over [0, pi) is trivial by rotation invariance).
double chi2_per_observation(const AlphaXi& axi, const BumpSpec& bump, const SmoothnessClass& cls,
                            double htilde, const NoiseModel& noise, double scale = 1.0);

/// Smallest L for which the base state sits in A(beta, r, a^2 L) with
/// a = 1 - exp(-beta delta / 2): I_0 / ((2 pi)^2 a^2), I_0 the base class integral.
/// Throws NumericGuardError if the base integral diverges.
double pair_class_constant(const AlphaXi& axi, double beta, double r, const BumpSpec& bump);

struct PairOptions {
  std::optional<double> htilde;  ///< override the solved value
  double tau_scale = 1.0;        ///< multiply the perturbation (stress tests)
  std::size_t k_max = 2000;
};

struct PairReport {
  double htilde = 0.0;
  double positivity_margin = 0.0;  ///< min_k rho_kk - |tau_kk|
  std::size_t positivity_worst_k = 0;
  double class_lhs = 0.0;          ///< (sqrt(base) + sqrt(perturbation))^2
  double class_base = 0.0;
  double class_perturbation = 0.0;
  double class_bound = 0.0;        ///< (2 pi)^2 L
  bool class_base_converged = false;
  double separation = 0.0;         ///< |W2(0) - W1(0)|
  double rate_phi = 0.0;           ///< sqrt(phi_n^2)
  double separation_threshold = 0.0;
  double chi2_times_n = 0.0;
  double l2_diff_sq = 0.0;         ///< ||p2 - p1||^2 of the noisy densities
  double derivative_term = 0.0;    ///< int (d/dt (J e^{-(1-eta)t^2/(4 eta)}))^2 dt
  bool positivity_ok = false;
  bool class_ok = false;
  bool separation_ok = false;
  bool chi2_ok = false;
  bool all_ok() const { return positivity_ok && class_ok && separation_ok && chi2_ok; }
};

PairReport verify_pair(const AlphaXi& axi, const BumpSpec& bump, const SmoothnessClass& cls,
                       const NoiseModel& noise, std::size_t n, const PairOptions& options = {});

std::string to_json(const PairReport& report);

}  // namespace wignerscope
