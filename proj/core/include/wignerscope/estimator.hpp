#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wignerscope/fockspace.hpp"
#include "wignerscope/kernels.hpp"
#include "wignerscope/sampler.hpp"
#include "wignerscope/tomography.hpp"

namespace wignerscope {

// ---------------------------------------------------------------------------
// Bandwidths and rates
// ---------------------------------------------------------------------------

enum class BandwidthKind { opt, h1, h2, r2_closed, adaptive, fixed };

struct BandwidthRule {
  BandwidthKind kind = BandwidthKind::opt;
  SmoothnessClass cls;  ///< used by the class-based rules and by rate_phi2
  double h = 0.0;       ///< fixed bandwidth

  /// "opt", "h1", "h2", "r2", "adaptive" or a number (fixed bandwidth).
  static BandwidthRule parse(std::string_view text, const SmoothnessClass& cls);
};

std::string to_string(const BandwidthRule& rule);

/// Bandwidth for the rule at sample size n. Results above 1 are clamped to 1.
/// Throws ValidationError when a closed form is undefined (n too small).
double bandwidth(const BandwidthRule& rule, std::size_t n, const NoiseModel& noise);

/// 2 beta / h^r + 2 gamma / h^2 - log n.
double bandwidth_residual(const SmoothnessClass& cls, const NoiseModel& noise, std::size_t n,
                          double h);

/// Squared pointwise rate phi_n^2.
double rate_phi2(const SmoothnessClass& cls, std::size_t n, const NoiseModel& noise);

/// L h^{r-2} / (4 pi beta r) exp(-2 beta / h^r).
double bias_bound_sq(const SmoothnessClass& cls, double h);
/// exp(2 gamma / h^2) / (8 gamma^2 n).
double variance_bound(const NoiseModel& noise, double h, std::size_t n);

// ---------------------------------------------------------------------------
// Estimator
// ---------------------------------------------------------------------------

/// Kernel estimator over a fixed set of (possibly weighted) records.
class WignerEstimator {
 public:
  WignerEstimator(const Dataset& ds, KernelTable table, std::size_t threads = 0);
  /// Binned data: one record per non-empty cell at the cell centre, weighted
  /// by its count.
  WignerEstimator(const Histogram2D& hist, double eta, KernelTable table, std::size_t threads = 0);

  const KernelTable& table() const noexcept { return table_; }
  double total_weight() const noexcept { return total_weight_; }
  std::size_t size() const noexcept { return y_scaled_.size(); }

  double operator()(const PhasePoint& z) const;
  /// Sum of kernel values (weighted) without dividing by the total weight.
  double kernel_sum(const PhasePoint& z) const;

 private:
  void prepare(std::size_t threads);

  KernelTable table_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  std::vector<double> y_scaled_;
  std::vector<double> weight_;  // empty means unit weights
  double total_weight_ = 0.0;
  std::size_t threads_ = 0;
};

/// Table range that covers every |[z, phi] - y/sqrt(eta)| the data can produce.
double table_range(const Dataset& ds, const KernelSpec& spec, double z_radius);

/// Convenience: builds a table for the dataset and evaluates at z.
double estimate_point(const Dataset& ds, const KernelSpec& spec, const PhasePoint& z);
double estimate_point(const Dataset& ds, const KernelTable& table, const PhasePoint& z);

struct GridSpec {
  double q_min = -4.0, q_max = 4.0;
  std::size_t q_steps = 101;
  double p_min = -4.0, p_max = 4.0;
  std::size_t p_steps = 101;

  /// "qmin:qmax:steps,pmin:pmax:steps"
  static GridSpec parse(std::string_view text);
  double q(std::size_t i) const;
  double p(std::size_t j) const;
};

struct WignerGrid {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> values;  ///< row-major [iq][ip]
  double at(std::size_t iq, std::size_t ip) const { return values[iq * p.size() + ip]; }
};

WignerGrid estimate_grid(const WignerEstimator& est, const GridSpec& grid, std::size_t threads = 0);
WignerGrid estimate_grid(const Dataset& ds, const KernelSpec& spec, const GridSpec& grid,
                         std::size_t threads = 0);

/// Mean of the estimator, (1/4pi^2) int e^{-i<z,w>} W~(w) m(|w|) dw, for a
/// diagonal state (m is the kernel's Fourier multiplier without noise).
double expected_estimate(const DensityMatrix& rho, const KernelSpec& spec, const PhasePoint& z);

// ---------------------------------------------------------------------------
// Monte Carlo risk
// ---------------------------------------------------------------------------

/// seed_j = splitmix64_mix(seed + (j + 1) * 0x9e3779b97f4a7c15).
std::uint64_t repetition_seed(std::uint64_t seed, std::size_t rep);

struct RiskConfig {
  StateSpec state;
  double eta = 0.95;
  BandwidthRule rule;
  KernelVariant variant = KernelVariant::sharp;
  std::vector<PhasePoint> points;
  std::size_t n = 10000;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::size_t bins = 0;  ///< > 0: estimate from a bins x bins histogram
  std::size_t threads = 0;
  SamplerConfig sampler;
};

struct RiskReport {
  std::vector<PhasePoint> points;
  std::size_t reps = 0;
  double h = 0.0;
  std::vector<double> true_values;
  std::vector<double> per_point_mse;
  std::vector<std::vector<double>> per_rep_losses;  ///< [rep][point]
  std::vector<double> per_point_mean;               ///< mean estimate over reps
  double rate_phi2 = 0.0;
  std::string manifest;  ///< JSON object describing the experiment
};

RiskReport risk_eval(const RiskConfig& config);
std::string to_json(const RiskReport& report);

}  // namespace wignerscope
