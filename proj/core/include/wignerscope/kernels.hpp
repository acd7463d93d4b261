#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wignerscope/tomography.hpp"

namespace wignerscope {

enum class KernelVariant { sharp, modified };

KernelVariant parse_kernel_variant(std::string_view text);
std::string to_string(KernelVariant v);

struct KernelSpec {
  double h;
  NoiseModel noise;
  KernelVariant variant = KernelVariant::sharp;

  KernelSpec(double bandwidth, NoiseModel n, KernelVariant v = KernelVariant::sharp);
  /// Upper end of the Fourier support: 1/h (sharp) or 2/h (modified).
  double cutoff() const noexcept;
};

/// Largest exponent gamma * cutoff^2 the kernel accepts.
inline constexpr double kKernelExponentLimit = 700.0;

/// Fourier transform of the noise density N(0, (1-eta)/2): exp(-(1-eta) t^2 / 4).
double noise_ft(const NoiseModel& noise, double t);

/// Multiplier of the modified kernel: 1 on |t| <= 1/h, then
/// exp(h^2 - 1/(|t|(2/h - |t|))) on 1/h < |t| < 2/h, 0 beyond.
double modified_taper(double h, double t);

/// Fourier-side kernel (1/2)|t| e^{gamma t^2} times the variant's multiplier.
double kernel_multiplier(const KernelSpec& spec, double t);

/// (1/2pi) int_0^{1/h} cos(ut) t e^{gamma t^2} dt, relative error <= 1e-6 of
/// the value at u = 0. Throws NumericGuardError if gamma/h^2 > 700.
double kernel_eval(const KernelSpec& spec, double u);
/// Same with the modified multiplier on [0, 2/h]; guard at 4 gamma/h^2.
double kernel_eval_modified(const KernelSpec& spec, double u);
/// Dispatches on spec.variant.
double kernel_value(const KernelSpec& spec, double u);

/// (e^{gamma/h^2} - 1)/(4 pi gamma): the sharp kernel at u = 0.
double sharp_kernel_peak(const KernelSpec& spec);

/// Cubic-interpolated kernel on [0, u_max], extended evenly; exact
/// evaluation beyond u_max.
class KernelTable {
 public:
  KernelTable(KernelSpec spec, double u_max, double step, std::vector<double> values);

  const KernelSpec& spec() const noexcept { return spec_; }
  double u_max() const noexcept { return u_max_; }
  double step() const noexcept { return step_; }
  const std::vector<double>& values() const noexcept { return values_; }
  /// values()[0], the kernel at the origin.
  double scale() const noexcept { return values_.front(); }

  double operator()(double u) const;

 private:
  KernelSpec spec_;
  double u_max_;
  double step_;
  std::vector<double> values_;  // nodes 0 .. ceil(u_max/step) + 2
};

/// Tabulates the kernel and spot-checks interpolation between nodes. Throws
/// ValidationError naming the measured error if it exceeds 1e-4 of scale().
KernelTable build_table(const KernelSpec& spec, double u_max, double step);

/// Largest table step that is expected to pass the spot checks.
double suggested_table_step(const KernelSpec& spec);

}  // namespace wignerscope
