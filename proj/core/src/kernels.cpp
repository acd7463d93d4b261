#include "wignerscope/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wignerscope/errors.hpp"
#include "wignerscope/quadrature.hpp"

namespace wignerscope {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kRelTol = 1e-7;
constexpr int kMaxRefinements = 8;
constexpr double kTableTol = 1e-4;

void check_exponent(const KernelSpec& spec) {
  const double exponent = spec.noise.gamma() * spec.cutoff() * spec.cutoff();
  if (exponent > kKernelExponentLimit) {
    std::ostringstream msg;
    msg << "bandwidth h=" << spec.h << " too small for eta=" << spec.noise.eta()
        << ": kernel exponent " << exponent << " exceeds " << kKernelExponentLimit;
    throw NumericGuardError(msg.str());
  }
}

// int_a^b cos(u t) g(t) dt on Gauss-Legendre panels, refined by halving the
// panel width until two successive widths agree to abs_tol.
double cosine_integral(const quad::Integrand& g, double a, double b, double u, double h,
                       double abs_tol) {
  auto f = [&](double t) { return std::cos(u * t) * g(t); };
  double width = h / 8.0;
  if (u != 0.0) width = std::min(width, pi / (4.0 * std::abs(u)));
  double coarse = quad::gauss_legendre_panels(f, a, b, width);
  for (int i = 0; i < kMaxRefinements; ++i) {
    width /= 2.0;
    double fine = quad::gauss_legendre_panels(f, a, b, width);
    if (std::abs(fine - coarse) <= abs_tol) return fine;
    coarse = fine;
  }
  std::ostringstream msg;
  msg << "kernel quadrature did not converge at u=" << u << ", h=" << h;
  throw NumericGuardError(msg.str());
}

}  // namespace

KernelVariant parse_kernel_variant(std::string_view text) {
  if (text == "sharp") return KernelVariant::sharp;
  if (text == "modified") return KernelVariant::modified;
  throw ValidationError("--variant must be sharp or modified, got '" + std::string(text) + "'");
}

std::string to_string(KernelVariant v) { return v == KernelVariant::sharp ? "sharp" : "modified"; }

KernelSpec::KernelSpec(double bandwidth, NoiseModel n, KernelVariant v)
    : h(bandwidth), noise(n), variant(v) {
  if (!(h > 0.0 && std::isfinite(h))) throw ValidationError("bandwidth h must be positive");
}

double KernelSpec::cutoff() const noexcept {
  return variant == KernelVariant::sharp ? 1.0 / h : 2.0 / h;
}

double noise_ft(const NoiseModel& noise, double t) {
  return std::exp(-(1.0 - noise.eta()) * t * t / 4.0);
}

double modified_taper(double h, double t) {
  const double a = std::abs(t);
  if (a <= 1.0 / h) return 1.0;
  if (a >= 2.0 / h) return 0.0;
  return std::exp(h * h - 1.0 / (a * (2.0 / h - a)));
}

double kernel_multiplier(const KernelSpec& spec, double t) {
  const double a = std::abs(t);
  const double g = spec.noise.gamma();
  if (spec.variant == KernelVariant::sharp)
    return a <= 1.0 / spec.h ? 0.5 * a * std::exp(g * a * a) : 0.0;
  if (a <= 1.0 / spec.h) return 0.5 * a * std::exp(g * a * a);
  if (a >= 2.0 / spec.h) return 0.0;
  const double h = spec.h;
  return 0.5 * a * std::exp(g * a * a + h * h - 1.0 / (a * (2.0 / h - a)));
}

double sharp_kernel_peak(const KernelSpec& spec) {
  const double g = spec.noise.gamma();
  return std::expm1(g / (spec.h * spec.h)) / (4.0 * pi * g);
}

double kernel_eval(const KernelSpec& spec, double u) {
  KernelSpec sharp = spec;
  sharp.variant = KernelVariant::sharp;
  check_exponent(sharp);
  const double g = spec.noise.gamma();
  const double scale = sharp_kernel_peak(sharp);
  auto f = [g](double t) { return t * std::exp(g * t * t); };
  double v = cosine_integral(f, 0.0, 1.0 / spec.h, std::abs(u), spec.h,
                             kRelTol * scale * 2.0 * pi);
  return v / (2.0 * pi);
}

double kernel_eval_modified(const KernelSpec& spec, double u) {
  KernelSpec mod = spec;
  mod.variant = KernelVariant::modified;
  check_exponent(mod);
  const double g = spec.noise.gamma();
  const double h = spec.h;
  KernelSpec sharp = spec;
  sharp.variant = KernelVariant::sharp;
  const double tol = kRelTol * sharp_kernel_peak(sharp) * 2.0 * pi;
  const double a = std::abs(u);
  auto plateau = [g](double t) { return t * std::exp(g * t * t); };
  auto taper = [g, h](double t) {
    double span = t * (2.0 / h - t);
    if (span <= 0.0) return 0.0;
    return t * std::exp(g * t * t + h * h - 1.0 / span);
  };
  double v = cosine_integral(plateau, 0.0, 1.0 / h, a, h, 0.5 * tol) +
             cosine_integral(taper, 1.0 / h, 2.0 / h, a, h, 0.5 * tol);
  return v / (2.0 * pi);
}

double kernel_value(const KernelSpec& spec, double u) {
  return spec.variant == KernelVariant::sharp ? kernel_eval(spec, u)
                                              : kernel_eval_modified(spec, u);
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

KernelTable::KernelTable(KernelSpec spec, double u_max, double step, std::vector<double> values)
    : spec_(spec), u_max_(u_max), step_(step), values_(std::move(values)) {}

double KernelTable::operator()(double u) const {
  const double a = std::abs(u);
  if (a > u_max_) return kernel_value(spec_, a);
  const double pos = a / step_;
  const auto i = static_cast<std::size_t>(pos);
  const double s = pos - static_cast<double>(i);
  const double vm = i == 0 ? values_[1] : values_[i - 1];
  const double v0 = values_[i];
  const double v1 = values_[i + 1];
  const double v2 = values_[i + 2];
  // Four-point Lagrange on nodes i-1, i, i+1, i+2.
  const double wm = -s * (s - 1.0) * (s - 2.0) / 6.0;
  const double w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
  const double w1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
  const double w2 = (s + 1.0) * s * (s - 1.0) / 6.0;
  return wm * vm + w0 * v0 + w1 * v1 + w2 * v2;
}

double suggested_table_step(const KernelSpec& spec) { return 0.2 / spec.cutoff(); }

KernelTable build_table(const KernelSpec& spec, double u_max, double step) {
  if (!(u_max > 0.0 && std::isfinite(u_max))) throw ValidationError("--umax must be positive");
  if (!(step > 0.0 && step <= u_max)) throw ValidationError("--step must lie in (0, umax]");
  const auto nodes = static_cast<std::size_t>(std::ceil(u_max / step)) + 3;
  std::vector<double> values(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    values[i] = kernel_value(spec, step * static_cast<double>(i));
  KernelTable table(spec, u_max, step, std::move(values));

  const double scale = std::abs(table.scale());
  const std::size_t cells = nodes - 3;
  const std::size_t checks = std::min<std::size_t>(cells, 64);
  double worst = 0.0;
  double worst_u = 0.0;
  for (std::size_t c = 0; c < checks; ++c) {
    std::size_t cell = checks == 1 ? 0 : c * (cells - 1) / (checks - 1);
    for (double frac : {0.5, 0.25}) {
      double u = std::min(step * (static_cast<double>(cell) + frac), u_max);
      double err = std::abs(table(u) - kernel_value(spec, u));
      if (err > worst) {
        worst = err;
        worst_u = u;
      }
    }
  }
  if (worst > kTableTol * scale) {
    std::ostringstream msg;
    msg << "kernel table step " << step << " too coarse: interpolation error " << worst
        << " at u=" << worst_u << " is " << worst / scale << " of the peak value (limit "
        << kTableTol << "); try --step " << suggested_table_step(spec);
    throw ValidationError(msg.str());
  }
  return table;
}

}  // namespace wignerscope
