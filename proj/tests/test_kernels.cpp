#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wignerscope/errors.hpp"
#include "wignerscope/kernels.hpp"

using namespace wignerscope;
using oracle::pi;

namespace {

// (1/2pi) int_0^top cos(u t) t e^{gamma t^2} m(t) dt by the midpoint rule.
template <class Multiplier>
double kernel_riemann(double gamma, double top, double u, Multiplier m, int panels) {
  const double dt = top / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double t = (i + 0.5) * dt;
    s += std::cos(u * t) * t * std::exp(gamma * t * t) * m(t);
  }
  return s * dt / (2 * pi);
}

double taper_oracle(double h, double t) {
  if (t <= 1 / h) return 1.0;
  if (t >= 2 / h) return 0.0;
  return std::exp(h * h - 1.0 / (t * (2 / h - t)));
}

}  // namespace

TEST_CASE("noise Fourier transform") {
  CHECK(noise_ft(NoiseModel(0.9), 0.0) == 1.0);
  CHECK(noise_ft(NoiseModel(0.9), 6 / std::sqrt(0.9)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  for (double eta : {0.5, 0.9})
    for (double t : {0.4, 2.0, 7.5}) {
      const double var = (1 - eta) / 2;
      const double ft = oracle::simpson(
          [&](double x) { return std::cos(t * x) * std::exp(-x * x / (2 * var)) / std::sqrt(2 * pi * var); },
          -12 * std::sqrt(var), 12 * std::sqrt(var), 4000);
      CHECK(std::abs(noise_ft(NoiseModel(eta), t) - ft) <= 1e-10);
    }
}

TEST_CASE("sharp kernel at the origin has the closed form") {
  const KernelSpec spec(1.0, NoiseModel(0.5));
  CHECK(kernel_eval(spec, 0.0) == doctest::Approx((std::exp(0.25) - 1) / pi).epsilon(1e-9));
  CHECK((std::exp(0.25) - 1) / pi == doctest::Approx(0.0904077).epsilon(1e-6));
  for (double h : {0.2, 0.35, 0.5, 1.0})
    for (double eta : {0.6, 0.9, 0.97}) {
      const KernelSpec s(h, NoiseModel(eta));
      const double g = s.noise.gamma();
      CHECK(std::abs(kernel_eval(s, 0.0) / ((std::exp(g / (h * h)) - 1) / (4 * pi * g)) - 1) <= 1e-6);
      CHECK(sharp_kernel_peak(s) == doctest::Approx((std::exp(g / (h * h)) - 1) / (4 * pi * g)).epsilon(1e-13));
    }
}

TEST_CASE("sharp kernel approaches the noiseless peak as eta -> 1") {
  const KernelSpec spec(0.4, NoiseModel(1 - 1e-9));
  CHECK(kernel_eval(spec, 0.0) == doctest::Approx(1 / (4 * pi * 0.16)).epsilon(1e-6));
}

TEST_CASE("sharp kernel matches a million-panel Riemann sum") {
  const KernelSpec spec(0.5, NoiseModel(0.9));
  const double expect = kernel_riemann(spec.noise.gamma(), 2.0, 1.3, [](double) { return 1.0; }, 1000000);
  CHECK(std::abs(kernel_eval(spec, 1.3) - expect) <= 1e-6 * kernel_eval(spec, 0.0));
  for (double u : {0.7, 4.0, 17.3, 60.0}) {
    const double e = kernel_riemann(spec.noise.gamma(), 2.0, u, [](double) { return 1.0; }, 200000);
    CHECK(std::abs(kernel_eval(spec, u) - e) <= 1e-6 * kernel_eval(spec, 0.0));
  }
}

TEST_CASE("kernels are even") {
  for (auto v : {KernelVariant::sharp, KernelVariant::modified}) {
    const KernelSpec spec(0.3, NoiseModel(0.8), v);
    for (double u : {0.1, 2.5, 31.0}) CHECK(kernel_value(spec, -u) == kernel_value(spec, u));
  }
}

TEST_CASE("modified taper joins continuously and vanishes at twice the cutoff") {
  const double h = 0.4;
  CHECK(modified_taper(h, 1 / h) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(modified_taper(h, 0.5 / h) == 1.0);
  CHECK(modified_taper(h, 2 / h - 1e-6) <= 1e-100);
  CHECK(modified_taper(h, 2 / h) == 0.0);
  CHECK(modified_taper(h, 3 / h) == 0.0);
  for (double t : {2.6, 3.3, 4.9}) CHECK(modified_taper(h, t) == doctest::Approx(taper_oracle(h, t)).epsilon(1e-14));
  const KernelSpec spec(h, NoiseModel(0.9), KernelVariant::modified);
  CHECK(spec.cutoff() == doctest::Approx(2 / h));
  CHECK(kernel_multiplier(spec, 1.0) == doctest::Approx(0.5 * std::exp(spec.noise.gamma())).epsilon(1e-14));
}

TEST_CASE("modified kernel matches brute-force quadrature of the tapered multiplier") {
  const double h = 0.5;
  const KernelSpec spec(h, NoiseModel(0.9), KernelVariant::modified);
  const double g = spec.noise.gamma();
  for (double u : {0.0, 1.1, 5.0}) {
    const double expect = oracle::simpson(
        [&](double t) { return std::cos(u * t) * t * std::exp(g * t * t) * taper_oracle(h, t); }, 0.0, 2 / h, 200000) / (2 * pi);
    CHECK(std::abs(kernel_eval_modified(spec, u) - expect) <= 1e-6 * std::abs(kernel_eval_modified(spec, 0.0)));
  }
}

TEST_CASE("modified kernel tail decays faster than the sharp kernel") {
  const KernelSpec sharp(0.25, NoiseModel(0.9));
  const KernelSpec smooth(0.25, NoiseModel(0.9), KernelVariant::modified);
  std::vector<double> ratio;
  for (auto [lo, hi] : {std::pair{50.0, 100.0}, std::pair{100.0, 200.0}}) {
    double env_sharp = 0.0, env_smooth = 0.0;
    for (double u = lo; u <= hi; u += 0.1) {
      env_sharp = std::max(env_sharp, std::abs(kernel_eval(sharp, u)));
      env_smooth = std::max(env_smooth, std::abs(kernel_eval_modified(smooth, u)));
    }
    CHECK(env_smooth < env_sharp);
    ratio.push_back(env_smooth / env_sharp);
  }
  CHECK(ratio[1] < 0.5 * ratio[0]);
}

TEST_CASE("kernel overflow guard") {
  CHECK_THROWS_AS(kernel_eval(KernelSpec(0.018, NoiseModel(0.5)), 0.0), NumericGuardError);
  CHECK_NOTHROW(kernel_eval(KernelSpec(0.02, NoiseModel(0.5)), 0.0));
  CHECK_THROWS_AS(kernel_eval_modified(KernelSpec(0.036, NoiseModel(0.5), KernelVariant::modified), 0.0),
                  NumericGuardError);
  CHECK_THROWS_AS(KernelSpec(0.0, NoiseModel(0.5)), ValidationError);
  CHECK_THROWS_AS(parse_kernel_variant("smooth"), ValidationError);
  CHECK(parse_kernel_variant("modified") == KernelVariant::modified);
  CHECK(to_string(KernelVariant::sharp) == "sharp");
}

TEST_CASE("kernel peak grows like exp(gamma / h^2)") {
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {0.5, 0.35, 0.25}) {
    const KernelSpec spec(h, NoiseModel(0.9));
    const double g = spec.noise.gamma();
    const double gap = std::abs(std::log(kernel_eval(spec, 0.0) * 4 * pi * g) - g / (h * h));
    CHECK(gap == doctest::Approx(-std::log1p(-std::exp(-g / (h * h)))).epsilon(1e-5));
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("kernel tables") {
  const KernelSpec spec(0.3, NoiseModel(0.9));
  const double step = suggested_table_step(spec);
  const auto table = build_table(spec, 20.0, step);
  CHECK(table.scale() == table.values().front());
  for (std::size_t i : {0u, 3u, 40u}) CHECK(table(i * step) == table.values()[i]);
  double worst = 0.0;
  for (double u = 0.5 * step; u < 20.0; u += step) worst = std::max(worst, std::abs(table(u) - kernel_eval(spec, u)));
  CHECK(worst <= 1e-4 * table.scale());
  CHECK(table(-3.3) == table(3.3));
  CHECK(table(25.0) == kernel_eval(spec, 25.0));
  CHECK_THROWS_AS(build_table(spec, 20.0, 8 * step), ValidationError);
  CHECK_THROWS_AS(build_table(spec, -1.0, step), ValidationError);
}

TEST_CASE("Fourier transform of the tabulated kernel recovers the multiplier") {
  // A cosine ramp over [U1, U2] removes the truncation ripple of the 1/u tail.
  const double h = 0.5;
  const KernelSpec spec(h, NoiseModel(0.9));
  const double u1 = 1500.0, u2 = 2000.0;
  const auto table = build_table(spec, u2, suggested_table_step(spec));
  const double du = 0.004;
  std::vector<double> ku;
  for (double u = 0.0; u <= u2; u += du) {
    const double w = u <= u1 ? 1.0 : 0.5 * (1 + std::cos(pi * (u - u1) / (u2 - u1)));
    ku.push_back(table(u) * w);
  }
  const double peak = kernel_multiplier(spec, 1 / h);
  double worst = 0.0;
  for (double t = 0.1; t <= 1 / h - 0.1 + 1e-12; t += 0.1) {
    double s = 0.0;
    for (std::size_t i = 0; i < ku.size(); ++i) s += (i == 0 ? 0.5 : 1.0) * ku[i] * std::cos(t * i * du);
    const double ft = 2 * s * du;
    worst = std::max(worst, std::abs(ft - kernel_multiplier(spec, t)) / peak);
  }
  CHECK(worst <= 2e-4);
}
