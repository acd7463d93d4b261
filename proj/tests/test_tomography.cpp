#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wignerscope/errors.hpp"
#include "wignerscope/fockspace.hpp"
#include "wignerscope/tomography.hpp"

using namespace wignerscope;
using oracle::pi;

namespace {

DensityMatrix state(std::string_view text) { return materialize(parse_state_spec(text)); }

DensityMatrix random_state(std::mt19937_64& gen, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<cplx> e(dim * dim, cplx{});
  for (int r = 0; r < 2; ++r) {
    std::vector<cplx> v(dim);
    double norm = 0.0;
    for (auto& c : v) norm += std::norm(c = {g(gen), g(gen)});
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t k = 0; k < dim; ++k) e[j * dim + k] += 0.5 * v[j] * std::conj(v[k]) / norm;
  }
  return DensityMatrix(dim, std::move(e));
}

// Quadrature density from explicit Hermite polynomials.
double density_oracle(const DensityMatrix& rho, double x, double phi) {
  cplx s = 0.0;
  for (std::size_t j = 0; j < rho.dim(); ++j)
    for (std::size_t k = 0; k < rho.dim(); ++k)
      s += rho(j, k) * oracle::hermite_function(j, x) * oracle::hermite_function(k, x) *
           std::exp(cplx(0.0, -(double(j) - double(k)) * phi));
  return s.real();
}

}  // namespace

TEST_CASE("noise model") {
  NoiseModel noise(0.9);
  CHECK(noise.gamma() == doctest::Approx(1.0 / 36.0).epsilon(1e-15));
  CHECK(noise.noise_sd() == doctest::Approx(std::sqrt(0.05)).epsilon(1e-15));
  CHECK_THROWS_AS(NoiseModel(0.0), ValidationError);
  CHECK_THROWS_AS(NoiseModel(1.0), ValidationError);
  CHECK_THROWS_AS(NoiseModel(std::nan("")), ValidationError);
  CHECK_THROWS_AS((SmoothnessClass{0.2, 2.5, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((SmoothnessClass{-0.2, 2.0, 1.0}.validate()), ValidationError);
  CHECK(SmoothnessClass{0.2, 2.0, 1.0}.bound() == doctest::Approx(4 * pi * pi));
  CHECK(x_max(8) == doctest::Approx(10.0));
}

TEST_CASE("quadrature density examples") {
  const auto vac = state("fock:0");
  for (double phi : {0.0, 1.0, 3.0}) CHECK(quad_density(vac, 0.0, phi) == doctest::Approx(1 / std::sqrt(pi)).epsilon(1e-14));
  CHECK(quad_density(state("fock:1"), 0.0, 0.4) == doctest::Approx(0.0));
  CHECK(quad_density(state("fock:1"), 1.0, 0.7) ==
        doctest::Approx(2.0 * std::exp(-1.0) / std::sqrt(pi)).epsilon(1e-14));
}

TEST_CASE("quadrature density matches the explicit Hermite sum") {
  std::mt19937_64 gen(5);
  for (std::size_t dim : {3u, 7u, 10u}) {
    const auto rho = random_state(gen, dim);
    for (double x : {-3.1, -0.2, 0.9, 2.4})
      for (double phi : {0.0, 0.8, 2.9})
        CHECK(quad_density(rho, x, phi) == doctest::Approx(density_oracle(rho, x, phi)).epsilon(1e-12));
  }
}

TEST_CASE("phase harmonics reproduce the density") {
  std::mt19937_64 gen(9);
  const auto rho = random_state(gen, 6);
  std::vector<std::complex<double>> h(6);
  phase_harmonics(rho, 0.7, h);
  for (double phi : {0.1, 1.3, 2.2}) CHECK(density_from_harmonics(h, phi) == doctest::Approx(quad_density(rho, 0.7, phi)).epsilon(1e-13));
}

TEST_CASE("quadrature densities integrate to the retained trace") {
  for (const char* text : {"fock:0", "fock:3", "cat:3", "coherent:2,-1", "squeezed:0.6"}) {
    const auto rho = state(text);
    const double xm = x_max(rho.dim());
    for (double phi : {0.0, 1.2}) {
      const double mass = oracle::simpson([&](double x) { return quad_density(rho, x, phi); }, -xm, xm, 4000);
      CHECK(std::abs(mass - (1.0 - rho.tail_mass())) <= 1e-8);
    }
  }
}

TEST_CASE("radon transform examples") {
  const auto vac_field = wigner_field(state("fock:0"));
  CHECK(radon_numeric(vac_field, 0.0, 0.0) == doctest::Approx(1 / std::sqrt(pi)).epsilon(1e-9));
  const auto f2 = state("fock:2");
  const auto field = wigner_field(f2);
  CHECK(radon_numeric(field, 0.8, 0.3) == doctest::Approx(radon_numeric(field, 0.8, 2.1)).epsilon(1e-9));
  CHECK(std::abs(radon_numeric(field, 0.5, 1.1) - quad_density(f2, 0.5, 1.1)) <= 1e-6);
}

TEST_CASE("radon transform of the Wigner function equals the quadrature density") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> ux(-3.5, 3.5), uphi(0.0, pi);
  double worst = 0.0;
  for (std::size_t dim : {2u, 4u, 6u, 8u, 10u}) {
    const auto rho = random_state(gen, dim);
    const auto field = wigner_field(rho);
    for (int i = 0; i < 20; ++i) {
      const double x = ux(gen), phi = uphi(gen);
      worst = std::max(worst, std::abs(radon_numeric(field, x, phi) - quad_density(rho, x, phi)));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("radon transform refuses a field that is not negligible on its boundary") {
  auto field = wigner_field(state("fock:0"));
  field.radius = 1.0;
  CHECK_THROWS_AS(radon_numeric(field, 0.0, 0.0), CoverageError);
}

TEST_CASE("vacuum quadrature density is noise invariant") {
  const auto vac = state("fock:0");
  for (double eta : {0.3, 0.7, 0.9, 0.99})
    for (double y : {0.0, 0.6, -1.7})
      CHECK(noisy_density(vac, NoiseModel(eta), y, 0.4) ==
            doctest::Approx(std::exp(-y * y) / std::sqrt(pi)).epsilon(1e-9));
}

TEST_CASE("noisy density tends to the ideal density as eta -> 1") {
  const auto rho = state("cat:2");
  for (double y : {-1.5, 0.0, 0.4, 2.2})
    for (double phi : {0.0, 1.0})
      CHECK(std::abs(noisy_density(rho, NoiseModel(1.0 - 1e-7), y, phi) - quad_density(rho, y, phi)) <= 1e-5);
}

TEST_CASE("noisy fock(1) density agrees with a sampling oracle") {
  // X^2 ~ Gamma(3/2, 1) with a random sign; Y = sqrt(eta) X + sqrt((1-eta)/2) G.
  const double eta = 0.9, half = 0.01;
  std::mt19937_64 gen(2024);
  std::gamma_distribution<double> gam(1.5, 1.0);
  std::normal_distribution<double> g;
  const std::size_t draws = 10'000'000;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double x = std::sqrt(gam(gen)) * (i % 2 ? 1.0 : -1.0);
    const double y = std::sqrt(eta) * x + std::sqrt(0.05) * g(gen);
    if (std::abs(y) < half) ++hits;
  }
  const double p = double(hits) / draws;
  const double estimate = p / (2 * half);
  const double se = std::sqrt(p * (1 - p) / draws) / (2 * half);
  const double value = noisy_density(state("fock:1"), NoiseModel(eta), 0.0, 0.0);
  CHECK(std::abs(value - estimate) <= 3 * se);
}

TEST_CASE("noisy densities integrate to the retained trace") {
  for (const char* text : {"fock:1", "cat:3", "squeezed:0.5"}) {
    const auto rho = state(text);
    for (double eta : {0.5, 0.9}) {
      const NoiseModel noise(eta);
      const double r = x_max(rho.dim()) + 6.0;
      const double mass = oracle::simpson([&](double y) { return noisy_density(rho, noise, y, 0.9); }, -r, r, 2000);
      CHECK(std::abs(mass - (1.0 - rho.tail_mass())) <= 1e-6);
    }
  }
}

TEST_CASE("fourier slice examples") {
  const auto vac = state("fock:0");
  for (double t : {0.0, 0.5, 2.0, 4.0}) {
    const auto v = fourier_slice(vac, t, 0.8);
    CHECK(v.real() == doctest::Approx(std::exp(-t * t / 4)).epsilon(1e-10));
    CHECK(std::abs(v.imag()) <= 1e-12);
  }
  const auto cat = state("cat:3");
  CHECK(std::abs(fourier_slice(cat, 0.0, 1.0).real() - (1.0 - cat.tail_mass())) <= 1e-8);
  for (double t : {0.3, 1.5, 5.0}) CHECK(std::abs(fourier_slice(cat, t, 0.2)) <= 1.0);
}

TEST_CASE("fourier slice equals the 2-D Fourier transform of the Wigner function") {
  for (const char* text : {"fock:1", "coherent:1,0.5"}) {
    const auto rho = state(text);
    const double t = 2.0, phi = 0.3;
    const double u = t * std::cos(phi), v = t * std::sin(phi);
    const double step = 0.05;
    cplx s = 0.0;
    for (double q = -8.0; q <= 8.0; q += step)
      for (double p = -8.0; p <= 8.0; p += step)
        s += std::exp(cplx(0.0, u * q + v * p)) * wigner_eval(rho, {q, p});
    s *= step * step;
    CHECK(std::abs(fourier_slice(rho, t, phi) - s) <= 1e-5);
  }
}

TEST_CASE("noise acts multiplicatively on the Fourier slice") {
  const auto rho = state("cat:2,p");
  for (double eta : {0.6, 0.9}) {
    const NoiseModel noise(eta);
    for (double t : {0.5, 1.7, 3.0}) {
      const double phi = 0.6;
      const double r = x_max(rho.dim()) + 6.0;
      const double re = oracle::simpson([&](double y) { return std::cos(t * y) * noisy_density(rho, noise, y, phi); }, -r, r, 3000);
      const double im = oracle::simpson([&](double y) { return std::sin(t * y) * noisy_density(rho, noise, y, phi); }, -r, r, 3000);
      const cplx expect = fourier_slice(rho, t * std::sqrt(eta), phi) * std::exp(-(1 - eta) * t * t / 4);
      CHECK(std::abs(cplx(re, im) - expect) <= 1e-6);
    }
  }
}

TEST_CASE("class integral examples") {
  auto vac = [](double t) { return std::exp(-t * t / 4); };
  const auto in = class_integral(vac, {0.2, 2.0, 1.0});
  CHECK(in.converged);
  CHECK(in.value == doctest::Approx(10 * pi).epsilon(1e-8));
  const auto edge = class_integral(vac, {0.25, 2.0, 1.0});
  CHECK_FALSE(edge.converged);
  CHECK_FALSE(edge.member_of({0.25, 2.0, 1e9}));
  CHECK_FALSE(edge.diagnostic.empty());
  const auto zero = class_integral([](double) { return 0.0; }, {0.2, 2.0, 1.0});
  CHECK(zero.converged);
  CHECK(zero.value == 0.0);
  CHECK(in.member_of({0.2, 2.0, 10 * pi / (4 * pi * pi) + 1e-6}));
  CHECK_FALSE(in.member_of({0.2, 2.0, 10 * pi / (4 * pi * pi) - 1e-6}));
}

TEST_CASE("class integral for r = 1 against a Simpson oracle") {
  auto f1 = [](double t) { return std::exp(-t * t / 4) * (1 - t * t / 2); };
  const auto got = class_integral(f1, {0.7, 1.0, 1.0});
  const double expect = 2 * pi * oracle::simpson([&](double t) { return t * f1(t) * f1(t) * std::exp(1.4 * t); }, 0.0, 40.0, 8000);
  CHECK(got.converged);
  CHECK(got.value == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("radial Fourier profile of diagonal states") {
  const auto f1 = radial_fourier_profile(state("fock:1"));
  for (double t : {0.0, 0.9, 2.5}) {
    CHECK(f1(t) == doctest::Approx(std::exp(-t * t / 4) * (1 - t * t / 2)).epsilon(1e-12));
    CHECK(f1(t) == doctest::Approx(fourier_slice(state("fock:1"), t, 1.0).real()).epsilon(1e-9));
  }
  CHECK_THROWS_AS(radial_fourier_profile(state("cat:2")), ValidationError);
}
