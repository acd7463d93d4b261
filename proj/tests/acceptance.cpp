#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wignerscope/estimator.hpp"
#include "wignerscope/fockspace.hpp"
#include "wignerscope/kernels.hpp"
#include "wignerscope/lowerbound.hpp"
#include "wignerscope/quadrature.hpp"
#include "wignerscope/sampler.hpp"
#include "wignerscope/tomography.hpp"

using namespace wignerscope;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "NOT ");
    detail += buf;
    pass = pass && ok;
  }
};

DensityMatrix state(std::string_view text) { return materialize(parse_state_spec(text)); }

DensityMatrix random_state(std::mt19937_64& gen, std::size_t dim, int rank) {
  std::normal_distribution<double> g;
  std::vector<cplx> e(dim * dim, cplx{});
  for (int r = 0; r < rank; ++r) {
    std::vector<cplx> v(dim);
    double norm = 0.0;
    for (auto& c : v) {
      c = {g(gen), g(gen)};
      norm += std::norm(c);
    }
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t k = 0; k < dim; ++k) e[j * dim + k] += v[j] * std::conj(v[k]) / (norm * rank);
  }
  return DensityMatrix(dim, std::move(e));
}

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

RiskConfig cat_experiment(double eta, std::size_t n, std::size_t reps) {
  RiskConfig c;
  c.state = parse_state_spec("cat:3");
  c.eta = eta;
  c.rule = BandwidthRule::parse("opt", {0.2, 2.0, 1.0});
  c.variant = KernelVariant::modified;
  c.points = {{0.0, 0.0}};
  c.n = n;
  c.reps = reps;
  c.seed = 2024;
  return c;
}

Verdict vacuum_mean() {
  Verdict v;
  const double h = 0.4, eta = 0.9;
  const std::size_t n = 1000000;
  const Dataset ds = simulate(parse_state_spec("fock:0"), n, eta, 101);
  const KernelSpec spec(h, NoiseModel(eta));
  const KernelTable table = build_table(spec, table_range(ds, spec, 0.0), suggested_table_step(spec));
  double s = 0.0, s2 = 0.0;
  const double inv = 1.0 / std::sqrt(eta);
  for (const auto& r : ds.records) {
    const double k = table(r.y * inv);
    s += k;
    s2 += k * k;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / (n - 1.0));
  const double target = (1 - std::exp(-1 / (4 * h * h))) / pi;
  const double pooled = estimate_point(ds, table, {0.0, 0.0});
  v.require(std::abs(pooled - mean) <= 1e-12 * std::abs(mean), "estimator %.6f equals per-record mean", pooled);
  v.require(std::abs(mean - target) <= 3 * se, "mean %.5f vs %.5f within 3 SE (SE %.2e, z %.2f)", mean, target, se,
            (mean - target) / se);
  return v;
}

Verdict table_band() {
  Verdict v;
  const auto small = risk_eval(cat_experiment(0.95, 10000, 100));
  const auto large = risk_eval(cat_experiment(0.95, 100000, 100));
  const double m4 = small.per_point_mse[0], m5 = large.per_point_mse[0];
  v.require(m4 >= 1.7e-3 && m4 <= 1.5e-2, "MSE(0,0) at n=1e4 = %.3e in [1.7e-3, 1.5e-2] (h %.4f)", m4, small.h);
  v.require(m5 < m4, "MSE at n=1e5 = %.3e below n=1e4", m5);
  return v;
}

Verdict noise_ordering() {
  Verdict v;
  const double hi = risk_eval(cat_experiment(0.95, 10000, 50)).per_point_mse[0];
  const double lo = risk_eval(cat_experiment(0.85, 10000, 50)).per_point_mse[0];
  v.require(lo > hi, "MSE at eta=0.85 %.3e > eta=0.95 %.3e", lo, hi);
  return v;
}

Verdict envelopes() {
  Verdict v;
  const double eta = 0.9;
  const NoiseModel noise(eta);
  const auto vac = state("fock:0");
  const double I = class_integral([](double t) { return std::exp(-t * t / 4); }, {0.2, 2.0, 1.0}).value;
  const SmoothnessClass cls{0.2, 2.0, I / (4 * pi * pi)};
  const std::size_t n = 100000;
  for (double h : {0.3, 0.25, 0.2}) {
    const KernelSpec spec(h, noise);
    const double bias = expected_estimate(vac, spec, {0.0, 0.0}) - wigner_eval(vac, {0.0, 0.0});
    const double bound = bias_bound_sq(cls, h);
    v.require(bias * bias <= 1.5 * bound, "h=%.2f bias^2 %.3e <= 1.5 x %.3e", h, bias * bias, bound);

    RiskConfig c;
    c.state = parse_state_spec("fock:0");
    c.eta = eta;
    c.rule.kind = BandwidthKind::fixed;
    c.rule.h = h;
    c.points = {{0.0, 0.0}};
    c.n = n;
    c.reps = 50;
    c.seed = 77;
    const auto rep = risk_eval(c);
    const double shift = rep.per_point_mean[0] - rep.true_values[0];
    const double var = (rep.per_point_mse[0] - shift * shift) * 50.0 / 49.0;
    const double vb = variance_bound(noise, h, n);
    v.require(var <= 1.5 * vb, "var %.3e <= 1.5 x %.3e", var, vb);
  }
  return v;
}

Verdict structural() {
  Verdict v;
  {
    const auto rule = quad::gauss_hermite_scaled(240);
    double worst = 0.0;
    for (int j = 0; j <= 30; ++j)
      for (int k = 0; k <= j; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
          s += rule.weights[i] * hermite_psi(j, rule.nodes[i]) * hermite_psi(k, rule.nodes[i]);
        worst = std::max(worst, std::abs(s - (j == k ? 1.0 : 0.0)));
      }
    v.require(worst <= 1e-10, "Hermite orthonormality %.1e", worst);
  }
  {
    double worst = 0.0;
    for (const char* text : {"fock:0", "fock:1", "fock:4", "fock:9", "coherent:2,1", "squeezed:0.5", "cat:3",
                             "cat:3,p", "cat:1"}) {
      const auto rho = state(text);
      for (double q = -6.0; q <= 6.0; q += 0.25)
        for (double p = -6.0; p <= 6.0; p += 0.25) worst = std::max(worst, std::abs(wigner_eval(rho, {q, p})));
    }
    v.require(worst <= 1 / pi + 1e-9, "max |W| - 1/pi = %.1e", worst - 1 / pi);
  }
  std::mt19937_64 gen(5);
  {
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const auto rho = random_state(gen, 4 + 4 * trial, 1 + trial);
      const auto tau = random_state(gen, 12 - 3 * trial, 3 - trial);
      const double step = 0.07;
      double s = 0.0;
      for (double q = -9.0; q <= 9.0; q += step)
        for (double p = -9.0; p <= 9.0; p += step) {
          const double d = wigner_eval(rho, {q, p}) - wigner_eval(tau, {q, p});
          s += d * d;
        }
      worst = std::max(worst, std::abs(hs_distance_sq(rho, tau) - 2 * pi * s * step * step));
    }
    v.require(worst <= 1e-4, "isometry %.1e", worst);
  }
  {
    std::uniform_real_distribution<double> ux(-3.5, 3.5), uphi(0.0, pi);
    double worst = 0.0;
    for (std::size_t dim : {2u, 5u, 8u}) {
      const auto rho = random_state(gen, dim, 2);
      const auto field = wigner_field(rho);
      for (int i = 0; i < 20; ++i) {
        const double x = ux(gen), phi = uphi(gen);
        worst = std::max(worst, std::abs(radon_numeric(field, x, phi) - quad_density(rho, x, phi)));
      }
    }
    v.require(worst <= 1e-6, "Radon vs quadrature density %.1e", worst);
  }
  {
    const auto ideal = sample_ideal(state("fock:0"), 100000, 31);
    for (double eta : {0.7, 0.9, 0.99}) {
      const auto ds = add_noise(ideal, eta, 32);
      std::vector<double> ys;
      for (const auto& r : ds.records) ys.push_back(r.y);
      const double d = ks_statistic(ys, [](double y) { return 0.5 * std::erfc(-y); });
      v.require(d < 1.628 / std::sqrt(double(ys.size())), "KS eta=%.2f D=%.4f", eta, d);
    }
  }
  {
    double worst = 0.0;
    for (double h : {0.3, 0.5, 1.0})
      for (double eta : {0.5, 0.9}) {
        const double g = NoiseModel(eta).gamma();
        const double closed = std::expm1(g / (h * h)) / (4 * pi * g);
        worst = std::max(worst, std::abs(kernel_eval(KernelSpec(h, NoiseModel(eta)), 0.0) / closed - 1));
      }
    v.require(worst <= 1e-6, "K(0) closed form %.1e", worst);
  }
  return v;
}

Verdict bandwidths() {
  Verdict v;
  double worst = 0.0;
  int solved = 0, clamped = 0;
  for (double beta : {0.05, 0.1, 0.2, 0.5, 1.0})
    for (double r : {0.25, 0.5, 1.0, 1.5, 2.0})
      for (double eta : {0.6, 0.8, 0.95})
        for (std::size_t n : {10000u, 1000000u}) {
          BandwidthRule rule;
          rule.cls = {beta, r, 1.0};
          const NoiseModel noise(eta);
          const double h = bandwidth(rule, n, noise);
          if (h >= 1.0) {
            ++clamped;
            continue;
          }
          ++solved;
          worst = std::max(worst, std::abs(bandwidth_residual(rule.cls, noise, n, h)));
        }
  v.require(worst <= 1e-12, "residual %.1e over %d roots (%d clamped to 1)", worst, solved, clamped);

  double r2 = 0.0, ad = 0.0;
  for (double beta : {0.05, 0.1, 0.2})
    for (double eta : {0.6, 0.8, 0.95})
      for (std::size_t n : {10000u, 1000000u}) {
        const NoiseModel noise(eta);
        const double ln = std::log(double(n));
        BandwidthRule rule;
        rule.cls = {beta, 2.0, 1.0};
        const double closed = std::sqrt((2 * beta + 2 * noise.gamma()) / ln);
        r2 = std::max(r2, std::abs(bandwidth(rule, n, noise) - closed));
        rule.kind = BandwidthKind::adaptive;
        const double s = 2 * eta * ln / (1 - eta);
        ad = std::max(ad, std::abs(bandwidth(rule, n, noise) - 1 / std::sqrt(s - std::sqrt(s))));
      }
  v.require(r2 <= 1e-12, "r=2 root vs closed form %.1e", r2);
  v.require(ad <= 1e-12, "adaptive vs closed form %.1e", ad);
  return v;
}

Verdict lower_bound() {
  Verdict v;
  const AlphaXi axi{0.2, 0.95};
  const BumpSpec bump{0.1, 1.0};
  const SmoothnessClass cls{0.5, 1.0, pair_class_constant(axi, 0.5, 1.0, bump)};
  const auto rep = verify_pair(axi, bump, cls, NoiseModel(0.9), 1000000);
  v.require(rep.positivity_ok, "positivity margin %.3e", rep.positivity_margin);
  v.require(rep.class_ok, "class %.4g <= %.4g", rep.class_lhs, rep.class_bound);
  v.require(rep.separation_ok, "separation %.3e >= %.3e", rep.separation, rep.separation_threshold);
  v.require(rep.chi2_ok, "n chi^2 %.3e <= 1", rep.chi2_times_n);

  double mehler = 0.0;
  for (double z : {0.3, 0.6, 0.9})
    for (double x : {0.0, 1.0, 2.5}) {
      const auto psi = hermite_psi_all(400, x);
      double lhs = 0.0, zk = 1.0;
      for (double p : psi) {
        lhs += zk * p * p;
        zk *= z;
      }
      mehler = std::max(mehler, std::abs(lhs - std::exp(-x * x * (1 - z) / (1 + z)) / std::sqrt(pi * (1 - z * z))));
    }
  v.require(mehler <= 1e-8, "Mehler %.1e", mehler);

  const auto uniform = rho_alpha_xi_diag({1.0, 0.0}, 200);
  double closed = 0.0;
  for (std::size_t k = 0; k <= 200; ++k) closed = std::max(closed, std::abs(uniform[k] * (k + 1.0) * (k + 2.0) - 1));
  v.require(closed <= 1e-10, "1/((k+1)(k+2)) rel %.1e", closed);

  const AlphaXi mid{0.2, 0.5};
  const double asym = mid.alpha * std::pow(1 - mid.xi, -mid.alpha) * std::tgamma(mid.alpha + 1) * std::pow(200.0, -1.2);
  const double ratio = rho_alpha_xi_diag(mid, 200)[200] / asym;
  v.require(std::abs(ratio - 1) <= 0.1, "power law at k=200 ratio %.4f", ratio);

  std::vector<double> env;
  for (double ht : {0.3, 0.2, 0.15}) {
    const auto tau = tau_diag(bump, {0.5, 1.0, 1.0}, ht, 1000);
    double m = 0.0;
    for (std::size_t k = 50; k <= 1000; ++k) m = std::max(m, std::abs(tau[k]) * std::pow(double(k), 1.25));
    env.push_back(m);
  }
  v.require(std::isfinite(env[0]) && env[1] < env[0] && env[2] < env[1], "k^(5/4) envelope %.3e > %.3e > %.3e", env[0],
            env[1], env[2]);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"1 vacuum estimator mean", vacuum_mean},   {"2 cat-state MSE band", table_band},
      {"3 noise-level ordering", noise_ordering}, {"4 bias and variance envelopes", envelopes},
      {"5 structural suites", structural},        {"6 bandwidth equations", bandwidths},
      {"7 lower-bound construction", lower_bound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] AC%s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", c.name, secs, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of 7 criteria passed\n", 7 - failed);
  return failed == 0 ? 0 : 1;
}
