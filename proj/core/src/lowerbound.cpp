#include "wignerscope/lowerbound.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "json.hpp"
#include "wignerscope/errors.hpp"
#include "wignerscope/estimator.hpp"
#include "wignerscope/quadrature.hpp"

namespace wignerscope {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kLogLimit = 700.0;
using GL16 = boost::math::quadrature::gauss<double, 16>;

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double x4 = x * x * x * x;
  return x4 * (35.0 - x * (84.0 - x * (70.0 - 20.0 * x)));
}

double smoothstep_derivative(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double x3 = x * x * x;
  return 140.0 * x3 * (1.0 - x) * (1.0 - x) * (1.0 - x);
}

double log_amplitude(const SmoothnessClass& cls, double htilde) {
  return std::log(2.0) + 0.5 * std::log(pi * cls.beta * cls.r * cls.L) +
         (1.0 - 0.5 * cls.r) * std::log(htilde) + cls.beta / std::pow(htilde, cls.r);
}

void check_htilde(double htilde) {
  if (!(htilde > 0.0 && htilde < 1.0)) throw ValidationError("htilde must lie in (0, 1)");
}

// Points where J_htilde changes its closed form, ascending.
std::array<double, 4> joins(const BumpSpec& bump, const SmoothnessClass& cls, double htilde) {
  const double base = std::pow(htilde, -cls.r);
  const double inv_r = 1.0 / cls.r;
  return {std::pow(base + bump.delta, inv_r), std::pow(base + 2.0 * bump.delta, inv_r),
          std::pow(base + bump.D - 2.0 * bump.delta, inv_r),
          std::pow(base + bump.D - bump.delta, inv_r)};
}

// Gauss-Legendre over the pieces of the support, each no wider than `width`.
double over_support(const quad::Integrand& f, const std::array<double, 4>& t, double width) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s += quad::gauss_legendre_panels(f, t[i], t[i + 1], width);
  return s;
}

double adaptive_over_support(const quad::Integrand& f, const std::array<double, 4>& t,
                             double abs_tol) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s += quad::adaptive(f, t[i], t[i + 1], abs_tol).value;
  return s;
}

double log_log_n(std::size_t n) { return std::log(std::log(static_cast<double>(n))); }

}  // namespace

void AlphaXi::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("--alpha must lie in (0, 1]");
  if (!(xi >= 0.0 && xi < 1.0)) throw ValidationError("--xi must lie in [0, 1)");
}

std::vector<double> rho_alpha_xi_diag(const AlphaXi& axi, std::size_t k_max) {
  axi.validate();
  if (k_max > 5000) throw ValidationError("rho_alpha_xi_diag: k_max must be <= 5000");
  const double a = axi.alpha;
  const double width = 1.0 - axi.xi;
  const double pref = a * std::pow(width, -a);
  std::vector<double> out(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double kd = static_cast<double>(k);
    auto f = [a, kd](double w, double) {
      if (w <= 0.0) return 0.0;
      if (w >= 1.0) return kd == 0.0 ? 1.0 : 0.0;
      return std::exp(kd * std::log1p(-w) + a * std::log(w));
    };
    out[k] = pref * quad::tanh_sinh(f, 0.0, width, 1e-13).value;
  }
  return out;
}

double rho_alpha_xi_tail(const AlphaXi& axi, std::size_t k) {
  axi.validate();
  const double a = axi.alpha;
  const double width = 1.0 - axi.xi;
  const double top = std::pow(width, a);
  const double kd = static_cast<double>(k);
  auto f = [a, kd](double s, double) {
    const double w = std::pow(s, 1.0 / a);
    if (w >= 1.0) return kd == 0.0 ? 1.0 : 0.0;
    return std::exp(kd * std::log1p(-w));
  };
  return quad::tanh_sinh(f, 0.0, top, 1e-13).value / top;
}

double p_alpha_xi(const AlphaXi& axi, double x) {
  const double a = axi.alpha;
  const double width = 1.0 - axi.xi;
  const double pref = a * std::pow(width, -a) / std::sqrt(pi);
  const double x2 = x * x;
  auto f = [a, x2](double w, double) {
    if (w <= 0.0) return 0.0;
    return std::pow(w, a - 0.5) / std::sqrt(2.0 - w) * std::exp(-x2 * w / (2.0 - w));
  };
  return pref * quad::tanh_sinh(f, 0.0, width, 1e-13).value;
}

double p_alpha_xi_noisy(const AlphaXi& axi, const NoiseModel& noise, double y) {
  const double a = axi.alpha;
  const double width = 1.0 - axi.xi;
  const double eta = noise.eta();
  const double y2 = y * y;
  auto f = [a, eta, y2](double s, double) {
    const double w = std::pow(s, 1.0 / a);
    if (w <= 0.0) return 0.0;
    const double var = eta * (2.0 - w) / (2.0 * w) + 0.5 * (1.0 - eta);
    return std::exp(-0.5 * y2 / var) / std::sqrt(2.0 * pi * var);
  };
  const double top = std::pow(width, a);
  return quad::tanh_sinh(f, 0.0, top, 1e-13).value / top;
}

double wtilde_alpha_xi(const AlphaXi& axi, double t) {
  const double a = axi.alpha;
  const double width = 1.0 - axi.xi;
  const double t2 = t * t;
  auto f = [a, t2](double s, double) {
    const double w = std::pow(s, 1.0 / a);
    if (w <= 0.0) return 0.0;
    return std::exp(-t2 * (2.0 - w) / (4.0 * w));
  };
  const double top = std::pow(width, a);
  return quad::tanh_sinh(f, 0.0, top, 1e-13).value / top;
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

void BumpSpec::validate() const {
  if (!(delta > 0.0)) throw ValidationError("--delta must be positive");
  if (!(D > 4.0 * delta)) throw ValidationError("--bigD must exceed 4 * delta");
}

double BumpSpec::operator()(double u) const {
  if (u <= delta || u >= D - delta) return 0.0;
  if (u < 2.0 * delta) return smoothstep((u - delta) / delta);
  if (u > D - 2.0 * delta) return smoothstep((D - delta - u) / delta);
  return 1.0;
}

double BumpSpec::derivative(double u) const {
  if (u <= delta || u >= D - delta) return 0.0;
  if (u < 2.0 * delta) return smoothstep_derivative((u - delta) / delta) / delta;
  if (u > D - 2.0 * delta) return -smoothstep_derivative((D - delta - u) / delta) / delta;
  return 0.0;
}

double j_htilde(const BumpSpec& bump, const SmoothnessClass& cls, double htilde, double t) {
  check_htilde(htilde);
  const double a = std::abs(t);
  const double tr = std::pow(a, cls.r);
  const double shape = bump(tr - std::pow(htilde, -cls.r));
  if (shape == 0.0) return 0.0;
  const double log_v = log_amplitude(cls, htilde) - 2.0 * cls.beta * tr;
  if (log_v > kLogLimit) throw NumericGuardError("j_htilde: value overflows");
  return std::exp(log_v) * shape;
}

double j_htilde_derivative(const BumpSpec& bump, const SmoothnessClass& cls, double htilde,
                           double t) {
  check_htilde(htilde);
  const double a = std::abs(t);
  if (a == 0.0) return 0.0;
  const double tr = std::pow(a, cls.r);
  const double u = tr - std::pow(htilde, -cls.r);
  const double shape = bump(u);
  const double slope = bump.derivative(u);
  if (shape == 0.0 && slope == 0.0) return 0.0;
  const double log_v = log_amplitude(cls, htilde) - 2.0 * cls.beta * tr;
  if (log_v > kLogLimit) throw NumericGuardError("j_htilde: value overflows");
  const double dtr = cls.r * tr / a;
  const double d = std::exp(log_v) * dtr * (slope - 2.0 * cls.beta * shape);
  return t < 0.0 ? -d : d;
}

std::pair<double, double> j_support(const BumpSpec& bump, const SmoothnessClass& cls,
                                    double htilde) {
  const auto t = joins(bump, cls, htilde);
  return {t.front(), t.back()};
}

double htilde_solve(const SmoothnessClass& cls, const NoiseModel& noise, std::size_t n) {
  cls.validate();
  if (n < 16) throw ValidationError("htilde_solve: n must be >= 16");
  const double ln = std::log(static_cast<double>(n));
  const double g = noise.gamma();
  if (cls.r == 2.0) return std::pow(std::log(static_cast<double>(n) * ln) / (2.0 * (cls.beta + g)), -0.5);
  const double target = ln + log_log_n(n) * log_log_n(n);
  auto residual = [&](double h) {
    return 2.0 * cls.beta / std::pow(h, cls.r) + 2.0 * g / (h * h) - target;
  };
  double lo = 1e-8;
  double hi = 1.0;
  if (residual(hi) > 0.0) throw ValidationError("htilde_solve: no root in (0, 1); n too small");
  while (residual(lo) < 0.0) lo *= 1e-3;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (residual(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;
}

std::vector<double> tau_diag(const BumpSpec& bump, const SmoothnessClass& cls, double htilde,
                             std::size_t k_max) {
  bump.validate();
  cls.validate();
  check_htilde(htilde);
  if (k_max > kMaxSpecialOrder) throw UnsupportedOrderError("tau_diag: k_max exceeds 2000");
  auto t = joins(bump, cls, htilde);
  // Beyond the last turning point every Laguerre function up to k_max is negligible.
  const double kd = static_cast<double>(k_max);
  const double x_cut = 4.0 * kd + 62.0 + 40.0 * std::cbrt(2.0 * kd + 1.0);
  const double t_cut = std::sqrt(2.0 * x_cut);
  for (auto& v : t) v = std::min(v, t_cut);

  std::vector<double> ell(k_max + 1);
  const auto& x = GL16::abscissa();
  const auto& w = GL16::weights();
  auto integrate = [&](double width) {
    std::vector<double> acc(k_max + 1, 0.0);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      if (t[i + 1] <= t[i]) continue;
      const auto panels = static_cast<std::size_t>(std::ceil((t[i + 1] - t[i]) / width));
      const double pw = (t[i + 1] - t[i]) / static_cast<double>(panels);
      for (std::size_t p = 0; p < panels; ++p) {
        const double a = t[i] + pw * static_cast<double>(p);
        const double mid = a + 0.5 * pw;
        const double half = 0.5 * pw;
        for (std::size_t q = 0; q < x.size(); ++q) {
          for (double sign : {-1.0, 1.0}) {
            if (sign < 0.0 && x[q] == 0.0) continue;
            const double s = mid + sign * half * x[q];
            const double jw = s * j_htilde(bump, cls, htilde, s);
            if (jw == 0.0) continue;
            laguerre_functions(0, 0.5 * s * s, ell);
            const double c = half * w[q] * jw;
            for (std::size_t k = 0; k <= k_max; ++k) acc[k] += c * ell[k];
          }
        }
      }
    }
    return acc;
  };

  double width = std::min(0.25 * bump.delta, pi / (4.0 * std::sqrt(2.0 * kd + 2.0)));
  std::vector<double> coarse = integrate(width);
  for (int iter = 0; iter < 6; ++iter) {
    width /= 2.0;
    std::vector<double> fine = integrate(width);
    double scale = 0.0;
    double diff = 0.0;
    for (std::size_t k = 0; k <= k_max; ++k) {
      scale = std::max(scale, std::abs(fine[k]));
      diff = std::max(diff, std::abs(fine[k] - coarse[k]));
    }
    if (diff <= 1e-9 * scale || scale == 0.0) return fine;
    coarse = std::move(fine);
  }
  throw NumericGuardError("tau_diag: quadrature did not converge");
}

double perturbation_density_noisy(const BumpSpec& bump, const SmoothnessClass& cls,
                                  double htilde, const NoiseModel& noise, double y) {
  const double se = std::sqrt(noise.eta());
  auto t = joins(bump, cls, htilde);
  for (auto& v : t) v /= se;
  const double damp = (1.0 - noise.eta()) / 4.0;
  auto f = [&](double s) {
    return std::cos(s * y) * j_htilde(bump, cls, htilde, s * se) * std::exp(-damp * s * s);
  };
  double width = 0.25 * bump.delta / cls.r * std::pow(t[0] * se, 1.0 - cls.r) / se;
  if (y != 0.0) width = std::min(width, pi / (4.0 * std::abs(y)));
  return over_support(f, t, width) / pi;
}

double pair_class_constant(const AlphaXi& axi, double beta, double r, const BumpSpec& bump) {
  axi.validate();
  bump.validate();
  const SmoothnessClass cls{beta, r, 1.0};
  cls.validate();
  const ClassIntegral base = class_integral([&](double s) { return wtilde_alpha_xi(axi, s); }, cls);
  if (!base.converged) throw NumericGuardError("base class integral: " + base.diagnostic);
  const double a = -std::expm1(-0.5 * beta * bump.delta);
  return base.value / (4.0 * pi * pi * a * a);
}

double chi2_per_observation(const AlphaXi& axi, const BumpSpec& bump, const SmoothnessClass& cls,
                            double htilde, const NoiseModel& noise, double scale) {
  check_htilde(htilde);
  const double se = std::sqrt(noise.eta());
  const double damp = (1.0 - noise.eta()) / 4.0;
  auto t = joins(bump, cls, htilde);
  for (auto& v : t) v /= se;
  const double edge = 0.25 * std::min(t[1] - t[0], t[3] - t[2]);
  const double dy = pi / (8.0 * t[3]);
  const double chunk = 8.0;
  const auto& x = GL16::abscissa();
  const auto& w = GL16::weights();
  std::vector<double> nodes;
  std::vector<double> weights;
  double total = 0.0;
  std::size_t k = 0;
  for (double y0 = 0.0;; y0 += chunk) {
    const double y1 = y0 + chunk;
    if (y0 > 1e5) throw NumericGuardError("chi^2 integrand does not decay");
    nodes.clear();
    weights.clear();
    const double width = std::min(edge, pi / (4.0 * y1));
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const auto panels = static_cast<std::size_t>(std::ceil((t[i + 1] - t[i]) / width));
      const double pw = (t[i + 1] - t[i]) / static_cast<double>(panels);
      for (std::size_t p = 0; p < panels; ++p) {
        const double mid = t[i] + pw * (static_cast<double>(p) + 0.5);
        for (std::size_t q = 0; q < x.size(); ++q)
          for (double sign : {-1.0, 1.0}) {
            const double s = mid + sign * 0.5 * pw * x[q];
            const double g = scale * j_htilde(bump, cls, htilde, s * se) * std::exp(-damp * s * s);
            if (g == 0.0) continue;
            nodes.push_back(s);
            weights.push_back(0.5 * pw * w[q] * g / pi);
          }
      }
    }
    double part = 0.0;
    for (;; ++k) {
      const double y = dy * static_cast<double>(k);
      if (y >= y1) break;
      double v = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) v += weights[i] * std::cos(nodes[i] * y);
      const double p1 = p_alpha_xi_noisy(axi, noise, y) + v;
      if (p1 <= 0.0) return std::numeric_limits<double>::infinity();
      part += (k == 0 ? 0.5 : 1.0) * 4.0 * v * v / p1;
    }
    total += part * dy;
    if (y1 >= 32.0 && part * dy <= 1e-13 * total) break;
  }
  // Two half-lines, times the phase range.
  return 2.0 * pi * total;
}

// ---------------------------------------------------------------------------
// Pair verification
// ---------------------------------------------------------------------------

PairReport verify_pair(const AlphaXi& axi, const BumpSpec& bump, const SmoothnessClass& cls,
                       const NoiseModel& noise, std::size_t n, const PairOptions& options) {
  axi.validate();
  bump.validate();
  cls.validate();
  PairReport rep;
  rep.htilde = options.htilde ? *options.htilde : htilde_solve(cls, noise, n);
  const double h = rep.htilde;
  check_htilde(h);
  const double scale = options.tau_scale;
  const auto t = joins(bump, cls, h);
  auto J = [&](double s) { return scale * j_htilde(bump, cls, h, s); };

  // Positivity of rho +- tau.
  const auto rho = rho_alpha_xi_diag(axi, options.k_max);
  const auto tau = tau_diag(bump, cls, h, options.k_max);
  rep.positivity_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= options.k_max; ++k) {
    const double m = rho[k] - std::abs(scale * tau[k]);
    if (m < rep.positivity_margin) {
      rep.positivity_margin = m;
      rep.positivity_worst_k = k;
    }
  }
  rep.positivity_ok = rep.positivity_margin >= 0.0;

  // Class membership by the triangle inequality.
  const ClassIntegral base = class_integral([&](double s) { return wtilde_alpha_xi(axi, s); }, cls);
  rep.class_base = base.value;
  rep.class_base_converged = base.converged;
  const double log_amp = log_amplitude(cls, h);
  auto weighted = [&](double s) {
    const double shape = bump(std::pow(s, cls.r) - std::pow(h, -cls.r));
    if (shape == 0.0) return 0.0;
    return s * shape * shape *
           std::exp(2.0 * log_amp - 2.0 * cls.beta * std::pow(s, cls.r));
  };
  const double pert_tol = 1e-12 * std::max(1.0, cls.L);
  rep.class_perturbation = scale * scale * 2.0 * pi * adaptive_over_support(weighted, t, pert_tol);
  rep.class_lhs = std::pow(std::sqrt(rep.class_base) + std::sqrt(rep.class_perturbation), 2);
  rep.class_bound = cls.bound();
  rep.class_ok = base.converged && rep.class_lhs <= rep.class_bound;

  // Separation at the origin.
  auto first_moment = [&](double s) { return s * J(s); };
  rep.separation = std::abs(adaptive_over_support(first_moment, t, 1e-14)) / pi;
  rep.rate_phi = std::sqrt(rate_phi2(cls, n, noise));
  rep.separation_threshold = 2.0 * rep.rate_phi * 0.5;
  rep.separation_ok = rep.separation >= rep.separation_threshold;

  // Noisy-density diagnostics on [0, pi) x R.
  const double se = std::sqrt(noise.eta());
  const double damp = (1.0 - noise.eta()) / 4.0;
  std::array<double, 4> ts = t;
  for (auto& v : ts) v /= se;
  auto g2 = [&](double s) {
    const double g = J(s * se) * std::exp(-damp * s * s);
    return g * g;
  };
  rep.l2_diff_sq = 4.0 * adaptive_over_support(g2, ts, 1e-300);
  const double damp_eta = (1.0 - noise.eta()) / (4.0 * noise.eta());
  auto dterm = [&](double s) {
    const double e = std::exp(-damp_eta * s * s);
    const double d = scale * j_htilde_derivative(bump, cls, h, s) * e - 2.0 * damp_eta * s * J(s) * e;
    return d * d;
  };
  rep.derivative_term = adaptive_over_support(dterm, t, 1e-300);

  const double chi = chi2_per_observation(axi, bump, cls, h, noise, scale);
  rep.chi2_times_n = static_cast<double>(n) * chi;
  rep.chi2_ok = std::isfinite(rep.chi2_times_n) && rep.chi2_times_n <= 1.0;
  return rep;
}

std::string to_json(const PairReport& r) {
  nlohmann::ordered_json j;
  j["htilde"] = r.htilde;
  j["positivity_margin"] = r.positivity_margin;
  j["positivity_worst_k"] = r.positivity_worst_k;
  j["class_lhs"] = r.class_lhs;
  j["class_base"] = r.class_base;
  j["class_perturbation"] = r.class_perturbation;
  j["class_bound"] = r.class_bound;
  j["class_base_converged"] = r.class_base_converged;
  j["separation"] = r.separation;
  j["rate_phi"] = r.rate_phi;
  j["separation_threshold"] = r.separation_threshold;
  j["chi2_times_n"] = r.chi2_times_n;
  j["l2_diff_sq"] = r.l2_diff_sq;
  j["derivative_term"] = r.derivative_term;
  j["verdicts"] = {{"positivity", r.positivity_ok},
                   {"class", r.class_ok},
                   {"separation", r.separation_ok},
                   {"chi2", r.chi2_ok}};
  j["all_ok"] = r.all_ok();
  return j.dump(2);
}

}  // namespace wignerscope
