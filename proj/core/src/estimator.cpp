#include "wignerscope/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "parallel.hpp"
#include "wignerscope/errors.hpp"
#include "wignerscope/quadrature.hpp"
#include "wignerscope/rng.hpp"

namespace wignerscope {

namespace {

constexpr double pi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double log_n(std::size_t n) {
  if (n < 2) throw ValidationError("sample size n must be >= 2");
  return std::log(static_cast<double>(n));
}

// Neumaier-compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 0) return 0.0;
  if (hi - lo == 1) return v[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Bandwidths
// ---------------------------------------------------------------------------

BandwidthRule BandwidthRule::parse(std::string_view text, const SmoothnessClass& cls) {
  BandwidthRule rule;
  rule.cls = cls;
  if (text == "opt") {
    rule.kind = BandwidthKind::opt;
  } else if (text == "h1") {
    rule.kind = BandwidthKind::h1;
  } else if (text == "h2") {
    rule.kind = BandwidthKind::h2;
  } else if (text == "r2" || text == "r2_closed") {
    rule.kind = BandwidthKind::r2_closed;
  } else if (text == "adaptive" || text == "ad") {
    rule.kind = BandwidthKind::adaptive;
  } else {
    std::string s(text);
    std::size_t used = 0;
    double h = 0.0;
    try {
      h = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty())
      throw ValidationError("--h must be a number or one of opt, h1, h2, r2, adaptive; got '" +
                            s + "'");
    if (!(h > 0.0 && h <= 1.0)) throw ValidationError("--h must lie in (0, 1]");
    rule.kind = BandwidthKind::fixed;
    rule.h = h;
  }
  return rule;
}

std::string to_string(const BandwidthRule& rule) {
  switch (rule.kind) {
    case BandwidthKind::opt: return "opt";
    case BandwidthKind::h1: return "h1";
    case BandwidthKind::h2: return "h2";
    case BandwidthKind::r2_closed: return "r2";
    case BandwidthKind::adaptive: return "adaptive";
    case BandwidthKind::fixed: return fmt(rule.h);
  }
  return "?";
}

double bandwidth_residual(const SmoothnessClass& cls, const NoiseModel& noise, std::size_t n,
                          double h) {
  return 2.0 * cls.beta / std::pow(h, cls.r) + 2.0 * noise.gamma() / (h * h) - log_n(n);
}

namespace {

double solve_opt(const SmoothnessClass& cls, const NoiseModel& noise, std::size_t n) {
  auto f = [&](double h) { return bandwidth_residual(cls, noise, n, h); };
  double hi = 1.0;
  if (f(hi) >= 0.0) return hi;
  double lo = 1.0 / std::sqrt(log_n(n) / (2.0 * cls.beta + 2.0 * noise.gamma()) + 2.0);
  while (f(lo) <= 0.0) {
    lo *= 0.5;
    if (lo < 1e-300) throw NumericGuardError("bandwidth equation: no sign change found");
  }
  while (true) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

double inverse_sqrt_checked(double inner, const char* what) {
  if (!(inner > 0.0)) {
    std::ostringstream msg;
    msg << what << " is undefined: n too small (inner term " << inner << " <= 0)";
    throw ValidationError(msg.str());
  }
  return std::min(1.0, 1.0 / std::sqrt(inner));
}

}  // namespace

double bandwidth(const BandwidthRule& rule, std::size_t n, const NoiseModel& noise) {
  const double ln = log_n(n);
  const double g = noise.gamma();
  const auto& c = rule.cls;
  switch (rule.kind) {
    case BandwidthKind::fixed:
      if (!(rule.h > 0.0 && rule.h <= 1.0)) throw ValidationError("fixed h must lie in (0, 1]");
      return rule.h;
    case BandwidthKind::adaptive: {
      const double s = 2.0 * noise.eta() * ln / (1.0 - noise.eta());
      return inverse_sqrt_checked(s - std::sqrt(s), "adaptive bandwidth");
    }
    case BandwidthKind::opt:
      c.validate();
      return solve_opt(c, noise, n);
    case BandwidthKind::r2_closed:
      c.validate();
      return std::min(1.0, std::sqrt((2.0 * c.beta + 2.0 * g) / ln));
    case BandwidthKind::h1: {
      c.validate();
      const double a = ln / (2.0 * g);
      return inverse_sqrt_checked(a - c.beta / g * std::pow(a, c.r / 2.0), "h1");
    }
    case BandwidthKind::h2: {
      c.validate();
      BandwidthRule first = rule;
      first.kind = BandwidthKind::h1;
      const double h1 = bandwidth(first, n, noise);
      const double a = ln / (2.0 * g);
      return inverse_sqrt_checked(a - c.beta / g * std::pow(h1, -c.r), "h2");
    }
  }
  throw ValidationError("unknown bandwidth rule");
}

double bias_bound_sq(const SmoothnessClass& cls, double h) {
  return cls.L * std::pow(h, cls.r - 2.0) / (4.0 * pi * cls.beta * cls.r) *
         std::exp(-2.0 * cls.beta / std::pow(h, cls.r));
}

double variance_bound(const NoiseModel& noise, double h, std::size_t n) {
  const double g = noise.gamma();
  return std::exp(2.0 * g / (h * h)) / (8.0 * g * g * static_cast<double>(n));
}

double rate_phi2(const SmoothnessClass& cls, std::size_t n, const NoiseModel& noise) {
  cls.validate();
  if (cls.r == 2.0)
    return std::pow(static_cast<double>(n), -cls.beta / (cls.beta + noise.gamma()));
  BandwidthRule rule;
  rule.kind = BandwidthKind::opt;
  rule.cls = cls;
  return bias_bound_sq(cls, bandwidth(rule, n, noise));
}

// ---------------------------------------------------------------------------
// Estimator
// ---------------------------------------------------------------------------

WignerEstimator::WignerEstimator(const Dataset& ds, KernelTable table, std::size_t threads)
    : table_(std::move(table)), threads_(threads) {
  if (std::abs(ds.meta.eta - table_.spec().noise.eta()) > 0.0) {
    std::ostringstream msg;
    msg << "dataset eta " << fmt(ds.meta.eta) << " does not match kernel eta "
        << fmt(table_.spec().noise.eta());
    throw ValidationError(msg.str());
  }
  const double inv = 1.0 / std::sqrt(ds.meta.eta);
  const std::size_t n = ds.records.size();
  cos_.resize(n);
  sin_.resize(n);
  y_scaled_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cos_[i] = std::cos(ds.records[i].phi);
    sin_[i] = std::sin(ds.records[i].phi);
    y_scaled_[i] = ds.records[i].y * inv;
  }
  total_weight_ = static_cast<double>(n);
}

WignerEstimator::WignerEstimator(const Histogram2D& hist, double eta, KernelTable table,
                                 std::size_t threads)
    : table_(std::move(table)), threads_(threads) {
  if (std::abs(eta - table_.spec().noise.eta()) > 0.0)
    throw ValidationError("histogram eta does not match kernel eta");
  const double inv = 1.0 / std::sqrt(eta);
  for (std::size_t iy = 0; iy < hist.y_bins(); ++iy) {
    const double yc = 0.5 * (hist.y_edges[iy] + hist.y_edges[iy + 1]);
    for (std::size_t ip = 0; ip < hist.phi_bins(); ++ip) {
      const auto count = hist.at(iy, ip);
      if (count == 0) continue;
      const double pc = 0.5 * (hist.phi_edges[ip] + hist.phi_edges[ip + 1]);
      cos_.push_back(std::cos(pc));
      sin_.push_back(std::sin(pc));
      y_scaled_.push_back(yc * inv);
      weight_.push_back(static_cast<double>(count));
    }
  }
  total_weight_ = static_cast<double>(hist.total());
}

double WignerEstimator::kernel_sum(const PhasePoint& z) const {
  const std::size_t n = y_scaled_.size();
  const std::size_t blocks = (n + kRecordBlock - 1) / kRecordBlock;
  std::vector<double> partial(blocks);
  auto run_block = [&](std::size_t b) {
    CompensatedSum acc;
    const std::size_t end = std::min(n, (b + 1) * kRecordBlock);
    for (std::size_t i = b * kRecordBlock; i < end; ++i) {
      double u = z.q * cos_[i] + z.p * sin_[i] - y_scaled_[i];
      double k = table_(u);
      acc.add(weight_.empty() ? k : weight_[i] * k);
    }
    partial[b] = acc.value();
  };
  if (blocks >= 16 && threads_ != 1)
    detail::parallel_for(blocks, threads_, run_block);
  else
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  return pairwise_sum(partial, 0, blocks);
}

double WignerEstimator::operator()(const PhasePoint& z) const {
  if (total_weight_ == 0.0) throw ValidationError("estimator needs at least one record");
  return kernel_sum(z) / total_weight_;
}

double table_range(const Dataset& ds, const KernelSpec& spec, double z_radius) {
  double ymax = 0.0;
  for (const auto& r : ds.records) ymax = std::max(ymax, std::abs(r.y));
  return z_radius + ymax / std::sqrt(spec.noise.eta()) + 1.0;
}

double estimate_point(const Dataset& ds, const KernelTable& table, const PhasePoint& z) {
  return WignerEstimator(ds, table, 1)(z);
}

double estimate_point(const Dataset& ds, const KernelSpec& spec, const PhasePoint& z) {
  const double range = table_range(ds, spec, std::hypot(z.q, z.p));
  return estimate_point(ds, build_table(spec, range, suggested_table_step(spec)), z);
}

GridSpec GridSpec::parse(std::string_view text) {
  auto comma = text.find(',');
  if (comma == std::string_view::npos)
    throw ValidationError("--grid must look like qmin:qmax:steps,pmin:pmax:steps");
  auto axis = [](std::string_view part, double& lo, double& hi, std::size_t& steps) {
    std::string s(part);
    std::istringstream in(s);
    char c1 = 0, c2 = 0;
    long long st = -1;
    if (!(in >> lo >> c1 >> hi >> c2 >> st) || c1 != ':' || c2 != ':' || st < 0 ||
        !in.eof() || !(std::isfinite(lo) && std::isfinite(hi)))
      throw ValidationError("--grid axis '" + s + "' must look like min:max:steps");
    steps = static_cast<std::size_t>(st);
  };
  GridSpec g;
  axis(text.substr(0, comma), g.q_min, g.q_max, g.q_steps);
  axis(text.substr(comma + 1), g.p_min, g.p_max, g.p_steps);
  return g;
}

double GridSpec::q(std::size_t i) const {
  if (q_steps <= 1) return q_min;
  return q_min + (q_max - q_min) * static_cast<double>(i) / static_cast<double>(q_steps - 1);
}

double GridSpec::p(std::size_t j) const {
  if (p_steps <= 1) return p_min;
  return p_min + (p_max - p_min) * static_cast<double>(j) / static_cast<double>(p_steps - 1);
}

WignerGrid estimate_grid(const WignerEstimator& est, const GridSpec& grid, std::size_t threads) {
  WignerGrid out;
  for (std::size_t i = 0; i < grid.q_steps; ++i) out.q.push_back(grid.q(i));
  for (std::size_t j = 0; j < grid.p_steps; ++j) out.p.push_back(grid.p(j));
  out.values.resize(out.q.size() * out.p.size());
  detail::parallel_for(out.values.size(), threads, [&](std::size_t idx) {
    const std::size_t iq = idx / out.p.size();
    const std::size_t ip = idx % out.p.size();
    out.values[idx] = est({out.q[iq], out.p[ip]});
  });
  return out;
}

WignerGrid estimate_grid(const Dataset& ds, const KernelSpec& spec, const GridSpec& grid,
                         std::size_t threads) {
  const double zr = std::hypot(std::max(std::abs(grid.q_min), std::abs(grid.q_max)),
                               std::max(std::abs(grid.p_min), std::abs(grid.p_max)));
  WignerEstimator est(ds, build_table(spec, table_range(ds, spec, zr), suggested_table_step(spec)),
                      1);
  return estimate_grid(est, grid, threads);
}

double expected_estimate(const DensityMatrix& rho, const KernelSpec& spec, const PhasePoint& z) {
  auto profile = radial_fourier_profile(rho);
  const double r = std::hypot(z.q, z.p);
  const double h = spec.h;
  auto integrand = [&](double t) {
    double m = spec.variant == KernelVariant::sharp ? 1.0 : modified_taper(h, t);
    return t * std::cyl_bessel_j(0.0, t * r) * profile(t) * m;
  };
  double v = quad::adaptive(integrand, 0.0, 1.0 / h, 1e-14).value;
  if (spec.variant == KernelVariant::modified)
    v += quad::adaptive(integrand, 1.0 / h, 2.0 / h, 1e-14).value;
  return v / (2.0 * pi);
}

// ---------------------------------------------------------------------------
// Risk
// ---------------------------------------------------------------------------

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t rep) {
  return splitmix64_mix(seed + (static_cast<std::uint64_t>(rep) + 1) * CounterRng::kGamma);
}

RiskReport risk_eval(const RiskConfig& config) {
  if (config.points.empty()) throw ValidationError("risk needs at least one point");
  if (config.reps == 0) throw ValidationError("--reps must be >= 1");
  if (config.n < 2) throw ValidationError("--n must be >= 2");
  const NoiseModel noise(config.eta);
  const DensityMatrix rho = materialize(config.state);
  const std::string state_text = to_string(config.state);

  RiskReport report;
  report.points = config.points;
  report.reps = config.reps;
  report.h = bandwidth(config.rule, config.n, noise);
  report.rate_phi2 = rate_phi2(config.rule.cls, config.n, noise);
  for (const auto& z : config.points) report.true_values.push_back(wigner_eval(rho, z));

  const KernelSpec spec(report.h, noise, config.variant);
  double zr = 0.0;
  for (const auto& z : config.points) zr = std::max(zr, std::hypot(z.q, z.p));
  const double u_max = zr + x_max(rho.dim()) + 8.0 * noise.noise_sd() / std::sqrt(noise.eta()) + 1.0;
  const double step = suggested_table_step(spec);
  const KernelTable table = build_table(spec, u_max, step);

  SamplerConfig sc = config.sampler;
  sc.threads = 1;
  const QuadratureSampler sampler(rho, sc);

  report.per_rep_losses.assign(config.reps, std::vector<double>(config.points.size()));
  std::vector<std::vector<double>> estimates(config.reps,
                                             std::vector<double>(config.points.size()));
  detail::parallel_for(config.reps, config.threads, [&](std::size_t j) {
    Dataset ds = simulate(sampler, state_text, config.n, config.eta,
                          repetition_seed(config.seed, j));
    std::optional<WignerEstimator> est;
    if (config.bins > 0)
      est.emplace(bin2d(ds.records, config.bins), config.eta, table, 1);
    else
      est.emplace(ds, table, 1);
    for (std::size_t i = 0; i < config.points.size(); ++i) {
      double w = (*est)(config.points[i]);
      estimates[j][i] = w;
      double d = w - report.true_values[i];
      report.per_rep_losses[j][i] = d * d;
    }
  });

  const std::size_t np = config.points.size();
  report.per_point_mse.assign(np, 0.0);
  report.per_point_mean.assign(np, 0.0);
  for (std::size_t j = 0; j < config.reps; ++j)
    for (std::size_t i = 0; i < np; ++i) {
      report.per_point_mse[i] += report.per_rep_losses[j][i];
      report.per_point_mean[i] += estimates[j][i];
    }
  for (std::size_t i = 0; i < np; ++i) {
    report.per_point_mse[i] /= static_cast<double>(config.reps);
    report.per_point_mean[i] /= static_cast<double>(config.reps);
  }

  nlohmann::ordered_json m;
  m["state"] = state_text;
  m["dim"] = rho.dim();
  m["tail_mass"] = rho.tail_mass();
  m["eta"] = config.eta;
  m["rule"] = to_string(config.rule);
  m["beta"] = config.rule.cls.beta;
  m["r"] = config.rule.cls.r;
  m["L"] = config.rule.cls.L;
  m["variant"] = to_string(config.variant);
  m["n"] = config.n;
  m["reps"] = config.reps;
  m["seed"] = config.seed;
  m["bins"] = config.bins;
  m["h"] = report.h;
  m["table_umax"] = u_max;
  m["table_step"] = step;
  m["generator_version"] = generator_version(sc);
  m["repetition_seed"] = "splitmix64_mix(seed + (j + 1) * 0x9e3779b97f4a7c15)";
  report.manifest = m.dump();
  return report;
}

std::string to_json(const RiskReport& report) {
  nlohmann::ordered_json j;
  j["manifest"] = nlohmann::ordered_json::parse(report.manifest);
  j["h"] = report.h;
  j["reps"] = report.reps;
  j["rate_phi2"] = report.rate_phi2;
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    nlohmann::ordered_json p;
    p["q"] = report.points[i].q;
    p["p"] = report.points[i].p;
    p["true"] = report.true_values[i];
    p["mean_estimate"] = report.per_point_mean[i];
    p["mse"] = report.per_point_mse[i];
    pts.push_back(std::move(p));
  }
  j["points"] = std::move(pts);
  j["per_rep_losses"] = report.per_rep_losses;
  return j.dump(2);
}

}  // namespace wignerscope
