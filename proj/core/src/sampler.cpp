#include "wignerscope/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "parallel.hpp"
#include "wignerscope/errors.hpp"
#include "wignerscope/rng.hpp"

#ifndef WIGNERSCOPE_VERSION
#define WIGNERSCOPE_VERSION "dev"
#endif

namespace wignerscope {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kNegativeDensityTol = 1e-9;
constexpr double kInitialStep = 0.1;
constexpr double kMinStep = 1.0 / 1024.0;
constexpr std::size_t kValidationPhases = 8;

using cvec = std::vector<std::complex<double>>;

// Harmonics of the quadrature density on an equispaced x grid.
struct HarmonicGrid {
  double x0 = 0.0;
  double step = 0.0;
  std::size_t points = 0;
  std::size_t width = 0;  // harmonics per point
  cvec data;

  double density(std::size_t i, double phi) const {
    std::span<const std::complex<double>> g(data.data() + i * width, width);
    return density_from_harmonics(g, phi);
  }
};

HarmonicGrid harmonic_grid(const DensityMatrix& rho, double x0, double step, std::size_t points) {
  HarmonicGrid grid{x0, step, points, rho.dim(), cvec(points * rho.dim())};
  for (std::size_t i = 0; i < points; ++i)
    phase_harmonics(rho, x0 + step * static_cast<double>(i),
                    std::span(grid.data.data() + i * grid.width, grid.width));
  return grid;
}

double checked_density(double p, double x, double phi) {
  if (p < -kNegativeDensityTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "CDF tabulation failed: density " << p << " at x=" << x << ", phi=" << phi;
    throw ModelError(msg.str());
  }
  return std::max(p, 0.0);
}

// CDF model: node values F, node densities f, cubic Hermite inside cells.
struct CdfTable {
  std::vector<double> F;
  std::vector<double> f;
};

// `stride` picks every stride-th grid point as a model node; midpoints are at
// stride/2. Requires stride even.
CdfTable build_cdf(const HarmonicGrid& grid, std::size_t stride, double phi) {
  const std::size_t cells = (grid.points - 1) / stride;
  const double h = grid.step * static_cast<double>(stride);
  CdfTable t;
  t.F.resize(cells + 1);
  t.f.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    double x = grid.x0 + h * static_cast<double>(i);
    t.f[i] = checked_density(grid.density(i * stride, phi), x, phi);
  }
  t.F[0] = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    std::size_t mid = i * stride + stride / 2;
    double fm = checked_density(grid.density(mid, phi), grid.x0 + grid.step * mid, phi);
    t.F[i + 1] = t.F[i] + h / 6.0 * (t.f[i] + 4.0 * fm + t.f[i + 1]);
  }
  return t;
}

double hermite_cdf(const CdfTable& t, double h, std::size_t cell, double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * t.F[cell] + (s3 - 2 * s2 + s) * h * t.f[cell] +
         (-2 * s3 + 3 * s2) * t.F[cell + 1] + (s3 - s2) * h * t.f[cell + 1];
}

double hermite_pdf(const CdfTable& t, double h, std::size_t cell, double s) {
  const double s2 = s * s;
  return (6 * s2 - 6 * s) * (t.F[cell] - t.F[cell + 1]) / h + (3 * s2 - 4 * s + 1) * t.f[cell] +
         (3 * s2 - 2 * s) * t.f[cell + 1];
}

}  // namespace

std::string generator_version(const SamplerConfig& config) {
  return std::string("wignerscope-") + WIGNERSCOPE_VERSION + "/" + CounterRng::kName +
         "/inverse-cdf-phase" + std::to_string(config.phase_cache);
}

struct QuadratureSampler::Impl {
  DensityMatrix rho;
  SamplerConfig config;
  double x0 = 0.0;
  double step = 0.0;
  HarmonicGrid grid;  // nodes and midpoints, spacing step/2

  struct Slot {
    std::once_flag once;
    CdfTable table;
  };
  std::unique_ptr<Slot[]> slots;

  Impl(const DensityMatrix& r, SamplerConfig c) : rho(r), config(c) {
    if (config.phase_cache == 0) throw ValidationError("phase cache must hold at least 1 phase");
    const double xm = x_max(rho.dim());
    x0 = -xm;
    step = choose_step(xm);
    const auto cells = static_cast<std::size_t>(std::llround(2.0 * xm / step));
    grid = harmonic_grid(rho, x0, step / 2.0, 2 * cells + 1);
    slots = std::make_unique<Slot[]>(config.phase_cache);
  }

  // Halves the step until the CDF model at step h agrees with the model at
  // h/2 to within the tolerance at quarter points of every coarse cell.
  double choose_step(double xm) const {
    for (double h = kInitialStep; h >= kMinStep; h /= 2.0) {
      const auto cells = static_cast<std::size_t>(std::llround(2.0 * xm / h));
      const double hh = 2.0 * xm / static_cast<double>(cells);
      HarmonicGrid fine = harmonic_grid(rho, -xm, hh / 4.0, 4 * cells + 1);
      double worst = 0.0;
      for (std::size_t m = 0; m < kValidationPhases; ++m) {
        double phi = (static_cast<double>(m) + 0.5) * pi / kValidationPhases;
        CdfTable coarse = build_cdf(fine, 4, phi);
        CdfTable refined = build_cdf(fine, 2, phi);
        for (std::size_t i = 0; i < cells; ++i) {
          double a = hermite_cdf(coarse, hh, i, 0.25);
          double b = hermite_cdf(refined, hh / 2.0, 2 * i, 0.5);
          double c = hermite_cdf(coarse, hh, i, 0.75);
          double d = hermite_cdf(refined, hh / 2.0, 2 * i + 1, 0.5);
          worst = std::max({worst, std::abs(a - b), std::abs(c - d)});
        }
      }
      if (worst <= config.cdf_tolerance) return hh;
    }
    throw ModelError("CDF tabulation: no step >= 1/1024 meets the interpolation tolerance");
  }

  double phase(std::size_t m) const {
    return (static_cast<double>(m) + 0.5) * pi / static_cast<double>(config.phase_cache);
  }

  const CdfTable& table(std::size_t m) const {
    Slot& s = slots[m];
    std::call_once(s.once, [&] { s.table = build_cdf(grid, 2, phase(m)); });
    return s.table;
  }

  double invert(const CdfTable& t, double u) const {
    const double target = u * t.F.back();
    auto it = std::upper_bound(t.F.begin(), t.F.end(), target);
    std::size_t cell = it == t.F.begin() ? 0 : static_cast<std::size_t>(it - t.F.begin()) - 1;
    cell = std::min(cell, t.F.size() - 2);
    double lo = 0.0, hi = 1.0;
    double s = t.F[cell + 1] > t.F[cell] ? (target - t.F[cell]) / (t.F[cell + 1] - t.F[cell]) : 0.5;
    s = std::clamp(s, 0.0, 1.0);
    for (int it_n = 0; it_n < 60; ++it_n) {
      double g = hermite_cdf(t, step, cell, s) - target;
      if (g > 0.0)
        hi = s;
      else
        lo = s;
      if (std::abs(g) <= 1e-15 * std::max(1.0, t.F.back())) break;
      double d = step * hermite_pdf(t, step, cell, s);
      double next = d > 0.0 ? s - g / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (hi - lo < 1e-15) break;
      s = next;
    }
    return x0 + step * (static_cast<double>(cell) + s);
  }
};

QuadratureSampler::QuadratureSampler(const DensityMatrix& rho, SamplerConfig config)
    : impl_(std::make_unique<Impl>(rho, config)) {}

QuadratureSampler::~QuadratureSampler() = default;

const DensityMatrix& QuadratureSampler::state() const noexcept { return impl_->rho; }
const SamplerConfig& QuadratureSampler::config() const noexcept { return impl_->config; }
double QuadratureSampler::x_step() const noexcept { return impl_->step; }
double QuadratureSampler::x_limit() const noexcept { return -impl_->x0; }
double QuadratureSampler::cached_phase(std::size_t index) const { return impl_->phase(index); }

double QuadratureSampler::cdf(std::size_t index, double x) const {
  const CdfTable& t = impl_->table(index);
  if (x <= impl_->x0) return 0.0;
  double pos = (x - impl_->x0) / impl_->step;
  auto cell = static_cast<std::size_t>(pos);
  if (cell >= t.F.size() - 1) return t.F.back();
  return hermite_cdf(t, impl_->step, cell, pos - static_cast<double>(cell));
}

IdealRecord QuadratureSampler::draw(double u_phase, double u_select, double u_x) const {
  const auto M = static_cast<long long>(impl_->config.phase_cache);
  const double phi = pi * u_phase;
  // Mix the two neighbouring cached phases with linear weights; outside the
  // first and last cached phase use p(x | phi + pi) = p(-x | phi).
  double t = phi * static_cast<double>(M) / pi - 0.5;
  auto m0 = static_cast<long long>(std::floor(t));
  double w = t - static_cast<double>(m0);
  long long m = u_select < w ? m0 + 1 : m0;
  bool flip = false;
  if (m < 0) {
    m += M;
    flip = true;
  } else if (m >= M) {
    m -= M;
    flip = true;
  }
  double x = impl_->invert(impl_->table(static_cast<std::size_t>(m)), u_x);
  return {flip ? -x : x, phi};
}

std::vector<IdealRecord> QuadratureSampler::sample(std::size_t n, std::uint64_t seed) const {
  std::vector<IdealRecord> out(n);
  const CounterRng rng(seed, 0);
  const std::size_t blocks = (n + kRecordBlock - 1) / kRecordBlock;
  detail::parallel_for(blocks, impl_->config.threads, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kRecordBlock);
    for (std::size_t l = b * kRecordBlock; l < end; ++l)
      out[l] = draw(rng.uniform(3 * l), rng.uniform(3 * l + 1), rng.uniform_open(3 * l + 2));
  });
  return out;
}

std::vector<IdealRecord> sample_ideal(const DensityMatrix& rho, std::size_t n, std::uint64_t seed,
                                      const SamplerConfig& config) {
  if (n == 0) throw ValidationError("sample size n must be >= 1");
  return QuadratureSampler(rho, config).sample(n, seed);
}

Dataset add_noise(const std::vector<IdealRecord>& ideal, double eta, std::uint64_t seed,
                  std::size_t threads) {
  NoiseModel noise(eta);
  const double scale = std::sqrt(eta);
  const double sd = noise.noise_sd();
  const CounterRng rng(seed, 1);
  Dataset ds;
  const std::size_t n = ideal.size();
  ds.records.resize(n);
  const std::size_t blocks = (n + kRecordBlock - 1) / kRecordBlock;
  detail::parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kRecordBlock);
    for (std::size_t l = b * kRecordBlock; l < end; ++l)
      ds.records[l] = {scale * ideal[l].x + sd * rng.normal(l), ideal[l].phi};
  });
  ds.meta.eta = eta;
  ds.meta.seed = seed;
  ds.meta.n = n;
  return ds;
}

Dataset simulate(const QuadratureSampler& sampler, const std::string& state_text, std::size_t n,
                 double eta, std::uint64_t seed) {
  NoiseModel check(eta);
  if (n == 0) throw ValidationError("sample size n must be >= 1");
  auto ideal = sampler.sample(n, seed);
  Dataset ds = add_noise(ideal, eta, seed, sampler.config().threads);
  ds.meta.state = state_text;
  ds.meta.generator_version = generator_version(sampler.config());
  ds.meta.phase_cache = sampler.config().phase_cache;
  ds.meta.dim = sampler.state().dim();
  ds.meta.tail_mass = sampler.state().tail_mass();
  return ds;
}

Dataset simulate(const StateSpec& spec, std::size_t n, double eta, std::uint64_t seed,
                 const SamplerConfig& config) {
  NoiseModel check(eta);
  if (n == 0) throw ValidationError("sample size n must be >= 1");
  QuadratureSampler sampler(materialize(spec), config);
  return simulate(sampler, to_string(spec), n, eta, seed);
}

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

std::uint64_t Histogram2D::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

namespace {

std::vector<double> edges(double lo, double hi, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  e[bins] = hi;
  return e;
}

std::size_t bin_index(double v, double lo, double hi, std::size_t bins) {
  auto i = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
  return std::min(i, bins - 1);
}

}  // namespace

Histogram2D bin2d(const std::vector<SampleRecord>& records, std::size_t bins, double y_min,
                  double y_max) {
  if (bins < 2) throw ValidationError("bins must be >= 2");
  if (!(y_max > y_min)) throw ValidationError("bin2d: empty y range");
  Histogram2D h;
  h.y_edges = edges(y_min, y_max, bins);
  h.phi_edges = edges(0.0, pi, bins);
  h.counts.assign(bins * bins, 0);
  for (const auto& r : records) {
    if (r.y < y_min || r.y > y_max) continue;
    std::size_t iy = bin_index(r.y, y_min, y_max, bins);
    std::size_t ip = bin_index(r.phi, 0.0, pi, bins);
    ++h.counts[iy * bins + ip];
  }
  return h;
}

Histogram2D bin2d(const std::vector<SampleRecord>& records, std::size_t bins) {
  double lo = 0.0, hi = 0.0;
  if (!records.empty()) {
    auto [mn, mx] = std::minmax_element(records.begin(), records.end(),
                                        [](const auto& a, const auto& b) { return a.y < b.y; });
    lo = mn->y;
    hi = mx->y;
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return bin2d(records, bins, lo, hi);
}

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kMetaPrefix = "# meta: ";

std::string meta_json(const DatasetMeta& m) {
  nlohmann::ordered_json j;
  j["state"] = m.state;
  j["eta"] = m.eta;
  j["seed"] = m.seed;
  j["n"] = m.n;
  j["generator_version"] = m.generator_version;
  j["phase_cache"] = m.phase_cache;
  j["dim"] = m.dim;
  j["tail_mass"] = m.tail_mass;
  return j.dump();
}

DatasetMeta parse_meta(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    DatasetMeta m;
    m.state = j.at("state").get<std::string>();
    m.eta = j.at("eta").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n = j.at("n").get<std::size_t>();
    m.generator_version = j.value("generator_version", std::string());
    m.phase_cache = j.value("phase_cache", std::size_t{1024});
    m.dim = j.value("dim", std::size_t{0});
    m.tail_mass = j.value("tail_mass", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad metadata: ") + e.what(), 1);
  }
}

double parse_field(const std::string& s, std::size_t line, const char* name) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\r')) ++end;
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw ParseError(std::string("cannot parse ") + name + " from '" + s + "'", line);
  return v;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  DatasetMeta meta = ds.meta;
  meta.n = ds.records.size();
  out << kMetaPrefix << meta_json(meta) << "\n" << "y,phi\n";
  char buf[64];
  for (const auto& r : ds.records) {
    int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.y, r.phi);
    out.write(buf, len);
  }
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file, expected '# meta: {...}'", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind(kMetaPrefix, 0) != 0) throw ParseError("expected '# meta: {...}' header", 1);
  Dataset ds;
  ds.meta = parse_meta(line.substr(std::char_traits<char>::length(kMetaPrefix)));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "y,phi" && ds.records.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError("expected two comma-separated values 'y,phi'", lineno);
    double y = parse_field(line.substr(0, comma), lineno, "y");
    double phi = parse_field(line.substr(comma + 1), lineno, "phi");
    if (phi < 0.0 || phi > pi)
      throw ParseError("phi = " + line.substr(comma + 1) + " outside [0, pi]", lineno);
    ds.records.push_back({y, phi});
  }
  if (ds.meta.n != ds.records.size())
    throw ParseError("metadata declares n = " + std::to_string(ds.meta.n) + " but the file has " +
                         std::to_string(ds.records.size()) + " records",
                     lineno);
  return ds;
}

}  // namespace wignerscope
