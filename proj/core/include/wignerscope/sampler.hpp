#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wignerscope/fockspace.hpp"
#include "wignerscope/tomography.hpp"

namespace wignerscope {

/// Noisy homodyne record (Y, Phi).
struct SampleRecord {
  double y = 0.0;
  double phi = 0.0;
  bool operator==(const SampleRecord&) const = default;
};

/// Noiseless quadrature draw (X, Phi).
struct IdealRecord {
  double x = 0.0;
  double phi = 0.0;
};

struct DatasetMeta {
  std::string state;  ///< canonical state spec text
  double eta = 0.9;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::string generator_version;
  std::size_t phase_cache = 1024;
  std::size_t dim = 0;
  double tail_mass = 0.0;
  bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
  std::vector<SampleRecord> records;
  DatasetMeta meta;
  bool operator==(const Dataset&) const = default;
};

struct SamplerConfig {
  std::size_t phase_cache = 1024;  ///< number of cached phase tables on [0, pi)
  double cdf_tolerance = 1e-6;     ///< interpolation error budget of the tabulated CDF
  std::size_t threads = 0;         ///< 0 = hardware concurrency; never changes results
};

/// Records are generated in fixed blocks so the output does not depend on
/// the number of worker threads.
inline constexpr std::size_t kRecordBlock = 4096;

std::string generator_version(const SamplerConfig& config);

/// Inverse-CDF sampler for p_rho(x | phi). Phase tables are built lazily and
/// are safe to share between threads.
class QuadratureSampler {
 public:
  explicit QuadratureSampler(const DensityMatrix& rho, SamplerConfig config = {});
  ~QuadratureSampler();
  QuadratureSampler(const QuadratureSampler&) = delete;
  QuadratureSampler& operator=(const QuadratureSampler&) = delete;

  const DensityMatrix& state() const noexcept;
  const SamplerConfig& config() const noexcept;
  double x_step() const noexcept;
  double x_limit() const noexcept;

  /// Maps (u_phase, u_select, u_x) in [0,1)^3 to one draw. Pure function.
  IdealRecord draw(double u_phase, double u_select, double u_x) const;
  /// Tabulated CDF of the cached phase `index` at x.
  double cdf(std::size_t index, double x) const;
  double cached_phase(std::size_t index) const;

  std::vector<IdealRecord> sample(std::size_t n, std::uint64_t seed) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<IdealRecord> sample_ideal(const DensityMatrix& rho, std::size_t n, std::uint64_t seed,
                                      const SamplerConfig& config = {});

/// y = sqrt(eta) x + sqrt((1-eta)/2) g with g from the noise stream of `seed`.
/// meta.eta, meta.seed and meta.n are filled in; other meta fields are left
/// for the caller.
Dataset add_noise(const std::vector<IdealRecord>& ideal, double eta, std::uint64_t seed,
                  std::size_t threads = 0);

/// materialize + sample_ideal + add_noise with full metadata.
Dataset simulate(const StateSpec& spec, std::size_t n, double eta, std::uint64_t seed,
                 const SamplerConfig& config = {});
/// Same, reusing a prepared sampler (for repeated experiments on one state).
Dataset simulate(const QuadratureSampler& sampler, const std::string& state_text, std::size_t n,
                 double eta, std::uint64_t seed);

struct Histogram2D {
  std::vector<double> y_edges;    ///< bins + 1 edges
  std::vector<double> phi_edges;  ///< bins + 1 edges over [0, pi]
  std::vector<std::uint64_t> counts;  ///< row-major [y_bin][phi_bin]
  std::size_t y_bins() const { return y_edges.size() - 1; }
  std::size_t phi_bins() const { return phi_edges.size() - 1; }
  std::uint64_t at(std::size_t iy, std::size_t iphi) const { return counts[iy * phi_bins() + iphi]; }
  std::uint64_t total() const;
};

/// bins x bins histogram over (y, phi). The y range defaults to the data range.
Histogram2D bin2d(const std::vector<SampleRecord>& records, std::size_t bins);
Histogram2D bin2d(const std::vector<SampleRecord>& records, std::size_t bins, double y_min,
                  double y_max);

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace wignerscope
