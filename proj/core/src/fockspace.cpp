#include "wignerscope/fockspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wignerscope/errors.hpp"

namespace wignerscope {

namespace {

constexpr double kBig = 1e150;
constexpr double kLogBig = 345.38776394910684;  // log(1e150)

constexpr double kHermTol = 1e-10;
constexpr double kPsdTol = 1e-10;
constexpr double kTraceTol = 1e-12;
constexpr std::size_t kMaxAutoDim = 4000;

}  // namespace

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

void hermite_psi_all(double x, std::span<double> out) {
  if (out.empty()) return;
  double log_scale = -0.5 * x * x - 0.25 * std::log(std::numbers::pi);
  double prev = 0.0;
  double cur = 1.0;
  out[0] = std::exp(log_scale);
  for (std::size_t j = 0; j + 1 < out.size(); ++j) {
    const double jd = static_cast<double>(j);
    double next = x * std::sqrt(2.0 / (jd + 1.0)) * cur - std::sqrt(jd / (jd + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kBig) {
      cur /= kBig;
      prev /= kBig;
      log_scale += kLogBig;
    }
    out[j + 1] = cur * std::exp(log_scale);
  }
}

std::vector<double> hermite_psi_all(std::size_t max_order, double x) {
  std::vector<double> out(max_order + 1);
  hermite_psi_all(x, out);
  return out;
}

double hermite_psi(std::size_t j, double x) {
  if (j > kMaxSpecialOrder)
    throw UnsupportedOrderError("hermite_psi: order " + std::to_string(j) +
                                " exceeds the supported budget of " +
                                std::to_string(kMaxSpecialOrder));
  if (!std::isfinite(x)) throw ValidationError("hermite_psi: x must be finite");
  std::vector<double> buf(j + 1);
  hermite_psi_all(x, buf);
  return buf[j];
}

double laguerre(std::size_t k, double x) {
  if (k > kMaxSpecialOrder)
    throw UnsupportedOrderError("laguerre: order " + std::to_string(k) +
                                " exceeds the supported budget of " +
                                std::to_string(kMaxSpecialOrder));
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = 1.0 - x;
  for (std::size_t n = 1; n < k; ++n) {
    const double nd = static_cast<double>(n);
    double next = ((2.0 * nd + 1.0 - x) * cur - nd * prev) / (nd + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

void laguerre_functions(std::size_t a, double x, std::span<double> out) {
  if (out.empty()) return;
  if (x < 0.0) throw ValidationError("laguerre_functions: x must be >= 0");
  const double ad = static_cast<double>(a);
  if (x == 0.0 && a > 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  double log_scale = -0.5 * x - 0.5 * std::lgamma(ad + 1.0);
  if (a > 0) log_scale += 0.5 * ad * std::log(x);
  double prev = 0.0;
  double cur = 1.0;
  out[0] = std::exp(log_scale);
  for (std::size_t n = 0; n + 1 < out.size(); ++n) {
    const double nd = static_cast<double>(n);
    double next = ((2.0 * nd + 1.0 + ad - x) * cur - std::sqrt(nd * (nd + ad)) * prev) /
                  std::sqrt((nd + 1.0) * (nd + 1.0 + ad));
    prev = cur;
    cur = next;
    if (std::abs(cur) > kBig) {
      cur /= kBig;
      prev /= kBig;
      log_scale += kLogBig;
    }
    out[n + 1] = cur * std::exp(log_scale);
  }
}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(std::size_t dim, std::vector<cplx> entries, double tail_mass)
    : dim_(dim), entries_(std::move(entries)), tail_mass_(tail_mass) {
  if (dim_ == 0) throw ValidationError("DensityMatrix: dim must be positive");
  if (entries_.size() != dim_ * dim_)
    throw ValidationError("DensityMatrix: expected " + std::to_string(dim_ * dim_) +
                          " entries, got " + std::to_string(entries_.size()));
  if (!(tail_mass_ >= 0.0) || tail_mass_ > 1.0)
    throw ValidationError("DensityMatrix: tail_mass must lie in [0, 1]");
  for (const auto& c : entries_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw ValidationError("DensityMatrix: non-finite entry");

  for (std::size_t j = 0; j < dim_; ++j) {
    cplx& d = entries_[j * dim_ + j];
    if (std::abs(d.imag()) > kHermTol)
      throw ValidationError("DensityMatrix: diagonal entry " + std::to_string(j) +
                            " is not real");
    d = {d.real(), 0.0};
    if (d.real() < -kTraceTol)
      throw ValidationError("DensityMatrix: negative diagonal entry " + std::to_string(j));
    for (std::size_t k = j + 1; k < dim_; ++k) {
      cplx& upper = entries_[j * dim_ + k];
      cplx& lower = entries_[k * dim_ + j];
      if (std::abs(upper - std::conj(lower)) > kHermTol)
        throw ValidationError("DensityMatrix: not Hermitian at (" + std::to_string(j) + ", " +
                              std::to_string(k) + ")");
      cplx avg = 0.5 * (upper + std::conj(lower));
      upper = avg;
      lower = std::conj(avg);
    }
  }

  double tr = trace();
  if (tr < 1.0 - tail_mass_ - kTraceTol || tr > 1.0 + kTraceTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "DensityMatrix: trace " << tr << " outside [1 - tail_mass, 1] (tail_mass "
        << tail_mass_ << ")";
    throw ValidationError(msg.str());
  }
  double lam = min_eigenvalue();
  if (lam < -kPsdTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "DensityMatrix: not positive semidefinite (smallest eigenvalue " << lam << ")";
    throw ValidationError(msg.str());
  }
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> populations, double tail_mass) {
  const std::size_t d = populations.size();
  std::vector<cplx> e(d * d, cplx{});
  for (std::size_t j = 0; j < d; ++j) e[j * d + j] = populations[j];
  return DensityMatrix(d, std::move(e), tail_mass);
}

DensityMatrix DensityMatrix::pure(std::span<const cplx> amplitudes) {
  const std::size_t d = amplitudes.size();
  std::vector<cplx> e(d * d);
  double norm = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    norm += std::norm(amplitudes[j]);
    for (std::size_t k = 0; k < d; ++k) e[j * d + k] = amplitudes[j] * std::conj(amplitudes[k]);
  }
  return DensityMatrix(d, std::move(e), std::max(0.0, 1.0 - norm));
}

double DensityMatrix::trace() const {
  double tr = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) tr += entries_[j * dim_ + j].real();
  return tr;
}

bool DensityMatrix::is_diagonal(double tol) const {
  for (std::size_t j = 0; j < dim_; ++j)
    for (std::size_t k = 0; k < dim_; ++k)
      if (j != k && std::abs(entries_[j * dim_ + k]) > tol) return false;
  return true;
}

double DensityMatrix::min_eigenvalue() const {
  if (is_diagonal()) {
    double m = entries_[0].real();
    for (std::size_t j = 1; j < dim_; ++j) m = std::min(m, entries_[j * dim_ + j].real());
    return m;
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k)
      m(j, k) = entries_[static_cast<std::size_t>(j) * dim_ + static_cast<std::size_t>(k)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix DensityMatrix::padded(std::size_t dim) const {
  if (dim <= dim_) return *this;
  std::vector<cplx> e(dim * dim, cplx{});
  for (std::size_t j = 0; j < dim_; ++j)
    for (std::size_t k = 0; k < dim_; ++k) e[j * dim + k] = entries_[j * dim_ + k];
  return DensityMatrix(dim, std::move(e), tail_mass_);
}

// ---------------------------------------------------------------------------
// State specs
// ---------------------------------------------------------------------------

namespace {

double parse_double(std::string_view s, std::string_view what) {
  std::string buf(s);
  try {
    std::size_t used = 0;
    double v = std::stod(buf, &used);
    if (used != buf.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("state spec: cannot parse " + std::string(what) + " from '" + buf +
                          "'");
  }
}

std::size_t parse_count(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("state spec: cannot parse " + std::string(what) + " from '" +
                          std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Amplitudes c_0..c_{len-1} generated by a ratio recurrence, plus the smallest
// truncation whose discarded norm is <= kTailTolerance.
struct Amplitudes {
  std::vector<cplx> c;
  std::vector<double> tail;  // tail[d] = sum_{m >= d} |c_m|^2
};

Amplitudes finish(std::vector<cplx> c) {
  Amplitudes out;
  out.tail.assign(c.size() + 1, 0.0);
  for (std::size_t m = c.size(); m-- > 0;) out.tail[m] = out.tail[m + 1] + std::norm(c[m]);
  out.c = std::move(c);
  return out;
}

Amplitudes coherent_amplitudes(cplx alpha, std::size_t len) {
  std::vector<cplx> c(len);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (std::size_t m = 0; m + 1 < len; ++m)
    c[m + 1] = c[m] * alpha / std::sqrt(static_cast<double>(m + 1));
  return finish(std::move(c));
}

Amplitudes squeezed_amplitudes(double s, std::size_t len) {
  std::vector<cplx> c(len, cplx{});
  const double t = std::tanh(s);
  c[0] = 1.0 / std::sqrt(std::cosh(s));
  for (std::size_t m = 0; m + 2 < len; m += 2) {
    const double md = static_cast<double>(m);
    c[m + 2] = c[m] * (-t) * std::sqrt((md + 1.0) / (md + 2.0));
  }
  return finish(std::move(c));
}

Amplitudes cat_amplitudes(cplx alpha, std::size_t len) {
  std::vector<cplx> c(len, cplx{});
  const double a2 = std::norm(alpha);
  const double norm = std::sqrt(2.0 * (1.0 + std::exp(-2.0 * a2)));
  cplx cur = std::exp(-0.5 * a2);
  for (std::size_t m = 0; m < len; ++m) {
    if (m % 2 == 0) c[m] = 2.0 * cur / norm;
    cur *= alpha / std::sqrt(static_cast<double>(m + 1));
  }
  return finish(std::move(c));
}

// Picks the truncation for a pure state whose amplitude generator is `gen`.
template <class Gen>
DensityMatrix materialize_pure(const StateSpec& spec, Gen gen, std::size_t hint) {
  std::size_t len = std::max<std::size_t>({spec.dim, hint, 16});
  while (true) {
    Amplitudes amp = gen(2 * len + 64);
    // Terms beyond the generated range are negligible once the generator
    // range is twice the working truncation.
    std::size_t needed = 1;
    while (needed < amp.c.size() && amp.tail[needed] > kTailTolerance) ++needed;
    std::size_t dim = spec.dim > 0 ? spec.dim : needed;
    if (spec.dim > 0 && spec.dim < needed) {
      if (!spec.auto_grow)
        throw TruncationError("state " + to_string(spec) + " needs dim >= " +
                              std::to_string(needed) + " for tail mass <= 1e-8; dim " +
                              std::to_string(spec.dim) + " leaves tail mass " +
                              fmt17(amp.tail[spec.dim]),
                              amp.tail[spec.dim], spec.dim);
      dim = needed;
    }
    if (dim > kMaxAutoDim)
      throw TruncationError("state " + to_string(spec) + " needs more than " +
                            std::to_string(kMaxAutoDim) + " basis states",
                            amp.tail[std::min(kMaxAutoDim, amp.c.size())], kMaxAutoDim);
    if (2 * dim + 64 <= amp.c.size()) {
      std::vector<cplx> c(amp.c.begin(), amp.c.begin() + static_cast<std::ptrdiff_t>(dim));
      return DensityMatrix::pure(c);
    }
    len = dim;
  }
}

}  // namespace

StateSpec parse_state_spec(std::string_view text) {
  StateSpec spec;
  auto at = text.rfind('@');
  if (at != std::string_view::npos && text.substr(0, 5) != "file:") {
    spec.dim = parse_count(text.substr(at + 1), "dim");
    text = text.substr(0, at);
  }
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ValidationError("state spec '" + std::string(text) +
                          "' must look like kind:args (fock:1, coherent:3,0, squeezed:0.5, "
                          "cat:3, file:rho.json)");
  std::string_view kind = text.substr(0, colon);
  std::string_view args = text.substr(colon + 1);
  auto parts = split(args, ',');

  if (kind == "fock") {
    if (parts.size() != 1) throw ValidationError("state spec fock:<n> takes one argument");
    spec.kind = FockState{parse_count(parts[0], "photon number")};
  } else if (kind == "coherent") {
    if (parts.size() != 2)
      throw ValidationError("state spec coherent:<q0>,<p0> takes two arguments");
    spec.kind = CoherentState{parse_double(parts[0], "q0"), parse_double(parts[1], "p0")};
  } else if (kind == "squeezed") {
    if (parts.size() != 1) throw ValidationError("state spec squeezed:<s> takes one argument");
    spec.kind = SqueezedState{parse_double(parts[0], "s")};
  } else if (kind == "cat") {
    if (parts.empty() || parts.size() > 2)
      throw ValidationError("state spec cat:<q0>[,q|p] takes one or two arguments");
    CatState cat{parse_double(parts[0], "q0"), CatAxis::q};
    if (parts.size() == 2) {
      if (parts[1] == "p")
        cat.axis = CatAxis::p;
      else if (parts[1] != "q")
        throw ValidationError("state spec cat: axis must be q or p");
    }
    spec.kind = cat;
  } else if (kind == "file") {
    std::string path(args);
    std::ifstream in(path);
    if (!in) throw ValidationError("state spec: cannot open file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    DensityMatrix rho = density_matrix_from_json(buf.str());
    CustomState custom;
    custom.entries.assign(rho.entries().begin(), rho.entries().end());
    custom.dim = rho.dim();
    custom.tail_mass = rho.tail_mass();
    custom.source = path;
    spec.kind = std::move(custom);
  } else {
    throw ValidationError("state spec: unknown kind '" + std::string(kind) + "'");
  }
  return spec;
}

std::string to_string(const StateSpec& spec) {
  std::string out;
  if (auto* f = std::get_if<FockState>(&spec.kind)) {
    out = "fock:" + std::to_string(f->n);
  } else if (auto* c = std::get_if<CoherentState>(&spec.kind)) {
    out = "coherent:" + fmt17(c->q0) + "," + fmt17(c->p0);
  } else if (auto* s = std::get_if<SqueezedState>(&spec.kind)) {
    out = "squeezed:" + fmt17(s->s);
  } else if (auto* cat = std::get_if<CatState>(&spec.kind)) {
    out = "cat:" + fmt17(cat->q0) + (cat->axis == CatAxis::p ? ",p" : "");
  } else {
    const auto& custom = std::get<CustomState>(spec.kind);
    return custom.source.empty() ? "custom:" + std::to_string(custom.dim)
                                 : "file:" + custom.source;
  }
  if (spec.dim > 0) out += "@" + std::to_string(spec.dim);
  return out;
}

DensityMatrix materialize(const StateSpec& spec) {
  if (auto* f = std::get_if<FockState>(&spec.kind)) {
    std::size_t dim = std::max<std::size_t>(spec.dim, 1);
    if (f->n >= dim) {
      if (spec.dim > 0 && !spec.auto_grow)
        throw TruncationError("fock:" + std::to_string(f->n) + " does not fit in dim " +
                              std::to_string(spec.dim),
                              1.0, spec.dim);
      dim = f->n + 1;
    }
    std::vector<cplx> e(dim * dim, cplx{});
    e[f->n * dim + f->n] = 1.0;
    return DensityMatrix(dim, std::move(e), 0.0);
  }
  if (auto* c = std::get_if<CoherentState>(&spec.kind)) {
    const cplx alpha{c->q0 / std::sqrt(2.0), c->p0 / std::sqrt(2.0)};
    const auto hint = static_cast<std::size_t>(std::norm(alpha) + 10.0 * std::abs(alpha) + 20.0);
    return materialize_pure(spec, [&](std::size_t len) { return coherent_amplitudes(alpha, len); },
                            hint);
  }
  if (auto* s = std::get_if<SqueezedState>(&spec.kind)) {
    const double t = std::tanh(std::abs(s->s));
    const auto hint = static_cast<std::size_t>(std::min(4000.0, 40.0 / (1.0 - t * t + 1e-3)));
    return materialize_pure(spec, [&](std::size_t len) { return squeezed_amplitudes(s->s, len); },
                            hint);
  }
  if (auto* cat = std::get_if<CatState>(&spec.kind)) {
    const double a = cat->q0 / std::sqrt(2.0);
    const cplx alpha = cat->axis == CatAxis::q ? cplx{a, 0.0} : cplx{0.0, a};
    const auto hint = static_cast<std::size_t>(a * a + 10.0 * std::abs(a) + 20.0);
    return materialize_pure(spec, [&](std::size_t len) { return cat_amplitudes(alpha, len); },
                            hint);
  }
  const auto& custom = std::get<CustomState>(spec.kind);
  DensityMatrix rho(custom.dim, custom.entries, custom.tail_mass);
  return rho.padded(spec.dim);
}

// ---------------------------------------------------------------------------
// Wigner functions
// ---------------------------------------------------------------------------

double wigner_eval(const DensityMatrix& rho, const PhasePoint& z) {
  const std::size_t d = rho.dim();
  const double r2 = z.q * z.q + z.p * z.p;
  const double x = 2.0 * r2;
  const double r = std::sqrt(r2);
  const cplx phase = r > 0.0 ? cplx{z.q / r, -z.p / r} : cplx{1.0, 0.0};

  std::vector<double> ell(d);
  laguerre_functions(0, x, ell);
  double diag = 0.0;
  for (std::size_t n = 0; n < d; ++n) {
    double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    diag += sgn * rho(n, n).real() * ell[n];
  }

  double off = 0.0;
  cplx rot{1.0, 0.0};
  for (std::size_t a = 1; a < d; ++a) {
    rot *= phase;
    if (r == 0.0) break;
    const std::size_t len = d - a;
    std::span<double> buf(ell.data(), len);
    laguerre_functions(a, x, buf);
    cplx acc{};
    for (std::size_t n = 0; n < len; ++n) {
      double sgn = (n % 2 == 0) ? 1.0 : -1.0;
      acc += sgn * rho(n + a, n) * buf[n];
    }
    off += (rot * acc).real();
  }
  return (diag + 2.0 * off) / std::numbers::pi;
}

double hs_distance_sq(const DensityMatrix& rho, const DensityMatrix& tau) {
  const std::size_t d = std::max(rho.dim(), tau.dim());
  double sum = 0.0;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < d; ++k) {
      cplx a = (j < rho.dim() && k < rho.dim()) ? rho(j, k) : cplx{};
      cplx b = (j < tau.dim() && k < tau.dim()) ? tau(j, k) : cplx{};
      sum += std::norm(a - b);
    }
  return sum;
}

}  // namespace wignerscope
